// include/phmm/questions.h

// Copyright 2026  PHMM Toolkit Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef PHMM_QUESTIONS_H_
#define PHMM_QUESTIONS_H_

#include <cstdint>
#include <string>
#include <vector>

#include "phmm/gauss_stats.h"

namespace phmm {

// One character as a point for clustering: the concatenated per-position
// ML mean vectors, weighted by the character's total frame count so that
// frequent characters dominate likelihood scores.
struct CharEmbedding {
  int char_id = 0;
  std::vector<double> vec;  // P * D entries
  double weight = 0.0;
};

// A position with no frames for some character borrows the frame-weighted
// global mean of that position.  Throws on an all-empty dump.
std::vector<CharEmbedding> EmbedCharacters(const TyingStats &stats);

// A question is a subset of the character vocabulary, used later to split
// tree nodes by membership.
struct Question {
  int id = 0;
  std::vector<int> members;  // sorted, unique
};

struct QuestionSet {
  int vocab_size = 0;
  std::vector<Question> questions;

  void Validate() const;
  // "PHMQ" text format: header, then "id: c1 c2 ..." per question.
  void Save(const std::string &path) const;
  static QuestionSet Load(const std::string &path);
};

struct QuestionConfig {
  int restarts = 10;
  int max_kmeans_iters = 50;
  double var_floor = kDefaultVarFloor;
  std::uint64_t seed = 0;
};

// One candidate bipartition of a point set.  Sides are sorted indices into
// the point array; "left" always holds the smallest index so equal
// partitions compare equal.
struct Bipartition {
  std::vector<int> left;
  std::vector<int> right;
  double gain = 0.0;  // split gain of the weighted embedding statistics
};

// Best-of-restarts weighted 2-means on a subset of the embeddings.
// Deterministic in the rng state; ties between equal-gain runs go to the
// lexicographically smaller left side.  Requires >= 2 points.
Bipartition BestTwoMeansSplit(const std::vector<CharEmbedding> &points,
                              const std::vector<int> &subset,
                              const QuestionConfig &config,
                              std::uint64_t node_seed);

// Recursive binary splitting of the vocabulary.  The root holds every
// character; the node with the largest split gain is popped from a max
// priority queue and split by the best of `restarts` 2-means runs, until
// every leaf is a single character.  Every tree node becomes a question,
// numbered in creation order, so a vocabulary of V yields 2V-1 questions.
QuestionSet BuildQuestionSet(const std::vector<CharEmbedding> &embeddings,
                             const QuestionConfig &config);

}  // namespace phmm

#endif  // PHMM_QUESTIONS_H_
