// include/phmm/tying.h

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

#ifndef PHMM_TYING_H_
#define PHMM_TYING_H_

#include <string>
#include <utility>
#include <vector>

#include "phmm/gauss_stats.h"
#include "phmm/questions.h"
#include "phmm/synth.h"

namespace phmm {

// One node of a per-position decision tree.  Roots hold every character;
// leaves of the grown forest are the first-step clusters.
struct TreeNode {
  int id = -1;
  int position = 0;
  std::vector<int> members;  // char ids, sorted
  GaussStats stats;          // pooled over members at this position

  // Best admissible question found when the node was created, if any.
  int best_question = -1;
  double best_gain = 0.0;

  // Children once the split has been applied; -1 while a leaf.
  int left = -1;
  int right = -1;

  bool IsLeaf() const { return left < 0; }
};

struct AppliedSplit {
  int node = -1;
  int question = -1;
  double gain = 0.0;
};

struct Forest {
  int positions = 0;
  std::vector<TreeNode> nodes;  // nodes[0..positions-1] are the roots
  std::vector<AppliedSplit> trace;

  std::vector<int> LeafIds() const;  // ascending node id
  void SaveDot(int position, const std::string &path) const;
};

// Grows the per-position trees under one shared max priority queue keyed by
// best-question split gain, so positions compete for the leaf budget.  A
// split is admissible when both sides are non-empty with at least min_count
// frames and the gain is positive.  Stops at first_step_leaves total leaves
// or when nothing admissible remains.
Forest GrowTrees(const TyingStats &stats, const QuestionSet &questions,
                 int first_step_leaves, double min_count, double var_floor);

// The (character, position) -> tied-state id map.
struct StateTying {
  int vocab_size = 0;
  int positions = 0;
  int total = 0;                  // number of distinct tied states
  std::vector<int> tied;          // [char * positions + position]

  int TiedId(int char_id, int position) const {
    return tied[static_cast<size_t>(char_id) * positions + position];
  }
  double StatesPerChar() const {
    return static_cast<double>(total) / vocab_size;
  }

  void Validate() const;
  // "PHMT" text format: header, then "char position tied_id" lines.
  void Save(const std::string &path) const;
  static StateTying Load(const std::string &path);
};

struct AppliedMerge {
  int a = -1;
  int b = -1;
  int into = -1;
  double loss = 0.0;
};

// One second-step cluster, before and after merging.
struct Cluster {
  int position = 0;  // -1 once cross-position merging has mixed positions
  std::vector<std::pair<int, int>> members;  // (char, position), sorted
  GaussStats stats;
  bool alive = true;
};

struct ReclusterResult {
  StateTying tying;
  std::vector<Cluster> clusters;  // full history, dead and alive
  std::vector<AppliedMerge> trace;
};

// Bottom-up agglomerative pass: repeatedly merge the pair of clusters with
// the smallest expected log-likelihood loss until exactly target_n remain.
// Merges stay within one state position unless cross_position is set.
// Tied-state ids come out dense, numbered by first appearance in a
// char-major scan of (char, position).
ReclusterResult Recluster(const Forest &forest, int target_n,
                          bool cross_position, double var_floor);

struct TieOptions {
  double expansion = 2.0;  // first step grows to expansion * target_n leaves
  double min_count = 10.0;
  double var_floor = kDefaultVarFloor;
  bool cross_position = false;
};

struct TieResult {
  StateTying tying;
  Forest forest;
  std::vector<AppliedMerge> merges;
};

// The two-step procedure: grow to min(V*P, ceil(expansion * target_n))
// leaves (never fewer than the P roots), then recluster down to exactly
// target_n tied states.
TieResult TieStates(const TyingStats &stats, const QuestionSet &questions,
                    int target_n, const TieOptions &options);

// Member-weighted average over tied clusters of the largest fraction of
// members sharing one ground-truth identity.  1.0 means the tying equals
// the ground truth up to relabeling.
double TyingPurity(const StateTying &tying, const GroundTruthTying &gt);

}  // namespace phmm

#endif  // PHMM_TYING_H_
