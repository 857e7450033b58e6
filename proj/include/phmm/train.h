// include/phmm/train.h

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

#ifndef PHMM_TRAIN_H_
#define PHMM_TRAIN_H_

#include <vector>

#include "phmm/model.h"

namespace phmm {

// Sequences shorter than their concatenated state chain cannot be aligned.
// By default they are skipped with a warning; strict mode makes them fatal.
struct FlatStartResult {
  HmmModelSet model;
  std::vector<Alignment> alignments;  // empty for skipped sequences
  int used = 0;
  int skipped = 0;
};

// Uniform segmentation start: every usable sequence is cut evenly across
// its characters' states, single Gaussians are estimated from the cuts and
// transitions from the segment durations.  vocab_size 0 means infer from
// the corpus; pass the tying to flat-start a tied model, null for untied.
FlatStartResult FlatStart(const Corpus &corpus, int positions, int vocab_size,
                          const StateTying *tying, double var_floor,
                          bool strict_length);

struct AlignResult {
  Alignment alignment;
  double loglik = 0.0;  // path log-probability including the final exit
};

// Max-probability path through the concatenation of the transcription's
// character HMMs, entered at the first state and left from the last.
AlignResult AlignSequence(const HmmModelSet &model, const FeatureSequence &seq,
                          const Transcription &labels);

struct TrainConfig {
  int iters = 6;
  // Component targets, spread evenly across the iterations; {1, 2, 4} with
  // six iterations trains two at each size.
  std::vector<int> mixture_schedule = {1, 2, 4};
  bool strict_length = false;
};

struct TrainLog {
  std::vector<double> loglik;    // total over used sequences, per iteration
  std::vector<int> mixtures;     // component target in effect per iteration
  int used = 0;
  int skipped = 0;
};

// Hard-EM: forced alignment (parallel over sequences, reduced in sequence
// order), hard component assignment, MLE re-estimation with add-one
// smoothed transitions.  A state left without frames keeps its previous
// emission and triggers a warning.
HmmModelSet ViterbiTrain(const HmmModelSet &init, const Corpus &corpus,
                         const TrainConfig &config, TrainLog *log = nullptr);

// Splits the heaviest component (lowest index on ties) until `target`
// components: weight halves, means move to mu +/- 0.2 sigma, variances copy.
void SplitToTarget(GmmEmission *emission, int target);

// Per (character, position) statistics over forced-aligned frames of the
// given model; records cover the full vocab x positions grid, including
// zero-count entries.  alignments_out, when given, receives the alignment
// of every used sequence (skipped ones stay empty).
StatsDump CollectTyingStats(const HmmModelSet &model, const Corpus &corpus,
                            bool strict_length = false,
                            std::vector<Alignment> *alignments_out = nullptr);

}  // namespace phmm

#endif  // PHMM_TRAIN_H_
