// include/phmm/model.h

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

#ifndef PHMM_MODEL_H_
#define PHMM_MODEL_H_

#include <span>
#include <string>
#include <vector>

#include "phmm/corpus.h"
#include "phmm/tying.h"

namespace phmm {

// Diagonal-covariance Gaussian mixture attached to one tied state.
struct GmmEmission {
  std::vector<double> weights;
  std::vector<std::vector<double>> means;
  std::vector<std::vector<double>> vars;

  int NumComps() const { return static_cast<int>(weights.size()); }
  double LogLik(std::span<const float> frame) const;
  // Hard assignment: argmax of weight * density, smaller index on ties.
  int BestComponent(std::span<const float> frame) const;
  void Validate(int dim, double var_floor) const;
};

// Left-to-right HMMs without skips: every character has `positions` states;
// state (c, p) emits through the shared GMM of its tied id.  An untied
// model is simply one whose tying is the identity map.
struct HmmModelSet {
  int dim = 0;
  double var_floor = kDefaultVarFloor;
  StateTying tying;
  std::vector<double> log_self;  // [char * positions + position]
  std::vector<double> log_fwd;   // forward out of the state (exit for last)
  std::vector<GmmEmission> emissions;  // [tied id]

  int VocabSize() const { return tying.vocab_size; }
  int Positions() const { return tying.positions; }
  int NumTiedStates() const { return tying.total; }

  const GmmEmission &EmissionAt(int char_id, int position) const {
    return emissions[tying.TiedId(char_id, position)];
  }
  double LogSelf(int char_id, int position) const {
    return log_self[static_cast<size_t>(char_id) * Positions() + position];
  }
  double LogFwd(int char_id, int position) const {
    return log_fwd[static_cast<size_t>(char_id) * Positions() + position];
  }

  // Gaussians contribute 2D+1 numbers each (mean, variance, weight); every
  // state adds one free transition parameter (self vs forward).
  long long ParameterCount() const;

  void Validate() const;
  // "PHMM" versioned binary container.
  void Save(const std::string &path) const;
  static HmmModelSet Load(const std::string &path);
};

StateTying IdentityTying(int vocab_size, int positions);

// Frame-level forced-alignment record.  char_index counts occurrences
// within the transcription, char_id is the vocabulary entry.
struct AlignFrame {
  int char_index = 0;
  int char_id = 0;
  int position = 0;
  int tied_id = 0;
};
using Alignment = std::vector<AlignFrame>;

// Text dump, one line per sequence: "seq_id: char,pos,tied char,pos,tied ...".
void SaveAlignments(const std::vector<Alignment> &alignments,
                    const std::string &path);
std::vector<Alignment> LoadAlignments(const std::string &path);

}  // namespace phmm

#endif  // PHMM_MODEL_H_
