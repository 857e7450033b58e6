// include/phmm/synth.h

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

#ifndef PHMM_SYNTH_H_
#define PHMM_SYNTH_H_

#include <cstdint>
#include <string>
#include <vector>

#include "phmm/corpus.h"

namespace phmm {

// One emitting state of a radical: a diagonal Gaussian plus a nominal
// duration in frames.
struct RadicalState {
  std::vector<double> mean;
  std::vector<double> var;
  int duration = 1;
};

struct Radical {
  std::vector<RadicalState> states;
};

struct RadicalInventory {
  std::vector<Radical> radicals;
  std::uint64_t seed = 0;

  int Dim() const;
  void Validate() const;
};

// A synthetic "character" is an ordered sequence of radicals; its
// ground-truth state sequence is the concatenation of the radical states.
struct CharacterDefinition {
  std::vector<int> radicals;
};

// Maps (char, state position) to the generating radical-state identity.
// Identities are dense over the (radical, state) pairs actually used.
struct GroundTruthTying {
  std::vector<std::vector<int>> state_identity;  // [char][position]
  int identity_count = 0;

  void Save(const std::string &path) const;
  static GroundTruthTying Load(const std::string &path);
};

struct SynthConfig {
  int n_lines = 0;
  int line_len = 1;
  double dur_jitter = 0.0;  // in [0, 1)
  std::uint64_t seed = 0;
};

struct SynthResult {
  Corpus corpus;
  GroundTruthTying ground_truth;
};

// Each line is a uniformly random character sequence; every ground-truth
// state emits a run of frames sampled from its Gaussian with duration
// nominal * U[1-jitter, 1+jitter], rounded and floored at 1.  A pure
// function of the seed (line i uses substream DeriveSeed(seed, i)).
SynthResult SynthCorpus(const RadicalInventory &inventory,
                        const std::vector<CharacterDefinition> &chars,
                        const SynthConfig &config);

struct SynthSpec {
  RadicalInventory inventory;
  std::vector<CharacterDefinition> chars;
  std::vector<std::string> labels;
};

// JSON description of an inventory + character set (see README).
SynthSpec LoadSynthSpec(const std::string &path);
void SaveSynthSpec(const SynthSpec &spec, const std::string &path);

// The standard radical benchmark: 8 radicals (one state each, D=4, unit
// variance, nominal duration 3) with pairwise center separation >= 10x the
// within-cluster spread, and 40 two-radical characters.  The character list
// contains transposed pairs such as (0,1)/(1,0) and four duplicated
// compositions, so recognition error rates stay away from zero and
// single-state models are genuinely handicapped.  Centers are drawn from
// the given seed by rejection sampling.
SynthSpec MakeRadicalBenchmark(std::uint64_t seed);

constexpr int kBenchmarkRadicals = 8;
constexpr int kBenchmarkChars = 40;
constexpr int kBenchmarkDim = 4;
constexpr int kBenchmarkStatesPerChar = 2;
constexpr double kBenchmarkJitter = 0.3;

}  // namespace phmm

#endif  // PHMM_SYNTH_H_
