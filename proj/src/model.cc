// src/model.cc

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

#include "phmm/model.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "phmm/binio.h"
#include "phmm/gauss_stats.h"

namespace phmm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double DiagGaussLogLik(std::span<const float> frame,
                       const std::vector<double> &mean,
                       const std::vector<double> &var) {
  double ll = 0.0;
  for (size_t d = 0; d < mean.size(); ++d) {
    double diff = frame[d] - mean[d];
    ll += std::log(var[d]) + diff * diff / var[d];
  }
  return -0.5 * (ll + kLog2Pi * static_cast<double>(mean.size()));
}

}  // namespace

double GmmEmission::LogLik(std::span<const float> frame) const {
  double best = kNegInf;
  std::vector<double> terms(weights.size(), kNegInf);
  for (size_t k = 0; k < weights.size(); ++k) {
    if (weights[k] <= 0.0) continue;
    terms[k] = std::log(weights[k]) + DiagGaussLogLik(frame, means[k], vars[k]);
    best = std::max(best, terms[k]);
  }
  if (best == kNegInf) return kNegInf;
  double sum = 0.0;
  for (double t : terms) {
    if (t != kNegInf) sum += std::exp(t - best);
  }
  return best + std::log(sum);
}

int GmmEmission::BestComponent(std::span<const float> frame) const {
  int best = -1;
  double best_ll = kNegInf;
  for (size_t k = 0; k < weights.size(); ++k) {
    if (weights[k] <= 0.0) continue;
    double ll = std::log(weights[k]) + DiagGaussLogLik(frame, means[k], vars[k]);
    if (best < 0 || ll > best_ll) {
      best = static_cast<int>(k);
      best_ll = ll;
    }
  }
  Require(best >= 0, "emission has no usable component");
  return best;
}

void GmmEmission::Validate(int dim, double var_floor) const {
  Require(!weights.empty(), "emission with no components");
  Require(means.size() == weights.size() && vars.size() == weights.size(),
          "emission component count mismatch");
  double sum = 0.0;
  for (size_t k = 0; k < weights.size(); ++k) {
    Require(weights[k] >= 0.0, "negative mixture weight");
    sum += weights[k];
    Require(static_cast<int>(means[k].size()) == dim &&
                static_cast<int>(vars[k].size()) == dim,
            "emission dimension mismatch");
    for (double v : vars[k]) {
      Require(v >= var_floor - 1e-12, "variance below floor");
      Require(std::isfinite(v), "non-finite variance");
    }
    for (double m : means[k]) Require(std::isfinite(m), "non-finite mean");
  }
  Require(std::abs(sum - 1.0) <= 1e-9, "mixture weights do not sum to 1");
}

long long HmmModelSet::ParameterCount() const {
  long long gauss = 0;
  for (const GmmEmission &e : emissions) {
    gauss += static_cast<long long>(e.NumComps()) * (2LL * dim + 1);
  }
  // One free transition parameter per (char, position) state.
  return gauss + static_cast<long long>(VocabSize()) * Positions();
}

void HmmModelSet::Validate() const {
  tying.Validate();
  Require(dim > 0, "model dimension must be positive");
  Require(var_floor > 0.0, "variance floor must be positive");
  size_t n_states = static_cast<size_t>(VocabSize()) * Positions();
  Require(log_self.size() == n_states && log_fwd.size() == n_states,
          "transition table size mismatch");
  for (size_t i = 0; i < n_states; ++i) {
    double p = std::exp(log_self[i]) + std::exp(log_fwd[i]);
    Require(std::abs(p - 1.0) <= 1e-9,
            "transition probabilities do not sum to 1");
  }
  Require(static_cast<int>(emissions.size()) == tying.total,
          "one emission required per tied state");
  for (const GmmEmission &e : emissions) e.Validate(dim, var_floor);
}

void HmmModelSet::Save(const std::string &path) const {
  std::ofstream os = OpenBinaryOut(path);
  WriteMagic(os, "PHMM");
  WriteU32(os, 1);
  WriteU32(os, static_cast<std::uint32_t>(VocabSize()));
  WriteU32(os, static_cast<std::uint32_t>(Positions()));
  WriteU32(os, static_cast<std::uint32_t>(dim));
  WriteF64(os, var_floor);
  WriteU32(os, static_cast<std::uint32_t>(tying.total));
  for (int id : tying.tied) WriteU32(os, static_cast<std::uint32_t>(id));
  for (double v : log_self) WriteF64(os, v);
  for (double v : log_fwd) WriteF64(os, v);
  for (const GmmEmission &e : emissions) {
    WriteU32(os, static_cast<std::uint32_t>(e.NumComps()));
    for (int k = 0; k < e.NumComps(); ++k) {
      WriteF64(os, e.weights[k]);
      for (double m : e.means[k]) WriteF64(os, m);
      for (double v : e.vars[k]) WriteF64(os, v);
    }
  }
  RequireIo(os.good(), "write failed: " + path);
}

HmmModelSet HmmModelSet::Load(const std::string &path) {
  std::ifstream is = OpenBinaryIn(path);
  ExpectMagic(is, "PHMM", path);
  std::uint32_t version = ReadU32(is, "version");
  RequireIo(version == 1, path + ": unsupported version " +
                              std::to_string(version));
  HmmModelSet model;
  std::uint32_t vocab = ReadU32(is, "vocab size");
  std::uint32_t positions = ReadU32(is, "positions");
  model.dim = static_cast<int>(ReadU32(is, "dim"));
  model.var_floor = ReadF64(is, "var floor");
  std::uint32_t total = ReadU32(is, "tied-state count");
  RequireIo(vocab > 0 && positions > 0 && model.dim > 0,
            "malformed header in " + path);
  model.tying.vocab_size = static_cast<int>(vocab);
  model.tying.positions = static_cast<int>(positions);
  model.tying.total = static_cast<int>(total);
  size_t n_states = static_cast<size_t>(vocab) * positions;
  model.tying.tied.resize(n_states);
  for (size_t i = 0; i < n_states; ++i) {
    model.tying.tied[i] = static_cast<int>(ReadU32(is, "tying entry"));
  }
  model.log_self.resize(n_states);
  model.log_fwd.resize(n_states);
  for (size_t i = 0; i < n_states; ++i) {
    model.log_self[i] = ReadF64(is, "self transition");
  }
  for (size_t i = 0; i < n_states; ++i) {
    model.log_fwd[i] = ReadF64(is, "forward transition");
  }
  model.emissions.resize(total);
  for (std::uint32_t t = 0; t < total; ++t) {
    GmmEmission &e = model.emissions[t];
    std::uint32_t comps = ReadU32(is, "component count");
    RequireIo(comps > 0, path + ": emission with zero components");
    e.weights.resize(comps);
    e.means.assign(comps, std::vector<double>(model.dim));
    e.vars.assign(comps, std::vector<double>(model.dim));
    for (std::uint32_t k = 0; k < comps; ++k) {
      e.weights[k] = ReadF64(is, "mixture weight");
      for (int d = 0; d < model.dim; ++d) {
        e.means[k][d] = ReadF64(is, "mean");
      }
      for (int d = 0; d < model.dim; ++d) {
        e.vars[k][d] = ReadF64(is, "variance");
      }
    }
  }
  model.Validate();
  return model;
}

StateTying IdentityTying(int vocab_size, int positions) {
  Require(vocab_size > 0 && positions > 0, "empty identity tying");
  StateTying tying;
  tying.vocab_size = vocab_size;
  tying.positions = positions;
  tying.total = vocab_size * positions;
  tying.tied.resize(static_cast<size_t>(vocab_size) * positions);
  for (size_t i = 0; i < tying.tied.size(); ++i) {
    tying.tied[i] = static_cast<int>(i);
  }
  return tying;
}

void SaveAlignments(const std::vector<Alignment> &alignments,
                    const std::string &path) {
  std::ofstream os = OpenTextOut(path);
  for (size_t i = 0; i < alignments.size(); ++i) {
    os << i << ':';
    for (const AlignFrame &f : alignments[i]) {
      os << ' ' << f.char_id << ',' << f.position << ',' << f.tied_id;
    }
    os << '\n';
  }
  RequireIo(os.good(), "write failed: " + path);
}

std::vector<Alignment> LoadAlignments(const std::string &path) {
  std::ifstream is = OpenTextIn(path);
  std::vector<Alignment> alignments;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    size_t colon = line.find(':');
    RequireIo(colon != std::string::npos, path + ": missing ':' in line");
    Alignment alignment;
    std::istringstream fs(line.substr(colon + 1));
    std::string token;
    int char_index = -1, prev_char = -1, prev_pos = -1;
    while (fs >> token) {
      AlignFrame frame;
      char c1, c2;
      std::istringstream ts(token);
      ts >> frame.char_id >> c1 >> frame.position >> c2 >> frame.tied_id;
      RequireIo(!ts.fail() && c1 == ',' && c2 == ',',
                path + ": malformed frame token '" + token + "'");
      // A new character starts whenever the id changes or position drops.
      if (frame.char_id != prev_char || frame.position < prev_pos) {
        ++char_index;
      }
      frame.char_index = char_index;
      prev_char = frame.char_id;
      prev_pos = frame.position;
      alignment.push_back(frame);
    }
    alignments.push_back(std::move(alignment));
  }
  return alignments;
}

}  // namespace phmm
