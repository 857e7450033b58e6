// src/synth.cc

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

#include "phmm/synth.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <utility>

#include "json.hpp"
#include "phmm/binio.h"
#include "phmm/prng.h"

namespace phmm {

int RadicalInventory::Dim() const {
  if (radicals.empty() || radicals.front().states.empty()) return 0;
  return static_cast<int>(radicals.front().states.front().mean.size());
}

void RadicalInventory::Validate() const {
  Require(!radicals.empty(), "inventory: no radicals");
  int dim = Dim();
  Require(dim > 0, "inventory: zero-dimensional radicals");
  for (size_t r = 0; r < radicals.size(); ++r) {
    Require(!radicals[r].states.empty(),
            "inventory: radical " + std::to_string(r) + " has no states");
    for (const RadicalState &state : radicals[r].states) {
      Require(static_cast<int>(state.mean.size()) == dim &&
                  static_cast<int>(state.var.size()) == dim,
              "inventory: dimension mismatch in radical " + std::to_string(r));
      Require(state.duration >= 1,
              "inventory: nominal duration < 1 in radical " +
                  std::to_string(r));
      for (double v : state.var) {
        Require(v > 0.0, "inventory: non-positive variance in radical " +
                             std::to_string(r));
      }
    }
  }
}

namespace {

// Dense identity over (radical, state) pairs in order of first use.
GroundTruthTying BuildGroundTruth(const RadicalInventory &inventory,
                                  const std::vector<CharacterDefinition> &chars) {
  GroundTruthTying gt;
  std::map<std::pair<int, int>, int> ids;
  gt.state_identity.resize(chars.size());
  for (size_t c = 0; c < chars.size(); ++c) {
    for (int r : chars[c].radicals) {
      Require(r >= 0 && r < static_cast<int>(inventory.radicals.size()),
              "character " + std::to_string(c) + " references invalid radical " +
                  std::to_string(r));
      int n_states = static_cast<int>(inventory.radicals[r].states.size());
      for (int s = 0; s < n_states; ++s) {
        auto [it, inserted] = ids.try_emplace({r, s}, gt.identity_count);
        if (inserted) ++gt.identity_count;
        gt.state_identity[c].push_back(it->second);
      }
    }
    Require(!gt.state_identity[c].empty(),
            "character " + std::to_string(c) + " has no states");
  }
  return gt;
}

int SampleDuration(SplitMix64 &rng, int nominal, double jitter) {
  double lo = nominal * (1.0 - jitter);
  double hi = nominal * (1.0 + jitter);
  long long d = std::llround(rng.NextUniform(lo, hi));
  return static_cast<int>(std::max(1LL, d));
}

}  // namespace

SynthResult SynthCorpus(const RadicalInventory &inventory,
                        const std::vector<CharacterDefinition> &chars,
                        const SynthConfig &config) {
  inventory.Validate();
  Require(!chars.empty(), "synth: empty character set");
  Require(config.dur_jitter >= 0.0 && config.dur_jitter < 1.0,
          "synth: dur_jitter must be in [0, 1)");
  Require(config.n_lines > 0, "synth: n_lines must be positive");
  Require(config.line_len > 0, "synth: line_len must be positive");

  SynthResult result;
  result.ground_truth = BuildGroundTruth(inventory, chars);
  int dim = inventory.Dim();
  int vocab = static_cast<int>(chars.size());

  std::vector<std::vector<double>> stddev_cache;  // per radical, flat states
  for (const Radical &radical : inventory.radicals) {
    std::vector<double> sd;
    for (const RadicalState &state : radical.states) {
      for (double v : state.var) sd.push_back(std::sqrt(v));
    }
    stddev_cache.push_back(std::move(sd));
  }

  for (int line = 0; line < config.n_lines; ++line) {
    SplitMix64 rng(DeriveSeed(config.seed, static_cast<std::uint64_t>(line)));
    Transcription transcript(config.line_len);
    for (int k = 0; k < config.line_len; ++k) {
      transcript[k] = static_cast<int>(rng.NextBelow(vocab));
    }
    std::vector<float> frames;
    for (int c : transcript) {
      for (int r : chars[c].radicals) {
        const Radical &radical = inventory.radicals[r];
        for (size_t s = 0; s < radical.states.size(); ++s) {
          const RadicalState &state = radical.states[s];
          int duration =
              SampleDuration(rng, state.duration, config.dur_jitter);
          for (int t = 0; t < duration; ++t) {
            for (int d = 0; d < dim; ++d) {
              double sd = stddev_cache[r][s * dim + d];
              frames.push_back(static_cast<float>(
                  state.mean[d] + sd * rng.NextGaussian()));
            }
          }
        }
      }
    }
    FeatureSequence seq(dim, static_cast<int>(frames.size()) / dim);
    std::copy(frames.begin(), frames.end(),
              seq.MutableFrame(0).data());
    result.corpus.sequences.push_back(std::move(seq));
    result.corpus.transcripts.push_back(std::move(transcript));
  }
  result.corpus.Validate(vocab);
  return result;
}

void GroundTruthTying::Save(const std::string &path) const {
  std::ofstream os = OpenTextOut(path);
  os << "PHMG v1 K=" << identity_count << '\n';
  for (size_t c = 0; c < state_identity.size(); ++c) {
    for (size_t p = 0; p < state_identity[c].size(); ++p) {
      os << c << ' ' << p << ' ' << state_identity[c][p] << '\n';
    }
  }
  RequireIo(os.good(), "write failed: " + path);
}

GroundTruthTying GroundTruthTying::Load(const std::string &path) {
  std::ifstream is = OpenTextIn(path);
  std::string tag, ver, kfield;
  is >> tag >> ver >> kfield;
  RequireIo(tag == "PHMG" && ver == "v1" && kfield.rfind("K=", 0) == 0,
            "malformed header in " + path);
  GroundTruthTying gt;
  gt.identity_count = std::stoi(kfield.substr(2));
  int c, p, id;
  while (is >> c >> p >> id) {
    RequireIo(c >= 0 && p >= 0 && id >= 0 && id < gt.identity_count,
              path + ": out-of-range entry");
    if (c >= static_cast<int>(gt.state_identity.size())) {
      gt.state_identity.resize(c + 1);
    }
    if (p >= static_cast<int>(gt.state_identity[c].size())) {
      gt.state_identity[c].resize(p + 1, -1);
    }
    gt.state_identity[c][p] = id;
  }
  return gt;
}

SynthSpec LoadSynthSpec(const std::string &path) {
  std::ifstream is = OpenTextIn(path);
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception &e) {
    throw IoError(path + ": invalid JSON: " + e.what());
  }
  SynthSpec spec;
  try {
    spec.inventory.seed = j.value("seed", 0ULL);
    for (const auto &jr : j.at("radicals")) {
      Radical radical;
      for (const auto &js : jr.at("states")) {
        RadicalState state;
        state.mean = js.at("mean").get<std::vector<double>>();
        state.var = js.at("var").get<std::vector<double>>();
        state.duration = js.value("duration", 1);
        radical.states.push_back(std::move(state));
      }
      spec.inventory.radicals.push_back(std::move(radical));
    }
    for (const auto &jc : j.at("chars")) {
      CharacterDefinition def;
      def.radicals = jc.get<std::vector<int>>();
      spec.chars.push_back(std::move(def));
    }
    if (j.contains("labels")) {
      spec.labels = j.at("labels").get<std::vector<std::string>>();
    }
  } catch (const nlohmann::json::exception &e) {
    throw IoError(path + ": missing or mistyped field: " + e.what());
  }
  if (spec.labels.empty()) {
    for (size_t c = 0; c < spec.chars.size(); ++c) {
      spec.labels.push_back("C" + std::to_string(c));
    }
  }
  spec.inventory.Validate();
  return spec;
}

void SaveSynthSpec(const SynthSpec &spec, const std::string &path) {
  nlohmann::json j;
  j["seed"] = spec.inventory.seed;
  j["radicals"] = nlohmann::json::array();
  for (const Radical &radical : spec.inventory.radicals) {
    nlohmann::json jr;
    jr["states"] = nlohmann::json::array();
    for (const RadicalState &state : radical.states) {
      jr["states"].push_back({{"mean", state.mean},
                              {"var", state.var},
                              {"duration", state.duration}});
    }
    j["radicals"].push_back(std::move(jr));
  }
  j["chars"] = nlohmann::json::array();
  for (const CharacterDefinition &def : spec.chars) {
    j["chars"].push_back(def.radicals);
  }
  j["labels"] = spec.labels;
  std::ofstream os = OpenTextOut(path);
  os << j.dump(2) << '\n';
  RequireIo(os.good(), "write failed: " + path);
}

SynthSpec MakeRadicalBenchmark(std::uint64_t seed) {
  const double kMinSeparation = 10.0;  // 10x the unit within-cluster spread
  SplitMix64 rng(DeriveSeed(seed, 0x42454e43ULL));  // "BENC"

  // Rejection-sample well-separated radical centers.
  std::vector<std::vector<double>> centers;
  for (int attempt = 0; attempt < 100000; ++attempt) {
    std::vector<double> c(kBenchmarkDim);
    for (double &v : c) v = rng.NextUniform(-25.0, 25.0);
    bool ok = true;
    for (const auto &other : centers) {
      double d2 = 0.0;
      for (int d = 0; d < kBenchmarkDim; ++d) {
        d2 += (c[d] - other[d]) * (c[d] - other[d]);
      }
      if (d2 < kMinSeparation * kMinSeparation) {
        ok = false;
        break;
      }
    }
    if (ok) centers.push_back(std::move(c));
    if (static_cast<int>(centers.size()) == kBenchmarkRadicals) break;
  }
  Require(static_cast<int>(centers.size()) == kBenchmarkRadicals,
          "benchmark: failed to place separated radical centers");

  SynthSpec spec;
  spec.inventory.seed = seed;
  for (const auto &center : centers) {
    RadicalState state;
    state.mean = center;
    state.var.assign(kBenchmarkDim, 1.0);
    state.duration = 3;
    Radical radical;
    radical.states.push_back(std::move(state));
    spec.inventory.radicals.push_back(std::move(radical));
  }

  // Transposed pairs first: these are the compositions a 1-state-per-char
  // model cannot tell apart.
  std::vector<std::pair<int, int>> pairs = {{0, 1}, {1, 0}, {2, 3}, {3, 2},
                                            {4, 5}, {5, 4}, {6, 7}, {7, 6}};
  for (int i = 0; i < kBenchmarkRadicals &&
                  static_cast<int>(pairs.size()) < kBenchmarkChars - 4;
       ++i) {
    for (int k = 0; k < kBenchmarkRadicals &&
                    static_cast<int>(pairs.size()) < kBenchmarkChars - 4;
         ++k) {
      if (i == k) continue;
      std::pair<int, int> p{i, k};
      if (std::find(pairs.begin(), pairs.end(), p) == pairs.end()) {
        pairs.push_back(p);
      }
    }
  }
  // Four duplicated compositions: distinct char ids that no acoustic model
  // can separate, keeping every system's error rate off zero.
  for (int i = 0; i < 4; ++i) pairs.push_back(pairs[i]);
  Require(static_cast<int>(pairs.size()) == kBenchmarkChars,
          "benchmark: character list size mismatch");

  for (size_t c = 0; c < pairs.size(); ++c) {
    CharacterDefinition def;
    def.radicals = {pairs[c].first, pairs[c].second};
    spec.chars.push_back(std::move(def));
    std::ostringstream label;
    label << "C" << (c < 10 ? "0" : "") << c;
    spec.labels.push_back(label.str());
  }
  return spec;
}

}  // namespace phmm
