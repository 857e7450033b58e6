// tests/test_model.cc

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

#include <cmath>
#include <vector>

#include "doctest.h"
#include "phmm/model.h"
#include "phmm/prng.h"
#include "test_util.h"

namespace phmm {
namespace {

GmmEmission TwoCompEmission() {
  GmmEmission e;
  e.weights = {0.75, 0.25};
  e.means = {{0.0, 1.0}, {4.0, -2.0}};
  e.vars = {{1.0, 2.0}, {0.5, 0.5}};
  return e;
}

double HandLogLik(const GmmEmission &e, const std::vector<float> &frame) {
  double total = 0.0;
  for (int k = 0; k < e.NumComps(); ++k) {
    double lp = std::log(e.weights[k]);
    for (size_t d = 0; d < frame.size(); ++d) {
      double diff = frame[d] - e.means[k][d];
      lp += -0.5 * (std::log(2.0 * M_PI * e.vars[k][d]) +
                    diff * diff / e.vars[k][d]);
    }
    total += std::exp(lp);
  }
  return std::log(total);
}

HmmModelSet TinyModel(std::uint64_t seed) {
  SplitMix64 rng(seed);
  HmmModelSet model;
  model.dim = 2;
  model.var_floor = 1e-4;
  model.tying = IdentityTying(2, 2);
  model.log_self.resize(4);
  model.log_fwd.resize(4);
  for (int s = 0; s < 4; ++s) {
    double p = rng.NextUniform(0.3, 0.8);
    model.log_self[s] = std::log(p);
    model.log_fwd[s] = std::log(1.0 - p);
  }
  for (int s = 0; s < 4; ++s) {
    GmmEmission e;
    e.weights = {1.0};
    e.means = {{rng.NextUniform(-9, 9), rng.NextUniform(-9, 9)}};
    e.vars = {{rng.NextUniform(0.5, 2.0), rng.NextUniform(0.5, 2.0)}};
    model.emissions.push_back(e);
  }
  model.Validate();
  return model;
}

TEST_CASE("mixture log-likelihood agrees with a direct evaluation") {
  GmmEmission e = TwoCompEmission();
  SplitMix64 rng(8);
  for (int i = 0; i < 30; ++i) {
    std::vector<float> frame = {static_cast<float>(rng.NextUniform(-6, 6)),
                                static_cast<float>(rng.NextUniform(-6, 6))};
    CHECK(e.LogLik(std::span<const float>(frame)) ==
          doctest::Approx(HandLogLik(e, frame)).epsilon(1e-10));
  }
}

TEST_CASE("component assignment is the weighted posterior argmax") {
  GmmEmission e = TwoCompEmission();
  std::vector<float> near_first = {0.1f, 1.1f};
  std::vector<float> near_second = {4.0f, -2.0f};
  CHECK(e.BestComponent(std::span<const float>(near_first)) == 0);
  CHECK(e.BestComponent(std::span<const float>(near_second)) == 1);

  GmmEmission sym;
  sym.weights = {0.5, 0.5};
  sym.means = {{1.0}, {1.0}};
  sym.vars = {{1.0}, {1.0}};
  std::vector<float> frame = {0.0f};
  CHECK(sym.BestComponent(std::span<const float>(frame)) == 0);
}

TEST_CASE("emission validation flags bad weights and variances") {
  GmmEmission e = TwoCompEmission();
  e.Validate(2, 1e-4);
  GmmEmission bad_weights = e;
  bad_weights.weights = {0.7, 0.2};
  CHECK_THROWS_AS(bad_weights.Validate(2, 1e-4), ValidationError);
  GmmEmission bad_var = e;
  bad_var.vars[0][1] = 1e-6;
  CHECK_THROWS_AS(bad_var.Validate(2, 1e-4), ValidationError);
}

TEST_CASE("identity tying maps each state to itself") {
  StateTying tying = IdentityTying(3, 2);
  CHECK(tying.total == 6);
  for (int c = 0; c < 3; ++c) {
    for (int p = 0; p < 2; ++p) {
      CHECK(tying.TiedId(c, p) == c * 2 + p);
    }
  }
}

TEST_CASE("parameter count follows the Gaussian and transition arithmetic") {
  HmmModelSet model = TinyModel(1);
  // 4 tied states, 1 component each, D=2: 4 * 1 * (2*2+1) = 20 Gaussians
  // numbers plus 4 free transitions.
  CHECK(model.ParameterCount() == 24);
  model.emissions[0].weights = {0.5, 0.5};
  model.emissions[0].means.push_back(model.emissions[0].means[0]);
  model.emissions[0].vars.push_back(model.emissions[0].vars[0]);
  CHECK(model.ParameterCount() == 29);
}

TEST_CASE("models survive a save/load cycle exactly") {
  TempDir dir("model");
  HmmModelSet model = TinyModel(17);
  model.emissions[2].weights = {0.5, 0.5};
  model.emissions[2].means.push_back({1.5, -4.0});
  model.emissions[2].vars.push_back({0.75, 1.25});
  model.Save(dir.File("m.phmm"));
  HmmModelSet loaded = HmmModelSet::Load(dir.File("m.phmm"));
  loaded.Validate();
  CHECK(loaded.dim == model.dim);
  CHECK(loaded.var_floor == model.var_floor);
  CHECK(loaded.tying.tied == model.tying.tied);
  CHECK(loaded.log_self == model.log_self);
  CHECK(loaded.log_fwd == model.log_fwd);
  REQUIRE(loaded.emissions.size() == model.emissions.size());
  for (size_t s = 0; s < model.emissions.size(); ++s) {
    CHECK(loaded.emissions[s].weights == model.emissions[s].weights);
    CHECK(loaded.emissions[s].means == model.emissions[s].means);
    CHECK(loaded.emissions[s].vars == model.emissions[s].vars);
  }
}

TEST_CASE("model validation rejects inconsistent transitions") {
  HmmModelSet model = TinyModel(3);
  model.log_self[1] = std::log(0.9);
  model.log_fwd[1] = std::log(0.3);
  CHECK_THROWS_AS(model.Validate(), ValidationError);
}

TEST_CASE("alignment dumps round-trip") {
  TempDir dir("align");
  std::vector<Alignment> alignments(2);
  alignments[0] = {{0, 3, 0, 6}, {0, 3, 1, 7}, {1, 0, 0, 0}};
  alignments[1] = {{0, 1, 0, 2}};
  SaveAlignments(alignments, dir.File("a.txt"));
  auto loaded = LoadAlignments(dir.File("a.txt"));
  REQUIRE(loaded.size() == 2);
  REQUIRE(loaded[0].size() == 3);
  for (size_t i = 0; i < alignments.size(); ++i) {
    for (size_t t = 0; t < alignments[i].size(); ++t) {
      CHECK(loaded[i][t].char_id == alignments[i][t].char_id);
      CHECK(loaded[i][t].position == alignments[i][t].position);
      CHECK(loaded[i][t].tied_id == alignments[i][t].tied_id);
    }
  }
}

}  // namespace
}  // namespace phmm
