// tests/test_lm.cc

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
#include "phmm/lm.h"
#include "test_util.h"

namespace phmm {
namespace {

TEST_CASE("unigram single-token corpus hand case") {
  CharNgramLm lm = TrainLm({{0}}, 1, 0.1);
  CHECK(lm.vocab_size == 1);
  // One character token; events are {char 0, end}.
  CHECK(std::exp(lm.LogProb(-1, 0)) == doctest::Approx(1.1 / 1.2));
  CHECK(std::exp(lm.LogProb(-1, lm.EndId())) == doctest::Approx(0.1 / 1.2));
  lm.Validate();
}

TEST_CASE("unigram counts characters only") {
  // Tokens: 0 0 1 over V=2; end marker smoothed but never counted.
  CharNgramLm lm = TrainLm({{0, 1}, {0}}, 1, 0.1);
  CHECK(lm.vocab_size == 2);
  double denom = 3.0 + 0.1 * 3;
  CHECK(std::exp(lm.LogProb(-1, 0)) == doctest::Approx(2.1 / denom));
  CHECK(std::exp(lm.LogProb(-1, 1)) == doctest::Approx(1.1 / denom));
  CHECK(std::exp(lm.LogProb(-1, lm.EndId())) ==
        doctest::Approx(0.1 / denom));
}

TEST_CASE("bigram contexts include start and end transitions") {
  CharNgramLm lm = TrainLm({{0, 1}}, 2, 0.1);
  CHECK(lm.order == 2);
  // After char 0 the only observed event is char 1.
  double denom = 1.0 + 0.1 * 3;
  CHECK(std::exp(lm.LogProb(0, 1)) == doctest::Approx(1.1 / denom));
  CHECK(std::exp(lm.LogProb(0, 0)) == doctest::Approx(0.1 / denom));
  // Line start observed once, into char 0.
  CHECK(std::exp(lm.LogProb(-1, 0)) == doctest::Approx(1.1 / denom));
  // Char 1 ends the line.
  CHECK(std::exp(lm.LogProb(1, lm.EndId())) == doctest::Approx(1.1 / denom));
  lm.Validate();
}

TEST_CASE("every context distributes probability one") {
  std::vector<Transcription> corpus = {{0, 2, 1}, {2, 2}, {1}};
  for (int order : {1, 2}) {
    CharNgramLm lm = TrainLm(corpus, order, 0.25);
    lm.Validate();
    int contexts = order == 1 ? 1 : lm.vocab_size + 1;
    for (int ctx = 0; ctx < contexts; ++ctx) {
      double sum = 0.0;
      for (int e = 0; e <= lm.vocab_size; ++e) {
        sum += std::exp(lm.LogProb(ctx - 1, e));
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("seen continuations outscore unseen ones") {
  std::vector<Transcription> corpus;
  for (int i = 0; i < 50; ++i) corpus.push_back({0, 1, 2});
  CharNgramLm lm = TrainLm(corpus, 2, 0.1);
  CHECK(lm.LogProb(0, 1) > lm.LogProb(0, 2));
  CHECK(lm.LogProb(1, 2) > lm.LogProb(1, 0));
  CHECK(lm.LogProb(2, lm.EndId()) > lm.LogProb(2, 0));
}

TEST_CASE("lm files round-trip to the digit") {
  TempDir dir("lm");
  CharNgramLm lm = TrainLm({{0, 1, 0}, {1, 1}}, 2, 0.1);
  lm.Save(dir.File("lm.phml"));
  CharNgramLm loaded = CharNgramLm::Load(dir.File("lm.phml"));
  CHECK(loaded.order == lm.order);
  CHECK(loaded.vocab_size == lm.vocab_size);
  CHECK(loaded.add_k == lm.add_k);
  REQUIRE(loaded.logp.size() == lm.logp.size());
  for (size_t i = 0; i < lm.logp.size(); ++i) {
    CHECK(loaded.logp[i] == lm.logp[i]);
  }
}

TEST_CASE("an explicit vocabulary covers unseen characters") {
  CharNgramLm lm = TrainLm({{0}}, 1, 0.1, 4);
  CHECK(lm.vocab_size == 4);
  lm.Validate();
  CHECK(std::exp(lm.LogProb(-1, 3)) == doctest::Approx(0.1 / (1.0 + 0.5)));
}

}  // namespace
}  // namespace phmm
