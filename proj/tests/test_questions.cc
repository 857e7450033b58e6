// tests/test_questions.cc

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

#include <algorithm>
#include <set>
#include <vector>

#include "doctest.h"
#include "phmm/prng.h"
#include "phmm/questions.h"
#include "test_util.h"

namespace phmm {
namespace {

// Clustered embeddings: `centers` well-separated points, each owning a run
// of characters placed at center + small noise.
std::vector<CharEmbedding> ClusteredEmbeddings(
    const std::vector<std::vector<double>> &centers, int per_cluster,
    double noise, SplitMix64 *rng) {
  std::vector<CharEmbedding> points;
  int id = 0;
  for (const auto &center : centers) {
    for (int i = 0; i < per_cluster; ++i) {
      CharEmbedding e;
      e.char_id = id++;
      e.weight = 5.0 + rng->NextBelow(20);
      for (double c : center) e.vec.push_back(c + noise * rng->NextGaussian());
      points.push_back(e);
    }
  }
  return points;
}

double PartitionGain(const std::vector<CharEmbedding> &points,
                     const std::vector<int> &left,
                     const std::vector<int> &right, double floor) {
  int dim = static_cast<int>(points[0].vec.size());
  GaussStats l(dim), r(dim);
  for (int i : left) {
    l.AddPoint(std::span<const double>(points[i].vec), points[i].weight);
  }
  for (int i : right) {
    r.AddPoint(std::span<const double>(points[i].vec), points[i].weight);
  }
  return SplitGain(Merged(l, r), l, r, floor);
}

TEST_CASE("question sets have 2V-1 questions rooted at the vocabulary") {
  SplitMix64 rng(11);
  for (int v : {1, 2, 3, 7, 12}) {
    std::vector<CharEmbedding> points;
    for (int c = 0; c < v; ++c) {
      CharEmbedding e;
      e.char_id = c;
      e.weight = 3.0;
      e.vec = {rng.NextUniform(-5, 5), rng.NextUniform(-5, 5)};
      points.push_back(e);
    }
    QuestionConfig config;
    config.seed = 17;
    QuestionSet set = BuildQuestionSet(points, config);
    set.Validate();
    CHECK(set.vocab_size == v);
    CHECK(static_cast<int>(set.questions.size()) == 2 * v - 1);

    // Root covers everything; singletons all appear as leaves.
    CHECK(static_cast<int>(set.questions[0].members.size()) == v);
    int singletons = 0;
    for (const auto &q : set.questions) {
      if (q.members.size() == 1) ++singletons;
    }
    CHECK(singletons == v);

    // Every non-singleton question is the disjoint union of two others.
    std::set<std::vector<int>> sets;
    for (const auto &q : set.questions) sets.insert(q.members);
    for (const auto &q : set.questions) {
      if (q.members.size() < 2) continue;
      bool found = false;
      for (const auto &cand : sets) {
        if (cand.size() >= q.members.size() || cand == q.members) continue;
        if (!std::includes(q.members.begin(), q.members.end(), cand.begin(),
                           cand.end())) {
          continue;
        }
        std::vector<int> rest;
        std::set_difference(q.members.begin(), q.members.end(), cand.begin(),
                            cand.end(), std::back_inserter(rest));
        if (sets.count(rest)) {
          found = true;
          break;
        }
      }
      CHECK(found);
    }
  }
}

TEST_CASE("identical seeds give identical question sets") {
  SplitMix64 rng(4);
  std::vector<CharEmbedding> points;
  for (int c = 0; c < 9; ++c) {
    CharEmbedding e;
    e.char_id = c;
    e.weight = 2.0 + c;
    e.vec = {rng.NextGaussian(), rng.NextGaussian(), rng.NextGaussian()};
    points.push_back(e);
  }
  QuestionConfig config;
  config.seed = 123;
  QuestionSet a = BuildQuestionSet(points, config);
  QuestionSet b = BuildQuestionSet(points, config);
  REQUIRE(a.questions.size() == b.questions.size());
  for (size_t i = 0; i < a.questions.size(); ++i) {
    CHECK(a.questions[i].members == b.questions[i].members);
  }
}

TEST_CASE("root split matches the exhaustive best bipartition") {
  // Well-separated data: cluster centers 30 apart versus noise 0.3, so the
  // best-gain bipartition is unambiguous and 2-means must find it.
  SplitMix64 rng(21);
  for (int rep = 0; rep < 10; ++rep) {
    int clusters = 2 + static_cast<int>(rng.NextBelow(2));
    std::vector<std::vector<double>> centers;
    for (int k = 0; k < clusters; ++k) {
      centers.push_back({30.0 * k, rng.NextUniform(-2, 2)});
    }
    auto points = ClusteredEmbeddings(centers, 3, 0.3, &rng);
    int v = static_cast<int>(points.size());
    REQUIRE(v <= 12);

    QuestionConfig config;
    config.restarts = 20;
    config.seed = 1000 + rep;
    std::vector<int> all(v);
    for (int i = 0; i < v; ++i) all[i] = i;
    Bipartition chosen = BestTwoMeansSplit(points, all, config, 42);

    double best = -1.0;
    std::vector<int> best_left;
    for (unsigned mask = 1; mask + 1 < (1u << v); ++mask) {
      if (!(mask & 1u)) continue;  // canonical: side of point 0
      std::vector<int> left, right;
      for (int i = 0; i < v; ++i) {
        ((mask >> i) & 1u ? left : right).push_back(i);
      }
      double gain = PartitionGain(points, left, right, config.var_floor);
      if (gain > best) {
        best = gain;
        best_left = left;
      }
    }
    CHECK(RelClose(chosen.gain, best, 1e-9));
    std::vector<int> chosen_left =
        std::find(chosen.left.begin(), chosen.left.end(), 0) !=
                chosen.left.end()
            ? chosen.left
            : chosen.right;
    CHECK(chosen_left == best_left);
  }
}

TEST_CASE("embeddings concatenate per-position means with frame weights") {
  StatsDump dump;
  auto put = [&](int c, int p, std::vector<double> frame, int reps) {
    StatsRecord rec;
    rec.char_id = c;
    rec.position = p;
    GaussStats stats(static_cast<int>(frame.size()));
    for (int i = 0; i < reps; ++i) {
      stats.AddFrame(std::span<const double>(frame));
    }
    rec.stats = stats;
    dump.push_back(rec);
  };
  put(0, 0, {1.0, 2.0}, 3);
  put(0, 1, {5.0, 6.0}, 2);
  put(1, 0, {-1.0, 0.0}, 4);
  // char 1 has no frames at position 1: embedding borrows the pooled
  // position-1 mean, which here is char 0's.
  TyingStats stats(dump, 2, 2);
  auto embedded = EmbedCharacters(stats);
  REQUIRE(embedded.size() == 2);
  CHECK(embedded[0].vec == std::vector<double>{1.0, 2.0, 5.0, 6.0});
  CHECK(embedded[0].weight == 5.0);
  CHECK(embedded[1].vec == std::vector<double>{-1.0, 0.0, 5.0, 6.0});
  CHECK(embedded[1].weight == 4.0);
}

TEST_CASE("question files round-trip") {
  TempDir dir("questions");
  QuestionSet set;
  set.vocab_size = 4;
  set.questions = {{0, {0, 1, 2, 3}}, {1, {0, 2}}, {2, {1, 3}}, {3, {0}},
                   {4, {2}}, {5, {1}}, {6, {3}}};
  set.Save(dir.File("q.phmq"));
  QuestionSet loaded = QuestionSet::Load(dir.File("q.phmq"));
  CHECK(loaded.vocab_size == set.vocab_size);
  REQUIRE(loaded.questions.size() == set.questions.size());
  for (size_t i = 0; i < set.questions.size(); ++i) {
    CHECK(loaded.questions[i].id == set.questions[i].id);
    CHECK(loaded.questions[i].members == set.questions[i].members);
  }
}

TEST_CASE("duplicate embeddings still split down to singletons") {
  std::vector<CharEmbedding> points;
  for (int c = 0; c < 5; ++c) {
    CharEmbedding e;
    e.char_id = c;
    e.weight = 1.0;
    e.vec = {1.0, -1.0};  // all five identical
    points.push_back(e);
  }
  QuestionConfig config;
  config.seed = 3;
  QuestionSet set = BuildQuestionSet(points, config);
  set.Validate();
  CHECK(static_cast<int>(set.questions.size()) == 9);
}

}  // namespace
}  // namespace phmm
