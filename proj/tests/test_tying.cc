// tests/test_tying.cc

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
#include <fstream>
#include <vector>

#include "doctest.h"
#include "phmm/tying.h"
#include "test_util.h"
#include "tying_oracle.h"

namespace phmm {
namespace {

StatsRecord MakeRecord(int c, int p, double mean, double n, double var) {
  StatsRecord rec;
  rec.char_id = c;
  rec.position = p;
  rec.stats = GaussStats::FromMoments(n, {mean * n},
                                      {(var + mean * mean) * n});
  return rec;
}

QuestionSet SingletonQuestions(int vocab) {
  QuestionSet set;
  set.vocab_size = vocab;
  for (int c = 0; c < vocab; ++c) set.questions.push_back({c, {c}});
  return set;
}

TEST_CASE("budget equal to the position count leaves the roots unsplit") {
  TyingInstance inst = RandomTyingInstance(1);
  TyingStats stats(inst.dump, inst.vocab, inst.positions);
  Forest forest = GrowTrees(stats, inst.questions, inst.positions, 0.0, 1e-4);
  CHECK(forest.trace.empty());
  CHECK(static_cast<int>(forest.LeafIds().size()) == inst.positions);
}

TEST_CASE("the first split lands where the statistics differ") {
  // Two characters, two positions.  Position 0 statistics are identical,
  // position 1 statistics are far apart, so the single budgeted split must
  // pick position 1.
  StatsDump dump;
  dump.push_back(MakeRecord(0, 0, 1.0, 10, 1.0));
  dump.push_back(MakeRecord(1, 0, 1.0, 10, 1.0));
  dump.push_back(MakeRecord(0, 1, -5.0, 10, 1.0));
  dump.push_back(MakeRecord(1, 1, 5.0, 10, 1.0));
  TyingStats stats(dump, 2, 2);
  Forest forest = GrowTrees(stats, SingletonQuestions(2), 3, 0.0, 1e-4);
  REQUIRE(forest.trace.size() == 1);
  CHECK(forest.nodes[forest.trace[0].node].position == 1);
  CHECK(forest.trace[0].gain > 0.0);
}

TEST_CASE("grown splits match the exhaustive rescan on random instances") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    TyingInstance inst = RandomTyingInstance(seed);
    TyingStats stats(inst.dump, inst.vocab, inst.positions);
    SplitMix64 rng(seed * 31 + 7);
    int max_budget = inst.vocab * inst.positions;
    int budget = inst.positions +
                 static_cast<int>(rng.NextBelow(
                     std::max(1, max_budget - inst.positions + 1)));
    Forest forest = GrowTrees(stats, inst.questions, budget, 0.0, 1e-4);
    CHECK(GrowRescanViolations(forest, stats, inst.questions, budget, 0.0,
                               1e-4) == 0);
  }
}

TEST_CASE("reclustering merges the cheapest pair first") {
  // Spec case: three single-position leaves, means 0 / 0.1 / 10, n=10 each,
  // var 1: the near-identical pair merges, the outlier survives.
  StatsDump dump;
  dump.push_back(MakeRecord(0, 0, 0.0, 10, 1.0));
  dump.push_back(MakeRecord(1, 0, 0.1, 10, 1.0));
  dump.push_back(MakeRecord(2, 0, 10.0, 10, 1.0));
  TyingStats stats(dump, 3, 1);
  Forest forest = GrowTrees(stats, SingletonQuestions(3), 3, 0.0, 1e-4);
  REQUIRE(forest.LeafIds().size() == 3);
  ReclusterResult result = Recluster(forest, 2, false, 1e-4);
  CHECK(result.tying.total == 2);
  CHECK(result.tying.TiedId(0, 0) == result.tying.TiedId(1, 0));
  CHECK(result.tying.TiedId(2, 0) != result.tying.TiedId(0, 0));

  // An exhaustive scan over the three pairings agrees.
  CHECK(ReclusterRescanViolations(result, 3, false, 1e-4) == 0);
}

TEST_CASE("identical leaves merge for free") {
  // Identical statistics never pass the positive-gain split test, so the
  // forest is laid out by hand: leaves {2}, {0} and {1}, where characters
  // 0 and 1 carry the same moments.
  GaussStats outlier = MakeRecord(2, 0, -7.0, 8, 1.5).stats;
  GaussStats twin = MakeRecord(0, 0, 2.0, 8, 1.5).stats;
  Forest forest;
  forest.positions = 1;
  auto add = [&](int position, std::vector<int> members, GaussStats stats,
                 int left, int right) {
    TreeNode node;
    node.id = static_cast<int>(forest.nodes.size());
    node.position = position;
    node.members = std::move(members);
    node.stats = std::move(stats);
    node.left = left;
    node.right = right;
    forest.nodes.push_back(std::move(node));
  };
  GaussStats twins = Merged(twin, twin);
  add(0, {0, 1, 2}, Merged(twins, outlier), 1, 2);
  add(0, {2}, outlier, -1, -1);
  add(0, {0, 1}, twins, 3, 4);
  add(0, {0}, twin, -1, -1);
  add(0, {1}, twin, -1, -1);

  ReclusterResult result = Recluster(forest, 2, false, 1e-4);
  REQUIRE(result.trace.size() == 1);
  CHECK(result.trace[0].loss == 0.0);
  CHECK(result.tying.TiedId(0, 0) == result.tying.TiedId(1, 0));
  CHECK(result.tying.TiedId(2, 0) != result.tying.TiedId(0, 0));
}

TEST_CASE("target equal to the leaf count is the identity clustering") {
  TyingInstance inst = RandomTyingInstance(5);
  TyingStats stats(inst.dump, inst.vocab, inst.positions);
  Forest forest = GrowTrees(stats, inst.questions,
                            inst.vocab * inst.positions, 0.0, 1e-4);
  int leaves = static_cast<int>(forest.LeafIds().size());
  ReclusterResult result = Recluster(forest, leaves, false, 1e-4);
  CHECK(result.trace.empty());
  CHECK(result.tying.total == leaves);
}

TEST_CASE("reclustering choices match the exhaustive rescan") {
  for (std::uint64_t seed = 100; seed < 115; ++seed) {
    TyingInstance inst = RandomTyingInstance(seed);
    TyingStats stats(inst.dump, inst.vocab, inst.positions);
    Forest forest = GrowTrees(stats, inst.questions,
                              inst.vocab * inst.positions, 0.0, 1e-4);
    int leaves = static_cast<int>(forest.LeafIds().size());
    bool cross = seed % 2 == 0;
    SplitMix64 rng(seed);
    int lo = cross ? 1 : inst.positions;
    int target = lo + static_cast<int>(rng.NextBelow(leaves - lo + 1));
    ReclusterResult result = Recluster(forest, target, cross, 1e-4);
    CHECK(result.tying.total == target);
    CHECK(ReclusterRescanViolations(result, leaves, cross, 1e-4) == 0);
  }
}

TEST_CASE("likelihood telescopes through splits and merges") {
  for (std::uint64_t seed = 300; seed < 312; ++seed) {
    TyingInstance inst = RandomTyingInstance(seed);
    TyingStats stats(inst.dump, inst.vocab, inst.positions);
    const double floor = 1e-4;
    Forest forest = GrowTrees(stats, inst.questions,
                              inst.vocab * inst.positions, 0.0, floor);
    int leaves = static_cast<int>(forest.LeafIds().size());
    int target = std::max(inst.positions, leaves / 2);
    ReclusterResult result = Recluster(forest, target, false, floor);

    double expected = RootTotalLik(stats, floor);
    for (const AppliedSplit &s : forest.trace) expected += s.gain;
    for (const AppliedMerge &m : result.trace) expected -= m.loss;
    CHECK(RelClose(AliveTotalLik(result, floor), expected, 1e-6));
  }
}

TEST_CASE("two-step tying hits the target exactly") {
  TyingInstance inst = RandomTyingInstance(9);
  TyingStats stats(inst.dump, inst.vocab, inst.positions);
  TieOptions options;
  options.min_count = 0.0;
  int target = inst.positions + 1;
  TieResult result = TieStates(stats, inst.questions, target, options);
  CHECK(result.tying.total == target);
  result.tying.Validate();

  // Full budget with expansion 1: every (char, position) stays untied.
  TieOptions wide;
  wide.expansion = 1.0;
  wide.min_count = 0.0;
  QuestionSet singles = SingletonQuestions(inst.vocab);
  TieResult untied = TieStates(stats, singles, inst.vocab * inst.positions,
                               wide);
  CHECK(untied.tying.total == inst.vocab * inst.positions);
}

TEST_CASE("impossible targets are reported as infeasible") {
  StatsDump dump;
  dump.push_back(MakeRecord(0, 0, 0.0, 10, 1.0));
  dump.push_back(MakeRecord(0, 1, 4.0, 10, 1.0));
  dump.push_back(MakeRecord(1, 0, -4.0, 10, 1.0));
  dump.push_back(MakeRecord(1, 1, 8.0, 10, 1.0));
  TyingStats stats(dump, 2, 2);
  QuestionSet singles = SingletonQuestions(2);
  Forest forest = GrowTrees(stats, singles, 4, 0.0, 1e-4);
  CHECK_THROWS_AS(Recluster(forest, 5, false, 1e-4), InfeasibleError);
  // One cluster total would need to pool across positions.
  CHECK_THROWS_AS(Recluster(forest, 1, false, 1e-4), InfeasibleError);
  CHECK(Recluster(forest, 1, true, 1e-4).tying.total == 1);
}

TEST_CASE("tying files round-trip and reject sparse ids") {
  TempDir dir("tying");
  StateTying tying;
  tying.vocab_size = 2;
  tying.positions = 2;
  tying.total = 3;
  tying.tied = {0, 1, 2, 1};
  tying.Validate();
  tying.Save(dir.File("t.phmt"));
  StateTying loaded = StateTying::Load(dir.File("t.phmt"));
  CHECK(loaded.tied == tying.tied);
  CHECK(loaded.total == 3);

  StateTying sparse = tying;
  sparse.total = 4;  // id 3 never used
  CHECK_THROWS_AS(sparse.Validate(), ValidationError);
}

TEST_CASE("purity rewards recovering the generating identities") {
  GroundTruthTying gt;
  gt.state_identity = {{0, 1}, {1, 0}, {0, 1}};
  gt.identity_count = 2;

  // Perfect recovery up to relabeling.
  StateTying perfect;
  perfect.vocab_size = 3;
  perfect.positions = 2;
  perfect.total = 2;
  perfect.tied = {1, 0, 0, 1, 1, 0};
  CHECK(TyingPurity(perfect, gt) == doctest::Approx(1.0));

  // Everything pooled across two balanced identities.
  StateTying pooled;
  pooled.vocab_size = 3;
  pooled.positions = 2;
  pooled.total = 1;
  pooled.tied = {0, 0, 0, 0, 0, 0};
  CHECK(TyingPurity(pooled, gt) == doctest::Approx(0.5));

  GroundTruthTying wrong;
  wrong.state_identity = {{0, 1}, {1, 0}};
  wrong.identity_count = 2;
  CHECK_THROWS_AS(TyingPurity(perfect, wrong), ValidationError);
}

TEST_CASE("random tying over k identities scores about 1/k") {
  const int vocab = 400, k = 4, clusters = 8;
  GroundTruthTying gt;
  gt.identity_count = k;
  for (int c = 0; c < vocab; ++c) gt.state_identity.push_back({c % k});

  SplitMix64 rng(31);
  StateTying tying;
  tying.vocab_size = vocab;
  tying.positions = 1;
  std::vector<int> raw(vocab);
  for (int &id : raw) id = static_cast<int>(rng.NextBelow(clusters));
  // Densify by first appearance.
  std::vector<int> dense(clusters, -1);
  for (int &id : raw) {
    if (dense[id] < 0) dense[id] = tying.total++;
    id = dense[id];
  }
  tying.tied = raw;
  tying.Validate();
  CHECK(TyingPurity(tying, gt) == doctest::Approx(1.0 / k).epsilon(0.25));
}

TEST_CASE("tree dumps are written in dot format") {
  TempDir dir("dot");
  TyingInstance inst = RandomTyingInstance(77);
  TyingStats stats(inst.dump, inst.vocab, inst.positions);
  Forest forest = GrowTrees(stats, inst.questions,
                            inst.vocab * inst.positions, 0.0, 1e-4);
  forest.SaveDot(0, dir.File("pos0.dot"));
  std::ifstream is(dir.File("pos0.dot"));
  std::string text((std::istreambuf_iterator<char>(is)),
                   std::istreambuf_iterator<char>());
  CHECK(text.find("digraph") != std::string::npos);
  CHECK(text.find("->") != std::string::npos);
}

}  // namespace
}  // namespace phmm
