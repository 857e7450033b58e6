// tests/tying_oracle.h

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

#ifndef PHMM_TESTS_TYING_ORACLE_H_
#define PHMM_TESTS_TYING_ORACLE_H_

// Exhaustive re-checks of the greedy tying choices.  The helpers replay a
// recorded trace and verify each step against a brute-force scan over the
// live frontier, recomputing scores through the same public primitives so
// agreement is exact.

#include <algorithm>
#include <set>
#include <vector>

#include "phmm/prng.h"
#include "phmm/questions.h"
#include "phmm/tying.h"

namespace phmm {

// Best admissible question for one frontier node by direct scan: highest
// gain wins, first (smallest) question id on ties.
struct OracleCandidate {
  int question = -1;
  double gain = 0.0;
};

inline OracleCandidate OracleBestQuestion(const TreeNode &node,
                                          const TyingStats &stats,
                                          const QuestionSet &questions,
                                          double min_count,
                                          double var_floor) {
  OracleCandidate best;
  if (node.members.size() < 2) return best;
  for (size_t q = 0; q < questions.questions.size(); ++q) {
    std::set<int> members(questions.questions[q].members.begin(),
                          questions.questions[q].members.end());
    GaussStats in(stats.Dim()), out(stats.Dim());
    int n_in = 0;
    for (int c : node.members) {
      if (members.count(c)) {
        in.Add(stats.At(c, node.position));
        ++n_in;
      } else {
        out.Add(stats.At(c, node.position));
      }
    }
    if (n_in == 0 || n_in == static_cast<int>(node.members.size())) continue;
    if (in.Count() <= 0.0 || out.Count() <= 0.0) continue;
    if (in.Count() < min_count || out.Count() < min_count) continue;
    double gain = SplitGain(node.stats, in, out, var_floor);
    if (gain <= 0.0) continue;
    if (best.question < 0 || gain > best.gain) {
      best.question = static_cast<int>(q);
      best.gain = gain;
    }
  }
  return best;
}

// Replays a grown forest's split trace.  Returns the number of splits that
// were not the exact arg-max over (frontier node, question) at their pop
// time, ties resolved to the smaller node id then smaller question id.
inline int GrowRescanViolations(const Forest &forest, const TyingStats &stats,
                                const QuestionSet &questions, int budget,
                                double min_count, double var_floor) {
  int violations = 0;
  std::set<int> frontier;
  for (int p = 0; p < forest.positions; ++p) frontier.insert(p);
  for (const AppliedSplit &step : forest.trace) {
    int best_node = -1, best_q = -1;
    double best_gain = 0.0;
    for (int id : frontier) {
      OracleCandidate cand = OracleBestQuestion(forest.nodes[id], stats,
                                                questions, min_count,
                                                var_floor);
      if (cand.question < 0) continue;
      if (best_node < 0 || cand.gain > best_gain) {
        best_node = id;
        best_q = cand.question;
        best_gain = cand.gain;
      }
    }
    if (step.node != best_node || step.question != best_q ||
        step.gain != best_gain) {
      ++violations;
    }
    frontier.erase(step.node);
    frontier.insert(forest.nodes[step.node].left);
    frontier.insert(forest.nodes[step.node].right);
  }
  // A stop short of the budget is justified only if nothing admissible
  // remained on the frontier.
  if (static_cast<int>(frontier.size()) < budget) {
    for (int id : frontier) {
      if (OracleBestQuestion(forest.nodes[id], stats, questions, min_count,
                             var_floor)
              .question >= 0) {
        ++violations;
      }
    }
  }
  return violations;
}

// Replays a recluster trace against a brute-force arg-min over all live
// admissible pairs.  Pair scores are recomputed with the same statistics
// primitives; empty clusters merge for free, matching the implementation.
inline int ReclusterRescanViolations(const ReclusterResult &result,
                                     int leaf_count, bool cross_position,
                                     double var_floor) {
  auto pair_loss = [&](const Cluster &x, const Cluster &y) {
    if (x.stats.Count() <= 0.0 || y.stats.Count() <= 0.0) return 0.0;
    return MergeLoss(x.stats, y.stats, var_floor);
  };
  const std::vector<Cluster> &clusters = result.clusters;
  std::vector<char> alive(clusters.size(), 0);
  for (int i = 0; i < leaf_count; ++i) alive[i] = 1;

  int violations = 0;
  int next = leaf_count;
  for (const AppliedMerge &step : result.trace) {
    double best_loss = 0.0;
    int best_a = -1, best_b = -1;
    for (int a = 0; a < next; ++a) {
      if (!alive[a]) continue;
      for (int b = a + 1; b < next; ++b) {
        if (!alive[b]) continue;
        if (!cross_position && clusters[a].position != clusters[b].position) {
          continue;
        }
        double loss = pair_loss(clusters[a], clusters[b]);
        if (best_a < 0 || loss < best_loss) {
          best_loss = loss;
          best_a = a;
          best_b = b;
        }
      }
    }
    if (step.a != best_a || step.b != best_b || step.loss != best_loss) {
      ++violations;
    }
    alive[step.a] = 0;
    alive[step.b] = 0;
    alive[next] = 1;
    ++next;
  }
  return violations;
}

// A small random tying problem: per-(char, position) statistics sampled
// from shifted Gaussians plus a handful of random subset questions.
struct TyingInstance {
  StatsDump dump;
  QuestionSet questions;
  int vocab = 0;
  int positions = 0;
};

inline TyingInstance RandomTyingInstance(std::uint64_t seed) {
  SplitMix64 rng(seed);
  TyingInstance inst;
  inst.vocab = 2 + static_cast<int>(rng.NextBelow(11));      // 2..12
  inst.positions = 1 + static_cast<int>(rng.NextBelow(2));   // 1..2
  int dim = 1 + static_cast<int>(rng.NextBelow(2));          // 1..2
  for (int c = 0; c < inst.vocab; ++c) {
    for (int p = 0; p < inst.positions; ++p) {
      StatsRecord rec;
      rec.char_id = c;
      rec.position = p;
      GaussStats stats(dim);
      int n = 3 + static_cast<int>(rng.NextBelow(28));
      double shift = rng.NextUniform(-8.0, 8.0);
      for (int i = 0; i < n; ++i) {
        std::vector<double> frame(dim);
        for (double &x : frame) x = shift + rng.NextGaussian();
        stats.AddFrame(std::span<const double>(frame));
      }
      rec.stats = stats;
      inst.dump.push_back(rec);
    }
  }
  inst.questions.vocab_size = inst.vocab;
  int n_questions = 1 + static_cast<int>(rng.NextBelow(8));  // 1..8
  for (int q = 0; q < n_questions; ++q) {
    Question question;
    question.id = q;
    for (int c = 0; c < inst.vocab; ++c) {
      if (rng.NextBelow(2)) question.members.push_back(c);
    }
    if (question.members.empty()) {
      question.members.push_back(static_cast<int>(rng.NextBelow(inst.vocab)));
    }
    inst.questions.questions.push_back(std::move(question));
  }
  return inst;
}

// Total expected log-likelihood of a clustering state, for telescoping.
inline double RootTotalLik(const TyingStats &stats, double var_floor) {
  double total = 0.0;
  for (int p = 0; p < stats.Positions(); ++p) {
    GaussStats pooled(stats.Dim());
    for (int c = 0; c < stats.VocabSize(); ++c) pooled.Add(stats.At(c, p));
    total += pooled.ExpectedLogLik(var_floor);
  }
  return total;
}

inline double AliveTotalLik(const ReclusterResult &result, double var_floor) {
  double total = 0.0;
  for (const Cluster &cluster : result.clusters) {
    if (cluster.alive) total += cluster.stats.ExpectedLogLik(var_floor);
  }
  return total;
}

}  // namespace phmm

#endif  // PHMM_TESTS_TYING_ORACLE_H_
