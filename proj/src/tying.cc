// src/tying.cc

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

#include "phmm/tying.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <queue>
#include <sstream>

#include "phmm/binio.h"

namespace phmm {

std::vector<int> Forest::LeafIds() const {
  std::vector<int> out;
  for (const TreeNode &node : nodes) {
    if (node.IsLeaf()) out.push_back(node.id);
  }
  return out;
}

void Forest::SaveDot(int position, const std::string &path) const {
  std::ofstream os = OpenTextOut(path);
  os << "digraph position_" << position << " {\n";
  os << "  node [shape=box];\n";
  for (const TreeNode &node : nodes) {
    if (node.position != position) continue;
    os << "  n" << node.id << " [label=\"#" << node.id << "\\nchars="
       << node.members.size() << " n=" << node.stats.Count() << "\"];\n";
    if (!node.IsLeaf()) {
      os << "  n" << node.id << " -> n" << node.left << " [label=\"q"
         << node.best_question << " in\"];\n";
      os << "  n" << node.id << " -> n" << node.right << " [label=\"q"
         << node.best_question << " out\"];\n";
    }
  }
  os << "}\n";
  RequireIo(os.good(), "write failed: " + path);
}

namespace {

// Shared by GrowTrees and the candidate scoring below.
struct QuestionLookup {
  // in_question[q * vocab + c] != 0 iff char c is a member of question q.
  std::vector<unsigned char> table;
  int vocab = 0;

  explicit QuestionLookup(const QuestionSet &questions)
      : table(static_cast<size_t>(questions.questions.size()) *
                  questions.vocab_size,
              0),
        vocab(questions.vocab_size) {
    for (size_t q = 0; q < questions.questions.size(); ++q) {
      for (int c : questions.questions[q].members) {
        table[q * vocab + c] = 1;
      }
    }
  }
  bool Contains(int q, int c) const { return table[static_cast<size_t>(q) * vocab + c] != 0; }
};

struct Candidate {
  int question = -1;
  double gain = 0.0;
};

// Best admissible question for one node: maximize gain; ties go to the
// smaller question id (scan order + strict improvement).
Candidate BestQuestion(const TreeNode &node, const TyingStats &stats,
                       const QuestionSet &questions,
                       const QuestionLookup &lookup, double min_count,
                       double var_floor) {
  Candidate best;
  int dim = stats.Dim();
  for (size_t q = 0; q < questions.questions.size(); ++q) {
    GaussStats in(dim), out(dim);
    int n_in = 0;
    for (int c : node.members) {
      if (lookup.Contains(static_cast<int>(q), c)) {
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

}  // namespace

Forest GrowTrees(const TyingStats &stats, const QuestionSet &questions,
                 int first_step_leaves, double min_count, double var_floor) {
  int vocab = stats.VocabSize();
  int positions = stats.Positions();
  Require(vocab > 0 && positions > 0, "empty statistics dump");
  Require(questions.vocab_size == vocab,
          "question set built for vocabulary " +
              std::to_string(questions.vocab_size) + ", statistics have " +
              std::to_string(vocab));
  Require(first_step_leaves >= positions,
          "leaf budget below the number of state positions");
  Require(min_count >= 0.0, "min_count must be >= 0");

  QuestionLookup lookup(questions);
  Forest forest;
  forest.positions = positions;

  auto make_node = [&](int position, std::vector<int> members) {
    TreeNode node;
    node.id = static_cast<int>(forest.nodes.size());
    node.position = position;
    node.members = std::move(members);
    node.stats = GaussStats(stats.Dim());
    for (int c : node.members) node.stats.Add(stats.At(c, position));
    if (node.members.size() >= 2) {
      Candidate cand = BestQuestion(node, stats, questions, lookup, min_count,
                                    var_floor);
      node.best_question = cand.question;
      node.best_gain = cand.gain;
    }
    forest.nodes.push_back(std::move(node));
    return static_cast<int>(forest.nodes.size()) - 1;
  };

  // Max-queue over splittable frontier nodes: biggest gain, then earliest
  // node id.  Node candidates never change after creation, so the queue
  // never holds stale keys.
  auto worse = [&](int a, int b) {
    if (forest.nodes[a].best_gain != forest.nodes[b].best_gain) {
      return forest.nodes[a].best_gain < forest.nodes[b].best_gain;
    }
    return a > b;
  };
  std::priority_queue<int, std::vector<int>, decltype(worse)> queue(worse);

  std::vector<int> all_chars(vocab);
  for (int c = 0; c < vocab; ++c) all_chars[c] = c;
  for (int p = 0; p < positions; ++p) {
    int id = make_node(p, all_chars);
    if (forest.nodes[id].best_question >= 0) queue.push(id);
  }

  int leaves = positions;
  while (leaves < first_step_leaves && !queue.empty()) {
    int id = queue.top();
    queue.pop();
    int question = forest.nodes[id].best_question;
    std::vector<int> in, out;
    for (int c : forest.nodes[id].members) {
      (lookup.Contains(question, c) ? in : out).push_back(c);
    }
    int left = make_node(forest.nodes[id].position, std::move(in));
    int right = make_node(forest.nodes[id].position, std::move(out));
    forest.nodes[id].left = left;
    forest.nodes[id].right = right;
    forest.trace.push_back({id, question, forest.nodes[id].best_gain});
    if (forest.nodes[left].best_question >= 0) queue.push(left);
    if (forest.nodes[right].best_question >= 0) queue.push(right);
    ++leaves;
  }
  return forest;
}

void StateTying::Validate() const {
  Require(vocab_size > 0 && positions > 0, "tying: empty key set");
  Require(static_cast<int>(tied.size()) == vocab_size * positions,
          "tying: map does not cover vocabulary x positions");
  Require(total >= 1, "tying: no tied states");
  std::vector<char> seen(total, 0);
  for (int id : tied) {
    Require(id >= 0 && id < total, "tying: tied id out of range");
    seen[id] = 1;
  }
  Require(std::find(seen.begin(), seen.end(), 0) == seen.end(),
          "tying: tied ids are not dense");
}

void StateTying::Save(const std::string &path) const {
  std::ofstream os = OpenTextOut(path);
  os << "PHMT v1 N=" << total << '\n';
  for (int c = 0; c < vocab_size; ++c) {
    for (int p = 0; p < positions; ++p) {
      os << c << ' ' << p << ' ' << TiedId(c, p) << '\n';
    }
  }
  RequireIo(os.good(), "write failed: " + path);
}

StateTying StateTying::Load(const std::string &path) {
  std::ifstream is = OpenTextIn(path);
  std::string tag, ver, nfield;
  is >> tag >> ver >> nfield;
  RequireIo(tag == "PHMT" && ver == "v1" && nfield.rfind("N=", 0) == 0,
            "malformed header in " + path);
  StateTying tying;
  tying.total = std::stoi(nfield.substr(2));
  std::vector<std::array<int, 3>> rows;
  int c, p, id;
  while (is >> c >> p >> id) {
    RequireIo(c >= 0 && p >= 0, path + ": negative key");
    rows.push_back({c, p, id});
    tying.vocab_size = std::max(tying.vocab_size, c + 1);
    tying.positions = std::max(tying.positions, p + 1);
  }
  RequireIo(!rows.empty(), path + ": no entries");
  tying.tied.assign(static_cast<size_t>(tying.vocab_size) * tying.positions,
                    -1);
  for (const auto &row : rows) {
    tying.tied[static_cast<size_t>(row[0]) * tying.positions + row[1]] =
        row[2];
  }
  tying.Validate();
  return tying;
}

namespace {

// Merging an empty cluster is free; otherwise the usual pooling loss.
double PairLoss(const GaussStats &a, const GaussStats &b, double var_floor) {
  if (a.Count() <= 0.0 || b.Count() <= 0.0) return 0.0;
  return MergeLoss(a, b, var_floor);
}

}  // namespace

ReclusterResult Recluster(const Forest &forest, int target_n,
                          bool cross_position, double var_floor) {
  Require(target_n >= 1, "target_n must be >= 1");
  std::vector<int> leaves = forest.LeafIds();
  RequireFeasible(target_n <= static_cast<int>(leaves.size()),
                  "target of " + std::to_string(target_n) +
                      " tied states exceeds " +
                      std::to_string(leaves.size()) + " first-step leaves");
  RequireFeasible(cross_position || target_n >= forest.positions,
                  "target of " + std::to_string(target_n) +
                      " tied states cannot keep one cluster per position "
                      "without cross-position merging");

  ReclusterResult result;
  for (int id : leaves) {
    const TreeNode &leaf = forest.nodes[id];
    Cluster cluster;
    cluster.position = leaf.position;
    for (int c : leaf.members) cluster.members.push_back({c, leaf.position});
    std::sort(cluster.members.begin(), cluster.members.end());
    cluster.stats = leaf.stats;
    result.clusters.push_back(std::move(cluster));
  }
  std::vector<Cluster> &clusters = result.clusters;

  auto mergeable = [&](int a, int b) {
    return cross_position || clusters[a].position == clusters[b].position;
  };

  struct HeapEntry {
    double loss;
    int a, b;
    bool operator>(const HeapEntry &o) const {
      if (loss != o.loss) return loss > o.loss;
      if (a != o.a) return a > o.a;
      return b > o.b;
    }
  };
  std::priority_queue<HeapEntry, std::vector<HeapEntry>, std::greater<>> heap;
  for (size_t a = 0; a < clusters.size(); ++a) {
    for (size_t b = a + 1; b < clusters.size(); ++b) {
      if (!mergeable(static_cast<int>(a), static_cast<int>(b))) continue;
      heap.push({PairLoss(clusters[a].stats, clusters[b].stats, var_floor),
                 static_cast<int>(a), static_cast<int>(b)});
    }
  }

  int alive = static_cast<int>(clusters.size());
  while (alive > target_n) {
    RequireFeasible(!heap.empty(), "no mergeable cluster pair left");
    HeapEntry top = heap.top();
    heap.pop();
    if (!clusters[top.a].alive || !clusters[top.b].alive) continue;

    Cluster merged;
    merged.position = clusters[top.a].position == clusters[top.b].position
                          ? clusters[top.a].position
                          : -1;
    std::merge(clusters[top.a].members.begin(), clusters[top.a].members.end(),
               clusters[top.b].members.begin(), clusters[top.b].members.end(),
               std::back_inserter(merged.members));
    merged.stats = Merged(clusters[top.a].stats, clusters[top.b].stats);
    clusters[top.a].alive = false;
    clusters[top.b].alive = false;
    int id = static_cast<int>(clusters.size());
    clusters.push_back(std::move(merged));
    result.trace.push_back({top.a, top.b, id, top.loss});
    --alive;
    for (int other = 0; other < id; ++other) {
      if (!clusters[other].alive || !mergeable(other, id)) continue;
      heap.push({PairLoss(clusters[other].stats, clusters[id].stats,
                          var_floor),
                 other, id});
    }
  }

  // Owner lookup, then dense ids by first appearance in char-major order.
  int vocab = 0, positions = forest.positions;
  for (const TreeNode &root : forest.nodes) {
    if (root.id >= positions) break;
    vocab = std::max(vocab,
                     root.members.empty() ? 0 : root.members.back() + 1);
  }
  std::vector<int> owner(static_cast<size_t>(vocab) * positions, -1);
  for (size_t i = 0; i < clusters.size(); ++i) {
    if (!clusters[i].alive) continue;
    for (auto [c, p] : clusters[i].members) {
      owner[static_cast<size_t>(c) * positions + p] = static_cast<int>(i);
    }
  }

  StateTying &tying = result.tying;
  tying.vocab_size = vocab;
  tying.positions = positions;
  tying.tied.assign(owner.size(), -1);
  std::map<int, int> dense;
  for (int c = 0; c < vocab; ++c) {
    for (int p = 0; p < positions; ++p) {
      int cluster = owner[static_cast<size_t>(c) * positions + p];
      Require(cluster >= 0, "leaves do not cover (char " + std::to_string(c) +
                                ", position " + std::to_string(p) + ")");
      auto [it, inserted] = dense.try_emplace(cluster, tying.total);
      if (inserted) ++tying.total;
      tying.tied[static_cast<size_t>(c) * positions + p] = it->second;
    }
  }
  tying.Validate();
  Require(tying.total == target_n, "tied-state count mismatch after merge");
  return result;
}

TieResult TieStates(const TyingStats &stats, const QuestionSet &questions,
                    int target_n, const TieOptions &options) {
  Require(target_n >= 1, "target_n must be >= 1");
  Require(options.expansion > 0.0, "expansion must be positive");
  int vocab = stats.VocabSize();
  int positions = stats.Positions();
  int budget = static_cast<int>(std::ceil(options.expansion * target_n));
  budget = std::min(budget, vocab * positions);
  budget = std::max(budget, positions);

  TieResult result;
  result.forest = GrowTrees(stats, questions, budget, options.min_count,
                            options.var_floor);
  ReclusterResult reclustered = Recluster(result.forest, target_n,
                                          options.cross_position,
                                          options.var_floor);
  result.tying = std::move(reclustered.tying);
  result.merges = std::move(reclustered.trace);
  return result;
}

double TyingPurity(const StateTying &tying, const GroundTruthTying &gt) {
  Require(static_cast<int>(gt.state_identity.size()) == tying.vocab_size,
          "tying and ground truth cover different vocabularies");
  for (const auto &row : gt.state_identity) {
    Require(static_cast<int>(row.size()) == tying.positions,
            "tying and ground truth cover different position counts");
  }
  // identity histogram per tied cluster
  std::vector<std::map<int, int>> hist(tying.total);
  std::vector<int> size(tying.total, 0);
  for (int c = 0; c < tying.vocab_size; ++c) {
    for (int p = 0; p < tying.positions; ++p) {
      int t = tying.TiedId(c, p);
      ++hist[t][gt.state_identity[c][p]];
      ++size[t];
    }
  }
  double weighted = 0.0;
  int total_members = 0;
  for (int t = 0; t < tying.total; ++t) {
    int top = 0;
    for (const auto &entry : hist[t]) top = std::max(top, entry.second);
    weighted += top;
    total_members += size[t];
  }
  return weighted / total_members;
}

}  // namespace phmm
