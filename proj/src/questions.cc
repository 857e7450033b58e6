// src/questions.cc

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

#include "phmm/questions.h"

#include <algorithm>
#include <queue>
#include <set>
#include <sstream>

#include "phmm/binio.h"
#include "phmm/prng.h"

namespace phmm {

std::vector<CharEmbedding> EmbedCharacters(const TyingStats &stats) {
  int vocab = stats.VocabSize();
  int positions = stats.Positions();
  int dim = stats.Dim();
  Require(vocab > 0 && positions > 0 && dim > 0, "empty statistics dump");

  // Pooled statistics per position provide the fallback mean for characters
  // that never produced frames at that position.
  std::vector<GaussStats> pooled(positions, GaussStats(dim));
  for (int p = 0; p < positions; ++p) {
    for (int c = 0; c < vocab; ++c) pooled[p].Add(stats.At(c, p));
  }

  std::vector<CharEmbedding> embeddings(vocab);
  for (int c = 0; c < vocab; ++c) {
    CharEmbedding &emb = embeddings[c];
    emb.char_id = c;
    emb.vec.reserve(static_cast<size_t>(positions) * dim);
    for (int p = 0; p < positions; ++p) {
      const GaussStats &s =
          stats.At(c, p).Count() > 0.0 ? stats.At(c, p) : pooled[p];
      for (int d = 0; d < dim; ++d) {
        emb.vec.push_back(s.Count() > 0.0 ? s.Mean(d) : 0.0);
      }
      emb.weight += stats.At(c, p).Count();
    }
  }
  return embeddings;
}

void QuestionSet::Validate() const {
  Require(vocab_size > 0, "question set: empty vocabulary");
  Require(!questions.empty(), "question set: no questions");
  for (const Question &q : questions) {
    Require(!q.members.empty(),
            "question " + std::to_string(q.id) + ": empty member set");
    Require(std::is_sorted(q.members.begin(), q.members.end()) &&
                std::adjacent_find(q.members.begin(), q.members.end()) ==
                    q.members.end(),
            "question " + std::to_string(q.id) + ": members not sorted/unique");
    Require(q.members.front() >= 0 && q.members.back() < vocab_size,
            "question " + std::to_string(q.id) + ": member out of vocabulary");
  }
}

void QuestionSet::Save(const std::string &path) const {
  std::ofstream os = OpenTextOut(path);
  os << "PHMQ v1 V=" << vocab_size << '\n';
  for (const Question &q : questions) {
    os << q.id << ':';
    for (int c : q.members) os << ' ' << c;
    os << '\n';
  }
  RequireIo(os.good(), "write failed: " + path);
}

QuestionSet QuestionSet::Load(const std::string &path) {
  std::ifstream is = OpenTextIn(path);
  std::string header;
  std::getline(is, header);
  std::istringstream hs(header);
  std::string tag, ver, vfield;
  hs >> tag >> ver >> vfield;
  RequireIo(tag == "PHMQ" && ver == "v1" && vfield.rfind("V=", 0) == 0,
            "malformed header in " + path);
  QuestionSet set;
  set.vocab_size = std::stoi(vfield.substr(2));
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    size_t colon = line.find(':');
    RequireIo(colon != std::string::npos, path + ": missing ':' in line");
    Question q;
    q.id = std::stoi(line.substr(0, colon));
    std::istringstream ms(line.substr(colon + 1));
    int c;
    while (ms >> c) q.members.push_back(c);
    set.questions.push_back(std::move(q));
  }
  set.Validate();
  return set;
}

namespace {

double SquaredDistance(const std::vector<double> &a,
                       const std::vector<double> &b) {
  double d2 = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    d2 += d * d;
  }
  return d2;
}

// Split gain of partitioning the weighted point subset into (left, right).
double PartitionGain(const std::vector<CharEmbedding> &points,
                     const std::vector<int> &left,
                     const std::vector<int> &right, double var_floor) {
  int dim = static_cast<int>(points.front().vec.size());
  GaussStats ls(dim), rs(dim);
  for (int i : left) ls.AddPoint(points[i].vec, points[i].weight);
  for (int i : right) rs.AddPoint(points[i].vec, points[i].weight);
  if (ls.Count() <= 0.0 || rs.Count() <= 0.0) return 0.0;
  return SplitGain(Merged(ls, rs), ls, rs, var_floor);
}

void Canonicalize(Bipartition *p) {
  std::sort(p->left.begin(), p->left.end());
  std::sort(p->right.begin(), p->right.end());
  if (p->right.front() < p->left.front()) std::swap(p->left, p->right);
}

// One Lloyd run from a Forgy initialization.  Assignment ties go to the
// first center; an emptied side is refilled with the point farthest from
// the surviving center.
Bipartition TwoMeansRun(const std::vector<CharEmbedding> &points,
                        const std::vector<int> &subset, int max_iters,
                        double var_floor, SplitMix64 &rng) {
  int m = static_cast<int>(subset.size());
  int ia = static_cast<int>(rng.NextBelow(m));
  int ib = static_cast<int>(rng.NextBelow(m));
  for (int tries = 0; tries < 64 && points[subset[ia]].vec ==
                                        points[subset[ib]].vec; ++tries) {
    ib = static_cast<int>(rng.NextBelow(m));
  }
  std::vector<double> ca = points[subset[ia]].vec;
  std::vector<double> cb = points[subset[ib]].vec;

  std::vector<int> assign(m, 0), prev(m, -1);
  for (int iter = 0; iter < max_iters; ++iter) {
    for (int k = 0; k < m; ++k) {
      const auto &v = points[subset[k]].vec;
      assign[k] = SquaredDistance(v, cb) < SquaredDistance(v, ca) ? 1 : 0;
    }
    for (int side = 0; side < 2; ++side) {
      if (std::count(assign.begin(), assign.end(), side) > 0) continue;
      int farthest = 0;
      double best = -1.0;
      const auto &center = side == 0 ? cb : ca;
      for (int k = 0; k < m; ++k) {
        double d2 = SquaredDistance(points[subset[k]].vec, center);
        if (d2 > best) {
          best = d2;
          farthest = k;
        }
      }
      assign[farthest] = side;
    }
    if (assign == prev) break;
    prev = assign;
    size_t dim = ca.size();
    ca.assign(dim, 0.0);
    cb.assign(dim, 0.0);
    double wa = 0.0, wb = 0.0;
    for (int k = 0; k < m; ++k) {
      const CharEmbedding &e = points[subset[k]];
      auto &center = assign[k] == 0 ? ca : cb;
      (assign[k] == 0 ? wa : wb) += e.weight;
      for (size_t d = 0; d < dim; ++d) center[d] += e.weight * e.vec[d];
    }
    // Zero-weight sides keep their previous center.
    if (wa > 0.0) {
      for (double &v : ca) v /= wa;
    }
    if (wb > 0.0) {
      for (double &v : cb) v /= wb;
    }
  }

  Bipartition result;
  for (int k = 0; k < m; ++k) {
    (assign[k] == 0 ? result.left : result.right).push_back(subset[k]);
  }
  Canonicalize(&result);
  result.gain = PartitionGain(points, result.left, result.right, var_floor);
  return result;
}

}  // namespace

Bipartition BestTwoMeansSplit(const std::vector<CharEmbedding> &points,
                              const std::vector<int> &subset,
                              const QuestionConfig &config,
                              std::uint64_t node_seed) {
  Require(subset.size() >= 2, "2-means needs at least two points");
  Require(config.restarts >= 1, "restarts must be >= 1");

  bool all_identical = true;
  for (size_t k = 1; k < subset.size(); ++k) {
    if (points[subset[k]].vec != points[subset[0]].vec) {
      all_identical = false;
      break;
    }
  }
  if (all_identical) {
    // Nothing to separate; peel off the first member so recursion advances.
    Bipartition p;
    p.left = {subset.front()};
    p.right.assign(subset.begin() + 1, subset.end());
    Canonicalize(&p);
    p.gain = PartitionGain(points, p.left, p.right, config.var_floor);
    return p;
  }

  SplitMix64 rng(node_seed);
  Bipartition best;
  bool have_best = false;
  for (int r = 0; r < config.restarts; ++r) {
    Bipartition cand = TwoMeansRun(points, subset, config.max_kmeans_iters,
                                   config.var_floor, rng);
    if (!have_best || cand.gain > best.gain ||
        (cand.gain == best.gain && cand.left < best.left)) {
      best = std::move(cand);
      have_best = true;
    }
  }
  return best;
}

QuestionSet BuildQuestionSet(const std::vector<CharEmbedding> &embeddings,
                             const QuestionConfig &config) {
  Require(!embeddings.empty(), "no embeddings");
  size_t dim = embeddings.front().vec.size();
  for (const CharEmbedding &e : embeddings) {
    Require(e.vec.size() == dim, "embedding dimension mismatch");
  }

  struct Node {
    std::vector<int> members;  // indices into embeddings
    Bipartition split;
    bool splittable = false;
  };
  std::vector<Node> nodes;

  auto make_node = [&](std::vector<int> members) {
    Node node;
    node.members = std::move(members);
    if (node.members.size() >= 2) {
      node.split = BestTwoMeansSplit(
          embeddings, node.members, config,
          DeriveSeed(config.seed, static_cast<std::uint64_t>(nodes.size())));
      node.splittable = true;
    }
    nodes.push_back(std::move(node));
    return static_cast<int>(nodes.size()) - 1;
  };

  // Max-queue on (gain, node id): biggest gain first, then earliest node.
  auto better = [&](int a, int b) {
    if (nodes[a].split.gain != nodes[b].split.gain) {
      return nodes[a].split.gain < nodes[b].split.gain;
    }
    return a > b;
  };
  std::priority_queue<int, std::vector<int>, decltype(better)> queue(better);

  std::vector<int> all(embeddings.size());
  for (size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
  int root = make_node(std::move(all));
  if (nodes[root].splittable) queue.push(root);

  // Split all the way down: every character must end in its own leaf, so
  // the queue only orders the splits, it never stops them.
  while (!queue.empty()) {
    int id = queue.top();
    queue.pop();
    int left = make_node(nodes[id].split.left);
    if (nodes[left].splittable) queue.push(left);
    int right = make_node(nodes[id].split.right);
    if (nodes[right].splittable) queue.push(right);
  }

  QuestionSet set;
  set.vocab_size = static_cast<int>(embeddings.size());
  std::set<std::vector<int>> seen;
  for (const Node &node : nodes) {
    Question q;
    for (int i : node.members) q.members.push_back(embeddings[i].char_id);
    std::sort(q.members.begin(), q.members.end());
    if (!seen.insert(q.members).second) continue;  // drop duplicate sets
    q.id = static_cast<int>(set.questions.size());
    set.questions.push_back(std::move(q));
  }
  set.Validate();
  return set;
}

}  // namespace phmm
