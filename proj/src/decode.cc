// src/decode.cc

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

#include "phmm/decode.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "phmm/binio.h"

namespace phmm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

}  // namespace

DecodeResult Decode(const HmmModelSet &model, const CharNgramLm &lm,
                    const FeatureSequence &seq, double lm_weight,
                    double beam) {
  Require(seq.Dim() == model.dim, "feature dimension does not match model");
  Require(seq.Frames() >= 1, "empty sequence");
  Require(lm_weight >= 0.0, "lm_weight must be >= 0");
  Require(lm.vocab_size == model.VocabSize(),
          "LM vocabulary does not match model");
  int V = model.VocabSize();
  int P = model.Positions();
  int T = seq.Frames();
  RequireFeasible(T >= P, "sequence shorter than one character model");

  // DP state: (LM context, character, position).  A unigram LM needs no
  // context, a bigram keeps "start" (index 0) plus the previous character.
  int contexts = lm.order == 1 ? 1 : V + 1;
  int per_ctx = V * P;
  int n_states = contexts * per_ctx;
  auto state_of = [&](int ctx, int c, int p) {
    return ctx * per_ctx + c * P + p;
  };

  std::vector<double> prev(n_states, kNegInf), cur(n_states, kNegInf);
  // bp[t][s]: predecessor state at t-1, shifted up one bit; the low bit
  // marks a character entry.  The bit is load-bearing: a single-state
  // character following itself re-enters the same DP state, so the raw
  // predecessor cannot distinguish that boundary from a self-loop.
  std::vector<std::vector<int>> bp(T, std::vector<int>(n_states, -1));
  std::vector<double> emit(model.tying.total);

  auto score_frame = [&](int t) {
    for (int id = 0; id < model.tying.total; ++id) {
      emit[id] = model.emissions[id].LogLik(seq.Frame(t));
    }
  };

  score_frame(0);
  for (int c = 0; c < V; ++c) {
    int s = state_of(0, c, 0);
    prev[s] = lm_weight * lm.LogProb(-1, c) +
              emit[model.tying.TiedId(c, 0)];
  }

  std::vector<double> exit_score(V);
  std::vector<int> exit_arg(V);
  for (int t = 1; t < T; ++t) {
    score_frame(t);
    std::fill(cur.begin(), cur.end(), kNegInf);

    // Character-boundary collapse: the best exiting token per character,
    // maximized over LM contexts (ascending scan keeps ties on the
    // smaller context).
    for (int c = 0; c < V; ++c) {
      exit_score[c] = kNegInf;
      exit_arg[c] = -1;
      double lf = model.LogFwd(c, P - 1);
      for (int ctx = 0; ctx < contexts; ++ctx) {
        int s = state_of(ctx, c, P - 1);
        if (prev[s] == kNegInf) continue;
        double score = prev[s] + lf;
        if (score > exit_score[c]) {
          exit_score[c] = score;
          exit_arg[c] = s;
        }
      }
    }

    // Within-character transitions.
    for (int ctx = 0; ctx < contexts; ++ctx) {
      for (int c = 0; c < V; ++c) {
        for (int p = 0; p < P; ++p) {
          int s = state_of(ctx, c, p);
          double stay =
              prev[s] == kNegInf ? kNegInf : prev[s] + model.LogSelf(c, p);
          double advance = kNegInf;
          if (p > 0) {
            int from = state_of(ctx, c, p - 1);
            if (prev[from] != kNegInf) {
              advance = prev[from] + model.LogFwd(c, p - 1);
            }
          }
          if (advance > stay) {
            cur[s] = advance;
            bp[t][s] = state_of(ctx, c, p - 1) << 1;
          } else if (stay != kNegInf) {
            cur[s] = stay;
            bp[t][s] = s << 1;
          }
        }
      }
    }

    // Cross-character transitions into position 0.  Ascending character
    // scan with strict improvement prefers the smaller entering id.
    for (int from_c = 0; from_c < V; ++from_c) {
      if (exit_score[from_c] == kNegInf) continue;
      int ctx = lm.order == 1 ? 0 : from_c + 1;
      for (int c = 0; c < V; ++c) {
        double score = exit_score[from_c] +
                       lm_weight * lm.LogProb(lm.order == 1 ? -1 : from_c, c);
        int s = state_of(ctx, c, 0);
        if (score > cur[s]) {
          cur[s] = score;
          bp[t][s] = (exit_arg[from_c] << 1) | 1;
        }
      }
    }

    for (int s = 0; s < n_states; ++s) {
      if (cur[s] == kNegInf) continue;
      int c = (s % per_ctx) / P, p = s % P;
      cur[s] += emit[model.tying.TiedId(c, p)];
    }

    if (beam > 0.0) {
      double best = *std::max_element(cur.begin(), cur.end());
      if (best != kNegInf) {
        for (double &v : cur) {
          if (v < best - beam) v = kNegInf;
        }
      }
    }
    std::swap(prev, cur);
  }

  // Leave the final state and close the sentence.
  double best = kNegInf;
  int best_state = -1;
  for (int ctx = 0; ctx < contexts; ++ctx) {
    for (int c = 0; c < V; ++c) {
      int s = state_of(ctx, c, P - 1);
      if (prev[s] == kNegInf) continue;
      double score = prev[s] + model.LogFwd(c, P - 1) +
                     lm_weight * lm.LogProb(lm.order == 1 ? -1 : c, lm.EndId());
      if (score > best) {
        best = score;
        best_state = s;
      }
    }
  }
  RequireFeasible(best_state >= 0, "no decodable path (beam too narrow?)");

  DecodeResult result;
  result.score = best;
  int s = best_state;
  int end = T;
  for (int t = T - 1; t >= 0; --t) {
    int c = (s % per_ctx) / P;
    int entry = t > 0 ? bp[t][s] : 1;
    if (entry & 1) {
      result.labels.push_back(c);
      result.spans.push_back({t, end});
      end = t;
    }
    s = entry >> 1;
  }
  std::reverse(result.labels.begin(), result.labels.end());
  std::reverse(result.spans.begin(), result.spans.end());
  return result;
}

void SaveHypotheses(const std::vector<DecodeResult> &results,
                    const std::string &path) {
  std::ofstream os = OpenTextOut(path);
  for (const DecodeResult &r : results) {
    for (size_t i = 0; i < r.labels.size(); ++i) {
      if (i > 0) os << ' ';
      os << r.labels[i];
    }
    os << " # spans=";
    for (size_t i = 0; i < r.spans.size(); ++i) {
      if (i > 0) os << ',';
      os << r.spans[i].first << '-' << r.spans[i].second;
    }
    os << '\n';
  }
  RequireIo(os.good(), "write failed: " + path);
}

std::vector<Transcription> LoadHypotheses(const std::string &path) {
  std::ifstream is = OpenTextIn(path);
  std::vector<Transcription> hyps;
  std::string line;
  while (std::getline(is, line)) {
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    Transcription hyp;
    int c;
    while (ls >> c) hyp.push_back(c);
    hyps.push_back(std::move(hyp));
  }
  return hyps;
}

namespace {

CerCounts CerImpl(const Transcription &ref, const Transcription &hyp) {
  size_t m = ref.size(), n = hyp.size();
  std::vector<std::vector<int>> dp(m + 1, std::vector<int>(n + 1, 0));
  for (size_t i = 0; i <= m; ++i) dp[i][0] = static_cast<int>(i);
  for (size_t j = 0; j <= n; ++j) dp[0][j] = static_cast<int>(j);
  for (size_t i = 1; i <= m; ++i) {
    for (size_t j = 1; j <= n; ++j) {
      int sub = dp[i - 1][j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      int del = dp[i - 1][j] + 1;
      int ins = dp[i][j - 1] + 1;
      dp[i][j] = std::min({sub, del, ins});
    }
  }
  // Diagonal-first backtrace turns every tied choice into a match or a
  // substitution rather than an insert+delete pair.
  CerCounts counts;
  counts.ref_len = static_cast<long long>(m);
  size_t i = m, j = n;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 &&
        dp[i][j] == dp[i - 1][j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1)) {
      if (ref[i - 1] != hyp[j - 1]) ++counts.substitutions;
      --i;
      --j;
    } else if (i > 0 && dp[i][j] == dp[i - 1][j] + 1) {
      ++counts.deletions;
      --i;
    } else {
      ++counts.insertions;
      --j;
    }
  }
  return counts;
}

}  // namespace

CerCounts Cer(const Transcription &ref, const Transcription &hyp) {
  Require(!ref.empty(), "empty reference");
  return CerImpl(ref, hyp);
}

CerCounts CerTotal(const std::vector<Transcription> &refs,
                   const std::vector<Transcription> &hyps,
                   const std::vector<int> &exclude) {
  Require(refs.size() == hyps.size(),
          "reference and hypothesis counts differ: " +
              std::to_string(refs.size()) + " vs " +
              std::to_string(hyps.size()));
  auto filtered = [&exclude](const Transcription &t) {
    Transcription out;
    for (int c : t) {
      if (std::find(exclude.begin(), exclude.end(), c) == exclude.end()) {
        out.push_back(c);
      }
    }
    return out;
  };
  CerCounts total;
  for (size_t i = 0; i < refs.size(); ++i) {
    CerCounts line = CerImpl(filtered(refs[i]), filtered(hyps[i]));
    total.substitutions += line.substitutions;
    total.insertions += line.insertions;
    total.deletions += line.deletions;
    total.ref_len += line.ref_len;
  }
  Require(total.ref_len > 0, "no reference characters to score");
  return total;
}

}  // namespace phmm
