// src/train.cc

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

#include "phmm/train.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "phmm/gauss_stats.h"
#include "phmm/threading.h"

namespace phmm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Sequences that cannot hold one frame per state are unusable.
std::vector<char> UsableMask(const Corpus &corpus, int positions,
                             bool strict_length, int *used, int *skipped) {
  std::vector<char> usable(corpus.Size(), 1);
  *used = 0;
  *skipped = 0;
  for (size_t i = 0; i < corpus.Size(); ++i) {
    long long need = static_cast<long long>(positions) *
                     corpus.transcripts[i].size();
    if (corpus.sequences[i].Frames() < need) {
      RequireFeasible(!strict_length,
                      "sequence " + std::to_string(i) + " has " +
                          std::to_string(corpus.sequences[i].Frames()) +
                          " frames but needs " + std::to_string(need));
      Warn("sequence " + std::to_string(i) + " too short for its transcript"
           ", skipping");
      usable[i] = 0;
      ++*skipped;
    } else {
      ++*used;
    }
  }
  Require(*used > 0, "no usable sequence in corpus");
  return usable;
}

struct TransitionCounts {
  std::vector<double> self;  // [char * positions + position]
  std::vector<double> fwd;

  explicit TransitionCounts(size_t n) : self(n, 0.0), fwd(n, 0.0) {}
};

// Add-one smoothed transition estimates in the log domain.
void EstimateTransitions(const TransitionCounts &counts, HmmModelSet *model) {
  for (size_t i = 0; i < counts.self.size(); ++i) {
    double denom = counts.self[i] + counts.fwd[i] + 2.0;
    model->log_self[i] = std::log((counts.self[i] + 1.0) / denom);
    model->log_fwd[i] = std::log((counts.fwd[i] + 1.0) / denom);
  }
}

void CountTransitions(const Alignment &alignment, int positions,
                      TransitionCounts *counts) {
  for (size_t t = 0; t < alignment.size(); ++t) {
    const AlignFrame &f = alignment[t];
    size_t idx = static_cast<size_t>(f.char_id) * positions + f.position;
    bool leaves = t + 1 == alignment.size() ||
                  alignment[t + 1].char_index != f.char_index ||
                  alignment[t + 1].position != f.position;
    (leaves ? counts->fwd : counts->self)[idx] += 1.0;
  }
}

// Single-Gaussian emission per tied state from pooled stats; states with no
// frames fall back to the provided default (global stats or the previous
// emission, per caller).
GmmEmission EmissionFromStats(const GaussStats &stats, double var_floor) {
  GmmEmission e;
  int dim = stats.Dim();
  e.weights = {1.0};
  e.means.assign(1, std::vector<double>(dim));
  e.vars.assign(1, std::vector<double>(dim));
  for (int d = 0; d < dim; ++d) {
    e.means[0][d] = stats.Mean(d);
    e.vars[0][d] = std::max(stats.Variance(d), var_floor);
  }
  return e;
}

}  // namespace

FlatStartResult FlatStart(const Corpus &corpus, int positions, int vocab_size,
                          const StateTying *tying, double var_floor,
                          bool strict_length) {
  Require(positions >= 1, "positions must be >= 1");
  corpus.Validate();
  int vocab = std::max(vocab_size, corpus.MaxCharId() + 1);
  if (tying != nullptr) {
    Require(tying->positions == positions,
            "tying built for a different position count");
    Require(tying->vocab_size >= vocab,
            "tying vocabulary smaller than the corpus");
    vocab = tying->vocab_size;
  }

  FlatStartResult result;
  HmmModelSet &model = result.model;
  model.dim = corpus.Dim();
  model.var_floor = var_floor;
  model.tying = tying != nullptr ? *tying : IdentityTying(vocab, positions);

  std::vector<char> usable = UsableMask(corpus, positions, strict_length,
                                        &result.used, &result.skipped);

  std::vector<GaussStats> acc(model.tying.total, GaussStats(model.dim));
  GaussStats global(model.dim);
  TransitionCounts counts(static_cast<size_t>(vocab) * positions);
  result.alignments.resize(corpus.Size());

  for (size_t i = 0; i < corpus.Size(); ++i) {
    if (!usable[i]) continue;
    const FeatureSequence &seq = corpus.sequences[i];
    const Transcription &labels = corpus.transcripts[i];
    int T = seq.Frames();
    int S = static_cast<int>(labels.size()) * positions;
    Alignment &alignment = result.alignments[i];
    alignment.reserve(T);
    for (int j = 0; j < S; ++j) {
      int begin = static_cast<int>(static_cast<long long>(j) * T / S);
      int end = static_cast<int>(static_cast<long long>(j + 1) * T / S);
      int char_index = j / positions;
      int position = j % positions;
      int char_id = labels[char_index];
      int tied = model.tying.TiedId(char_id, position);
      for (int t = begin; t < end; ++t) {
        alignment.push_back({char_index, char_id, position, tied});
        acc[tied].AddFrame(seq.Frame(t));
        global.AddFrame(seq.Frame(t));
      }
    }
    CountTransitions(alignment, positions, &counts);
  }

  model.emissions.resize(model.tying.total);
  for (int t = 0; t < model.tying.total; ++t) {
    if (acc[t].Count() > 0.0) {
      model.emissions[t] = EmissionFromStats(acc[t], var_floor);
    } else {
      Warn("tied state " + std::to_string(t) +
           " received no frames at flat start, using global statistics");
      model.emissions[t] = EmissionFromStats(global, var_floor);
    }
  }
  model.log_self.resize(counts.self.size());
  model.log_fwd.resize(counts.self.size());
  EstimateTransitions(counts, &model);
  model.Validate();
  return result;
}

AlignResult AlignSequence(const HmmModelSet &model, const FeatureSequence &seq,
                          const Transcription &labels) {
  Require(seq.Dim() == model.dim, "feature dimension does not match model");
  Require(!labels.empty(), "empty transcription");
  int P = model.Positions();
  int T = seq.Frames();
  int S = static_cast<int>(labels.size()) * P;
  RequireFeasible(T >= S, "sequence of " + std::to_string(T) +
                              " frames cannot traverse " + std::to_string(S) +
                              " states");

  // Per-state tables; tied ids repeat, so emissions are scored once per
  // distinct tied id per frame.
  std::vector<int> tied(S), slot(S);
  std::vector<double> lself(S), lfwd(S);
  std::vector<int> unique;
  {
    std::vector<int> slot_of(model.tying.total, -1);
    for (int j = 0; j < S; ++j) {
      int c = labels[j / P], p = j % P;
      Require(c >= 0 && c < model.VocabSize(),
              "label " + std::to_string(c) + " outside model vocabulary");
      tied[j] = model.tying.TiedId(c, p);
      lself[j] = model.LogSelf(c, p);
      lfwd[j] = model.LogFwd(c, p);
      if (slot_of[tied[j]] < 0) {
        slot_of[tied[j]] = static_cast<int>(unique.size());
        unique.push_back(tied[j]);
      }
      slot[j] = slot_of[tied[j]];
    }
  }

  std::vector<double> emit(unique.size());
  std::vector<double> prev(S, kNegInf), cur(S, kNegInf);
  std::vector<std::vector<unsigned char>> from_fwd(
      T, std::vector<unsigned char>(S, 0));

  for (int t = 0; t < T; ++t) {
    for (size_t u = 0; u < unique.size(); ++u) {
      emit[u] = model.emissions[unique[u]].LogLik(seq.Frame(t));
    }
    int lo = std::max(0, S - (T - t));
    int hi = std::min(t, S - 1);
    std::fill(cur.begin(), cur.end(), kNegInf);
    if (t == 0) {
      cur[0] = emit[slot[0]];
    } else {
      for (int j = lo; j <= hi; ++j) {
        double stay = prev[j] == kNegInf ? kNegInf : prev[j] + lself[j];
        double advance = j > 0 && prev[j - 1] != kNegInf
                             ? prev[j - 1] + lfwd[j - 1]
                             : kNegInf;
        if (advance > stay) {
          cur[j] = advance + emit[slot[j]];
          from_fwd[t][j] = 1;
        } else if (stay != kNegInf) {
          cur[j] = stay + emit[slot[j]];
        }
      }
    }
    std::swap(prev, cur);
  }

  Require(prev[S - 1] != kNegInf, "no feasible alignment path");
  AlignResult result;
  result.loglik = prev[S - 1] + lfwd[S - 1];  // leave the final state
  result.alignment.resize(T);
  int j = S - 1;
  for (int t = T - 1; t >= 0; --t) {
    result.alignment[t] = {j / P, labels[j / P], j % P, tied[j]};
    if (t > 0 && from_fwd[t][j]) --j;
  }
  Require(j == 0, "alignment backtrace did not reach the first state");
  return result;
}

void SplitToTarget(GmmEmission *emission, int target) {
  Require(target >= 1, "mixture target must be >= 1");
  while (emission->NumComps() < target) {
    int heaviest = 0;
    for (int k = 1; k < emission->NumComps(); ++k) {
      if (emission->weights[k] > emission->weights[heaviest]) heaviest = k;
    }
    double w = emission->weights[heaviest] / 2.0;
    emission->weights[heaviest] = w;
    std::vector<double> mean_lo = emission->means[heaviest];
    std::vector<double> mean_hi = emission->means[heaviest];
    for (size_t d = 0; d < mean_lo.size(); ++d) {
      double sigma = std::sqrt(emission->vars[heaviest][d]);
      mean_lo[d] -= 0.2 * sigma;
      mean_hi[d] += 0.2 * sigma;
    }
    emission->means[heaviest] = mean_lo;
    emission->weights.push_back(w);
    emission->means.push_back(mean_hi);
    emission->vars.push_back(emission->vars[heaviest]);
  }
}

HmmModelSet ViterbiTrain(const HmmModelSet &init, const Corpus &corpus,
                         const TrainConfig &config, TrainLog *log) {
  Require(config.iters >= 1, "iters must be >= 1");
  Require(!config.mixture_schedule.empty(), "empty mixture schedule");
  for (size_t s = 0; s < config.mixture_schedule.size(); ++s) {
    Require(config.mixture_schedule[s] >= 1 &&
                (s == 0 || config.mixture_schedule[s] >=
                               config.mixture_schedule[s - 1]),
            "mixture schedule must be positive and non-decreasing");
  }
  init.Validate();
  corpus.Validate(init.VocabSize());

  HmmModelSet model = init;
  int P = model.Positions();
  int used = 0, skipped = 0;
  std::vector<char> usable = UsableMask(corpus, P, config.strict_length,
                                        &used, &skipped);
  if (log != nullptr) {
    log->used = used;
    log->skipped = skipped;
  }

  int stages = static_cast<int>(config.mixture_schedule.size());
  std::vector<AlignResult> aligned(corpus.Size());

  for (int iter = 0; iter < config.iters; ++iter) {
    int target = config.mixture_schedule[std::min(
        stages - 1, iter * stages / config.iters)];
    for (GmmEmission &e : model.emissions) SplitToTarget(&e, target);

    ParallelFor(static_cast<int>(corpus.Size()), [&](int i) {
      if (!usable[i]) return;
      aligned[i] = AlignSequence(model, corpus.sequences[i],
                                 corpus.transcripts[i]);
    });

    double total = 0.0;
    for (size_t i = 0; i < corpus.Size(); ++i) {
      if (usable[i]) total += aligned[i].loglik;
    }
    if (log != nullptr) {
      log->loglik.push_back(total);
      log->mixtures.push_back(target);
    }

    // Hard component occupancy, reduced in sequence order.
    std::vector<std::vector<GaussStats>> acc(model.tying.total);
    for (int t = 0; t < model.tying.total; ++t) {
      acc[t].assign(model.emissions[t].NumComps(), GaussStats(model.dim));
    }
    TransitionCounts counts(model.log_self.size());
    for (size_t i = 0; i < corpus.Size(); ++i) {
      if (!usable[i]) continue;
      const FeatureSequence &seq = corpus.sequences[i];
      for (size_t t = 0; t < aligned[i].alignment.size(); ++t) {
        const AlignFrame &f = aligned[i].alignment[t];
        int comp = model.emissions[f.tied_id].BestComponent(
            seq.Frame(static_cast<int>(t)));
        acc[f.tied_id][comp].AddFrame(seq.Frame(static_cast<int>(t)));
      }
      CountTransitions(aligned[i].alignment, P, &counts);
    }

    for (int t = 0; t < model.tying.total; ++t) {
      GmmEmission &e = model.emissions[t];
      double total_n = 0.0;
      for (const GaussStats &s : acc[t]) total_n += s.Count();
      if (total_n <= 0.0) {
        Warn("tied state " + std::to_string(t) +
             " received no frames, keeping previous emission");
        continue;
      }
      for (int k = 0; k < e.NumComps(); ++k) {
        e.weights[k] = acc[t][k].Count() / total_n;
        if (acc[t][k].Count() <= 0.0) continue;  // mean/var kept
        for (int d = 0; d < model.dim; ++d) {
          e.means[k][d] = acc[t][k].Mean(d);
          e.vars[k][d] = std::max(acc[t][k].Variance(d), model.var_floor);
        }
      }
    }
    EstimateTransitions(counts, &model);
  }
  model.Validate();
  return model;
}

StatsDump CollectTyingStats(const HmmModelSet &model, const Corpus &corpus,
                            bool strict_length,
                            std::vector<Alignment> *alignments_out) {
  model.Validate();
  corpus.Validate(model.VocabSize());
  int P = model.Positions();
  int V = model.VocabSize();
  int used = 0, skipped = 0;
  std::vector<char> usable = UsableMask(corpus, P, strict_length, &used,
                                        &skipped);

  std::vector<AlignResult> aligned(corpus.Size());
  ParallelFor(static_cast<int>(corpus.Size()), [&](int i) {
    if (!usable[i]) return;
    aligned[i] = AlignSequence(model, corpus.sequences[i],
                               corpus.transcripts[i]);
  });

  std::vector<GaussStats> acc(static_cast<size_t>(V) * P,
                              GaussStats(model.dim));
  for (size_t i = 0; i < corpus.Size(); ++i) {
    if (!usable[i]) continue;
    for (size_t t = 0; t < aligned[i].alignment.size(); ++t) {
      const AlignFrame &f = aligned[i].alignment[t];
      acc[static_cast<size_t>(f.char_id) * P + f.position].AddFrame(
          corpus.sequences[i].Frame(static_cast<int>(t)));
    }
  }

  StatsDump dump;
  dump.reserve(acc.size());
  for (int c = 0; c < V; ++c) {
    for (int p = 0; p < P; ++p) {
      dump.push_back({c, p, acc[static_cast<size_t>(c) * P + p]});
    }
  }
  if (alignments_out != nullptr) {
    alignments_out->clear();
    alignments_out->resize(corpus.Size());
    for (size_t i = 0; i < corpus.Size(); ++i) {
      if (usable[i]) (*alignments_out)[i] = std::move(aligned[i].alignment);
    }
  }
  return dump;
}

}  // namespace phmm
