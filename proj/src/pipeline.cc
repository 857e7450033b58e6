// src/pipeline.cc

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

#include "phmm/pipeline.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "phmm/binio.h"
#include "phmm/decode.h"
#include "phmm/prng.h"
#include "phmm/questions.h"
#include "phmm/synth.h"
#include "phmm/threading.h"
#include "phmm/train.h"
#include "phmm/tying.h"

namespace phmm {

namespace {

void RequireConfig(bool ok, const std::string &msg) {
  if (!ok) throw ConfigError(msg);
}

long long ParseLong(const std::string &key, const std::string &value) {
  try {
    size_t pos = 0;
    long long v = std::stoll(value, &pos);
    RequireConfig(pos == value.size(), "");
    return v;
  } catch (...) {
    throw ConfigError("key '" + key + "': not an integer: '" + value + "'");
  }
}

double ParseDouble(const std::string &key, const std::string &value) {
  try {
    size_t pos = 0;
    double v = std::stod(value, &pos);
    RequireConfig(pos == value.size(), "");
    return v;
  } catch (...) {
    throw ConfigError("key '" + key + "': not a number: '" + value + "'");
  }
}

bool ParseBool(const std::string &key, const std::string &value) {
  if (value == "0" || value == "false") return false;
  if (value == "1" || value == "true") return true;
  throw ConfigError("key '" + key + "': expected 0/1, got '" + value + "'");
}

std::vector<int> ParseIntList(const std::string &key,
                              const std::string &value) {
  std::vector<int> out;
  std::string item;
  std::istringstream is(value);
  while (std::getline(is, item, ',')) {
    if (item.empty()) continue;
    out.push_back(static_cast<int>(ParseLong(key, item)));
  }
  return out;
}

std::string Trim(const std::string &s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

template <typename Fn>
auto RunStage(const char *name, Fn &&fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (IoError &e) {
    throw IoError(std::string(name) + ": " + e.what());
  } catch (ValidationError &e) {
    throw ValidationError(std::string(name) + ": " + e.what());
  } catch (InfeasibleError &e) {
    throw InfeasibleError(std::string(name) + ": " + e.what());
  } catch (ConfigError &e) {
    throw ConfigError(std::string(name) + ": " + e.what());
  }
}

}  // namespace

PipelineConfig PipelineConfig::LoadFile(const std::string &path) {
  std::ifstream is(path);
  if (!is.is_open()) throw ConfigError("cannot open config file: " + path);
  PipelineConfig config;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = Trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    RequireConfig(eq != std::string::npos,
                  path + ":" + std::to_string(line_no) +
                      ": expected key=value, got '" + line + "'");
    config.Set(Trim(line.substr(0, eq)), Trim(line.substr(eq + 1)));
  }
  return config;
}

void PipelineConfig::Set(const std::string &key, const std::string &value) {
  if (key == "workdir") {
    workdir = value;
  } else if (key == "benchmark") {
    benchmark = ParseBool(key, value);
  } else if (key == "lines") {
    lines = static_cast<int>(ParseLong(key, value));
  } else if (key == "eval_lines") {
    eval_lines = static_cast<int>(ParseLong(key, value));
  } else if (key == "line_len") {
    line_len = static_cast<int>(ParseLong(key, value));
  } else if (key == "features") {
    features = value;
  } else if (key == "transcripts") {
    transcripts = value;
  } else if (key == "eval_features") {
    eval_features = value;
  } else if (key == "eval_transcripts") {
    eval_transcripts = value;
  } else if (key == "labels") {
    labels = value;
  } else if (key == "seed") {
    seed = static_cast<std::uint64_t>(ParseLong(key, value));
  } else if (key == "states") {
    states = static_cast<int>(ParseLong(key, value));
  } else if (key == "untied") {
    untied = ParseBool(key, value);
  } else if (key == "target_n") {
    target_n = static_cast<int>(ParseLong(key, value));
  } else if (key == "ns") {
    ns = ParseDouble(key, value);
  } else if (key == "expansion") {
    expansion = ParseDouble(key, value);
  } else if (key == "min_count") {
    min_count = ParseDouble(key, value);
  } else if (key == "floor") {
    floor = ParseDouble(key, value);
  } else if (key == "restarts") {
    restarts = static_cast<int>(ParseLong(key, value));
  } else if (key == "cross_position") {
    cross_position = ParseBool(key, value);
  } else if (key == "iters") {
    iters = static_cast<int>(ParseLong(key, value));
  } else if (key == "mixtures") {
    mixtures = ParseIntList(key, value);
  } else if (key == "strict_length") {
    strict_length = ParseBool(key, value);
  } else if (key == "lm_order") {
    lm_order = static_cast<int>(ParseLong(key, value));
  } else if (key == "lm_add_k") {
    lm_add_k = ParseDouble(key, value);
  } else if (key == "lm_weight") {
    lm_weight = ParseDouble(key, value);
  } else if (key == "beam") {
    beam = ParseDouble(key, value);
  } else if (key == "exclude") {
    exclude = ParseIntList(key, value);
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

void PipelineConfig::Validate() const {
  RequireConfig(!workdir.empty(), "workdir is required");
  if (benchmark) {
    RequireConfig(features.empty() && transcripts.empty() &&
                      eval_features.empty() && eval_transcripts.empty(),
                  "benchmark=1 conflicts with explicit corpus files");
    RequireConfig(lines >= 1 && eval_lines >= 1 && line_len >= 1,
                  "benchmark corpus sizes must be >= 1");
  } else {
    RequireConfig(!features.empty() && !transcripts.empty() &&
                      !eval_features.empty() && !eval_transcripts.empty(),
                  "features/transcripts/eval_features/eval_transcripts are "
                  "required unless benchmark=1");
  }
  RequireConfig(states >= 1 && states <= 10, "states must be in 1..10");
  if (untied) {
    RequireConfig(target_n == 0 && ns == 0.0,
                  "target_n/ns have no effect with untied=1");
  } else {
    RequireConfig((target_n > 0) != (ns > 0.0),
                  "exactly one of target_n and ns must be set");
  }
  RequireConfig(expansion > 0.0, "expansion must be positive");
  RequireConfig(min_count >= 0.0, "min_count must be >= 0");
  RequireConfig(floor > 0.0, "floor must be positive");
  RequireConfig(restarts >= 1, "restarts must be >= 1");
  RequireConfig(iters >= 1, "iters must be >= 1");
  RequireConfig(!mixtures.empty(), "mixtures must not be empty");
  for (size_t i = 0; i < mixtures.size(); ++i) {
    RequireConfig(mixtures[i] >= 1 &&
                      (i == 0 || mixtures[i] >= mixtures[i - 1]),
                  "mixtures must be positive and non-decreasing");
  }
  RequireConfig(lm_order == 1 || lm_order == 2, "lm_order must be 1 or 2");
  RequireConfig(lm_add_k > 0.0, "lm_add_k must be positive");
  RequireConfig(lm_weight >= 0.0, "lm_weight must be >= 0");
}

PipelineReport RunPipeline(const PipelineConfig &config) {
  config.Validate();
  namespace fs = std::filesystem;
  auto clock_ms = [] {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
  };
  double t_start = clock_ms();
  fs::create_directories(config.workdir);
  auto in_workdir = [&](const std::string &name) {
    return (fs::path(config.workdir) / name).string();
  };

  Corpus train, eval;
  std::vector<std::string> labels;
  GroundTruthTying gt;
  bool have_gt = false;

  RunStage("synth", [&] {
    if (config.benchmark) {
      SynthSpec spec = MakeRadicalBenchmark(config.seed);
      SaveSynthSpec(spec, in_workdir("benchmark.json"));
      SynthConfig train_cfg{config.lines, config.line_len, kBenchmarkJitter,
                            DeriveSeed(config.seed, 101)};
      SynthConfig eval_cfg{config.eval_lines, config.line_len,
                           kBenchmarkJitter, DeriveSeed(config.seed, 202)};
      SynthResult train_out = SynthCorpus(spec.inventory, spec.chars,
                                          train_cfg);
      SynthResult eval_out = SynthCorpus(spec.inventory, spec.chars,
                                         eval_cfg);
      train = std::move(train_out.corpus);
      eval = std::move(eval_out.corpus);
      gt = std::move(train_out.ground_truth);
      have_gt = true;
      labels = spec.labels;
      SaveCorpus(train, in_workdir("train.feat"), in_workdir("train.txt"));
      SaveCorpus(eval, in_workdir("eval.feat"), in_workdir("eval.txt"));
      SaveLabelTable(labels, in_workdir("labels.txt"));
      gt.Save(in_workdir("gt_tying.txt"));
    } else {
      train = LoadCorpus(config.features, config.transcripts);
      eval = LoadCorpus(config.eval_features, config.eval_transcripts);
      if (!config.labels.empty()) labels = LoadLabelTable(config.labels);
      // Keep the references next to the hypotheses so the report stays
      // recomputable from the workdir alone.
      SaveTranscripts(eval.transcripts, in_workdir("eval.txt"));
    }
  });

  int vocab = std::max({train.MaxCharId() + 1, eval.MaxCharId() + 1,
                        static_cast<int>(labels.size())});
  int P = config.states;

  PipelineReport report;
  report.mode = config.untied ? "untied" : "tied";
  report.vocab = vocab;
  report.positions = P;
  report.dim = train.Dim();
  report.mixtures = config.mixtures.back();

  TrainConfig train_cfg;
  train_cfg.iters = config.iters;
  train_cfg.mixture_schedule = config.mixtures;
  train_cfg.strict_length = config.strict_length;

  HmmModelSet untied_model = RunStage("train-untied", [&] {
    FlatStartResult flat = FlatStart(train, P, vocab, nullptr, config.floor,
                                     config.strict_length);
    TrainLog log;
    HmmModelSet model = ViterbiTrain(flat.model, train, train_cfg, &log);
    model.Save(in_workdir("untied.phmm"));
    report.train_loglik = log.loglik.back();
    return model;
  });

  HmmModelSet final_model = untied_model;
  if (!config.untied) {
    StatsDump dump = RunStage("collect-stats", [&] {
      std::vector<Alignment> alignments;
      StatsDump d = CollectTyingStats(untied_model, train,
                                      config.strict_length, &alignments);
      SaveAlignments(alignments, in_workdir("align_untied.txt"));
      SaveStatsDump(d, in_workdir("stats.phms"));
      return d;
    });
    TyingStats tstats(dump, vocab, P);

    QuestionSet questions = RunStage("build-questions", [&] {
      QuestionConfig qcfg;
      qcfg.restarts = config.restarts;
      qcfg.var_floor = config.floor;
      qcfg.seed = DeriveSeed(config.seed, 303);
      QuestionSet set = BuildQuestionSet(EmbedCharacters(tstats), qcfg);
      set.Save(in_workdir("questions.phmq"));
      return set;
    });
    report.question_count = static_cast<int>(questions.questions.size());

    TieResult tie = RunStage("tie", [&] {
      int target = config.target_n > 0
                       ? config.target_n
                       : static_cast<int>(std::lround(config.ns * vocab));
      RequireFeasible(target >= 1, "tied-state target rounds to zero");
      TieOptions options;
      options.expansion = config.expansion;
      options.min_count = config.min_count;
      options.var_floor = config.floor;
      options.cross_position = config.cross_position;
      TieResult result = TieStates(tstats, questions, target, options);
      result.tying.Save(in_workdir("tying.phmt"));
      for (int p = 0; p < P; ++p) {
        result.forest.SaveDot(p, in_workdir("tree_pos" + std::to_string(p) +
                                            ".dot"));
      }
      return result;
    });
    report.first_step_leaves =
        static_cast<int>(tie.forest.LeafIds().size());
    if (have_gt &&
        static_cast<int>(gt.state_identity.empty()
                             ? 0
                             : gt.state_identity.front().size()) == P) {
      report.tying_purity = TyingPurity(tie.tying, gt);
    }

    final_model = RunStage("train-tied", [&] {
      FlatStartResult flat = FlatStart(train, P, vocab, &tie.tying,
                                       config.floor, config.strict_length);
      TrainLog log;
      HmmModelSet model = ViterbiTrain(flat.model, train, train_cfg, &log);
      model.Save(in_workdir("tied.phmm"));
      report.train_loglik = log.loglik.back();
      return model;
    });
  }
  report.n_total = final_model.NumTiedStates();
  report.states_per_char = static_cast<double>(report.n_total) / vocab;
  report.parameter_count = final_model.ParameterCount();

  CharNgramLm lm = RunStage("train-lm", [&] {
    CharNgramLm out = TrainLm(train.transcripts, config.lm_order,
                              config.lm_add_k, vocab);
    out.Save(in_workdir("lm.phml"));
    return out;
  });

  std::vector<DecodeResult> hyps(eval.Size());
  std::vector<double> run_ms;
  RunStage("decode", [&] {
    for (int run = 0; run < 3; ++run) {
      std::vector<DecodeResult> results(eval.Size());
      double t0 = clock_ms();
      ParallelFor(static_cast<int>(eval.Size()), [&](int i) {
        results[i] = Decode(final_model, lm, eval.sequences[i],
                            config.lm_weight, config.beam);
      });
      run_ms.push_back(clock_ms() - t0);
      if (run == 0) hyps = std::move(results);
    }
    SaveHypotheses(hyps, in_workdir("hyps.txt"));
  });
  {
    std::vector<double> sorted = run_ms;
    std::sort(sorted.begin(), sorted.end());
    report.decode_ms = sorted[1];
  }

  RunStage("eval", [&] {
    std::vector<Transcription> hyp_labels;
    hyp_labels.reserve(hyps.size());
    for (const DecodeResult &r : hyps) hyp_labels.push_back(r.labels);
    CerCounts counts = CerTotal(eval.transcripts, hyp_labels, config.exclude);
    report.cer = counts.Rate();
    report.substitutions = counts.substitutions;
    report.insertions = counts.insertions;
    report.deletions = counts.deletions;
    report.ref_len = counts.ref_len;
  });

  RunStage("report", [&] {
    nlohmann::ordered_json j;
    j["mode"] = report.mode;
    j["seed"] = config.seed;
    j["vocab"] = report.vocab;
    j["positions"] = report.positions;
    j["dim"] = report.dim;
    j["mixtures"] = report.mixtures;
    j["n_total"] = report.n_total;
    j["states_per_char"] = report.states_per_char;
    j["parameter_count"] = report.parameter_count;
    j["question_count"] = report.question_count;
    j["first_step_leaves"] = report.first_step_leaves;
    j["train_loglik"] = report.train_loglik;
    if (report.tying_purity >= 0.0) j["tying_purity"] = report.tying_purity;
    j["cer"] = report.cer;
    j["substitutions"] = report.substitutions;
    j["insertions"] = report.insertions;
    j["deletions"] = report.deletions;
    j["ref_len"] = report.ref_len;
    std::ofstream os = OpenTextOut(in_workdir("report.json"));
    os << j.dump(2) << '\n';
    RequireIo(os.good(), "write failed: report.json");

    nlohmann::ordered_json timing;
    timing["decode_runs_ms"] = run_ms;
    timing["decode_ms"] = report.decode_ms;
    timing["total_ms"] = clock_ms() - t_start;
    std::ofstream ts = OpenTextOut(in_workdir("timing.json"));
    ts << timing.dump(2) << '\n';
    RequireIo(ts.good(), "write failed: timing.json");
  });

  return report;
}

}  // namespace phmm
