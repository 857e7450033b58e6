// tools/phmm_main.cc

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

#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "phmm/decode.h"
#include "phmm/pipeline.h"
#include "phmm/questions.h"
#include "phmm/synth.h"
#include "phmm/threading.h"
#include "phmm/train.h"
#include "phmm/tying.h"

namespace {

using namespace phmm;

std::vector<int> ParseIntCsv(const std::string &csv) {
  std::vector<int> out;
  std::istringstream is(csv);
  std::string item;
  while (std::getline(is, item, ',')) {
    if (!item.empty()) out.push_back(std::stoi(item));
  }
  return out;
}

struct SynthArgs {
  bool benchmark = false;
  std::string spec;
  std::uint64_t seed = 0;
  int lines = 200;
  int line_len = 8;
  double jitter = kBenchmarkJitter;
  std::string features, transcripts, gt, labels;
};

void CmdSynth(const SynthArgs &args) {
  if (args.benchmark == !args.spec.empty()) {
    throw ConfigError("exactly one of --benchmark and --spec is required");
  }
  SynthSpec spec = args.benchmark ? MakeRadicalBenchmark(args.seed)
                                  : LoadSynthSpec(args.spec);
  SynthConfig config{args.lines, args.line_len, args.jitter, args.seed};
  SynthResult result = SynthCorpus(spec.inventory, spec.chars, config);
  SaveCorpus(result.corpus, args.features, args.transcripts);
  if (!args.gt.empty()) result.ground_truth.Save(args.gt);
  if (!args.labels.empty()) SaveLabelTable(spec.labels, args.labels);
  std::cerr << "phmm: wrote " << result.corpus.Size() << " lines, "
            << result.corpus.TotalFrames() << " frames\n";
}

struct TrainArgs {
  std::string features, transcripts, tying, out;
  int vocab = 0;
  int states = 2;
  int iters = 6;
  std::string mixtures = "1,2,4";
  double floor = kDefaultVarFloor;
  bool strict = false;
};

void CmdTrain(const TrainArgs &args) {
  Corpus corpus = LoadCorpus(args.features, args.transcripts);
  StateTying tying;
  const StateTying *tying_ptr = nullptr;
  if (!args.tying.empty()) {
    tying = StateTying::Load(args.tying);
    tying_ptr = &tying;
  }
  FlatStartResult flat = FlatStart(corpus, args.states, args.vocab, tying_ptr,
                                   args.floor, args.strict);
  TrainConfig config;
  config.iters = args.iters;
  config.mixture_schedule = ParseIntCsv(args.mixtures);
  config.strict_length = args.strict;
  TrainLog log;
  HmmModelSet model = ViterbiTrain(flat.model, corpus, config, &log);
  model.Save(args.out);
  for (size_t i = 0; i < log.loglik.size(); ++i) {
    std::cerr << "phmm: iter " << i << " mixtures " << log.mixtures[i]
              << " loglik " << log.loglik[i] << "\n";
  }
  std::cerr << "phmm: wrote " << args.out << " ("
            << model.ParameterCount() << " parameters)\n";
}

struct StatsArgs {
  std::string model, features, transcripts, out, align_out;
  bool strict = false;
};

void CmdCollectStats(const StatsArgs &args) {
  HmmModelSet model = HmmModelSet::Load(args.model);
  Corpus corpus = LoadCorpus(args.features, args.transcripts);
  std::vector<Alignment> alignments;
  StatsDump dump = CollectTyingStats(model, corpus, args.strict,
                                     &alignments);
  SaveStatsDump(dump, args.out);
  if (!args.align_out.empty()) SaveAlignments(alignments, args.align_out);
  std::cerr << "phmm: wrote " << dump.size() << " statistics records\n";
}

struct QuestionArgs {
  std::string stats, out;
  int restarts = 10;
  std::uint64_t seed = 0;
  double floor = kDefaultVarFloor;
};

void CmdBuildQuestions(const QuestionArgs &args) {
  TyingStats stats(LoadStatsDump(args.stats));
  QuestionConfig config;
  config.restarts = args.restarts;
  config.seed = args.seed;
  config.var_floor = args.floor;
  QuestionSet set = BuildQuestionSet(EmbedCharacters(stats), config);
  set.Save(args.out);
  std::cerr << "phmm: wrote " << set.questions.size() << " questions\n";
}

struct TieArgs {
  std::string stats, questions, out, gt, tree_dump_dir;
  int target_n = 0;
  double ns = 0.0;
  double expansion = 2.0;
  double min_count = 10.0;
  double floor = kDefaultVarFloor;
  bool cross_position = false;
};

void CmdTie(const TieArgs &args) {
  if ((args.target_n > 0) == (args.ns > 0.0)) {
    throw ConfigError("exactly one of --target-n and --ns is required");
  }
  TyingStats stats(LoadStatsDump(args.stats));
  QuestionSet questions = QuestionSet::Load(args.questions);
  int target = args.target_n > 0
                   ? args.target_n
                   : static_cast<int>(std::lround(args.ns *
                                                  stats.VocabSize()));
  RequireFeasible(target >= 1, "tied-state target rounds to zero");
  TieOptions options;
  options.expansion = args.expansion;
  options.min_count = args.min_count;
  options.var_floor = args.floor;
  options.cross_position = args.cross_position;
  TieResult result = TieStates(stats, questions, target, options);
  result.tying.Save(args.out);
  if (!args.tree_dump_dir.empty()) {
    std::filesystem::create_directories(args.tree_dump_dir);
    for (int p = 0; p < stats.Positions(); ++p) {
      result.forest.SaveDot(
          p, (std::filesystem::path(args.tree_dump_dir) /
              ("pos" + std::to_string(p) + ".dot")).string());
    }
  }
  std::cerr << "phmm: " << result.forest.LeafIds().size()
            << " first-step leaves, " << result.tying.total
            << " tied states\n";
  if (!args.gt.empty()) {
    double purity = TyingPurity(result.tying, GroundTruthTying::Load(args.gt));
    std::cout << "tying_purity " << purity << "\n";
  }
}

struct LmArgs {
  std::string transcripts, out;
  int order = 1;
  double add_k = 0.1;
  int vocab = 0;
};

void CmdTrainLm(const LmArgs &args) {
  CharNgramLm lm = TrainLm(LoadTranscripts(args.transcripts), args.order,
                           args.add_k, args.vocab);
  lm.Save(args.out);
  std::cerr << "phmm: wrote order-" << lm.order << " LM over "
            << lm.vocab_size << " characters\n";
}

struct DecodeArgs {
  std::string model, lm, features, out;
  double lm_weight = 1.0;
  double beam = 0.0;
};

void CmdDecode(const DecodeArgs &args) {
  HmmModelSet model = HmmModelSet::Load(args.model);
  CharNgramLm lm = CharNgramLm::Load(args.lm);
  std::vector<FeatureSequence> sequences = LoadFeatures(args.features);
  std::vector<DecodeResult> results(sequences.size());
  ParallelFor(static_cast<int>(sequences.size()), [&](int i) {
    results[i] = Decode(model, lm, sequences[i], args.lm_weight, args.beam);
  });
  SaveHypotheses(results, args.out);
  std::cerr << "phmm: decoded " << sequences.size() << " sequences\n";
}

struct EvalArgs {
  std::string ref, hyp;
  std::string exclude;
};

void CmdEval(const EvalArgs &args) {
  std::vector<Transcription> refs = LoadTranscripts(args.ref);
  std::vector<Transcription> hyps = LoadHypotheses(args.hyp);
  CerCounts counts = CerTotal(refs, hyps, ParseIntCsv(args.exclude));
  nlohmann::ordered_json j;
  j["cer"] = counts.Rate();
  j["substitutions"] = counts.substitutions;
  j["insertions"] = counts.insertions;
  j["deletions"] = counts.deletions;
  j["ref_len"] = counts.ref_len;
  std::cout << j.dump(2) << "\n";
}

struct PipelineArgs {
  std::string config;
  std::string workdir;
  std::vector<std::string> sets;
};

void CmdPipeline(const PipelineArgs &args) {
  PipelineConfig config;
  if (!args.config.empty()) config = PipelineConfig::LoadFile(args.config);
  if (!args.workdir.empty()) config.workdir = args.workdir;
  for (const std::string &kv : args.sets) {
    size_t eq = kv.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("--set expects key=value, got '" + kv + "'");
    }
    config.Set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  RunPipeline(config);
  std::ifstream report(std::filesystem::path(config.workdir) / "report.json");
  std::cout << report.rdbuf();
}

struct ReportArgs {
  std::string workdir;
  std::string exclude;
};

void CmdReport(const ReportArgs &args) {
  namespace fs = std::filesystem;
  auto path = [&](const std::string &name) {
    return (fs::path(args.workdir) / name).string();
  };
  std::string model_file = fs::exists(path("tied.phmm")) ? path("tied.phmm")
                                                         : path("untied.phmm");
  HmmModelSet model = HmmModelSet::Load(model_file);
  std::vector<Transcription> refs = LoadTranscripts(path("eval.txt"));
  std::vector<Transcription> hyps = LoadHypotheses(path("hyps.txt"));
  CerCounts counts = CerTotal(refs, hyps, ParseIntCsv(args.exclude));
  nlohmann::ordered_json j;
  j["model"] = model_file;
  j["n_total"] = model.NumTiedStates();
  j["states_per_char"] =
      static_cast<double>(model.NumTiedStates()) / model.VocabSize();
  j["parameter_count"] = model.ParameterCount();
  j["cer"] = counts.Rate();
  j["substitutions"] = counts.substitutions;
  j["insertions"] = counts.insertions;
  j["deletions"] = counts.deletions;
  j["ref_len"] = counts.ref_len;
  std::cout << j.dump(2) << "\n";
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"parsimonious HMM toolkit: state tying, training, decoding"};
  app.require_subcommand(1);

  SynthArgs synth;
  CLI::App *cmd = app.add_subcommand("synth", "synthesize a corpus");
  cmd->add_flag("--benchmark", synth.benchmark,
                "use the standard radical benchmark");
  cmd->add_option("--spec", synth.spec, "JSON inventory + character spec");
  cmd->add_option("--seed", synth.seed, "PRNG seed");
  cmd->add_option("--lines", synth.lines, "number of lines");
  cmd->add_option("--line-len", synth.line_len, "characters per line");
  cmd->add_option("--jitter", synth.jitter, "duration jitter in [0,1)");
  cmd->add_option("--features", synth.features, "output feature file")
      ->required();
  cmd->add_option("--transcripts", synth.transcripts,
                  "output transcript file")
      ->required();
  cmd->add_option("--gt", synth.gt, "output ground-truth tying file");
  cmd->add_option("--labels", synth.labels, "output label table");
  cmd->callback([&] { CmdSynth(synth); });

  TrainArgs train_untied;
  cmd = app.add_subcommand("train-untied", "flat start + Viterbi training");
  cmd->add_option("--features", train_untied.features, "feature file")
      ->required();
  cmd->add_option("--transcripts", train_untied.transcripts,
                  "transcript file")
      ->required();
  cmd->add_option("--vocab", train_untied.vocab,
                  "vocabulary size (0 = infer)");
  cmd->add_option("--states", train_untied.states, "states per character");
  cmd->add_option("--iters", train_untied.iters, "training iterations");
  cmd->add_option("--mixtures", train_untied.mixtures,
                  "mixture schedule, e.g. 1,2,4");
  cmd->add_option("--floor", train_untied.floor, "variance floor");
  cmd->add_flag("--strict", train_untied.strict,
                "fail on too-short sequences instead of skipping");
  cmd->add_option("--out", train_untied.out, "output model")->required();
  cmd->callback([&] { CmdTrain(train_untied); });

  TrainArgs train_tied;
  cmd = app.add_subcommand("train-tied", "train with a tied-state map");
  cmd->add_option("--features", train_tied.features, "feature file")
      ->required();
  cmd->add_option("--transcripts", train_tied.transcripts, "transcript file")
      ->required();
  cmd->add_option("--tying", train_tied.tying, "tying file")->required();
  cmd->add_option("--vocab", train_tied.vocab, "vocabulary size (0 = infer)");
  cmd->add_option("--states", train_tied.states, "states per character");
  cmd->add_option("--iters", train_tied.iters, "training iterations");
  cmd->add_option("--mixtures", train_tied.mixtures,
                  "mixture schedule, e.g. 1,2,4");
  cmd->add_option("--floor", train_tied.floor, "variance floor");
  cmd->add_flag("--strict", train_tied.strict,
                "fail on too-short sequences instead of skipping");
  cmd->add_option("--out", train_tied.out, "output model")->required();
  cmd->callback([&] { CmdTrain(train_tied); });

  StatsArgs stats;
  cmd = app.add_subcommand("collect-stats",
                           "per (char, position) statistics from alignment");
  cmd->add_option("--model", stats.model, "untied model")->required();
  cmd->add_option("--features", stats.features, "feature file")->required();
  cmd->add_option("--transcripts", stats.transcripts, "transcript file")
      ->required();
  cmd->add_flag("--strict", stats.strict,
                "fail on too-short sequences instead of skipping");
  cmd->add_option("--out", stats.out, "output statistics dump")->required();
  cmd->add_option("--align-out", stats.align_out,
                  "optional alignment dump");
  cmd->callback([&] { CmdCollectStats(stats); });

  QuestionArgs questions;
  cmd = app.add_subcommand("build-questions",
                           "data-driven question set from statistics");
  cmd->add_option("--stats", questions.stats, "statistics dump")->required();
  cmd->add_option("--restarts", questions.restarts, "2-means restarts");
  cmd->add_option("--seed", questions.seed, "PRNG seed");
  cmd->add_option("--floor", questions.floor, "variance floor");
  cmd->add_option("--out", questions.out, "output question set")->required();
  cmd->callback([&] { CmdBuildQuestions(questions); });

  TieArgs tie;
  cmd = app.add_subcommand("tie", "two-step state tying");
  cmd->add_option("--stats", tie.stats, "statistics dump")->required();
  cmd->add_option("--questions", tie.questions, "question set")->required();
  cmd->add_option("--target-n", tie.target_n, "total tied states");
  cmd->add_option("--ns", tie.ns, "tied states per character");
  cmd->add_option("--expansion", tie.expansion, "first-step growth factor");
  cmd->add_option("--min-count", tie.min_count, "minimum frames per leaf");
  cmd->add_option("--floor", tie.floor, "variance floor");
  cmd->add_flag("--cross-position", tie.cross_position,
                "allow merges across state positions");
  cmd->add_option("--out", tie.out, "output tying file")->required();
  cmd->add_option("--gt", tie.gt,
                  "ground-truth tying; prints purity when given");
  cmd->add_option("--tree-dump-dir", tie.tree_dump_dir,
                  "write per-position dot files here");
  cmd->callback([&] { CmdTie(tie); });

  LmArgs lm;
  cmd = app.add_subcommand("train-lm", "character n-gram language model");
  cmd->add_option("--transcripts", lm.transcripts, "transcript file")
      ->required();
  cmd->add_option("--order", lm.order, "1 or 2");
  cmd->add_option("--add-k", lm.add_k, "smoothing constant");
  cmd->add_option("--vocab", lm.vocab, "vocabulary size (0 = infer)");
  cmd->add_option("--out", lm.out, "output LM file")->required();
  cmd->callback([&] { CmdTrainLm(lm); });

  DecodeArgs decode;
  cmd = app.add_subcommand("decode", "recognize feature sequences");
  cmd->add_option("--model", decode.model, "model file")->required();
  cmd->add_option("--lm", decode.lm, "LM file")->required();
  cmd->add_option("--features", decode.features, "feature file")->required();
  cmd->add_option("--lm-weight", decode.lm_weight, "LM scale");
  cmd->add_option("--beam", decode.beam, "beam width (<= 0 = unbounded)");
  cmd->add_option("--out", decode.out, "output hypotheses")->required();
  cmd->callback([&] { CmdDecode(decode); });

  EvalArgs eval;
  cmd = app.add_subcommand("eval", "character error rate");
  cmd->add_option("--ref", eval.ref, "reference transcripts")->required();
  cmd->add_option("--hyp", eval.hyp, "hypotheses")->required();
  cmd->add_option("--exclude", eval.exclude,
                  "comma-separated char ids to drop from scoring");
  cmd->callback([&] { CmdEval(eval); });

  PipelineArgs pipeline;
  cmd = app.add_subcommand("pipeline", "full train/tie/decode run");
  cmd->add_option("--config", pipeline.config, "key=value config file");
  cmd->add_option("--workdir", pipeline.workdir, "artifact directory");
  cmd->add_option("--set", pipeline.sets, "override, e.g. --set seed=7");
  cmd->callback([&] { CmdPipeline(pipeline); });

  ReportArgs report;
  cmd = app.add_subcommand("report", "recompute report from artifacts");
  cmd->add_option("--workdir", report.workdir, "artifact directory")
      ->required();
  cmd->add_option("--exclude", report.exclude,
                  "comma-separated char ids to drop from scoring");
  cmd->callback([&] { CmdReport(report); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    return app.exit(e);
  } catch (const phmm::IoError &e) {
    std::cerr << "phmm ERROR (io): " << e.what() << "\n";
    return 3;
  } catch (const phmm::ValidationError &e) {
    std::cerr << "phmm ERROR (validation): " << e.what() << "\n";
    return 4;
  } catch (const phmm::InfeasibleError &e) {
    std::cerr << "phmm ERROR (infeasible): " << e.what() << "\n";
    return 5;
  } catch (const phmm::ConfigError &e) {
    std::cerr << "phmm ERROR (config): " << e.what() << "\n";
    return 6;
  } catch (const std::exception &e) {
    std::cerr << "phmm ERROR: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
