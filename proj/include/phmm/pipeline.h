// include/phmm/pipeline.h

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

#ifndef PHMM_PIPELINE_H_
#define PHMM_PIPELINE_H_

#include <cstdint>
#include <string>
#include <vector>

namespace phmm {

// End-to-end run configuration.  File format: UTF-8 "key=value" lines,
// '#' comments; CLI flags override file values.  Keys are listed in the
// README.
struct PipelineConfig {
  std::string workdir;

  // Either synthesize the standard benchmark corpus...
  bool benchmark = false;
  int lines = 200;
  int eval_lines = 50;
  int line_len = 8;
  // ...or point at existing files.
  std::string features, transcripts, eval_features, eval_transcripts, labels;

  std::uint64_t seed = 0;
  int states = 2;  // HMM states per character

  // untied skips the question/tying stages and decodes the untied model.
  bool untied = false;
  int target_n = 0;   // total tied states; 0 = unset
  double ns = 0.0;    // tied states per character; 0 = unset

  double expansion = 2.0;
  double min_count = 10.0;
  double floor = 1e-4;
  int restarts = 10;
  bool cross_position = false;

  int iters = 6;
  std::vector<int> mixtures = {1, 2, 4};
  bool strict_length = false;

  int lm_order = 1;
  double lm_add_k = 0.1;
  double lm_weight = 1.0;
  double beam = 0.0;  // <= 0 means unbounded

  std::vector<int> exclude;  // char ids dropped from CER scoring

  static PipelineConfig LoadFile(const std::string &path);
  void Set(const std::string &key, const std::string &value);
  void Validate() const;
};

struct PipelineReport {
  std::string mode;  // "tied" or "untied"
  double cer = 0.0;
  long long substitutions = 0, insertions = 0, deletions = 0, ref_len = 0;
  int n_total = 0;
  double states_per_char = 0.0;
  long long parameter_count = 0;
  int vocab = 0, positions = 0, dim = 0, mixtures = 0;
  int question_count = 0, first_step_leaves = 0;
  double train_loglik = 0.0;
  double tying_purity = -1.0;  // -1 when no ground truth is available
  double decode_ms = 0.0;      // median of 3 runs; goes to timing.json only
};

// Runs synthesis/ingestion, untied training, statistics, questions, tying,
// tied training, LM training, decoding and scoring, writing every artifact
// into the workdir.  report.json holds the deterministic fields;
// timing.json holds wall-clock measurements.
PipelineReport RunPipeline(const PipelineConfig &config);

}  // namespace phmm

#endif  // PHMM_PIPELINE_H_
