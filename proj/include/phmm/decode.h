// include/phmm/decode.h

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

#ifndef PHMM_DECODE_H_
#define PHMM_DECODE_H_

#include <string>
#include <utility>
#include <vector>

#include "phmm/lm.h"
#include "phmm/model.h"

namespace phmm {

struct DecodeResult {
  Transcription labels;
  double score = 0.0;
  std::vector<std::pair<int, int>> spans;  // [begin, end) frames per char
};

// Token-passing Viterbi over all character HMMs in parallel, with the LM
// applied at character boundaries scaled by lm_weight.  With beam <= 0
// (unbounded) the result is the exact joint optimum for this order <= 2
// LM; ties prefer the smaller character id.
DecodeResult Decode(const HmmModelSet &model, const CharNgramLm &lm,
                    const FeatureSequence &seq, double lm_weight, double beam);

// One hypothesis per line, ids then spans in a trailing comment:
// "3 17 5 # spans=0-6,6-11,11-20".
void SaveHypotheses(const std::vector<DecodeResult> &results,
                    const std::string &path);
// Reads the ids back, ignoring the span comments.
std::vector<Transcription> LoadHypotheses(const std::string &path);

struct CerCounts {
  long long substitutions = 0;
  long long insertions = 0;
  long long deletions = 0;
  long long ref_len = 0;

  long long Errors() const { return substitutions + insertions + deletions; }
  double Rate() const { return static_cast<double>(Errors()) / ref_len; }
};

// Levenshtein alignment with unit costs; equal-cost paths prefer
// substitutions over insertion+deletion pairs.
CerCounts Cer(const Transcription &ref, const Transcription &hyp);

// Corpus-level accumulation.  Ids in `exclude` (garbage or blank classes)
// are dropped from both sides before scoring.
CerCounts CerTotal(const std::vector<Transcription> &refs,
                   const std::vector<Transcription> &hyps,
                   const std::vector<int> &exclude = {});

}  // namespace phmm

#endif  // PHMM_DECODE_H_
