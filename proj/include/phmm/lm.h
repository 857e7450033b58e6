// include/phmm/lm.h

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

#ifndef PHMM_LM_H_
#define PHMM_LM_H_

#include <string>
#include <vector>

#include "phmm/corpus.h"

namespace phmm {

// Character n-gram model of order 1 or 2 with add-k smoothing.  Events
// cover the V characters plus the end marker (id V); bigram contexts cover
// the start marker (passed as -1) plus the V characters.  Unigram counts
// are over character tokens only, so a single-token corpus {a} yields
// P(a) = (1+k) / (1 + k*(V+1)).
struct CharNgramLm {
  int order = 1;
  int vocab_size = 0;
  double add_k = 0.1;
  // order 1: logp[event]; order 2: logp[context * (V+1) + event] with
  // context 0 = start, 1+c = after character c.
  std::vector<double> logp;

  int EndId() const { return vocab_size; }
  double LogProb(int context_char, int next) const {
    if (order == 1) return logp[next];
    return logp[static_cast<size_t>(context_char + 1) * (vocab_size + 1) +
                next];
  }

  void Validate() const;
  // "PHML" text format: header, then "context char logprob" lines.
  void Save(const std::string &path) const;
  static CharNgramLm Load(const std::string &path);
};

// vocab_size 0 infers the vocabulary from the transcripts.
CharNgramLm TrainLm(const std::vector<Transcription> &transcripts, int order,
                    double add_k, int vocab_size = 0);

}  // namespace phmm

#endif  // PHMM_LM_H_
