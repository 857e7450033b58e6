// include/phmm/corpus.h

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

#ifndef PHMM_CORPUS_H_
#define PHMM_CORPUS_H_

#include <span>
#include <string>
#include <vector>

#include "phmm/common.h"

namespace phmm {

// One text line as a T x D feature matrix, row-major.
class FeatureSequence {
 public:
  FeatureSequence() = default;
  FeatureSequence(int dim, int frames)
      : dim_(dim), data_(static_cast<size_t>(dim) * frames, 0.0f) {}

  int Dim() const { return dim_; }
  int Frames() const {
    return dim_ == 0 ? 0 : static_cast<int>(data_.size()) / dim_;
  }
  std::span<const float> Frame(int t) const {
    return {data_.data() + static_cast<size_t>(t) * dim_,
            static_cast<size_t>(dim_)};
  }
  std::span<float> MutableFrame(int t) {
    return {data_.data() + static_cast<size_t>(t) * dim_,
            static_cast<size_t>(dim_)};
  }
  const std::vector<float> &Data() const { return data_; }

  void Validate() const;

 private:
  int dim_ = 0;
  std::vector<float> data_;
};

// Character ids are dense integers; display strings live in a sidecar table.
using Transcription = std::vector<int>;

struct Corpus {
  std::vector<FeatureSequence> sequences;
  std::vector<Transcription> transcripts;

  int Dim() const { return sequences.empty() ? 0 : sequences.front().Dim(); }
  size_t Size() const { return sequences.size(); }
  long long TotalFrames() const;
  int MaxCharId() const;
  // T >= 1 everywhere, uniform D, finite values, non-empty transcripts,
  // ids within [0, vocab_size) when vocab_size > 0.
  void Validate(int vocab_size = 0) const;
};

// "PHMF" binary feature file.
void SaveFeatures(const std::vector<FeatureSequence> &sequences,
                  const std::string &path);
std::vector<FeatureSequence> LoadFeatures(const std::string &path);

// One line per sequence, whitespace-separated integer char ids.
void SaveTranscripts(const std::vector<Transcription> &transcripts,
                     const std::string &path);
std::vector<Transcription> LoadTranscripts(const std::string &path);

// Line k holds the display label of char id k.
void SaveLabelTable(const std::vector<std::string> &labels,
                    const std::string &path);
std::vector<std::string> LoadLabelTable(const std::string &path);

Corpus LoadCorpus(const std::string &feature_path,
                  const std::string &transcript_path);
void SaveCorpus(const Corpus &corpus, const std::string &feature_path,
                const std::string &transcript_path);

}  // namespace phmm

#endif  // PHMM_CORPUS_H_
