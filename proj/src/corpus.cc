// src/corpus.cc

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

#include "phmm/corpus.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "phmm/binio.h"

namespace phmm {

void FeatureSequence::Validate() const {
  Require(dim_ > 0, "FeatureSequence: dimension must be positive");
  Require(Frames() >= 1, "FeatureSequence: at least one frame required");
  for (float v : data_) {
    Require(std::isfinite(v), "FeatureSequence: non-finite value");
  }
}

long long Corpus::TotalFrames() const {
  long long total = 0;
  for (const FeatureSequence &seq : sequences) total += seq.Frames();
  return total;
}

int Corpus::MaxCharId() const {
  int max_id = -1;
  for (const Transcription &t : transcripts) {
    for (int c : t) max_id = std::max(max_id, c);
  }
  return max_id;
}

void Corpus::Validate(int vocab_size) const {
  Require(sequences.size() == transcripts.size(),
          "corpus: sequence count " + std::to_string(sequences.size()) +
              " != transcription count " + std::to_string(transcripts.size()));
  int dim = Dim();
  for (size_t i = 0; i < sequences.size(); ++i) {
    sequences[i].Validate();
    Require(sequences[i].Dim() == dim,
            "corpus: dimension mismatch at sequence " + std::to_string(i));
    Require(!transcripts[i].empty(),
            "corpus: empty transcription at line " + std::to_string(i));
    for (int c : transcripts[i]) {
      Require(c >= 0, "corpus: negative char id at line " + std::to_string(i));
      if (vocab_size > 0) {
        Require(c < vocab_size, "corpus: char id " + std::to_string(c) +
                                    " out of vocabulary at line " +
                                    std::to_string(i));
      }
    }
  }
}

static const char kFeatureMagic[5] = "PHMF";
static const std::uint32_t kFeatureVersion = 1;

void SaveFeatures(const std::vector<FeatureSequence> &sequences,
                  const std::string &path) {
  std::ofstream os = OpenBinaryOut(path);
  WriteMagic(os, kFeatureMagic);
  WriteU32(os, kFeatureVersion);
  WriteU32(os, static_cast<std::uint32_t>(sequences.size()));
  for (const FeatureSequence &seq : sequences) {
    WriteU32(os, static_cast<std::uint32_t>(seq.Frames()));
    WriteU32(os, static_cast<std::uint32_t>(seq.Dim()));
    for (float v : seq.Data()) WriteF32(os, v);
  }
  RequireIo(os.good(), "write failed: " + path);
}

std::vector<FeatureSequence> LoadFeatures(const std::string &path) {
  std::ifstream is = OpenBinaryIn(path);
  ExpectMagic(is, kFeatureMagic, path);
  std::uint32_t version = ReadU32(is, path + " version");
  RequireIo(version == kFeatureVersion,
            "malformed header in " + path + ": unsupported version " +
                std::to_string(version));
  std::uint32_t count = ReadU32(is, path + " sequence count");
  std::vector<FeatureSequence> sequences;
  sequences.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    std::uint32_t frames = ReadU32(is, path + " frame count");
    std::uint32_t dim = ReadU32(is, path + " dimension");
    RequireIo(frames >= 1, "malformed header in " + path + ": sequence " +
                               std::to_string(i) + " has 0 frames");
    RequireIo(dim >= 1, "malformed header in " + path + ": sequence " +
                            std::to_string(i) + " declares D=0");
    FeatureSequence seq(static_cast<int>(dim), static_cast<int>(frames));
    for (std::uint32_t t = 0; t < frames; ++t) {
      auto row = seq.MutableFrame(static_cast<int>(t));
      for (std::uint32_t d = 0; d < dim; ++d) {
        row[d] = ReadF32(is, path + " frame data");
      }
    }
    sequences.push_back(std::move(seq));
  }
  return sequences;
}

void SaveTranscripts(const std::vector<Transcription> &transcripts,
                     const std::string &path) {
  std::ofstream os = OpenTextOut(path);
  for (const Transcription &t : transcripts) {
    for (size_t i = 0; i < t.size(); ++i) {
      if (i > 0) os << ' ';
      os << t[i];
    }
    os << '\n';
  }
  RequireIo(os.good(), "write failed: " + path);
}

std::vector<Transcription> LoadTranscripts(const std::string &path) {
  std::ifstream is = OpenTextIn(path);
  std::vector<Transcription> transcripts;
  std::string line;
  size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    std::istringstream ss(line);
    Transcription t;
    long long id;
    while (ss >> id) {
      RequireIo(id >= 0, path + ": negative char id at line " +
                             std::to_string(line_no));
      t.push_back(static_cast<int>(id));
    }
    RequireIo(ss.eof(), path + ": non-integer token at line " +
                            std::to_string(line_no));
    if (!t.empty()) transcripts.push_back(std::move(t));
  }
  return transcripts;
}

void SaveLabelTable(const std::vector<std::string> &labels,
                    const std::string &path) {
  std::ofstream os = OpenTextOut(path);
  for (const std::string &label : labels) os << label << '\n';
  RequireIo(os.good(), "write failed: " + path);
}

std::vector<std::string> LoadLabelTable(const std::string &path) {
  std::ifstream is = OpenTextIn(path);
  std::vector<std::string> labels;
  std::string line;
  while (std::getline(is, line)) labels.push_back(line);
  return labels;
}

Corpus LoadCorpus(const std::string &feature_path,
                  const std::string &transcript_path) {
  Corpus corpus;
  corpus.sequences = LoadFeatures(feature_path);
  corpus.transcripts = LoadTranscripts(transcript_path);
  Require(corpus.sequences.size() == corpus.transcripts.size(),
          "transcription/sequence count mismatch: " +
              std::to_string(corpus.transcripts.size()) + " transcripts vs " +
              std::to_string(corpus.sequences.size()) + " sequences");
  corpus.Validate();
  return corpus;
}

void SaveCorpus(const Corpus &corpus, const std::string &feature_path,
                const std::string &transcript_path) {
  SaveFeatures(corpus.sequences, feature_path);
  SaveTranscripts(corpus.transcripts, transcript_path);
}

}  // namespace phmm
