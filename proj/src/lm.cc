// src/lm.cc

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

#include "phmm/lm.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "phmm/binio.h"

namespace phmm {

void CharNgramLm::Validate() const {
  Require(order == 1 || order == 2, "LM order must be 1 or 2");
  Require(vocab_size >= 1, "LM with empty vocabulary");
  Require(add_k > 0.0, "add_k must be positive");
  size_t events = static_cast<size_t>(vocab_size) + 1;
  size_t contexts = order == 1 ? 1 : events;  // start marker + V characters
  Require(logp.size() == contexts * events, "LM table size mismatch");
  for (size_t ctx = 0; ctx < contexts; ++ctx) {
    double sum = 0.0;
    for (size_t e = 0; e < events; ++e) {
      double lp = logp[ctx * events + e];
      Require(std::isfinite(lp), "non-finite LM log-probability");
      sum += std::exp(lp);
    }
    Require(std::abs(sum - 1.0) <= 1e-9,
            "LM conditional does not sum to 1 for context " +
                std::to_string(static_cast<long long>(ctx) - 1));
  }
}

CharNgramLm TrainLm(const std::vector<Transcription> &transcripts, int order,
                    double add_k, int vocab_size) {
  Require(order == 1 || order == 2, "LM order must be 1 or 2");
  Require(add_k > 0.0, "add_k must be positive");
  Require(!transcripts.empty(), "no transcripts to train on");

  int max_id = -1;
  for (const Transcription &t : transcripts) {
    Require(!t.empty(), "empty transcript");
    for (int c : t) {
      Require(c >= 0, "negative char id in transcript");
      max_id = std::max(max_id, c);
    }
  }
  CharNgramLm lm;
  lm.order = order;
  lm.add_k = add_k;
  lm.vocab_size = std::max(vocab_size, max_id + 1);
  Require(lm.vocab_size >= 1, "LM with empty vocabulary");

  size_t events = static_cast<size_t>(lm.vocab_size) + 1;  // chars + end
  if (order == 1) {
    std::vector<double> count(events, 0.0);
    double total = 0.0;
    for (const Transcription &t : transcripts) {
      for (int c : t) {
        count[c] += 1.0;
        total += 1.0;
      }
    }
    lm.logp.resize(events);
    double denom = total + add_k * static_cast<double>(events);
    for (size_t e = 0; e < events; ++e) {
      lm.logp[e] = std::log((count[e] + add_k) / denom);
    }
  } else {
    size_t contexts = events;  // start + V characters
    std::vector<double> count(contexts * events, 0.0);
    std::vector<double> ctx_total(contexts, 0.0);
    auto bump = [&](int ctx_char, int next) {
      size_t ctx = static_cast<size_t>(ctx_char + 1);
      count[ctx * events + next] += 1.0;
      ctx_total[ctx] += 1.0;
    };
    for (const Transcription &t : transcripts) {
      bump(-1, t.front());
      for (size_t i = 1; i < t.size(); ++i) bump(t[i - 1], t[i]);
      bump(t.back(), lm.EndId());
    }
    lm.logp.resize(contexts * events);
    for (size_t ctx = 0; ctx < contexts; ++ctx) {
      double denom = ctx_total[ctx] + add_k * static_cast<double>(events);
      for (size_t e = 0; e < events; ++e) {
        lm.logp[ctx * events + e] =
            std::log((count[ctx * events + e] + add_k) / denom);
      }
    }
  }
  lm.Validate();
  return lm;
}

void CharNgramLm::Save(const std::string &path) const {
  Validate();
  std::ofstream os = OpenTextOut(path);
  os << "PHML v1 order=" << order << " V=" << vocab_size << " k="
     << std::setprecision(17) << add_k << '\n';
  size_t events = static_cast<size_t>(vocab_size) + 1;
  size_t contexts = order == 1 ? 1 : events;
  for (size_t ctx = 0; ctx < contexts; ++ctx) {
    long long ctx_char = order == 1 ? -1 : static_cast<long long>(ctx) - 1;
    for (size_t e = 0; e < events; ++e) {
      os << ctx_char << ' ' << e << ' ' << std::setprecision(17)
         << logp[ctx * events + e] << '\n';
    }
  }
  RequireIo(os.good(), "write failed: " + path);
}

CharNgramLm CharNgramLm::Load(const std::string &path) {
  std::ifstream is = OpenTextIn(path);
  std::string header;
  std::getline(is, header);
  std::istringstream hs(header);
  std::string tag, ver, ofield, vfield, kfield;
  hs >> tag >> ver >> ofield >> vfield >> kfield;
  RequireIo(tag == "PHML" && ver == "v1" && ofield.rfind("order=", 0) == 0 &&
                vfield.rfind("V=", 0) == 0 && kfield.rfind("k=", 0) == 0,
            "malformed header in " + path);
  CharNgramLm lm;
  lm.order = std::stoi(ofield.substr(6));
  lm.vocab_size = std::stoi(vfield.substr(2));
  lm.add_k = std::stod(kfield.substr(2));
  RequireIo(lm.order == 1 || lm.order == 2, path + ": bad order");
  RequireIo(lm.vocab_size >= 1, path + ": bad vocabulary size");
  size_t events = static_cast<size_t>(lm.vocab_size) + 1;
  size_t contexts = lm.order == 1 ? 1 : events;
  lm.logp.assign(contexts * events, 0.0);
  std::vector<char> seen(contexts * events, 0);
  long long ctx_char;
  size_t e;
  double lp;
  while (is >> ctx_char >> e >> lp) {
    size_t ctx = lm.order == 1 ? 0 : static_cast<size_t>(ctx_char + 1);
    RequireIo(ctx < contexts && e < events, path + ": entry out of range");
    lm.logp[ctx * events + e] = lp;
    seen[ctx * events + e] = 1;
  }
  RequireIo(std::find(seen.begin(), seen.end(), 0) == seen.end(),
            path + ": missing entries");
  lm.Validate();
  return lm;
}

}  // namespace phmm
