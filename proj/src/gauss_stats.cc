// src/gauss_stats.cc

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

#include "phmm/gauss_stats.h"

#include <algorithm>
#include <cmath>

#include "phmm/binio.h"

namespace phmm {

GaussStats GaussStats::FromMoments(double count, std::vector<double> sum,
                                   std::vector<double> sumsq) {
  Require(sum.size() == sumsq.size(), "FromMoments: sum/sumsq size mismatch");
  GaussStats out(static_cast<int>(sum.size()));
  out.count_ = count;
  out.sum_ = std::move(sum);
  out.sumsq_ = std::move(sumsq);
  return out;
}

void GaussStats::AddFrame(std::span<const float> frame) {
  Require(static_cast<int>(frame.size()) == Dim(),
          "GaussStats::AddFrame: frame dimension " +
              std::to_string(frame.size()) + " != " + std::to_string(Dim()));
  for (int d = 0; d < Dim(); ++d) {
    double x = frame[d];
    Require(std::isfinite(x), "GaussStats::AddFrame: non-finite value");
    sum_[d] += x;
    sumsq_[d] += x * x;
  }
  count_ += 1.0;
}

void GaussStats::AddFrame(std::span<const double> frame) {
  Require(static_cast<int>(frame.size()) == Dim(),
          "GaussStats::AddFrame: frame dimension " +
              std::to_string(frame.size()) + " != " + std::to_string(Dim()));
  for (int d = 0; d < Dim(); ++d) {
    double x = frame[d];
    Require(std::isfinite(x), "GaussStats::AddFrame: non-finite value");
    sum_[d] += x;
    sumsq_[d] += x * x;
  }
  count_ += 1.0;
}

void GaussStats::AddPoint(std::span<const double> point, double weight) {
  Require(static_cast<int>(point.size()) == Dim(),
          "GaussStats::AddPoint: dimension mismatch");
  Require(weight >= 0.0, "GaussStats::AddPoint: negative weight");
  for (int d = 0; d < Dim(); ++d) {
    sum_[d] += weight * point[d];
    sumsq_[d] += weight * point[d] * point[d];
  }
  count_ += weight;
}

void GaussStats::Add(const GaussStats &other) {
  Require(other.Dim() == Dim(), "GaussStats::Add: dimension mismatch (" +
                                    std::to_string(other.Dim()) + " vs " +
                                    std::to_string(Dim()) + ")");
  for (int d = 0; d < Dim(); ++d) {
    sum_[d] += other.sum_[d];
    sumsq_[d] += other.sumsq_[d];
  }
  count_ += other.count_;
}

double GaussStats::ExpectedLogLik(double var_floor) const {
  Require(var_floor > 0.0, "ExpectedLogLik: variance floor must be > 0");
  if (count_ <= 0.0) return 0.0;
  double log_det = 0.0;
  for (int d = 0; d < Dim(); ++d) {
    log_det += std::log(std::max(Variance(d), var_floor));
  }
  return -0.5 * count_ * ((1.0 + kLog2Pi) * Dim() + log_det);
}

void GaussStats::Validate(const std::string &context) const {
  Require(count_ >= 0.0, context + ": negative frame count");
  for (int d = 0; d < Dim(); ++d) {
    if (count_ == 0.0) {
      Require(sum_[d] == 0.0 && sumsq_[d] == 0.0,
              context + ": nonzero sums with zero count");
    } else {
      Require(Variance(d) >= -1e-9,
              context + ": variance below numerical tolerance in dim " +
                  std::to_string(d));
    }
  }
}

GaussStats Merged(const GaussStats &a, const GaussStats &b) {
  GaussStats out = a;
  out.Add(b);
  return out;
}

namespace {

bool StatsClose(const GaussStats &a, const GaussStats &b) {
  if (a.Dim() != b.Dim()) return false;
  if (!RelClose(a.Count(), b.Count(), 1e-9)) return false;
  for (int d = 0; d < a.Dim(); ++d) {
    if (!RelClose(a.Sum()[d], b.Sum()[d], 1e-9)) return false;
    if (!RelClose(a.SumSq()[d], b.SumSq()[d], 1e-9)) return false;
  }
  return true;
}

}  // namespace

double SplitGain(const GaussStats &parent, const GaussStats &left,
                 const GaussStats &right, double var_floor) {
  Require(left.Count() > 0.0 && right.Count() > 0.0,
          "SplitGain: both children must be non-empty");
  Require(StatsClose(Merged(left, right), parent),
          "SplitGain: children do not sum to parent");
  return left.ExpectedLogLik(var_floor) + right.ExpectedLogLik(var_floor) -
         parent.ExpectedLogLik(var_floor);
}

double MergeLoss(const GaussStats &a, const GaussStats &b, double var_floor) {
  Require(a.Count() > 0.0 && b.Count() > 0.0,
          "MergeLoss: both operands must be non-empty");
  return a.ExpectedLogLik(var_floor) + b.ExpectedLogLik(var_floor) -
         Merged(a, b).ExpectedLogLik(var_floor);
}

static const char kStatsMagic[5] = "PHMS";
static const std::uint32_t kStatsVersion = 1;

void SaveStatsDump(const StatsDump &dump, const std::string &path) {
  std::ofstream os = OpenBinaryOut(path);
  WriteMagic(os, kStatsMagic);
  WriteU32(os, kStatsVersion);
  WriteU32(os, static_cast<std::uint32_t>(dump.size()));
  for (const StatsRecord &rec : dump) {
    WriteU32(os, static_cast<std::uint32_t>(rec.char_id));
    WriteU32(os, static_cast<std::uint32_t>(rec.position));
    WriteU32(os, static_cast<std::uint32_t>(rec.stats.Dim()));
    WriteF64(os, rec.stats.Count());
    for (double v : rec.stats.Sum()) WriteF64(os, v);
    for (double v : rec.stats.SumSq()) WriteF64(os, v);
  }
  RequireIo(os.good(), "write failed: " + path);
}

StatsDump LoadStatsDump(const std::string &path) {
  std::ifstream is = OpenBinaryIn(path);
  ExpectMagic(is, kStatsMagic, path);
  std::uint32_t version = ReadU32(is, path + " version");
  RequireIo(version == kStatsVersion,
            "unsupported stats version in " + path + ": " +
                std::to_string(version));
  std::uint32_t count = ReadU32(is, path + " record count");
  StatsDump dump;
  dump.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    StatsRecord rec;
    rec.char_id = static_cast<int>(ReadU32(is, path + " char id"));
    rec.position = static_cast<int>(ReadU32(is, path + " position"));
    int dim = static_cast<int>(ReadU32(is, path + " dim"));
    RequireIo(dim > 0, "malformed header in " + path + ": record dim 0");
    double n = ReadF64(is, path + " count");
    std::vector<double> sum(dim), sumsq(dim);
    for (int d = 0; d < dim; ++d) sum[d] = ReadF64(is, path + " sum");
    for (int d = 0; d < dim; ++d) sumsq[d] = ReadF64(is, path + " sumsq");
    rec.stats = GaussStats::FromMoments(n, std::move(sum), std::move(sumsq));
    rec.stats.Validate(path + " record " + std::to_string(i));
    dump.push_back(std::move(rec));
  }
  return dump;
}

TyingStats::TyingStats(const StatsDump &dump, int vocab_size, int positions)
    : vocab_(vocab_size), positions_(positions) {
  Build(dump);
}

TyingStats::TyingStats(const StatsDump &dump) {
  Require(!dump.empty(), "empty statistics dump");
  for (const StatsRecord &rec : dump) {
    vocab_ = std::max(vocab_, rec.char_id + 1);
    positions_ = std::max(positions_, rec.position + 1);
  }
  Build(dump);
}

void TyingStats::Build(const StatsDump &dump) {
  Require(!dump.empty(), "empty statistics dump");
  Require(vocab_ > 0 && positions_ > 0, "TyingStats: empty vocab or positions");
  dim_ = dump.front().stats.Dim();
  table_.assign(static_cast<size_t>(vocab_) * positions_, GaussStats(dim_));
  std::vector<bool> seen(table_.size(), false);
  for (const StatsRecord &rec : dump) {
    Require(rec.stats.Dim() == dim_,
            "stats dump mixes dimensions: " + std::to_string(rec.stats.Dim()) +
                " vs " + std::to_string(dim_));
    Require(rec.char_id >= 0 && rec.char_id < vocab_ && rec.position >= 0 &&
                rec.position < positions_,
            "stats record out of range: char " + std::to_string(rec.char_id) +
                " position " + std::to_string(rec.position));
    size_t idx = static_cast<size_t>(rec.char_id) * positions_ + rec.position;
    Require(!seen[idx], "duplicate stats record for char " +
                            std::to_string(rec.char_id) + " position " +
                            std::to_string(rec.position));
    seen[idx] = true;
    table_[idx] = rec.stats;
  }
}

}  // namespace phmm
