// include/phmm/gauss_stats.h

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

#ifndef PHMM_GAUSS_STATS_H_
#define PHMM_GAUSS_STATS_H_

#include <span>
#include <string>
#include <vector>

#include "phmm/common.h"

namespace phmm {

constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kDefaultVarFloor = 1e-4;

// Zeroth/first/second-order sufficient statistics of a set of frames under a
// diagonal-covariance Gaussian.  The count is real-valued so the same type
// can carry weighted points (character embeddings weighted by frame counts).
class GaussStats {
 public:
  GaussStats() = default;
  explicit GaussStats(int dim) : sum_(dim, 0.0), sumsq_(dim, 0.0) {}

  static GaussStats FromMoments(double count, std::vector<double> sum,
                                std::vector<double> sumsq);

  int Dim() const { return static_cast<int>(sum_.size()); }
  double Count() const { return count_; }
  const std::vector<double> &Sum() const { return sum_; }
  const std::vector<double> &SumSq() const { return sumsq_; }

  void AddFrame(std::span<const float> frame);
  void AddFrame(std::span<const double> frame);
  void AddPoint(std::span<const double> point, double weight);
  void Add(const GaussStats &other);

  double Mean(int d) const { return sum_[d] / count_; }
  // Biased (divide-by-n) variance, unfloored.
  double Variance(int d) const {
    double m = Mean(d);
    return sumsq_[d] / count_ - m * m;
  }

  // Plug-in Gaussian data log-likelihood of the cluster under its own ML
  // parameters, with per-dimension variances floored at var_floor:
  //   -(n/2) * [(1 + log 2pi) * D + sum_d log max(var_d, floor)]
  // Returns exactly 0 for an empty cluster.
  double ExpectedLogLik(double var_floor) const;

  // Throws if the numbers cannot have come from real frames (negative count,
  // nonzero sums at zero count, variance below -1e-9).
  void Validate(const std::string &context) const;

 private:
  double count_ = 0.0;
  std::vector<double> sum_;
  std::vector<double> sumsq_;
};

GaussStats Merged(const GaussStats &a, const GaussStats &b);

// L(left) + L(right) - L(parent).  Requires merge(left, right) == parent to
// 1e-9 relative and both children non-empty.
double SplitGain(const GaussStats &parent, const GaussStats &left,
                 const GaussStats &right, double var_floor);

// L(a) + L(b) - L(merge(a, b)).  Equals SplitGain(merge(a,b), a, b).
double MergeLoss(const GaussStats &a, const GaussStats &b, double var_floor);

// One statistics record per (character, HMM state position).
struct StatsRecord {
  int char_id = 0;
  int position = 0;
  GaussStats stats;
};

using StatsDump = std::vector<StatsRecord>;

// "PHMS" binary dump.
void SaveStatsDump(const StatsDump &dump, const std::string &path);
StatsDump LoadStatsDump(const std::string &path);

// Dense (char, position) view over a dump.  Missing records become empty
// stats so downstream consumers see a total function on vocab x positions.
class TyingStats {
 public:
  TyingStats(const StatsDump &dump, int vocab_size, int positions);
  // Infers vocab/positions from the dump (max id + 1).
  explicit TyingStats(const StatsDump &dump);

  int VocabSize() const { return vocab_; }
  int Positions() const { return positions_; }
  int Dim() const { return dim_; }
  const GaussStats &At(int char_id, int position) const {
    return table_[static_cast<size_t>(char_id) * positions_ + position];
  }

 private:
  void Build(const StatsDump &dump);
  int vocab_ = 0;
  int positions_ = 0;
  int dim_ = 0;
  std::vector<GaussStats> table_;
};

}  // namespace phmm

#endif  // PHMM_GAUSS_STATS_H_
