// include/phmm/common.h

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

#ifndef PHMM_COMMON_H_
#define PHMM_COMMON_H_

#include <cmath>
#include <iostream>
#include <stdexcept>
#include <string>

namespace phmm {

// Error taxonomy.  The CLI maps each class to a distinct exit code.

// Missing, truncated or malformed files.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string &msg) : std::runtime_error(msg) {}
};

// Inputs that violate a documented precondition (dimension mismatches,
// count mismatches, out-of-range ids).
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string &msg) : std::runtime_error(msg) {}
};

// Requests that cannot be satisfied by any amount of computation
// (e.g. more clusters than leaves, sequences shorter than their models).
class InfeasibleError : public std::runtime_error {
 public:
  explicit InfeasibleError(const std::string &msg) : std::runtime_error(msg) {}
};

// Bad configuration files or option combinations.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string &msg) : std::runtime_error(msg) {}
};

inline void Require(bool ok, const std::string &msg) {
  if (!ok) throw ValidationError(msg);
}

inline void RequireIo(bool ok, const std::string &msg) {
  if (!ok) throw IoError(msg);
}

inline void RequireFeasible(bool ok, const std::string &msg) {
  if (!ok) throw InfeasibleError(msg);
}

inline void Warn(const std::string &msg) {
  std::cerr << "phmm WARNING: " << msg << "\n";
}

// |a - b| <= tol * max(1, |a|, |b|)
inline bool RelClose(double a, double b, double tol) {
  double scale = std::max(1.0, std::max(std::fabs(a), std::fabs(b)));
  return std::fabs(a - b) <= tol * scale;
}

}  // namespace phmm

#endif  // PHMM_COMMON_H_
