// include/phmm/threading.h

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

#ifndef PHMM_THREADING_H_
#define PHMM_THREADING_H_

#include <functional>

namespace phmm {

// Worker count from the PHMM_THREADS environment variable, falling back to
// the hardware concurrency.  Always >= 1.
int WorkerCount();

// Runs fn(0..n-1), splitting indices over WorkerCount() threads.  Callers
// keep determinism by writing results into per-index slots and reducing in
// index order afterwards.  The first exception thrown by any worker is
// rethrown after all workers have joined.
void ParallelFor(int n, const std::function<void(int)> &fn);

}  // namespace phmm

#endif  // PHMM_THREADING_H_
