// Copyright 2026 The qvlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Replicate fan-out. Each replicate derives its own generator from
// (seed, stream_id(experiment, r)) and writes only to slot r, so the serial
// and parallel paths produce identical results.

#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>

namespace qvlab {

enum class Execution { serial, parallel };

// Worker count: QVLAB_THREADS if set and positive, else the OpenMP default.
int worker_count();

template <class F>
void for_each_replicate(std::size_t count, F&& body, Execution ex = Execution::parallel) {
  if (ex == Execution::serial || count < 2) {
    for (std::size_t r = 0; r < count; ++r) body(r);
    return;
  }
  std::exception_ptr failure;
  std::mutex mu;
  const auto n = static_cast<std::int64_t>(count);
#pragma omp parallel for schedule(dynamic, 1) num_threads(worker_count())
  for (std::int64_t r = 0; r < n; ++r) {
    try {
      body(static_cast<std::size_t>(r));
    } catch (...) {
      std::lock_guard<std::mutex> lock(mu);
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace qvlab
