// Copyright 2026 The AZAlign Authors
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

#ifndef AZALIGN_SRC_PARALLEL_H_
#define AZALIGN_SRC_PARALLEL_H_

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace azalign::internal {

// Calls fn(i, w) for every i in [0, count), where w < min(workers, count)
// identifies the calling thread. Work is handed out one index at a time.
// The first exception thrown by any call is rethrown once all threads have
// stopped.
template <typename Fn>
void ParallelForWorkers(int64_t count, int workers, Fn&& fn) {
  const int n = static_cast<int>(std::min<int64_t>(workers, count));
  if (n <= 1) {
    for (int64_t i = 0; i < count; ++i) fn(i, 0);
    return;
  }
  std::atomic<int64_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> threads;
  threads.reserve(n);
  for (int w = 0; w < n; ++w) {
    threads.emplace_back([&, w] {
      try {
        for (int64_t i = next++; i < count; i = next++) fn(i, w);
      } catch (...) {
        errors[w] = std::current_exception();
        next = count;
      }
    });
  }
  for (std::thread& t : threads) t.join();
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

template <typename Fn>
void ParallelFor(int64_t count, int workers, Fn&& fn) {
  ParallelForWorkers(count, workers, [&fn](int64_t i, int) { fn(i); });
}

}  // namespace azalign::internal

#endif  // AZALIGN_SRC_PARALLEL_H_
