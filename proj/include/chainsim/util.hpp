// Copyright 2026 The Chainsim Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace chainsim {

// Raised when a configuration file or parameter set is rejected.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Deterministic uniform stream. The mapping from engine output to doubles is
// pinned here so sample streams are bitwise stable across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // Uniform on [0,1), 53-bit resolution.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  std::uint64_t next_u64() { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

// Floats in CSV output carry 9 significant digits.
inline std::string format_g9(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", x);
  return std::string(buf);
}

// Worker cap for sweep fan-out: CHAINSIM_THREADS, else hardware concurrency.
inline unsigned worker_count() {
  if (const char* env = std::getenv("CHAINSIM_THREADS")) {
    long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

// Runs fn(j) for j in [0, n_jobs) on up to worker_count() threads. Jobs must
// be independent; results are typically written into preallocated slots. The
// first exception thrown by any job is rethrown after all workers join.
template <typename Fn>
void parallel_for(std::size_t n_jobs, Fn&& fn, unsigned max_threads = 0) {
  unsigned workers = max_threads ? max_threads : worker_count();
  if (workers <= 1 || n_jobs <= 1) {
    for (std::size_t j = 0; j < n_jobs; ++j) fn(j);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mu;
  auto body = [&] {
    for (;;) {
      std::size_t j = next.fetch_add(1);
      if (j >= n_jobs || failed.load()) return;
      try {
        fn(j);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        failed.store(true);
        return;
      }
    }
  };
  unsigned spawn = static_cast<unsigned>(std::min<std::size_t>(workers, n_jobs));
  pool.reserve(spawn);
  for (unsigned w = 0; w < spawn; ++w) pool.emplace_back(body);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace chainsim
