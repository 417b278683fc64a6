// Copyright 2026 The Forecast Gauntlet Authors
//
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

#ifndef GAUNTLET__PARALLEL_HPP_
#define GAUNTLET__PARALLEL_HPP_

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>
#include <type_traits>
#include <vector>

namespace gauntlet
{

/**
 * @brief Evaluates fn(i) for i in [0, n) on up to `jobs` threads. Result i is
 * stored at index i, so the output never depends on scheduling. The first
 * exception (lowest index) is rethrown after all workers stop.
 */
template<typename Fn>
auto parallel_map(std::size_t n, unsigned jobs, Fn && fn)
{
  using R = std::invoke_result_t<Fn &, std::size_t>;
  std::vector<std::optional<R>> slots(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};

  auto work = [&]() {
      for (std::size_t i = next++; i < n && !failed; i = next++) {
        try {
          slots[i].emplace(fn(i));
        } catch (...) {
          errors[i] = std::current_exception();
          failed = true;
        }
      }
    };

  const std::size_t workers = std::min<std::size_t>(std::max(1u, jobs), n);
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {pool.emplace_back(work);}
    for (auto & t : pool) {t.join();}
  }
  for (const auto & e : errors) {
    if (e) {std::rethrow_exception(e);}
  }
  std::vector<R> out;
  out.reserve(n);
  for (auto & s : slots) {out.push_back(std::move(*s));}
  return out;
}

}  // namespace gauntlet

#endif  // GAUNTLET__PARALLEL_HPP_
