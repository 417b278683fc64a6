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

#ifndef GAUNTLET__ASSIGNMENT_HPP_
#define GAUNTLET__ASSIGNMENT_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

namespace gauntlet
{

/**
 * @brief Dense rows x cols cost matrix. Entries are finite costs >= 0 or
 * `kForbidden`, which no solver may ever select.
 */
class CostMatrix
{
public:
  static constexpr double kForbidden = std::numeric_limits<double>::infinity();

  CostMatrix() = default;
  CostMatrix(std::size_t rows, std::size_t cols, double fill = kForbidden)
  : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double & operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }

  bool allowed(std::size_t r, std::size_t c) const { return (*this)(r, c) != kForbidden; }

private:
  std::size_t rows_{0};
  std::size_t cols_{0};
  std::vector<double> data_;
};

struct Assignment
{
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // sorted by (row, col)
  std::vector<std::size_t> unmatched_rows;
  std::vector<std::size_t> unmatched_cols;
  double total_cost{0.0};  // summed over pairs in row order

  friend bool operator==(const Assignment &, const Assignment &) = default;
};

namespace detail
{

inline void check_costs(const CostMatrix & costs)
{
  for (std::size_t r = 0; r < costs.rows(); ++r) {
    for (std::size_t c = 0; c < costs.cols(); ++c) {
      const double v = costs(r, c);
      if (v == CostMatrix::kForbidden) {continue;}
      if (!std::isfinite(v) || v < 0.0) {
        throw std::invalid_argument("cost entries must be finite and >= 0, or forbidden");
      }
    }
  }
}

/// Builds the result from a row -> col map (npos = unassigned), dropping
/// forbidden and out-of-range columns.
inline Assignment make_assignment(const CostMatrix & costs, const std::vector<std::size_t> & col_of)
{
  Assignment a;
  std::vector<bool> col_used(costs.cols(), false);
  for (std::size_t r = 0; r < costs.rows(); ++r) {
    const std::size_t c = col_of[r];
    if (c < costs.cols() && costs.allowed(r, c)) {
      a.pairs.emplace_back(r, c);
      a.total_cost += costs(r, c);
      col_used[c] = true;
    } else {
      a.unmatched_rows.push_back(r);
    }
  }
  for (std::size_t c = 0; c < costs.cols(); ++c) {
    if (!col_used[c]) {a.unmatched_cols.push_back(c);}
  }
  return a;
}

/**
 * Re-selects, among all perfect matchings of the tight (zero reduced cost)
 * subgraph, the one whose real pair list is lexicographically smallest.
 * Every such matching has the optimal padded cost, so only the tie-break changes.
 */
class TightRefiner
{
public:
  TightRefiner(
    const CostMatrix & costs, std::size_t n, const std::function<double(std::size_t, std::size_t)> & padded,
    const std::vector<double> & u, const std::vector<double> & v, double tol,
    std::vector<std::size_t> col_of)
  : costs_(costs), n_(n), col_of_(std::move(col_of)), row_of_(n), allowed_(n, std::vector<char>(n, 0))
  {
    for (std::size_t i = 0; i < n_; ++i) {
      row_of_[col_of_[i]] = i;
      for (std::size_t j = 0; j < n_; ++j) {
        allowed_[i][j] = (padded(i, j) - u[i] - v[j]) <= tol ? 1 : 0;
      }
    }
    // The current matching is tight by construction; guard against rounding.
    for (std::size_t i = 0; i < n_; ++i) {allowed_[i][col_of_[i]] = 1;}
  }

  std::vector<std::size_t> run()
  {
    for (std::size_t i = 0; i < costs_.rows(); ++i) {
      bool fixed = false;
      for (std::size_t c = 0; c < costs_.cols() && !fixed; ++c) {
        if (allowed_[i][c] && costs_.allowed(i, c)) {fixed = try_fix(i, {c});}
      }
      if (fixed) {continue;}
      std::vector<std::size_t> fallback;
      for (std::size_t c = 0; c < n_; ++c) {
        if (allowed_[i][c] && !is_real(i, c)) {fallback.push_back(c);}
      }
      try_fix(i, fallback);
    }
    return col_of_;
  }

private:
  bool is_real(std::size_t r, std::size_t c) const
  {
    return r < costs_.rows() && c < costs_.cols() && costs_.allowed(r, c);
  }

  // Restricts row i to `options` if a perfect matching survives; else leaves it free.
  bool try_fix(std::size_t i, const std::vector<std::size_t> & options)
  {
    for (std::size_t c : options) {
      if (col_of_[i] == c) {
        restrict_row(i, c, options);
        return true;
      }
    }
    for (std::size_t c : options) {
      const std::size_t old_col = col_of_[i];
      const std::size_t other = row_of_[c];
      // Tentatively give c to row i; `other` must reach old_col via an alternating path.
      col_of_[i] = c;
      row_of_[c] = i;
      blocked_row_ = i;
      visited_.assign(n_, 0);
      visited_[c] = 1;
      if (augment(other, old_col)) {
        restrict_row(i, c, options);
        return true;
      }
      col_of_[i] = old_col;
      row_of_[old_col] = i;
      row_of_[c] = other;
      col_of_[other] = c;
    }
    return false;
  }

  void restrict_row(std::size_t i, std::size_t chosen, const std::vector<std::size_t> & options)
  {
    std::vector<char> keep(n_, 0);
    for (std::size_t c : options) {keep[c] = 1;}
    keep[chosen] = 1;
    for (std::size_t c = 0; c < n_; ++c) {allowed_[i][c] = allowed_[i][c] && keep[c];}
  }

  // Kuhn-style alternating path from free `row` to the free column `target`.
  bool augment(std::size_t row, std::size_t target)
  {
    for (std::size_t c = 0; c < n_; ++c) {
      if (!allowed_[row][c] || visited_[c]) {continue;}
      visited_[c] = 1;
      if (c == target) {
        col_of_[row] = c;
        row_of_[c] = row;
        return true;
      }
      const std::size_t next = row_of_[c];
      if (next == blocked_row_) {continue;}
      if (augment(next, target)) {
        col_of_[row] = c;
        row_of_[c] = row;
        return true;
      }
    }
    return false;
  }

  const CostMatrix & costs_;
  std::size_t n_;
  std::vector<std::size_t> col_of_;
  std::vector<std::size_t> row_of_;
  std::vector<std::vector<char>> allowed_;
  std::vector<char> visited_;
  std::size_t blocked_row_{0};
};

inline bool better(const Assignment & a, const Assignment & b)
{
  if (a.pairs.size() != b.pairs.size()) {return a.pairs.size() > b.pairs.size();}
  if (a.total_cost != b.total_cost) {return a.total_cost < b.total_cost;}
  return a.pairs < b.pairs;
}

}  // namespace detail

/**
 * @brief Gated one-to-one assignment.
 *
 * Maximizes the number of pairs, then minimizes total cost; remaining ties go
 * to the lexicographically smallest (row, col) pair list. Forbidden entries and
 * rectangular padding are priced at a penalty larger than any achievable sum of
 * real costs, then stripped from the result.
 */
inline Assignment solve(const CostMatrix & costs)
{
  detail::check_costs(costs);
  const std::size_t rows = costs.rows();
  const std::size_t cols = costs.cols();
  const std::size_t n = std::max(rows, cols);
  if (rows == 0 || cols == 0) {
    return detail::make_assignment(costs, std::vector<std::size_t>(rows, cols));
  }

  double max_finite = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (costs.allowed(r, c)) {max_finite = std::max(max_finite, costs(r, c));}
    }
  }
  const double penalty = max_finite * static_cast<double>(std::min(rows, cols)) + 2.0;
  auto padded = [&](std::size_t r, std::size_t c) {
      return (r < rows && c < cols && costs.allowed(r, c)) ? costs(r, c) : penalty;
    };

  // Shortest augmenting path Hungarian with potentials, 1-based internally.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) {continue;}
        const double cur = padded(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<std::size_t> col_of(n, 0);
  for (std::size_t j = 1; j <= n; ++j) {col_of[p[j] - 1] = j - 1;}
  const Assignment hungarian = detail::make_assignment(costs, col_of);

  std::vector<double> u0(u.begin() + 1, u.end());
  std::vector<double> v0(v.begin() + 1, v.end());
  const double tol = 1e-9 * penalty;
  detail::TightRefiner refiner(costs, n, padded, u0, v0, tol, col_of);
  const Assignment refined = detail::make_assignment(costs, refiner.run());
  // The refinement can only trade between equal-cost optima; never accept a
  // rounding-induced regression.
  return detail::better(hungarian, refined) ? hungarian : refined;
}

/**
 * @brief Exhaustive reference solver with the same contract as `solve`.
 * Enumerates every permutation of the padded square matrix; limited to 9x9.
 */
inline Assignment solve_bruteforce(const CostMatrix & costs)
{
  detail::check_costs(costs);
  const std::size_t rows = costs.rows();
  const std::size_t cols = costs.cols();
  const std::size_t n = std::max(rows, cols);
  if (n > 9) {throw std::length_error("solve_bruteforce supports at most 9 rows/cols");}

  // Only real rows choose; padding rows would just permute the leftover columns.
  using Pairs = std::array<std::pair<std::size_t, std::size_t>, 9>;
  std::vector<std::size_t> col_of(rows, cols);
  std::vector<std::size_t> best_cols = col_of;
  Pairs best_pairs{};
  std::size_t best_count = 0;
  double best_cost = 0.0;
  bool have_best = false;
  std::array<char, 9> used{};

  auto pairs_of = [&](const std::vector<std::size_t> & assign, Pairs & out) {
      std::size_t k = 0;
      for (std::size_t r = 0; r < rows; ++r) {
        if (assign[r] < cols) {out[k++] = {r, assign[r]};}
      }
      return k;
    };
  auto recurse = [&](auto && self, std::size_t r, std::size_t count, double cost) -> void {
      if (r == rows) {
        bool take = !have_best || count > best_count || (count == best_count && cost < best_cost);
        Pairs mine{};
        if (!take && count == best_count && cost == best_cost) {
          const std::size_t k = pairs_of(col_of, mine);
          take = std::lexicographical_compare(mine.begin(), mine.begin() + k, best_pairs.begin(), best_pairs.begin() + k);
        }
        if (take) {
          have_best = true;
          best_count = count;
          best_cost = cost;
          best_cols = col_of;
          pairs_of(best_cols, best_pairs);
        }
        return;
      }
      for (std::size_t c = 0; c < n; ++c) {
        if (used[c]) {continue;}
        used[c] = 1;
        const bool real = c < cols && costs.allowed(r, c);
        col_of[r] = real ? c : cols;
        self(self, r + 1, count + (real ? 1 : 0), real ? cost + costs(r, c) : cost);
        used[c] = 0;
      }
      col_of[r] = cols;
    };
  recurse(recurse, 0, 0, 0.0);
  return detail::make_assignment(costs, best_cols);
}

}  // namespace gauntlet

#endif  // GAUNTLET__ASSIGNMENT_HPP_
