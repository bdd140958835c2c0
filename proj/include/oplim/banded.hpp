/*
   Copyright 2026 The oplim Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

// Row-banded square matrices: row i stores the contiguous column range
// [first_i, last_i]. Factorizations stay inside the band (plus the fill-in
// of partial pivoting for the general case).

#include "oplim/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace oplim {

class BandedMatrix {
public:
  struct Row {
    std::size_t first = 0; // 0-based column of values[0]
    std::vector<double> values;

    std::size_t last() const noexcept { return first + values.size() - 1; }
  };

  explicit BandedMatrix(std::size_t n) : rows_(n) {
    for (std::size_t i = 0; i < n; ++i) {
      rows_[i] = Row{i, {0.0}};
    }
  }

  static BandedMatrix identity(std::size_t n) {
    BandedMatrix m(n);
    for (auto &row : m.rows_) {
      row.values[0] = 1.0;
    }
    return m;
  }

  std::size_t size() const noexcept { return rows_.size(); }
  const Row &row(std::size_t i) const { return rows_.at(i); }

  /// Replaces row i (0-based) by values on columns [first, first + len).
  void set_row(std::size_t i, std::size_t first, std::vector<double> values) {
    if (values.empty() || first + values.size() > size()) {
      throw Error(ErrorKind::invalid_parameter,
                  "row " + std::to_string(i) + " band exceeds matrix size");
    }
    rows_.at(i) = Row{first, std::move(values)};
  }

  double operator()(std::size_t i, std::size_t j) const {
    const Row &r = rows_.at(i);
    if (j < r.first || j > r.last()) {
      return 0.0;
    }
    return r.values[j - r.first];
  }

  void multiply(std::span<const double> x, std::span<double> y) const {
    for (std::size_t i = 0; i < size(); ++i) {
      const Row &r = rows_[i];
      double s = 0.0;
      for (std::size_t c = 0; c < r.values.size(); ++c) {
        s += r.values[c] * x[r.first + c];
      }
      y[i] = s;
    }
  }

  void multiply_transposed(std::span<const double> x,
                           std::span<double> y) const {
    std::fill(y.begin(), y.end(), 0.0);
    for (std::size_t i = 0; i < size(); ++i) {
      const Row &r = rows_[i];
      for (std::size_t c = 0; c < r.values.size(); ++c) {
        y[r.first + c] += r.values[c] * x[i];
      }
    }
  }

  /// Largest absolute row sum (infinity norm).
  double max_row_sum() const noexcept {
    double best = 0.0;
    for (const auto &r : rows_) {
      double s = 0.0;
      for (double v : r.values) {
        s += std::abs(v);
      }
      best = std::max(best, s);
    }
    return best;
  }

  /// Largest absolute column sum (one norm).
  double max_col_sum() const {
    std::vector<double> cols(size(), 0.0);
    for (const auto &r : rows_) {
      for (std::size_t c = 0; c < r.values.size(); ++c) {
        cols[r.first + c] += std::abs(r.values[c]);
      }
    }
    return cols.empty() ? 0.0 : *std::max_element(cols.begin(), cols.end());
  }

  std::size_t lower_bandwidth() const noexcept {
    std::size_t kl = 0;
    for (std::size_t i = 0; i < size(); ++i) {
      if (rows_[i].first < i) {
        kl = std::max(kl, i - rows_[i].first);
      }
    }
    return kl;
  }

  std::size_t upper_bandwidth() const noexcept {
    std::size_t ku = 0;
    for (std::size_t i = 0; i < size(); ++i) {
      if (rows_[i].last() > i) {
        ku = std::max(ku, rows_[i].last() - i);
      }
    }
    return ku;
  }

private:
  std::vector<Row> rows_;
};

/// Solver for A x = b. Triangular matrices are solved by substitution on
/// the stored rows; anything else by banded LU with partial pivoting.
class BandedSolver {
public:
  explicit BandedSolver(const BandedMatrix &a)
      : n_(a.size()), kl_(a.lower_bandwidth()), ku_(a.upper_bandwidth()) {
    const double scale = std::max(1.0, a.max_row_sum());
    pivot_floor_ = 1e-14 * scale;
    if (kl_ == 0 || ku_ == 0) {
      triangular_ = true;
      upper_ = (kl_ == 0);
      tri_ = a;
      for (std::size_t i = 0; i < n_; ++i) {
        const double d = a(i, i);
        check_pivot(d, i);
        log_abs_det_ += std::log(std::abs(d));
        if (d < 0.0) {
          sign_ = -sign_;
        }
      }
      return;
    }
    factor_general(a);
  }

  std::size_t size() const noexcept { return n_; }
  double log_abs_det() const noexcept { return log_abs_det_; }
  int det_sign() const noexcept { return sign_; }
  bool triangular() const noexcept { return triangular_; }

  void solve(std::span<const double> b, std::span<double> x) const {
    if (triangular_) {
      solve_triangular(b, x);
    } else {
      solve_general(b, x);
    }
  }

  std::vector<double> solve(std::span<const double> b) const {
    std::vector<double> x(n_);
    solve(b, x);
    return x;
  }

private:
  void check_pivot(double d, std::size_t i) const {
    if (!(std::abs(d) > pivot_floor_)) {
      throw Error(ErrorKind::not_invertible,
                  "truncation is singular (pivot " + std::to_string(d) +
                      " at row " + std::to_string(i + 1) + ")");
    }
  }

  void solve_triangular(std::span<const double> b, std::span<double> x) const {
    if (upper_) {
      for (std::size_t ii = n_; ii-- > 0;) {
        const auto &r = tri_.row(ii);
        double s = b[ii];
        for (std::size_t c = 1; c < r.values.size(); ++c) {
          s -= r.values[c] * x[ii + c];
        }
        x[ii] = s / r.values[0];
      }
      return;
    }
    for (std::size_t i = 0; i < n_; ++i) {
      const auto &r = tri_.row(i);
      double s = b[i];
      const std::size_t diag = i - r.first;
      for (std::size_t c = 0; c < diag; ++c) {
        s -= r.values[c] * x[r.first + c];
      }
      x[i] = s / r.values[diag];
    }
  }

  // Row i of the work array holds columns [i - kl, i + ku + kl].
  std::size_t width() const noexcept { return 2 * kl_ + ku_ + 1; }
  double &at(std::size_t i, std::size_t j) {
    return lu_[i * width() + (j + kl_ - i)];
  }
  double at(std::size_t i, std::size_t j) const {
    return lu_[i * width() + (j + kl_ - i)];
  }

  void factor_general(const BandedMatrix &a) {
    lu_.assign(n_ * width(), 0.0);
    perm_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      const auto &r = a.row(i);
      for (std::size_t c = 0; c < r.values.size(); ++c) {
        at(i, r.first + c) = r.values[c];
      }
    }
    for (std::size_t j = 0; j < n_; ++j) {
      const std::size_t last_row = std::min(n_ - 1, j + kl_);
      std::size_t p = j;
      for (std::size_t i = j + 1; i <= last_row; ++i) {
        if (std::abs(at(i, j)) > std::abs(at(p, j))) {
          p = i;
        }
      }
      perm_[j] = p;
      const std::size_t last_col = std::min(n_ - 1, j + ku_ + kl_);
      if (p != j) {
        sign_ = -sign_;
        for (std::size_t c = j; c <= last_col; ++c) {
          std::swap(at(j, c), at(p, c));
        }
      }
      const double pivot = at(j, j);
      check_pivot(pivot, j);
      log_abs_det_ += std::log(std::abs(pivot));
      if (pivot < 0.0) {
        sign_ = -sign_;
      }
      for (std::size_t i = j + 1; i <= last_row; ++i) {
        const double m = at(i, j) / pivot;
        at(i, j) = m;
        if (m == 0.0) {
          continue;
        }
        for (std::size_t c = j + 1; c <= last_col; ++c) {
          at(i, c) -= m * at(j, c);
        }
      }
    }
  }

  void solve_general(std::span<const double> b, std::span<double> x) const {
    std::vector<double> y(b.begin(), b.end());
    for (std::size_t j = 0; j < n_; ++j) {
      if (perm_[j] != j) {
        std::swap(y[j], y[perm_[j]]);
      }
      const std::size_t last_row = std::min(n_ - 1, j + kl_);
      for (std::size_t i = j + 1; i <= last_row; ++i) {
        y[i] -= at(i, j) * y[j];
      }
    }
    for (std::size_t ii = n_; ii-- > 0;) {
      const std::size_t last_col = std::min(n_ - 1, ii + ku_ + kl_);
      double s = y[ii];
      for (std::size_t c = ii + 1; c <= last_col; ++c) {
        s -= at(ii, c) * x[c];
      }
      x[ii] = s / at(ii, ii);
    }
  }

  std::size_t n_;
  std::size_t kl_;
  std::size_t ku_;
  double pivot_floor_ = 0.0;
  double log_abs_det_ = 0.0;
  int sign_ = 1;
  bool triangular_ = false;
  bool upper_ = true;
  BandedMatrix tri_{0};
  std::vector<double> lu_;
  std::vector<std::size_t> perm_;
};

} // namespace oplim
