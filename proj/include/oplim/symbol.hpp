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

// Transformations of R^infinity and their finite truncations A_n.
//
//   banded-linear     A x = (sum_j a_1j x_j, sum_j a_2j x_j, ...), row j
//                     supported on a finite column range when row-finite
//   diagonal          A x = (a_1 x_1, a_2 x_2, ...)
//   triangular-shift  A = B^{-1}, B x = (x_1, x_2 + p_2(x_1), x_3 + p_3(x_2),
//                     ...), with 0 <= p_i <= M_i and p_i = 0 on (-inf, 0]
//
// Indices in the generator callbacks are 1-based, matching the matrix
// notation; everything stored is 0-based.

#include "oplim/banded.hpp"
#include "oplim/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace oplim {

enum class SymbolVariant { banded_linear, diagonal, triangular_shift };

constexpr std::string_view to_string(SymbolVariant v) noexcept {
  switch (v) {
  case SymbolVariant::banded_linear: return "banded-linear";
  case SymbolVariant::diagonal: return "diagonal";
  case SymbolVariant::triangular_shift: return "triangular-shift";
  }
  return "unknown";
}

/// Nonzero column range of one matrix row; `last` empty means the row has
/// infinitely many nonzero entries.
struct RowSupport {
  std::size_t first = 1;
  std::optional<std::size_t> last;
};

enum class ShiftProfile { smooth_ramp, zero };

constexpr std::string_view to_string(ShiftProfile p) noexcept {
  return p == ShiftProfile::smooth_ramp ? "smooth-ramp" : "zero";
}

/// Peak of the smooth ramp relative to M_i; strictly below one.
constexpr double kRampPeak = 0.99;

/// p(x) = M * peak * x^2 / (1 + x^2) for x > 0 and 0 otherwise;
/// differentiable, vanishing on (-inf, 0] and valued in [0, M).
inline double shift_value(ShiftProfile profile, double bound, double x) {
  if (profile == ShiftProfile::zero || x <= 0.0) {
    return 0.0;
  }
  const double x2 = x * x;
  return bound * kRampPeak * (x2 / (1.0 + x2));
}

/// Smallest x > 0 with shift_value(x) = s, if s is in the range.
inline std::optional<double> shift_preimage(ShiftProfile profile, double bound,
                                            double s) {
  if (s == 0.0) {
    return 0.0;
  }
  if (profile == ShiftProfile::zero || !(s > 0.0)) {
    return std::nullopt;
  }
  const double t = s / (bound * kRampPeak);
  if (!(t < 1.0)) {
    return std::nullopt;
  }
  return std::sqrt(t / (1.0 - t));
}

class SymbolSpec {
public:
  using EntryFn = std::function<double(std::size_t, std::size_t)>;
  using SupportFn = std::function<RowSupport(std::size_t)>;
  using SequenceFn = std::function<double(std::size_t)>;

  static SymbolSpec banded(std::string id, EntryFn entry, SupportFn support) {
    SymbolSpec s;
    s.variant_ = SymbolVariant::banded_linear;
    s.id_ = std::move(id);
    s.entry_ = std::move(entry);
    s.support_ = std::move(support);
    return s;
  }

  static SymbolSpec diagonal(std::string id, SequenceFn a) {
    SymbolSpec s;
    s.variant_ = SymbolVariant::diagonal;
    s.id_ = std::move(id);
    s.sequence_ = std::move(a);
    return s;
  }

  /// `bounds(i)` is M_i.
  static SymbolSpec triangular_shift(std::string id, SequenceFn bounds,
                                     ShiftProfile profile) {
    SymbolSpec s;
    s.variant_ = SymbolVariant::triangular_shift;
    s.id_ = std::move(id);
    s.sequence_ = std::move(bounds);
    s.profile_ = profile;
    return s;
  }

  SymbolVariant variant() const noexcept { return variant_; }
  const std::string &id() const noexcept { return id_; }
  bool is_linear() const noexcept {
    return variant_ != SymbolVariant::triangular_shift;
  }
  ShiftProfile profile() const noexcept { return profile_; }

  /// a_ij for linear variants (1-based).
  double entry(std::size_t i, std::size_t j) const {
    switch (variant_) {
    case SymbolVariant::diagonal: return i == j ? sequence_(i) : 0.0;
    case SymbolVariant::banded_linear: return entry_(i, j);
    default:
      throw Error(ErrorKind::variant_mismatch,
                  "matrix entries requested from a triangular-shift symbol");
    }
  }

  RowSupport support(std::size_t i) const {
    switch (variant_) {
    case SymbolVariant::banded_linear: return support_(i);
    case SymbolVariant::diagonal: return RowSupport{i, i};
    case SymbolVariant::triangular_shift:
      return RowSupport{i > 1 ? i - 1 : 1, i};
    }
    return {};
  }

  /// Diagonal entries (diagonal variant) or shift bounds M_i.
  double sequence(std::size_t i) const { return sequence_(i); }

  double shift(std::size_t i, double x) const {
    return shift_value(profile_, sequence_(i), x);
  }

private:
  SymbolVariant variant_ = SymbolVariant::diagonal;
  std::string id_;
  EntryFn entry_;
  SupportFn support_;
  SequenceFn sequence_;
  ShiftProfile profile_ = ShiftProfile::smooth_ramp;
};

/// A_n together with its inverse and log |det A_n|.
class Truncation {
public:
  std::size_t dimension() const noexcept { return n_; }
  SymbolVariant variant() const noexcept { return variant_; }
  bool is_linear() const noexcept {
    return variant_ != SymbolVariant::triangular_shift;
  }
  double log_abs_det() const noexcept { return log_abs_det_; }
  int det_sign() const noexcept { return det_sign_; }

  const BandedMatrix &matrix() const {
    if (!matrix_) {
      throw Error(ErrorKind::variant_mismatch,
                  "triangular-shift truncation has no matrix");
    }
    return *matrix_;
  }

  const std::vector<double> &shift_bounds() const noexcept { return bounds_; }
  ShiftProfile profile() const noexcept { return profile_; }

  /// y = A_n x.
  void apply(std::span<const double> x, std::span<double> y) const {
    check_dim(x.size());
    if (matrix_) {
      matrix_->multiply(x, y);
      return;
    }
    // A_n = B_n^{-1}: forward substitution
    y[0] = x[0];
    for (std::size_t i = 1; i < n_; ++i) {
      y[i] = x[i] - shift_value(profile_, bounds_[i], y[i - 1]);
    }
  }

  /// x = A_n^{-1} y.
  void invert(std::span<const double> y, std::span<double> x) const {
    check_dim(y.size());
    if (solver_) {
      solver_->solve(y, x);
      return;
    }
    x[0] = y[0];
    for (std::size_t i = 1; i < n_; ++i) {
      x[i] = y[i] + shift_value(profile_, bounds_[i], y[i - 1]);
    }
  }

  std::vector<double> apply(std::span<const double> x) const {
    std::vector<double> y(n_);
    apply(x, y);
    return y;
  }

  std::vector<double> invert(std::span<const double> y) const {
    std::vector<double> x(n_);
    invert(y, x);
    return x;
  }

  friend Truncation truncate(const SymbolSpec &spec, std::size_t n);

private:
  void check_dim(std::size_t d) const {
    if (d != n_) {
      throw Error(ErrorKind::invalid_parameter,
                  "point dimension " + std::to_string(d) +
                      " differs from truncation dimension " +
                      std::to_string(n_));
    }
  }

  std::size_t n_ = 0;
  SymbolVariant variant_ = SymbolVariant::diagonal;
  std::optional<BandedMatrix> matrix_;
  std::optional<BandedSolver> solver_;
  std::vector<double> bounds_; // M_i, index 0 unused
  ShiftProfile profile_ = ShiftProfile::smooth_ramp;
  double log_abs_det_ = 0.0;
  int det_sign_ = 1;
};

/// Builds A_n from the n x n upper-left block of the symbol.
inline Truncation truncate(const SymbolSpec &spec, std::size_t n) {
  if (n == 0) {
    throw Error(ErrorKind::invalid_parameter, "truncation dimension must be >= 1");
  }
  Truncation t;
  t.n_ = n;
  t.variant_ = spec.variant();
  if (spec.variant() == SymbolVariant::triangular_shift) {
    t.profile_ = spec.profile();
    t.bounds_.assign(n, 0.0);
    for (std::size_t i = 2; i <= n; ++i) {
      const double m = spec.sequence(i);
      if (!(m >= 0.0)) {
        throw Error(ErrorKind::invalid_parameter,
                    "shift bound M_" + std::to_string(i) + " must be >= 0");
      }
      t.bounds_[i - 1] = m;
    }
    return t; // unit Jacobian: log|det| = 0
  }

  BandedMatrix m(n);
  for (std::size_t i = 1; i <= n; ++i) {
    const RowSupport s = spec.support(i);
    const std::size_t first = std::min(std::max<std::size_t>(s.first, 1), n);
    const std::size_t last = std::min(s.last.value_or(n), n);
    if (last < first) {
      m.set_row(i - 1, i - 1, {0.0});
      continue;
    }
    std::vector<double> values;
    values.reserve(last - first + 1);
    for (std::size_t j = first; j <= last; ++j) {
      values.push_back(spec.entry(i, j));
    }
    m.set_row(i - 1, first - 1, std::move(values));
  }
  t.solver_.emplace(m);
  t.log_abs_det_ = t.solver_->log_abs_det();
  t.det_sign_ = t.solver_->det_sign();
  t.matrix_ = std::move(m);
  return t;
}

struct NormResult {
  std::optional<double> value; // present when the iteration converged
  double lower = 0.0;          // certified: |A v| for a unit vector v
  double upper = 0.0;          // certified: sqrt(|A|_1 |A|_inf)
  std::size_t iterations = 0;
  bool converged = false;
};

/// Spectral norm. Dense SVD up to `dense_limit`, otherwise power iteration on
/// A^T A from the normalized all-ones vector.
inline NormResult operator_norm(const Truncation &t, double rel_tol = 1e-10,
                                std::size_t max_iter = 20000,
                                std::size_t dense_limit = 256) {
  const BandedMatrix &a = t.matrix();
  const std::size_t n = a.size();
  NormResult out;
  out.upper = std::sqrt(a.max_row_sum() * a.max_col_sum());

  if (t.variant() == SymbolVariant::diagonal) {
    double best = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      best = std::max(best, std::abs(a(i, i)));
    }
    out.value = best;
    out.lower = best;
    out.upper = best;
    out.converged = true;
    return out;
  }

  if (n <= dense_limit) {
    const auto d = static_cast<Eigen::Index>(n);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d, d);
    for (std::size_t i = 0; i < n; ++i) {
      const auto &r = a.row(i);
      for (std::size_t k = 0; k < r.values.size(); ++k) {
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(r.first + k)) =
            r.values[k];
      }
    }
    const double sigma = Eigen::BDCSVD<Eigen::MatrixXd>(m).singularValues()(0);
    out.value = sigma;
    out.lower = std::min(sigma, out.upper);
    out.upper = std::max(sigma, out.upper);
    out.converged = true;
    return out;
  }

  std::vector<double> v(n, 1.0 / std::sqrt(static_cast<double>(n)));
  std::vector<double> av(n);
  std::vector<double> w(n);
  double previous = -1.0;
  for (std::size_t it = 1; it <= max_iter; ++it) {
    a.multiply(v, av);
    double av_norm2 = 0.0;
    for (double e : av) {
      av_norm2 += e * e;
    }
    const double estimate = std::sqrt(av_norm2);
    out.lower = std::max(out.lower, estimate);
    out.iterations = it;
    if (previous > 0.0 && std::abs(estimate - previous) <= rel_tol * estimate) {
      out.converged = true;
      out.value = estimate;
      break;
    }
    previous = estimate;
    a.multiply_transposed(av, w);
    double w_norm = 0.0;
    for (double e : w) {
      w_norm += e * e;
    }
    w_norm = std::sqrt(w_norm);
    if (w_norm == 0.0) {
      out.converged = true;
      out.value = 0.0;
      break;
    }
    for (std::size_t i = 0; i < n; ++i) {
      v[i] = w[i] / w_norm;
    }
  }
  out.upper = std::max(out.upper, out.lower);
  return out;
}

/// Smallest M >= k such that the first k output coordinates of A depend only
/// on the first M inputs, hence agree with those of A_n for every n >= M.
inline std::size_t row_finite_horizon(const SymbolSpec &spec, std::size_t k) {
  if (k == 0) {
    throw Error(ErrorKind::invalid_parameter, "k must be >= 1");
  }
  if (spec.variant() != SymbolVariant::banded_linear) {
    return k;
  }
  std::size_t horizon = k;
  for (std::size_t j = 1; j <= k; ++j) {
    const RowSupport s = spec.support(j);
    if (!s.last) {
      throw Error(ErrorKind::horizon_undefined,
                  "row " + std::to_string(j) + " of '" + spec.id() +
                      "' has infinitely many nonzero entries");
    }
    horizon = std::max(horizon, *s.last);
  }
  return horizon;
}

} // namespace oplim
