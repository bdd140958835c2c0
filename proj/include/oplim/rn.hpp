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

// Radon-Nikodym derivatives h = d(mu_n o A_n^{-1}) / d mu_n of truncated
// symbols.
//
//   h(x) = |det A_n|^{-1} rho(A_n^{-1} x) / rho(x)
//
// evaluated in log space. For gaussian factors and linear A_n this is
// |det A_n|^{-1} exp((|x|^2 - |A_n^{-1} x|^2) / 2), which also admits
// closed-form suprema and second moments (dense Eigen computations, used as
// oracles for the Monte Carlo side).

#include "oplim/error.hpp"
#include "oplim/measure.hpp"
#include "oplim/symbol.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace oplim {

enum class RnRule { gaussian_linear, density_ratio };

constexpr std::string_view to_string(RnRule r) noexcept {
  return r == RnRule::gaussian_linear ? "gaussian-linear" : "density-ratio";
}

class RnDerivative {
public:
  RnDerivative(Truncation t, const ProductMeasure &mu)
      : t_(std::move(t)), mu_(mu.truncated(t_.dimension())) {
    const bool all_gaussian =
        std::all_of(mu_.factors().begin(), mu_.factors().end(),
                    [](const DensityModel &d) { return d.is_gaussian(); });
    rule_ = (t_.is_linear() && all_gaussian) ? RnRule::gaussian_linear
                                              : RnRule::density_ratio;
  }

  std::size_t dimension() const noexcept { return t_.dimension(); }
  const Truncation &truncation() const noexcept { return t_; }
  const ProductMeasure &measure() const noexcept { return mu_; }
  RnRule rule() const noexcept { return rule_; }

  double log_eval(std::span<const double> x) const {
    thread_local std::vector<double> u;
    u.resize(x.size());
    t_.invert(x, u);
    double s = -t_.log_abs_det();
    if (rule_ == RnRule::gaussian_linear) {
      double sq = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        sq += x[i] * x[i] - u[i] * u[i];
      }
      return s + 0.5 * sq;
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
      const auto &rho = mu_.factor(i + 1);
      s += rho.log_pdf(u[i]) - rho.log_pdf(x[i]);
    }
    return s;
  }

  double eval(std::span<const double> x) const { return std::exp(log_eval(x)); }

private:
  Truncation t_;
  ProductMeasure mu_;
  RnRule rule_;
};

inline double eval_rn(const RnDerivative &h, std::span<const double> x) {
  return h.eval(x);
}

namespace detail {

inline void require_gaussian_linear(const RnDerivative &h, const char *what) {
  if (h.rule() != RnRule::gaussian_linear) {
    throw Error(ErrorKind::variant_mismatch,
                std::string(what) + " needs a linear symbol over gaussian factors");
  }
}

inline Eigen::MatrixXd dense_inverse(const Truncation &t) {
  const std::size_t n = t.dimension();
  Eigen::MatrixXd inv(n, n);
  std::vector<double> e(n, 0.0);
  std::vector<double> col(n);
  for (std::size_t j = 0; j < n; ++j) {
    e[j] = 1.0;
    t.invert(e, col);
    e[j] = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      inv(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = col[i];
    }
  }
  return inv;
}

} // namespace detail

inline Eigen::MatrixXd dense_matrix(const Truncation &t) {
  const BandedMatrix &a = t.matrix();
  const auto n = static_cast<Eigen::Index>(a.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto &row = a.row(static_cast<std::size_t>(i));
    for (std::size_t c = 0; c < row.values.size(); ++c) {
      m(i, static_cast<Eigen::Index>(row.first + c)) = row.values[c];
    }
  }
  return m;
}

struct EssSup {
  bool finite = false;
  double value = std::numeric_limits<double>::infinity();
  double max_eigenvalue = 0.0; // of I - A^{-T} A^{-1}
};

/// ess sup h for the gaussian-linear rule. Finite (= |det A|^{-1}, attained
/// at x = 0) iff I - A^{-T} A^{-1} has no positive eigenvalue, i.e. |A| <= 1.
inline EssSup ess_sup_gaussian_linear(const RnDerivative &h,
                                      double eig_tol = 1e-10) {
  detail::require_gaussian_linear(h, "ess_sup_gaussian_linear");
  const Eigen::MatrixXd inv = detail::dense_inverse(h.truncation());
  const auto n = inv.rows();
  const Eigen::MatrixXd q =
      Eigen::MatrixXd::Identity(n, n) - inv.transpose() * inv;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(q,
                                                     Eigen::EigenvaluesOnly);
  EssSup out;
  out.max_eigenvalue = eig.eigenvalues().maxCoeff();
  out.finite = out.max_eigenvalue <= eig_tol;
  if (out.finite) {
    out.value = std::exp(-h.truncation().log_abs_det());
  }
  return out;
}

/// Exact int h^2 dmu_n = |det A|^{-2} det(2 A^{-T} A^{-1} - I)^{-1/2};
/// finite iff |A| < sqrt(2).
inline double second_moment_gaussian(const RnDerivative &h) {
  detail::require_gaussian_linear(h, "second_moment_gaussian");
  const Eigen::MatrixXd inv = detail::dense_inverse(h.truncation());
  const auto n = inv.rows();
  const Eigen::MatrixXd p =
      2.0 * inv.transpose() * inv - Eigen::MatrixXd::Identity(n, n);
  Eigen::LLT<Eigen::MatrixXd> llt(p);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorKind::moment_divergent,
                "2 A^-T A^-1 - I is not positive definite at n=" +
                    std::to_string(n) + " (|A_n| >= sqrt 2)");
  }
  double log_det_p = 0.0;
  const Eigen::MatrixXd l = llt.matrixL();
  for (Eigen::Index i = 0; i < n; ++i) {
    log_det_p += 2.0 * std::log(l(i, i));
  }
  return std::exp(-2.0 * h.truncation().log_abs_det() - 0.5 * log_det_p);
}

/// Monte Carlo estimate of int h^2 dmu_n.
inline McEstimate second_moment_mc(const RnDerivative &h, const McConfig &cfg) {
  return mc_integral(
      [&h](std::span<const double> x) { return std::exp(2.0 * h.log_eval(x)); },
      h.measure(), cfg);
}

inline McEstimate mass_mc(const RnDerivative &h, const McConfig &cfg) {
  return mc_integral([&h](std::span<const double> x) { return h.eval(x); },
                     h.measure(), cfg);
}

using TestFunction = std::function<double(std::span<const double>)>;

struct TransportReport {
  McEstimate lhs;        // int g h dmu
  McEstimate rhs;        // int g o A dmu
  McEstimate difference; // paired: int (g h - g o A) dmu
  double tolerance = 0.0;
  bool pass = false;
};

/// Measure transport int g h dmu = int g o A dmu. Both sides use the same
/// samples; the tolerance is three standard errors of the paired difference.
inline TransportReport transport_check(const RnDerivative &h,
                                       const TestFunction &g,
                                       const McConfig &cfg) {
  const Truncation &t = h.truncation();
  const auto g_of_a = [&](std::span<const double> x) {
    thread_local std::vector<double> y;
    y.resize(x.size());
    t.apply(x, y);
    return g(y);
  };
  TransportReport r;
  r.lhs = mc_integral(
      [&](std::span<const double> x) { return g(x) * h.eval(x); }, h.measure(),
      cfg);
  r.rhs = mc_integral(g_of_a, h.measure(), cfg);
  r.difference = mc_integral(
      [&](std::span<const double> x) { return g(x) * h.eval(x) - g_of_a(x); },
      h.measure(), cfg);
  r.tolerance = 3.0 * r.difference.std_error;
  r.pass = std::abs(r.difference.mean) <= r.tolerance;
  return r;
}

struct SupBound {
  double upper = 0.0;         // prod alpha_i, certified
  double sampled_max = 0.0;   // lower bound from the battery
  std::vector<double> argmax; // point attaining sampled_max
};

/// Deterministic evaluation battery: origin, points t e_i for t in
/// {-1, -1/2, 1/2, 1}, then `n_random` seeded mu_n draws.
inline std::vector<std::vector<double>>
sup_battery(const ProductMeasure &mu, std::size_t n, std::uint64_t seed,
            std::size_t n_random = 10'000) {
  std::vector<std::vector<double>> pts;
  pts.emplace_back(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (double t : {-1.0, -0.5, 0.5, 1.0}) {
      std::vector<double> p(n, 0.0);
      p[i] = t;
      pts.push_back(std::move(p));
    }
  }
  const ProductMeasure mu_n = mu.truncated(n);
  for (std::size_t s = 0; s < n_random; ++s) {
    RandomStream rng(seed, s);
    std::vector<double> p(n);
    mu_n.sample(rng, p);
    pts.push_back(std::move(p));
  }
  return pts;
}

/// ess sup h <= prod_{i<=n} alpha_i for triangular shifts over even step
/// densities, with a sampled lower bound.
inline SupBound sup_bound_triangular(const RnDerivative &h,
                                     std::uint64_t seed = kDefaultSeed,
                                     std::size_t n_random = 10'000) {
  if (h.truncation().variant() != SymbolVariant::triangular_shift) {
    throw Error(ErrorKind::variant_mismatch,
                "sup_bound_triangular needs a triangular-shift symbol");
  }
  SupBound out;
  double log_upper = 0.0;
  for (const auto &d : h.measure().factors()) {
    if (!d.is_step()) {
      throw Error(ErrorKind::variant_mismatch,
                  "sup_bound_triangular needs even-step factors, got " +
                      std::string(to_string(d.kind())));
    }
    log_upper += std::log(d.step_params()->alpha);
  }
  out.upper = std::exp(log_upper);
  for (const auto &p : sup_battery(h.measure(), h.dimension(), seed, n_random)) {
    const double v = h.eval(p);
    if (v > out.sampled_max) {
      out.sampled_max = v;
      out.argmax = p;
    }
  }
  return out;
}

} // namespace oplim
