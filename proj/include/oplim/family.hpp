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

// Constructive family of step densities with humps on every third factor
// (indices 2, 5, 8, ...), and validators for the conditions the family has
// to satisfy:
//
//   (i)    prod alpha_i < inf
//   (ii)   every rho_i is a probability density
//   (iii)  rho_i even step function, non-increasing on [0, inf)
//   (iv)   sup rho_i(x + eps) / rho_i(x) <= alpha_i over 0 <= eps <= M_i
//   (v)    a_j < b_j                                    (hump indices j)
//   (vi)   b_j - a_j < M_j
//   (vii)  prod (r^2 (b_j - a_j + 2 M_j) + alpha_j^2) < inf
//   (viii) sup phi_j / inf phi_j >= r
//   (ix)   phi_j(b_j) <= phi_j(x) on [a_j, b_j]
//   (x)    int_[a_j, b_j] phi_j = int_[a_j, b_j] rho_j
//
// plus r > prod alpha_i and eta_j <= 1 with mass one after renormalization.

#include "oplim/density.hpp"
#include "oplim/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace oplim {

/// Factor indices are 1-based throughout; index j carries a hump iff
/// j = 3i - 1 for some i >= 1.
constexpr bool is_hump_index(std::size_t j) noexcept { return j % 3 == 2; }
constexpr std::size_t hump_factor_index(std::size_t i) noexcept {
  return 3 * i - 1;
}

inline double default_alpha(std::size_t i) {
  return 1.0 + std::ldexp(1.0, -static_cast<int>(i));
}
inline double default_beta(std::size_t j) {
  return std::ldexp(1.0, -static_cast<int>(j));
}

struct FactorPlan {
  std::size_t index = 1;
  double alpha = 2.0;
  double beta = 0.0;        // only meaningful at hump indices
  double step_width = 0.25; // width of the Step-1 steps of rho
  double shift_bound = 0.25; // M_i: range bound of p_i
  bool hump = false;
  double a = 0.0;
  double b = 0.0;
  unsigned rescale_k = 1; // Step-2 divisor applied at this hump (1 = none)
  DensityModel rho = DensityModel::gaussian(); // Step-1 density
  DensityModel eta = DensityModel::gaussian(); // final factor density
};

struct DensityFamilyPlan {
  double r = 3.0;
  std::vector<FactorPlan> factors;
  // Upper bounds on the sums beyond the last planned factor of log alpha_i
  // and of log(beta_j + alpha_j^2) over hump indices.
  double alpha_log_tail = 0.0;
  double hump_log_tail = 0.0;

  const FactorPlan &factor(std::size_t index) const {
    if (index < 1 || index > factors.size()) {
      throw Error(ErrorKind::invalid_parameter,
                  "factor index " + std::to_string(index) +
                      " outside plan of size " +
                      std::to_string(factors.size()));
    }
    return factors[index - 1];
  }

  std::size_t hump_count() const noexcept { return (factors.size() + 1) / 3; }

  /// log of an upper bound for prod_{i>=1} alpha_i.
  double log_alpha_product_bound() const noexcept {
    double s = alpha_log_tail;
    for (const auto &f : factors) {
      s += std::log(f.alpha);
    }
    return s;
  }

  /// log of an upper bound for prod over all hump indices of
  /// (beta_j + alpha_j^2).
  double log_hump_product_bound() const noexcept {
    double s = hump_log_tail;
    for (const auto &f : factors) {
      if (f.hump) {
        s += std::log(f.beta + f.alpha * f.alpha);
      }
    }
    return s;
  }

  /// r^2 (b_j - a_j + 2 M_j) + alpha_j^2 at a hump index.
  double hump_term(std::size_t index) const {
    const auto &f = factor(index);
    return r * r * (f.b - f.a + 2.0 * f.shift_bound) + f.alpha * f.alpha;
  }

  std::vector<DensityModel> densities(std::size_t n) const {
    std::vector<DensityModel> out;
    out.reserve(n);
    for (std::size_t i = 1; i <= n; ++i) {
      out.push_back(factor(i).eta);
    }
    return out;
  }
};

/// Step 1 for every index; no humps yet.
inline DensityFamilyPlan
make_step_plan(std::size_t n_factors, double r,
               const std::function<double(std::size_t)> &alpha,
               const std::function<double(std::size_t)> &beta) {
  if (n_factors == 0) {
    throw Error(ErrorKind::invalid_parameter, "plan needs at least one factor");
  }
  DensityFamilyPlan plan;
  plan.r = r;
  for (std::size_t i = 1; i <= n_factors; ++i) {
    FactorPlan f;
    f.index = i;
    f.alpha = alpha(i);
    f.beta = is_hump_index(i) ? beta(i) : 0.0;
    f.rho = build_step_density(f.alpha);
    f.eta = f.rho;
    f.step_width = f.rho.step_params()->width;
    f.shift_bound = f.step_width;
    f.hump = false;
    plan.factors.push_back(std::move(f));
  }
  return plan;
}

/// Step 2 at hump counter i: if 3 r^2 M_j > beta_j (j = 3i - 1), divide
/// M_n by the smallest integer k with 3 r^2 M_j / k < beta_j for all n >= j.
/// The densities keep their Step-1 steps; only the shift bounds shrink.
inline DensityFamilyPlan rescale_step2(DensityFamilyPlan plan, std::size_t i) {
  const std::size_t j = hump_factor_index(i);
  if (j > plan.factors.size()) {
    return plan;
  }
  auto &f = plan.factors[j - 1];
  const double lhs = 3.0 * plan.r * plan.r * f.shift_bound;
  if (!(lhs > f.beta)) {
    return plan;
  }
  auto k = static_cast<unsigned>(std::floor(lhs / f.beta)) + 1u;
  while (lhs / k >= f.beta) {
    ++k;
  }
  f.rescale_k = k;
  for (std::size_t n = j; n <= plan.factors.size(); ++n) {
    plan.factors[n - 1].shift_bound /= static_cast<double>(k);
  }
  return plan;
}

/// Steps 1-4: alpha_i = 1 + 2^-i, beta_j = 2^-j, b_j = M_j / 2.
inline DensityFamilyPlan build_hump_plan(std::size_t n_factors,
                                             double r = 3.0) {
  auto plan = make_step_plan(n_factors, r, default_alpha, default_beta);
  const std::size_t last = n_factors;
  // sum_{i > N} log(1 + 2^-i) <= 2^-N
  plan.alpha_log_tail = std::ldexp(1.0, -static_cast<int>(last));
  // for j > N: log(beta_j + alpha_j^2) <= 3 * 2^-j + 4^-j, summed over all
  // j > N (a superset of the hump indices)
  plan.hump_log_tail = 3.0 * std::ldexp(1.0, -static_cast<int>(last)) +
                       std::ldexp(1.0, -2 * static_cast<int>(last)) / 3.0;
  if (!(r > std::exp(plan.log_alpha_product_bound()))) {
    throw Error(ErrorKind::invalid_parameter,
                "r must exceed prod alpha_i <= " +
                    std::to_string(std::exp(plan.log_alpha_product_bound())));
  }
  for (std::size_t i = 1; hump_factor_index(i) <= n_factors; ++i) {
    plan = rescale_step2(std::move(plan), i);
    auto &f = plan.factors[hump_factor_index(i) - 1];
    f.hump = true;
    f.a = 0.0;
    f.b = 0.5 * f.shift_bound;
    f.eta = normalize_step4(build_hump(f.rho, f.b, r));
  }
  return plan;
}

// ---------------------------------------------------------------------------
// Validators

struct ConditionCheck {
  std::string id;
  std::size_t index = 0; // factor index, 0 for plan-wide checks
  bool pass = false;
  double value = 0.0;
  double bound = 0.0;
  std::string detail;
};

/// Points spanning the effective support of `d` plus both sides of every
/// breakpoint; `step` is the regular grid spacing.
inline std::vector<double> validation_grid(const DensityModel &d, double step,
                                           double tail = 1e-6,
                                           std::size_t max_points = 20000) {
  const double lo = d.quantile(tail);
  const double hi = d.quantile(1.0 - tail);
  std::vector<double> xs;
  step = std::max(step, (hi - lo) / static_cast<double>(max_points));
  const auto count = static_cast<std::size_t>(std::ceil((hi - lo) / step));
  xs.reserve(count + 1);
  for (std::size_t k = 0; k <= count; ++k) {
    xs.push_back(lo + static_cast<double>(k) * step);
  }
  // breakpoints themselves are not representable; probe just either side
  const double delta = 1e-9 * (d.step_params() ? d.step_params()->width : 1.0);
  for (double x : d.breakpoints(lo, hi, max_points / 4)) {
    xs.push_back(x - delta);
    xs.push_back(x + delta);
  }
  std::sort(xs.begin(), xs.end());
  return xs;
}

/// sup over grid points x and 0 <= eps <= window of rho(x + eps) / rho(x).
/// Breakpoint-aligned shifts are included since the ratio only changes there.
inline double max_step_ratio(const DensityModel &rho, double window,
                             double x_step, std::size_t eps_count = 50) {
  const auto xs = validation_grid(rho, x_step);
  std::vector<double> eps;
  for (std::size_t k = 0; k <= eps_count; ++k) {
    eps.push_back(window * static_cast<double>(k) /
                  static_cast<double>(eps_count));
  }
  double worst = 0.0;
  for (double x : xs) {
    const double base = rho.log_pdf(x);
    for (double e : eps) {
      worst = std::max(worst, std::exp(rho.log_pdf(x + e) - base));
    }
  }
  return worst;
}

inline std::vector<ConditionCheck>
validate_plan(const DensityFamilyPlan &plan) {
  std::vector<ConditionCheck> out;
  constexpr double kMassTol = 1e-12;

  {
    const double log_bound = plan.log_alpha_product_bound();
    ConditionCheck c{"(i)", 0, std::isfinite(log_bound), std::exp(log_bound),
                     0.0, "prod alpha_i bounded by finite sum plus tail"};
    c.bound = c.value;
    out.push_back(c);
    out.push_back(ConditionCheck{"r>prod(alpha)", 0, plan.r > c.value, plan.r,
                                 c.value, "hump ratio exceeds prod alpha_i"});
  }

  for (const auto &f : plan.factors) {
    const double m = f.rho.mass();
    out.push_back(ConditionCheck{"(ii)", f.index,
                                 std::abs(m - 1.0) <= kMassTol, m, 1.0,
                                 "closed-form mass of rho"});

    // (iii): even, step, non-increasing on the half line
    bool shape_ok = f.rho.is_step();
    const double w = f.step_width;
    for (int n = 0; n < 64 && shape_ok; ++n) {
      const double x = (n + 0.5) * w;
      shape_ok = f.rho.pdf(x) == f.rho.pdf(-x) &&
                 f.rho.pdf(x + w) < f.rho.pdf(x) &&
                 f.rho.pdf((n + 0.01) * w) == f.rho.pdf(x) &&
                 f.rho.pdf((n + 0.99) * w) == f.rho.pdf(x);
    }
    out.push_back(ConditionCheck{"(iii)", f.index, shape_ok, 0.0, 0.0,
                                 "even step function, decreasing on R+"});

    const double ratio =
        max_step_ratio(f.rho, f.shift_bound, std::min(1e-3, w / 4.0));
    out.push_back(ConditionCheck{"(iv)", f.index, ratio <= f.alpha * (1.0 + 1e-12), ratio,
                                 f.alpha, "grid sup of rho(x+eps)/rho(x)"});

    if (!f.hump) {
      continue;
    }
    out.push_back(ConditionCheck{"(v)", f.index, f.a < f.b, f.a, f.b, "a < b"});
    out.push_back(ConditionCheck{"(vi)", f.index,
                                 f.b - f.a < f.shift_bound, f.b - f.a,
                                 f.shift_bound, "b - a < M"});
    const auto &h = f.eta.hump_params();
    if (!h) {
      out.push_back(ConditionCheck{"(viii)", f.index, false, 0.0, plan.r,
                                   "hump index without a hump profile"});
      continue;
    }
    const double spread = h->max_value() / h->min_value();
    out.push_back(ConditionCheck{"(viii)", f.index, spread >= plan.r, spread,
                                 plan.r, "sup phi / inf phi on [a, b]"});

    double grid_min = h->phi(h->b);
    bool end_is_min = true;
    constexpr int kGrid = 4000;
    for (int k = 0; k <= kGrid; ++k) {
      const double x = h->a + (h->b - h->a) * k / kGrid;
      const double v = h->phi(x);
      grid_min = std::min(grid_min, v);
      end_is_min = end_is_min && h->phi(h->b) <= v;
    }
    out.push_back(ConditionCheck{"(ix)", f.index, end_is_min, h->phi(h->b),
                                 grid_min, "phi(b) is the grid minimum"});

    const double rho_mass = f.rho.interval_mass(h->a, h->b);
    const double phi_mass = h->integral();
    out.push_back(ConditionCheck{
        "(x)", f.index, std::abs(phi_mass - rho_mass) <= 1e-14, phi_mass,
        rho_mass, "int phi = int rho on [a, b]"});

    const double eta_mass = f.eta.mass();
    const double eta_sup = f.eta.sup();
    out.push_back(ConditionCheck{"eta<=1", f.index, eta_sup <= 1.0, eta_sup,
                                 1.0, "renormalized hump density sup"});
    out.push_back(ConditionCheck{"eta-mass", f.index,
                                 std::abs(eta_mass - 1.0) <= kMassTol,
                                 eta_mass, 1.0, "renormalized hump mass"});
  }

  // (vii): partial products over hump indices are monotone and below the
  // bound implied by beta.
  {
    const double log_cap = plan.log_hump_product_bound();
    double log_partial = 0.0;
    bool monotone = true;
    bool bounded = true;
    for (const auto &f : plan.factors) {
      if (!f.hump) {
        continue;
      }
      const double term = plan.hump_term(f.index);
      monotone = monotone && term >= 1.0;
      log_partial += std::log(term);
      bounded = bounded && log_partial <= log_cap;
    }
    out.push_back(ConditionCheck{"(vii)", 0, monotone && bounded,
                                 std::exp(log_partial), std::exp(log_cap),
                                 "partial products of hump terms"});
  }
  return out;
}

inline bool all_pass(const std::vector<ConditionCheck> &checks) {
  return std::all_of(checks.begin(), checks.end(),
                     [](const ConditionCheck &c) { return c.pass; });
}

} // namespace oplim
