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

// Certificate procedures for boundedness, dense definiteness and
// unboundedness of C_A, the cylinder approximation conditions, and two small
// one-dimensional / counting-measure demonstrations.

#include "oplim/error.hpp"
#include "oplim/family.hpp"
#include "oplim/measure.hpp"
#include "oplim/rn.hpp"
#include "oplim/symbol.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace oplim {

enum class Verdict { bounded, densely_defined, unbounded_witness, inconclusive };

constexpr std::string_view to_string(Verdict v) noexcept {
  switch (v) {
  case Verdict::bounded: return "bounded";
  case Verdict::densely_defined: return "densely-defined-certified";
  case Verdict::unbounded_witness: return "unbounded-witness";
  case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct EvidenceRow {
  std::size_t n = 0;
  std::optional<double> det;
  std::optional<double> norm;
  std::optional<double> norm_lower;
  std::optional<double> norm_upper;
  std::optional<double> ess_sup; // +inf when h is unbounded
  std::optional<double> m2_exact;
  std::optional<McEstimate> m2_mc;
  std::optional<double> bound;
  std::string note;
};

struct Certificate {
  Verdict verdict = Verdict::inconclusive;
  std::string reason;    // first failed condition when inconclusive
  std::string scope;     // what the verdict rests on
  std::optional<double> norm_sq;
  std::optional<double> analytic_norm_sq;
  std::optional<std::size_t> witness_index;
  std::optional<double> lower_bound;
  std::vector<double> witness_point;
  std::optional<double> fitted_slope;
  std::optional<double> growth_constant;
  std::size_t n_max = 0;
  std::vector<EvidenceRow> evidence;
};

// ---------------------------------------------------------------------------
// Boundedness over the gaussian product

struct SufgauOptions {
  double epsilon = 1e-6;  // required lower bound for |det A_n|
  double norm_tol = 1e-10;
  /// inf_n |det A_n| in closed form, if known.
  std::optional<double> inf_abs_det;
};

/// Checks inf |det A_n| >= eps, row-finiteness and sup |A_n| <= 1 for
/// n <= n_max. Bounded carries norm_sq = 1 / min |det A_n|.
inline Certificate check_sufgau(const SymbolSpec &spec, std::size_t n_max,
                                const SufgauOptions &opt = {}) {
  if (!spec.is_linear()) {
    throw Error(ErrorKind::variant_mismatch,
                "boundedness check needs a linear symbol");
  }
  Certificate cert;
  cert.n_max = n_max;
  const ProductMeasure mu = ProductMeasure::gaussian(n_max);
  double min_abs_det = kInf;
  for (std::size_t n = 1; n <= n_max; ++n) {
    EvidenceRow row;
    row.n = n;
    if (!spec.support(n).last) {
      row.note = "row " + std::to_string(n) + " not finite";
      cert.evidence.push_back(row);
      cert.reason = "condition (ii): row " + std::to_string(n) +
                    " has infinitely many nonzero entries";
      return cert;
    }
    const Truncation t = truncate(spec, n);
    const double abs_det = std::exp(t.log_abs_det());
    row.det = t.det_sign() * abs_det;
    min_abs_det = std::min(min_abs_det, abs_det);
    const NormResult nr = operator_norm(t);
    row.norm = nr.value;
    row.norm_lower = nr.lower;
    row.norm_upper = nr.upper;
    const RnDerivative h(t, mu);
    row.ess_sup = ess_sup_gaussian_linear(h).value;
    cert.evidence.push_back(row);

    if (abs_det < opt.epsilon) {
      cert.reason = "condition (i): |det A_" + std::to_string(n) +
                    "| = " + std::to_string(abs_det) + " < eps";
      return cert;
    }
    const double limit = 1.0 + opt.norm_tol;
    const bool within = nr.upper <= limit || (nr.value && *nr.value <= limit);
    if (!within) {
      cert.reason = "condition (iii): |A_" + std::to_string(n) + "| = " +
                    std::to_string(nr.value.value_or(nr.lower)) + " > 1";
      return cert;
    }
  }
  cert.verdict = Verdict::bounded;
  cert.norm_sq = 1.0 / min_abs_det;
  cert.scope = "hypotheses verified for n <= " + std::to_string(n_max);
  if (opt.inf_abs_det) {
    cert.analytic_norm_sq = 1.0 / *opt.inf_abs_det;
    cert.scope += "; closed-form infinite product supplied";
  }
  return cert;
}

// ---------------------------------------------------------------------------
// Dense definiteness over the gaussian product

/// Last three values mutually within three combined standard errors (plus
/// a relative rounding slack for exact values).
inline bool trend_test(std::span<const McEstimate> values) {
  if (values.size() < 3) {
    return false;
  }
  const auto tail = values.last(3);
  double scale = 0.0;
  for (const auto &v : tail) {
    scale = std::max(scale, std::abs(v.mean));
  }
  for (std::size_t a = 0; a < 3; ++a) {
    for (std::size_t b = a + 1; b < 3; ++b) {
      const double tol =
          3.0 * combined_stderr(tail[a], tail[b]) + 1e-12 * scale;
      if (std::abs(tail[a].mean - tail[b].mean) > tol) {
        return false;
      }
    }
  }
  return true;
}

struct DenseOptions {
  double cap = 1e3;
  std::optional<Box> sigma; // sigma_k; unset means R^k
  McConfig mc;
};

inline Certificate check_dense_definiteness_gaussian(const SymbolSpec &spec,
                                                     std::size_t n_max,
                                                     const DenseOptions &opt = {}) {
  if (!spec.is_linear()) {
    throw Error(ErrorKind::variant_mismatch,
                "dense definiteness check needs a linear symbol");
  }
  Certificate cert;
  cert.n_max = n_max;
  cert.scope = "numerical evidence for the moment hypotheses on n <= " +
               std::to_string(n_max) + ", not a proof";
  const std::size_t k = opt.sigma ? opt.sigma->size() : 0;
  const ProductMeasure mu = ProductMeasure::gaussian(n_max);
  std::vector<McEstimate> values;
  for (std::size_t n = std::max<std::size_t>(1, k); n <= n_max; ++n) {
    const Truncation t = truncate(spec, n);
    const RnDerivative h(t, mu);
    EvidenceRow row;
    row.n = n;
    row.det = t.det_sign() * std::exp(t.log_abs_det());
    try {
      row.m2_exact = second_moment_gaussian(h);
    } catch (const Error &e) {
      if (e.kind() != ErrorKind::moment_divergent) {
        throw;
      }
      row.note = "moment divergent";
      cert.evidence.push_back(row);
      cert.reason = "moment divergent at n=" + std::to_string(n);
      return cert;
    }
    McEstimate v = exact_estimate(*row.m2_exact);
    if (opt.sigma) {
      const Box box = *opt.sigma;
      v = mc_integral(
          [&](std::span<const double> x) {
            return box_contains(box, x) ? std::exp(2.0 * h.log_eval(x)) : 0.0;
          },
          h.measure(), opt.mc.with_seed(derive_seed(opt.mc.seed, n)));
      row.m2_mc = v;
    }
    cert.evidence.push_back(row);
    values.push_back(v);
    if (v.mean > opt.cap) {
      cert.reason = "second moment above cap at n=" + std::to_string(n);
      return cert;
    }
  }
  if (!trend_test(values)) {
    cert.reason = "trend test: last three second moments not stable";
    return cert;
  }
  cert.verdict = Verdict::densely_defined;
  return cert;
}

// ---------------------------------------------------------------------------
// Cylinder approximation conditions

/// Boxes sigma in R^k with corners at factor quantiles; each box uses the
/// same quantile pair in every coordinate.
inline std::vector<Box> sigma_battery(const ProductMeasure &mu, std::size_t k) {
  static constexpr std::pair<double, double> pairs[] = {
      {0.1, 0.9}, {0.2, 0.8}, {0.3, 0.7}, {0.4, 0.6}, {0.1, 0.5},
      {0.5, 0.9}, {0.2, 0.6}, {0.4, 0.8}, {0.1, 0.3}, {0.7, 0.9}};
  const ProductMeasure mu_k = mu.truncated(k);
  std::vector<Box> out;
  for (const auto &[lo, hi] : pairs) {
    Box b(k);
    for (std::size_t i = 0; i < k; ++i) {
      const auto &d = mu_k.factor(i + 1);
      b[i] = Interval{d.quantile(lo), d.quantile(hi)};
    }
    out.push_back(std::move(b));
  }
  return out;
}

namespace detail {

inline bool is_full(const CylinderSet &s) {
  if (!s.is_box_union() || s.boxes().size() != 1) {
    return false;
  }
  return std::all_of(s.boxes()[0].begin(), s.boxes()[0].end(),
                     [](const Interval &iv) {
                       return std::isinf(iv.lo) && iv.lo < 0 &&
                              std::isinf(iv.hi) && iv.hi > 0;
                     });
}

/// x in R^N (N >= t.dimension()) -> first k coordinates of A_n(x_1..x_n) in
/// sigma.
inline bool image_in(const Truncation &t, const CylinderSet &sigma,
                     std::span<const double> x) {
  thread_local std::vector<double> y;
  y.resize(t.dimension());
  t.apply(x.first(t.dimension()), y);
  return sigma.contains(y);
}

inline std::optional<std::size_t> horizon_or_none(const SymbolSpec &spec,
                                                  std::size_t k) {
  try {
    return row_finite_horizon(spec, k);
  } catch (const Error &e) {
    if (e.kind() != ErrorKind::horizon_undefined) {
      throw;
    }
    return std::nullopt;
  }
}

} // namespace detail

/// mu((delta_n^k o A_n o delta^n)^{-1}(sigma) sym-diff
///    (delta_m^k o A_m o delta^m)^{-1}(sigma)).
/// Exactly 0 without sampling when both n, m reach the horizon of k, when
/// n = m, or when sigma is everything; `force_sampling` disables the
/// shortcut.
inline McEstimate dag_condition(const SymbolSpec &spec, const ProductMeasure &mu,
                                const CylinderSet &sigma, std::size_t n,
                                std::size_t m, const McConfig &cfg,
                                bool force_sampling = false) {
  const std::size_t k = sigma.base_dimension();
  if (n < k || m < k) {
    throw Error(ErrorKind::invalid_parameter,
                "truncation levels must be >= k=" + std::to_string(k));
  }
  if (!force_sampling) {
    if (n == m || detail::is_full(sigma)) {
      return exact_estimate(0.0, cfg.seed);
    }
    if (const auto hz = detail::horizon_or_none(spec, k);
        hz && n >= *hz && m >= *hz) {
      return exact_estimate(0.0, cfg.seed);
    }
  }
  const Truncation tn = truncate(spec, n);
  const Truncation tm = truncate(spec, m);
  return symdiff_measure(
      [&](std::span<const double> x) { return detail::image_in(tn, sigma, x); },
      [&](std::span<const double> x) { return detail::image_in(tm, sigma, x); },
      mu.truncated(std::max(n, m)), cfg);
}

struct CompatRow {
  std::size_t m = 0;
  double sup_ratio = 0.0;    // sup over the battery of symdiff / mu_k(sigma)
  std::size_t argmax = 0;    // battery index attaining it
  std::vector<McEstimate> symdiff;
  std::vector<double> base_mass;
  bool exact = false;
  std::string note;
};

/// mu_m((A_k o delta_m^k)^{-1}(sigma) sym-diff (delta_m^k o A_m)^{-1}(sigma))
/// divided by mu_k(sigma), for each m and each box of the battery.
inline std::vector<CompatRow> compat_condition_iii(
    const SymbolSpec &spec, const ProductMeasure &mu, std::size_t k,
    std::span<const std::size_t> m_values, const std::vector<Box> &battery,
    const McConfig &cfg) {
  const Truncation tk = truncate(spec, k);
  const ProductMeasure mu_k = mu.truncated(k);
  const auto hz = detail::horizon_or_none(spec, k);
  const bool same_block = hz && *hz <= k;
  std::vector<CompatRow> rows;
  for (std::size_t m : m_values) {
    if (m < k) {
      throw Error(ErrorKind::invalid_parameter,
                  "m=" + std::to_string(m) + " below k=" + std::to_string(k));
    }
    CompatRow row;
    row.m = m;
    row.exact = same_block || m == k;
    const Truncation tm = truncate(spec, m);
    const ProductMeasure mu_m = mu.truncated(m);
    for (std::size_t b = 0; b < battery.size(); ++b) {
      const double base = box_mass(battery[b], mu_k);
      row.base_mass.push_back(base);
      if (base == 0.0) {
        row.symdiff.push_back(exact_estimate(0.0));
        row.note += "box " + std::to_string(b) + " has zero mass, skipped; ";
        continue;
      }
      const CylinderSet sigma = CylinderSet::from_boxes(k, {battery[b]});
      McEstimate e =
          row.exact
              ? exact_estimate(0.0, cfg.seed)
              : symdiff_measure(
                    [&](std::span<const double> x) {
                      return detail::image_in(tk, sigma, x);
                    },
                    [&](std::span<const double> x) {
                      return detail::image_in(tm, sigma, x);
                    },
                    mu_m, cfg.with_seed(derive_seed(cfg.seed, 100 * m + b)));
      const double ratio = e.mean / base;
      if (ratio > row.sup_ratio) {
        row.sup_ratio = ratio;
        row.argmax = b;
      }
      row.symdiff.push_back(e);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

struct ConvergenceRow {
  std::size_t m = 0;
  double distance = 0.0; // |(C_{A_m} x I) f - C_A f|
  McEstimate symdiff;    // its square
};

struct ConvergenceTable {
  std::size_t k = 0;
  std::size_t horizon = 0;
  Box sigma;
  std::vector<ConvergenceRow> rows;
};

/// For f the indicator of the cylinder over `sigma`, the distance between
/// (C_{A_m} x I) f and C_A f is sqrt of a symmetric-difference measure; C_A
/// is represented by the truncation at the horizon of k.
inline ConvergenceTable convergence_table(const SymbolSpec &spec,
                                          const ProductMeasure &mu,
                                          const Box &sigma, std::size_t m_max,
                                          const McConfig &cfg) {
  ConvergenceTable out;
  out.k = sigma.size();
  out.horizon = row_finite_horizon(spec, out.k);
  out.sigma = sigma;
  const CylinderSet set = CylinderSet::from_boxes(out.k, {sigma});
  for (std::size_t m = out.k; m <= std::max(m_max, out.horizon); ++m) {
    ConvergenceRow row;
    row.m = m;
    row.symdiff = dag_condition(spec, mu, set, m, out.horizon,
                                cfg.with_seed(derive_seed(cfg.seed, m)));
    row.distance = std::sqrt(row.symdiff.mean);
    out.rows.push_back(row);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Hump family: uniform L2 bound and unboundedness witnesses

struct UniformL2Row {
  std::size_t n = 0;
  McEstimate m2;
  double bound = 0.0;
  bool pass = false;
};

struct UniformL2Report {
  std::vector<UniformL2Row> rows;
  double product_bound = 0.0; // bound over all n from the plan's tails
  bool pass = false;
};

/// prod_{2<=j<=n, j not a hump} alpha_j^2 * prod_{hump j<=n} hump_term(j).
inline double l2_partial_bound(const DensityFamilyPlan &plan, std::size_t n) {
  double log_b = 0.0;
  for (std::size_t j = 2; j <= n; ++j) {
    const auto &f = plan.factor(j);
    log_b += f.hump ? std::log(plan.hump_term(j)) : 2.0 * std::log(f.alpha);
  }
  return std::exp(log_b);
}

inline UniformL2Report uniform_l2_bound_hump(const SymbolSpec &spec,
                                             const ProductMeasure &mu,
                                             const DensityFamilyPlan &plan,
                                             std::span<const std::size_t> ns,
                                             const McConfig &cfg) {
  UniformL2Report rep;
  rep.pass = true;
  rep.product_bound = l2_partial_bound(plan, plan.factors.size());
  for (std::size_t n : ns) {
    const RnDerivative h(truncate(spec, n), mu);
    UniformL2Row row;
    row.n = n;
    row.m2 = second_moment_mc(h, cfg.with_seed(derive_seed(cfg.seed, n)));
    row.bound = l2_partial_bound(plan, n);
    row.pass = row.m2.mean <= row.bound + 3.0 * row.m2.std_error;
    rep.pass = rep.pass && row.pass;
    rep.rows.push_back(row);
  }
  return rep;
}

struct WitnessPoint {
  std::size_t i = 0;
  std::size_t n = 0; // 3i + 1
  std::vector<double> x;
  double h = 0.0;
};

namespace detail {

struct BlockWitness {
  double y = 0.0;     // x_{3i-2}
  double x_hat = 0.0; // x_{3i-1}
};

/// x_{3i-1} at the end of the hump (value phi(b)/delta) and x_{3i-2} chosen
/// so that the shift moves it onto the flat part right of the hump.
inline std::optional<BlockWitness> block_witness(const SymbolSpec &spec,
                                                 const DensityFamilyPlan &plan,
                                                 std::size_t i) {
  const std::size_t j = hump_factor_index(i);
  const auto &f = plan.factor(j);
  const auto &eta = f.eta;
  if (!eta.hump_params()) {
    return std::nullopt;
  }
  const double x0 = eta.step4_params() ? eta.step4_params()->shift : 0.0;
  const double b = eta.hump_params()->b;
  const double m = spec.sequence(j);
  const double land = x0 + 0.5 * (b + m);
  BlockWitness w;
  // phi is continuous but the density jumps back up at b itself
  double inside = x0 + b;
  for (int q = 0; q < 4; ++q) {
    inside = std::nextafter(inside, -kInf);
  }
  w.x_hat = std::min(inside, x0 + b * (1.0 - 1e-9));
  if (!(eta.pdf(w.x_hat) < eta.pdf(x0 + b))) {
    return std::nullopt;
  }
  const auto y = shift_preimage(spec.profile(), m, land - w.x_hat);
  if (!y || land - w.x_hat <= 0.0) {
    return std::nullopt;
  }
  w.y = *y;
  return w;
}

} // namespace detail

/// Evaluates h^{A_{3i+1}} at the constructed point for i = 1..i_max and
/// fits log h against i.
inline Certificate unboundedness_witness_hump(const SymbolSpec &spec,
                                              const ProductMeasure &mu,
                                              const DensityFamilyPlan &plan,
                                              std::size_t i_max,
                                              std::vector<WitnessPoint> *points = nullptr) {
  if (spec.variant() != SymbolVariant::triangular_shift) {
    throw Error(ErrorKind::variant_mismatch,
                "hump witness needs a triangular-shift symbol");
  }
  Certificate cert;
  cert.n_max = 3 * i_max + 1;
  const double r = plan.r;
  std::vector<double> is;
  std::vector<double> logs;
  double best = 0.0;
  for (std::size_t i = 1; i <= i_max; ++i) {
    const std::size_t n = 3 * i + 1;
    std::vector<double> x(n, 0.0);
    bool ok = true;
    for (std::size_t blk = 1; blk <= i && ok; ++blk) {
      const auto w = detail::block_witness(spec, plan, blk);
      if (!w) {
        ok = false;
        break;
      }
      x[3 * blk - 3] = w->y;
      x[3 * blk - 2] = w->x_hat;
    }
    const RnDerivative h(truncate(spec, n), mu);
    if (!ok) {
      cert.reason = "witness search failed at i=" + std::to_string(i) +
                    ": shift profile cannot move the hump minimum off the hump";
      cert.lower_bound = best;
      return cert;
    }
    // x_{3b} <= 0 keeps p_{3b+1} off; move left until the shift of
    // factor 3b does not lose mass
    for (std::size_t blk = 1; blk <= i; ++blk) {
      const std::size_t idx = 3 * blk - 1; // 0-based coordinate 3b
      const double p = spec.shift(idx + 1, x[idx - 1]);
      const auto &eta = h.measure().factor(idx + 1);
      double t = -std::max(p, 1e-3);
      for (int step = 0; step < 64; ++step) {
        x[idx] = t;
        if (eta.pdf(t + p) >= eta.pdf(t)) {
          break;
        }
        t *= 2.0;
      }
    }
    WitnessPoint wp;
    wp.i = i;
    wp.n = n;
    wp.x = x;
    wp.h = h.eval(x);
    best = std::max(best, wp.h);
    EvidenceRow row;
    row.n = n;
    row.bound = std::pow(r, static_cast<double>(i));
    row.ess_sup = wp.h;
    row.note = "h at witness for i=" + std::to_string(i);
    cert.evidence.push_back(row);
    is.push_back(static_cast<double>(i));
    logs.push_back(std::log(wp.h));
    cert.witness_index = n;
    cert.lower_bound = wp.h;
    cert.witness_point = wp.x;
    if (points) {
      points->push_back(std::move(wp));
    }
  }
  double c = kInf;
  for (std::size_t q = 0; q < is.size(); ++q) {
    c = std::min(c, std::exp(logs[q] - is[q] * std::log(r)));
  }
  cert.growth_constant = c;
  if (is.size() >= 2) {
    const double mi = std::accumulate(is.begin(), is.end(), 0.0) / is.size();
    const double ml = std::accumulate(logs.begin(), logs.end(), 0.0) / logs.size();
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t q = 0; q < is.size(); ++q) {
      sxy += (is[q] - mi) * (logs[q] - ml);
      sxx += (is[q] - mi) * (is[q] - mi);
    }
    cert.fitted_slope = sxy / sxx;
  } else {
    cert.fitted_slope = logs.empty() ? 0.0 : logs[0];
  }
  if (*cert.fitted_slope >= std::log(r) - 0.1 && c > 0.0) {
    cert.verdict = Verdict::unbounded_witness;
    cert.scope = "h evaluated at constructed points grows like c r^i";
  } else {
    cert.reason = "growth slope " + std::to_string(*cert.fitted_slope) +
                  " below log r - 0.1";
  }
  return cert;
}

// ---------------------------------------------------------------------------
// Demonstrations on 1-D Lebesgue measure and counting measure

struct ReciprocalRow {
  std::size_t n = 0;
  double image_norm_sq = 0.0; // |C chi_[1/n,1]|^2 = n - 1
  double f_norm_sq = 0.0;     // |chi_[1/n,1]|^2 = 1 - 1/n
  double ratio_sq = 0.0;      // = n
  double restricted_bound = 0.0; // sup_m |C_{phi_m} on level-n functions| <= n
  double restricted_probe = 0.0; // ratio for chi_[1/n, 2/n], approaches the bound
};

struct ReciprocalReport {
  std::vector<ReciprocalRow> rows;
  bool ratio_exact = true;     // ratio_sq == n for every row
  bool restricted_ok = true;   // probe <= bound for every row
  std::string note;
};

/// phi(x) = 1/x on (0, inf) with Lebesgue measure.
///   |C chi_[1/n,1]|^2 = lambda([1, n]) = n - 1,  |chi_[1/n,1]|^2 = 1 - 1/n.
/// For f supported in [1/k, k], |C f|^2 = int |f(t)|^2 / t^2 dt <= k^2 |f|^2.
inline ReciprocalReport demo_reciprocal_symbol(std::size_t n_max) {
  if (n_max < 2) {
    throw Error(ErrorKind::invalid_parameter, "n_max must be >= 2");
  }
  ReciprocalReport rep;
  for (std::size_t n = 2; n <= n_max; ++n) {
    const double nd = static_cast<double>(n);
    ReciprocalRow row;
    row.n = n;
    row.image_norm_sq = nd - 1.0;
    row.f_norm_sq = (nd - 1.0) / nd;
    row.ratio_sq = ((nd - 1.0) * nd) / (nd - 1.0);
    row.restricted_bound = nd;
    // chi_[1/n, c]: |C f|^2 = n - 1/c, |f|^2 = c - 1/n, ratio^2 = n / c
    const double c = 2.0 / nd;
    row.restricted_probe = std::sqrt((nd - 1.0 / c) / (c - 1.0 / nd));
    rep.ratio_exact = rep.ratio_exact && row.ratio_sq == nd;
    rep.restricted_ok =
        rep.restricted_ok && row.restricted_probe <= row.restricted_bound;
    rep.rows.push_back(row);
  }
  rep.note = "image_norm_sq is the squared norm; the norm itself is "
             "sqrt(n - 1). Either way the ratio grows without bound.";
  return rep;
}

struct CyclicRow {
  std::size_t n = 0;
  std::size_t image_support = 0; // C_{phi_n} e_1 = e_{image_support}
  double distance_to_previous = 0.0;
};

struct CyclicReport {
  bool identity_variant = false;
  std::vector<CyclicRow> rows;
  double min_pairwise = 0.0;
  double max_pairwise = 0.0;
  bool limit_exists = false; // e_1 in dom(lim C_n)
};

/// Counting measure on {1..n}, phi_n the cyclic shift k -> k + 1 (n -> 1),
/// or the identity. Computes C_{phi_n} e_1 = e_1 o phi_n explicitly.
inline CyclicReport demo_cyclic_shift(std::size_t n_max, bool identity = false) {
  if (n_max < 2) {
    throw Error(ErrorKind::invalid_parameter, "n_max must be >= 2");
  }
  CyclicReport rep;
  rep.identity_variant = identity;
  std::vector<std::vector<double>> images;
  for (std::size_t n = 1; n <= n_max; ++n) {
    std::vector<double> img(n_max, 0.0);
    for (std::size_t x = 1; x <= n; ++x) {
      const std::size_t phi = identity ? x : (x == n ? 1 : x + 1);
      img[x - 1] = phi == 1 ? 1.0 : 0.0;
    }
    CyclicRow row;
    row.n = n;
    row.image_support = static_cast<std::size_t>(
        std::find(img.begin(), img.end(), 1.0) - img.begin() + 1);
    images.push_back(std::move(img));
    rep.rows.push_back(row);
  }
  auto dist = [&](std::size_t a, std::size_t b) {
    double s = 0.0;
    for (std::size_t q = 0; q < n_max; ++q) {
      const double d = images[a][q] - images[b][q];
      s += d * d;
    }
    return std::sqrt(s);
  };
  rep.min_pairwise = kInf;
  // n = 1 is the trivial one-point space; pairs start at n = 2
  for (std::size_t a = 1; a < n_max; ++a) {
    if (a > 1) {
      rep.rows[a].distance_to_previous = dist(a, a - 1);
    }
    for (std::size_t b = a + 1; b < n_max; ++b) {
      const double d = dist(a, b);
      rep.min_pairwise = std::min(rep.min_pairwise, d);
      rep.max_pairwise = std::max(rep.max_pairwise, d);
    }
  }
  rep.limit_exists = rep.max_pairwise == 0.0;
  return rep;
}

} // namespace oplim
