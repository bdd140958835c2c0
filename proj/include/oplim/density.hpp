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

// One-dimensional probability densities used as tensor factors: the standard
// gaussian, even step densities with geometric decay, their hump
// modifications and the renormalized form that caps a hump at 1.
//
// Every non-gaussian density is stored as a left geometric step tail, a
// finite run of linear pieces and a right geometric step tail. Mass, CDF and
// inverse CDF are closed form on that representation.

#include "oplim/error.hpp"
#include "oplim/rng.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace oplim {

enum class DensityKind { gaussian, even_step, hump_modified, step4_normalized };

constexpr std::string_view to_string(DensityKind kind) noexcept {
  switch (kind) {
  case DensityKind::gaussian: return "gaussian";
  case DensityKind::even_step: return "even-step";
  case DensityKind::hump_modified: return "hump-modified";
  case DensityKind::step4_normalized: return "step4-normalized";
  }
  return "unknown";
}

/// Density value first_value * ratio^-j on the j-th step of width `width`,
/// counted outward from `start`.
struct StepTail {
  double start = 0.0;
  double width = 1.0;
  double first_value = 0.0;
  double ratio = 2.0;

  double mass() const noexcept {
    return first_value * width / (1.0 - 1.0 / ratio);
  }
};

/// Density linear on [lo, hi) from v_lo to v_hi.
struct LinearPiece {
  double lo = 0.0;
  double hi = 0.0;
  double v_lo = 0.0;
  double v_hi = 0.0;

  double mass() const noexcept { return 0.5 * (hi - lo) * (v_lo + v_hi); }
  double value(double x) const noexcept {
    if (hi == lo) {
      return v_lo;
    }
    return v_lo + (v_hi - v_lo) * (x - lo) / (hi - lo);
  }
  double mass_to(double x) const noexcept {
    const double t = std::clamp(x, lo, hi) - lo;
    return t * (v_lo + 0.5 * t * slope());
  }
  double slope() const noexcept {
    return hi == lo ? 0.0 : (v_hi - v_lo) / (hi - lo);
  }
};

struct EvenStepParams {
  double alpha = 2.0;
  double width = 0.25;
};

/// Two-segment linear profile on [a, b] through (a, 1), (knee, knee_level)
/// and (b, end_level).
struct HumpParams {
  double a = 0.0;
  double b = 0.0;
  double r = 1.0;
  double knee = 0.0;
  double knee_level = 1.0;
  double end_level = 1.0;

  double phi(double x) const noexcept {
    if (x <= knee) {
      return knee == a ? knee_level
                       : 1.0 + (knee_level - 1.0) * (x - a) / (knee - a);
    }
    return knee_level + (end_level - knee_level) * (x - knee) / (b - knee);
  }
  double max_value() const noexcept {
    return std::max({1.0, knee_level, end_level});
  }
  double min_value() const noexcept {
    return std::min({1.0, knee_level, end_level});
  }
  double integral() const noexcept {
    return 0.5 * (knee - a) * (1.0 + knee_level) +
           0.5 * (b - knee) * (knee_level + end_level);
  }
};

struct Step4Params {
  double shift = 0.0; // x0
  double delta = 1.0; // sup of the hump profile
};

class DensityModel {
public:
  static DensityModel gaussian() {
    DensityModel d;
    d.kind_ = DensityKind::gaussian;
    return d;
  }

  DensityKind kind() const noexcept { return kind_; }
  bool is_gaussian() const noexcept { return kind_ == DensityKind::gaussian; }
  bool is_step() const noexcept { return kind_ == DensityKind::even_step; }

  const std::optional<EvenStepParams> &step_params() const noexcept {
    return step_;
  }
  const std::optional<HumpParams> &hump_params() const noexcept {
    return hump_;
  }
  const std::optional<Step4Params> &step4_params() const noexcept {
    return step4_;
  }
  const StepTail &left_tail() const noexcept { return left_; }
  const StepTail &right_tail() const noexcept { return right_; }
  const std::vector<LinearPiece> &core() const noexcept { return core_; }

  double pdf(double x) const noexcept {
    if (is_gaussian()) {
      return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
    }
    return piecewise_pdf(x);
  }

  double log_pdf(double x) const noexcept {
    if (is_gaussian()) {
      return -0.5 * x * x - 0.5 * std::log(2.0 * std::numbers::pi);
    }
    if (x < left_.start) {
      const double j = std::floor((left_.start - x) / left_.width);
      return std::log(left_.first_value) - j * std::log(left_.ratio);
    }
    if (x >= right_.start) {
      const double j = std::floor((x - right_.start) / right_.width);
      return std::log(right_.first_value) - j * std::log(right_.ratio);
    }
    return std::log(core_value(x));
  }

  /// Closed-form total mass.
  double mass() const noexcept {
    if (is_gaussian()) {
      return 1.0;
    }
    return left_.mass() + core_mass() + right_.mass();
  }

  double cdf(double x) const noexcept {
    if (is_gaussian()) {
      return 0.5 * std::erfc(-x / std::numbers::sqrt2);
    }
    if (x == -std::numeric_limits<double>::infinity()) {
      return 0.0;
    }
    if (x < left_.start) {
      // mass of (-inf, x] = mass of the tail beyond distance d from start
      const double d = left_.start - x;
      return tail_mass_beyond(left_, d);
    }
    double acc = left_.mass();
    if (x < right_.start) {
      for (const auto &p : core_) {
        if (x >= p.hi) {
          acc += p.mass();
        } else {
          acc += p.mass_to(x);
          break;
        }
      }
      return acc;
    }
    acc += core_mass();
    return acc + right_.mass() - tail_mass_beyond(right_, x - right_.start);
  }

  double interval_mass(double lo, double hi) const noexcept {
    if (!(hi > lo)) {
      return 0.0;
    }
    if (is_gaussian()) {
      // difference of upper tails is more accurate on the right half-line
      if (lo >= 0.0) {
        return 0.5 * (std::erfc(lo / std::numbers::sqrt2) -
                      std::erfc(hi / std::numbers::sqrt2));
      }
      return cdf(hi) - cdf(lo);
    }
    return cdf(hi) - cdf(lo);
  }

  /// Inverse CDF, u in [0, 1].
  double quantile(double u) const {
    if (is_gaussian()) {
      if (u <= 0.0) {
        return -std::numeric_limits<double>::infinity();
      }
      if (u >= 1.0) {
        return std::numeric_limits<double>::infinity();
      }
      return boost::math::quantile(boost::math::normal_distribution<>{}, u);
    }
    const double target = u * mass();
    const double left_mass = left_.mass();
    if (target < left_mass) {
      const double d = tail_distance_for(left_, left_mass - target);
      return left_.start - d;
    }
    double q = target - left_mass;
    for (const auto &p : core_) {
      const double m = p.mass();
      if (q < m) {
        return p.lo + solve_linear_mass(p, q);
      }
      q -= m;
    }
    return right_.start + tail_distance_for(right_, q);
  }

  double sup() const noexcept {
    if (is_gaussian()) {
      return 1.0 / std::sqrt(2.0 * std::numbers::pi);
    }
    double s = std::max(left_.first_value, right_.first_value);
    for (const auto &p : core_) {
      s = std::max({s, p.v_lo, p.v_hi});
    }
    return s;
  }

  /// Points where the density is discontinuous or changes slope, restricted
  /// to [lo, hi].
  /// Breakpoints in [lo, hi]. Each tail keeps its first 64 steps, then
  /// every s-th so that at most `max_per_tail` are listed.
  std::vector<double> breakpoints(
      double lo, double hi,
      std::size_t max_per_tail = std::numeric_limits<std::size_t>::max()) const {
    std::vector<double> out;
    if (is_gaussian()) {
      return out;
    }
    auto walk = [&](const StepTail &t, double sign, double limit) {
      const double span = sign * (limit - t.start);
      if (!(span >= 0.0)) {
        return;
      }
      const double count = std::floor(span / t.width) + 1.0;
      const double cap = static_cast<double>(std::max<std::size_t>(max_per_tail, 64));
      const double stride = count > cap ? std::ceil((count - 64.0) / (cap - 64.0 + 1.0)) : 1.0;
      for (double k = 0.0; k < count; k += (k < 64.0 ? 1.0 : stride)) {
        const double x = t.start + sign * k * t.width;
        if (x >= lo && x <= hi) {
          out.push_back(x);
        }
      }
    };
    walk(left_, -1.0, lo);
    for (const auto &p : core_) {
      if (p.lo >= lo && p.lo <= hi) {
        out.push_back(p.lo);
      }
    }
    walk(right_, 1.0, hi);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  /// Draws one value; gaussian by Box-Muller, everything else by the exact
  /// inverse CDF.
  double sample(RandomStream &rng) const {
    if (is_gaussian()) {
      return rng.normal();
    }
    return quantile(rng.uniform());
  }

  friend DensityModel build_step_density(double alpha);
  friend DensityModel build_hump(const DensityModel &base, double b, double r);
  friend DensityModel normalize_step4(const DensityModel &d);

private:
  DensityModel() = default;

  double core_mass() const noexcept {
    double m = 0.0;
    for (const auto &p : core_) {
      m += p.mass();
    }
    return m;
  }

  double core_value(double x) const noexcept {
    for (const auto &p : core_) {
      if (x < p.hi) {
        return p.value(x);
      }
    }
    return core_.empty() ? right_.first_value : core_.back().v_hi;
  }

  double piecewise_pdf(double x) const noexcept {
    if (x < left_.start) {
      const double j = std::floor((left_.start - x) / left_.width);
      return left_.first_value * std::pow(left_.ratio, -j);
    }
    if (x >= right_.start) {
      const double j = std::floor((x - right_.start) / right_.width);
      return right_.first_value * std::pow(right_.ratio, -j);
    }
    return core_value(x);
  }

  // Mass of the tail at distance >= d from its start.
  static double tail_mass_beyond(const StepTail &t, double d) noexcept {
    const double j = std::floor(d / t.width);
    const double v = t.first_value * std::pow(t.ratio, -j);
    const double inside = (d - j * t.width) * v;
    return v * t.width / (1.0 - 1.0 / t.ratio) - inside;
  }

  // Distance from the tail start at which the accumulated mass equals q.
  static double tail_distance_for(const StepTail &t, double q) noexcept {
    const double total = t.mass();
    const double f = std::clamp(q / total, 0.0, std::nextafter(1.0, 0.0));
    const double log_ratio = std::log(t.ratio);
    double j = std::floor(-std::log1p(-f) / log_ratio);
    // guard against rounding in the log
    const auto partial = [&](double k) { return -std::expm1(-k * log_ratio); };
    if (partial(j) > f && j > 0) {
      j -= 1.0;
    } else if (partial(j + 1.0) <= f) {
      j += 1.0;
    }
    const double step = std::exp(-j * log_ratio) * (1.0 - 1.0 / t.ratio);
    const double theta = std::clamp((f - partial(j)) / step, 0.0, 1.0);
    return (j + theta) * t.width;
  }

  static double solve_linear_mass(const LinearPiece &p, double q) noexcept {
    const double s = p.slope();
    const double disc = std::max(0.0, p.v_lo * p.v_lo + 2.0 * s * q);
    const double denom = p.v_lo + std::sqrt(disc);
    if (denom <= 0.0) {
      return 0.0;
    }
    return std::min(2.0 * q / denom, p.hi - p.lo);
  }

  DensityKind kind_ = DensityKind::gaussian;
  std::optional<EvenStepParams> step_;
  std::optional<HumpParams> hump_;
  std::optional<Step4Params> step4_;
  StepTail left_;
  StepTail right_;
  std::vector<LinearPiece> core_;
};

/// Even step density with value alpha^-n on n*M <= |x| < (n+1)*M, where
/// M = (1 - 1/alpha)/2 makes the total mass exactly one.
inline DensityModel build_step_density(double alpha) {
  if (!(alpha > 1.0) || !std::isfinite(alpha)) {
    throw Error(ErrorKind::invalid_parameter,
                "step ratio alpha must be > 1, got " + std::to_string(alpha));
  }
  DensityModel d;
  d.kind_ = DensityKind::even_step;
  const double width = 0.5 * (1.0 - 1.0 / alpha);
  d.step_ = EvenStepParams{alpha, width};
  d.left_ = StepTail{0.0, width, 1.0, alpha};
  d.right_ = StepTail{0.0, width, 1.0, alpha};
  return d;
}

/// Replaces the even step density `base` on [0, b] by a continuous two-piece
/// linear profile phi with phi(0) = 1, phi(b) = 1/r, knee at b/2 and knee
/// level chosen so that phi carries the same mass as base on [0, b].
inline DensityModel build_hump(const DensityModel &base, double b, double r) {
  if (!base.is_step()) {
    throw Error(ErrorKind::construction_failed,
                "hump base must be an even-step density, got " +
                    std::string(to_string(base.kind())));
  }
  const double width = base.step_->width;
  if (!(b > 0.0 && b < width)) {
    throw Error(ErrorKind::construction_failed,
                "hump end b=" + std::to_string(b) + " must lie in (0, " +
                    std::to_string(width) + ")");
  }
  if (!(r >= 1.0) || !std::isfinite(r)) {
    // (1 + 2c + 1/r)/4 = 1 gives c = (3 - 1/r)/2, and c >= phi(b) = 1/r
    // needs r >= 1.
    throw Error(ErrorKind::construction_failed,
                "hump ratio r=" + std::to_string(r) +
                    " < 1: the end value 1/r would not be the profile minimum");
  }
  HumpParams h;
  h.a = 0.0;
  h.b = b;
  h.r = r;
  h.knee = 0.5 * b;
  h.end_level = 1.0 / r;
  h.knee_level = 0.5 * (3.0 - h.end_level);

  DensityModel d = base;
  d.kind_ = DensityKind::hump_modified;
  d.hump_ = h;
  d.core_ = {LinearPiece{0.0, h.knee, 1.0, h.knee_level},
             LinearPiece{h.knee, b, h.knee_level, h.end_level},
             LinearPiece{b, width, 1.0, 1.0}};
  d.right_ = StepTail{width, width, 1.0 / base.step_->alpha, base.step_->alpha};
  return d;
}

/// Caps a hump-modified density at one: scale by 1/delta, insert a flat
/// segment of height one on [0, x0] and shift the right half by x0, with
/// x0 = 1 - mass/delta. Returns `d` unchanged when delta <= 1.
inline DensityModel normalize_step4(const DensityModel &d) {
  if (d.kind() != DensityKind::hump_modified) {
    return d;
  }
  const double delta = d.hump_->max_value();
  if (delta <= 1.0) {
    return d;
  }
  const double inv = 1.0 / delta;
  const double x0 = 1.0 - inv * d.mass();
  DensityModel out = d;
  out.kind_ = DensityKind::step4_normalized;
  out.step4_ = Step4Params{x0, delta};
  out.left_.first_value *= inv;
  out.core_.clear();
  out.core_.push_back(LinearPiece{0.0, x0, 1.0, 1.0});
  for (const auto &p : d.core_) {
    out.core_.push_back(
        LinearPiece{p.lo + x0, p.hi + x0, p.v_lo * inv, p.v_hi * inv});
  }
  out.right_.start += x0;
  out.right_.first_value *= inv;
  return out;
}

/// Free-function form used by the measure module.
inline double sample(const DensityModel &d, RandomStream &rng) {
  return d.sample(rng);
}

} // namespace oplim
