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

// Finite and infinite product measures, cylinder sets and the seeded Monte
// Carlo integration engine.
//
// Work is cut into fixed-size chunks; chunk c draws from RandomStream(seed, c)
// and the per-chunk accumulators are merged pairwise in chunk order. The
// result therefore does not depend on how many worker threads ran.

#include "oplim/density.hpp"
#include "oplim/error.hpp"
#include "oplim/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace oplim {

class ProductMeasure {
public:
  /// Factor generator for an infinite product; indices are 1-based.
  using FactorGenerator = std::function<DensityModel(std::size_t)>;

  ProductMeasure() = default;

  /// Finite product of the given factors.
  explicit ProductMeasure(std::vector<DensityModel> factors,
                          std::string label = "product")
      : factors_(std::move(factors)), label_(std::move(label)) {}

  /// Infinite product described by `tail`, with the first `n` factors
  /// materialized.
  ProductMeasure(FactorGenerator tail, std::size_t n, std::string label)
      : tail_(std::move(tail)), label_(std::move(label)) {
    extend_to(n);
  }

  static ProductMeasure gaussian(std::size_t n) {
    return ProductMeasure([](std::size_t) { return DensityModel::gaussian(); },
                          n, "gaussian");
  }

  std::size_t dimension() const noexcept { return factors_.size(); }
  bool has_tail() const noexcept { return static_cast<bool>(tail_); }
  const std::string &label() const noexcept { return label_; }

  const DensityModel &factor(std::size_t index) const {
    if (index < 1 || index > factors_.size()) {
      throw Error(ErrorKind::invalid_parameter,
                  "factor " + std::to_string(index) +
                      " not materialized (dimension " +
                      std::to_string(factors_.size()) + ")");
    }
    return factors_[index - 1];
  }

  const std::vector<DensityModel> &factors() const noexcept {
    return factors_;
  }

  /// mu_n: the first n factors. Extends through the tail generator when
  /// more factors are requested than are materialized.
  ProductMeasure truncated(std::size_t n) const {
    ProductMeasure out = *this;
    if (n <= factors_.size()) {
      out.factors_.resize(n, DensityModel::gaussian());
      return out;
    }
    if (!tail_) {
      throw Error(ErrorKind::invalid_parameter,
                  "finite product of dimension " +
                      std::to_string(factors_.size()) +
                      " cannot be extended to " + std::to_string(n));
    }
    out.extend_to(n);
    return out;
  }

  /// Fills `x` with the first x.size() coordinates of one draw.
  void sample(RandomStream &rng, std::span<double> x) const {
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = factors_[i].sample(rng);
    }
  }

  double log_density(std::span<const double> x) const {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      s += factors_[i].log_pdf(x[i]);
    }
    return s;
  }

private:
  void extend_to(std::size_t n) {
    factors_.reserve(n);
    while (factors_.size() < n) {
      factors_.push_back(tail_(factors_.size() + 1));
    }
  }

  std::vector<DensityModel> factors_;
  FactorGenerator tail_;
  std::string label_;
};

// ---------------------------------------------------------------------------
// Cylinder sets

/// Half-open interval [lo, hi); infinite ends allowed.
struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();

  bool contains(double x) const noexcept { return x >= lo && x < hi; }
  bool empty() const noexcept { return !(hi > lo); }
};

using Box = std::vector<Interval>;

inline bool box_contains(const Box &box, std::span<const double> x) noexcept {
  for (std::size_t i = 0; i < box.size(); ++i) {
    if (!box[i].contains(x[i])) {
      return false;
    }
  }
  return true;
}

inline bool box_empty(const Box &box) noexcept {
  return std::any_of(box.begin(), box.end(),
                     [](const Interval &iv) { return iv.empty(); });
}

/// a \ b as a list of disjoint boxes.
inline std::vector<Box> box_difference(const Box &a, const Box &b) {
  std::vector<Box> out;
  Box rest = a;
  for (std::size_t d = 0; d < a.size(); ++d) {
    const Interval cut{std::max(rest[d].lo, b[d].lo),
                       std::min(rest[d].hi, b[d].hi)};
    if (cut.empty()) {
      out.push_back(rest);
      return out;
    }
    if (rest[d].lo < cut.lo) {
      Box below = rest;
      below[d] = Interval{rest[d].lo, cut.lo};
      out.push_back(std::move(below));
    }
    if (cut.hi < rest[d].hi) {
      Box above = rest;
      above[d] = Interval{cut.hi, rest[d].hi};
      out.push_back(std::move(above));
    }
    rest[d] = cut;
  }
  return out;
}

/// A set (delta^k)^{-1}(sigma) with sigma in R^k, given either as a finite
/// union of boxes (kept disjoint) or as a predicate on the first k
/// coordinates.
class CylinderSet {
public:
  using Predicate = std::function<bool(std::span<const double>)>;

  static CylinderSet full(std::size_t k) {
    return from_boxes(k, {Box(k, Interval{})});
  }

  static CylinderSet from_boxes(std::size_t k, const std::vector<Box> &boxes) {
    CylinderSet s;
    s.dim_ = k;
    for (const auto &b : boxes) {
      if (b.size() != k) {
        throw Error(ErrorKind::invalid_parameter,
                    "box dimension " + std::to_string(b.size()) +
                        " differs from cylinder base " + std::to_string(k));
      }
      if (box_empty(b)) {
        continue;
      }
      std::vector<Box> pieces{b};
      for (const auto &kept : s.boxes_) {
        std::vector<Box> next;
        for (const auto &p : pieces) {
          auto diff = box_difference(p, kept);
          next.insert(next.end(), diff.begin(), diff.end());
        }
        pieces = std::move(next);
      }
      s.boxes_.insert(s.boxes_.end(), pieces.begin(), pieces.end());
    }
    return s;
  }

  static CylinderSet from_predicate(std::size_t k, Predicate pred) {
    CylinderSet s;
    s.dim_ = k;
    s.pred_ = std::move(pred);
    return s;
  }

  std::size_t base_dimension() const noexcept { return dim_; }
  bool is_box_union() const noexcept { return !pred_; }
  const std::vector<Box> &boxes() const noexcept { return boxes_; }

  bool contains(std::span<const double> x) const {
    if (pred_) {
      return pred_(x.first(dim_));
    }
    return std::any_of(boxes_.begin(), boxes_.end(), [&](const Box &b) {
      return box_contains(b, x);
    });
  }

private:
  std::size_t dim_ = 0;
  std::vector<Box> boxes_;
  Predicate pred_;
};

/// Exact product-measure mass of a box from per-factor CDFs.
inline double box_mass(const Box &box, const ProductMeasure &mu) {
  double p = 1.0;
  for (std::size_t i = 0; i < box.size(); ++i) {
    p *= mu.factor(i + 1).interval_mass(box[i].lo, box[i].hi);
  }
  return p;
}

// ---------------------------------------------------------------------------
// Monte Carlo engine

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0; // sample standard deviation / sqrt(n_samples)
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
  bool exact = false;
};

inline McEstimate exact_estimate(double value, std::uint64_t seed = 0) {
  return McEstimate{value, 0.0, 0, seed, true};
}

/// Independent seed for a named sub-computation.
constexpr std::uint64_t derive_seed(std::uint64_t seed,
                                    std::uint64_t tag) noexcept {
  return mix64(seed + 0xA0761D6478BD642Full * (tag + 1));
}

inline unsigned default_worker_count() {
  if (const char *env = std::getenv("OPLIM_WORKERS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) {
      return static_cast<unsigned>(v);
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

struct McConfig {
  std::size_t n_samples = 1'000'000;
  std::uint64_t seed = kDefaultSeed;
  unsigned workers = 0; // 0: OPLIM_WORKERS or hardware concurrency
  std::size_t tolerated_nonfinite = 0;

  McConfig with_seed(std::uint64_t s) const {
    McConfig c = *this;
    c.seed = s;
    return c;
  }
  McConfig with_samples(std::size_t n) const {
    McConfig c = *this;
    c.n_samples = n;
    return c;
  }
};

namespace detail {

constexpr std::size_t kChunkSize = 8192;

struct Moments {
  std::size_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;
  std::size_t nonfinite = 0;

  void add(double v) noexcept {
    ++n;
    const double delta = v - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (v - mean);
  }

  static Moments merge(const Moments &a, const Moments &b) noexcept {
    if (a.n == 0) {
      return Moments{b.n, b.mean, b.m2, a.nonfinite + b.nonfinite};
    }
    if (b.n == 0) {
      return Moments{a.n, a.mean, a.m2, a.nonfinite + b.nonfinite};
    }
    Moments out;
    out.n = a.n + b.n;
    const double na = static_cast<double>(a.n);
    const double nb = static_cast<double>(b.n);
    const double delta = b.mean - a.mean;
    out.mean = a.mean + delta * nb / static_cast<double>(out.n);
    out.m2 = a.m2 + b.m2 + delta * delta * na * nb / static_cast<double>(out.n);
    out.nonfinite = a.nonfinite + b.nonfinite;
    return out;
  }
};

inline Moments pairwise_merge(std::span<const Moments> parts) {
  if (parts.empty()) {
    return {};
  }
  if (parts.size() == 1) {
    return parts[0];
  }
  const std::size_t half = parts.size() / 2;
  return Moments::merge(pairwise_merge(parts.first(half)),
                        pairwise_merge(parts.subspan(half)));
}

/// Runs `chunk_fn(chunk_index, count)` for every chunk on `workers` threads
/// and merges the returned moments in chunk order.
template <typename ChunkFn>
Moments run_chunks(std::size_t n_samples, unsigned workers, ChunkFn &&chunk_fn) {
  const std::size_t n_chunks = (n_samples + kChunkSize - 1) / kChunkSize;
  std::vector<Moments> parts(n_chunks);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto work = [&] {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= n_chunks) {
        return;
      }
      const std::size_t count =
          std::min(kChunkSize, n_samples - c * kChunkSize);
      try {
        parts[c] = chunk_fn(c, count);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) {
          failure = std::current_exception();
        }
        next.store(n_chunks);
        return;
      }
    }
  };

  const unsigned threads = std::max(
      1u, std::min<unsigned>(workers == 0 ? default_worker_count() : workers,
                             static_cast<unsigned>(n_chunks)));
  if (threads == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back(work);
    }
  }
  if (failure) {
    std::rethrow_exception(failure);
  }
  return pairwise_merge(parts);
}

inline McEstimate finish(const Moments &m, const McConfig &cfg) {
  if (m.nonfinite > cfg.tolerated_nonfinite) {
    throw Error(ErrorKind::integrand_error,
                std::to_string(m.nonfinite) +
                    " non-finite integrand values (tolerated " +
                    std::to_string(cfg.tolerated_nonfinite) + ")");
  }
  McEstimate est;
  est.mean = m.mean;
  est.n_samples = m.n;
  est.seed = cfg.seed;
  if (m.n > 1) {
    const double var = m.m2 / static_cast<double>(m.n - 1);
    est.std_error = std::sqrt(std::max(0.0, var) / static_cast<double>(m.n));
  }
  return est;
}

} // namespace detail

/// Monte Carlo estimate of the integral of f over mu (all mu.dimension()
/// coordinates are drawn). f receives a span of the sampled point and must
/// be safe to call concurrently.
template <typename F>
McEstimate mc_integral(F &&f, const ProductMeasure &mu, const McConfig &cfg) {
  if (cfg.n_samples == 0) {
    throw Error(ErrorKind::invalid_parameter, "n_samples must be positive");
  }
  const std::size_t dim = mu.dimension();
  auto chunk = [&](std::size_t c, std::size_t count) {
    RandomStream rng(cfg.seed, c);
    std::vector<double> x(dim);
    detail::Moments m;
    for (std::size_t s = 0; s < count; ++s) {
      mu.sample(rng, x);
      const double v = f(std::span<const double>(x));
      if (std::isfinite(v)) {
        m.add(v);
      } else {
        ++m.nonfinite;
      }
    }
    return m;
  };
  return detail::finish(detail::run_chunks(cfg.n_samples, cfg.workers, chunk),
                        cfg);
}

struct CylinderMeasure {
  McEstimate mc;
  std::optional<double> exact;
};

/// mu((delta^k)^{-1}(sigma)); only the first k coordinates are drawn. Box
/// unions also get the exact value from the factor CDFs.
inline CylinderMeasure cylinder_measure(const CylinderSet &set,
                                        const ProductMeasure &mu,
                                        const McConfig &cfg) {
  const std::size_t k = set.base_dimension();
  if (k > mu.dimension() && !mu.has_tail()) {
    throw Error(ErrorKind::invalid_parameter,
                "cylinder base dimension " + std::to_string(k) +
                    " exceeds available factors " +
                    std::to_string(mu.dimension()));
  }
  const ProductMeasure mu_k = mu.truncated(k);
  CylinderMeasure out;
  out.mc = mc_integral(
      [&](std::span<const double> x) { return set.contains(x) ? 1.0 : 0.0; },
      mu_k, cfg);
  if (set.is_box_union()) {
    double total = 0.0;
    for (const auto &b : set.boxes()) {
      total += box_mass(b, mu_k);
    }
    out.exact = total;
  }
  return out;
}

/// mu(S1 symmetric-difference S2) for sets given as indicator predicates on
/// the first mu.dimension() coordinates.
template <typename P1, typename P2>
McEstimate symdiff_measure(P1 &&in_first, P2 &&in_second,
                           const ProductMeasure &mu, const McConfig &cfg) {
  return mc_integral(
      [&](std::span<const double> x) {
        return static_cast<bool>(in_first(x)) !=
                       static_cast<bool>(in_second(x))
                   ? 1.0
                   : 0.0;
      },
      mu, cfg);
}

// ---------------------------------------------------------------------------
// Marginal isometry: int |f o delta^k|^2 dmu = int |f|^2 dmu_k

struct IsometryRow {
  std::string function;
  McEstimate lifted;   // over mu (more coordinates than k)
  McEstimate marginal; // over mu_k
  double discrepancy = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct IsometryReport {
  std::size_t k = 0;
  std::vector<IsometryRow> rows;
  bool pass = false;
};

inline double combined_stderr(const McEstimate &a, const McEstimate &b) {
  return std::sqrt(a.std_error * a.std_error + b.std_error * b.std_error);
}

inline IsometryReport marginal_isometry_check(const ProductMeasure &mu,
                                              std::size_t k,
                                              const McConfig &cfg,
                                              std::size_t extra = 2) {
  if (k == 0) {
    throw Error(ErrorKind::invalid_parameter, "k must be >= 1");
  }
  using Fn = std::function<double(std::span<const double>)>;
  std::vector<std::pair<std::string, Fn>> battery;
  battery.emplace_back("indicator R^k", [](std::span<const double>) {
    return 1.0;
  });
  battery.emplace_back("indicator [0,inf)^k", [k](std::span<const double> x) {
    for (std::size_t i = 0; i < k; ++i) {
      if (x[i] < 0.0) {
        return 0.0;
      }
    }
    return 1.0;
  });
  battery.emplace_back("x1^2 on [-10,10]", [](std::span<const double> x) {
    return std::abs(x[0]) <= 10.0 ? x[0] * x[0] : 0.0;
  });
  battery.emplace_back("indicator [-1/2,1/2)^k",
                       [k](std::span<const double> x) {
                         for (std::size_t i = 0; i < k; ++i) {
                           if (!(x[i] >= -0.5 && x[i] < 0.5)) {
                             return 0.0;
                           }
                         }
                         return 1.0;
                       });
  if (k >= 2) {
    battery.emplace_back("x1*x2 on [-1,1]^2", [](std::span<const double> x) {
      return std::abs(x[0]) <= 1.0 && std::abs(x[1]) <= 1.0 ? x[0] * x[1]
                                                             : 0.0;
    });
  }

  const ProductMeasure lifted_mu = mu.truncated(k + extra);
  const ProductMeasure marginal_mu = mu.truncated(k);
  IsometryReport report;
  report.k = k;
  report.pass = true;
  std::uint64_t tag = 0;
  for (const auto &[name, f] : battery) {
    auto sq = [&f](std::span<const double> x) {
      const double v = f(x);
      return v * v;
    };
    IsometryRow row;
    row.function = name;
    row.lifted =
        mc_integral(sq, lifted_mu, cfg.with_seed(derive_seed(cfg.seed, tag)));
    row.marginal = mc_integral(
        sq, marginal_mu, cfg.with_seed(derive_seed(cfg.seed, tag + 1)));
    tag += 2;
    row.discrepancy = row.lifted.mean - row.marginal.mean;
    row.tolerance = 3.0 * combined_stderr(row.lifted, row.marginal);
    row.pass = std::abs(row.discrepancy) <= row.tolerance;
    report.pass = report.pass && row.pass;
    report.rows.push_back(std::move(row));
  }
  return report;
}

} // namespace oplim
