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
#include "oplim/builtins.hpp"
#include "oplim/rn.hpp"

#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

namespace {

using oplim::McConfig;
using oplim::ProductMeasure;
using oplim::RnDerivative;
using oplim::SymbolSpec;

McConfig cfg(std::size_t n = 400'000, std::uint64_t seed = oplim::kDefaultSeed) {
  McConfig c;
  c.n_samples = n;
  c.seed = seed;
  return c;
}

SymbolSpec constant_diagonal(double a) {
  return SymbolSpec::diagonal("c", [a](std::size_t) { return a; });
}

RnDerivative gaussian_rn(const SymbolSpec &spec, std::size_t n) {
  return RnDerivative(oplim::truncate(spec, n), ProductMeasure::gaussian(0));
}

// log h from the closed form with a dense inverse
double log_h_dense(const oplim::Truncation &t, const std::vector<double> &x) {
  const auto &a = t.matrix();
  const auto n = static_cast<Eigen::Index>(a.size());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      m(i, j) = a(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    }
  }
  const Eigen::Map<const Eigen::VectorXd> v(x.data(), n);
  const Eigen::VectorXd y = m.partialPivLu().solve(v);
  return 0.5 * (v.squaredNorm() - y.squaredNorm()) - std::log(std::abs(m.determinant()));
}

double step_pdf(double alpha, double x) {
  const double m = 0.5 * (1.0 - 1.0 / alpha);
  return std::pow(alpha, -std::floor(std::abs(x) / m));
}

double ramp(double bound, double v) {
  return v > 0.0 ? bound * 0.99 * v * v / (1.0 + v * v) : 0.0;
}

TEST(Rn, IdentityIsOne) {
  const auto h = gaussian_rn(oplim::make_builtin("identity").spec, 6);
  EXPECT_EQ(h.rule(), oplim::RnRule::gaussian_linear);
  for (double t : {-3.0, 0.0, 0.7, 12.0}) {
    const std::vector<double> x(6, t);
    EXPECT_EQ(h.eval(x), 1.0);
  }
}

TEST(Rn, HalfDiagonalAtOrigin) {
  const auto h = gaussian_rn(constant_diagonal(0.5), 1);
  EXPECT_DOUBLE_EQ(h.eval(std::vector<double>{0.0}), 2.0);
  // 2 exp(x^2/2 - 2 x^2)
  EXPECT_NEAR(h.eval(std::vector<double>{1.0}), 2.0 * std::exp(-1.5), 1e-15);
}

TEST(Rn, BidiagonalAtOnes) {
  const auto h = gaussian_rn(oplim::make_builtin("example-5.2").spec, 2);
  EXPECT_NEAR(h.eval(std::vector<double>{1.0, 1.0}), std::exp(15.0 / 128.0), 1e-14);
  EXPECT_NEAR(std::exp(15.0 / 128.0), 1.12433, 1e-5);
}

TEST(Rn, MatchesDenseClosedForm) {
  std::mt19937_64 gen(7);
  std::normal_distribution<double> nd;
  for (const char *id : {"example-5.2", "exp-inv-square", "diagonal"}) {
    const auto h = gaussian_rn(oplim::make_builtin(id).spec, 8);
    for (int s = 0; s < 20; ++s) {
      std::vector<double> x(8);
      for (auto &v : x) {
        v = 2.0 * nd(gen);
      }
      EXPECT_NEAR(h.log_eval(x), log_h_dense(h.truncation(), x), 1e-12) << id;
    }
  }
}

TEST(Rn, NoOverflowAtLargeRadius) {
  const auto h = gaussian_rn(oplim::make_builtin("example-5.2").spec, 64);
  std::vector<double> x(64, 50.0 / 8.0); // |x| = 50
  const double l = h.log_eval(x);
  EXPECT_TRUE(std::isfinite(l));
  EXPECT_NEAR(l, log_h_dense(h.truncation(), x), 1e-9 * std::max(1.0, std::abs(l)));
  const auto hd = gaussian_rn(constant_diagonal(0.5), 64);
  const double ld = hd.log_eval(x);
  EXPECT_TRUE(std::isfinite(ld));
  EXPECT_NEAR(ld, 64.0 * std::log(2.0) - 1.5 * 2500.0, 1e-9 * 3750.0);
  EXPECT_EQ(hd.eval(x), 0.0);
}

TEST(Rn, DensityRatioForTriangularShift) {
  const auto spec = SymbolSpec::triangular_shift(
      "t", [](std::size_t) { return 1.0 / 6.0; }, oplim::ShiftProfile::smooth_ramp);
  const ProductMeasure mu({oplim::build_step_density(1.5), oplim::build_step_density(1.5),
                           oplim::build_step_density(1.5)});
  const RnDerivative h(oplim::truncate(spec, 3), mu);
  EXPECT_EQ(h.rule(), oplim::RnRule::density_ratio);
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int s = 0; s < 200; ++s) {
    const std::vector<double> x{u(gen), u(gen), u(gen)};
    // x = A y, so y = A^{-1} x with y_i = x_i + p(x_{i-1})
    const std::vector<double> y{x[0], x[1] + ramp(1.0 / 6.0, x[0]),
                                x[2] + ramp(1.0 / 6.0, x[1])};
    double ref = 1.0;
    for (int i = 0; i < 3; ++i) {
      ref *= step_pdf(1.5, y[i]) / step_pdf(1.5, x[i]);
    }
    EXPECT_NEAR(h.eval(x), ref, 1e-12 * ref);
    EXPECT_LE(h.eval(x), 1.5 * 1.5 * (1.0 + 1e-12));
  }
}

TEST(Rn, MassIsOne) {
  const auto b = oplim::make_builtin("triangular");
  const RnDerivative h(oplim::truncate(b.spec, 4), b.measure);
  const auto m = oplim::mass_mc(h, cfg());
  EXPECT_LE(std::abs(m.mean - 1.0), 3.0 * m.std_error);
  const auto hg = gaussian_rn(oplim::make_builtin("example-5.2").spec, 4);
  const auto mg = oplim::mass_mc(hg, cfg());
  EXPECT_LE(std::abs(mg.mean - 1.0), 3.0 * mg.std_error);
}

TEST(EssSup, FiniteForContraction) {
  const auto e = oplim::ess_sup_gaussian_linear(gaussian_rn(constant_diagonal(0.4), 1));
  ASSERT_TRUE(e.finite);
  EXPECT_NEAR(e.value, 2.5, 1e-15);
  const auto e3 = oplim::ess_sup_gaussian_linear(gaussian_rn(constant_diagonal(0.4), 3));
  EXPECT_NEAR(e3.value, 15.625, 1e-13);
}

TEST(EssSup, InfiniteForExpansion) {
  const auto e = oplim::ess_sup_gaussian_linear(gaussian_rn(constant_diagonal(1.5), 2));
  EXPECT_FALSE(e.finite);
  EXPECT_TRUE(std::isinf(e.value));
  EXPECT_NEAR(e.max_eigenvalue, 1.0 - 1.0 / 2.25, 1e-14);
  // |A_2| > 1 for the bidiagonal example
  EXPECT_FALSE(
      oplim::ess_sup_gaussian_linear(gaussian_rn(oplim::make_builtin("example-5.2").spec, 2))
          .finite);
}

TEST(EssSup, RejectsDensityRatioRule) {
  const auto b = oplim::make_builtin("triangular");
  const RnDerivative h(oplim::truncate(b.spec, 2), b.measure);
  try {
    (void)oplim::ess_sup_gaussian_linear(h);
    FAIL();
  } catch (const oplim::Error &e) {
    EXPECT_EQ(e.kind(), oplim::ErrorKind::variant_mismatch);
  }
}

TEST(SecondMoment, DiagonalClosedForm) {
  const double m2 = oplim::second_moment_gaussian(gaussian_rn(constant_diagonal(0.9), 1));
  EXPECT_NEAR(m2, 1.0 / (0.9 * std::sqrt(1.19)), 1e-14);
  EXPECT_NEAR(m2, 1.018554, 1e-6);
  // product over coordinates
  const double m2_3 = oplim::second_moment_gaussian(gaussian_rn(constant_diagonal(0.9), 3));
  EXPECT_NEAR(m2_3, std::pow(m2, 3.0), 1e-13);
}

TEST(SecondMoment, DivergentBeyondRootTwo) {
  try {
    (void)oplim::second_moment_gaussian(gaussian_rn(constant_diagonal(1.5), 1));
    FAIL();
  } catch (const oplim::Error &e) {
    EXPECT_EQ(e.kind(), oplim::ErrorKind::moment_divergent);
  }
}

// int h^2 dgamma by 1-D quadrature, for a one-dimensional scaling
double m2_quadrature(double a) {
  const int panels = 40000;
  const double lo = -40.0;
  const double step = 80.0 / panels;
  auto f = [a](double x) {
    const double h = std::exp(0.5 * (x * x - x * x / (a * a))) / a;
    return h * h * std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  };
  double s = f(lo) + f(-lo);
  for (int k = 1; k < panels; ++k) {
    s += f(lo + k * step) * (k % 2 ? 4.0 : 2.0);
  }
  return s * step / 3.0;
}

TEST(SecondMoment, QuadratureAndMonteCarloAgree) {
  for (double a : {0.6, 0.9, 1.1, 1.2}) {
    const auto h = gaussian_rn(constant_diagonal(a), 1);
    EXPECT_NEAR(oplim::second_moment_gaussian(h), m2_quadrature(a), 1e-9) << a;
  }
  const auto h = gaussian_rn(oplim::make_builtin("example-5.2").spec, 4);
  const double exact = oplim::second_moment_gaussian(h);
  const auto mc = oplim::second_moment_mc(h, cfg(1'000'000));
  EXPECT_LE(std::abs(mc.mean - exact), 3.0 * mc.std_error);
}

TEST(Transport, GaussianLinear) {
  const auto h = gaussian_rn(oplim::make_builtin("example-5.2").spec, 3);
  const oplim::TestFunction box = [](std::span<const double> x) {
    return x[0] > -0.5 && x[0] < 1.0 && x[1] > 0.0 ? 1.0 : 0.0;
  };
  const oplim::TestFunction smooth = [](std::span<const double> x) {
    return std::cos(x[0]) * std::exp(-x[2] * x[2]);
  };
  for (const auto &g : {box, smooth}) {
    const auto r = oplim::transport_check(h, g, cfg());
    EXPECT_TRUE(r.pass) << r.difference.mean << " vs " << r.tolerance;
    EXPECT_GT(r.tolerance, 0.0);
  }
}

TEST(Transport, TriangularShift) {
  const auto b = oplim::make_builtin("triangular");
  const RnDerivative h(oplim::truncate(b.spec, 4), b.measure);
  const oplim::TestFunction g = [](std::span<const double> x) {
    return x[1] > 0.1 && x[1] < 0.6 ? 1.0 + x[0] * x[0] : 0.0;
  };
  const auto r = oplim::transport_check(h, g, cfg());
  EXPECT_TRUE(r.pass) << r.difference.mean << " vs " << r.tolerance;
}

TEST(SupBound, TwoStepFactors) {
  const auto spec = SymbolSpec::triangular_shift(
      "t", [](std::size_t) { return 1.0 / 6.0; }, oplim::ShiftProfile::smooth_ramp);
  const ProductMeasure mu({oplim::build_step_density(1.5), oplim::build_step_density(1.5)});
  const RnDerivative h(oplim::truncate(spec, 2), mu);
  const auto s = oplim::sup_bound_triangular(h, 5, 20'000);
  EXPECT_DOUBLE_EQ(s.upper, 2.25);
  EXPECT_GT(s.sampled_max, 1.0);
  EXPECT_LE(s.sampled_max, s.upper * (1.0 + 1e-12));
  EXPECT_EQ(s.argmax.size(), 2u);
  EXPECT_DOUBLE_EQ(h.eval(s.argmax), s.sampled_max);
}

TEST(SupBound, BuiltinTriangular) {
  const auto b = oplim::make_builtin("triangular");
  for (std::size_t n : {1, 3, 6}) {
    const RnDerivative h(oplim::truncate(b.spec, n), b.measure);
    const auto s = oplim::sup_bound_triangular(h, 9, 5'000);
    double prod = 1.0;
    for (std::size_t i = 1; i <= n; ++i) {
      prod *= 1.0 + std::ldexp(1.0, -static_cast<int>(i));
    }
    EXPECT_NEAR(s.upper, prod, 1e-14);
    EXPECT_LE(s.sampled_max, s.upper * (1.0 + 1e-12));
  }
}

TEST(SupBound, RejectsOtherVariants) {
  try {
    (void)oplim::sup_bound_triangular(gaussian_rn(constant_diagonal(0.5), 2));
    FAIL();
  } catch (const oplim::Error &e) {
    EXPECT_EQ(e.kind(), oplim::ErrorKind::variant_mismatch);
  }
  const auto hump = oplim::make_builtin("hump");
  const RnDerivative h(oplim::truncate(hump.spec, 3), hump.measure);
  try {
    (void)oplim::sup_bound_triangular(h);
    FAIL();
  } catch (const oplim::Error &e) {
    EXPECT_EQ(e.kind(), oplim::ErrorKind::variant_mismatch);
  }
}

TEST(SupBattery, Deterministic) {
  const auto mu = ProductMeasure::gaussian(0);
  const auto a = oplim::sup_battery(mu, 3, 1, 50);
  const auto b = oplim::sup_battery(mu, 3, 1, 50);
  ASSERT_EQ(a.size(), 1u + 12u + 50u);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a[0], std::vector<double>(3, 0.0));
}

} // namespace
