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

// Registry of named symbols with their reference measures and closed forms.

#include "oplim/error.hpp"
#include "oplim/family.hpp"
#include "oplim/measure.hpp"
#include "oplim/symbol.hpp"

#include <cmath>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace oplim {

/// Number of factors materialized for the hump family.
constexpr std::size_t kHumpFactors = 25;

/// Superdiagonal of the exp-inv-square band: with these entries every row
/// and column sum is below one, so each A_n is a contraction.
inline double exp_inv_square_super(std::size_t i) {
  const double t = 1.0 / static_cast<double>((i + 1) * (i + 1));
  return 0.5 * -std::expm1(-t);
}

inline double exp_inv_square_diag(std::size_t i) {
  return std::exp(-1.0 / static_cast<double>(i * i));
}

struct Builtin {
  std::string id;
  std::string summary;
  SymbolSpec spec;
  ProductMeasure measure;
  bool gaussian = true;
  bool row_finite = true;
  /// inf_n |det A_n| when known in closed form.
  std::optional<double> inf_abs_det;
  /// Density plan backing the measure (step families only).
  std::shared_ptr<const DensityFamilyPlan> plan;
};

namespace detail {

inline ProductMeasure step_measure() {
  return ProductMeasure(
      [](std::size_t i) { return build_step_density(default_alpha(i)); }, 0,
      "even-step alpha_i = 1 + 2^-i");
}

inline ProductMeasure plan_measure(std::shared_ptr<const DensityFamilyPlan> plan) {
  return ProductMeasure(
      [plan](std::size_t i) {
        if (i > plan->factors.size()) {
          throw Error(ErrorKind::invalid_parameter,
                      "hump family planned for " +
                          std::to_string(plan->factors.size()) +
                          " factors, factor " + std::to_string(i) +
                          " requested");
        }
        return plan->factor(i).eta;
      },
      0, "hump family eta_i");
}

} // namespace detail

inline std::vector<std::string> builtin_ids() {
  return {"identity",       "diagonal",   "diagonal-exp-inv-square",
          "exp-inv-square", "example-5.2", "triangular",
          "hump",           "non-row-finite"};
}

inline Builtin make_builtin(const std::string &id) {
  const double basel = std::numbers::pi * std::numbers::pi / 6.0;
  if (id == "identity") {
    return Builtin{id, "identity on the gaussian product",
                   SymbolSpec::diagonal(id, [](std::size_t) { return 1.0; }),
                   ProductMeasure::gaussian(0), true, true, 1.0, nullptr};
  }
  if (id == "diagonal" || id == "diagonal-exp-inv-square") {
    return Builtin{id, "diagonal a_i = exp(-1/i^2), gaussian product",
                   SymbolSpec::diagonal(id, exp_inv_square_diag),
                   ProductMeasure::gaussian(0), true, true, std::exp(-basel),
                   nullptr};
  }
  if (id == "exp-inv-square") {
    auto spec = SymbolSpec::banded(
        id,
        [](std::size_t i, std::size_t j) {
          if (j == i) {
            return exp_inv_square_diag(i);
          }
          return j == i + 1 ? exp_inv_square_super(i) : 0.0;
        },
        [](std::size_t i) { return RowSupport{i, i + 1}; });
    return Builtin{id,
                   "upper bidiagonal contraction, diagonal exp(-1/i^2), "
                   "superdiagonal (1 - exp(-1/(i+1)^2))/2",
                   std::move(spec), ProductMeasure::gaussian(0), true, true,
                   std::exp(-basel), nullptr};
  }
  if (id == "example-5.2") {
    auto spec = SymbolSpec::banded(
        id,
        [](std::size_t i, std::size_t j) {
          if (j == i) {
            return 1.0;
          }
          return j == i + 1 ? std::ldexp(1.0, -static_cast<int>(i + j)) : 0.0;
        },
        [](std::size_t i) { return RowSupport{i, i + 1}; });
    return Builtin{id,
                   "unit upper bidiagonal, superdiagonal 2^-(2i+1), "
                   "gaussian product",
                   std::move(spec), ProductMeasure::gaussian(0), true, true,
                   1.0, nullptr};
  }
  if (id == "triangular") {
    auto spec = SymbolSpec::triangular_shift(
        id,
        [](std::size_t i) { return 0.5 * (1.0 - 1.0 / default_alpha(i)); },
        ShiftProfile::smooth_ramp);
    return Builtin{id,
                   "triangular shift x_i + p_i(x_{i-1}) over even-step "
                   "densities alpha_i = 1 + 2^-i, M_i = step width",
                   std::move(spec), detail::step_measure(), false, true, 1.0,
                   nullptr};
  }
  if (id == "hump") {
    auto plan = std::make_shared<const DensityFamilyPlan>(
        build_hump_plan(kHumpFactors, 3.0));
    auto spec = SymbolSpec::triangular_shift(
        id, [plan](std::size_t i) { return plan->factor(i).shift_bound; },
        ShiftProfile::smooth_ramp);
    return Builtin{id,
                   "triangular shift over the hump family (r = 3, humps at "
                   "indices 3i-1)",
                   std::move(spec), detail::plan_measure(plan), false, true,
                   1.0, plan};
  }
  if (id == "non-row-finite") {
    auto spec = SymbolSpec::banded(
        id,
        [](std::size_t i, std::size_t j) {
          if (j == i) {
            return 1.0;
          }
          return j > i ? std::ldexp(1.0, -static_cast<int>(i + j)) : 0.0;
        },
        [](std::size_t i) { return RowSupport{i, std::nullopt}; });
    return Builtin{id,
                   "unit upper triangular with a_ij = 2^-(i+j) for every j > i",
                   std::move(spec), ProductMeasure::gaussian(0), true, false,
                   1.0, nullptr};
  }
  std::string known;
  for (const auto &k : builtin_ids()) {
    known += (known.empty() ? "" : ", ") + k;
  }
  throw Error(ErrorKind::usage_error,
              "unknown builtin '" + id + "' (known: " + known + ")");
}

} // namespace oplim
