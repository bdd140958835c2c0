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

// JSON and CSV rendering of estimates, certificates and reports.

#include "oplim/criteria.hpp"
#include "oplim/family.hpp"
#include "oplim/measure.hpp"

#include <json.hpp>

#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace oplim {

using json = nlohmann::json;

/// Non-finite numbers become the strings "+inf", "-inf", "nan".
inline json number(double v) {
  if (std::isnan(v)) {
    return "nan";
  }
  if (std::isinf(v)) {
    return v > 0 ? "+inf" : "-inf";
  }
  return v;
}

template <typename T> json optional_number(const std::optional<T> &v) {
  return v ? number(static_cast<double>(*v)) : json(nullptr);
}

inline void to_json(json &j, const McEstimate &e) {
  j = json{{"value", number(e.mean)},
           {"stderr", number(e.std_error)},
           {"n", e.n_samples},
           {"seed", e.seed},
           {"exact", e.exact}};
}

inline void to_json(json &j, const EvidenceRow &r) {
  j = json::object();
  j["n"] = r.n;
  if (r.det) j["det"] = number(*r.det);
  if (r.norm) j["norm"] = number(*r.norm);
  if (r.norm_lower) j["norm_lower"] = number(*r.norm_lower);
  if (r.norm_upper) j["norm_upper"] = number(*r.norm_upper);
  if (r.ess_sup) j["ess_sup"] = number(*r.ess_sup);
  if (r.m2_exact) j["m2_exact"] = number(*r.m2_exact);
  if (r.m2_mc) j["m2_mc"] = *r.m2_mc;
  if (r.bound) j["bound"] = number(*r.bound);
  if (!r.note.empty()) j["note"] = r.note;
}

inline json certificate_json(const Certificate &c) {
  json cert{{"verdict", std::string(to_string(c.verdict))}};
  if (!c.reason.empty()) cert["reason"] = c.reason;
  if (!c.scope.empty()) cert["scope"] = c.scope;
  if (c.norm_sq) cert["norm_sq"] = number(*c.norm_sq);
  if (c.analytic_norm_sq) cert["analytic_norm_sq"] = number(*c.analytic_norm_sq);
  if (c.witness_index) {
    cert["witness"] = json{{"index", *c.witness_index},
                           {"lower_bound", optional_number(c.lower_bound)},
                           {"point", c.witness_point}};
  }
  if (c.fitted_slope) cert["fitted_slope"] = number(*c.fitted_slope);
  if (c.growth_constant) cert["growth_constant"] = number(*c.growth_constant);
  cert["n_max"] = c.n_max;
  return json{{"certificate", cert}, {"evidence", c.evidence}};
}

inline json checks_json(const std::vector<ConditionCheck> &checks) {
  json out = json::array();
  for (const auto &c : checks) {
    out.push_back(json{{"id", c.id},
                       {"index", c.index},
                       {"pass", c.pass},
                       {"value", number(c.value)},
                       {"bound", number(c.bound)},
                       {"detail", c.detail}});
  }
  return out;
}

/// Flattens an array of flat objects into CSV; nested values are dumped as
/// JSON text. Columns follow first appearance.
inline std::string to_csv(const json &rows) {
  std::vector<std::string> cols;
  for (const auto &r : rows) {
    for (const auto &[k, v] : r.items()) {
      if (std::find(cols.begin(), cols.end(), k) == cols.end()) {
        cols.push_back(k);
      }
    }
  }
  std::ostringstream out;
  for (std::size_t c = 0; c < cols.size(); ++c) {
    out << (c ? "," : "") << cols[c];
  }
  out << '\n';
  for (const auto &r : rows) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      out << (c ? "," : "");
      if (!r.contains(cols[c])) {
        continue;
      }
      const json &v = r.at(cols[c]);
      if (v.is_string()) {
        out << v.get<std::string>();
      } else if (v.is_object() && v.contains("value") && v.contains("stderr")) {
        out << v["value"].dump() << ";" << v["stderr"].dump();
      } else {
        std::string s = v.dump();
        std::replace(s.begin(), s.end(), ',', ';');
        out << s;
      }
    }
    out << '\n';
  }
  return out.str();
}

} // namespace oplim
