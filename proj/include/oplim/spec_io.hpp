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

// Symbol-spec files (schema "oplim-symbol/1").
//
//   {
//     "schema": "oplim-symbol/1",
//     "id": "my-band",
//     "variant": "banded-linear" | "diagonal" | "triangular-shift",
//     "band": {"rows": [{"j": 1, "cols": [{"k": 1, "a": 1.0}, ...]}, ...],
//              "tail_diag": 1.0},
//     "diag": [0.5, 0.8, ...], "diag_tail": 1.0,
//     "shifts": [{"M": 0.1, "profile": "smooth-ramp"}, ...],
//     "measure": "gaussian" | "even-step"
//   }
//
// Rows of "band" not listed are diagonal with value tail_diag (default 1).
// Diagonal entries past the list take diag_tail (default: last listed).
// shifts[q] describes p_{q+2}; later coordinates are not shifted.

#include "oplim/builtins.hpp"
#include "oplim/error.hpp"

#include <json.hpp>

#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace oplim {

inline constexpr const char *kSymbolSchema = "oplim-symbol/1";

namespace detail {

using json = nlohmann::json;

[[noreturn]] inline void schema_fail(const std::string &path,
                                     const std::string &msg) {
  throw Error(ErrorKind::schema_error, "at " + (path.empty() ? "/" : path) +
                                           ": " + msg);
}

inline const json &require(const json &obj, const std::string &path,
                           const char *key) {
  if (!obj.is_object() || !obj.contains(key)) {
    schema_fail(path, std::string("missing field '") + key + "'");
  }
  return obj.at(key);
}

inline double number_at(const json &v, const std::string &path) {
  if (!v.is_number()) {
    schema_fail(path, "expected a number, got " + std::string(v.type_name()));
  }
  return v.get<double>();
}

inline std::size_t index_at(const json &v, const std::string &path) {
  if (!v.is_number_integer() || v.get<long long>() < 1) {
    schema_fail(path, "expected a positive integer index");
  }
  return v.get<std::size_t>();
}

inline std::string line_col(const std::string &text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t q = 0; q < byte && q < text.size(); ++q) {
    if (text[q] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

} // namespace detail

inline Builtin parse_symbol_spec(const std::string &text) {
  using detail::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error &e) {
    throw Error(ErrorKind::schema_error,
                "malformed JSON at " + detail::line_col(text, e.byte) + ": " +
                    e.what());
  }
  if (!doc.is_object()) {
    detail::schema_fail("", "top level must be an object");
  }
  const json &schema = detail::require(doc, "", "schema");
  if (!schema.is_string() || schema.get<std::string>() != kSymbolSchema) {
    detail::schema_fail("/schema", std::string("expected \"") + kSymbolSchema +
                                       "\"");
  }
  const std::string id = doc.value("id", std::string("custom"));
  const json &variant_j = detail::require(doc, "", "variant");
  if (!variant_j.is_string()) {
    detail::schema_fail("/variant", "expected a string");
  }
  const std::string variant = variant_j.get<std::string>();

  std::string measure = "gaussian";
  if (doc.contains("measure")) {
    if (!doc["measure"].is_string()) {
      detail::schema_fail("/measure", "expected a string");
    }
    measure = doc["measure"].get<std::string>();
    if (measure != "gaussian" && measure != "even-step") {
      detail::schema_fail("/measure",
                          "unknown measure '" + measure +
                              "' (gaussian, even-step)");
    }
  }

  Builtin out{id,
              "loaded from spec file",
              SymbolSpec::diagonal(id, [](std::size_t) { return 1.0; }),
              measure == "gaussian" ? ProductMeasure::gaussian(0)
                                    : detail::step_measure(),
              measure == "gaussian",
              true,
              std::nullopt,
              nullptr};

  if (variant == "diagonal") {
    const json &d = detail::require(doc, "", "diag");
    if (!d.is_array() || d.empty()) {
      detail::schema_fail("/diag", "expected a non-empty array");
    }
    auto values = std::make_shared<std::vector<double>>();
    for (std::size_t q = 0; q < d.size(); ++q) {
      values->push_back(detail::number_at(d[q], "/diag/" + std::to_string(q)));
    }
    const double tail = doc.contains("diag_tail")
                            ? detail::number_at(doc["diag_tail"], "/diag_tail")
                            : values->back();
    out.spec = SymbolSpec::diagonal(id, [values, tail](std::size_t i) {
      return i <= values->size() ? (*values)[i - 1] : tail;
    });
  } else if (variant == "banded-linear") {
    const json &band = detail::require(doc, "", "band");
    const json &rows = detail::require(band, "/band", "rows");
    if (!rows.is_array()) {
      detail::schema_fail("/band/rows", "expected an array");
    }
    auto table = std::make_shared<std::map<std::size_t, std::map<std::size_t, double>>>();
    for (std::size_t q = 0; q < rows.size(); ++q) {
      const std::string rp = "/band/rows/" + std::to_string(q);
      const std::size_t j =
          detail::index_at(detail::require(rows[q], rp, "j"), rp + "/j");
      const json &cols = detail::require(rows[q], rp, "cols");
      if (!cols.is_array() || cols.empty()) {
        detail::schema_fail(rp + "/cols", "expected a non-empty array");
      }
      auto &row = (*table)[j];
      for (std::size_t c = 0; c < cols.size(); ++c) {
        const std::string cp = rp + "/cols/" + std::to_string(c);
        const std::size_t k =
            detail::index_at(detail::require(cols[c], cp, "k"), cp + "/k");
        row[k] = detail::number_at(detail::require(cols[c], cp, "a"), cp + "/a");
      }
    }
    const double tail = band.contains("tail_diag")
                            ? detail::number_at(band["tail_diag"], "/band/tail_diag")
                            : 1.0;
    out.spec = SymbolSpec::banded(
        id,
        [table, tail](std::size_t i, std::size_t j) {
          const auto it = table->find(i);
          if (it == table->end()) {
            return i == j ? tail : 0.0;
          }
          const auto c = it->second.find(j);
          return c == it->second.end() ? 0.0 : c->second;
        },
        [table](std::size_t i) {
          const auto it = table->find(i);
          if (it == table->end()) {
            return RowSupport{i, i};
          }
          return RowSupport{it->second.begin()->first,
                            it->second.rbegin()->first};
        });
  } else if (variant == "triangular-shift") {
    const json &shifts = detail::require(doc, "", "shifts");
    if (!shifts.is_array()) {
      detail::schema_fail("/shifts", "expected an array");
    }
    auto bounds = std::make_shared<std::vector<double>>();
    ShiftProfile profile = ShiftProfile::smooth_ramp;
    for (std::size_t q = 0; q < shifts.size(); ++q) {
      const std::string sp = "/shifts/" + std::to_string(q);
      const double m = detail::number_at(detail::require(shifts[q], sp, "M"),
                                         sp + "/M");
      if (m < 0.0) {
        detail::schema_fail(sp + "/M", "shift bound must be >= 0");
      }
      bounds->push_back(m);
      const std::string prof = shifts[q].value("profile", std::string("smooth-ramp"));
      if (prof == "zero") {
        profile = ShiftProfile::zero;
      } else if (prof != "smooth-ramp") {
        detail::schema_fail(sp + "/profile",
                            "unknown profile '" + prof + "' (smooth-ramp, zero)");
      }
    }
    out.spec = SymbolSpec::triangular_shift(
        id,
        [bounds](std::size_t i) {
          return i >= 2 && i - 2 < bounds->size() ? (*bounds)[i - 2] : 0.0;
        },
        profile);
  } else {
    detail::schema_fail("/variant", "unknown variant '" + variant +
                                        "' (banded-linear, diagonal, "
                                        "triangular-shift)");
  }
  return out;
}

inline Builtin load_symbol_spec(const std::string &path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorKind::usage_error, "cannot open spec file '" + path + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_symbol_spec(buf.str());
}

} // namespace oplim
