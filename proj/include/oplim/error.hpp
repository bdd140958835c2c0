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

#include <stdexcept>
#include <string>
#include <string_view>

namespace oplim {

enum class ErrorKind {
  invalid_parameter,
  construction_failed,
  not_invertible,
  horizon_undefined,
  integrand_error,
  moment_divergent,
  variant_mismatch,
  schema_error,
  usage_error,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
  case ErrorKind::invalid_parameter: return "invalid-parameter";
  case ErrorKind::construction_failed: return "construction-failed";
  case ErrorKind::not_invertible: return "not-invertible";
  case ErrorKind::horizon_undefined: return "horizon-undefined";
  case ErrorKind::integrand_error: return "integrand-error";
  case ErrorKind::moment_divergent: return "moment-divergent";
  case ErrorKind::variant_mismatch: return "variant-mismatch";
  case ErrorKind::schema_error: return "schema-error";
  case ErrorKind::usage_error: return "usage-error";
  }
  return "unknown";
}

/// Every failure raised by the library carries one of the kinds above.
class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string &what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

} // namespace oplim
