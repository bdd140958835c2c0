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
// Loads a symbol from a spec file, then evaluates the Radon-Nikodym
// derivative of its truncations and checks the transport identity.
//
//   demo_composition [spec.json] [n]

#include "oplim.hpp"

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

int main(int argc, char **argv) {
  const std::string path =
      argc > 1 ? argv[1] : std::string(OPLIM_SPEC_DIR) + "/bidiagonal.json";
  const std::size_t n = argc > 2 ? std::strtoul(argv[2], nullptr, 10) : 4;
  try {
    const oplim::Builtin b = oplim::load_symbol_spec(path);
    const oplim::RnDerivative h(oplim::truncate(b.spec, n), b.measure);
    std::printf("symbol %s, n = %zu, rule %s\n", b.id.c_str(), n,
                std::string(oplim::to_string(h.rule())).c_str());

    std::vector<double> x(n, 1.0);
    std::printf("h(1,...,1) = %.6f\n", h.eval(x));

    oplim::McConfig cfg;
    cfg.n_samples = 200'000;
    const auto mass = oplim::mass_mc(h, cfg);
    std::printf("int h dmu  = %.5f +- %.5f\n", mass.mean, mass.std_error);

    if (h.rule() == oplim::RnRule::gaussian_linear) {
      const auto m2 = oplim::second_moment_mc(h, cfg);
      std::printf("int h^2    = %.5f +- %.5f (exact %.5f)\n", m2.mean, m2.std_error,
                  oplim::second_moment_gaussian(h));
    }

    // g = indicator of x_1 > 0
    const auto r = oplim::transport_check(
        h, [](std::span<const double> y) { return y[0] > 0.0 ? 1.0 : 0.0; }, cfg);
    std::printf("transport  %.5f vs %.5f, diff %.2e (tol %.2e) %s\n", r.lhs.mean,
                r.rhs.mean, r.difference.mean, r.tolerance, r.pass ? "ok" : "FAIL");
    return r.pass ? 0 : 2;
  } catch (const oplim::Error &e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
