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

// oplim command line: analyze, verify-example, convergence,
// build-densities, norm.
//
// Exit codes: 0 pass or definitive verdict, 1 error, 2 inconclusive or a
// failed assertion.

#include "oplim.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <numbers>
#include <string>
#include <vector>

namespace {

using oplim::json;

struct RunConfig {
  std::string command;
  std::string spec_path;
  std::string builtin;
  std::size_t n_max = 0; // 0: command default
  std::size_t samples = 1'000'000;
  std::uint64_t seed = oplim::kDefaultSeed;
  unsigned workers = 0;
  std::string out;
  std::string format = "json";
  bool no_timestamp = false;
  // command specific
  std::string criterion = "auto";
  std::string example;
  std::size_t k = 2;
  double r = 3.0;
};

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitInconclusive = 2;

oplim::McConfig mc_config(const RunConfig &c) {
  oplim::McConfig m;
  m.n_samples = c.samples;
  m.seed = c.seed;
  m.workers = c.workers;
  return m;
}

oplim::Builtin resolve_symbol(const RunConfig &c) {
  if (!c.spec_path.empty() && !c.builtin.empty()) {
    throw oplim::Error(oplim::ErrorKind::usage_error,
                       "give either --spec or --builtin, not both");
  }
  if (!c.spec_path.empty()) {
    return oplim::load_symbol_spec(c.spec_path);
  }
  if (c.builtin.empty()) {
    throw oplim::Error(oplim::ErrorKind::usage_error,
                       "a symbol is required: --spec FILE or --builtin ID");
  }
  return oplim::make_builtin(c.builtin);
}

std::string utc_now() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json header(const RunConfig &c) {
  json cfg{{"n_max", c.n_max},     {"samples", c.samples},
           {"seed", c.seed},       {"workers", c.workers},
           {"format", c.format}};
  if (!c.spec_path.empty()) cfg["spec"] = c.spec_path;
  if (!c.builtin.empty()) cfg["builtin"] = c.builtin;
  if (c.command == "analyze") cfg["criterion"] = c.criterion;
  if (c.command == "verify-example") cfg["example"] = c.example;
  if (c.command == "convergence") cfg["k"] = c.k;
  if (c.command == "build-densities") cfg["r"] = c.r;
  json h{{"tool", "oplim"}, {"command", c.command}, {"config", cfg}};
  if (!c.no_timestamp) {
    h["timestamp"] = utc_now();
  }
  return h;
}

void emit(const RunConfig &c, const json &report, const json &table) {
  std::string text;
  if (c.format == "csv") {
    text = oplim::to_csv(table);
  } else {
    text = report.dump(2) + "\n";
  }
  if (c.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(c.out, std::ios::binary);
  if (!f) {
    throw oplim::Error(oplim::ErrorKind::usage_error,
                       "cannot write '" + c.out + "'");
  }
  f << text;
}

json symbol_json(const oplim::Builtin &b) {
  return json{{"id", b.spec.id()},
              {"variant", std::string(oplim::to_string(b.spec.variant()))},
              {"summary", b.summary},
              {"measure", b.measure.label()}};
}

// ---------------------------------------------------------------------------
// analyze

int cmd_analyze(RunConfig c) {
  if (c.n_max == 0) c.n_max = 16;
  const oplim::Builtin b = resolve_symbol(c);
  json report = header(c);
  report["symbol"] = symbol_json(b);
  oplim::Certificate cert;

  if (b.spec.is_linear()) {
    if (!b.gaussian) {
      cert.reason = "no criterion for linear symbols over non-gaussian factors";
    } else {
      oplim::SufgauOptions so;
      so.inf_abs_det = b.inf_abs_det;
      const auto bounded = oplim::check_sufgau(b.spec, c.n_max, so);
      oplim::DenseOptions dopt;
      dopt.mc = mc_config(c);
      oplim::Certificate dense;
      try {
        dense = oplim::check_dense_definiteness_gaussian(b.spec, c.n_max, dopt);
      } catch (const oplim::Error &e) {
        if (e.kind() != oplim::ErrorKind::not_invertible) throw;
        dense.reason = e.what();
      }
      if (c.criterion == "dense") {
        cert = dense;
      } else {
        cert = bounded;
      }
      report["moments"] = oplim::certificate_json(dense);
    }
  } else if (b.plan) {
    const std::size_t i_max = std::max<std::size_t>(1, (c.n_max - 1) / 3);
    cert = oplim::unboundedness_witness_hump(b.spec, b.measure, *b.plan, i_max);
  } else {
    bool ok = true;
    double norm_sq = 0.0;
    for (std::size_t n = 1; n <= c.n_max; ++n) {
      const oplim::RnDerivative h(oplim::truncate(b.spec, n), b.measure);
      oplim::EvidenceRow row;
      row.n = n;
      try {
        const auto sb = oplim::sup_bound_triangular(h, c.seed);
        row.bound = sb.upper;
        row.ess_sup = sb.sampled_max;
        norm_sq = std::max(norm_sq, sb.upper);
        ok = ok && sb.sampled_max <= sb.upper;
      } catch (const oplim::Error &e) {
        if (e.kind() != oplim::ErrorKind::variant_mismatch) throw;
        cert.reason = e.what();
        ok = false;
        break;
      }
      cert.evidence.push_back(row);
    }
    cert.n_max = c.n_max;
    if (ok) {
      cert.verdict = oplim::Verdict::bounded;
      cert.norm_sq = norm_sq;
      cert.scope = "certified upper bound prod alpha_i for n <= " +
                   std::to_string(c.n_max);
    } else if (cert.reason.empty()) {
      cert.reason = "sampled h exceeded prod alpha_i";
    }
  }
  const json body = oplim::certificate_json(cert);
  report.update(body);
  emit(c, report, body["evidence"]);
  return cert.verdict == oplim::Verdict::inconclusive ? kExitInconclusive
                                                      : kExitOk;
}

// ---------------------------------------------------------------------------
// verify-example

struct Checks {
  json rows = json::array();
  bool all = true;
  void add(const std::string &name, bool pass, json detail = nullptr) {
    rows.push_back(json{{"check", name}, {"pass", pass}, {"detail", detail}});
    all = all && pass;
  }
};

json verify_reciprocal(const RunConfig &c, Checks &ck) {
  const auto rep = oplim::demo_reciprocal_symbol(std::max<std::size_t>(c.n_max, 100));
  ck.add("ratio^2 = n exactly", rep.ratio_exact);
  ck.add("restricted probe <= bound k", rep.restricted_ok);
  json rows = json::array();
  for (const auto &r : rep.rows) {
    rows.push_back(json{{"n", r.n},
                        {"image_norm_sq", r.image_norm_sq},
                        {"f_norm_sq", r.f_norm_sq},
                        {"ratio_sq", r.ratio_sq},
                        {"restricted_bound", r.restricted_bound},
                        {"restricted_probe", r.restricted_probe}});
  }
  return json{{"rows", rows}, {"note", rep.note}};
}

json verify_cyclic(const RunConfig &c, Checks &ck) {
  const auto rep = oplim::demo_cyclic_shift(std::max<std::size_t>(c.n_max, 8));
  const auto id = oplim::demo_cyclic_shift(std::max<std::size_t>(c.n_max, 8), true);
  ck.add("pairwise image distance sqrt 2",
         rep.min_pairwise == std::sqrt(2.0) && rep.max_pairwise == std::sqrt(2.0),
         json{{"min", rep.min_pairwise}, {"max", rep.max_pairwise}});
  ck.add("e_1 not in the limit domain", !rep.limit_exists);
  ck.add("identity variant has a limit", id.limit_exists);
  json rows = json::array();
  for (const auto &r : rep.rows) {
    rows.push_back(json{{"n", r.n}, {"image", "e_" + std::to_string(r.image_support)},
                        {"distance_to_previous", r.distance_to_previous}});
  }
  return json{{"rows", rows},
              {"finding", "lim C_n is not densely defined: e_1 has no limit image"}};
}

json verify_example_52(const RunConfig &c, Checks &ck) {
  const auto b = oplim::make_builtin("example-5.2");
  const std::size_t n_norm = std::max<std::size_t>(c.n_max, 64);
  json rows = json::array();
  bool norms_ok = true;
  bool flags_ok = true;
  bool dets_ok = true;
  const auto mu = oplim::ProductMeasure::gaussian(n_norm);
  for (std::size_t n = 1; n <= n_norm; ++n) {
    const auto t = oplim::truncate(b.spec, n);
    const auto nr = oplim::operator_norm(t);
    const oplim::RnDerivative h(t, mu);
    const auto es = oplim::ess_sup_gaussian_linear(h);
    dets_ok = dets_ok && t.log_abs_det() == 0.0 && t.det_sign() == 1;
    if (n >= 2) {
      norms_ok = norms_ok && nr.lower > 1.0 && nr.upper < std::sqrt(2.0);
      flags_ok = flags_ok && !es.finite;
    }
    rows.push_back(json{{"n", n},
                        {"norm", oplim::optional_number(nr.value)},
                        {"norm_lower", nr.lower},
                        {"norm_upper", nr.upper},
                        {"ess_sup", oplim::number(es.value)},
                        {"det", t.det_sign() * std::exp(t.log_abs_det())}});
  }
  ck.add("|A_n| in (1, sqrt 2) for 2 <= n <= " + std::to_string(n_norm), norms_ok);
  ck.add("ess sup h = +inf for n >= 2", flags_ok);
  ck.add("det A_n = 1 exactly", dets_ok);

  oplim::DenseOptions dopt;
  dopt.mc = mc_config(c);
  const auto dense = oplim::check_dense_definiteness_gaussian(b.spec, 16, dopt);
  ck.add("second moments finite for n <= 16", dense.evidence.size() == 16,
         json{{"trend_test_passed", dense.verdict == oplim::Verdict::densely_defined}});
  const auto bounded = oplim::check_sufgau(b.spec, 16);
  ck.add("boundedness check stops at condition (iii)",
         bounded.verdict == oplim::Verdict::inconclusive &&
             bounded.reason.starts_with("condition (iii)"),
         bounded.reason);
  json mc_rows = json::array();
  for (std::size_t n : {2, 4, 8}) {
    const oplim::RnDerivative h(oplim::truncate(b.spec, n), mu);
    const double exact = oplim::second_moment_gaussian(h);
    const auto est = oplim::second_moment_mc(
        h, mc_config(c).with_seed(oplim::derive_seed(c.seed, n)));
    const bool ok = std::abs(est.mean - exact) <= 3.0 * est.std_error;
    ck.add("MC second moment matches closed form, n=" + std::to_string(n), ok);
    mc_rows.push_back(json{{"n", n}, {"exact", exact}, {"mc", est}});
  }
  return json{{"norms", rows},
              {"moments", oplim::certificate_json(dense)},
              {"mc_vs_exact", mc_rows}};
}

json verify_sufgau_builtin(const std::string &id, const RunConfig &c, Checks &ck) {
  const auto b = oplim::make_builtin(id);
  oplim::SufgauOptions so;
  so.inf_abs_det = b.inf_abs_det;
  const std::size_t n = std::max<std::size_t>(c.n_max, 64);
  const auto cert = oplim::check_sufgau(b.spec, n, so);
  ck.add("verdict bounded", cert.verdict == oplim::Verdict::bounded, cert.reason);
  double partial = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    partial += 1.0 / static_cast<double>(i * i);
  }
  if (cert.norm_sq) {
    ck.add("norm_sq at n_max matches the partial product",
           std::abs(*cert.norm_sq - std::exp(partial)) <= 1e-3,
           json{{"norm_sq", *cert.norm_sq}, {"partial_product", std::exp(partial)}});
  }
  const double closed = std::exp(std::numbers::pi * std::numbers::pi / 6.0);
  ck.add("closed-form norm_sq exp(pi^2/6)",
         cert.analytic_norm_sq && std::abs(*cert.analytic_norm_sq - closed) <= 1e-12,
         oplim::optional_number(cert.analytic_norm_sq));
  return oplim::certificate_json(cert);
}

json verify_triangular(const RunConfig &c, Checks &ck) {
  const auto b = oplim::make_builtin("triangular");
  json rows = json::array();
  for (std::size_t n : {2, 4, 8}) {
    const oplim::RnDerivative h(oplim::truncate(b.spec, n), b.measure);
    const auto sb = oplim::sup_bound_triangular(h, c.seed);
    const auto tr = oplim::transport_check(
        h, [](std::span<const double>) { return 1.0; },
        mc_config(c).with_seed(oplim::derive_seed(c.seed, n)));
    ck.add("sampled max <= prod alpha, n=" + std::to_string(n),
           sb.sampled_max <= sb.upper);
    ck.add("int h = 1 within 3 stderr, n=" + std::to_string(n), tr.pass);
    rows.push_back(json{{"n", n}, {"upper", sb.upper}, {"sampled_max", sb.sampled_max},
                        {"mass", tr.lhs}});
  }
  return json{{"rows", rows}};
}

json verify_hump(const RunConfig &c, Checks &ck) {
  const auto b = oplim::make_builtin("hump");
  const std::size_t ns[] = {2, 5, 8};
  const auto l2 = oplim::uniform_l2_bound_hump(b.spec, b.measure, *b.plan, ns,
                                               mc_config(c));
  ck.add("uniform L2 bound", l2.pass);
  const auto wit = oplim::unboundedness_witness_hump(b.spec, b.measure, *b.plan, 3);
  ck.add("witness growth slope >= log r - 0.1",
         wit.verdict == oplim::Verdict::unbounded_witness,
         json{{"slope", oplim::optional_number(wit.fitted_slope)},
              {"log_r", std::log(b.plan->r)}});
  json rows = json::array();
  for (const auto &r : l2.rows) {
    rows.push_back(json{{"n", r.n}, {"m2", r.m2}, {"bound", r.bound}, {"pass", r.pass}});
  }
  return json{{"uniform_l2", rows}, {"witness", oplim::certificate_json(wit)}};
}

json plan_json(const oplim::DensityFamilyPlan &plan) {
  json rows = json::array();
  for (const auto &f : plan.factors) {
    json r{{"index", f.index},
           {"alpha", f.alpha},
           {"step_width", f.step_width},
           {"M", f.shift_bound},
           {"hump", f.hump},
           {"kind", std::string(oplim::to_string(f.eta.kind()))},
           {"mass", f.eta.mass()},
           {"sup", f.eta.sup()}};
    if (f.hump) {
      r["beta"] = f.beta;
      r["a"] = f.a;
      r["b"] = f.b;
      r["k"] = f.rescale_k;
      if (f.eta.step4_params()) {
        r["x0"] = f.eta.step4_params()->shift;
        r["delta"] = f.eta.step4_params()->delta;
      }
    }
    rows.push_back(r);
  }
  return rows;
}

json verify_hump_build(const RunConfig &c, Checks &ck) {
  const std::size_t n = c.n_max ? c.n_max : 12;
  const auto plan = oplim::build_hump_plan(n, c.r);
  const auto checks = oplim::validate_plan(plan);
  ck.add("conditions (i)-(x) and renormalization", oplim::all_pass(checks));
  bool masses = true;
  for (const auto &f : plan.factors) {
    masses = masses && std::abs(f.rho.mass() - 1.0) <= 1e-12 &&
             std::abs(f.eta.mass() - 1.0) <= 1e-12;
  }
  ck.add("closed-form masses equal 1", masses);
  return json{{"factors", plan_json(plan)}, {"checks", oplim::checks_json(checks)}};
}

int cmd_verify(RunConfig c) {
  Checks ck;
  json data;
  const std::string &id = c.example;
  if (id == "reciprocal") data = verify_reciprocal(c, ck);
  else if (id == "cyclic") data = verify_cyclic(c, ck);
  else if (id == "example-5.2") data = verify_example_52(c, ck);
  else if (id == "diagonal" || id == "exp-inv-square") data = verify_sufgau_builtin(id, c, ck);
  else if (id == "triangular") data = verify_triangular(c, ck);
  else if (id == "hump") data = verify_hump(c, ck);
  else if (id == "appendix-build") data = verify_hump_build(c, ck);
  else {
    throw oplim::Error(oplim::ErrorKind::usage_error,
                       "unknown example '" + id +
                           "' (reciprocal, cyclic, example-5.2, diagonal, "
                           "exp-inv-square, triangular, hump, appendix-build)");
  }
  json report = header(c);
  report["example"] = id;
  report["checks"] = ck.rows;
  report["pass"] = ck.all;
  report["data"] = data;
  emit(c, report, ck.rows);
  return ck.all ? kExitOk : kExitInconclusive;
}

// ---------------------------------------------------------------------------

int cmd_convergence(RunConfig c) {
  const oplim::Builtin b = resolve_symbol(c);
  const std::size_t horizon = oplim::row_finite_horizon(b.spec, c.k);
  if (c.n_max == 0) c.n_max = horizon + 2;
  const auto battery = oplim::sigma_battery(b.measure, c.k);
  json tables = json::array();
  json flat = json::array();
  for (std::size_t q = 0; q < battery.size(); ++q) {
    const auto t = oplim::convergence_table(
        b.spec, b.measure, battery[q], c.n_max,
        mc_config(c).with_seed(oplim::derive_seed(c.seed, q)));
    json rows = json::array();
    for (const auto &r : t.rows) {
      json row{{"box", q}, {"m", r.m}, {"distance", r.distance}, {"symdiff", r.symdiff}};
      rows.push_back(row);
      flat.push_back(row);
    }
    tables.push_back(json{{"box", q}, {"rows", rows}});
  }
  json report = header(c);
  report["symbol"] = symbol_json(b);
  report["k"] = c.k;
  report["horizon"] = horizon;
  report["tables"] = tables;
  emit(c, report, flat);
  return kExitOk;
}

int cmd_build_densities(RunConfig c) {
  if (c.n_max == 0) c.n_max = 12;
  const auto plan = oplim::build_hump_plan(c.n_max, c.r);
  const auto checks = oplim::validate_plan(plan);
  json report = header(c);
  report["r"] = plan.r;
  report["factors"] = plan_json(plan);
  report["checks"] = oplim::checks_json(checks);
  report["pass"] = oplim::all_pass(checks);
  emit(c, report, report["factors"]);
  return oplim::all_pass(checks) ? kExitOk : kExitInconclusive;
}

int cmd_norm(RunConfig c) {
  if (c.n_max == 0) c.n_max = 16;
  const oplim::Builtin b = resolve_symbol(c);
  json rows = json::array();
  for (std::size_t n = 1; n <= c.n_max; ++n) {
    const auto t = oplim::truncate(b.spec, n);
    const auto nr = oplim::operator_norm(t);
    rows.push_back(json{{"n", n},
                        {"norm", oplim::optional_number(nr.value)},
                        {"lower", nr.lower},
                        {"upper", nr.upper},
                        {"iterations", nr.iterations},
                        {"converged", nr.converged},
                        {"det", t.det_sign() * std::exp(t.log_abs_det())}});
  }
  json report = header(c);
  report["symbol"] = symbol_json(b);
  report["norms"] = rows;
  emit(c, report, rows);
  return kExitOk;
}

} // namespace

int main(int argc, char **argv) {
  RunConfig c;
  CLI::App app{"oplim: composition operators on infinite product measures"};
  app.require_subcommand(1);

  auto add_common = [&c](CLI::App *s) {
    s->add_option("--spec", c.spec_path, "symbol-spec JSON file");
    s->add_option("--builtin", c.builtin, "builtin symbol id");
    s->add_option("--n-max", c.n_max, "largest truncation dimension");
    s->add_option("--samples", c.samples, "Monte Carlo samples")->check(CLI::PositiveNumber);
    s->add_option("--seed", c.seed, "base seed");
    s->add_option("--workers", c.workers, "worker threads (default: OPLIM_WORKERS or all cores)");
    s->add_option("--out", c.out, "output file (default: stdout)");
    s->add_option("--format", c.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    s->add_flag("--no-timestamp", c.no_timestamp, "omit the timestamp field");
  };

  auto *analyze = app.add_subcommand("analyze", "certificate for a symbol");
  add_common(analyze);
  analyze->add_option("--criterion", c.criterion, "auto, bounded or dense")
      ->check(CLI::IsMember({"auto", "bounded", "dense"}));

  auto *verify = app.add_subcommand("verify-example", "run a named check battery");
  add_common(verify);
  verify->add_option("id", c.example, "example id")->required();
  verify->add_option("--r", c.r, "hump ratio for appendix-build");

  auto *conv = app.add_subcommand("convergence", "cylinder convergence table");
  add_common(conv);
  conv->add_option("--k", c.k, "cylinder base dimension")->check(CLI::PositiveNumber);

  auto *dens = app.add_subcommand("build-densities", "build and validate the hump family");
  add_common(dens);
  dens->add_option("--r", c.r, "hump ratio");

  auto *norm = app.add_subcommand("norm", "spectral norms of the truncations");
  add_common(norm);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    return app.exit(e) == 0 ? kExitOk : kExitError;
  }

  try {
    if (*analyze) { c.command = "analyze"; return cmd_analyze(c); }
    if (*verify) { c.command = "verify-example"; return cmd_verify(c); }
    if (*conv) { c.command = "convergence"; return cmd_convergence(c); }
    if (*dens) { c.command = "build-densities"; return cmd_build_densities(c); }
    if (*norm) { c.command = "norm"; return cmd_norm(c); }
  } catch (const oplim::Error &e) {
    std::cerr << "oplim: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception &e) {
    std::cerr << "oplim: internal error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
