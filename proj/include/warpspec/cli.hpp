#pragma once

// Batch front door: config + subcommand -> CSV reports and a verdict line.
// Exit status: 0 success, 1 failed check or numerical failure, 2 input error.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "warpspec/conditions.hpp"
#include "warpspec/config.hpp"
#include "warpspec/counterexample.hpp"
#include "warpspec/csv.hpp"
#include "warpspec/geometry.hpp"
#include "warpspec/separation.hpp"
#include "warpspec/solver.hpp"
#include "warpspec/thresholds.hpp"

namespace warpspec::cli {

struct Invocation {
  std::string subcommand;
  std::string config_path;  ///< empty: schema defaults only
  std::string out_dir = ".";
  std::vector<std::string> overrides;
  std::optional<long> modes;
  std::optional<std::string> lambda_grid;
};

enum ExitStatus { ok = 0, check_failed = 1, input_error = 2 };

inline const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"check", "thresholds", "scan", "counterexample",
                                              "identity"};
  return names;
}

inline Config load_config(const Invocation& inv) {
  Config cfg = inv.config_path.empty() ? Config{} : Config::load(inv.config_path);
  for (const auto& o : inv.overrides) cfg.apply_override(o);
  const bool ce = inv.subcommand == "counterexample";
  if (inv.modes) {
    if (*inv.modes < 1) throw ConfigError("--modes must be at least 1");
    cfg.set(ce ? "counterexample.max_modes" : "scan.modes", std::to_string(*inv.modes), "--modes");
  }
  if (inv.lambda_grid) {
    const auto g = GridSpec::parse(*inv.lambda_grid);
    const std::string sec = ce ? "counterexample." : "scan.";
    cfg.set(sec + "lambda_lo", format_number(g.lo), "--lambda-grid");
    cfg.set(sec + "lambda_hi", format_number(g.hi), "--lambda-grid");
    cfg.set(sec + "lambda_step", format_number(g.step), "--lambda-grid");
  }
  return cfg;
}

inline WarpingProfile build_profile(const Config& cfg) {
  const auto kind = cfg.str("profile.kind");
  if (kind == "power_law") return WarpingProfile::power_law(cfg.num("profile.theta"), cfg.num("profile.r_min"));
  if (kind == "oscillatory_exp") return WarpingProfile::oscillatory_exp(cfg.num("profile.alpha"), cfg.num("profile.k"));
  if (kind == "exp_power") {
    return WarpingProfile::exp_power(cfg.num("profile.c"), cfg.num("profile.p"), cfg.num("profile.r_min"));
  }
  if (kind == "sampled") return WarpingProfile::from_csv(cfg.str("profile.file"));
  throw ConfigError("unknown profile.kind '" + kind + "'");
}

inline EndGeometry build_end(const Config& cfg) {
  auto profile = build_profile(cfg);
  const int n = static_cast<int>(cfg.integer("end.n"));
  const double r0 = cfg.given("end.r0") ? cfg.num("end.r0") : profile.r_min();
  std::vector<double> spectrum = cfg.given("end.eigenvalues")
                                     ? cfg.list("end.eigenvalues")
                                     : sphere_eigenvalues(n, static_cast<int>(cfg.integer("end.sphere_degree")));
  return EndGeometry(n, r0, std::move(profile), std::move(spectrum));
}

/// Comparison profile f for the Hessian band; "auto" mirrors the end's own
/// non-oscillating part.
inline std::optional<WarpingProfile> build_reference(const Config& cfg) {
  auto kind = cfg.str("reference.kind");
  if (kind == "auto") {
    const auto pk = cfg.str("profile.kind");
    if (pk == "power_law") return WarpingProfile::power_law(cfg.num("profile.theta"), cfg.num("profile.r_min"));
    if (pk == "oscillatory_exp") return make_power_decay_reference(cfg.num("profile.alpha"));
    if (pk == "exp_power") {
      return WarpingProfile::exp_power(cfg.num("profile.c"), cfg.num("profile.p"), cfg.num("profile.r_min"));
    }
    return std::nullopt;
  }
  if (kind == "none") return std::nullopt;
  if (kind == "power_law") return WarpingProfile::power_law(cfg.num("reference.theta"));
  if (kind == "exp_power") return WarpingProfile::exp_power(cfg.num("reference.c"), cfg.num("reference.p"));
  if (kind == "power_decay") return make_power_decay_reference(cfg.num("reference.alpha"));
  throw ConfigError("unknown reference.kind '" + kind + "'");
}

inline SolverOptions solver_options(const Config& cfg) {
  SolverOptions o;
  o.rtol = cfg.num("tolerances.rtol");
  o.atol = cfg.num("tolerances.atol");
  o.max_step = cfg.num("tolerances.max_step");
  o.segment_length = cfg.num("tolerances.segment_length");
  o.frequency_floor = cfg.num("tolerances.frequency_floor");
  if (!(o.rtol > 0.0 && o.atol > 0.0 && o.max_step > 0.0 && o.segment_length > 0.0 && o.frequency_floor > 0.0)) {
    throw ConfigError("integrator tolerances must be positive");
  }
  return o;
}

inline ClassifyOptions classify_options(const Config& cfg) {
  ClassifyOptions o;
  o.solver = solver_options(cfg);
  o.exponent_margin = cfg.num("tolerances.exponent_margin");
  o.oscillatory_band = cfg.num("tolerances.oscillatory_band");
  o.tail_mass_min = cfg.num("tolerances.tail_mass_min");
  o.fit_r2_min = cfg.num("tolerances.fit_r2_min");
  const auto bc = cfg.str("scan.boundary");
  if (bc == "dirichlet") {
    o.boundary = Boundary::dirichlet();
  } else if (bc == "neumann") {
    o.boundary = Boundary::neumann();
  } else if (bc == "robin") {
    o.boundary = Boundary::robin(cfg.num("scan.robin_c"));
  } else {
    throw ConfigError("unknown scan.boundary '" + bc + "'");
  }
  return o;
}

inline ConditionOptions condition_options(const Config& cfg) {
  ConditionOptions o;
  o.min_decay_exponent = cfg.num("tolerances.min_decay_exponent");
  o.negligible = cfg.num("tolerances.negligible");
  o.margin_snap = cfg.num("tolerances.margin_snap");
  o.grid.points_per_unit = cfg.num("tolerances.grid_points_per_unit");
  o.grid.max_points = static_cast<std::size_t>(cfg.integer("tolerances.grid_max_points"));
  if (!(o.grid.points_per_unit > 0.0) || o.grid.max_points < 3) throw ConfigError("grid tolerances must be positive");
  return o;
}

inline std::string sanitize(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

struct Context {
  Config cfg;
  std::filesystem::path out;
  std::ostream& log;

  std::ofstream file(const std::string& name) const { return open_output((out / name).string()); }
};

inline int run_check(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto end = build_end(cfg);
  const auto reference = build_reference(cfg);
  const auto opt = condition_options(cfg);
  const Window w{cfg.num("window.lo"), cfg.num("window.hi")};
  validate_window(w, end.r0);

  ConditionReport rep;
  auto given = [&](const char* key) { return cfg.given(std::string("constants.") + key); };
  auto c = [&](const char* key) { return cfg.num(std::string("constants.") + key); };
  if (given("a") && given("b")) {
    if (!reference) throw ConfigError("hessian band needs a reference profile (reference.kind)");
    rep.entries.push_back(check_hessian_band(end, *reference, c("a"), c("b"), w, opt));
  }
  if (given("A0") && given("B0")) rep.entries.push_back(check_A_bounds(end, c("A0"), c("B0"), w, opt));
  if (given("K3")) rep.entries.push_back(check_K3(end, c("K3"), w, opt));
  if (given("b1")) rep.entries.push_back(check_ricci(end, c("b1"), w, opt));
  if (given("curvature_a")) rep.entries.push_back(check_curvature_band(end, c("curvature_a"), w, opt));
  if (reference) rep.fitted = fit_constants(end, w, *reference, opt);

  {
    auto out = ctx.file("conditions.csv");
    CsvWriter csv(out);
    csv.row({"condition", "window_lo", "window_hi", "pass", "worst_margin", "argmin_r"});
    for (const auto& e : rep.entries) {
      csv.row({e.name, e.window.lo, e.window.hi, e.pass, e.worst_margin, e.argmin_r});
    }
  }
  if (rep.fitted) {
    auto out = ctx.file("fitted_constants.csv");
    CsvWriter csv(out);
    const auto& k = rep.fitted->constants;
    csv.row({"a", "b", "A0", "B0", "b1", "K3", "gamma", "satisfiable", "gap"});
    csv.row({k.a, k.b, k.A0, k.B0, k.b1, k.K3, k.gamma, rep.fitted->satisfiable, rep.fitted->gap});
  }
  std::size_t failed = 0;
  for (const auto& e : rep.entries) failed += !e.pass;
  auto verdict = ctx.file("verdict.txt");
  verdict << "check: " << rep.entries.size() - failed << "/" << rep.entries.size() << " conditions pass";
  if (rep.fitted) verdict << "; fitted constants " << rep.fitted->message;
  verdict << '\n';
  return failed ? check_failed : ok;
}

inline HypothesisConstants constants_from(const Config& cfg) {
  HypothesisConstants k;
  k.n = static_cast<int>(cfg.integer("end.n"));
  k.a = cfg.num("constants.a");
  k.b = cfg.num("constants.b");
  k.A0 = cfg.num("constants.A0");
  k.B0 = cfg.num("constants.B0");
  k.b1 = cfg.num("constants.b1");
  k.K3 = cfg.num("constants.K3");
  k.gamma = cfg.num("constants.gamma");
  if (cfg.given("constants.theta")) k.theta = cfg.num("constants.theta");
  return k;
}

inline int run_thresholds(const Context& ctx) {
  const auto k = constants_from(ctx.cfg);
  const double lambda = ctx.cfg.num("constants.lambda");
  const auto t = evaluate_thresholds(k);
  {
    auto out = ctx.file("thresholds.csv");
    CsvWriter csv(out);
    csv.row({"lambda1", "y1", "beta", "star8", "eta1"});
    csv.row({t.lambda1, t.y1, t.beta ? Field(*t.beta) : Field(""), t.star8, t.eta1(lambda)});
  }
  if (ctx.cfg.given("thresholds.gamma_sweep")) {
    const auto g = GridSpec::parse(ctx.cfg.str("thresholds.gamma_sweep"));
    auto out = ctx.file("gamma_sweep.csv");
    CsvWriter csv(out);
    csv.row({"gamma", "lambda1"});
    for (double gamma : arithmetic_grid(g.lo, g.hi, g.step)) {
      double value = std::numeric_limits<double>::quiet_NaN();
      try {
        value = exclusion_threshold(gamma, k.a, k.b, k.A0, k.B0, k.K3, k.b1, k.n);
      } catch (const ParameterError&) {
      }
      csv.row({gamma, value});
    }
  }
  auto verdict = ctx.file("verdict.txt");
  verdict << "thresholds: lambda1=" << format_number(t.lambda1) << " star8=" << format_number(t.star8) << '\n';
  return ok;
}

inline int run_scan(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto end = build_end(cfg);
  const double lo = cfg.num("scan.lambda_lo");
  if (!(lo > 0.0)) throw ConfigError("scan.lambda_lo must be positive");
  const auto lambdas = arithmetic_grid(lo, cfg.num("scan.lambda_hi"), cfg.num("scan.lambda_step"));
  const double X = cfg.given("scan.X") ? cfg.num("scan.X") : end.r0 + std::max(200.0, 100.0 / std::sqrt(lo));
  std::size_t modes = cfg.given("scan.modes") ? static_cast<std::size_t>(cfg.integer("scan.modes"))
                                               : modes_to_scan(end, lambdas.back(), X);
  if (modes < 1 || modes > end.cross_section_eigenvalues.size()) {
    throw ConfigError("scan.modes must lie in [1, " + std::to_string(end.cross_section_eigenvalues.size()) + "]");
  }
  std::vector<RadialOperator> ops;
  for (std::size_t i = 0; i < modes; ++i) ops.push_back(RadialOperator::from_end(end, i, X));
  const auto opt = classify_options(cfg);
  const auto rows = scan(ops, lambdas, opt, static_cast<unsigned>(cfg.integer("scan.threads")));

  std::size_t candidates = 0, oscillatory = 0;
  {
    auto out = ctx.file("scan.csv");
    CsvWriter csv(out);
    csv.row({"mode", "lambda", "classification", "tail_mass_ratio", "envelope_exponent", "fit_r2"});
    for (const auto& r : rows) {
      csv.row({r.mode, r.lambda, to_string(r.classification), r.tail_mass_ratio, r.envelope_exponent, r.fit_r2});
      candidates += r.classification == Classification::l2_candidate;
      oscillatory += r.classification == Classification::oscillatory;
    }
  }
  {
    auto out = ctx.file("scan_flux.csv");
    CsvWriter csv(out);
    csv.row({"mode", "lambda", "flux_ratio", "regular_slope", "bracket_lo", "bracket_hi"});
    for (const auto& r : rows) {
      csv.row({r.mode, r.lambda, r.flux_ratio, r.regular_slope, r.refinement ? Field(r.refinement->first) : Field(""),
               r.refinement ? Field(r.refinement->second) : Field("")});
    }
  }
  if (cfg.flag("scan.dump_potential")) {
    for (const auto& op : ops) {
      auto out = ctx.file("potential_" + std::to_string(op.mode()) + ".csv");
      CsvWriter csv(out);
      csv.row({"x", "q_" + std::to_string(op.mode())});
      for (double x : radial_grid({op.x0(), op.X()}, {})) csv.row({x, op.potential(x)});
    }
  }
  if (cfg.given("scan.dump_lambda")) {
    const auto mode = static_cast<std::size_t>(cfg.integer("scan.dump_mode"));
    const auto op = RadialOperator::from_end(end, mode, X);
    const auto t = integrate(op, cfg.num("scan.dump_lambda"), opt.boundary, opt.solver);
    auto out = ctx.file("trajectory.csv");
    CsvWriter csv(out);
    csv.row({"x", "w", "w_prime", "R", "phi"});
    for (std::size_t j = 0; j < t.size(); ++j) {
      csv.row({t.x[j], t.w(j), t.w_prime(j), t.amplitude(j), t.phase[j]});
    }
  }
  auto verdict = ctx.file("verdict.txt");
  verdict << "scan: " << rows.size() << " rows over " << modes << " modes; " << candidates << " L2_candidate, "
          << oscillatory << " oscillatory, " << rows.size() - candidates - oscillatory << " inconclusive\n";
  return ok;
}

inline int run_identity(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto end = build_end(cfg);
  const double bound = cfg.num("tolerances.identity_residual");
  const double quad = cfg.num("tolerances.quadrature");
  auto make_v = [](const std::string& kind, double e) {
    if (kind == "power") return RadialTestFunction::power(e);
    if (kind == "exponential") return RadialTestFunction::exponential(e);
    throw ConfigError("unknown identity.function '" + kind + "'");
  };
  struct Case {
    std::string label;
    double beta, s, t;
    RadialTestFunction v;
  };
  std::vector<Case> cases;
  cases.push_back({"configured", cfg.num("identity.beta"), cfg.given("identity.s") ? cfg.num("identity.s") : end.r0,
                   cfg.num("identity.t"), make_v(cfg.str("identity.function"), cfg.num("identity.exponent"))});
  const auto draws = cfg.integer("identity.random_draws");
  if (draws < 0) throw ConfigError("identity.random_draws must be nonnegative");
  std::mt19937_64 rng(static_cast<std::uint64_t>(cfg.integer("identity.seed")));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double top = std::min(end.profile.r_max(), end.r0 + 60.0);
  for (long i = 0; i < draws; ++i) {
    const double beta = -2.0 + 4.0 * unit(rng);
    const double s = end.r0 + (top - end.r0) * 0.5 * unit(rng);
    const double t = s + (top - s) * (0.05 + 0.95 * unit(rng));
    auto v = unit(rng) < 0.5 ? RadialTestFunction::power(-2.0 + 3.0 * unit(rng))
                             : RadialTestFunction::exponential(-1.0 + 1.2 * unit(rng));
    cases.push_back({"random_" + std::to_string(i), beta, s, t, std::move(v)});
  }
  std::size_t failed = 0;
  double worst = 0.0;
  {
    auto out = ctx.file("identity.csv");
    CsvWriter csv(out);
    csv.row({"case", "beta", "s", "t", "function", "lhs", "rhs", "residual", "quadrature_error", "pass"});
    for (const auto& c : cases) {
      const auto id = flux_identity_residual(end, c.beta, c.v, c.s, c.t, quad);
      const bool pass = id.residual <= bound;
      failed += !pass;
      worst = std::max(worst, id.residual);
      csv.row({c.label, c.beta, c.s, c.t, sanitize(c.v.label), id.lhs, id.rhs, id.residual, id.quadrature_error, pass});
    }
  }
  auto verdict = ctx.file("verdict.txt");
  verdict << "identity: " << cases.size() - failed << "/" << cases.size() << " within " << format_number(bound)
          << "; worst residual " << format_number(worst) << '\n';
  return failed ? check_failed : ok;
}

inline int run_counterexample(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  CounterexampleOptions o;
  o.alpha = cfg.num("counterexample.alpha");
  o.k = cfg.num("counterexample.k");
  o.n = static_cast<int>(cfg.integer("counterexample.n"));
  o.lambda_lo = cfg.num("counterexample.lambda_lo");
  o.lambda_hi = cfg.num("counterexample.lambda_hi");
  o.lambda_step = cfg.num("counterexample.lambda_step");
  if (cfg.given("counterexample.X")) o.X = cfg.num("counterexample.X");
  o.max_modes = static_cast<std::size_t>(cfg.integer("counterexample.max_modes"));
  o.threads = static_cast<unsigned>(cfg.integer("counterexample.threads"));
  o.classify = classify_options(cfg);
  o.refine.solver = o.classify.solver;
  o.refine.min_contrast = cfg.num("tolerances.min_contrast");
  const auto rep = run_critical_counterexample(o);

  {
    auto out = ctx.file("counterexample.csv");
    CsvWriter csv(out);
    csv.section("hessian_decay");
    csv.row({"window_lo", "window_hi", "max_abs_A", "decay_exponent", "fit_r2", "tends_to_zero", "pass"});
    const auto& h = rep.hessian;
    csv.row({h.window.lo, h.window.hi, h.max_abs, h.envelope.decay_exponent, h.envelope.r2, h.tends_to_zero, rep.decay_ok});
    csv.blank();
    csv.section("octave_maxima");
    csv.row({"center", "max_abs_A"});
    for (std::size_t j = 0; j < h.envelope.centers.size(); ++j) csv.row({h.envelope.centers[j], h.envelope.maxima[j]});
    csv.blank();
    csv.section("curvature_order");
    csv.row({"window_lo", "window_hi", "sup_r_abs_K", "argmax_r", "pass"});
    csv.row({rep.curvature.window.lo, rep.curvature.window.hi, rep.curvature.sup_r_abs_K, rep.curvature.argmax_r,
             rep.curvature_ok});
    csv.blank();
    csv.section("scan");
    csv.row({"mode", "lambda", "classification", "tail_mass_ratio", "envelope_exponent", "fit_r2"});
    for (const auto& r : rep.scan) {
      csv.row({r.mode, r.lambda, to_string(r.classification), r.tail_mass_ratio, r.envelope_exponent, r.fit_r2});
    }
    csv.blank();
    csv.section("candidates");
    csv.row({"mode", "lambda_first", "lambda_last", "bracket_lo", "bracket_hi", "lambda_star", "contrast", "status"});
    for (const auto& c : rep.clusters) {
      csv.row({c.mode, c.lambda_first, c.lambda_last, c.bracket_lo, c.bracket_hi,
               c.refined ? Field(c.refined->lambda_star) : Field(""), c.refined ? Field(c.refined->quality) : Field(""),
               sanitize(c.message)});
    }
    csv.blank();
    csv.section("fitted_constants");
    const auto& k = rep.fitted.constants;
    csv.row({"window_lo", "window_hi", "a", "b", "A0", "B0", "b1", "K3", "gamma", "gap", "lambda1", "pass"});
    csv.row({o.fit_window.lo, o.fit_window.hi, k.a, k.b, k.A0, k.B0, k.b1, k.K3, k.gamma, rep.fitted.gap, rep.lambda1,
             rep.threshold_ok});
  }
  auto verdict = ctx.file("verdict.txt");
  verdict << rep.verdict() << '\n';
  return rep.pass() ? ok : check_failed;
}

/// Runs one subcommand; errors are reported on `log` and mapped to exit codes.
inline int run(const Invocation& inv, std::ostream& log = std::cerr) {
  const auto& names = subcommands();
  if (std::find(names.begin(), names.end(), inv.subcommand) == names.end()) {
    log << "error: unknown subcommand '" << inv.subcommand << "'\n";
    return input_error;
  }
  try {
    Context ctx{load_config(inv), inv.out_dir, log};
    std::filesystem::create_directories(ctx.out);
    if (inv.subcommand == "check") return run_check(ctx);
    if (inv.subcommand == "thresholds") return run_thresholds(ctx);
    if (inv.subcommand == "scan") return run_scan(ctx);
    if (inv.subcommand == "identity") return run_identity(ctx);
    return run_counterexample(ctx);
  } catch (const ConfigError& e) {
    log << "input error: " << e.what() << '\n';
    return input_error;
  } catch (const ParameterError& e) {
    log << "input error: " << e.what() << '\n';
    return input_error;
  } catch (const DomainError& e) {
    log << "input error: " << e.what() << '\n';
    return input_error;
  } catch (const WindowError& e) {
    log << "input error: " << e.what() << '\n';
    return input_error;
  } catch (const std::filesystem::filesystem_error& e) {
    log << "input error: " << e.what() << '\n';
    return input_error;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return check_failed;
  }
}

}  // namespace warpspec::cli
