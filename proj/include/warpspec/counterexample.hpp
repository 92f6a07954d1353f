#pragma once

// End-to-end run on the critical oscillating profile: Hessian decay, the
// r^-1 order of the radial curvature, an embedded-eigenvalue scan over the
// separated modes, and a consistency check against the exclusion threshold
// evaluated on constants fitted far out on the end.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "warpspec/conditions.hpp"
#include "warpspec/geometry.hpp"
#include "warpspec/numerics.hpp"
#include "warpspec/separation.hpp"
#include "warpspec/solver.hpp"
#include "warpspec/thresholds.hpp"

namespace warpspec {

struct HessianDecayReport {
  Window window;
  double max_abs = 0.0;  ///< max |A| on the window
  OctaveEnvelope envelope;
  bool tends_to_zero = false;
};

/// |nabla dr| on the level spheres is |A_h|; checks it decays over the window
/// via the octave envelope. Octaves are sampled with at most `per_octave`
/// points so very long windows stay cheap.
inline HessianDecayReport check_hessian_decay(const WarpingProfile& profile, const Window& window,
                                              std::size_t per_octave = 65536,
                                              double min_exponent = 0.1) {
  validate_window(window, profile.r_min());
  if (window.hi > profile.r_max()) throw WindowError("window beyond the profile's last radius");
  const auto x = octave_samples(window, per_octave);
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) g[i] = profile(x[i]).A;
  HessianDecayReport rep;
  rep.window = window;
  for (double v : g) rep.max_abs = std::max(rep.max_abs, std::abs(v));
  rep.envelope = octave_envelope(x, g, window);
  rep.tends_to_zero = tends_to_zero(rep.envelope, min_exponent);
  return rep;
}

struct CurvatureOrderReport {
  Window window;
  double sup_r_abs_K = 0.0;
  double argmax_r = 0.0;
};

/// sup of r |K_h| over the window; finite iff the radial curvature is O(1/r).
inline CurvatureOrderReport curvature_order(const WarpingProfile& profile, const Window& window,
                                            const GridOptions& grid = {}) {
  validate_window(window, profile.r_min());
  CurvatureOrderReport rep;
  rep.window = window;
  for (double r : radial_grid(window, grid)) {
    const double v = r * std::abs(profile(r).K);
    if (v > rep.sup_r_abs_K) {
      rep.sup_r_abs_K = v;
      rep.argmax_r = r;
    }
  }
  return rep;
}

struct CounterexampleOptions {
  double alpha = 0.75;
  double k = 6.0;
  int n = 2;
  double lambda_lo = 0.1;
  double lambda_hi = 4.0;
  double lambda_step = 0.05;
  /// Truncation; default x0 + max(200, 100 / sqrt(lambda_lo)).
  std::optional<double> X;
  /// 0 means: use the mode pruning rule at lambda_hi.
  std::size_t max_modes = 0;
  /// Highest sphere degree offered to the pruning rule.
  int sphere_degree_max = 64;

  Window decay_window{65536.0, 67108864.0};
  std::size_t decay_per_octave = 65536;
  double expected_decay_tolerance = 0.1;
  Window curvature_window{100.0, 10000.0};
  double curvature_tolerance = 0.2;  ///< relative, around 2|k|
  Window fit_window{262144.0, 524288.0};

  double target_lambda = 1.0;
  double location_tolerance = 0.05;
  double refine_half_width = 0.3;

  ClassifyOptions classify;
  RefineOptions refine;
  unsigned threads = 0;
};

struct CandidateCluster {
  std::size_t mode = 0;
  double lambda_first = 0.0;
  double lambda_last = 0.0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  std::optional<RefinedCandidate> refined;
  std::string message;
};

struct CounterexampleReport {
  CounterexampleOptions options;
  double X = 0.0;
  std::size_t modes = 0;
  HessianDecayReport hessian;
  CurvatureOrderReport curvature;
  std::vector<EigenScanResult> scan;
  std::vector<CandidateCluster> clusters;
  FitResult fitted;
  /// +inf when the fitted constants leave the exclusion bound vacuous.
  double lambda1 = std::numeric_limits<double>::infinity();

  bool decay_ok = false;
  bool curvature_ok = false;
  bool candidate_ok = false;
  bool threshold_ok = false;

  bool pass() const { return decay_ok && curvature_ok && candidate_ok && threshold_ok; }

  std::string verdict() const {
    std::ostringstream os;
    os.precision(6);
    os << "critical counterexample " << (pass() ? "PASS" : "FAIL") << ":";
    os << " decay_exponent=" << hessian.envelope.decay_exponent << (decay_ok ? "" : "(fail)");
    os << " sup_rK=" << curvature.sup_r_abs_K << (curvature_ok ? "" : "(fail)");
    std::size_t count = 0;
    for (const auto& r : scan) count += r.classification == Classification::l2_candidate;
    os << " candidates=" << count;
    for (const auto& c : clusters) {
      if (c.refined) os << " lambda*[" << c.mode << "]=" << c.refined->lambda_star;
    }
    if (!candidate_ok) os << "(fail)";
    os << " lambda1=" << lambda1 << (threshold_ok ? "" : "(fail)");
    return os.str();
  }
};

inline CounterexampleReport run_critical_counterexample(const CounterexampleOptions& opt = {}) {
  CounterexampleReport rep;
  rep.options = opt;
  const auto profile = make_critical_profile(opt.alpha, opt.k);
  const EndGeometry end(opt.n, profile.r_min(), profile,
                        sphere_eigenvalues(opt.n, opt.sphere_degree_max));

  rep.hessian = check_hessian_decay(profile, opt.decay_window, opt.decay_per_octave);
  rep.decay_ok = rep.hessian.tends_to_zero &&
                 std::abs(rep.hessian.envelope.decay_exponent - std::min(opt.alpha, 1.0)) <=
                     opt.expected_decay_tolerance;

  rep.curvature = curvature_order(profile, opt.curvature_window);
  const double expected = 2.0 * std::abs(opt.k);
  rep.curvature_ok = std::abs(rep.curvature.sup_r_abs_K - expected) <= opt.curvature_tolerance * expected;

  if (!(opt.lambda_lo > 0.0)) throw ParameterError("lambda grid must stay positive");
  const auto lambdas = arithmetic_grid(opt.lambda_lo, opt.lambda_hi, opt.lambda_step);
  rep.X = opt.X.value_or(end.r0 + std::max(200.0, 100.0 / std::sqrt(opt.lambda_lo)));
  rep.modes = opt.max_modes > 0 ? std::min(opt.max_modes, end.cross_section_eigenvalues.size())
                                : modes_to_scan(end, lambdas.back(), rep.X);
  std::vector<RadialOperator> ops;
  for (std::size_t i = 0; i < rep.modes; ++i) ops.push_back(RadialOperator::from_end(end, i, rep.X));
  rep.scan = scan(ops, lambdas, opt.classify, opt.threads);

  // Group candidates into runs of consecutive grid points per mode.
  for (std::size_t i = 0; i < rep.modes; ++i) {
    std::optional<CandidateCluster> open;
    for (std::size_t j = 0; j <= lambdas.size(); ++j) {
      const bool hit = j < lambdas.size() &&
                       rep.scan[i * lambdas.size() + j].classification == Classification::l2_candidate;
      if (hit && !open) {
        open = CandidateCluster{i, lambdas[j], lambdas[j], 0.0, 0.0, std::nullopt, ""};
      } else if (hit) {
        open->lambda_last = lambdas[j];
      } else if (open) {
        rep.clusters.push_back(*open);
        open.reset();
      }
    }
  }
  for (auto& c : rep.clusters) {
    const double mid = 0.5 * (c.lambda_first + c.lambda_last);
    const double half = std::max(opt.refine_half_width, 0.5 * (c.lambda_last - c.lambda_first) + opt.lambda_step);
    c.bracket_lo = std::max(mid - half, 0.5 * opt.lambda_lo);
    c.bracket_hi = mid + half;
    try {
      c.refined = refine_candidate(ops[c.mode], c.bracket_lo, c.bracket_hi, opt.refine);
      c.message = "ok";
    } catch (const BracketError& e) {
      c.message = e.what();
    }
  }
  bool located = !rep.clusters.empty();
  for (const auto& c : rep.clusters) {
    located = located && c.refined &&
              std::abs(c.refined->lambda_star - opt.target_lambda) <= opt.location_tolerance &&
              std::abs(c.lambda_first - opt.target_lambda) <= opt.location_tolerance &&
              std::abs(c.lambda_last - opt.target_lambda) <= opt.location_tolerance;
  }
  rep.candidate_ok = located;

  rep.fitted = fit_constants(end, opt.fit_window, make_power_decay_reference(opt.alpha));
  if (rep.fitted.gap) {
    const auto& k = rep.fitted.constants;
    rep.lambda1 = exclusion_threshold(k.gamma, k.a, k.b, k.A0, k.B0, k.K3, k.b1, k.n);
  }
  rep.threshold_ok = opt.target_lambda < rep.lambda1;
  return rep;
}

}  // namespace warpspec
