#pragma once

// Grid checks of the metric hypotheses on a truncated radial window, plus
// the decay split of a separated potential and a fit of the tightest
// constants. Margins are reported in the natural units of each inequality
// (multiplied through by r, r^2 or sqrt(r)), so they are O(1) across the window.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "warpspec/error.hpp"
#include "warpspec/geometry.hpp"
#include "warpspec/numerics.hpp"
#include "warpspec/thresholds.hpp"

namespace warpspec {

struct SideMargin {
  std::string side;
  double margin = 0.0;
  double argmin_r = 0.0;
};

struct ConditionEntry {
  std::string name;
  Window window;
  bool pass = false;
  double worst_margin = 0.0;
  double argmin_r = 0.0;
  std::vector<SideMargin> sides;
};

struct ConditionOptions {
  GridOptions grid;
  /// Minimum fitted decay exponent accepted as "tends to zero".
  double min_decay_exponent = 0.1;
  double negligible = 1e-12;
  double margin_snap = 1e-12;
};

namespace detail {

class MarginTracker {
 public:
  explicit MarginTracker(std::string side, double snap) : side_(std::move(side)), snap_(snap) {}

  void add(double r, double margin, double scale) {
    margin = snap_margin(margin, scale, snap_);
    if (margin < best_.margin || !seen_) {
      best_.margin = margin;
      best_.argmin_r = r;
      seen_ = true;
    }
  }

  SideMargin result() const {
    SideMargin s = best_;
    s.side = side_;
    return s;
  }

 private:
  std::string side_;
  double snap_;
  bool seen_ = false;
  SideMargin best_{};
};

inline ConditionEntry finish(std::string name, const Window& w, std::vector<SideMargin> sides) {
  ConditionEntry e;
  e.name = std::move(name);
  e.window = w;
  e.worst_margin = std::numeric_limits<double>::infinity();
  for (const auto& s : sides) {
    if (s.margin < e.worst_margin) {
      e.worst_margin = s.margin;
      e.argmin_r = s.argmin_r;
    }
  }
  e.pass = e.worst_margin >= 0.0;
  e.sides = std::move(sides);
  return e;
}

inline std::vector<double> end_grid(const EndGeometry& end, const Window& w, const GridOptions& g) {
  validate_window(w, end.r0);
  if (w.hi > end.profile.r_max()) {
    throw WindowError("window extends beyond the profile's last radius " +
                      std::to_string(end.profile.r_max()));
  }
  return radial_grid(w, g);
}

}  // namespace detail

/// (f'/f - a/r) g_tilde <= nabla dr <= (f'/f + b/r) g_tilde, i.e. with
/// d(r) = r (A_h - f'/f): d + a >= 0 and b - d >= 0.
inline ConditionEntry check_hessian_band(const EndGeometry& end, const WarpingProfile& reference,
                                         double a, double b, const Window& window,
                                         const ConditionOptions& opt = {}) {
  const auto grid = detail::end_grid(end, window, opt.grid);
  if (window.lo < reference.r_min() || window.hi > reference.r_max()) {
    throw DomainError("reference profile does not cover the window");
  }
  detail::MarginTracker lower("lower", opt.margin_snap), upper("upper", opt.margin_snap);
  for (double r : grid) {
    const double d = r * (end.profile(r).A - reference(r).A);
    lower.add(r, d + a, a);
    upper.add(r, b - d, b);
  }
  return detail::finish("hessian_band", window, {lower.result(), upper.result()});
}

/// A0/r <= A_h(r) <= B0/sqrt(r): margins r A_h - A0 and B0 - sqrt(r) A_h.
inline ConditionEntry check_A_bounds(const EndGeometry& end, double A0, double B0,
                                     const Window& window, const ConditionOptions& opt = {}) {
  const auto grid = detail::end_grid(end, window, opt.grid);
  detail::MarginTracker lower("lower", opt.margin_snap), upper("upper", opt.margin_snap);
  for (double r : grid) {
    const double A = end.profile(r).A;
    lower.add(r, r * A - A0, A0);
    upper.add(r, B0 - std::sqrt(r) * A, B0);
  }
  return detail::finish("mean_curvature_bounds", window, {lower.result(), upper.result()});
}

/// |r (n-1) A_h'(r)| <= (n-1) K3; margin (n-1)(K3 - r |A_h'|).
inline ConditionEntry check_K3(const EndGeometry& end, double K3, const Window& window,
                               const ConditionOptions& opt = {}) {
  const auto grid = detail::end_grid(end, window, opt.grid);
  detail::MarginTracker side("upper", opt.margin_snap);
  for (double r : grid) {
    side.add(r, end.hat(K3 - r * std::abs(end.profile(r).A_prime)), end.hat(K3));
  }
  return detail::finish("hessian_variation", window, {side.result()});
}

/// Ric(grad r, grad r) = (n-1) K_h >= -(n-1) b1 / r; margin (n-1)(r K_h + b1).
inline ConditionEntry check_ricci(const EndGeometry& end, double b1, const Window& window,
                                  const ConditionOptions& opt = {}) {
  const auto grid = detail::end_grid(end, window, opt.grid);
  detail::MarginTracker side("lower", opt.margin_snap);
  for (double r : grid) side.add(r, end.hat(r * end.profile(r).K + b1), end.hat(b1));
  return detail::finish("ricci_lower_bound", window, {side.result()});
}

/// -eps(r)/r <= K_h <= a(1-a)/r^2 with eps -> 0. The upper band is checked
/// pointwise (margin a(1-a) - r^2 K_h); the lower band requires the octave
/// maxima of r max(0, -K_h) to decrease strictly with a fitted decay exponent
/// of at least opt.min_decay_exponent.
inline ConditionEntry check_curvature_band(const EndGeometry& end, double a, const Window& window,
                                           const ConditionOptions& opt = {}) {
  if (!(window.octaves() >= 3.0 - 1e-9)) {
    throw WindowError("curvature band check needs a window of at least 3 octaves");
  }
  const auto grid = detail::end_grid(end, window, opt.grid);
  const double cap = a * (1.0 - a);
  detail::MarginTracker upper("upper", opt.margin_snap);
  std::vector<double> deficit(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double r = grid[i];
    const double K = end.profile(r).K;
    upper.add(r, cap - r * r * K, cap);
    deficit[i] = r * std::max(0.0, -K);
  }
  const auto env = octave_envelope(grid, deficit, window, opt.negligible);
  SideMargin lower;
  lower.side = "lower";
  lower.margin = tends_to_zero_margin(env, opt.min_decay_exponent);
  const auto worst = std::max_element(env.maxima.begin(), env.maxima.end());
  lower.argmin_r = env.negligible ? window.lo
                                  : env.centers[static_cast<std::size_t>(worst - env.maxima.begin())];
  return detail::finish("curvature_band", window, {upper.result(), lower});
}

struct SampledPotential {
  std::vector<double> x;
  std::vector<double> q;           ///< full potential q_i
  std::vector<double> long_range;  ///< V2 = lambda_i / h^2 part
};

struct DecayClause {
  std::string name;
  bool pass = false;
  double decay_exponent = 0.0;
  bool negligible = false;
  double margin = 0.0;
};

struct DecaySplitReport {
  DecayClause short_range;      ///< sup |x V1| -> 0
  DecayClause long_range;       ///< V2 -> 0
  DecayClause long_range_slope; ///< |x V2'| -> 0
  bool pass() const { return short_range.pass && long_range.pass && long_range_slope.pass; }
};

/// Splits q = V1 + V2 with V2 the cross-section term and checks the three
/// decay clauses that rule out positive eigenvalues, each as an octave
/// envelope regression over the sampled grid.
inline DecaySplitReport agmon_split(const SampledPotential& p, const ConditionOptions& opt = {}) {
  const std::size_t n = p.x.size();
  if (n < 3 || p.q.size() != n || p.long_range.size() != n) {
    throw ParameterError("sampled potential needs matching columns of at least 3 points");
  }
  for (std::size_t i = 1; i < n; ++i) {
    if (!(p.x[i] > p.x[i - 1])) throw ParameterError("potential grid must be strictly increasing");
  }
  const Window w{p.x.front(), p.x.back()};
  if (!(w.lo > 0.0) || w.octaves() < 3.0 - 1e-9) {
    throw WindowError("decay split needs a grid spanning at least 3 octaves");
  }
  std::vector<double> xv1(n), v2(n), xdv2(n);
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    xv1[i] = p.x[i] * (p.q[i] - p.long_range[i]);
    v2[i] = p.long_range[i];
    scale = std::max(scale, std::abs(p.q[i]));
  }
  // Centered nonuniform differences, one-sided at the ends.
  for (std::size_t i = 0; i < n; ++i) {
    double d;
    if (i == 0) {
      d = (v2[1] - v2[0]) / (p.x[1] - p.x[0]);
    } else if (i + 1 == n) {
      d = (v2[n - 1] - v2[n - 2]) / (p.x[n - 1] - p.x[n - 2]);
    } else {
      const double h0 = p.x[i] - p.x[i - 1], h1 = p.x[i + 1] - p.x[i];
      d = (h0 * h0 * (v2[i + 1] - v2[i]) + h1 * h1 * (v2[i] - v2[i - 1])) / (h0 * h1 * (h0 + h1));
    }
    xdv2[i] = p.x[i] * d;
  }
  const double floor = opt.negligible * (1.0 + scale);
  auto clause = [&](std::string name, const std::vector<double>& g) {
    const auto env = octave_envelope(p.x, g, w, floor);
    DecayClause c;
    c.name = std::move(name);
    c.negligible = env.negligible;
    c.decay_exponent = env.decay_exponent;
    c.margin = tends_to_zero_margin(env, opt.min_decay_exponent);
    c.pass = tends_to_zero(env, opt.min_decay_exponent);
    return c;
  };
  DecaySplitReport rep;
  rep.short_range = clause("short_range_xV1", xv1);
  rep.long_range = clause("long_range_V2", v2);
  rep.long_range_slope = clause("long_range_xV2_prime", xdv2);
  return rep;
}

struct FitResult {
  HypothesisConstants constants;  ///< raw fitted values (floored where zero)
  bool satisfiable = false;       ///< A0* > 0
  bool gap = false;               ///< check_gap on the fitted bundle
  std::string message;
};

/// Tightest constants over the window. Zero band widths are floored at
/// `floor` so the bundle stays strictly positive. gamma is set one unit above
/// its admissibility bound (n-1)(a+b)/2.
inline FitResult fit_constants(const EndGeometry& end, const Window& window,
                               const WarpingProfile& reference, const ConditionOptions& opt = {},
                               double floor = 1e-12) {
  const auto grid = detail::end_grid(end, window, opt.grid);
  if (window.lo < reference.r_min() || window.hi > reference.r_max()) {
    throw DomainError("reference profile does not cover the window");
  }
  double a = 0.0, b = 0.0, b1 = 0.0, K3 = 0.0;
  double A0 = std::numeric_limits<double>::infinity();
  double B0 = -std::numeric_limits<double>::infinity();
  for (double r : grid) {
    const auto p = end.profile(r);
    const double d = r * (p.A - reference(r).A);
    a = std::max(a, -d);
    b = std::max(b, d);
    A0 = std::min(A0, r * p.A);
    B0 = std::max(B0, std::sqrt(r) * p.A);
    b1 = std::max(b1, r * std::max(0.0, -p.K));
    K3 = std::max(K3, r * std::abs(p.A_prime));
  }
  FitResult fit;
  auto& k = fit.constants;
  k.n = end.n;
  k.a = std::max(a, floor);
  k.b = std::max(b, floor);
  k.A0 = A0;
  k.B0 = std::max(B0, floor);
  k.b1 = std::max(b1, floor);
  k.K3 = std::max(K3, floor);
  k.gamma = (k.a_hat() + k.b_hat()) / 2.0 + 1.0;
  k.theta = reference.power_exponent();
  fit.satisfiable = A0 > 0.0;
  fit.gap = fit.satisfiable && check_gap(k);
  if (!fit.satisfiable) {
    fit.message = "inf r*A_h <= 0 on the window: hypotheses unsatisfiable";
  } else if (!fit.gap) {
    fit.message = "fitted constants violate the gap condition";
  } else {
    fit.message = "ok";
  }
  return fit;
}

struct ConditionReport {
  std::vector<ConditionEntry> entries;
  std::optional<FitResult> fitted;

  bool all_pass() const {
    return std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.pass; });
  }
};

}  // namespace warpspec
