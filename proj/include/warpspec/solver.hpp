#pragma once

// Shooting solver for -w'' + q w = lambda w on [x0, X] in modified Prufer
// variables
//
//   w = R sin(phi),  w' = R S cos(phi),
//   phi'      = S cos^2(phi) + ((lambda - q)/S) sin^2(phi),
//   (log R)'  = (S - (lambda - q)/S) sin(phi) cos(phi),
//
// with S = sqrt(max(|lambda - qbar|, floor)) held constant on short segments
// (qbar is the local mean of q over the segment) and the state remapped
// exactly at segment boundaries. The phase is continuous and zeros of w sit
// at multiples of pi for every S.
//
// Embedded-eigenvalue detection. The half-line problem has an L^2 solution at
// infinity iff one solution decays like x^-p with p > 1/2. Since the Wronskian
// is constant, that happens exactly when the dominant solution grows like
// x^p, so the envelope exponent is measured on forward (stable) integrations
// of two independent boundary conditions. The decaying solution itself is
// obtained by backward shooting from beyond X, where it is dominant.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "warpspec/error.hpp"
#include "warpspec/numerics.hpp"
#include "warpspec/separation.hpp"

namespace warpspec {

struct Boundary {
  enum class Kind { dirichlet, neumann, robin };
  Kind kind = Kind::dirichlet;
  double c = 0.0;  ///< robin: w'(x0) = c w(x0)

  static Boundary dirichlet() { return {Kind::dirichlet, 0.0}; }
  static Boundary neumann() { return {Kind::neumann, 0.0}; }
  static Boundary robin(double c) { return {Kind::robin, c}; }

  /// Initial data (w, w') at x0.
  std::array<double, 2> initial_data() const {
    switch (kind) {
      case Kind::dirichlet: return {0.0, 1.0};
      case Kind::neumann: return {1.0, 0.0};
      case Kind::robin: return {1.0, c};
    }
    return {0.0, 1.0};
  }
};

struct SolverOptions {
  double rtol = 1e-10;
  double atol = 1e-10;
  double max_step = 0.1;
  double segment_length = 2.0;
  /// Floor for S^2 so the frequency never vanishes at turning points.
  double frequency_floor = 1e-4;
  double min_step = 1e-12;
  std::size_t max_steps = 20'000'000;
};

/// Recorded Prufer trajectory on an increasing grid.
struct ShootingTrajectory {
  double lambda = 0.0;
  std::vector<double> x;
  std::vector<double> phase;
  std::vector<double> log_amplitude;  ///< log R
  std::vector<double> frequency;      ///< S used on the step ending at x_j

  std::size_t size() const { return x.size(); }
  double amplitude(std::size_t j) const { return std::exp(log_amplitude[j]); }
  double w(std::size_t j) const { return amplitude(j) * std::sin(phase[j]); }
  double w_prime(std::size_t j) const { return amplitude(j) * frequency[j] * std::cos(phase[j]); }
  double max_log_amplitude() const {
    return *std::max_element(log_amplitude.begin(), log_amplitude.end());
  }
};

struct AmplitudePeak {
  double x = 0.0;
  double log_value = 0.0;
};

/// Local maxima of |w|: points where the phase crosses pi/2 mod pi, where
/// w' = 0 and |w| = R. log R is interpolated linearly in the phase.
inline std::vector<AmplitudePeak> amplitude_peaks(const ShootingTrajectory& t) {
  std::vector<AmplitudePeak> peaks;
  const double pi = std::numbers::pi;
  for (std::size_t j = 0; j + 1 < t.size(); ++j) {
    const double p0 = t.phase[j], p1 = t.phase[j + 1];
    if (p0 == p1) continue;
    const double lo = std::min(p0, p1), hi = std::max(p0, p1);
    for (double m = std::ceil((lo - pi / 2) / pi); m * pi + pi / 2 <= hi; m += 1.0) {
      const double target = m * pi + pi / 2;
      if (target <= lo && !(p0 == lo && target == lo)) continue;
      const double s = (target - p0) / (p1 - p0);
      peaks.push_back({t.x[j] + s * (t.x[j + 1] - t.x[j]),
                       t.log_amplitude[j] + s * (t.log_amplitude[j + 1] - t.log_amplitude[j])});
    }
  }
  return peaks;
}

namespace detail {

using PruferState = std::array<double, 2>;  // phase, log R

inline void rescale_prufer(PruferState& y, double S0, double S1) {
  const double s = std::sin(y[0]), c = std::cos(y[0]);
  double phi = std::atan2(S1 * s, S0 * c);
  phi += 2.0 * std::numbers::pi * std::round((y[0] - phi) / (2.0 * std::numbers::pi));
  const double ratio = S0 / S1;
  y[1] += 0.5 * std::log(s * s + ratio * ratio * c * c);
  y[0] = phi;
}

/// Integrates from `from` to `to` (either direction) starting from (w, w').
/// observe(x, state, S) is called at the start and after every accepted step.
template <class Observer>
PruferState propagate(const RadialOperator& op, double lambda, double from, double to,
                      std::array<double, 2> data, const SolverOptions& opt, Observer&& observe) {
  namespace ode = boost::numeric::odeint;
  const double dir = to > from ? 1.0 : -1.0;
  auto frequency_for = [&](double a, double b) {
    double mean = 0.0;
    for (int k = 0; k <= 8; ++k) mean += op.potential(a + (b - a) * k / 8.0);
    mean /= 9.0;
    return std::sqrt(std::max(std::abs(lambda - mean), opt.frequency_floor));
  };
  double x = from;
  double S = frequency_for(x, x + dir * std::min(opt.segment_length, std::abs(to - from)));
  if (data[0] == 0.0 && data[1] == 0.0) throw ParameterError("initial data must be nonzero");
  PruferState y{std::atan2(S * data[0], data[1]),
                0.5 * std::log(data[0] * data[0] + data[1] * data[1] / (S * S))};
  observe(x, y, S);

  auto stepper =
      ode::make_controlled(opt.atol, opt.rtol, dir * opt.max_step, ode::runge_kutta_dopri5<PruferState>());
  double dt = dir * std::min(opt.max_step, 0.01);
  std::size_t steps = 0;
  bool first = true;
  while (dir * (to - x) > 0.0) {
    const double seg_end = x + dir * std::min(opt.segment_length, dir * (to - x));
    if (!first) {
      const double S1 = frequency_for(x, seg_end);
      rescale_prufer(y, S, S1);
      S = S1;
      stepper.reset();
    }
    first = false;
    auto sys = [&op, lambda, S](const PruferState& s, PruferState& ds, double t) {
      const double k = (lambda - op.potential(t)) / S;
      const double sn = std::sin(s[0]), cs = std::cos(s[0]);
      ds[0] = S * cs * cs + k * sn * sn;
      ds[1] = (S - k) * sn * cs;
    };
    while (dir * (seg_end - x) > 0.0) {
      double trial = dt;
      if (dir * (x + trial - seg_end) > 0.0) trial = seg_end - x;
      const double before = x;
      const auto result = stepper.try_step(sys, y, x, trial);
      if (result == ode::success) {
        if (std::abs(seg_end - x) <= 1e-12 * std::max(1.0, std::abs(x))) x = seg_end;
        if (!std::isfinite(y[0]) || !std::isfinite(y[1])) {
          throw IntegrationError("non-finite Prufer state near x=" + std::to_string(x) + " (" +
                                 op.label() + ", lambda=" + std::to_string(lambda) + ")");
        }
        observe(x, y, S);
        dt = trial;
        if (++steps > opt.max_steps) {
          throw IntegrationError("step budget exhausted near x=" + std::to_string(x));
        }
      } else {
        dt = trial;
        if (std::abs(dt) < opt.min_step) {
          throw IntegrationError("step size underflow at x=" + std::to_string(before) + " (" +
                                 op.label() + ", lambda=" + std::to_string(lambda) + ")");
        }
      }
    }
  }
  return y;
}

inline ShootingTrajectory record(const RadialOperator& op, double lambda, double from, double to,
                                 std::array<double, 2> data, const SolverOptions& opt) {
  ShootingTrajectory t;
  t.lambda = lambda;
  propagate(op, lambda, from, to, data, opt, [&](double x, const PruferState& y, double S) {
    t.x.push_back(x);
    t.phase.push_back(y[0]);
    t.log_amplitude.push_back(y[1]);
    t.frequency.push_back(S);
  });
  return t;
}

}  // namespace detail

/// Regular solution from x0 to X for the given boundary condition.
inline ShootingTrajectory integrate(const RadialOperator& op, double lambda,
                                    Boundary bc = Boundary::dirichlet(),
                                    const SolverOptions& opt = {}) {
  return detail::record(op, lambda, op.x0(), op.X(), bc.initial_data(), opt);
}

/// Angle at X of the regular solution with tan = w / w' (unscaled), on the
/// branch of the integrated phase. Strictly increasing in lambda; the scaled
/// phase is not, since its scale depends on lambda.
inline double terminal_phase(const RadialOperator& op, double lambda,
                             Boundary bc = Boundary::dirichlet(), const SolverOptions& opt = {}) {
  double S = 1.0;
  auto y = detail::propagate(op, lambda, op.x0(), op.X(), bc.initial_data(), opt,
                             [&S](double, const detail::PruferState&, double s) { S = s; });
  detail::rescale_prufer(y, S, 1.0);
  return y[0];
}

/// Solution decaying fastest towards X: shot backwards from
/// X + extension * (X - x0), restricted to [x0, X] and normalised to R(x0) = 1.
inline ShootingTrajectory subdominant_trajectory(const RadialOperator& op, double lambda,
                                                 double extension = 2.0,
                                                 const SolverOptions& opt = {}) {
  double far = op.X() + extension * (op.X() - op.x0());
  if (const auto* end = op.end()) far = std::min(far, end->profile.r_max());
  const auto ext = op.with_domain(op.x0(), far);
  auto t = detail::record(ext, lambda, far, op.x0(), {1.0, 0.0}, opt);
  ShootingTrajectory out;
  out.lambda = lambda;
  for (std::size_t j = t.size(); j-- > 0;) {
    if (t.x[j] > op.X() + 1e-12) continue;
    out.x.push_back(t.x[j]);
    out.phase.push_back(t.phase[j]);
    out.log_amplitude.push_back(t.log_amplitude[j]);
    out.frequency.push_back(t.frequency[j]);
  }
  const double shift = out.log_amplitude.front();
  for (double& v : out.log_amplitude) v -= shift;
  return out;
}

/// Max over dyadically spaced sample intervals of the averaged residual
/// |mean(w'') - mean((q - lambda) w)| / max|w|, with w on each interval taken
/// from the quintic Hermite interpolant of the recorded (w, w', w'').
inline double reinsertion_residual(const ShootingTrajectory& t, const RadialOperator& op) {
  if (t.size() < 2) return 0.0;
  const double ref = t.max_log_amplitude();
  auto w = [&](std::size_t j) { return std::exp(t.log_amplitude[j] - ref) * std::sin(t.phase[j]); };
  auto wp = [&](std::size_t j) {
    return std::exp(t.log_amplitude[j] - ref) * t.frequency[j] * std::cos(t.phase[j]);
  };
  double wmax = 0.0;
  for (std::size_t j = 0; j < t.size(); ++j) wmax = std::max(wmax, std::abs(w(j)));
  static constexpr std::array<double, 5> nodes{-0.9061798459386640, -0.5384693101056831, 0.0,
                                               0.5384693101056831, 0.9061798459386640};
  static constexpr std::array<double, 5> weights{0.2369268850561891, 0.4786286704993665,
                                                 0.5688888888888889, 0.4786286704993665,
                                                 0.2369268850561891};
  double worst = 0.0;
  std::vector<std::size_t> picks;
  for (std::size_t j = 1; j < t.size(); j *= 2) picks.push_back(j - 1);
  const std::size_t stride = std::max<std::size_t>(1, t.size() / 512);
  for (std::size_t j = 0; j + 1 < t.size(); j += stride) picks.push_back(j);
  for (std::size_t j : picks) {
    const double a = t.x[j], b = t.x[j + 1], h = b - a;
    if (!(h > 0.0)) continue;
    const double p0 = w(j), p1 = w(j + 1), d0 = wp(j), d1 = wp(j + 1);
    const double s0 = (op.potential(a) - t.lambda) * p0, s1 = (op.potential(b) - t.lambda) * p1;
    double integral = 0.0;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      const double u = 0.5 * (nodes[k] + 1.0), u2 = u * u, u3 = u2 * u, u4 = u3 * u, u5 = u4 * u;
      const double val = p0 * (1 - 10 * u3 + 15 * u4 - 6 * u5) + h * d0 * (u - 6 * u3 + 8 * u4 - 3 * u5) +
                         h * h * s0 * (0.5 * u2 - 1.5 * u3 + 1.5 * u4 - 0.5 * u5) +
                         h * h * s1 * (0.5 * u3 - u4 + 0.5 * u5) + h * d1 * (-4 * u3 + 7 * u4 - 3 * u5) +
                         p1 * (10 * u3 - 15 * u4 + 6 * u5);
      const double xk = a + u * h;
      integral += 0.5 * h * weights[k] * (op.potential(xk) - t.lambda) * val;
    }
    worst = std::max(worst, std::abs(d1 - d0 - integral) / h);
  }
  return wmax > 0.0 ? worst / wmax : 0.0;
}

struct EnvelopeFit {
  double slope = 0.0;  ///< d log(envelope) / d log x
  double r2 = 0.0;
  std::size_t points = 0;
};

/// Power-law fit of the amplitude envelope over [lo, hi] from the peaks; falls
/// back to log R itself when the solution barely oscillates there.
inline EnvelopeFit fit_envelope(const ShootingTrajectory& t, double lo, double hi) {
  std::vector<double> lx, ly;
  for (const auto& p : amplitude_peaks(t)) {
    if (p.x >= lo && p.x <= hi) {
      lx.push_back(std::log(p.x));
      ly.push_back(p.log_value);
    }
  }
  if (lx.size() < 8) {
    lx.clear();
    ly.clear();
    for (std::size_t j = 0; j < t.size(); ++j) {
      if (t.x[j] >= lo && t.x[j] <= hi && t.x[j] > 0.0) {
        lx.push_back(std::log(t.x[j]));
        ly.push_back(t.log_amplitude[j]);
      }
    }
  }
  const auto fit = linear_fit(lx, ly);
  return {fit.slope, fit.r2, fit.count};
}

/// Fraction of the flat-measure mass of w in the last quarter of the domain.
inline double tail_mass_ratio(const ShootingTrajectory& t) {
  if (t.size() < 2) return 0.0;
  const double ref = t.max_log_amplitude();
  const double cut = t.x.front() + 0.75 * (t.x.back() - t.x.front());
  double total = 0.0, tail = 0.0;
  auto dens = [&](std::size_t j) {
    const double s = std::sin(t.phase[j]);
    return std::exp(2.0 * (t.log_amplitude[j] - ref)) * s * s;
  };
  for (std::size_t j = 0; j + 1 < t.size(); ++j) {
    const double piece = 0.5 * (dens(j) + dens(j + 1)) * (t.x[j + 1] - t.x[j]);
    total += piece;
    if (t.x[j] >= cut) tail += piece;
  }
  return total > 0.0 ? std::clamp(tail / total, 0.0, 1.0) : 0.0;
}

enum class Classification { l2_candidate, oscillatory, inconclusive };

inline const char* to_string(Classification c) {
  switch (c) {
    case Classification::l2_candidate: return "L2_candidate";
    case Classification::oscillatory: return "oscillatory";
    case Classification::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

/// Classification thresholds; tool constants, not properties of any manifold.
struct ClassifyOptions {
  SolverOptions solver;
  Boundary boundary = Boundary::dirichlet();
  /// L^2 on the half-line needs a decay exponent above 1/2; this margin on top.
  double exponent_margin = 0.1;
  double oscillatory_band = 0.1;
  double tail_mass_min = 0.15;
  double fit_r2_min = 0.9;
};

struct EigenScanResult {
  std::size_t mode = 0;
  double lambda = 0.0;
  Classification classification = Classification::inconclusive;
  double tail_mass_ratio = 0.0;
  /// p in R ~ x^-p for the decaying solution (= growth exponent of the dominant one).
  double envelope_exponent = 0.0;
  double fit_r2 = 0.0;
  /// Envelope slope of the regular solution itself.
  double regular_slope = 0.0;
  /// (w^2 + w'^2)(X) / (w^2 + w'^2)(x0) for the regular solution, logged for inspection.
  double flux_ratio = 0.0;
  std::optional<std::pair<double, double>> refinement;
};

inline EigenScanResult classify(const RadialOperator& op, double lambda,
                                const ClassifyOptions& opt = {}) {
  const auto regular = integrate(op, lambda, opt.boundary, opt.solver);
  const Boundary other =
      opt.boundary.kind == Boundary::Kind::dirichlet ? Boundary::neumann() : Boundary::dirichlet();
  const auto partner = integrate(op, lambda, other, opt.solver);
  const double mid = op.x0() + 0.5 * (op.X() - op.x0());
  const auto f_reg = fit_envelope(regular, mid, op.X());
  const auto f_par = fit_envelope(partner, mid, op.X());
  const auto& dom = f_reg.slope >= f_par.slope ? f_reg : f_par;

  EigenScanResult r;
  r.mode = op.mode();
  r.lambda = lambda;
  r.envelope_exponent = dom.slope;
  r.fit_r2 = dom.r2;
  r.regular_slope = f_reg.slope;
  r.tail_mass_ratio = tail_mass_ratio(regular);
  const std::size_t last = regular.size() - 1;
  auto energy = [&](std::size_t j) {
    const double w = std::sin(regular.phase[j]);
    const double wp = regular.frequency[j] * std::cos(regular.phase[j]);
    return 2.0 * regular.log_amplitude[j] + std::log(w * w + wp * wp);
  };
  r.flux_ratio = std::exp(energy(last) - energy(0));
  if (r.envelope_exponent > 0.5 + opt.exponent_margin && r.fit_r2 >= opt.fit_r2_min) {
    r.classification = Classification::l2_candidate;
  } else if (std::abs(r.envelope_exponent) <= opt.oscillatory_band &&
             r.tail_mass_ratio >= opt.tail_mass_min) {
    r.classification = Classification::oscillatory;
  } else {
    r.classification = Classification::inconclusive;
  }
  return r;
}

/// Classifies every (operator, lambda) pair; rows are ordered operator-major
/// regardless of the thread count. Candidate rows get their grid neighbours as
/// refinement bracket.
inline std::vector<EigenScanResult> scan(const std::vector<RadialOperator>& ops,
                                         const std::vector<double>& lambdas,
                                         const ClassifyOptions& opt = {}, unsigned threads = 0) {
  std::vector<EigenScanResult> rows(ops.size() * lambdas.size());
  parallel_for(
      rows.size(),
      [&](std::size_t idx) {
        const std::size_t i = idx / lambdas.size(), j = idx % lambdas.size();
        rows[idx] = classify(ops[i], lambdas[j], opt);
      },
      threads);
  for (std::size_t idx = 0; idx < rows.size(); ++idx) {
    if (rows[idx].classification != Classification::l2_candidate) continue;
    const std::size_t j = idx % lambdas.size();
    const double lo = j > 0 ? lambdas[j - 1] : lambdas[j];
    const double hi = j + 1 < lambdas.size() ? lambdas[j + 1] : lambdas[j];
    rows[idx].refinement = std::pair{lo, hi};
  }
  return rows;
}

struct RefinedCandidate {
  double lambda_star = 0.0;
  double quality = 0.0;  ///< min over +-delta of T(lambda* +- delta) / T(lambda*)
  double tail_amplitude = 0.0;
};

struct RefineOptions {
  SolverOptions solver;
  double extension = 2.0;
  std::size_t coarse_points = 21;
  double tolerance = 1e-5;
  double min_contrast = 2.0;
};

/// Mean of R over the last quarter of [x0, X] for the decaying solution
/// normalised to R(x0) = 1.
inline double tail_amplitude(const RadialOperator& op, double lambda, const RefineOptions& opt = {}) {
  const auto t = subdominant_trajectory(op, lambda, opt.extension, opt.solver);
  const double cut = op.x0() + 0.75 * (op.X() - op.x0());
  double sum = 0.0, len = 0.0;
  for (std::size_t j = 0; j + 1 < t.size(); ++j) {
    if (t.x[j] < cut) continue;
    const double dx = t.x[j + 1] - t.x[j];
    sum += 0.5 * (t.amplitude(j) + t.amplitude(j + 1)) * dx;
    len += dx;
  }
  return len > 0.0 ? sum / len : t.amplitude(t.size() - 1);
}

/// Minimises the tail amplitude over [lo, hi]: coarse scan, then golden
/// section between the neighbours of the coarse minimum.
inline RefinedCandidate refine_candidate(const RadialOperator& op, double lo, double hi,
                                         const RefineOptions& opt = {}) {
  if (!(hi > lo) || opt.coarse_points < 3) throw ParameterError("refinement needs lo < hi");
  auto T = [&](double l) { return tail_amplitude(op, l, opt); };
  const std::size_t m = opt.coarse_points;
  std::vector<double> grid(m), vals(m);
  for (std::size_t j = 0; j < m; ++j) {
    grid[j] = lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(m - 1);
    vals[j] = T(grid[j]);
  }
  const auto best = static_cast<std::size_t>(std::min_element(vals.begin(), vals.end()) - vals.begin());
  if (best == 0 || best == m - 1) {
    throw BracketError("tail amplitude has no interior minimum on [" + std::to_string(lo) + ", " +
                       std::to_string(hi) + "]");
  }
  double a = grid[best - 1], b = grid[best + 1];
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = T(c), fd = T(d);
  while (b - a > opt.tolerance) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = T(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = T(d);
    }
  }
  RefinedCandidate out;
  out.lambda_star = fc < fd ? c : d;
  out.tail_amplitude = std::min(fc, fd);
  const double delta = (hi - lo) / 10.0;
  out.quality = std::min(T(out.lambda_star - delta), T(out.lambda_star + delta)) / out.tail_amplitude;
  if (out.quality < opt.min_contrast) {
    throw BracketError("tail amplitude is flat on [" + std::to_string(lo) + ", " + std::to_string(hi) +
                       "] (contrast " + std::to_string(out.quality) + ")");
  }
  return out;
}

enum class DecayModel { power, exponential };

/// Flat amplitude |w|, or the geometric density h^{n-1} u^2 = w^2.
enum class DecayMeasure { flat_amplitude, geometric_density };

struct DecayEstimate {
  double rate = 0.0;
  double r2 = 0.0;
  std::size_t points = 0;
};

namespace detail {

inline DecayEstimate fit_decay(const std::vector<double>& x, const std::vector<double>& logv,
                               DecayModel model, DecayMeasure measure, double r2_min) {
  std::vector<double> abscissa(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    abscissa[i] = model == DecayModel::power ? std::log(x[i]) : x[i];
  }
  std::vector<double> ord = logv;
  if (measure == DecayMeasure::geometric_density) {
    for (double& v : ord) v *= 2.0;
  }
  const auto fit = linear_fit(abscissa, ord);
  if (fit.count < 3 || fit.r2 < r2_min) {
    throw EstimationError("decay fit too poor (R^2=" + std::to_string(fit.r2) + ", " +
                          std::to_string(fit.count) + " points)");
  }
  return {-fit.slope, fit.r2, fit.count};
}

}  // namespace detail

/// Decay rate of the envelope of sampled w over x >= x_from: maxima between
/// sign changes (parabolically refined) when w oscillates, |w| itself otherwise.
inline DecayEstimate estimate_decay(std::span<const double> x, std::span<const double> w,
                                    DecayModel model, double x_from = -std::numeric_limits<double>::infinity(),
                                    DecayMeasure measure = DecayMeasure::flat_amplitude,
                                    double r2_min = 0.8) {
  std::vector<double> px, pv;
  std::size_t start = 0;
  while (start < x.size() && x[start] < x_from) ++start;
  std::size_t run_begin = start;
  for (std::size_t i = start; i <= x.size(); ++i) {
    const bool boundary = i == x.size() || (i > run_begin && (w[i] > 0.0) != (w[run_begin] > 0.0)) ||
                          w[i] == 0.0;
    if (!boundary) continue;
    if (i > run_begin + 2 && run_begin > start) {
      std::size_t k = run_begin;
      for (std::size_t j = run_begin; j < i; ++j) {
        if (std::abs(w[j]) > std::abs(w[k])) k = j;
      }
      double xm = x[k], vm = std::abs(w[k]);
      if (k > run_begin && k + 1 < i) {
        const double x0 = x[k - 1], x1 = x[k], x2 = x[k + 1];
        const double y0 = std::abs(w[k - 1]), y1 = vm, y2 = std::abs(w[k + 1]);
        const double d01 = (y1 - y0) / (x1 - x0), d12 = (y2 - y1) / (x2 - x1);
        const double c2 = (d12 - d01) / (x2 - x0);
        if (c2 < 0.0) {
          const double c1 = d01 - c2 * (x0 + x1);
          xm = -c1 / (2.0 * c2);
          vm = y1 + c1 * (xm - x1) + c2 * (xm * xm - x1 * x1);
        }
      }
      if (vm > 0.0) {
        px.push_back(xm);
        pv.push_back(std::log(vm));
      }
    }
    run_begin = i < x.size() && w[i] == 0.0 ? i + 1 : i;
  }
  if (px.size() < 8) {
    px.clear();
    pv.clear();
    for (std::size_t i = start; i < x.size(); ++i) {
      if (w[i] != 0.0) {
        px.push_back(x[i]);
        pv.push_back(std::log(std::abs(w[i])));
      }
    }
  }
  return detail::fit_decay(px, pv, model, measure, r2_min);
}

/// Decay rate of a trajectory's amplitude peaks over its last `fraction`.
inline DecayEstimate estimate_decay(const ShootingTrajectory& t, DecayModel model,
                                    double fraction = 0.5,
                                    DecayMeasure measure = DecayMeasure::flat_amplitude,
                                    double r2_min = 0.8) {
  const double from = t.x.back() - fraction * (t.x.back() - t.x.front());
  std::vector<double> px, pv;
  for (const auto& p : amplitude_peaks(t)) {
    if (p.x >= from) {
      px.push_back(p.x);
      pv.push_back(p.log_value);
    }
  }
  if (px.size() < 8) {
    px.clear();
    pv.clear();
    for (std::size_t j = 0; j < t.size(); ++j) {
      if (t.x[j] >= from) {
        px.push_back(t.x[j]);
        pv.push_back(t.log_amplitude[j]);
      }
    }
  }
  return detail::fit_decay(px, pv, model, measure, r2_min);
}

/// First `count` Dirichlet eigenvalues on [x0, X] by phase counting: the k-th
/// (k = 0, 1, ...) is where the terminal phase equals (k+1) pi.
inline std::vector<double> dirichlet_interval_eigenvalues(const RadialOperator& op, std::size_t count,
                                                          const SolverOptions& opt = {},
                                                          double tol = 1e-11) {
  double qmin = std::numeric_limits<double>::infinity();
  const std::size_t samples = 4096;
  for (std::size_t j = 0; j <= samples; ++j) {
    qmin = std::min(qmin, op.potential(op.x0() + (op.X() - op.x0()) * static_cast<double>(j) /
                                                   static_cast<double>(samples)));
  }
  auto phase = [&](double l) { return terminal_phase(op, l, Boundary::dirichlet(), opt); };
  std::vector<double> out;
  double lo = qmin - 1.0;
  for (std::size_t k = 0; k < count; ++k) {
    const double target = static_cast<double>(k + 1) * std::numbers::pi;
    double step = std::max(1.0, std::abs(lo));
    double hi = lo + step;
    while (phase(hi) <= target) {
      lo = hi;
      step *= 2.0;
      hi = lo + step;
      if (!std::isfinite(hi)) throw IntegrationError("eigenvalue bracket diverged");
    }
    while (hi - lo > tol * std::max(1.0, std::abs(hi))) {
      const double mid = 0.5 * (lo + hi);
      (phase(mid) > target ? hi : lo) = mid;
    }
    out.push_back(0.5 * (lo + hi));
    lo = out.back();
  }
  return out;
}

}  // namespace warpspec
