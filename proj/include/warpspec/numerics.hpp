#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <exception>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "warpspec/error.hpp"

namespace warpspec {

/// Closed radial interval [lo, hi].
struct Window {
  double lo = 1.0;
  double hi = 2.0;

  double length() const { return hi - lo; }
  bool contains(double r) const { return r >= lo && r <= hi; }
  double octaves() const { return std::log2(hi / lo); }
};

inline void validate_window(const Window& w, double domain_start = 0.0) {
  if (!(std::isfinite(w.lo) && std::isfinite(w.hi)) || !(w.lo > 0.0) || !(w.hi > w.lo)) {
    throw WindowError("window [" + std::to_string(w.lo) + ", " + std::to_string(w.hi) +
                      "] must satisfy 0 < lo < hi < inf");
  }
  if (w.lo < domain_start) {
    throw WindowError("window starts at " + std::to_string(w.lo) + " before the domain start " +
                      std::to_string(domain_start));
  }
}

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t count = 0;
};

/// Ordinary least squares y ~ intercept + slope * x.
inline LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
  LinearFit fit;
  fit.count = std::min(x.size(), y.size());
  if (fit.count < 2) return fit;
  const auto n = static_cast<double>(fit.count);
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < fit.count; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < fit.count; ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx <= 0.0) return fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  // A perfectly flat response is a perfect fit.
  fit.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

/// C^2 natural cubic spline through (x_i, y_i), x strictly increasing.
class NaturalCubicSpline {
 public:
  NaturalCubicSpline() = default;

  NaturalCubicSpline(std::vector<double> x, std::vector<double> y)
      : x_(std::move(x)), y_(std::move(y)), m_(x_.size(), 0.0) {
    const std::size_t n = x_.size();
    if (n < 3 || y_.size() != n) {
      throw ParameterError("spline needs at least 3 points and matching columns");
    }
    for (std::size_t i = 1; i < n; ++i) {
      if (!(x_[i] > x_[i - 1])) throw ParameterError("spline abscissae must be strictly increasing");
    }
    // Thomas algorithm for the second derivatives, natural end conditions.
    std::vector<double> c(n, 0.0), d(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double h0 = x_[i] - x_[i - 1], h1 = x_[i + 1] - x_[i];
      const double diag = 2.0 * (h0 + h1);
      const double rhs = 6.0 * ((y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0);
      const double denom = diag - h0 * c[i - 1];
      c[i] = h1 / denom;
      d[i] = (rhs - h0 * d[i - 1]) / denom;
    }
    for (std::size_t i = n - 2; i >= 1; --i) {
      m_[i] = d[i] - c[i] * m_[i + 1];
    }
  }

  double front() const { return x_.front(); }
  double back() const { return x_.back(); }

  /// Value, first and second derivative at t.
  std::array<double, 3> eval(double t) const {
    auto it = std::upper_bound(x_.begin(), x_.end(), t);
    std::size_t i = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
    i = std::min(i, x_.size() - 2);
    const double h = x_[i + 1] - x_[i];
    const double a = (x_[i + 1] - t) / h, b = (t - x_[i]) / h;
    const double v = a * y_[i] + b * y_[i + 1] +
                     ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6.0;
    const double d1 = (y_[i + 1] - y_[i]) / h +
                      (-(3.0 * a * a - 1.0) * m_[i] + (3.0 * b * b - 1.0) * m_[i + 1]) * h / 6.0;
    const double d2 = a * m_[i] + b * m_[i + 1];
    return {v, d1, d2};
  }

 private:
  std::vector<double> x_, y_, m_;
};

struct GridOptions {
  double points_per_unit = 64.0;
  /// Halving stops once a period of pi would get fewer samples than this.
  double min_points_per_period = 20.0;
  std::size_t max_points = std::size_t{1} << 21;
};

/// Density actually used for a window: 64/unit, halved while the grid is too
/// large and the frequency-2 oscillation stays resolved.
inline double grid_density(const Window& w, const GridOptions& opt = {}) {
  double density = opt.points_per_unit;
  const double floor = opt.min_points_per_period / std::numbers::pi;
  while (w.length() * density > static_cast<double>(opt.max_points) && density / 2.0 >= floor) {
    density /= 2.0;
  }
  return density;
}

/// Uniform grid covering [lo, hi] inclusive at grid_density.
inline std::vector<double> radial_grid(const Window& w, const GridOptions& opt = {}) {
  validate_window(w);
  const double density = grid_density(w, opt);
  const auto intervals =
      std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(w.length() * density)));
  std::vector<double> grid(intervals + 1);
  const double step = w.length() / static_cast<double>(intervals);
  for (std::size_t i = 0; i <= intervals; ++i) grid[i] = w.lo + step * static_cast<double>(i);
  grid.back() = w.hi;
  return grid;
}

/// Octave-wise samples of [lo, hi] with at most `per_octave` points per octave;
/// used when a uniform grid would be prohibitively large.
inline std::vector<double> octave_samples(const Window& w, std::size_t per_octave,
                                          double max_spacing = std::numbers::pi / 20.0) {
  validate_window(w);
  std::vector<double> out;
  double start = w.lo;
  while (start < w.hi) {
    const double end = std::min(2.0 * start, w.hi);
    const auto count = std::min<std::size_t>(
        per_octave, std::max<std::size_t>(2, static_cast<std::size_t>((end - start) / max_spacing)));
    const double step = (end - start) / static_cast<double>(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(start + step * static_cast<double>(i));
    start = end;
  }
  out.push_back(w.hi);
  return out;
}

/// Maxima of |g| over dyadic octaves [lo 2^j, lo 2^(j+1)) and a log-log fit.
struct OctaveEnvelope {
  std::vector<double> centers;
  std::vector<double> maxima;
  double decay_exponent = 0.0;  ///< -(fitted slope) of log max vs log r
  double r2 = 0.0;
  bool strictly_decreasing = false;
  double min_log_drop = 0.0;  ///< min_j log(M_j / M_{j+1}); positive iff strictly decreasing
  bool negligible = false;    ///< every maximum below the absolute floor
};

inline OctaveEnvelope octave_envelope(std::span<const double> x, std::span<const double> g,
                                      const Window& w, double negligible_floor = 1e-12) {
  validate_window(w);
  const auto octaves = static_cast<std::size_t>(std::floor(w.octaves() + 1e-9));
  if (octaves < 3) {
    throw WindowError("asymptotic check needs at least 3 dyadic octaves, window [" +
                      std::to_string(w.lo) + ", " + std::to_string(w.hi) + "] has " +
                      std::to_string(w.octaves()));
  }
  OctaveEnvelope env;
  env.maxima.assign(octaves, 0.0);
  std::vector<bool> seen(octaves, false);
  for (std::size_t i = 0; i < std::min(x.size(), g.size()); ++i) {
    if (x[i] < w.lo || x[i] > w.hi) continue;
    auto j = static_cast<std::size_t>(std::floor(std::log2(x[i] / w.lo)));
    if (j >= octaves) j = octaves - 1;
    env.maxima[j] = std::max(env.maxima[j], std::abs(g[i]));
    seen[j] = true;
  }
  for (std::size_t j = 0; j < octaves; ++j) {
    if (!seen[j]) throw WindowError("octave " + std::to_string(j) + " of the window has no samples");
    env.centers.push_back(w.lo * std::exp2(static_cast<double>(j) + 0.5));
  }
  const double top = *std::max_element(env.maxima.begin(), env.maxima.end());
  env.negligible = top <= negligible_floor;
  if (env.negligible) {
    env.strictly_decreasing = true;
    return env;
  }
  env.min_log_drop = std::numeric_limits<double>::infinity();
  std::vector<double> lx, ly;
  for (std::size_t j = 0; j < octaves; ++j) {
    const double m = std::max(env.maxima[j], std::numeric_limits<double>::min());
    lx.push_back(std::log(env.centers[j]));
    ly.push_back(std::log(m));
    if (j > 0) {
      const double prev = std::max(env.maxima[j - 1], std::numeric_limits<double>::min());
      env.min_log_drop = std::min(env.min_log_drop, std::log(prev / m));
    }
  }
  const auto fit = linear_fit(lx, ly);
  env.decay_exponent = -fit.slope;
  env.r2 = fit.r2;
  env.strictly_decreasing = env.min_log_drop > 0.0;
  return env;
}

/// Finite-window surrogate for "g(r) -> 0": negligible, or octave maxima
/// strictly decreasing with fitted decay exponent at least `min_exponent`.
inline bool tends_to_zero(const OctaveEnvelope& env, double min_exponent) {
  return env.negligible || (env.strictly_decreasing && env.decay_exponent >= min_exponent);
}

/// Signed margin of tends_to_zero: >= 0 iff it holds.
inline double tends_to_zero_margin(const OctaveEnvelope& env, double min_exponent) {
  if (env.negligible) return 0.0;
  return std::min(env.min_log_drop, env.decay_exponent - min_exponent);
}

/// Rounds margins within `tol` of zero (relative to `scale`) to exactly zero so
/// tight bounds do not fail on the last ulp.
inline double snap_margin(double margin, double scale, double tol = 1e-12) {
  return std::abs(margin) <= tol * (1.0 + std::abs(scale)) ? 0.0 : margin;
}

/// Runs fn(i) for i in [0, count) on up to `threads` workers. Results must be
/// written to per-index slots by the caller.
inline void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn,
                         unsigned threads = 0) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = t; i < count; i += threads) fn(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

/// Inclusive arithmetic grid lo, lo+step, ..., <= hi.
inline std::vector<double> arithmetic_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || !(hi >= lo)) throw ParameterError("grid needs step > 0 and hi >= lo");
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = lo + step * static_cast<double>(i);
  return out;
}

}  // namespace warpspec
