#pragma once

// Warping profiles h(r) for ends g = dr^2 + h(r)^2 g_cross and the radial
// geometry they induce:
//   A = h'/h        (Hessian of r is A * g_tilde)
//   K = -h''/h      (radial sectional curvature)
//   A' = -(K + A^2)

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "warpspec/error.hpp"
#include "warpspec/numerics.hpp"

namespace warpspec {

struct ProfilePoint {
  double h = 1.0;
  double log_h = 0.0;
  double A = 0.0;
  double K = 0.0;
  double A_prime = 0.0;
};

namespace detail {

struct PowerLawImpl {
  double theta;
};

// h = exp( int_1^r (t^-alpha + k sin(2t)/t) dt ). The power part integrates in
// closed form; the oscillatory part S(r) = int_1^r sin(2t)/t dt is tabulated at
// integer checkpoints and completed by Gauss-Legendre on at most half a unit.
struct OscillatoryExpImpl {
  double alpha;
  double k;
  std::vector<double> checkpoints;  // S(1), S(2), ..., S(1 + size - 1)

  static constexpr int kCacheRadius = 16384;

  OscillatoryExpImpl(double a, double kk) : alpha(a), k(kk) {
    checkpoints.resize(kCacheRadius);
    checkpoints[0] = 0.0;
    for (int j = 1; j < kCacheRadius; ++j) {
      checkpoints[j] = checkpoints[j - 1] + unit_piece(static_cast<double>(j),
                                                       static_cast<double>(j + 1));
    }
  }

  static double integrand(double t) { return std::sin(2.0 * t) / t; }

  static double unit_piece(double a, double b) {
    return boost::math::quadrature::gauss<double, 20>::integrate(integrand, a, b);
  }

  // int_x^inf sin(2t)/t dt via the auxiliary functions of the sine integral.
  static double tail(double x) {
    const double z = 2.0 * x, z2 = z * z;
    const double f = (1.0 - 2.0 / z2 + 24.0 / (z2 * z2) - 720.0 / (z2 * z2 * z2)) / z;
    const double g = (1.0 - 6.0 / z2 + 120.0 / (z2 * z2) - 5040.0 / (z2 * z2 * z2)) / z2;
    return f * std::cos(z) + g * std::sin(z);
  }

  double oscillatory_integral(double r) const {
    const double last = static_cast<double>(kCacheRadius);
    if (r >= last) {
      return checkpoints.back() + tail(last) - tail(r);
    }
    const double anchor = std::max(1.0, std::min(std::round(r), last));
    const double base = checkpoints[static_cast<std::size_t>(anchor) - 1];
    if (r == anchor) return base;
    using gl = boost::math::quadrature::gauss<double, 10>;
    return r > anchor ? base + gl::integrate(integrand, anchor, r)
                      : base - gl::integrate(integrand, r, anchor);
  }

  double log_h(double r) const {
    const double p = 1.0 - alpha;
    return (std::pow(r, p) - 1.0) / p + k * oscillatory_integral(r);
  }
};

// log h = c r^p
struct ExpPowerImpl {
  double c;
  double p;
};

struct SampledImpl {
  NaturalCubicSpline spline;
};

struct ProfileImpl {
  std::variant<PowerLawImpl, OscillatoryExpImpl, ExpPowerImpl, SampledImpl> kind;
  double r_min;
};

}  // namespace detail

enum class ProfileKind { power_law, oscillatory_exp, exp_power, sampled };

/// Immutable warping profile; copies share the (possibly tabulated) state.
class WarpingProfile {
 public:
  /// h = r^theta.
  static WarpingProfile power_law(double theta, double r_min = 1.0) {
    if (!(theta > 0.0)) throw ParameterError("power-law exponent must be positive");
    check_r_min(r_min);
    return WarpingProfile(detail::PowerLawImpl{theta}, r_min);
  }

  /// A(r) = r^-alpha + k sin(2r)/r with h(1) = 1; r_min is 1.
  static WarpingProfile oscillatory_exp(double alpha, double k) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("oscillatory profile needs 0 < alpha < 1");
    if (!std::isfinite(k)) throw ParameterError("oscillatory amplitude must be finite");
    return WarpingProfile(detail::OscillatoryExpImpl(alpha, k), 1.0);
  }

  /// h = exp(c r^p): covers e^r, e^{r^2} and exp(r^{1-alpha}/(1-alpha)).
  static WarpingProfile exp_power(double c, double p, double r_min = 1.0) {
    if (!std::isfinite(c) || !(p > 0.0)) throw ParameterError("exp-power profile needs finite c and p > 0");
    check_r_min(r_min);
    return WarpingProfile(detail::ExpPowerImpl{c, p}, r_min);
  }

  /// Natural cubic spline through tabulated (r, h).
  static WarpingProfile sampled(std::vector<double> r, std::vector<double> h) {
    if (r.size() < 3) throw ParameterError("sampled profile needs at least 3 rows");
    check_r_min(r.front());
    for (double v : h) {
      if (!(v > 0.0)) throw ParameterError("sampled profile values must be positive");
    }
    const double r_min = r.front();
    return WarpingProfile(detail::SampledImpl{NaturalCubicSpline(std::move(r), std::move(h))},
                          r_min);
  }

  /// Two-column CSV `r,h` with a header row and strictly increasing r.
  static WarpingProfile from_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParameterError("cannot open profile file " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw ParameterError("profile file " + path.string() + " is empty");
    if (trim(line) != "r,h") throw ParameterError("profile file header must be 'r,h', got '" + line + "'");
    std::vector<double> r, h;
    std::size_t row = 1;
    while (std::getline(in, line)) {
      ++row;
      if (trim(line).empty()) continue;
      const auto comma = line.find(',');
      if (comma == std::string::npos) {
        throw ParameterError("profile file row " + std::to_string(row) + " is not 'r,h'");
      }
      try {
        std::size_t used = 0;
        const std::string a = trim(line.substr(0, comma)), b = trim(line.substr(comma + 1));
        const double rv = std::stod(a, &used);
        if (used != a.size()) throw std::invalid_argument(a);
        const double hv = std::stod(b, &used);
        if (used != b.size()) throw std::invalid_argument(b);
        if (!r.empty() && !(rv > r.back())) {
          throw ParameterError("profile file r column must be strictly increasing (row " +
                               std::to_string(row) + ")");
        }
        r.push_back(rv);
        h.push_back(hv);
      } catch (const std::invalid_argument&) {
        throw ParameterError("profile file row " + std::to_string(row) + " is not numeric");
      } catch (const std::out_of_range&) {
        throw ParameterError("profile file row " + std::to_string(row) + " is out of range");
      }
    }
    return sampled(std::move(r), std::move(h));
  }

  double r_min() const { return impl_->r_min; }

  ProfileKind kind() const { return static_cast<ProfileKind>(impl_->kind.index()); }

  /// Power-law exponent, when the profile is one.
  std::optional<double> power_exponent() const {
    if (auto* p = std::get_if<detail::PowerLawImpl>(&impl_->kind)) return p->theta;
    return std::nullopt;
  }

  std::string describe() const {
    std::ostringstream os;
    os.precision(17);
    std::visit(
        [&](const auto& k) {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, detail::PowerLawImpl>) {
            os << "power_law(theta=" << k.theta << ")";
          } else if constexpr (std::is_same_v<T, detail::OscillatoryExpImpl>) {
            os << "oscillatory_exp(alpha=" << k.alpha << ", k=" << k.k << ")";
          } else if constexpr (std::is_same_v<T, detail::ExpPowerImpl>) {
            os << "exp_power(c=" << k.c << ", p=" << k.p << ")";
          } else {
            os << "sampled[" << k.spline.front() << ", " << k.spline.back() << "]";
          }
        },
        impl_->kind);
    return os.str();
  }

  /// h, A = h'/h, K = -h''/h and A' at r >= r_min.
  ProfilePoint operator()(double r) const {
    if (!(r >= impl_->r_min)) {
      throw DomainError("profile evaluated at r=" + std::to_string(r) + " below r_min=" +
                        std::to_string(impl_->r_min));
    }
    ProfilePoint p;
    std::visit(
        [&](const auto& k) {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, detail::PowerLawImpl>) {
            p.log_h = k.theta * std::log(r);
            p.A = k.theta / r;
            p.A_prime = -k.theta / (r * r);
            p.K = k.theta * (1.0 - k.theta) / (r * r);
          } else if constexpr (std::is_same_v<T, detail::OscillatoryExpImpl>) {
            const double s = std::sin(2.0 * r), c = std::cos(2.0 * r);
            const double power = std::pow(r, -k.alpha);
            p.log_h = k.log_h(r);
            p.A = power + k.k * s / r;
            p.A_prime = -k.alpha * power / r + k.k * (2.0 * c / r - s / (r * r));
            p.K = -(p.A_prime + p.A * p.A);
          } else if constexpr (std::is_same_v<T, detail::ExpPowerImpl>) {
            const double rp = std::pow(r, k.p);
            p.log_h = k.c * rp;
            p.A = k.c * k.p * rp / r;
            p.A_prime = k.c * k.p * (k.p - 1.0) * rp / (r * r);
            p.K = -(p.A_prime + p.A * p.A);
          } else {
            if (r > k.spline.back()) {
              throw DomainError("sampled profile evaluated at r=" + std::to_string(r) +
                                " beyond its last row " + std::to_string(k.spline.back()));
            }
            const auto [h, d1, d2] = k.spline.eval(r);
            if (!(h > 0.0)) {
              throw EvaluationError("sampled profile interpolant is non-positive at r=" +
                                    std::to_string(r));
            }
            p.log_h = std::log(h);
            p.A = d1 / h;
            p.K = -d2 / h;
            p.A_prime = d2 / h - p.A * p.A;
          }
        },
        impl_->kind);
    p.h = std::exp(p.log_h);
    return p;
  }

  /// Largest radius the profile can be evaluated at.
  double r_max() const {
    if (auto* s = std::get_if<detail::SampledImpl>(&impl_->kind)) return s->spline.back();
    return std::numeric_limits<double>::infinity();
  }

 private:
  template <class Impl>
  WarpingProfile(Impl impl, double r_min)
      : impl_(std::make_shared<const detail::ProfileImpl>(detail::ProfileImpl{std::move(impl), r_min})) {}

  static void check_r_min(double r_min) {
    if (!(r_min > 0.0) || !std::isfinite(r_min)) throw ParameterError("profile r_min must be positive");
  }

  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }

  std::shared_ptr<const detail::ProfileImpl> impl_;
};

inline ProfilePoint eval_profile(const WarpingProfile& profile, double r) { return profile(r); }

/// The critical oscillatory profile: A(r) = r^-alpha + k sin(2r)/r, h(1) = 1,
/// with 1/2 < alpha < 1 and |k| > 1.
inline WarpingProfile make_critical_profile(double alpha, double k) {
  if (!(alpha > 0.5 && alpha < 1.0)) throw ParameterError("critical profile needs 1/2 < alpha < 1");
  if (!(std::abs(k) > 1.0)) throw ParameterError("critical profile needs |k| > 1");
  return WarpingProfile::oscillatory_exp(alpha, k);
}

/// Reference profile with f'/f = r^-alpha exactly (the non-oscillating part).
inline WarpingProfile make_power_decay_reference(double alpha) {
  return WarpingProfile::exp_power(1.0 / (1.0 - alpha), 1.0 - alpha);
}

/// An end with radial coordinates carrying a warped-product metric.
struct EndGeometry {
  int n = 2;
  double r0 = 1.0;
  WarpingProfile profile = WarpingProfile::power_law(1.0);
  /// Distinct cross-section Laplacian eigenvalues, ascending, starting at 0.
  std::vector<double> cross_section_eigenvalues{0.0};

  EndGeometry() = default;
  EndGeometry(int dim, double start, WarpingProfile prof, std::vector<double> eigenvalues)
      : n(dim), r0(start), profile(std::move(prof)), cross_section_eigenvalues(std::move(eigenvalues)) {
    validate();
  }

  void validate() const {
    if (n < 2) throw ParameterError("dimension must be at least 2");
    if (!(r0 > 0.0) || r0 < profile.r_min()) {
      throw ParameterError("end start r0=" + std::to_string(r0) + " must be positive and >= profile r_min");
    }
    if (cross_section_eigenvalues.empty() || cross_section_eigenvalues.front() != 0.0) {
      throw ParameterError("cross-section spectrum must start with the eigenvalue 0");
    }
    for (std::size_t i = 1; i < cross_section_eigenvalues.size(); ++i) {
      if (!(cross_section_eigenvalues[i] >= cross_section_eigenvalues[i - 1])) {
        throw ParameterError("cross-section spectrum must be sorted ascending");
      }
    }
  }

  double hat(double c) const { return (n - 1) * c; }
};

struct RadialCurvature {
  double hessian_coeff = 0.0;   ///< nabla dr = hessian_coeff * g_tilde
  double ricci_radial = 0.0;    ///< Ric(grad r, grad r)
  double laplacian_r = 0.0;     ///< Delta r
  double hessian_norm_sq = 0.0; ///< |nabla dr|^2
  /// Relative residual of -d(Delta r)/dr = |nabla dr|^2 + Ric(grad r, grad r).
  double riccati_residual = 0.0;
};

inline RadialCurvature hessian_and_ricci(const EndGeometry& end, double r) {
  if (!(r >= end.r0)) {
    throw DomainError("r=" + std::to_string(r) + " lies before the end start " + std::to_string(end.r0));
  }
  const auto p = end.profile(r);
  const double m = end.n - 1;
  RadialCurvature c;
  c.hessian_coeff = p.A;
  c.ricci_radial = m * p.K;
  c.laplacian_r = m * p.A;
  c.hessian_norm_sq = m * p.A * p.A;
  const double lhs = -m * p.A_prime;
  const double rhs = c.hessian_norm_sq + c.ricci_radial;
  const double scale = std::abs(lhs) + std::abs(c.hessian_norm_sq) + std::abs(c.ricci_radial);
  c.riccati_residual = scale > 0.0 ? std::abs(lhs - rhs) / scale : 0.0;
  return c;
}

}  // namespace warpspec
