#pragma once

// Separation of variables on a warped end. Expanding in cross-section
// eigenfunctions and substituting w = h^{(n-1)/2} u turns -Delta into the
// family of half-line operators
//
//   L_i = -d^2/dx^2 + q_i(x),
//   q_i = (n-1)(n-3)/4 A_h^2 - (n-1)/2 K_h + lambda_i / h^2,
//
// acting on L^2(dx). Solvers work with the flat-measure w; the geometric u is
// recovered with geometric_solution().

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "warpspec/conditions.hpp"
#include "warpspec/error.hpp"
#include "warpspec/geometry.hpp"

namespace warpspec {

struct SphereEigenvalue {
  int l = 0;
  double value = 0.0;
  std::uint64_t multiplicity = 1;
};

/// Laplacian spectrum of the unit sphere S^{n-1}: l(l+n-2) with the dimension
/// of degree-l harmonic polynomials in n variables as multiplicity.
inline std::vector<SphereEigenvalue> sphere_spectrum(int n, int l_max) {
  if (n < 2) throw ParameterError("sphere spectrum needs n >= 2");
  if (l_max < 0) throw ParameterError("sphere spectrum needs l_max >= 0");
  auto binom = [](std::int64_t top, std::int64_t k) -> std::uint64_t {
    if (k < 0 || top < k) return 0;
    std::uint64_t r = 1;
    for (std::int64_t i = 1; i <= k; ++i) {
      r = r * static_cast<std::uint64_t>(top - k + i) / static_cast<std::uint64_t>(i);
    }
    return r;
  };
  std::vector<SphereEigenvalue> out;
  for (int l = 0; l <= l_max; ++l) {
    SphereEigenvalue e;
    e.l = l;
    e.value = static_cast<double>(l) * static_cast<double>(l + n - 2);
    e.multiplicity = binom(l + n - 1, n - 1) - binom(l + n - 3, n - 1);
    out.push_back(e);
  }
  return out;
}

inline std::vector<double> sphere_eigenvalues(int n, int l_max) {
  std::vector<double> v;
  for (const auto& e : sphere_spectrum(n, l_max)) v.push_back(e.value);
  return v;
}

/// One separated mode -w'' + q w on [x0, X].
class RadialOperator {
 public:
  /// Mode `mode` of a warped end truncated at X.
  static RadialOperator from_end(const EndGeometry& end, std::size_t mode, double X) {
    end.validate();
    if (mode >= end.cross_section_eigenvalues.size()) {
      throw ParameterError("mode index " + std::to_string(mode) + " beyond the " +
                           std::to_string(end.cross_section_eigenvalues.size()) +
                           " cross-section eigenvalues");
    }
    if (!(X > end.r0)) throw DomainError("truncation X must exceed r0");
    if (X > end.profile.r_max()) throw DomainError("truncation X beyond the profile's last radius");
    RadialOperator op;
    op.end_ = std::make_shared<const EndGeometry>(end);
    op.mode_ = mode;
    op.lambda_i_ = end.cross_section_eigenvalues[mode];
    op.x0_ = end.r0;
    op.X_ = X;
    op.label_ = "mode " + std::to_string(mode) + " of " + end.profile.describe();
    return op;
  }

  /// Operator with an explicitly supplied potential (x0 >= 0 allowed).
  static RadialOperator from_potential(std::function<double(double)> q, double x0, double X,
                                       std::string label = "custom") {
    if (!(x0 >= 0.0) || !(X > x0)) throw DomainError("potential domain needs 0 <= x0 < X");
    RadialOperator op;
    op.custom_ = std::move(q);
    op.x0_ = x0;
    op.X_ = X;
    op.label_ = std::move(label);
    return op;
  }

  double potential(double x) const {
    if (!(x >= x0_)) throw DomainError("potential evaluated before x0");
    double q = shift_;
    if (custom_) return q + custom_(x);
    const auto p = end_->profile(x);
    const double m = end_->n - 1;
    q += m * (m - 2.0) / 4.0 * p.A * p.A - m / 2.0 * p.K;
    if (lambda_i_ != 0.0) q += lambda_i_ * std::exp(-2.0 * p.log_h);
    return q;
  }

  /// Cross-section term lambda_i / h^2 (zero for custom potentials).
  double long_range_part(double x) const {
    if (custom_ || lambda_i_ == 0.0) return 0.0;
    return lambda_i_ * std::exp(-2.0 * end_->profile(x).log_h);
  }

  double x0() const { return x0_; }
  double X() const { return X_; }
  std::size_t mode() const { return mode_; }
  double lambda_i() const { return lambda_i_; }
  int n() const { return end_ ? end_->n : 0; }
  const std::string& label() const { return label_; }
  const EndGeometry* end() const { return end_.get(); }

  RadialOperator with_domain(double x0, double X) const {
    if (!(X > x0)) throw DomainError("domain needs x0 < X");
    if (end_ && (x0 < end_->r0 || X > end_->profile.r_max())) {
      throw DomainError("domain leaves the end");
    }
    RadialOperator op = *this;
    op.x0_ = x0;
    op.X_ = X;
    return op;
  }

  /// Same operator with q replaced by q + c.
  RadialOperator shifted(double c) const {
    RadialOperator op = *this;
    op.shift_ += c;
    return op;
  }

  /// u = w / h^{(n-1)/2}; identity for custom potentials.
  double geometric_solution(double x, double w) const {
    if (!end_) return w;
    return w * std::exp(-0.5 * (end_->n - 1) * end_->profile(x).log_h);
  }

 private:
  RadialOperator() = default;

  std::shared_ptr<const EndGeometry> end_;
  std::function<double(double)> custom_;
  std::size_t mode_ = 0;
  double lambda_i_ = 0.0;
  double x0_ = 0.0;
  double X_ = 1.0;
  double shift_ = 0.0;
  std::string label_;
};

inline RadialOperator build_radial_operator(const EndGeometry& end, std::size_t mode, double X) {
  return RadialOperator::from_end(end, mode, X);
}

/// Samples q_i and its cross-section part on a grid for the decay split.
inline SampledPotential sample_potential(const RadialOperator& op, const Window& w,
                                         const GridOptions& grid = {}) {
  if (w.lo < op.x0() || w.hi > op.X()) throw WindowError("sampling window outside the operator domain");
  SampledPotential s;
  s.x = radial_grid(w, grid);
  s.q.reserve(s.x.size());
  s.long_range.reserve(s.x.size());
  for (double x : s.x) {
    s.q.push_back(op.potential(x));
    s.long_range.push_back(op.long_range_part(x));
  }
  return s;
}

/// Number of modes worth scanning for eigenvalues up to lambda_top: since
/// q_i - q_0 = lambda_i / h^2, modes whose cross-section term at x0 exceeds
/// lambda_top + sup|q_0| are pruned.
inline std::size_t modes_to_scan(const EndGeometry& end, double lambda_top, double X,
                                 double samples_per_unit = 16.0) {
  const auto base = RadialOperator::from_end(end, 0, X);
  double sup_q0 = 0.0;
  const auto count = static_cast<std::size_t>(std::ceil((X - end.r0) * samples_per_unit));
  for (std::size_t j = 0; j <= count; ++j) {
    const double x = end.r0 + (X - end.r0) * static_cast<double>(j) / static_cast<double>(count);
    sup_q0 = std::max(sup_q0, std::abs(base.potential(x)));
  }
  const double h0 = end.profile(end.r0).h;
  std::size_t modes = 0;
  for (double li : end.cross_section_eigenvalues) {
    if (li / (h0 * h0) > lambda_top + sup_q0) break;
    ++modes;
  }
  return std::max<std::size_t>(modes, 1);
}

/// Smooth radial test function with its derivative.
struct RadialTestFunction {
  std::function<double(double)> value;
  std::function<double(double)> derivative;
  std::string label;

  static RadialTestFunction zero() {
    return {[](double) { return 0.0; }, [](double) { return 0.0; }, "0"};
  }
  /// v = r^p
  static RadialTestFunction power(double p) {
    return {[p](double r) { return std::pow(r, p); },
            [p](double r) { return p * std::pow(r, p - 1.0); }, "r^" + std::to_string(p)};
  }
  /// v = e^{rate r}
  static RadialTestFunction exponential(double rate) {
    return {[rate](double r) { return std::exp(rate * r); },
            [rate](double r) { return rate * std::exp(rate * r); },
            "exp(" + std::to_string(rate) + " r)"};
  }
  /// v = (sum_j c_j r^j) e^{rate r}
  static RadialTestFunction poly_exp(std::vector<double> coeffs, double rate) {
    auto poly = [coeffs](double r) {
      double p = 0.0, dp = 0.0;
      for (std::size_t j = coeffs.size(); j-- > 0;) {
        dp = dp * r + p;
        p = p * r + coeffs[j];
      }
      return std::pair{p, dp};
    };
    return {[poly, rate](double r) { return poly(r).first * std::exp(rate * r); },
            [poly, rate](double r) {
              const auto [p, dp] = poly(r);
              return (dp + rate * p) * std::exp(rate * r);
            },
            "poly*exp"};
  }
};

struct FluxIdentity {
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;
  double quadrature_error = 0.0;
};

/// Flux identity for a radial function v on a warped end, per unit
/// cross-section volume:
///   [r^beta h^{n-1} v^2]_s^t = int_s^t r^beta h^{n-1} ((Delta r + beta/r) v^2 + 2 v v') dr.
/// Returns both sides and |lhs - rhs| / (|lhs| + |rhs| + 1).
inline FluxIdentity flux_identity_residual(const EndGeometry& end, double beta,
                                           const RadialTestFunction& v, double s, double t,
                                           double quad_tol = 1e-14) {
  if (!(s >= end.r0) || !(t > s) || t > end.profile.r_max()) {
    throw DomainError("flux identity needs r0 <= s < t inside the profile");
  }
  const double m = end.n - 1;
  auto weight = [&](double r) { return std::exp(beta * std::log(r) + m * end.profile(r).log_h); };
  auto integrand = [&](double r) {
    const double A = end.profile(r).A;
    const double val = v.value(r), der = v.derivative(r);
    return weight(r) * ((m * A + beta / r) * val * val + 2.0 * val * der);
  };
  FluxIdentity id;
  id.lhs = weight(t) * v.value(t) * v.value(t) - weight(s) * v.value(s) * v.value(s);
  double err = 0.0;
  id.rhs = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, s, t, 20, quad_tol,
                                                                          &err);
  id.quadrature_error = err;
  if (!std::isfinite(id.rhs) || err > 1e-9 * (std::abs(id.rhs) + 1.0)) {
    throw IntegrationError("flux identity quadrature did not converge (error estimate " +
                           std::to_string(err) + ")");
  }
  id.residual = std::abs(id.lhs - id.rhs) / (std::abs(id.lhs) + std::abs(id.rhs) + 1.0);
  return id;
}

}  // namespace warpspec
