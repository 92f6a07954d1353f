#pragma once

// Closed-form eigenvalue-exclusion thresholds for warped ends. Every constant
// c that enters through a sum over the n-1 cross-section directions appears in
// its "hatted" form (n-1)c.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <optional>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

#include "warpspec/error.hpp"

namespace warpspec {

/// Constants of the Hessian, mean-curvature, variation and Ricci bounds.
struct HypothesisConstants {
  double a = 0.0;    ///< lower Hessian band width (times 1/r)
  double b = 0.0;    ///< upper Hessian band width (times 1/r)
  double A0 = 0.0;   ///< A(r) >= A0/r
  double B0 = 0.0;   ///< A(r) <= B0/sqrt(r)
  double b1 = 0.0;   ///< Ric(grad r, grad r) >= -(n-1) b1 / r
  double K3 = 0.0;   ///< |r (n-1) A'(r)| <= (n-1) K3
  double gamma = 1.0;
  std::optional<double> theta;  ///< exponent of a power-law reference, if any
  int n = 2;

  double hat(double c) const { return (n - 1) * c; }
  double a_hat() const { return hat(a); }
  double b_hat() const { return hat(b); }
  double b1_hat() const { return hat(b1); }
  double K3_hat() const { return hat(K3); }
  double B0_hat() const { return hat(B0); }

  void validate() const {
    if (n < 2) throw ParameterError("dimension must be at least 2");
    const std::pair<const char*, double> positive[] = {{"a", a},   {"b", b},   {"A0", A0},
                                                       {"B0", B0}, {"b1", b1}, {"K3", K3}};
    for (const auto& [name, value] : positive) {
      if (!(value > 0.0) || !std::isfinite(value)) {
        throw ParameterError(std::string("constant ") + name + " must be positive and finite");
      }
    }
    if (theta && !(*theta > 0.0)) throw ParameterError("theta must be positive");
  }
};

/// 2(A0 - a) > (n-1)(a + b).
inline bool check_gap(const HypothesisConstants& c) {
  return 2.0 * (c.A0 - c.a) > c.a_hat() + c.b_hat();
}

/// 2(A0 - a) - (n-1)(a + b); positive iff check_gap holds.
inline double gap_value(double a, double b, double A0, int n) {
  return 2.0 * (A0 - a) - (n - 1) * a - (n - 1) * b;
}

inline double exclusion_y1(double gamma, double a, double b, double A0, int n) {
  const double ah = (n - 1) * a, bh = (n - 1) * b;
  if (!(gamma > (ah + bh) / 2.0)) {
    throw ParameterError("flux exponent gamma must exceed (n-1)(a+b)/2");
  }
  if (!(gap_value(a, b, A0, n) > 0.0)) {
    throw ParameterError("gap condition 2(A0-a) > (n-1)(a+b) fails");
  }
  return std::min((2.0 * gamma + ah - bh) / 2.0, 2.0 * (A0 - a) - bh);
}

/// ((4 b1_hat + B0_hat^2) / (8 (2(A0-a) - a_hat - b_hat)))^2: eigenfunctions
/// decaying exponentially vanish above this value.
inline double vanishing_threshold(double a, double b, double A0, double B0, double b1, int n) {
  const double gap = gap_value(a, b, A0, n);
  if (!(gap > 0.0)) throw ParameterError("gap condition 2(A0-a) > (n-1)(a+b) fails");
  const double b1h = (n - 1) * b1, B0h = (n - 1) * B0;
  const double q = (4.0 * b1h + B0h * B0h) / (8.0 * gap);
  return q * q;
}

/// Lower edge of the eigenvalue-free interval for solutions with
/// liminf t^gamma * flux(t) = 0.
inline double exclusion_threshold(double gamma, double a, double b, double A0, double B0,
                                  double K3, double b1, int n) {
  const double y1 = exclusion_y1(gamma, a, b, A0, n);
  const double ah = (n - 1) * a, bh = (n - 1) * b, K3h = (n - 1) * K3;
  const double d1 = y1 - ah, d2 = 2.0 * gamma - bh - y1;
  if (!(d1 > 0.0) || !(d2 > 0.0)) {
    throw ParameterError("exclusion threshold denominators must be positive");
  }
  const double term_variation = K3h * K3h / (d1 * d2);
  return std::max(term_variation, vanishing_threshold(a, b, A0, B0, b1, n));
}

namespace detail {

using Rational = boost::multiprecision::cpp_rational;

/// The shortest decimal that reads back as v, as an exact fraction. Inputs
/// like 0.1 then mean 1/10 rather than the nearest binary fraction.
inline Rational decimal_rational(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::scientific);
  const std::string text(buf, res.ptr);
  const auto e = text.find('e');
  std::string digits;
  int point = -1;
  bool negative = false;
  for (std::size_t i = 0; i < e; ++i) {
    if (text[i] == '-') negative = true;
    else if (text[i] == '.') point = static_cast<int>(digits.size());
    else digits += text[i];
  }
  int exponent = std::stoi(text.substr(e + 1));
  if (point >= 0) exponent -= static_cast<int>(digits.size()) - point;
  Rational r{boost::multiprecision::cpp_int(digits)};
  const boost::multiprecision::cpp_int ten = boost::multiprecision::pow(boost::multiprecision::cpp_int(10),
                                                                        static_cast<unsigned>(std::abs(exponent)));
  if (exponent >= 0) r *= ten;
  else r /= ten;
  return negative ? -r : r;
}

}  // namespace detail

/// Threshold for power-law ends h ~ r^theta:
/// (1/4) ((n-1) b1 / (2(theta - a) - (n-1)(a+b)))^2.
/// Evaluated exactly on the decimal inputs, then rounded once.
inline double power_law_threshold(double theta, double a, double b, double b1, int n) {
  const double gap = gap_value(a, b, theta, n);
  if (!(gap > 0.0)) throw ParameterError("power-law threshold needs 2(theta-a) > (n-1)(a+b)");
  if (!std::isfinite(theta) || !std::isfinite(a) || !std::isfinite(b) || !std::isfinite(b1)) {
    throw ParameterError("power-law threshold needs finite constants");
  }
  using detail::decimal_rational;
  const detail::Rational m = n - 1;
  const auto g = 2 * (decimal_rational(theta) - decimal_rational(a)) - m * (decimal_rational(a) + decimal_rational(b));
  if (g <= 0) throw ParameterError("power-law threshold needs 2(theta-a) > (n-1)(a+b)");
  const detail::Rational q = m * decimal_rational(b1) / g;
  return static_cast<double>(detail::Rational(q * q / 4));
}

struct DecayRateConstants {
  double c0 = 0.0;
  double c6 = 0.0;
  double c7 = 0.0;
};

inline DecayRateConstants decay_rate_constants(double a, double b, double A0, double B0, double b1,
                                               int n) {
  const double bh = (n - 1) * b, b1h = (n - 1) * b1, B0h = (n - 1) * B0;
  DecayRateConstants c;
  c.c0 = 2.0 - A0 + (n + 1) * a + bh;
  c.c6 = b1h + B0h * B0h / 8.0;
  c.c7 = gap_value(a, b, A0, n);
  return c;
}

/// Exponential decay rate eta_1: the positive root of c0 y^2 + c6 y = c7 lambda
/// for c0 > 0 (written in the cancellation-free form), c7 lambda / c6 otherwise.
/// Both branches meet at c0 = 0.
inline double exponential_decay_rate(double lambda, double a, double b, double A0, double B0,
                                     double b1, int n) {
  if (!(lambda > 0.0)) throw ParameterError("decay rate needs lambda > 0");
  const auto c = decay_rate_constants(a, b, A0, B0, b1, n);
  if (!(c.c7 > 0.0)) throw ParameterError("gap condition 2(A0-a) > (n-1)(a+b) fails");
  if (!(c.c6 > 0.0)) throw ParameterError("decay rate needs b1 or B0 positive");
  if (c.c0 > 0.0) {
    return 2.0 * c.c7 * lambda / (c.c6 + std::sqrt(c.c6 * c.c6 + 4.0 * c.c7 * c.c0 * lambda));
  }
  return c.c7 * lambda / c.c6;
}

struct ThresholdBundle {
  double lambda1 = 0.0;
  double y1 = 0.0;
  std::optional<double> beta;
  double star8 = 0.0;
  DecayRateConstants rate_constants;
  std::function<double(double)> eta1;
};

inline ThresholdBundle evaluate_thresholds(const HypothesisConstants& k) {
  k.validate();
  ThresholdBundle t;
  t.y1 = exclusion_y1(k.gamma, k.a, k.b, k.A0, k.n);
  t.lambda1 = exclusion_threshold(k.gamma, k.a, k.b, k.A0, k.B0, k.K3, k.b1, k.n);
  if (k.theta) t.beta = power_law_threshold(*k.theta, k.a, k.b, k.b1, k.n);
  t.star8 = vanishing_threshold(k.a, k.b, k.A0, k.B0, k.b1, k.n);
  t.rate_constants = decay_rate_constants(k.a, k.b, k.A0, k.B0, k.b1, k.n);
  t.eta1 = [k](double lambda) {
    return exponential_decay_rate(lambda, k.a, k.b, k.A0, k.B0, k.b1, k.n);
  };
  return t;
}

}  // namespace warpspec
