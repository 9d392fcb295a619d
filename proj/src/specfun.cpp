#include "nsem/specfun.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "nsem/common.hpp"

namespace nsem {
namespace {

const double kTwoOverSqrtPi = 2.0 / std::sqrt(std::numbers::pi);

// Alternating Maclaurin series; cancellation is mild for |x| <= 2 (largest
// term ~3.2 against a result near 0.9), so absolute error stays ~1e-15.
double erf_series(double x) {
  const double x2 = x * x;
  double term = x;  // x^(2n+1) / n!
  double sum = x;
  for (int n = 1; n < 200; ++n) {
    term *= -x2 / n;
    const double contrib = term / (2 * n + 1);
    sum += contrib;
    if (std::fabs(contrib) <= 1e-18 * std::fabs(sum)) break;
  }
  return kTwoOverSqrtPi * sum;
}

// Legendre continued fraction erfc(x) = exp(-x^2)/sqrt(pi) /
// (x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))), evaluated with modified Lentz.
// Relative accuracy holds arbitrarily far into the tail; used for x >= 2.
double erfc_cf(double x) {
  constexpr double tiny = 1e-300;
  double f = x;
  double c = x;
  double d = 0.0;
  for (int k = 1; k < 500; ++k) {
    const double a = 0.5 * k;
    d = x + a * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = x + a / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = c * d;
    f *= delta;
    if (std::fabs(delta - 1.0) < 1e-17) {
      return std::exp(-x * x) / (std::sqrt(std::numbers::pi) * f);
    }
  }
  throw NumericError("erfc: continued fraction did not converge", 0);
}

// Coefficients of the inverse-erf Maclaurin series in u = (sqrt(pi)/2) y:
// c_0 = 1, c_k = sum_{m<k} c_m c_{k-1-m} / ((m+1)(2m+1)), term c_k u^(2k+1)/(2k+1).
const std::vector<double>& erf_inv_series_coeffs() {
  static const std::vector<double> coeffs = [] {
    std::vector<double> c{1.0};
    for (int k = 1; k < 48; ++k) {
      double s = 0.0;
      for (int m = 0; m < k; ++m) {
        s += c[m] * c[k - 1 - m] / ((m + 1) * (2 * m + 1));
      }
      c.push_back(s);
    }
    return c;
  }();
  return coeffs;
}

double erf_inv_seed_central(double y) {
  const auto& c = erf_inv_series_coeffs();
  const double u = 0.5 * std::sqrt(std::numbers::pi) * y;
  const double u2 = u * u;
  double p = u;
  double sum = u;
  for (std::size_t k = 1; k < c.size(); ++k) {
    p *= u2;
    sum += c[k] * p / (2.0 * k + 1.0);
  }
  return sum;
}

// Inverting the tail asymptotic erfc(x) ~ exp(-x^2)/(x sqrt(pi)) once:
// x ~ sqrt(L - log(pi L)/2) with L = -log(q).
double erf_inv_seed_tail(double q) {
  const double big_l = -std::log(q);
  return std::sqrt(big_l - 0.5 * std::log(std::numbers::pi * big_l));
}

}  // namespace

void SpecFunConfig::validate() const {
  if (!(newton_tolerance > 0.0) || newton_tolerance > 1e-6) {
    throw std::invalid_argument("SpecFunConfig: newton_tolerance must be in (0, 1e-6]");
  }
  if (max_iterations < 1 || max_iterations > 10000) {
    throw std::invalid_argument("SpecFunConfig: max_iterations must be in [1, 10000]");
  }
}

double erf(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("erf: non-finite input");
  const double ax = std::fabs(x);
  double r;
  if (ax <= 2.0) {
    r = erf_series(ax);
  } else if (ax >= 6.0) {
    r = 1.0;  // erfc(6) < 2e-17: correctly rounded
  } else {
    r = 1.0 - erfc_cf(ax);
  }
  return std::copysign(r, x);
}

double erfc(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("erfc: non-finite input");
  if (x < 0.0) return 2.0 - erfc(-x);
  if (x <= 2.0) return 1.0 - erf_series(x);
  if (x >= 27.3) return 0.0;  // exp(-x^2) underflows
  return erfc_cf(x);
}

double erf_inv(double y, const SpecFunConfig& config) {
  config.validate();
  if (!std::isfinite(y)) throw std::invalid_argument("erf_inv: non-finite input");
  if (y <= -1.0 || y >= 1.0) throw std::domain_error("erf_inv: |y| must be < 1");
  const double ay = std::fabs(y);
  if (ay == 0.0) return y;  // keeps signed zero

  double x;
  if (ay <= 0.8) {
    x = erf_inv_seed_central(ay);
    for (int it = 0; it < config.max_iterations; ++it) {
      const double step = (erf(x) - ay) / (kTwoOverSqrtPi * std::exp(-x * x));
      x -= step;
      if (std::fabs(step) <= config.newton_tolerance * std::fabs(x)) break;
    }
  } else {
    // Work against erfc(x) = q: 1 - ay is exact here and the difference
    // q - erfc(x) keeps its relative accuracy where erf saturates at 1.
    const double q = 1.0 - ay;
    x = erf_inv_seed_tail(q);
    for (int it = 0; it < config.max_iterations; ++it) {
      const double step = (q - erfc(x)) / (kTwoOverSqrtPi * std::exp(-x * x));
      x -= step;
      if (std::fabs(step) <= config.newton_tolerance * std::fabs(x)) break;
    }
  }
  return std::copysign(x, y);
}

double lambert_w0(double x, const SpecFunConfig& config) {
  config.validate();
  if (!std::isfinite(x)) throw std::invalid_argument("lambert_w0: non-finite input");
  if (x < 0.0) throw std::domain_error("lambert_w0: requires x >= 0");
  if (x == 0.0) return 0.0;

  double w;
  if (x < 0.36) {
    w = x * (1.0 - x);  // two series terms; series radius is 1/e
  } else if (x < 3.0) {
    w = std::log(1.0 + x);
  } else {
    const double l1 = std::log(x);
    const double l2 = std::log(l1);
    w = l1 - l2 + l2 / l1;
  }

  for (int it = 0; it < config.max_iterations; ++it) {
    const double ew = std::exp(w);
    const double p = w * ew - x;
    const double wp1 = w + 1.0;
    const double denom = ew * wp1 - (w + 2.0) * p / (2.0 * wp1);
    const double step = p / denom;
    w -= step;
    if (w < 0.0) w = 0.0;  // root is nonnegative; next sweep recovers
    if (std::fabs(step) <= config.newton_tolerance * std::fabs(w) + 1e-300) {
      return w;
    }
  }
  throw NumericError("lambert_w0: Halley iteration did not converge", 0);
}

}  // namespace nsem
