#pragma once

namespace nsem {

struct SpecFunConfig {
  double newton_tolerance = 1e-13;  // relative step size at which iteration stops
  int max_iterations = 100;

  void validate() const;  // tolerance in (0, 1e-6], iterations in [1, 10^4]
};

// Error function. Maclaurin series for |x| <= 2, continued-fraction erfc
// beyond; absolute error stays well under 1e-14. Built on exp/log/sqrt only so
// every consumer sees the same values on every platform.
double erf(double x);

// 1 - erf(x), with relative accuracy preserved in the x > 2 tail.
double erfc(double x);

// Inverse of erf on (-1, 1). Seeded by a series (central) or an asymptotic
// log-based guess (tail), then polished with Newton steps.
double erf_inv(double y, const SpecFunConfig& config = {});

// Principal branch of w * exp(w) = x for x >= 0, Halley iteration.
double lambert_w0(double x, const SpecFunConfig& config = {});

}  // namespace nsem
