#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "nsem/model.hpp"
#include "nsem/rng.hpp"

namespace nsem {

// Nonstandard denominator phi(h) = (1 - phi_b(alpha h)) / alpha built from a
// bound function phi_b mapping (0, inf) into (0, 1); default exp(-x). With
// phi_b(x) = 1 - x the denominator collapses to phi(h) = h and the scheme
// below reduces to plain Euler-Maruyama.
class Denominator {
 public:
  explicit Denominator(double alpha);
  Denominator(double alpha, std::function<double(double)> bound);

  double alpha() const { return alpha_; }
  double bound(double x) const { return bound_(x); }
  double phi(double h) const { return (1.0 - bound_(alpha_ * h)) / alpha_; }
  double shift(double h) const { return phi(h) - h; }  // the O(h^2) defect

 private:
  double alpha_;
  std::function<double(double)> bound_;
};

struct BimParams {
  double c0 = 0.0;  // weight on h in the balancing term
  double c1 = 0.0;  // weight on |dW|

  void validate() const;  // both finite and >= 0
};

struct EmScheme {};
struct NsemScheme {
  Denominator denom;
};
struct BimScheme {
  BimParams params;
};

using SchemeSpec = std::variant<EmScheme, NsemScheme, BimScheme>;

std::string scheme_name(const SchemeSpec& scheme);

// One explicit step x + f(x) h + g(x) dW.
std::vector<double> em_step(const SdeModel& model, std::span<const double> x, double h,
                            std::span<const double> dw);

// One step x + f(x) phi(h) + g(x) dW: the drift advances by the nonstandard
// denominator, the noise term is untouched.
std::vector<double> nsem_step(const SdeModel& model, std::span<const double> x,
                              const Denominator& denom, double h, std::span<const double> dw);

// One balanced implicit step for scalar models. The implicit relation
// x' = x + f h + g dW + (c0 h + c1 |dW|)(x - x') solves in closed form with
// denominator 1 + c0 h + c1 |dW| >= 1.
double bim_step(const SdeModel& model, double x, const BimParams& params, double h, double dw);

struct Trajectory {
  int dim_state = 1;
  std::vector<double> times;   // N + 1 nodes
  std::vector<double> states;  // (N+1) x n row-major

  std::size_t num_steps() const { return times.empty() ? 0 : times.size() - 1; }
  double state(std::size_t k, int i) const { return states[k * dim_state + i]; }
  std::span<const double> at(std::size_t k) const {
    return {states.data() + k * dim_state, static_cast<std::size_t>(dim_state)};
  }
};

// Drives the scheme along the increments of one Brownian path. Throws
// NumericError with the offending step index if a state goes non-finite;
// states are never clipped or adjusted.
Trajectory integrate(const SdeModel& model, const SchemeSpec& scheme, const BrownianPath& path);

// Rows "k,t,x_1..x_n".
void write_trajectory_csv(std::ostream& os, const Trajectory& trajectory);

}  // namespace nsem
