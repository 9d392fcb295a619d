#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "nsem/model.hpp"
#include "nsem/schemes.hpp"

namespace nsem {

// Scalar problem data for the step-size analysis of dY = -D Y dt + S Y dW
// with d independent noise components (diagonal noise).
struct InvarianceBounds {
  double d_bound = 1.0;  // drift decay rate
  double s_bound = 1.0;  // diffusion intensity
  int noise_dim = 1;

  void validate() const;
};

// Quantile factor alpha(eps) = erf_inv(1 - eps); eps must lie in (0, 0.5).
double alpha_for_epsilon(double epsilon);

enum class MinStepRoute { closed_form_em, closed_form_nsem, numeric_root };

struct MinStepResult {
  double h0 = 0.0;
  double epsilon = 0.0;
  double alpha_eps = 0.0;
  MinStepRoute route = MinStepRoute::numeric_root;
};

// Largest step for which one Euler-Maruyama step keeps positivity with
// probability 1 - eps: the smaller root of the quadratic from the linear
// bound function, always below 1/lambda.
MinStepResult min_step_em(double lambda, double sigma, double epsilon);

// Same threshold for the nonstandard scheme with the exponential bound:
// h0 = W0(lambda / (sigma alpha(eps))^2) / (2 lambda), via lambert_w0.
MinStepResult min_step_nsem(double lambda, double sigma, double epsilon);

// Bisection on phi_b(D h) / (S d sqrt(2 h)) = alpha(eps) to relative width
// 1e-10. bracket_hi caps the search when the bound function is only valid up
// to some h (pass 1/D for the linear bound); otherwise the bracket expands
// by doubling until the residual changes sign.
MinStepResult min_step_numeric(
    const InvarianceBounds& bounds, const std::function<double(double)>& denom_bound,
    double epsilon, double bracket_hi = std::numeric_limits<double>::infinity());

// P(every noise component of one step of size h stays within the
// positivity-preserving band) = erf(phi_b(D h) / (S d sqrt(2 h))); returns 0
// once the bound function is <= 0 (linear bound past its validity).
double invariance_probability(const InvarianceBounds& bounds,
                              const std::function<double(double)>& denom_bound, double h);

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t num_paths = 0;  // paths that survived integration
};

struct McSeries {
  std::vector<double> times;
  std::vector<McEstimate> estimates;
  std::size_t failed_paths = 0;
};

// Sample mean of X(t_k) per grid node for a scalar model, one stream per
// path (stream_index 0..num_paths-1), accumulated in ascending stream order
// with Welford updates so results are deterministic and sigma = 0 gives
// exactly zero standard error. Paths that blow up are counted, not dropped
// silently.
McSeries mc_expectation(const SdeModel& model, const SchemeSpec& scheme, double h,
                        std::size_t num_paths, std::uint64_t master_seed);

struct OrderFit {
  double order = 0.0;
  double std_error = 0.0;
};

// Least-squares slope of log2(error) against log2(step). Levels with zero
// error are excluded; fewer than two usable levels yields nullopt.
std::optional<OrderFit> fit_order(std::span<const double> steps, std::span<const double> errors);

struct StrongErrorCurve {
  std::vector<double> steps;
  std::vector<double> errors;  // E[sup_k |X(t_k) - Y(t_k)|] per level
  std::optional<OrderFit> fit;
};

// Couples each scheme run to the exact solution through shared Brownian
// paths: one fine path per Monte Carlo path, coarsened by 2^level for
// level = 0..levels-1. fine_steps must be divisible by 2^levels.
StrongErrorCurve strong_error_curve(const GbmModel& model, const SchemeSpec& scheme,
                                    std::size_t fine_steps, int levels, std::size_t num_paths,
                                    std::uint64_t master_seed);

struct ExitStatistics {
  double step_violation_fraction = 0.0;  // increments beyond the one-step band
  double exit_fraction = 0.0;            // trajectories that left the domain
  std::map<std::size_t, std::size_t> first_exit_steps;
  std::size_t num_paths = 0;
  std::size_t total_steps = 0;
};

// Integrates num_paths trajectories at step h over the model horizon and
// reports how often increments exceed the band phi_b(D h) / (S d) and how
// often trajectories leave the domain (strict membership, boundary inside).
// A path that blows up counts as exiting at the offending step.
ExitStatistics exit_statistics(const SdeModel& model, const SchemeSpec& scheme,
                               const BoxDomain& domain, const InvarianceBounds& bounds,
                               const std::function<double(double)>& denom_bound, double h,
                               std::size_t num_paths, std::uint64_t master_seed);

struct RatioPoint {
  double ratio = 0.0;
  double h0_em = 0.0;
  double h0_nsem = 0.0;
};

// Minimal steps for both schemes as sigma / lambda sweeps over the ratios.
std::vector<RatioPoint> ratio_curve(double lambda, std::span<const double> ratios,
                                    double epsilon);

}  // namespace nsem
