#include "nsem/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nsem/common.hpp"
#include "nsem/rng.hpp"
#include "nsem/specfun.hpp"

namespace nsem {
namespace {

void check_decay_params(double lambda, double sigma) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw std::domain_error("min_step: lambda must be positive");
  }
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw std::domain_error("min_step: sigma must be positive");
  }
}

}  // namespace

void InvarianceBounds::validate() const {
  if (!(d_bound > 0.0) || !std::isfinite(d_bound)) {
    throw std::domain_error("InvarianceBounds: d_bound must be positive");
  }
  if (!(s_bound > 0.0) || !std::isfinite(s_bound)) {
    throw std::domain_error("InvarianceBounds: s_bound must be positive");
  }
  if (noise_dim < 1) throw std::domain_error("InvarianceBounds: noise_dim must be >= 1");
}

double alpha_for_epsilon(double epsilon) {
  if (!std::isfinite(epsilon) || !(epsilon > 0.0) || !(epsilon < 0.5)) {
    throw std::domain_error("alpha_for_epsilon: epsilon must be in (0, 0.5)");
  }
  return erf_inv(1.0 - epsilon);
}

MinStepResult min_step_em(double lambda, double sigma, double epsilon) {
  check_decay_params(lambda, sigma);
  const double a = alpha_for_epsilon(epsilon);
  const double as = a * sigma;
  // Smaller root of lambda^2 h^2 - 2 (lambda + a^2 s^2) h + 1 = 0, the square
  // of (1 - lambda h) = a s sqrt(2 h); it always sits below 1/lambda.
  const double h0 =
      1.0 / lambda + as * as / (lambda * lambda) - as * std::sqrt(as * as + 2.0 * lambda) / (lambda * lambda);
  return {h0, epsilon, a, MinStepRoute::closed_form_em};
}

MinStepResult min_step_nsem(double lambda, double sigma, double epsilon) {
  check_decay_params(lambda, sigma);
  const double a = alpha_for_epsilon(epsilon);
  const double as = a * sigma;
  const double h0 = lambert_w0(lambda / (as * as)) / (2.0 * lambda);
  return {h0, epsilon, a, MinStepRoute::closed_form_nsem};
}

MinStepResult min_step_numeric(const InvarianceBounds& bounds,
                               const std::function<double(double)>& denom_bound, double epsilon,
                               double bracket_hi) {
  bounds.validate();
  if (!denom_bound) throw std::invalid_argument("min_step_numeric: bound function not set");
  if (!(bracket_hi > 0.0)) {
    throw std::invalid_argument("min_step_numeric: bracket_hi must be positive");
  }
  const double a = alpha_for_epsilon(epsilon);
  const double sd = bounds.s_bound * static_cast<double>(bounds.noise_dim);
  const auto residual = [&](double h) {
    return denom_bound(bounds.d_bound * h) / (sd * std::sqrt(2.0 * h)) - a;
  };

  double lo = 1e-12;
  if (!(residual(lo) > 0.0)) {
    throw RootBracketError("min_step_numeric: residual not positive at the lower end", lo, lo);
  }
  double hi;
  if (std::isfinite(bracket_hi)) {
    hi = bracket_hi * (1.0 - 1e-12);
    if (!(residual(hi) < 0.0)) {
      throw RootBracketError("min_step_numeric: no sign change up to bracket_hi", lo, hi);
    }
  } else {
    hi = 1.0;
    while (residual(hi) > 0.0) {
      hi *= 2.0;
      if (hi > 1e15) {
        throw RootBracketError("min_step_numeric: no sign change found", lo, hi);
      }
    }
  }

  for (int it = 0; it < 200 && (hi - lo) > 1e-10 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (residual(mid) > 0.0 ? lo : hi) = mid;
  }
  return {0.5 * (lo + hi), epsilon, a, MinStepRoute::numeric_root};
}

double invariance_probability(const InvarianceBounds& bounds,
                              const std::function<double(double)>& denom_bound, double h) {
  bounds.validate();
  if (!denom_bound) throw std::invalid_argument("invariance_probability: bound function not set");
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw std::domain_error("invariance_probability: h must be positive");
  }
  const double band = denom_bound(bounds.d_bound * h);
  if (band <= 0.0) return 0.0;  // bound function exhausted: the band is empty
  const double sd = bounds.s_bound * static_cast<double>(bounds.noise_dim);
  return erf(band / (sd * std::sqrt(2.0 * h)));
}

McSeries mc_expectation(const SdeModel& model, const SchemeSpec& scheme, double h,
                        std::size_t num_paths, std::uint64_t master_seed) {
  model.validate();
  if (model.dim_state != 1 || model.dim_noise != 1) {
    throw std::invalid_argument("mc_expectation: only scalar models are supported");
  }
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw std::invalid_argument("mc_expectation: h must be positive");
  }
  if (num_paths == 0) throw std::invalid_argument("mc_expectation: need at least one path");
  const auto num_steps = static_cast<std::size_t>(std::floor(model.horizon / h + 1e-9));
  if (num_steps == 0) throw std::invalid_argument("mc_expectation: step exceeds the horizon");

  McSeries series;
  series.times.resize(num_steps + 1);
  for (std::size_t k = 0; k <= num_steps; ++k) {
    series.times[k] = static_cast<double>(k) * h;
  }

  // Welford accumulators per node, updated in ascending stream order: the
  // reduction is deterministic and degenerate inputs (sigma = 0) produce a
  // bitwise-exact mean and exactly zero variance.
  std::vector<double> mean(num_steps + 1, 0.0);
  std::vector<double> m2(num_steps + 1, 0.0);
  std::size_t count = 0;
  for (std::size_t p = 0; p < num_paths; ++p) {
    const BrownianPath path = generate_path({master_seed, p}, h, num_steps, 1);
    Trajectory traj;
    try {
      traj = integrate(model, scheme, path);
    } catch (const NumericError&) {
      ++series.failed_paths;
      continue;
    }
    ++count;
    for (std::size_t k = 0; k <= num_steps; ++k) {
      const double x = traj.state(k, 0);
      const double delta = x - mean[k];
      mean[k] += delta / static_cast<double>(count);
      m2[k] += delta * (x - mean[k]);
    }
  }

  series.estimates.resize(num_steps + 1);
  for (std::size_t k = 0; k <= num_steps; ++k) {
    McEstimate e;
    e.num_paths = count;
    e.mean = count > 0 ? mean[k] : std::numeric_limits<double>::quiet_NaN();
    e.std_error = count > 1 ? std::sqrt(m2[k] / static_cast<double>(count - 1) /
                                        static_cast<double>(count))
                            : 0.0;
    series.estimates[k] = e;
  }
  return series;
}

std::optional<OrderFit> fit_order(std::span<const double> steps, std::span<const double> errors) {
  if (steps.size() != errors.size()) {
    throw std::invalid_argument("fit_order: steps and errors lengths differ");
  }
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (!(steps[i] > 0.0)) throw std::invalid_argument("fit_order: steps must be positive");
    if (!(errors[i] >= 0.0) || !std::isfinite(errors[i])) {
      throw std::invalid_argument("fit_order: errors must be finite and >= 0");
    }
    if (errors[i] > 0.0) {
      xs.push_back(std::log2(steps[i]));
      ys.push_back(std::log2(errors[i]));
    }
  }
  const std::size_t m = xs.size();
  if (m < 2) return std::nullopt;

  double xbar = 0.0, ybar = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    xbar += xs[i];
    ybar += ys[i];
  }
  xbar /= static_cast<double>(m);
  ybar /= static_cast<double>(m);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (xs[i] - xbar) * (xs[i] - xbar);
    sxy += (xs[i] - xbar) * (ys[i] - ybar);
  }
  if (sxx == 0.0) return std::nullopt;
  const double slope = sxy / sxx;
  double se = 0.0;
  if (m > 2) {
    const double intercept = ybar - slope * xbar;
    double rss = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double r = ys[i] - (intercept + slope * xs[i]);
      rss += r * r;
    }
    se = std::sqrt(rss / static_cast<double>(m - 2) / sxx);
  }
  return OrderFit{slope, se};
}

StrongErrorCurve strong_error_curve(const GbmModel& model, const SchemeSpec& scheme,
                                    std::size_t fine_steps, int levels, std::size_t num_paths,
                                    std::uint64_t master_seed) {
  model.validate();
  if (levels < 2) throw std::invalid_argument("strong_error_curve: need at least two levels");
  if (levels > 40) throw std::invalid_argument("strong_error_curve: too many levels");
  if (num_paths == 0) throw std::invalid_argument("strong_error_curve: need at least one path");
  const std::size_t max_factor = std::size_t{1} << levels;
  if (fine_steps == 0 || fine_steps % max_factor != 0) {
    throw std::invalid_argument("strong_error_curve: fine_steps must be divisible by 2^levels");
  }

  const SdeModel sde = model.to_sde();
  const double h_fine = model.horizon / static_cast<double>(fine_steps);
  StrongErrorCurve curve;
  curve.steps.resize(levels);
  curve.errors.assign(levels, 0.0);
  for (int level = 0; level < levels; ++level) {
    curve.steps[level] = h_fine * static_cast<double>(std::size_t{1} << level);
  }

  for (std::size_t p = 0; p < num_paths; ++p) {
    const BrownianPath fine = generate_path({master_seed, p}, h_fine, fine_steps, 1);
    for (int level = 0; level < levels; ++level) {
      const BrownianPath coarse = coarsen(fine, std::size_t{1} << level);
      const Trajectory traj = integrate(sde, scheme, coarse);
      const std::vector<double> exact =
          gbm_exact_solution(model, traj.times, coarse.values());
      double sup = 0.0;
      for (std::size_t k = 0; k < exact.size(); ++k) {
        sup = std::max(sup, std::fabs(traj.state(k, 0) - exact[k]));
      }
      curve.errors[level] += sup;
    }
  }
  for (int level = 0; level < levels; ++level) {
    curve.errors[level] /= static_cast<double>(num_paths);
  }
  curve.fit = fit_order(curve.steps, curve.errors);
  return curve;
}

ExitStatistics exit_statistics(const SdeModel& model, const SchemeSpec& scheme,
                               const BoxDomain& domain, const InvarianceBounds& bounds,
                               const std::function<double(double)>& denom_bound, double h,
                               std::size_t num_paths, std::uint64_t master_seed) {
  model.validate();
  bounds.validate();
  if (!denom_bound) throw std::invalid_argument("exit_statistics: bound function not set");
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw std::invalid_argument("exit_statistics: h must be positive");
  }
  if (num_paths == 0) throw std::invalid_argument("exit_statistics: need at least one path");
  const auto num_steps = static_cast<std::size_t>(std::floor(model.horizon / h + 1e-9));
  if (num_steps == 0) throw std::invalid_argument("exit_statistics: step exceeds the horizon");

  const double band =
      denom_bound(bounds.d_bound * h) / (bounds.s_bound * static_cast<double>(bounds.noise_dim));
  ExitStatistics stats;
  stats.num_paths = num_paths;
  std::size_t violations = 0;
  std::size_t exits = 0;

  for (std::size_t p = 0; p < num_paths; ++p) {
    const BrownianPath path =
        generate_path({master_seed, p}, h, num_steps, static_cast<std::size_t>(model.dim_noise));
    for (std::size_t k = 0; k < num_steps; ++k) {
      double sup = 0.0;
      for (std::size_t j = 0; j < path.dim(); ++j) {
        sup = std::max(sup, std::fabs(path.increment(k, j)));
      }
      if (sup > band) ++violations;
    }
    stats.total_steps += num_steps;

    std::optional<std::size_t> first_exit;
    try {
      const Trajectory traj = integrate(model, scheme, path);
      for (std::size_t k = 1; k <= num_steps; ++k) {
        if (!domain.contains(traj.at(k))) {
          first_exit = k;
          break;
        }
      }
    } catch (const NumericError& e) {
      first_exit = e.step_index() + 1;  // the state produced by that step
    }
    if (first_exit) {
      ++exits;
      ++stats.first_exit_steps[*first_exit];
    }
  }

  stats.step_violation_fraction =
      static_cast<double>(violations) / static_cast<double>(stats.total_steps);
  stats.exit_fraction = static_cast<double>(exits) / static_cast<double>(num_paths);
  return stats;
}

std::vector<RatioPoint> ratio_curve(double lambda, std::span<const double> ratios,
                                    double epsilon) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw std::domain_error("ratio_curve: lambda must be positive");
  }
  if (ratios.empty()) throw std::invalid_argument("ratio_curve: empty ratio list");
  std::vector<RatioPoint> out;
  out.reserve(ratios.size());
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    if (!(ratios[i] > 0.0)) throw std::domain_error("ratio_curve: ratios must be positive");
    if (i > 0 && !(ratios[i] > ratios[i - 1])) {
      throw std::invalid_argument("ratio_curve: ratios must ascend");
    }
    const double sigma = ratios[i] * lambda;
    out.push_back({ratios[i], min_step_em(lambda, sigma, epsilon).h0,
                   min_step_nsem(lambda, sigma, epsilon).h0});
  }
  return out;
}

}  // namespace nsem
