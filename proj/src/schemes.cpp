#include "nsem/schemes.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>
#include <utility>

#include "nsem/common.hpp"
#include "nsem/csv.hpp"

namespace nsem {
namespace {

void check_step_args(const SdeModel& model, std::span<const double> x, double h,
                     std::span<const double> dw) {
  model.validate();
  if (x.size() != static_cast<std::size_t>(model.dim_state)) {
    throw std::invalid_argument("step: state size must equal dim_state");
  }
  if (dw.size() != static_cast<std::size_t>(model.dim_noise)) {
    throw std::invalid_argument("step: increment size must equal dim_noise");
  }
  if (!(h >= 0.0) || !std::isfinite(h)) {
    throw std::invalid_argument("step: h must be >= 0 and finite");
  }
}

// Shared kernel: next_i = x_i + f_i * drift_weight + sum_j g_ij dW_j. The
// standalone steps and integrate both run through here, so a trajectory node
// is bitwise the same value the one-step operation would produce.
void explicit_step_into(const SdeModel& model, std::span<const double> x, double drift_weight,
                        std::span<const double> dw, std::span<double> f, std::span<double> g,
                        std::span<double> out) {
  const int n = model.dim_state;
  const int d = model.dim_noise;
  model.drift(x, f);
  model.diffusion(x, g);
  for (int i = 0; i < n; ++i) {
    double v = x[i] + f[i] * drift_weight;
    for (int j = 0; j < d; ++j) v += g[static_cast<std::size_t>(i) * d + j] * dw[j];
    out[i] = v;
  }
}

double bim_step_value(const SdeModel& model, double x, const BimParams& params, double h,
                      double dw, std::span<double> f, std::span<double> g) {
  const double xs[1] = {x};
  model.drift(xs, f);
  model.diffusion(xs, g);
  const double weight = params.c0 * h + params.c1 * std::fabs(dw);
  return (x + f[0] * h + g[0] * dw + weight * x) / (1.0 + weight);
}

}  // namespace

Denominator::Denominator(double alpha)
    : Denominator(alpha, [](double x) { return std::exp(-x); }) {}

Denominator::Denominator(double alpha, std::function<double(double)> bound)
    : alpha_(alpha), bound_(std::move(bound)) {
  if (!(alpha_ > 0.0) || !std::isfinite(alpha_)) {
    throw std::invalid_argument("Denominator: alpha must be positive and finite");
  }
  if (!bound_) throw std::invalid_argument("Denominator: bound function is not set");
}

void BimParams::validate() const {
  if (!(c0 >= 0.0) || !std::isfinite(c0) || !(c1 >= 0.0) || !std::isfinite(c1)) {
    throw std::invalid_argument("BimParams: c0 and c1 must be >= 0 and finite");
  }
}

std::string scheme_name(const SchemeSpec& scheme) {
  if (std::holds_alternative<EmScheme>(scheme)) return "em";
  if (std::holds_alternative<NsemScheme>(scheme)) return "nsem";
  return "bim";
}

std::vector<double> em_step(const SdeModel& model, std::span<const double> x, double h,
                            std::span<const double> dw) {
  check_step_args(model, x, h, dw);
  const int n = model.dim_state;
  std::vector<double> f(n), g(static_cast<std::size_t>(n) * model.dim_noise), out(n);
  explicit_step_into(model, x, h, dw, f, g, out);
  return out;
}

std::vector<double> nsem_step(const SdeModel& model, std::span<const double> x,
                              const Denominator& denom, double h, std::span<const double> dw) {
  check_step_args(model, x, h, dw);
  const int n = model.dim_state;
  std::vector<double> f(n), g(static_cast<std::size_t>(n) * model.dim_noise), out(n);
  explicit_step_into(model, x, denom.phi(h), dw, f, g, out);
  return out;
}

double bim_step(const SdeModel& model, double x, const BimParams& params, double h, double dw) {
  params.validate();
  model.validate();
  if (model.dim_state != 1 || model.dim_noise != 1) {
    throw std::invalid_argument("bim_step: only scalar models are supported");
  }
  if (!(h >= 0.0) || !std::isfinite(h)) {
    throw std::invalid_argument("bim_step: h must be >= 0 and finite");
  }
  double f[1], g[1];
  return bim_step_value(model, x, params, h, dw, f, g);
}

Trajectory integrate(const SdeModel& model, const SchemeSpec& scheme, const BrownianPath& path) {
  model.validate();
  if (path.dim() != static_cast<std::size_t>(model.dim_noise)) {
    throw std::invalid_argument("integrate: path dim must equal dim_noise");
  }
  const double h = path.step();
  const std::size_t num_steps = path.num_steps();
  const double span = h * static_cast<double>(num_steps);
  if (span > model.horizon + std::max(1e-12, 1e-9 * model.horizon)) {
    throw std::invalid_argument("integrate: path extends past the model horizon");
  }
  const bool is_bim = std::holds_alternative<BimScheme>(scheme);
  if (is_bim) {
    std::get<BimScheme>(scheme).params.validate();
    if (model.dim_state != 1 || model.dim_noise != 1) {
      throw std::invalid_argument("integrate: balanced implicit scheme needs a scalar model");
    }
  }

  const int n = model.dim_state;
  const int d = model.dim_noise;
  // For EM the drift weight is h itself; for the nonstandard scheme it is
  // phi(h), constant along the uniform grid.
  double drift_weight = h;
  if (const auto* ns = std::get_if<NsemScheme>(&scheme)) drift_weight = ns->denom.phi(h);

  Trajectory traj;
  traj.dim_state = n;
  traj.times.resize(num_steps + 1);
  traj.states.resize((num_steps + 1) * static_cast<std::size_t>(n));
  for (std::size_t k = 0; k <= num_steps; ++k) {
    traj.times[k] = static_cast<double>(k) * h;
  }
  for (int i = 0; i < n; ++i) traj.states[i] = model.initial_state[i];

  std::vector<double> f(n), g(static_cast<std::size_t>(n) * d), dw(d);
  for (std::size_t k = 0; k < num_steps; ++k) {
    const std::span<const double> cur{traj.states.data() + k * n, static_cast<std::size_t>(n)};
    const std::span<double> next{traj.states.data() + (k + 1) * n, static_cast<std::size_t>(n)};
    path.increment_row(k, dw);
    if (is_bim) {
      next[0] = bim_step_value(model, cur[0], std::get<BimScheme>(scheme).params, h, dw[0], f, g);
    } else {
      explicit_step_into(model, cur, drift_weight, dw, f, g, next);
    }
    for (int i = 0; i < n; ++i) {
      if (!std::isfinite(next[i])) {
        throw NumericError("integrate: state went non-finite", k);
      }
    }
  }
  return traj;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& trajectory) {
  const int n = trajectory.dim_state;
  std::string out = "k,t";
  for (int i = 1; i <= n; ++i) out += ",x_" + std::to_string(i);
  out.push_back('\n');
  for (std::size_t k = 0; k < trajectory.times.size(); ++k) {
    out += std::to_string(k);
    out.push_back(',');
    out += format_double(trajectory.times[k]);
    for (int i = 0; i < n; ++i) {
      out.push_back(',');
      out += format_double(trajectory.state(k, i));
    }
    out.push_back('\n');
  }
  os << out;
}

}  // namespace nsem
