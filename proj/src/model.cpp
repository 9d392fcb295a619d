#include "nsem/model.hpp"

#include <cmath>
#include <stdexcept>

#include "nsem/rng.hpp"

namespace nsem {

namespace {
constexpr double kDiffusionZeroTol = 1e-12;
}

void SdeModel::validate() const {
  if (dim_state < 1) throw std::invalid_argument("SdeModel: dim_state must be >= 1");
  if (dim_noise < 1) throw std::invalid_argument("SdeModel: dim_noise must be >= 1");
  if (!drift) throw std::invalid_argument("SdeModel: drift is not set");
  if (!diffusion) throw std::invalid_argument("SdeModel: diffusion is not set");
  if (static_cast<int>(initial_state.size()) != dim_state) {
    throw std::invalid_argument("SdeModel: initial_state size must equal dim_state");
  }
  for (double v : initial_state) {
    if (!std::isfinite(v)) throw std::invalid_argument("SdeModel: non-finite initial state");
  }
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw std::invalid_argument("SdeModel: horizon must be positive and finite");
  }
}

void GbmModel::validate() const {
  if (!std::isfinite(mu)) throw std::invalid_argument("GbmModel: mu must be finite");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw std::invalid_argument("GbmModel: sigma must be >= 0 and finite");
  }
  if (!(y0 > 0.0) || !std::isfinite(y0)) {
    throw std::invalid_argument("GbmModel: y0 must be positive and finite");
  }
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw std::invalid_argument("GbmModel: horizon must be positive and finite");
  }
}

SdeModel GbmModel::to_sde() const {
  validate();
  SdeModel sde;
  sde.dim_state = 1;
  sde.dim_noise = 1;
  const double m = mu;
  const double s = sigma;
  sde.drift = [m](std::span<const double> x, std::span<double> out) { out[0] = m * x[0]; };
  sde.diffusion = [s](std::span<const double> x, std::span<double> out) { out[0] = s * x[0]; };
  sde.initial_state = {y0};
  sde.horizon = horizon;
  return sde;
}

BoxDomain::BoxDomain(std::vector<AxisBound> bounds) : bounds_(std::move(bounds)) {
  if (bounds_.empty()) throw std::invalid_argument("BoxDomain: needs at least one bound");
  for (const auto& b : bounds_) {
    if (b.index < 0) throw std::invalid_argument("BoxDomain: negative coordinate index");
    if (!b.lower && !b.upper) {
      throw std::invalid_argument("BoxDomain: bound with neither side set");
    }
    if (b.lower && !std::isfinite(*b.lower)) {
      throw std::invalid_argument("BoxDomain: non-finite lower bound");
    }
    if (b.upper && !std::isfinite(*b.upper)) {
      throw std::invalid_argument("BoxDomain: non-finite upper bound");
    }
    if (b.lower && b.upper && !(*b.lower < *b.upper)) {
      throw std::invalid_argument("BoxDomain: lower bound must be below upper bound");
    }
  }
}

BoxDomain BoxDomain::lower_bounded(int index, double lower) {
  return BoxDomain({AxisBound{index, lower, std::nullopt}});
}

bool BoxDomain::contains(std::span<const double> state) const {
  for (const auto& b : bounds_) {
    if (b.index >= static_cast<int>(state.size())) {
      throw std::invalid_argument("BoxDomain: state smaller than constrained index");
    }
    const double v = state[b.index];
    if (std::isnan(v)) return false;
    if (b.lower && v < *b.lower) return false;
    if (b.upper && v > *b.upper) return false;
  }
  return true;
}

double gbm_exact_expectation(const GbmModel& model, double t) {
  model.validate();
  if (!std::isfinite(t) || t < 0.0) {
    throw std::invalid_argument("gbm_exact_expectation: t must be >= 0");
  }
  return model.y0 * std::exp(model.mu * t);
}

std::vector<double> gbm_exact_solution(const GbmModel& model, std::span<const double> times,
                                       std::span<const double> w_values) {
  model.validate();
  if (times.size() != w_values.size()) {
    throw std::invalid_argument("gbm_exact_solution: times and W lengths differ");
  }
  if (times.empty()) throw std::invalid_argument("gbm_exact_solution: empty grid");
  if (times[0] != 0.0) throw std::invalid_argument("gbm_exact_solution: grid must start at 0");
  if (w_values[0] != 0.0) throw std::invalid_argument("gbm_exact_solution: W(0) must be 0");
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (!std::isfinite(w_values[k])) {
      throw std::invalid_argument("gbm_exact_solution: non-finite W value");
    }
    if (k > 0 && !(times[k] > times[k - 1])) {
      throw std::invalid_argument("gbm_exact_solution: times must ascend");
    }
  }
  const double a = model.mu - 0.5 * model.sigma * model.sigma;
  std::vector<double> out(times.size());
  for (std::size_t k = 0; k < times.size(); ++k) {
    out[k] = model.y0 * std::exp(a * times[k] + model.sigma * w_values[k]);
  }
  return out;
}

MilianReport check_milian_conditions(const SdeModel& model, const BoxDomain& domain,
                                     const MilianOptions& options) {
  model.validate();
  if (options.face_samples < 1) {
    throw std::invalid_argument("check_milian_conditions: face_samples must be >= 1");
  }
  if (!(options.window_lo < options.window_hi)) {
    throw std::invalid_argument("check_milian_conditions: sampling window is empty");
  }
  const int n = model.dim_state;
  const int d = model.dim_noise;
  for (const auto& b : domain.bounds()) {
    if (b.index >= n) {
      throw std::invalid_argument("check_milian_conditions: constrained index out of range");
    }
  }

  // Per-coordinate sampling ranges: box sides where present, window otherwise.
  std::vector<double> lo(n, options.window_lo);
  std::vector<double> hi(n, options.window_hi);
  for (const auto& b : domain.bounds()) {
    if (b.lower) lo[b.index] = *b.lower;
    if (b.upper) hi[b.index] = *b.upper;
  }
  for (int j = 0; j < n; ++j) {
    if (!(lo[j] < hi[j])) {
      throw std::invalid_argument(
          "check_milian_conditions: sampling window incompatible with domain bounds");
    }
  }

  NormalSampler sampler(SeedSpec{options.seed, 0});
  MilianReport report;
  std::vector<double> point(n);
  std::vector<double> f(n);
  std::vector<double> g(static_cast<std::size_t>(n) * d);

  auto probe_face = [&](const AxisBound& b, bool at_upper, double face_value) {
    for (int s = 0; s < options.face_samples; ++s) {
      for (int j = 0; j < n; ++j) {
        point[j] = (j == b.index) ? face_value
                                  : lo[j] + sampler.next_uniform() * (hi[j] - lo[j]);
      }
      model.drift(point, f);
      model.diffusion(point, g);
      const double fi = f[b.index];
      const bool drift_bad = at_upper ? (fi > 0.0) : (fi < 0.0);
      if (drift_bad) {
        report.violations.push_back({b.index, at_upper, point,
                                     "f[" + std::to_string(b.index) + "]", fi});
      }
      for (int j = 0; j < d; ++j) {
        const double gij = g[static_cast<std::size_t>(b.index) * d + j];
        if (std::fabs(gij) > kDiffusionZeroTol) {
          report.violations.push_back({b.index, at_upper, point,
                                       "g[" + std::to_string(b.index) + "][" +
                                           std::to_string(j) + "]",
                                       gij});
        }
      }
    }
  };

  for (const auto& b : domain.bounds()) {
    if (b.lower) probe_face(b, false, *b.lower);
    if (b.upper) probe_face(b, true, *b.upper);
  }
  report.satisfied = report.violations.empty();
  return report;
}

}  // namespace nsem
