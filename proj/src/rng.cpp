#include "nsem/rng.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "nsem/csv.hpp"
#include "nsem/specfun.hpp"

namespace nsem {
namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t stream_seed(const SeedSpec& seed) {
  return splitmix64(seed.master_seed + (seed.stream_index + 1) * 0x9E3779B97F4A7C15ull);
}

NormalSampler::NormalSampler(const SeedSpec& seed) : engine_(stream_seed(seed)) {}

double NormalSampler::next_uniform() {
  // Top 53 bits, centered on the bin midpoint: range [2^-54, 1 - 2^-54].
  const std::uint64_t bits = engine_() >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double NormalSampler::next() {
  return std::numbers::sqrt2 * erf_inv(2.0 * next_uniform() - 1.0);
}

BrownianPath BrownianPath::from_increments(double step, std::size_t dim,
                                           std::span<const double> increments) {
  if (!(step > 0.0) || !std::isfinite(step)) {
    throw std::invalid_argument("BrownianPath: step must be positive and finite");
  }
  if (dim == 0) throw std::invalid_argument("BrownianPath: dim must be >= 1");
  if (increments.empty() || increments.size() % dim != 0) {
    throw std::invalid_argument("BrownianPath: increments must be a nonempty N x dim array");
  }
  for (double v : increments) {
    if (!std::isfinite(v)) throw std::invalid_argument("BrownianPath: non-finite increment");
  }
  BrownianPath p;
  p.step_ = step;
  p.dim_ = dim;
  p.num_steps_ = increments.size() / dim;
  p.values_.assign((p.num_steps_ + 1) * dim, 0.0);
  for (std::size_t k = 0; k < p.num_steps_; ++k) {
    for (std::size_t j = 0; j < dim; ++j) {
      p.values_[(k + 1) * dim + j] = p.values_[k * dim + j] + increments[k * dim + j];
    }
  }
  return p;
}

void BrownianPath::increment_row(std::size_t k, std::span<double> out) const {
  for (std::size_t j = 0; j < dim_; ++j) out[j] = increment(k, j);
}

BrownianPath generate_path(const SeedSpec& seed, double step, std::size_t num_steps,
                           std::size_t dim) {
  if (!(step > 0.0) || !std::isfinite(step)) {
    throw std::invalid_argument("generate_path: step must be positive and finite");
  }
  if (num_steps == 0) throw std::invalid_argument("generate_path: need at least one step");
  if (dim == 0) throw std::invalid_argument("generate_path: dim must be >= 1");

  NormalSampler sampler(seed);
  const double root_h = std::sqrt(step);
  BrownianPath p;
  p.step_ = step;
  p.num_steps_ = num_steps;
  p.dim_ = dim;
  p.values_.assign((num_steps + 1) * dim, 0.0);
  for (std::size_t k = 0; k < num_steps; ++k) {
    for (std::size_t j = 0; j < dim; ++j) {
      p.values_[(k + 1) * dim + j] = p.values_[k * dim + j] + root_h * sampler.next();
    }
  }
  return p;
}

BrownianPath coarsen(const BrownianPath& path, std::size_t m) {
  if (m == 0 || path.num_steps() % m != 0) {
    throw std::invalid_argument("coarsen: factor must divide num_steps");
  }
  BrownianPath c;
  c.step_ = path.step() * static_cast<double>(m);
  c.num_steps_ = path.num_steps() / m;
  c.dim_ = path.dim();
  c.values_.reserve((c.num_steps_ + 1) * c.dim_);
  for (std::size_t k = 0; k <= c.num_steps_; ++k) {
    for (std::size_t j = 0; j < c.dim_; ++j) {
      c.values_.push_back(path.value(k * m, j));
    }
  }
  return c;
}

std::vector<double> brownian_values(const BrownianPath& path) { return path.values(); }

void write_path_csv(std::ostream& os, const BrownianPath& path) {
  const std::size_t d = path.dim();
  std::string out = "k,t";
  for (std::size_t j = 1; j <= d; ++j) out += ",dW_" + std::to_string(j);
  for (std::size_t j = 1; j <= d; ++j) out += ",W_" + std::to_string(j);
  out.push_back('\n');
  for (std::size_t k = 0; k <= path.num_steps(); ++k) {
    out += std::to_string(k);
    out.push_back(',');
    out += format_double(static_cast<double>(k) * path.step());
    for (std::size_t j = 0; j < d; ++j) {
      out.push_back(',');
      out += format_double(k == 0 ? 0.0 : path.increment(k - 1, j));
    }
    for (std::size_t j = 0; j < d; ++j) {
      out.push_back(',');
      out += format_double(path.value(k, j));
    }
    out.push_back('\n');
  }
  os << out;
}

}  // namespace nsem
