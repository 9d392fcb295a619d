#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <vector>

namespace nsem {

// Addresses one reproducible stream: (master_seed, stream_index) pairs map to
// independent substreams, one per Monte Carlo path.
struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_index = 0;
};

// Engine seed for a stream: splitmix64 finalizer applied to
// master_seed + (stream_index + 1) * 0x9E3779B97F4A7C15. Distinct indices
// decorrelate even when master seeds are adjacent integers.
std::uint64_t stream_seed(const SeedSpec& seed);

// mt19937_64 plus an inverse-CDF normal transform. Both the engine and
// erf_inv are fully specified, so draws are bit-identical across platforms;
// std::normal_distribution is implementation-defined and deliberately avoided.
class NormalSampler {
 public:
  explicit NormalSampler(const SeedSpec& seed);

  double next();          // standard normal
  double next_uniform();  // strictly inside (0, 1)

 private:
  std::mt19937_64 engine_;
};

// Discretized Brownian motion on a uniform grid of N steps of size h.
// Node values W(t_k) are the primary representation, accumulated left to
// right once at generation; increments are differences of stored nodes.
// Coarsening therefore subsamples nodes and couples paths bitwise.
class BrownianPath {
 public:
  // Accumulates the given N x dim row-major increments into node values.
  static BrownianPath from_increments(double step, std::size_t dim,
                                      std::span<const double> increments);

  double step() const { return step_; }
  std::size_t num_steps() const { return num_steps_; }
  std::size_t dim() const { return dim_; }

  // W_j(t_k) for k in [0, N]; W(t_0) = 0.
  double value(std::size_t k, std::size_t j) const { return values_[k * dim_ + j]; }

  // W_j(t_{k+1}) - W_j(t_k) for k in [0, N).
  double increment(std::size_t k, std::size_t j) const {
    return values_[(k + 1) * dim_ + j] - values_[k * dim_ + j];
  }

  void increment_row(std::size_t k, std::span<double> out) const;

  // Flat (N+1) x dim row-major node values.
  const std::vector<double>& values() const { return values_; }

 private:
  BrownianPath() = default;
  friend BrownianPath generate_path(const SeedSpec&, double, std::size_t, std::size_t);
  friend BrownianPath coarsen(const BrownianPath&, std::size_t);

  double step_ = 0.0;
  std::size_t num_steps_ = 0;
  std::size_t dim_ = 1;
  std::vector<double> values_;
};

// Draws N x dim increments ~ Normal(0, step) in row-major order (step-major,
// coordinate-minor) from the stream addressed by seed.
BrownianPath generate_path(const SeedSpec& seed, double step, std::size_t num_steps,
                           std::size_t dim = 1);

// Path on the grid of every m-th node; m must divide num_steps. Coarse node
// values equal the fine ones bitwise, coarse increments are the exact sums of
// the fine increments they span.
BrownianPath coarsen(const BrownianPath& path, std::size_t m);

// Node values W(t_0) .. W(t_N) as a flat (N+1) x dim row-major array.
std::vector<double> brownian_values(const BrownianPath& path);

// Rows k = 0..N: "k,t,dW_1..dW_d,W_1..W_d" where the dW columns hold the
// increment ending at t_k (zeros for k = 0).
void write_path_csv(std::ostream& os, const BrownianPath& path);

}  // namespace nsem
