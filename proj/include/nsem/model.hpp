#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace nsem {

// Ito model dY = f(Y) dt + g(Y) dW with state dimension n and noise dimension
// d. drift fills f(x) as an n-vector, diffusion fills g(x) as an n x d
// row-major matrix. Both callbacks must be pure functions of the state.
struct SdeModel {
  int dim_state = 1;
  int dim_noise = 1;
  std::function<void(std::span<const double>, std::span<double>)> drift;
  std::function<void(std::span<const double>, std::span<double>)> diffusion;
  std::vector<double> initial_state;
  double horizon = 1.0;

  void validate() const;  // throws std::invalid_argument
};

// dY = mu Y dt + sigma Y dW started at y0 > 0.
struct GbmModel {
  double mu = 0.0;
  double sigma = 0.0;
  double y0 = 1.0;
  double horizon = 1.0;

  void validate() const;
  SdeModel to_sde() const;
};

// Axis-aligned box: only listed coordinates are constrained and each side is
// optional, so half-lines and slabs are expressible.
struct AxisBound {
  int index = 0;
  std::optional<double> lower;
  std::optional<double> upper;
};

class BoxDomain {
 public:
  explicit BoxDomain(std::vector<AxisBound> bounds);

  static BoxDomain lower_bounded(int index, double lower);

  const std::vector<AxisBound>& bounds() const { return bounds_; }

  // Closed-set membership: boundary points count as inside.
  bool contains(std::span<const double> state) const;

 private:
  std::vector<AxisBound> bounds_;
};

// E[Y(t)] = y0 exp(mu t).
double gbm_exact_expectation(const GbmModel& model, double t);

// Pathwise solution y0 exp((mu - sigma^2/2) t + sigma W(t)) on the given
// nodes; times must ascend from 0 and w_values[0] must be 0.
std::vector<double> gbm_exact_solution(const GbmModel& model, std::span<const double> times,
                                       std::span<const double> w_values);

struct MilianOptions {
  int face_samples = 32;
  std::uint64_t seed = 0;
  double window_lo = -10.0;  // sampling range for unconstrained coordinates
  double window_hi = 10.0;
};

struct MilianViolation {
  int index = 0;
  bool at_upper = false;  // false: lower face
  std::vector<double> point;
  std::string quantity;  // "f[i]" or "g[i][j]"
  double value = 0.0;
};

struct MilianReport {
  bool satisfied = true;
  std::vector<MilianViolation> violations;
};

// Box-invariance face conditions: on a lower face the drift component must be
// >= 0, on an upper face <= 0 (strict sign checks), and the corresponding
// diffusion row must vanish (|g| <= 1e-12) on both. Each face is probed at
// face_samples points with the free coordinates drawn uniformly; the
// report is deterministic given the options seed.
MilianReport check_milian_conditions(const SdeModel& model, const BoxDomain& domain,
                                     const MilianOptions& options = {});

}  // namespace nsem
