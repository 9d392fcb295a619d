#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "nsem/rng.hpp"
#include "nsem/specfun.hpp"
#include "oracles.hpp"

using nsem::BrownianPath;
using nsem::NormalSampler;
using nsem::SeedSpec;

TEST_CASE("stream seeds separate master seed and stream index") {
  CHECK(nsem::stream_seed({1, 0}) == nsem::stream_seed({1, 0}));
  CHECK(nsem::stream_seed({1, 0}) != nsem::stream_seed({1, 1}));
  CHECK(nsem::stream_seed({1, 0}) != nsem::stream_seed({2, 0}));
  // Adjacent master seeds must not collide across small stream indices.
  std::vector<std::uint64_t> seen;
  for (std::uint64_t m = 0; m < 16; ++m)
    for (std::uint64_t s = 0; s < 16; ++s) seen.push_back(nsem::stream_seed({m, s}));
  std::sort(seen.begin(), seen.end());
  CHECK(std::adjacent_find(seen.begin(), seen.end()) == seen.end());
}

TEST_CASE("sampler draws are reproducible") {
  NormalSampler a({99, 3});
  NormalSampler b({99, 3});
  for (int i = 0; i < 200; ++i) CHECK(a.next() == b.next());
  NormalSampler c({99, 4});
  bool same = true;
  NormalSampler a2({99, 3});
  for (int i = 0; i < 200; ++i) same = same && (a2.next() == c.next());
  CHECK_FALSE(same);
}

TEST_CASE("uniform draws stay strictly inside the unit interval") {
  NormalSampler s({5, 0});
  for (int i = 0; i < 100000; ++i) {
    const double u = s.next_uniform();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("sampler moments match the standard normal") {
  NormalSampler s({2024, 0});
  const int n = 100000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = s.next();
    sum += z;
    sumsq += z * z;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  CHECK(std::fabs(mean) <= 4.0 / std::sqrt(static_cast<double>(n)));
  CHECK(std::fabs(var - 1.0) <= 0.05);
}

TEST_CASE("standardized increments pass a Kolmogorov-Smirnov check") {
  const std::size_t n = 10000;
  const double h = 0.01;
  auto path = nsem::generate_path({314, 0}, h, n, 1);
  std::vector<double> z(n);
  for (std::size_t k = 0; k < n; ++k) z[k] = path.increment(k, 0) / std::sqrt(h);
  std::sort(z.begin(), z.end());
  double ks = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double cdf = 0.5 * (1.0 + nsem::erf(z[i] / std::sqrt(2.0)));
    ks = std::max(ks, std::fabs(cdf - static_cast<double>(i + 1) / n));
    ks = std::max(ks, std::fabs(cdf - static_cast<double>(i) / n));
  }
  // Two-sided critical value at level 0.1%: sqrt(ln(2/0.001) / (2n)).
  const double critical = std::sqrt(std::log(2.0 / 0.001) / (2.0 * n));
  CHECK(ks < critical);
}

TEST_CASE("distinct streams are uncorrelated") {
  NormalSampler a({7, 0});
  NormalSampler b({7, 1});
  const int n = 100000;
  double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
  for (int i = 0; i < n; ++i) {
    const double x = a.next(), y = b.next();
    sa += x; sb += y; saa += x * x; sbb += y * y; sab += x * y;
  }
  const double cov = sab / n - (sa / n) * (sb / n);
  const double va = saa / n - (sa / n) * (sa / n);
  const double vb = sbb / n - (sb / n) * (sb / n);
  CHECK(std::fabs(cov / std::sqrt(va * vb)) <= 0.02);
}

TEST_CASE("generated increments have the advertised distribution") {
  const std::size_t n = 100000;
  const double h = 0.01;
  auto path = nsem::generate_path({55, 9}, h, n, 1);
  CHECK(path.step() == h);
  CHECK(path.num_steps() == n);
  CHECK(path.dim() == 1);
  double sum = 0.0, sumsq = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double dw = path.increment(k, 0);
    sum += dw;
    sumsq += dw * dw;
  }
  const double mean = sum / n;
  CHECK(std::fabs(mean) <= 4.0 * std::sqrt(h / n));
  const double var = sumsq / n - mean * mean;
  CHECK(std::fabs(var - h) <= 0.05 * h);
  // Same seed: bitwise identical nodes.
  auto again = nsem::generate_path({55, 9}, h, n, 1);
  CHECK(again.values() == path.values());
}

TEST_CASE("generate_path validates its arguments") {
  CHECK_THROWS_AS(nsem::generate_path({1, 0}, 0.0, 4, 1), std::invalid_argument);
  CHECK_THROWS_AS(nsem::generate_path({1, 0}, -1.0, 4, 1), std::invalid_argument);
  CHECK_THROWS_AS(nsem::generate_path({1, 0}, 0.1, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(nsem::generate_path({1, 0}, 0.1, 4, 0), std::invalid_argument);
}

TEST_CASE("node values are prefix sums of increments") {
  const double inc1[] = {1.0, -1.0};
  auto p = BrownianPath::from_increments(1.0, 1, inc1);
  CHECK(p.values() == std::vector<double>{0.0, 1.0, 0.0});
  CHECK(p.increment(0, 0) == 1.0);
  CHECK(p.increment(1, 0) == -1.0);

  const double zeros[6] = {};
  auto z = BrownianPath::from_increments(0.5, 2, zeros);
  for (double v : z.values()) CHECK(v == 0.0);

  // Last node against a compensated-sum oracle: left-to-right accumulation
  // error is bounded by n * eps * sum |dW|.
  auto g = nsem::generate_path({8, 1}, 0.01, 50000, 1);
  std::vector<double> incs(g.num_steps());
  double abs_sum = 0.0;
  for (std::size_t k = 0; k < g.num_steps(); ++k) {
    incs[k] = g.increment(k, 0);
    abs_sum += std::fabs(incs[k]);
  }
  const double oracle = oracles::compensated_sum(incs);
  const double bound = static_cast<double>(g.num_steps()) * 2.220446049250313e-16 * abs_sum;
  CHECK(std::fabs(g.value(g.num_steps(), 0) - oracle) <= bound);

  const double bad[] = {1.0, std::nan("")};
  CHECK_THROWS_AS(BrownianPath::from_increments(1.0, 1, bad), std::invalid_argument);
  const double odd[] = {1.0, 2.0, 3.0};
  CHECK_THROWS_AS(BrownianPath::from_increments(1.0, 2, odd), std::invalid_argument);
}

TEST_CASE("coarsening subsamples nodes bitwise") {
  const std::size_t n = 60;
  auto fine = nsem::generate_path({17, 2}, 0.25, n, 2);
  for (std::size_t m : {1, 2, 3, 4, 5, 6, 10, 12, 15, 20, 30, 60}) {
    auto coarse = nsem::coarsen(fine, m);
    CHECK(coarse.num_steps() == n / m);
    CHECK(coarse.step() == 0.25 * static_cast<double>(m));
    CHECK(coarse.dim() == 2);
    for (std::size_t k = 0; k <= n / m; ++k)
      for (std::size_t j = 0; j < 2; ++j)
        CHECK(coarse.value(k, j) == fine.value(k * m, j));
  }
  // m = N collapses to a single increment equal to W(T).
  auto one = nsem::coarsen(fine, n);
  CHECK(one.num_steps() == 1);
  CHECK(one.increment(0, 0) == fine.value(n, 0));
  CHECK(one.increment(0, 1) == fine.value(n, 1));

  CHECK_THROWS_AS(nsem::coarsen(fine, 7), std::invalid_argument);
  CHECK_THROWS_AS(nsem::coarsen(fine, 0), std::invalid_argument);
}

TEST_CASE("coarse increments span the fine ones exactly") {
  auto fine = nsem::generate_path({29, 0}, 0.125, 48, 1);
  auto coarse = nsem::coarsen(fine, 4);
  for (std::size_t k = 0; k < coarse.num_steps(); ++k) {
    CHECK(coarse.increment(k, 0) == fine.value(4 * (k + 1), 0) - fine.value(4 * k, 0));
  }
  CHECK(nsem::brownian_values(coarse).size() == coarse.num_steps() + 1);
  CHECK(nsem::brownian_values(fine)[0] == 0.0);
}

TEST_CASE("path CSV layout") {
  auto p = nsem::generate_path({3, 0}, 0.5, 3, 2);
  std::ostringstream os, os2;
  nsem::write_path_csv(os, p);
  nsem::write_path_csv(os2, p);
  CHECK(os.str() == os2.str());

  std::istringstream in(os.str());
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "k,t,dW_1,dW_2,W_1,W_2");
  REQUIRE(std::getline(in, line));
  CHECK(line.rfind("0,0,0,0,", 0) == 0);  // increments are zero on the first row
  std::size_t rows = 1;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 4);
  CHECK(os.str().find('\r') == std::string::npos);
}
