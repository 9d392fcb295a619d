// Command-line front end: simulates decay/growth GBM under the EM, NSEM and
// BIM schemes and exports the experiment tables as CSV. All numeric output
// goes through format_double (17 significant digits), so a fixed --seed makes
// every run byte-identical.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nsem/analysis.hpp"
#include "nsem/common.hpp"
#include "nsem/csv.hpp"
#include "nsem/model.hpp"
#include "nsem/rng.hpp"
#include "nsem/schemes.hpp"

namespace {

double exp_bound(double x) { return std::exp(-x); }
double linear_bound(double x) { return 1.0 - x; }

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

template <typename T>
T parse_value(const std::string& key, const std::string& text);

template <>
double parse_value<double>(const std::string& key, const std::string& text) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &pos);
  } catch (const std::exception&) {
    pos = std::string::npos;
  }
  if (pos != text.size()) {
    throw std::invalid_argument("config key '" + key + "': '" + text + "' is not a number");
  }
  return v;
}

template <>
long parse_value<long>(const std::string& key, const std::string& text) {
  std::size_t pos = 0;
  long v = 0;
  try {
    v = std::stol(text, &pos);
  } catch (const std::exception&) {
    pos = std::string::npos;
  }
  if (pos != text.size()) {
    throw std::invalid_argument("config key '" + key + "': '" + text + "' is not an integer");
  }
  return v;
}

template <>
int parse_value<int>(const std::string& key, const std::string& text) {
  return static_cast<int>(parse_value<long>(key, text));
}

template <>
std::uint64_t parse_value<std::uint64_t>(const std::string& key, const std::string& text) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(text, &pos);
  } catch (const std::exception&) {
    pos = std::string::npos;
  }
  if (pos != text.size()) {
    throw std::invalid_argument("config key '" + key + "': '" + text +
                                "' is not a nonnegative integer");
  }
  return static_cast<std::uint64_t>(v);
}

template <>
std::string parse_value<std::string>(const std::string&, const std::string& text) {
  return text;
}

// Wraps a subcommand so that every option is also reachable from a plain
// key=value config file ('#' starts a comment). Command-line flags win over
// file values; unknown keys are rejected.
class CommandOptions {
 public:
  explicit CommandOptions(CLI::App* cmd) : cmd_(cmd) {
    cmd_->add_option("--config", config_path_,
                     "key=value file with the same keys as the long flags");
  }

  template <typename T>
  CLI::Option* add(const std::string& flag, T& target, const std::string& desc) {
    auto* opt = cmd_->add_option(flag, target, desc);
    const std::string key = flag.substr(2);
    setters_[key] = [key, &target](const std::string& text) {
      target = parse_value<T>(key, text);
    };
    return opt;
  }

  // Fills in config-file values for options the command line left untouched.
  void apply_config() const {
    if (config_path_.empty()) return;
    std::ifstream is(config_path_);
    if (!is) throw std::invalid_argument("cannot open config file '" + config_path_ + "'");
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
      ++line_no;
      if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw std::invalid_argument("config line " + std::to_string(line_no) +
                                    ": expected key=value");
      }
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      const auto it = setters_.find(key);
      if (it == setters_.end()) {
        throw std::invalid_argument("config line " + std::to_string(line_no) +
                                    ": unknown key '" + key + "'");
      }
      if (cmd_->get_option("--" + key)->count() == 0) it->second(value);
    }
  }

 private:
  CLI::App* cmd_;
  std::string config_path_;
  std::map<std::string, std::function<void(const std::string&)>> setters_;
};

// "lo:hi:n" -> n equally spaced points including both endpoints.
std::vector<double> parse_grid(const std::string& text) {
  double lo = 0.0, hi = 0.0;
  long n = 0;
  char extra = 0;
  if (std::sscanf(text.c_str(), "%lf:%lf:%ld%c", &lo, &hi, &n, &extra) != 3) {
    throw std::invalid_argument("grid must look like lo:hi:n, got '" + text + "'");
  }
  if (!(lo > 0.0) || !(hi > lo)) {
    throw std::invalid_argument("grid endpoints must satisfy 0 < lo < hi");
  }
  if (n < 2 || n > 1000000) {
    throw std::invalid_argument("grid point count must be in [2, 10^6]");
  }
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n));
  const double step = (hi - lo) / static_cast<double>(n - 1);
  for (long i = 0; i < n; ++i) {
    out.push_back(i + 1 == n ? hi : lo + step * static_cast<double>(i));
  }
  return out;
}

std::vector<std::string> parse_scheme_list(const std::string& text) {
  std::vector<std::string> requested;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item != "em" && item != "nsem" && item != "bim") {
      throw std::invalid_argument("unknown scheme '" + item + "' (expected em, nsem, bim)");
    }
    requested.push_back(item);
  }
  if (requested.empty()) throw std::invalid_argument("scheme list is empty");
  // Canonical column order, duplicates collapsed.
  std::vector<std::string> out;
  for (const char* name : {"em", "nsem", "bim"}) {
    if (std::find(requested.begin(), requested.end(), name) != requested.end()) {
      out.emplace_back(name);
    }
  }
  return out;
}

// Shared model/scheme flag block for the simulation subcommands.
struct ModelFlags {
  double mu = -1.0;
  double sigma = 0.1;
  double y0 = 1.0;
  double horizon = 10.0;
  double alpha = 0.0;  // 0: derive from |mu|
  double c0 = -1.0;    // negative: derive from |mu|
  double c1 = -1.0;    // negative: derive from sigma
  std::uint64_t seed = 0;
  std::string out;

  void add_to(CommandOptions& cmd, const std::string& default_out, double default_sigma,
              double default_horizon) {
    sigma = default_sigma;
    horizon = default_horizon;
    out = default_out;
    cmd.add("--mu", mu, "drift rate");
    cmd.add("--sigma", sigma, "volatility, >= 0");
    cmd.add("--y0", y0, "initial value, > 0");
    cmd.add("--T", horizon, "time horizon, > 0");
    cmd.add("--alpha", alpha, "denominator rate (default |mu|, or 1 if mu = 0)");
    cmd.add("--c0", c0, "balanced-scheme weight on h (default |mu|)");
    cmd.add("--c1", c1, "balanced-scheme weight on |dW| (default sigma)");
    cmd.add("--seed", seed, "master seed");
    cmd.add("--out", out, "output CSV path");
  }

  nsem::GbmModel model() const {
    nsem::GbmModel m{mu, sigma, y0, horizon};
    m.validate();
    return m;
  }

  double alpha_value() const {
    if (alpha != 0.0) {
      if (!(alpha > 0.0)) throw std::invalid_argument("--alpha must be positive");
      return alpha;
    }
    return mu == 0.0 ? 1.0 : std::fabs(mu);
  }

  nsem::SchemeSpec scheme_by_name(const std::string& name) const {
    if (name == "em") return nsem::EmScheme{};
    if (name == "nsem") return nsem::NsemScheme{nsem::Denominator(alpha_value())};
    if (name == "bim") {
      nsem::BimParams params{c0 < 0.0 ? std::fabs(mu) : c0, c1 < 0.0 ? sigma : c1};
      params.validate();
      return nsem::BimScheme{params};
    }
    throw std::invalid_argument("unknown scheme '" + name + "'");
  }
};

void write_file(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  os << content;
  if (!os) throw std::runtime_error("write to '" + path + "' failed");
}

int run_paths(const ModelFlags& flags, long steps, const std::string& scheme_list) {
  auto schemes = parse_scheme_list(scheme_list);
  auto gbm = flags.model();
  auto sde = gbm.to_sde();
  if (steps < 1) throw std::invalid_argument("--steps must be >= 1");
  const double h = gbm.horizon / static_cast<double>(steps);

  auto path = nsem::generate_path({flags.seed, 0}, h, static_cast<std::size_t>(steps), 1);
  std::vector<nsem::Trajectory> trajectories;
  trajectories.reserve(schemes.size());
  for (const auto& name : schemes) {
    trajectories.push_back(nsem::integrate(sde, flags.scheme_by_name(name), path));
  }
  auto exact = nsem::gbm_exact_solution(gbm, trajectories.front().times, path.values());

  std::string csv = "t,exact";
  for (const auto& name : schemes) csv += "," + name;
  csv += "\n";
  std::vector<double> row;
  for (std::size_t k = 0; k <= path.num_steps(); ++k) {
    row.clear();
    row.push_back(trajectories.front().times[k]);
    row.push_back(exact[k]);
    for (const auto& t : trajectories) row.push_back(t.state(k, 0));
    nsem::append_csv_row(csv, row);
  }
  write_file(flags.out, csv);
  return 0;
}

int run_expectation(const ModelFlags& flags, long steps, long num_paths,
                    const std::string& scheme_list) {
  auto schemes = parse_scheme_list(scheme_list);
  auto gbm = flags.model();
  auto sde = gbm.to_sde();
  if (steps < 1) throw std::invalid_argument("--steps must be >= 1");
  if (num_paths < 2) throw std::invalid_argument("--paths must be >= 2");
  const double h = gbm.horizon / static_cast<double>(steps);

  std::vector<nsem::McSeries> series;
  series.reserve(schemes.size());
  for (const auto& name : schemes) {
    series.push_back(nsem::mc_expectation(sde, flags.scheme_by_name(name), h,
                                          static_cast<std::size_t>(num_paths), flags.seed));
    if (series.back().failed_paths > 0) {
      std::cerr << "warning: " << name << ": " << series.back().failed_paths << " of "
                << num_paths << " paths failed to integrate\n";
      if (series.back().failed_paths == static_cast<std::size_t>(num_paths)) {
        throw nsem::NumericError("every path failed to integrate", 0);
      }
    }
  }

  std::string csv = "t,analytic";
  for (const auto& name : schemes) csv += "," + name + "_mean," + name + "_se";
  csv += "\n";
  std::vector<double> row;
  const auto& times = series.front().times;
  for (std::size_t k = 0; k < times.size(); ++k) {
    row.clear();
    row.push_back(times[k]);
    row.push_back(nsem::gbm_exact_expectation(gbm, times[k]));
    for (const auto& s : series) {
      row.push_back(s.estimates[k].mean);
      row.push_back(s.estimates[k].std_error);
    }
    nsem::append_csv_row(csv, row);
  }
  write_file(flags.out, csv);
  return 0;
}

int run_minstep(double lambda, double sigma, double eps, const std::string& scheme,
                const std::string& sweep, const std::string& out) {
  if (scheme != "em" && scheme != "nsem" && scheme != "both") {
    throw std::invalid_argument("--scheme must be em, nsem, or both");
  }
  if (!sweep.empty()) {
    auto ratios = parse_grid(sweep);
    auto table = nsem::ratio_curve(lambda, ratios, eps);
    std::string csv = "ratio,h0_em,h0_nsem\n";
    for (const auto& p : table) {
      nsem::append_csv_row(csv, std::vector<double>{p.ratio, p.h0_em, p.h0_nsem});
    }
    write_file(out.empty() ? "minstep.csv" : out, csv);
    return 0;
  }

  std::string csv = "scheme,h0\n";
  if (scheme == "em" || scheme == "both") {
    auto r = nsem::min_step_em(lambda, sigma, eps);
    std::cout << "h0_em = " << nsem::format_double(r.h0) << "\n";
    csv += "em," + nsem::format_double(r.h0) + "\n";
  }
  if (scheme == "nsem" || scheme == "both") {
    auto r = nsem::min_step_nsem(lambda, sigma, eps);
    std::cout << "h0_nsem = " << nsem::format_double(r.h0) << "\n";
    csv += "nsem," + nsem::format_double(r.h0) + "\n";
  }
  if (!out.empty()) write_file(out, csv);
  return 0;
}

int run_convergence(const ModelFlags& flags, const std::string& scheme, long fine_steps,
                    int levels, long num_paths) {
  auto gbm = flags.model();
  if (fine_steps < 1) throw std::invalid_argument("--fine-steps must be >= 1");
  if (num_paths < 1) throw std::invalid_argument("--paths must be >= 1");
  auto curve = nsem::strong_error_curve(gbm, flags.scheme_by_name(scheme),
                                        static_cast<std::size_t>(fine_steps), levels,
                                        static_cast<std::size_t>(num_paths), flags.seed);
  std::string csv = "h,error\n";
  for (std::size_t i = 0; i < curve.steps.size(); ++i) {
    nsem::append_csv_row(csv, std::vector<double>{curve.steps[i], curve.errors[i]});
  }
  write_file(flags.out, csv);

  const double floor = 1e-13 * flags.y0;
  const bool at_roundoff =
      *std::max_element(curve.errors.begin(), curve.errors.end()) <= floor;
  if (at_roundoff) {
    std::cout << "errors at roundoff level; scheme is exact on this model\n";
  } else if (curve.fit) {
    std::cout << "fitted order = " << nsem::format_double(curve.fit->order) << " +/- "
              << nsem::format_double(curve.fit->std_error) << "\n";
  } else {
    std::cout << "fitted order unavailable (fewer than two nonzero error levels)\n";
  }
  return 0;
}

struct InvarianceFlags {
  double lambda = 1.0;
  double sigma = 1.0;
  double eps = 0.01;
  double y0 = 1.0;
  double horizon = 10.0;
  double alpha = 0.0;
  double c0 = -1.0;
  double c1 = -1.0;
  long num_paths = 200;
  std::uint64_t seed = 0;
  std::string scheme = "nsem";
  std::string h_grid = "0.05:0.25:5";
  std::string out = "invariance.csv";
};

int run_invariance(const InvarianceFlags& flags) {
  if (!(flags.lambda > 0.0)) throw std::domain_error("--lambda must be positive");
  if (!(flags.sigma > 0.0)) throw std::domain_error("--sigma must be positive");
  nsem::alpha_for_epsilon(flags.eps);  // range check on eps
  auto grid = parse_grid(flags.h_grid);
  if (flags.num_paths < 1) throw std::invalid_argument("--paths must be >= 1");
  if (grid.back() > flags.horizon) {
    throw std::invalid_argument("h grid extends past the horizon T");
  }

  ModelFlags local;
  local.mu = -flags.lambda;
  local.sigma = flags.sigma;
  local.y0 = flags.y0;
  local.horizon = flags.horizon;
  local.alpha = flags.alpha;
  local.c0 = flags.c0;
  local.c1 = flags.c1;
  auto gbm = local.model();
  auto sde = gbm.to_sde();
  auto domain = nsem::BoxDomain::lower_bounded(0, 0.0);
  nsem::InvarianceBounds bounds{flags.lambda, flags.sigma, 1};
  const auto bound_fn = (flags.scheme == "em") ? &linear_bound : &exp_bound;
  auto spec = local.scheme_by_name(flags.scheme);

  std::string csv = "h,analytic_prob,empirical_step_violation,exit_fraction\n";
  for (double h : grid) {
    auto st = nsem::exit_statistics(sde, spec, domain, bounds, bound_fn, h,
                                    static_cast<std::size_t>(flags.num_paths), flags.seed);
    nsem::append_csv_row(csv, std::vector<double>{
                                  h, nsem::invariance_probability(bounds, bound_fn, h),
                                  st.step_violation_fraction, st.exit_fraction});
  }
  write_file(flags.out, csv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic integrators for geometric Brownian motion: sample paths,"
               " Monte Carlo expectations, minimal invariance-preserving steps,"
               " strong-convergence curves, and domain-exit statistics."};
  app.require_subcommand(1);

  // paths
  auto* cmd_paths = app.add_subcommand(
      "paths", "One shared Brownian path under each scheme, plus the exact solution");
  CommandOptions paths_opts(cmd_paths);
  ModelFlags paths_flags;
  paths_flags.add_to(paths_opts, "paths.csv", 0.1, 10.0);
  long paths_steps = 256;
  std::string paths_schemes = "em,nsem,bim";
  paths_opts.add("--steps", paths_steps, "number of grid steps");
  paths_opts.add("--schemes", paths_schemes, "comma list of em,nsem,bim");

  // expectation
  auto* cmd_exp = app.add_subcommand(
      "expectation", "Monte Carlo mean and standard error per grid node");
  CommandOptions exp_opts(cmd_exp);
  ModelFlags exp_flags;
  exp_flags.add_to(exp_opts, "expectation.csv", 1.0, 10.0);
  long exp_steps = 100;
  long exp_paths = 10000;
  std::string exp_schemes = "em,nsem,bim";
  exp_opts.add("--steps", exp_steps, "number of grid steps (step size is T/steps)");
  exp_opts.add("--paths", exp_paths, "number of Monte Carlo paths");
  exp_opts.add("--schemes", exp_schemes, "comma list of em,nsem,bim");

  // minstep
  auto* cmd_min = app.add_subcommand(
      "minstep", "Largest step preserving positivity with probability 1 - eps");
  CommandOptions min_opts(cmd_min);
  double min_lambda = 1.0, min_sigma = 0.1, min_eps = 0.01;
  std::string min_scheme = "both", min_sweep, min_out;
  min_opts.add("--lambda", min_lambda, "decay rate, > 0");
  min_opts.add("--sigma", min_sigma, "volatility, > 0");
  min_opts.add("--eps", min_eps, "tail probability, in (0, 0.5)");
  min_opts.add("--scheme", min_scheme, "em, nsem, or both");
  min_opts.add("--ratio-sweep", min_sweep,
               "lo:hi:n sweep over sigma/lambda; writes a CSV instead");
  min_opts.add("--out", min_out, "output CSV path (sweep default: minstep.csv)");

  // convergence
  auto* cmd_conv = app.add_subcommand(
      "convergence", "Strong error against the exact solution on coupled grids");
  CommandOptions conv_opts(cmd_conv);
  ModelFlags conv_flags;
  conv_flags.add_to(conv_opts, "convergence.csv", 0.5, 1.0);
  std::string conv_scheme = "em";
  long conv_fine = 512, conv_paths = 2000;
  int conv_levels = 6;
  conv_opts.add("--scheme", conv_scheme, "em, nsem, or bim");
  conv_opts.add("--fine-steps", conv_fine, "steps on the finest grid");
  conv_opts.add("--levels", conv_levels, "number of dyadic coarsening levels");
  conv_opts.add("--paths", conv_paths, "number of Monte Carlo paths");

  // invariance
  auto* cmd_inv = app.add_subcommand(
      "invariance", "Analytic versus empirical positivity statistics over a step grid");
  CommandOptions inv_opts(cmd_inv);
  InvarianceFlags inv;
  inv_opts.add("--lambda", inv.lambda, "decay rate, > 0");
  inv_opts.add("--sigma", inv.sigma, "volatility, > 0");
  inv_opts.add("--eps", inv.eps, "tail probability, in (0, 0.5)");
  inv_opts.add("--y0", inv.y0, "initial value, > 0");
  inv_opts.add("--T", inv.horizon, "time horizon, > 0");
  inv_opts.add("--alpha", inv.alpha, "denominator rate (default lambda)");
  inv_opts.add("--c0", inv.c0, "balanced-scheme weight on h (default lambda)");
  inv_opts.add("--c1", inv.c1, "balanced-scheme weight on |dW| (default sigma)");
  inv_opts.add("--scheme", inv.scheme, "em, nsem, or bim");
  inv_opts.add("--h-grid", inv.h_grid, "lo:hi:n grid of step sizes");
  inv_opts.add("--paths", inv.num_paths, "number of Monte Carlo paths");
  inv_opts.add("--seed", inv.seed, "master seed");
  inv_opts.add("--out", inv.out, "output CSV path");

  try {
    app.parse(argc, argv);
    if (cmd_paths->parsed()) {
      paths_opts.apply_config();
      return run_paths(paths_flags, paths_steps, paths_schemes);
    }
    if (cmd_exp->parsed()) {
      exp_opts.apply_config();
      return run_expectation(exp_flags, exp_steps, exp_paths, exp_schemes);
    }
    if (cmd_min->parsed()) {
      min_opts.apply_config();
      return run_minstep(min_lambda, min_sigma, min_eps, min_scheme, min_sweep, min_out);
    }
    if (cmd_conv->parsed()) {
      conv_opts.apply_config();
      return run_convergence(conv_flags, conv_scheme, conv_fine, conv_levels, conv_paths);
    }
    inv_opts.apply_config();
    return run_invariance(inv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const nsem::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << " (step " << e.step_index() << ")\n";
    return 3;
  } catch (const nsem::RootBracketError& e) {
    std::cerr << "numeric failure: " << e.what() << " [" << e.bracket_lo() << ", "
              << e.bracket_hi() << "]\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid arguments: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "invalid arguments: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
