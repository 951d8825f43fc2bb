#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pnlattr/attribution.hpp"
#include "pnlattr/error.hpp"

namespace pnlattr {

enum class ProcessKind {
  Geometric,   // log-Euler step, stays positive; jumps multiply by (1 + jump_size)
  Arithmetic,  // Euler step; jumps add jump_size
};

struct ProcessSpec {
  std::string name;
  double initial = 1.0;
  double drift = 0.0;
  double volatility = 0.0;
  ProcessKind kind = ProcessKind::Geometric;
  double jump_size = 0.0;
};

struct PathParams {
  double start_time = 0.0;
  double end_time = 1.0;
  std::vector<ProcessSpec> processes;
  /// Correlation of the Brownian drivers; empty means independent.
  std::vector<std::vector<double>> correlation;
  /// Intensity of jumps shared by all processes.
  double jump_intensity = 0.0;
  /// Steps (1-based) at which a common jump is forced, on top of random ones.
  std::vector<std::size_t> forced_jump_steps;
};

struct PathSet {
  std::vector<double> grid;                       // u_0 = start_time < ... < u_n = end_time
  std::vector<std::vector<double>> trajectories;  // one per process, grid.size() values each
  std::vector<std::size_t> jump_steps;            // steps i where (u_{i-1}, u_i] carries a common jump
  std::uint64_t seed = 0;
  PathParams params;

  std::span<const double> path(std::size_t process) const { return trajectories.at(process); }
  std::span<const double> path(std::string_view name) const {
    for (std::size_t i = 0; i < params.processes.size(); ++i)
      if (params.processes[i].name == name) return trajectories[i];
    fail(ErrorKind::InvalidArgument, "no simulated process named '" + std::string(name) + "'");
  }
  std::size_t steps() const noexcept { return grid.empty() ? 0 : grid.size() - 1; }
};

namespace detail {

/// Lower-triangular factor of a positive semidefinite matrix; throws
/// InvalidCorrelation otherwise.
inline std::vector<std::vector<double>> correlation_factor(const std::vector<std::vector<double>>& c, std::size_t n) {
  std::vector<std::vector<double>> l(n, std::vector<double>(n, 0.0));
  if (c.empty()) {
    for (std::size_t i = 0; i < n; ++i) l[i][i] = 1.0;
    return l;
  }
  require(c.size() == n, ErrorKind::InvalidCorrelation, "correlation matrix size differs from process count");
  for (std::size_t i = 0; i < n; ++i) {
    require(c[i].size() == n, ErrorKind::InvalidCorrelation, "correlation matrix is not square");
    require(c[i][i] == 1.0, ErrorKind::InvalidCorrelation, "correlation diagonal must be 1");
    for (std::size_t j = 0; j < n; ++j) {
      require(std::isfinite(c[i][j]) && std::abs(c[i][j]) <= 1.0, ErrorKind::InvalidCorrelation,
              "correlation entries must lie in [-1, 1]");
      require(c[i][j] == c[j][i], ErrorKind::InvalidCorrelation, "correlation matrix must be symmetric");
    }
  }
  constexpr double tol = 1e-12;
  for (std::size_t j = 0; j < n; ++j) {
    double d = c[j][j];
    for (std::size_t k = 0; k < j; ++k) d -= l[j][k] * l[j][k];
    require(d >= -tol, ErrorKind::InvalidCorrelation, "correlation matrix is not positive semidefinite");
    l[j][j] = d > tol ? std::sqrt(d) : 0.0;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = c[i][j];
      for (std::size_t k = 0; k < j; ++k) s -= l[i][k] * l[j][k];
      if (l[j][j] > 0.0) {
        l[i][j] = s / l[j][j];
      } else {
        require(std::abs(s) <= 1e-9, ErrorKind::InvalidCorrelation,
                "correlation matrix is not positive semidefinite");
      }
    }
  }
  return l;
}

}  // namespace detail

/// Euler paths on a uniform grid of n_steps steps, deterministic in seed.
inline PathSet simulate_paths(const PathParams& params, std::size_t n_steps, std::uint64_t seed) {
  require(n_steps >= 1, ErrorKind::InvalidArgument, "need at least one step");
  require(params.end_time > params.start_time, ErrorKind::InvalidArgument, "path horizon must be positive");
  require(params.jump_intensity >= 0.0, ErrorKind::InvalidArgument, "jump intensity must be >= 0");
  const std::size_t m = params.processes.size();
  require(m >= 1, ErrorKind::InvalidArgument, "no processes to simulate");
  for (const auto& p : params.processes) {
    require(std::isfinite(p.volatility) && p.volatility >= 0.0, ErrorKind::InvalidArgument,
            "volatility of '" + p.name + "' must be >= 0");
    if (p.kind == ProcessKind::Geometric)
      require(p.initial > 0.0 && p.jump_size > -1.0, ErrorKind::InvalidArgument,
              "geometric process '" + p.name + "' must stay positive");
  }
  const auto chol = detail::correlation_factor(params.correlation, m);

  PathSet out;
  out.seed = seed;
  out.params = params;
  const double dt = (params.end_time - params.start_time) / static_cast<double>(n_steps);
  const double sqrt_dt = std::sqrt(dt);
  out.grid.resize(n_steps + 1);
  for (std::size_t i = 0; i <= n_steps; ++i) out.grid[i] = params.start_time + dt * static_cast<double>(i);
  out.grid.back() = params.end_time;
  out.trajectories.assign(m, std::vector<double>(n_steps + 1));
  for (std::size_t k = 0; k < m; ++k) out.trajectories[k][0] = params.processes[k].initial;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform;
  const double jump_prob = -std::expm1(-params.jump_intensity * dt);
  std::vector<double> z(m), w(m);

  for (std::size_t i = 1; i <= n_steps; ++i) {
    for (auto& v : z) v = normal(rng);
    for (std::size_t r = 0; r < m; ++r) {
      w[r] = 0.0;
      for (std::size_t c = 0; c <= r; ++c) w[r] += chol[r][c] * z[c];
    }
    bool jump = params.jump_intensity > 0.0 && uniform(rng) < jump_prob;
    jump = jump || std::find(params.forced_jump_steps.begin(), params.forced_jump_steps.end(), i) !=
                       params.forced_jump_steps.end();
    if (jump) out.jump_steps.push_back(i);

    for (std::size_t k = 0; k < m; ++k) {
      const auto& p = params.processes[k];
      const double prev = out.trajectories[k][i - 1];
      double next;
      if (p.kind == ProcessKind::Geometric) {
        next = prev * std::exp((p.drift - 0.5 * p.volatility * p.volatility) * dt + p.volatility * sqrt_dt * w[k]);
        if (jump) next *= 1.0 + p.jump_size;
      } else {
        next = prev + p.drift * dt + p.volatility * sqrt_dt * w[k];
        if (jump) next += p.jump_size;
      }
      out.trajectories[k][i] = next;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Discrete product formula

/// Left-point sums of the product rule on a partition:
/// sum A_{i-1} dchi_i + sum chi_{i-1} dA_i + sum dA_i dchi_i = A_n chi_n - A_0 chi_0.
struct GridDecomposition {
  double fx_integral = 0.0;
  double asset_integral = 0.0;
  double covariation = 0.0;

  double sum() const noexcept { return fx_integral + asset_integral + covariation; }
};

inline GridDecomposition grid_product_decomposition(std::span<const double> asset, std::span<const double> fx) {
  require(asset.size() == fx.size(), ErrorKind::LengthMismatch, "asset and FX paths differ in length");
  require(!asset.empty(), ErrorKind::LengthMismatch, "empty paths");
  GridDecomposition d;
  for (std::size_t i = 1; i < asset.size(); ++i) {
    const double da = asset[i] - asset[i - 1];
    const double dx = fx[i] - fx[i - 1];
    d.fx_integral += asset[i - 1] * dx;
    d.asset_integral += fx[i - 1] * da;
    d.covariation += da * dx;
  }
  return d;
}

// ---------------------------------------------------------------------------
// Ito-style decomposition for scalar r and x

struct ItoDecomposition {
  double carry = 0.0;
  double rate = 0.0;
  double market = 0.0;
  double total = 0.0;     // A_T - A_t along the path
  double residual = 0.0;  // total - (carry + rate + market)
};

/// Step sizes of the central differences: relative 1e-5 for first
/// derivatives, relative 1e-4 for second derivatives.
inline constexpr double kFirstDifferenceStep = 1e-5;
inline constexpr double kSecondDifferenceStep = 1e-4;

/// Left-point sums of dA/ds du, dA/dr dr + 1/2 d2A/dr2 (dr)^2 and the same
/// in x, with partials by central differences at (u_{i-1}, r_{i-1}, x_{i-1}).
template <class PriceFn>
ItoDecomposition grid_ito_decomposition(const PriceFn& price, std::span<const double> rate_path,
                                        std::span<const double> factor_path, std::span<const double> grid) {
  require(rate_path.size() == grid.size() && factor_path.size() == grid.size(), ErrorKind::LengthMismatch,
          "rate, factor and time grids differ in length");
  require(grid.size() >= 2, ErrorKind::LengthMismatch, "need at least one step");

  auto step = [](double v, double rel) { return rel * std::max(1.0, std::abs(v)); };
  auto checked = [](double v, const char* what) {
    require(std::isfinite(v), ErrorKind::NonFiniteDerivative, std::string(what) + " is not finite");
    return v;
  };

  ItoDecomposition d;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double s = grid[i - 1], r = rate_path[i - 1], x = factor_path[i - 1];
    const double hs = step(s, kFirstDifferenceStep);
    const double hr = step(r, kFirstDifferenceStep), hx = step(x, kFirstDifferenceStep);
    const double kr = step(r, kSecondDifferenceStep), kx = step(x, kSecondDifferenceStep);
    const double mid = price(s, r, x);

    const double d_s = checked((price(s + hs, r, x) - price(s - hs, r, x)) / (2.0 * hs), "dA/ds");
    const double d_r = checked((price(s, r + hr, x) - price(s, r - hr, x)) / (2.0 * hr), "dA/dr");
    const double d_x = checked((price(s, r, x + hx) - price(s, r, x - hx)) / (2.0 * hx), "dA/dx");
    const double d_rr = checked((price(s, r + kr, x) - 2.0 * mid + price(s, r - kr, x)) / (kr * kr), "d2A/dr2");
    const double d_xx = checked((price(s, r, x + kx) - 2.0 * mid + price(s, r, x - kx)) / (kx * kx), "d2A/dx2");

    const double du = grid[i] - s, dr = rate_path[i] - r, dx = factor_path[i] - x;
    d.carry += d_s * du;
    d.rate += d_r * dr + 0.5 * d_rr * dr * dr;
    d.market += d_x * dx + 0.5 * d_xx * dx * dx;
  }
  d.total = price(grid.back(), rate_path.back(), factor_path.back()) -
            price(grid.front(), rate_path.front(), factor_path.front());
  d.residual = d.total - (d.carry + d.rate + d.market);
  return d;
}

// ---------------------------------------------------------------------------
// Two-point split against the fine grid

struct ComponentDiscrepancy {
  std::string component;
  double coarse = 0.0;
  double fine = 0.0;
  double diff = 0.0;  // coarse - fine
};

/// Components in order: fx, asset, covariation, total.
inline std::vector<ComponentDiscrepancy> compare_coarse_vs_fine(std::span<const double> asset,
                                                                std::span<const double> fx, FxMode mode) {
  const GridDecomposition fine = grid_product_decomposition(asset, fx);
  const FxSplit coarse = fx_split(asset.front(), asset.back(), FxQuote(fx.front()), FxQuote(fx.back()), mode);
  auto row = [](std::string name, double c, double f) { return ComponentDiscrepancy{std::move(name), c, f, c - f}; };
  return {row("fx", coarse.fx_part, fine.fx_integral), row("asset", coarse.asset_part, fine.asset_integral),
          row("covariation", 0.0, fine.covariation),
          row("total", coarse.fx_part + coarse.asset_part, fine.sum())};
}

inline std::vector<ComponentDiscrepancy> compare_coarse_vs_fine(const PathSet& paths, FxMode mode,
                                                                std::size_t asset_index = 0,
                                                                std::size_t fx_index = 1) {
  return compare_coarse_vs_fine(paths.path(asset_index), paths.path(fx_index), mode);
}

struct DiscrepancyRow {
  std::uint64_t seed = 0;
  std::size_t n_steps = 0;
  ComponentDiscrepancy value;
};

struct ComponentStats {
  std::string component;
  std::size_t count = 0;
  double mean_coarse = 0.0;
  double mean_fine = 0.0;
  double mean_diff = 0.0;
  double stddev_diff = 0.0;
  double stderr_diff = 0.0;
  double stddev_fine = 0.0;
  double stderr_fine = 0.0;
};

struct DiscrepancyStudy {
  std::vector<DiscrepancyRow> rows;   // seed-major, component order of compare_coarse_vs_fine
  std::vector<ComponentStats> stats;  // one per component
};

/// Runs the coarse-vs-fine comparison for seeds first_seed .. first_seed+count-1.
/// Process 0 is the asset price, process 1 the FX rate.
inline DiscrepancyStudy run_discrepancy_study(const PathParams& params, std::size_t n_steps,
                                              std::uint64_t first_seed, std::size_t count, FxMode mode) {
  require(count >= 1, ErrorKind::InvalidArgument, "need at least one seed");
  require(params.processes.size() >= 2, ErrorKind::InvalidArgument, "study needs an asset and an FX process");
  DiscrepancyStudy study;
  std::vector<double> sum_c, sum_f, sum_d, sq_d, sq_f;
  for (std::size_t k = 0; k < count; ++k) {
    const std::uint64_t seed = first_seed + k;
    const auto comps = compare_coarse_vs_fine(simulate_paths(params, n_steps, seed), mode);
    if (study.stats.empty()) {
      for (const auto& c : comps) study.stats.push_back({c.component});
      sum_c.assign(comps.size(), 0.0);
      sum_f = sum_d = sq_d = sq_f = sum_c;
    }
    for (std::size_t j = 0; j < comps.size(); ++j) {
      sum_c[j] += comps[j].coarse;
      sum_f[j] += comps[j].fine;
      sum_d[j] += comps[j].diff;
      sq_d[j] += comps[j].diff * comps[j].diff;
      sq_f[j] += comps[j].fine * comps[j].fine;
      study.rows.push_back({seed, n_steps, comps[j]});
    }
  }
  const double n = static_cast<double>(count);
  for (std::size_t j = 0; j < study.stats.size(); ++j) {
    auto& s = study.stats[j];
    s.count = count;
    s.mean_coarse = sum_c[j] / n;
    s.mean_fine = sum_f[j] / n;
    s.mean_diff = sum_d[j] / n;
    auto sd = [&](double sum, double sq) {
      if (count < 2) return 0.0;
      return std::sqrt(std::max(0.0, (sq - sum * sum / n) / (n - 1.0)));
    };
    s.stddev_diff = sd(sum_d[j], sq_d[j]);
    s.stddev_fine = sd(sum_f[j], sq_f[j]);
    s.stderr_diff = s.stddev_diff / std::sqrt(n);
    s.stderr_fine = s.stddev_fine / std::sqrt(n);
  }
  return study;
}

/// CSV: seed,n_steps,component,coarse,fine,diff
inline void write_discrepancy_csv(std::ostream& os, std::span<const DiscrepancyRow> rows) {
  os << "seed,n_steps,component,coarse,fine,diff\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%llu,%zu,%s,%.10g,%.10g,%.10g\n", static_cast<unsigned long long>(r.seed),
                  r.n_steps, r.value.component.c_str(), r.value.coarse, r.value.fine, r.value.diff);
    os << buf;
  }
}

}  // namespace pnlattr
