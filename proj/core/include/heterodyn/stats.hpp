#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "heterodyn/grid.hpp"
#include "heterodyn/model.hpp"
#include "heterodyn/rng.hpp"
#include "heterodyn/simulate.hpp"
#include "heterodyn/transfer.hpp"

namespace heterodyn {

// Observable u evaluated pointwise; grids use its cell averages.
struct Observable {
  std::string id;
  std::function<double(double)> fn;
};

// Law of Z under stationarity: mu pushed through x -> x + s(x) eps, on the
// stationary grid widened by ceil(s_max epsilon / 2 / h) cells per side.
struct MuPrime {
  GridDensity density;
};

MuPrime mu_prime(const GridDensity& stationary, const ModelConfig& config);

// Same cells as `target` (which must extend `source` by whole cells); zero padding.
GridDensity embed(const GridDensity& source, const Grid& target);

// Wasserstein-1 between two densities on a common grid, treating each cell
// as an atom at its centre: h * sum |F_i - G_i|.
double kantorovich(const GridDensity& f, const GridDensity& g);

struct GapReport {
  double kappa = 0.0;
  double bound = 0.0;  // s_M * E|eps|
};

// AssumptionViolation unless s is constant.
GapReport mu_mu_prime_gap(const GridDensity& stationary, const MuPrime& mu_p, const ModelConfig& config);

// Histogram of the observations.
GridDensity empirical_measure(const Trajectory& traj, const Grid& grid);

// Everything the Monte Carlo checks need from the operator side.
struct StatsContext {
  KernelMatrix L;
  GridDensity mu;
  MuPrime mu_p;
};

StatsContext make_stats_context(const ModelConfig& config, std::size_t n_cells = 1024);

// ---------------------------------------------------------------------------
// Birkhoff sums, CLT, large deviations
// ---------------------------------------------------------------------------

struct BirkhoffSeries {
  std::string observable_id;
  std::vector<double> values;  // S_1 .. S_n
  bool centered = false;
};

// Integral of u against a grid density, by cell averages of u.
double integrate(const Observable& u, const GridDensity& w);

BirkhoffSeries birkhoff(const Trajectory& traj, const Observable& u, const MuPrime& mu_p,
                        bool centered = true);

// S_n (centered by the mu' mean) for `replicas` independent stationary runs;
// replica r uses stream {seed, stream_id + r}.
std::vector<double> birkhoff_sums(const ModelConfig& config, const StatsContext& ctx,
                                  const Observable& u, std::size_t n, std::size_t replicas,
                                  SeededStream stream);

// sigma^2 = Var_mu'(u) + 2 sum_{t=1}^{t_max} Cov_mu(u_hat, L^t u_hat) with
// u_hat(x) = E u(x + s(x) eps).
double sigma2_series(const ModelConfig& config, const StatsContext& ctx, const Observable& u,
                     std::size_t t_max);

// Two-sided Kolmogorov-Smirnov against N(0, 1) with the asymptotic p-value.
struct KsResult {
  double statistic = 0.0;
  double p_value = 0.0;
};
KsResult ks_normal(std::span<const double> standardized);
double kolmogorov_survival(double lambda);

struct CltReport {
  std::size_t n = 0;
  std::size_t replicas = 0;
  double mean_mu_prime = 0.0;
  double sigma2_batch = 0.0;
  double sigma2_series = 0.0;
  double relative_gap = 0.0;  // |batch - series| / series
  KsResult ks;
  std::vector<double> sums;   // S_n per replica
};

// DegenerateData when the variance estimate is below 1e-12.
CltReport clt_check(const ModelConfig& config, const StatsContext& ctx, const Observable& u,
                    std::size_t n, std::size_t replicas, SeededStream stream,
                    std::size_t t_max = 100);

struct LdPoint {
  double eps = 0.0;
  std::size_t count = 0;  // replicas with S_n > n eps
  double rate = 0.0;      // -(1/n) log(count / replicas), or the censored lower bound
  bool censored = false;
  double gaussian_rate = 0.0;     // eps^2 / (2 sigma^2)
  double gaussian_finite_n = 0.0; // -(1/n) log P(N(0, sigma^2 n) > n eps)
};

struct LdReport {
  std::size_t n = 0;
  std::size_t replicas = 0;
  double sigma2 = 0.0;
  std::vector<LdPoint> points;
  bool monotone = false;
  bool convex = false;  // second differences >= -tol on uncensored points
};

LdReport ld_from_sums(std::span<const double> sums, std::size_t n, std::span<const double> eps_grid,
                      double sigma2, double convex_tol = 1e-3);

LdReport ld_rate(const ModelConfig& config, const StatsContext& ctx, const Observable& u,
                 std::span<const double> eps_grid, std::size_t n, std::size_t replicas,
                 SeededStream stream);

// ---------------------------------------------------------------------------
// Concentration of the empirical measure
// ---------------------------------------------------------------------------

// 2 exp(-t^2 / (4 sum Lip_j^2 (C_eps s_M^2 + C_X))).
double concentration_bound(double t, std::span<const double> lipschitz, double c_eps, double c_x,
                           double s_max);

struct ConcentrationRow {
  std::size_t n = 0;
  double mean = 0.0;
  double q05 = 0.0, q50 = 0.0, q95 = 0.0;
  double tail_slope = 0.0;  // slope of log P(kappa > mean + t) against t^2
  std::vector<double> kappas;
};

struct ConcentrationReport {
  std::vector<ConcentrationRow> rows;
  double loglog_slope = 0.0;
};

ConcentrationReport concentration_check(const ModelConfig& config, const StatsContext& ctx,
                                        std::span<const std::size_t> n_list, std::size_t replicas,
                                        SeededStream stream);

// Least-squares slope of y on x.
double ols_slope(std::span<const double> x, std::span<const double> y);

}  // namespace heterodyn
