#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "heterodyn/gev.hpp"
#include "heterodyn/grid.hpp"
#include "heterodyn/model.hpp"
#include "heterodyn/rng.hpp"
#include "heterodyn/simulate.hpp"
#include "heterodyn/stats.hpp"
#include "heterodyn/transfer.hpp"

namespace heterodyn {

// -log|x - center|, +inf at the centre.
double observable_phi(double x, double center);

// Target {phi >= u} = [center - r, center + r] with u = -log r. Membership is
// decided through phi so that hitting times and maxima see the same event.
// The empty target has radius 0 and threshold +inf.
struct BallTarget {
  double center = 0.0;
  double radius = 0.0;
  double threshold = 0.0;

  static BallTarget from_radius(double center, double radius);
  bool contains(double z) const { return !empty() && observable_phi(z, center) >= threshold; }
  bool empty() const { return !(radius > 0.0); }
};

// Probability under the stationary density that one observation lands in the
// ball: sum over cells of the smeared ball probability times the cell mass.
double ball_visit_probability(const GridDensity& stationary, const ObsNoise& obs, double center,
                              double radius);

// Solves t * P(Z in ball) = tau for the radius by bisection, to relative
// accuracy 1e-6 in the left side. tau = 0 gives the empty target. The centre
// must lie in I_Gamma where the stationary density is positive.
BallTarget threshold_from_tau(double tau, std::size_t t, const GridDensity& stationary,
                              const ModelConfig& config, double center);

// First j >= 1 with z_j in the ball; nullopt when censored.
std::optional<std::size_t> hitting_time(std::span<const double> z, const BallTarget& ball);

// max_{1 <= j <= t} phi(z_j); -inf when t = 0.
double running_max(std::span<const double> z, double center, std::size_t t);

// Location of the largest stationary weight.
double stationary_mode(const GridDensity& stationary);
// Midpoint of the cells carrying mass above kSupportMass.
double support_midpoint(const GridDensity& stationary);

// Wilson score interval for k successes out of n at z standard deviations.
Interval wilson_interval(std::size_t k, std::size_t n, double z);

// ---------------------------------------------------------------------------
// Gumbel law
// ---------------------------------------------------------------------------

struct GumbelRow {
  double tau = 0.0;
  double u_t = 0.0;
  double radius = 0.0;
  double W_hat = 0.0;
  Interval ci;  // Wilson, 3 sigma
  double e_minus_tau = 0.0;
  double beta_spectral = 1.0;
  double e_minus_beta_tau = 0.0;
  std::size_t survivors = 0;
};

struct GumbelReport {
  double center = 0.0;
  std::size_t t = 0;
  std::size_t replicas = 0;
  bool conjectural = false;  // s is not constant
  std::vector<GumbelRow> rows;
};

struct EvtOptions {
  std::optional<double> center;  // default: stationary mode
  std::size_t extremal_k_max = 20;
};

// One stationary trajectory of length t + 1 per replica (replica r on stream
// {seed, stream_id + r}); W_hat = fraction whose observations z_1..z_t all miss the ball.
GumbelReport gumbel_check(const ModelConfig& config, const StatsContext& ctx,
                          std::span<const double> tau_grid, std::size_t t, std::size_t replicas,
                          SeededStream stream, const EvtOptions& opt = {});

// ---------------------------------------------------------------------------
// Poisson visit counts
// ---------------------------------------------------------------------------

struct PoissonReport {
  double tau = 0.0;
  double center = 0.0;
  double radius = 0.0;
  double visit_probability = 0.0;  // stationary, from the grid
  std::size_t t_prime = 0;         // floor(tau / visit_probability)
  std::size_t replicas = 0;
  std::vector<std::size_t> counts;     // visits per replica
  std::vector<std::size_t> histogram;  // replicas with k visits, k = 0..max
  double mean = 0.0;
  double variance = 0.0;
  double empirical_step_probability = 0.0;  // visits / (replicas t')
  double chi2 = 0.0;
  std::size_t dof = 0;
  double p_value = 0.0;
  bool conjectural = false;
};

// The ball is sized so that its visit probability is 1 / t_scale, and the
// visits among z_1..z_{t'} are counted.
PoissonReport visit_count_check(const ModelConfig& config, const StatsContext& ctx, double tau,
                                std::size_t t_scale, std::size_t replicas, SeededStream stream,
                                const EvtOptions& opt = {});

// Chi-square goodness of fit of counts against Poisson(mean), pooling the
// tails until every expected bin count is at least 5.
struct ChiSquare {
  double statistic = 0.0;
  std::size_t dof = 0;
  double p_value = 0.0;
};
ChiSquare poisson_chi_square(std::span<const std::size_t> counts, double mean);

// ---------------------------------------------------------------------------
// Rare event point process
// ---------------------------------------------------------------------------

// Visits at times j with j / v_t in [lo, hi) are counted in that interval.
struct ReppSpec {
  std::vector<Interval> intervals;  // half-open, pairwise disjoint
  double tau = 1.0;
  std::size_t v_t = 0;  // floor(tau / visit_probability), filled by repp_laplace_check
};

struct ReppRow {
  std::vector<double> y;
  double empirical = 0.0;
  double closed_form = 0.0;
  double relative_error = 0.0;
};

struct ReppReport {
  ReppSpec spec;
  double center = 0.0;
  double radius = 0.0;
  double visit_probability = 0.0;
  std::size_t replicas = 0;
  std::vector<std::vector<std::size_t>> counts;  // [replica][interval]
  std::vector<ReppRow> rows;
  double count_correlation = 0.0;  // between the first two intervals, 0 if fewer
  bool conjectural = false;
};

// Empirical E exp(-sum y_l N(I_l)) against exp(-tau sum (1 - e^{-y_l}) Leb(I_l)).
ReppReport repp_laplace_check(const ModelConfig& config, const StatsContext& ctx, ReppSpec spec,
                              std::span<const std::vector<double>> y_values, std::size_t t_scale,
                              std::size_t replicas, SeededStream stream, const EvtOptions& opt = {});

double pearson_correlation(std::span<const double> x, std::span<const double> y);

// ---------------------------------------------------------------------------
// Block maxima and modulation detection
// ---------------------------------------------------------------------------

// m bins of floor(len / m) consecutive values; the remainder is dropped and
// its length written to *dropped. InputError for m = 0 or m > len.
std::vector<double> block_maxima(std::span<const double> series, std::size_t m,
                                 std::size_t* dropped = nullptr);

struct ModulationRow {
  std::size_t K = 0;
  std::size_t t = 0;
  std::size_t m = 0;
  GevFit fit;
  double log_t = 0.0;
  double estimate = 0.0;  // kappa_hat - log t
};

struct ModulationReport {
  double center = 0.0;
  // log of the integral of 1/s against mu.
  double target_integral = 0.0;
  // log of the exact local intensity: lim P(|Z - y| <= r) / r as r -> 0.
  double target_local = 0.0;
  std::vector<ModulationRow> rows;
};

// One stationary trajectory of length max(m_list) * t; for each m the first
// m * t values of Y_i = phi(Z_i) are cut into m blocks of t and fitted.
ModulationReport modulation_detect(const ModelConfig& config, const StatsContext& ctx, std::size_t t,
                                   std::span<const std::size_t> m_list, SeededStream stream,
                                   std::optional<double> center = std::nullopt);

}  // namespace heterodyn
