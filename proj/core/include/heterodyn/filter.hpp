#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "heterodyn/grid.hpp"
#include "heterodyn/model.hpp"
#include "heterodyn/rng.hpp"
#include "heterodyn/transfer.hpp"

namespace heterodyn {

struct FilterState {
  GridDensity density;
  std::size_t step = 0;
  double last_observation = std::numeric_limits<double>::quiet_NaN();
  double log_normalizer_sum = 0.0;
};

// Prior pushed through the kernel, renormalised.
GridDensity predict(const GridDensity& density, const KernelMatrix& L);
GridDensity predict(const FilterState& state, const KernelMatrix& L);

// Cell averages of x -> g(z, x) on the grid.
std::vector<double> cell_likelihood(const Grid& grid, double z, const ModelConfig& config);

// Bayes correction with explicit per-cell likelihood weights. ZeroNormalizer
// when the weights vanish on the support of pi_plus. The log of the
// normaliser (sum of likelihood times mass) goes to *log_norm when given.
GridDensity correct_weights(const GridDensity& pi_plus, std::span<const double> likelihood,
                            double* log_norm = nullptr);
GridDensity correct(const GridDensity& pi_plus, double z, const ModelConfig& config,
                    double* log_norm = nullptr);

// The first observation corrects the prior directly (no prediction step).
FilterState start_filter(const GridDensity& prior, double z0, const ModelConfig& config);
FilterState update(const FilterState& state, double z, const KernelMatrix& L,
                   const ModelConfig& config);

// ---------------------------------------------------------------------------
// Cones and the Hilbert metric
// ---------------------------------------------------------------------------

// Cells with mass above this count as support.
inline constexpr double kSupportMass = 1e-12;

// log[sup(g/f) sup(f/g)] over the union of supports; +inf when supports differ.
double hilbert_distance(const GridDensity& f, const GridDensity& g);
// Same on raw nonnegative vectors; `floor` plays the role of kSupportMass.
double hilbert_distance(std::span<const double> f, std::span<const double> g, double floor = 0.0);

// min/max over the cells between the first and last supported cell (0 if
// a zero sits inside that hull).
double cone_parameter(const GridDensity& f);
bool cone_membership(const GridDensity& f, double c);
// Same, restricted to J: each cell meeting J contributes the average of f over
// its part inside J, so partly covered edge cells are not penalised.
double cone_parameter_on(const GridDensity& f, const Interval& J);

// ---------------------------------------------------------------------------
// Main assumption
// ---------------------------------------------------------------------------

// J_z = {x in I : |z - x| <= s(x) epsilon / 2} with I the extended domain.
// Empty (lo > hi) when no such x exists.
Interval observation_preimage(double z, const ModelConfig& config);

// Largest epsilon with epsilon * s_max <= min(|I|/10, sigma_min * delta / 10).
double global_noise_epsilon_limit(double interval_length, double sigma_min, double delta,
                                  double s_max);

struct ConeCertificate {
  double c = 0.0;
  double diam_bound = std::numeric_limits<double>::infinity();  // -8 log c
  double lambda = 1.0;                                           // 1 - c^8
  std::size_t event_count = 0;
};

struct AssumptionReport {
  double z0 = 0.0;
  Interval J;         // J_{z0}
  Interval TJ;        // hull of T(J_{z0})
  double delta = 0.0; // 2a
  bool condition_a = false;
  double condition_a_margin = 0.0;  // a * min_J sigma - |T(J)|
  bool condition_b = false;
  Interval F_prime;   // interval around T(z0) whose preimages fit inside Op(T(J))
  bool global_condition = false;
  double epsilon_limit = 0.0;
  double kernel_min = 0.0;       // over J x T(J)
  double kernel_max = 0.0;       // c_a / min sigma
  double likelihood_ratio = 0.0; // min/max of g(z', .) on J_{z'}, z' in F'
  ConeCertificate certificate;

  bool passed() const { return condition_a && condition_b && certificate.c > 0.0; }
};

AssumptionReport check_main_assumption(const ModelConfig& config, double z0);

// Scans z0 over the cell centres of `grid` where `weight` is positive and
// returns the report with the largest certificate c among passing points
// (the first report if none passes).
AssumptionReport best_assumption_point(const ModelConfig& config, const GridDensity& weight,
                                       std::size_t stride = 1);

// ---------------------------------------------------------------------------
// Stability experiment
// ---------------------------------------------------------------------------

struct StabilityStep {
  std::size_t step = 0;
  double theta0 = 0.0;
  double tv = 0.0;
  bool event = false;
  double bound = 0.0;
  double cone_param_1 = 0.0;
  double cone_param_2 = 0.0;
};

struct StabilityReport {
  AssumptionReport assumption;
  ConeCertificate certificate;
  double theta0_initial = 0.0;
  std::vector<StabilityStep> steps;  // step 0 = priors, step k after k observations
  std::vector<double> observations;
  std::vector<double> latent;
};

// Runs two filters from different priors on one simulated observation
// sequence of length n. `assumption` supplies the certificate c.
StabilityReport stability_experiment(const ModelConfig& config, const KernelMatrix& L,
                                     const GridDensity& prior_1, const GridDensity& prior_2,
                                     std::size_t n, SeededStream stream,
                                     const AssumptionReport& assumption);

}  // namespace heterodyn
