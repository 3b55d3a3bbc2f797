#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "heterodyn/grid.hpp"
#include "heterodyn/model.hpp"
#include "heterodyn/rng.hpp"

namespace heterodyn {

struct Trajectory {
  std::vector<double> x;  // latent X_0 .. X_{n-1}
  std::vector<double> z;  // observed Z_0 .. Z_{n-1}
  SeededStream seed;
  std::uint64_t config_hash = 0;

  std::size_t size() const { return x.size(); }
};

// Draw from g by rejection: uniform proposal on [-a, a] accepted with
// probability chi(eta) exp(-eta^2/2) when a <= 1, otherwise a standard normal
// proposal accepted with probability chi(eta).
double sample_eta(const DynNoise& dyn, Rng& rng);

// T(x) + sigma(x) eta. InvariantViolation if the result leaves the confinement interval.
double step(double x, const ModelConfig& config, Rng& rng);

// x + s(x) eps with eps ~ psi.
double observe(double x, const ModelConfig& config, Rng& rng);

// Cell by inverse CDF, then uniform inside the cell.
double sample_density(const GridDensity& w, Rng& rng);

// Where the chain starts: a fixed point of the confinement interval or a
// stationary draw (from a precomputed density, else critical point plus burn-in).
struct Start {
  std::optional<double> x0;

  static Start at(double x) { return {x}; }
  static Start stationary() { return {}; }
};

struct SimulateOptions {
  const GridDensity* stationary = nullptr;
  std::size_t burn_in = 1000;
  // Off only for experiments that deliberately use observation noise wider
  // than the extended domain allows.
  bool check_observation_bounds = true;
  bool record_latent = true;
};

Trajectory simulate(const ModelConfig& config, std::size_t n, Start start, SeededStream stream,
                    const SimulateOptions& opt = {});

}  // namespace heterodyn
