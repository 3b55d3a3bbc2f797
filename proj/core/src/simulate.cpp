#include "heterodyn/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "heterodyn/config_io.hpp"
#include "heterodyn/error.hpp"

namespace heterodyn {

double sample_eta(const DynNoise& dyn, Rng& rng) {
  const double a = dyn.a();
  if (a <= 1.0) {
    for (;;) {
      const double eta = a * (2.0 * rng.uniform() - 1.0);
      if (rng.uniform() < dyn.chi(eta) * std::exp(-0.5 * eta * eta)) return eta;
    }
  }
  for (;;) {
    const double eta = rng.normal();
    if (std::abs(eta) >= a) continue;
    if (rng.uniform() < dyn.chi(eta)) return eta;
  }
}

double step(double x, const ModelConfig& config, Rng& rng) {
  const double eta = sample_eta(config.dyn(), rng);
  const double y = config.map()(x) + config.dyn().sigma()(x) * eta;
  const Interval& C = config.geometry().confinement;
  if (!(y >= C.lo && y <= C.hi))
    throw InvariantViolation("step left the confinement interval: " + std::to_string(y));
  return y;
}

double observe(double x, const ModelConfig& config, Rng& rng) {
  const ObsNoise& obs = config.obs();
  const double u1 = rng.uniform();
  const double u2 = obs.psi_kind() == PsiKind::uniform ? 0.0 : rng.uniform();
  return x + obs.s()(x) * obs.psi_quantile_pair(u1, u2);
}

double sample_density(const GridDensity& w, Rng& rng) {
  const double u = rng.uniform();
  const double h = w.grid().width();
  double acc = 0.0;
  std::size_t i = 0;
  for (; i + 1 < w.size(); ++i) {
    acc += w.weight(i) * h;
    if (u < acc) break;
  }
  return w.grid().edge(i) + h * rng.uniform();
}

Trajectory simulate(const ModelConfig& config, std::size_t n, Start start, SeededStream stream,
                    const SimulateOptions& opt) {
  if (n < 1) throw InputError("n must be >= 1");
  Rng rng(stream);
  const Geometry& g = config.geometry();
  double x;
  if (start.x0) {
    x = *start.x0;
    if (!g.confinement.contains(x))
      throw InputError("x0 must lie in the confinement interval");
  } else if (opt.stationary != nullptr) {
    x = std::clamp(sample_density(*opt.stationary, rng), g.confinement.lo, g.confinement.hi);
  } else {
    x = g.critical_point;
    for (std::size_t k = 0; k < opt.burn_in; ++k) x = step(x, config, rng);
  }

  Trajectory tr;
  tr.seed = stream;
  tr.config_hash = config_hash(config.spec());
  if (opt.record_latent) tr.x.reserve(n);
  tr.z.reserve(n);
  const Interval& E = g.extended_domain;
  for (std::size_t t = 0; t < n; ++t) {
    if (t > 0) x = step(x, config, rng);
    const double z = observe(x, config, rng);
    if (opt.check_observation_bounds && !(z >= E.lo && z <= E.hi))
      throw InvariantViolation("observation left the extended domain: " + std::to_string(z));
    if (opt.record_latent) tr.x.push_back(x);
    tr.z.push_back(z);
  }
  return tr;
}

}  // namespace heterodyn
