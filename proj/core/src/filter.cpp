#include "heterodyn/filter.hpp"

#include <algorithm>
#include <cmath>

#include "heterodyn/error.hpp"
#include "heterodyn/quadrature.hpp"
#include "heterodyn/simulate.hpp"

namespace heterodyn {

GridDensity predict(const GridDensity& density, const KernelMatrix& L) {
  if (L.kind() != KernelKind::plain) throw InputError("predict needs a plain kernel");
  require_same_grid(density.grid(), L.grid(), "predict");
  const std::vector<double> m = density.masses();
  std::vector<double> out(m.size());
  L.push(m, out);
  return GridDensity::from_masses(density.grid(), out);
}

GridDensity predict(const FilterState& state, const KernelMatrix& L) {
  return predict(state.density, L);
}

Interval observation_preimage(double z, const ModelConfig& config) {
  const Profile& s = config.obs().s();
  const double hw = config.obs().half_width();
  const double up = 1.0 + s.slope * hw, dn = 1.0 - s.slope * hw;
  if (!(up > 0.0 && dn > 0.0))
    throw DomainError("observation preimage needs |s'| epsilon / 2 < 1");
  const Interval& I = config.geometry().extended_domain;
  return {std::max(I.lo, (z - s.intercept * hw) / up), std::min(I.hi, (z + s.intercept * hw) / dn)};
}

std::vector<double> cell_likelihood(const Grid& grid, double z, const ModelConfig& config) {
  std::vector<double> lik(grid.n, 0.0);
  const Interval J = observation_preimage(z, config);
  if (J.lo > J.hi) return lik;
  // Kinks of x -> psi'((z - x)/s(x)): band ends and (for the triangle) x = z.
  std::vector<double> breaks = {J.lo, J.hi, z};
  std::sort(breaks.begin(), breaks.end());
  auto f = [&](double x) {
    if (x < J.lo || x > J.hi) return 0.0;
    return eval_likelihood(z, x, config);
  };
  const double h = grid.width();
  const std::size_t i0 = grid.cell_of(J.lo), i1 = grid.cell_of(J.hi);
  for (std::size_t i = i0; i <= i1; ++i) {
    const double a = std::max(grid.edge(i), J.lo), b = std::min(grid.edge(i + 1), J.hi);
    if (!(b > a)) {
      // Degenerate band (s = 0 somewhere): put the point mass of the band in its cell.
      if (J.lo == J.hi && i == i0) lik[i] = 1.0 / h;
      continue;
    }
    double acc = 0.0, from = a;
    for (double c : breaks) {
      if (c <= from) continue;
      if (c >= b) break;
      acc += quad::gl8(f, from, c);
      from = c;
    }
    acc += quad::gl8(f, from, b);
    lik[i] = acc / h;
  }
  return lik;
}

GridDensity correct_weights(const GridDensity& pi_plus, std::span<const double> likelihood,
                            double* log_norm) {
  if (likelihood.size() != pi_plus.size()) throw GridMismatch("correct: likelihood size mismatch");
  std::vector<double> post(pi_plus.size());
  double norm = 0.0;
  for (std::size_t i = 0; i < post.size(); ++i) {
    post[i] = pi_plus.weight(i) * likelihood[i];
    norm += post[i];
  }
  norm *= pi_plus.grid().width();
  if (!(norm > 0.0))
    throw ZeroNormalizer("observation has zero likelihood on the predicted support");
  if (log_norm != nullptr) *log_norm = std::log(norm);
  for (double& v : post) v /= norm;
  return GridDensity(pi_plus.grid(), std::move(post));
}

GridDensity correct(const GridDensity& pi_plus, double z, const ModelConfig& config,
                    double* log_norm) {
  return correct_weights(pi_plus, cell_likelihood(pi_plus.grid(), z, config), log_norm);
}

FilterState start_filter(const GridDensity& prior, double z0, const ModelConfig& config) {
  FilterState s;
  double ln = 0.0;
  s.density = correct(prior, z0, config, &ln);
  s.step = 1;
  s.last_observation = z0;
  s.log_normalizer_sum = ln;
  return s;
}

FilterState update(const FilterState& state, double z, const KernelMatrix& L,
                   const ModelConfig& config) {
  FilterState next;
  double ln = 0.0;
  next.density = correct(predict(state.density, L), z, config, &ln);
  next.step = state.step + 1;
  next.last_observation = z;
  next.log_normalizer_sum = state.log_normalizer_sum + ln;
  return next;
}

// ---------------------------------------------------------------------------
// Hilbert metric
// ---------------------------------------------------------------------------

double hilbert_distance(std::span<const double> f, std::span<const double> g, double floor) {
  if (f.size() != g.size()) throw GridMismatch("hilbert_distance: size mismatch");
  double up = 0.0, down = 0.0;  // sup g/f, sup f/g
  bool any = false;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const bool pf = f[i] > floor, pg = g[i] > floor;
    if (!pf && !pg) continue;
    if (pf != pg) return std::numeric_limits<double>::infinity();
    any = true;
    up = std::max(up, g[i] / f[i]);
    down = std::max(down, f[i] / g[i]);
  }
  if (!any) return 0.0;
  return std::max(0.0, std::log(up) + std::log(down));
}

double hilbert_distance(const GridDensity& f, const GridDensity& g) {
  require_same_grid(f.grid(), g.grid(), "hilbert_distance");
  return hilbert_distance(f.masses(), g.masses(), kSupportMass);
}

double cone_parameter(const GridDensity& f) {
  const std::size_t n = f.size();
  std::size_t first = n, last = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (f.mass(i) > kSupportMass) {
      first = std::min(first, i);
      last = i;
    }
  if (first == n) return 0.0;
  double lo = f.weight(first), hi = lo;
  for (std::size_t i = first; i <= last; ++i) {
    lo = std::min(lo, f.weight(i));
    hi = std::max(hi, f.weight(i));
  }
  return lo / hi;
}

bool cone_membership(const GridDensity& f, double c) { return cone_parameter(f) > c; }

double cone_parameter_on(const GridDensity& f, const Interval& J) {
  const Grid& g = f.grid();
  const double h = g.width();
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (std::size_t i = 0; i < g.n; ++i) {
    const double cover = (std::min(g.edge(i + 1), J.hi) - std::max(g.edge(i), J.lo)) / h;
    if (!(cover > 1e-9)) continue;
    // Average of the density over the covered part of the cell.
    const double v = f.weight(i) / std::min(cover, 1.0);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return hi > 0.0 ? lo / hi : 0.0;
}

// ---------------------------------------------------------------------------
// Main assumption
// ---------------------------------------------------------------------------

double global_noise_epsilon_limit(double interval_length, double sigma_min, double delta,
                                  double s_max) {
  const double room = std::min(interval_length / 10.0, sigma_min * delta / 10.0);
  if (!(s_max > 0.0)) return std::numeric_limits<double>::infinity();
  return room / s_max;
}

namespace {

Interval image_hull(const ModelConfig& config, const Interval& J) {
  constexpr int kN = 2001;
  const double hi_ok = std::nextafter(1.0, 0.0);
  Interval out{config.map()(J.lo), config.map()(std::min(J.lo, hi_ok))};
  for (int k = 0; k < kN; ++k) {
    const double x = std::min(J.lo + J.length() * k / (kN - 1), hi_ok);
    const double y = config.map()(x);
    out.lo = std::min(out.lo, y);
    out.hi = std::max(out.hi, y);
  }
  return out;
}

bool inside_open(const Interval& inner, const Interval& outer) {
  return inner.lo > outer.lo && inner.hi < outer.hi;
}

}  // namespace

AssumptionReport check_main_assumption(const ModelConfig& config, double z0) {
  AssumptionReport r;
  r.z0 = z0;
  const DynNoise& dyn = config.dyn();
  const Geometry& geo = config.geometry();
  r.delta = 2.0 * dyn.a();
  r.J = observation_preimage(z0, config);
  const bool J_ok = r.J.lo <= r.J.hi && r.J.hi < 1.0;
  if (!J_ok) return r;
  r.TJ = image_hull(config, r.J);

  // A) |T(J)| < sigma(x) delta / 2 for every x in J.
  const double sig_min_J = dyn.sigma().min_on(r.J);
  r.condition_a_margin = dyn.a() * sig_min_J - r.TJ.length();
  r.condition_a = r.condition_a_margin > 0.0;

  // B) an interval F' around T(z0) with J_{z'} inside Op(T(J)).
  if (z0 >= -geo.Gamma && z0 < 1.0) {
    const double tz = config.map()(z0);
    auto fits = [&](double z) {
      const Interval Jz = observation_preimage(z, config);
      return Jz.lo <= Jz.hi && inside_open(Jz, r.TJ);
    };
    if (fits(tz)) {
      r.condition_b = true;
      // Grow the interval to each side by bisection on the containment predicate.
      auto reach = [&](double dir) {
        double good = 0.0, bad = r.TJ.length() + 1.0;
        for (int k = 0; k < 60; ++k) {
          const double mid = 0.5 * (good + bad);
          (fits(tz + dir * mid) ? good : bad) = mid;
        }
        return good;
      };
      r.F_prime = {tz - reach(-1.0), tz + reach(1.0)};
    }
  }

  // Global sufficient condition on the observation noise.
  const double sig_min_I = dyn.sigma().min_on(geo.extended_domain);
  r.epsilon_limit = global_noise_epsilon_limit(geo.extended_domain.length(), sig_min_I, r.delta,
                                               config.obs().s_max());
  r.global_condition = config.obs().epsilon() <= r.epsilon_limit;

  if (!(r.condition_a && r.condition_b) || !(sig_min_I > 0.0)) return r;

  // Kernel bounds: min over J x T(J), max is c_a / min sigma.
  constexpr int kK = 201;
  double kmin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < kK; ++i) {
    const double x = std::min(r.J.lo + r.J.length() * i / (kK - 1), std::nextafter(1.0, 0.0));
    for (int j = 0; j < kK; ++j) {
      const double y = r.TJ.lo + r.TJ.length() * j / (kK - 1);
      kmin = std::min(kmin, eval_kernel_p(x, y, config));
    }
  }
  r.kernel_min = kmin;
  r.kernel_max = dyn.c_a() / sig_min_I;

  // Likelihood spread on J_{z'} for z' across F'. The cone argument is
  // projective, so only the ratio min/max matters.
  double lmin = std::numeric_limits<double>::infinity(), lmax = 0.0;
  constexpr int kZ = 21, kY = 201;
  for (int a = 0; a < kZ; ++a) {
    const double z = r.F_prime.lo + r.F_prime.length() * a / (kZ - 1);
    const Interval Jz = observation_preimage(z, config);
    for (int b = 0; b < kY; ++b) {
      // Interior points only: the band ends are a null set.
      const double y = Jz.lo + Jz.length() * (b + 0.5) / kY;
      const double v = eval_likelihood(z, y, config);
      lmin = std::min(lmin, v);
      lmax = std::max(lmax, v);
    }
  }
  r.likelihood_ratio = lmax > 0.0 ? lmin / lmax : 0.0;

  const double c = std::min(std::sqrt(r.kernel_min / r.kernel_max), std::sqrt(r.likelihood_ratio));
  r.certificate.c = std::clamp(c, 0.0, 1.0);
  if (r.certificate.c > 0.0) {
    r.certificate.diam_bound = -8.0 * std::log(r.certificate.c);
    r.certificate.lambda = 1.0 - std::pow(r.certificate.c, 8);
  }
  return r;
}

AssumptionReport best_assumption_point(const ModelConfig& config, const GridDensity& weight,
                                       std::size_t stride) {
  AssumptionReport best;
  bool have = false, best_pass = false;
  for (std::size_t i = 0; i < weight.size(); i += std::max<std::size_t>(stride, 1)) {
    if (!(weight.mass(i) > 1e-8)) continue;
    AssumptionReport r = check_main_assumption(config, weight.grid().center(i));
    const bool pass = r.passed();
    if (!have || (pass && (!best_pass || r.certificate.c > best.certificate.c))) {
      best = r;
      best_pass = pass;
      have = true;
    }
  }
  if (!have) throw DegenerateData("no cell with positive weight to test the assumption");
  return best;
}

// ---------------------------------------------------------------------------
// Stability experiment
// ---------------------------------------------------------------------------

StabilityReport stability_experiment(const ModelConfig& config, const KernelMatrix& L,
                                     const GridDensity& prior_1, const GridDensity& prior_2,
                                     std::size_t n, SeededStream stream,
                                     const AssumptionReport& assumption) {
  if (n < 1) throw InputError("n must be >= 1");
  require_same_grid(prior_1.grid(), L.grid(), "stability_experiment");
  require_same_grid(prior_2.grid(), L.grid(), "stability_experiment");

  StabilityReport rep;
  rep.assumption = assumption;
  rep.certificate = assumption.certificate;
  const double c4 = std::pow(rep.certificate.c, 4);

  const GridDensity w = stationary_density(L).leading_density;
  SimulateOptions opt;
  opt.stationary = &w;
  const Trajectory tr = simulate(config, n, Start::stationary(), stream, opt);
  rep.observations = tr.z;
  rep.latent = tr.x;

  rep.theta0_initial = hilbert_distance(prior_1, prior_2);
  rep.steps.push_back({0, rep.theta0_initial, tv_distance(prior_1, prior_2), false,
                       rep.theta0_initial, cone_parameter(prior_1), cone_parameter(prior_2)});

  FilterState s1 = start_filter(prior_1, tr.z[0], config);
  FilterState s2 = start_filter(prior_2, tr.z[0], config);
  // Priors with different supports sit at infinite distance; the contraction
  // bound then starts from the first step with a finite distance.
  double anchor = rep.theta0_initial;
  std::size_t events = 0, since_anchor = 0;
  for (std::size_t k = 1; k <= n; ++k) {
    if (k > 1) {
      s1 = update(s1, tr.z[k - 1], L, config);
      s2 = update(s2, tr.z[k - 1], L, config);
    }
    StabilityStep st;
    st.step = k;
    st.theta0 = hilbert_distance(s1.density, s2.density);
    st.tv = tv_distance(s1.density, s2.density);
    const Interval J = observation_preimage(tr.z[k - 1], config);
    st.cone_param_1 = cone_parameter_on(s1.density, J);
    st.cone_param_2 = cone_parameter_on(s2.density, J);
    st.event = rep.certificate.c > 0.0 && st.cone_param_1 > c4 && st.cone_param_2 > c4;
    if (st.event) ++events;
    if (!std::isfinite(anchor) && std::isfinite(st.theta0)) {
      anchor = st.theta0;
    } else if (st.event) {
      ++since_anchor;
    }
    st.bound = std::pow(rep.certificate.lambda, static_cast<double>(since_anchor)) * anchor;
    rep.steps.push_back(st);
  }
  rep.certificate.event_count = events;
  return rep;
}

}  // namespace heterodyn
