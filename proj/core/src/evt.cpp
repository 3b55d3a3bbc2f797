#include "heterodyn/evt.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <limits>
#include <numeric>

#include "heterodyn/error.hpp"
#include "heterodyn/filter.hpp"
#include "heterodyn/parallel.hpp"
#include "heterodyn/quadrature.hpp"

namespace heterodyn {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

SimulateOptions stationary_options(const StatsContext& ctx, bool check_bounds) {
  SimulateOptions opt;
  opt.stationary = &ctx.mu;
  opt.record_latent = false;
  opt.check_observation_bounds = check_bounds;
  return opt;
}

// Observations far outside the extended domain are legitimate for wide psi;
// the bound check is kept only where the configuration promises it.
bool observation_bound_holds(const ModelConfig& config) {
  const auto* c = validate_config(config).find("observation_noise_bound");
  return c != nullptr && c->passed;
}

}  // namespace

double observable_phi(double x, double center) {
  const double d = std::abs(x - center);
  return d == 0.0 ? kInf : -std::log(d);
}

BallTarget BallTarget::from_radius(double center, double radius) {
  if (!(radius > 0.0)) return {center, 0.0, kInf};
  return {center, radius, -std::log(radius)};
}

double ball_visit_probability(const GridDensity& stationary, const ObsNoise& obs, double center,
                              double radius) {
  const std::vector<double> pi = smeared_ball_probability(stationary.grid(), obs, center, radius);
  return smeared_ball_measure(pi, stationary);
}

BallTarget threshold_from_tau(double tau, std::size_t t, const GridDensity& stationary,
                              const ModelConfig& config, double center) {
  if (t < 1) throw InputError("threshold_from_tau needs t >= 1");
  if (!(tau >= 0.0)) throw InputError("tau must be nonnegative");
  if (!config.geometry().I_Gamma.contains(center))
    throw InputError("ball centre must lie in I_Gamma");
  if (!(stationary.weight(stationary.grid().cell_of(center)) > 0.0))
    throw AssumptionViolation("stationary density vanishes at the ball centre");
  if (tau == 0.0) return BallTarget::from_radius(center, 0.0);

  const double target = tau / static_cast<double>(t);
  const ObsNoise& obs = config.obs();
  auto mass = [&](double r) { return ball_visit_probability(stationary, obs, center, r); };
  double hi = config.geometry().extended_domain.length();
  if (mass(hi) < target)
    throw DomainError("threshold_from_tau: no radius reaches tau / t");
  double lo = 0.0;
  // Shrink the bracket geometrically first; the radii of interest are tiny.
  while (hi > 1e-300 && mass(0.5 * hi) >= target) hi *= 0.5;
  lo = 0.5 * hi;
  double r = hi;
  for (int it = 0; it < 200; ++it) {
    r = 0.5 * (lo + hi);
    const double m = mass(r);
    if (std::abs(m - target) <= 1e-9 * target) break;
    (m < target ? lo : hi) = r;
    if (hi - lo <= 1e-15 * hi) break;
  }
  return BallTarget::from_radius(center, r);
}

std::optional<std::size_t> hitting_time(std::span<const double> z, const BallTarget& ball) {
  for (std::size_t j = 1; j < z.size(); ++j)
    if (ball.contains(z[j])) return j;
  return std::nullopt;
}

double running_max(std::span<const double> z, double center, std::size_t t) {
  double m = -kInf;
  for (std::size_t j = 1; j <= t && j < z.size(); ++j) m = std::max(m, observable_phi(z[j], center));
  return m;
}

double stationary_mode(const GridDensity& stationary) {
  const auto& w = stationary.weights();
  const auto i = static_cast<std::size_t>(std::max_element(w.begin(), w.end()) - w.begin());
  return stationary.grid().center(i);
}

double support_midpoint(const GridDensity& stationary) {
  std::size_t first = stationary.size(), last = 0;
  for (std::size_t i = 0; i < stationary.size(); ++i)
    if (stationary.mass(i) > kSupportMass) {
      first = std::min(first, i);
      last = i;
    }
  if (first > last) throw DegenerateData("support_midpoint: empty support");
  return 0.5 * (stationary.grid().edge(first) + stationary.grid().edge(last + 1));
}

Interval wilson_interval(std::size_t k, std::size_t n, double z) {
  if (n == 0) throw InputError("wilson_interval needs n >= 1");
  const double nn = static_cast<double>(n), p = static_cast<double>(k) / nn, z2 = z * z;
  const double den = 1.0 + z2 / nn;
  const double mid = (p + z2 / (2.0 * nn)) / den;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / den;
  return {std::max(0.0, mid - half), std::min(1.0, mid + half)};
}

// ---------------------------------------------------------------------------
// Gumbel
// ---------------------------------------------------------------------------

GumbelReport gumbel_check(const ModelConfig& config, const StatsContext& ctx,
                          std::span<const double> tau_grid, std::size_t t, std::size_t replicas,
                          SeededStream stream, const EvtOptions& opt) {
  if (t < 1 || replicas < 1) throw InputError("gumbel_check needs t >= 1 and replicas >= 1");
  GumbelReport rep;
  rep.center = opt.center.value_or(stationary_mode(ctx.mu));
  rep.t = t;
  rep.replicas = replicas;
  rep.conjectural = !config.obs().s().is_constant();

  std::vector<BallTarget> balls;
  for (double tau : tau_grid) balls.push_back(threshold_from_tau(tau, t, ctx.mu, config, rep.center));

  // Per replica the running maximum decides every tau at once.
  std::vector<double> maxima(replicas);
  const SimulateOptions sopt = stationary_options(ctx, observation_bound_holds(config));
  parallel_for(replicas, [&](std::size_t r) {
    const Trajectory tr = simulate(config, t + 1, Start::stationary(), {stream.seed, stream.stream_id + r}, sopt);
    maxima[r] = running_max(tr.z, rep.center, t);
  });

  for (std::size_t k = 0; k < tau_grid.size(); ++k) {
    GumbelRow row;
    row.tau = tau_grid[k];
    row.u_t = balls[k].threshold;
    row.radius = balls[k].radius;
    // W_t = {M_t < u_t}: the complement of a hit, since the ball is {phi >= u_t}.
    row.survivors = static_cast<std::size_t>(
        std::count_if(maxima.begin(), maxima.end(), [&](double m) { return balls[k].empty() || m < row.u_t; }));
    row.W_hat = static_cast<double>(row.survivors) / static_cast<double>(replicas);
    row.ci = wilson_interval(row.survivors, replicas, 3.0);
    row.e_minus_tau = std::exp(-row.tau);
    if (!balls[k].empty()) {
      const KernelMatrix L_hat =
          ctx.L.with_hole(smeared_ball_probability(ctx.L.grid(), config.obs(), rep.center, row.radius));
      row.beta_spectral = extremal_index(ctx.L, L_hat, ctx.mu, opt.extremal_k_max).beta;
    }
    row.e_minus_beta_tau = std::exp(-row.beta_spectral * row.tau);
    rep.rows.push_back(row);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Poisson
// ---------------------------------------------------------------------------

ChiSquare poisson_chi_square(std::span<const std::size_t> counts, double mean) {
  if (counts.empty()) throw InputError("poisson_chi_square: no counts");
  if (!(mean > 0.0)) throw InputError("poisson_chi_square: mean must be positive");
  const double R = static_cast<double>(counts.size());
  const std::size_t kmax = *std::max_element(counts.begin(), counts.end());
  std::vector<double> observed(kmax + 1, 0.0);
  for (std::size_t c : counts) observed[c] += 1.0;

  // Bins [0, lo], lo+1 .. hi-1, [hi, inf): widen the tails until expected >= 5.
  auto pmf = [&](std::size_t k) {
    return std::exp(static_cast<double>(k) * std::log(mean) - mean - std::lgamma(static_cast<double>(k) + 1.0));
  };
  std::vector<double> exp_bins, obs_bins;
  double e_acc = 0.0, o_acc = 0.0;
  std::size_t k = 0;
  double cdf = 0.0;
  for (;; ++k) {
    const double p = pmf(k);
    cdf += p;
    e_acc += R * p;
    o_acc += k <= kmax ? observed[k] : 0.0;
    // The remaining tail must itself be able to form a valid bin.
    if (e_acc >= 5.0 && R * (1.0 - cdf) >= 5.0) {
      exp_bins.push_back(e_acc);
      obs_bins.push_back(o_acc);
      e_acc = o_acc = 0.0;
    } else if (R * (1.0 - cdf) < 5.0) {
      break;
    }
  }
  // Everything from the current k upward joins the last bin.
  double tail_obs = o_acc;
  for (std::size_t j = k + 1; j <= kmax; ++j) tail_obs += observed[j];
  const double tail_exp = e_acc + R * std::max(0.0, 1.0 - cdf);
  if (!exp_bins.empty() && tail_exp < 5.0) {
    exp_bins.back() += tail_exp;
    obs_bins.back() += tail_obs;
  } else {
    exp_bins.push_back(tail_exp);
    obs_bins.push_back(tail_obs);
  }

  ChiSquare out;
  for (std::size_t b = 0; b < exp_bins.size(); ++b) {
    const double d = obs_bins[b] - exp_bins[b];
    out.statistic += d * d / exp_bins[b];
  }
  if (exp_bins.size() < 2) throw DegenerateData("poisson_chi_square: fewer than two bins");
  out.dof = exp_bins.size() - 1;
  boost::math::chi_squared dist(static_cast<double>(out.dof));
  out.p_value = boost::math::cdf(boost::math::complement(dist, out.statistic));
  return out;
}

PoissonReport visit_count_check(const ModelConfig& config, const StatsContext& ctx, double tau,
                                std::size_t t_scale, std::size_t replicas, SeededStream stream,
                                const EvtOptions& opt) {
  if (!(tau > 0.0)) throw InputError("visit_count_check needs tau > 0");
  if (replicas < 2) throw InputError("visit_count_check needs at least two replicas");
  PoissonReport rep;
  rep.tau = tau;
  rep.center = opt.center.value_or(stationary_mode(ctx.mu));
  rep.replicas = replicas;
  rep.conjectural = !config.obs().s().is_constant();
  const BallTarget ball = threshold_from_tau(1.0, t_scale, ctx.mu, config, rep.center);
  rep.radius = ball.radius;
  rep.visit_probability = ball_visit_probability(ctx.mu, config.obs(), rep.center, ball.radius);
  rep.t_prime = static_cast<std::size_t>(std::floor(tau / rep.visit_probability));
  if (rep.t_prime < 1) throw DegenerateData("visit_count_check: t' is zero");

  rep.counts.resize(replicas);
  const SimulateOptions sopt = stationary_options(ctx, observation_bound_holds(config));
  parallel_for(replicas, [&](std::size_t r) {
    const Trajectory tr =
        simulate(config, rep.t_prime + 1, Start::stationary(), {stream.seed, stream.stream_id + r}, sopt);
    std::size_t c = 0;
    for (std::size_t j = 1; j < tr.z.size(); ++j) c += ball.contains(tr.z[j]) ? 1 : 0;
    rep.counts[r] = c;
  });

  const double R = static_cast<double>(replicas);
  double s = 0.0, s2 = 0.0;
  std::size_t kmax = 0;
  for (std::size_t c : rep.counts) {
    s += static_cast<double>(c);
    kmax = std::max(kmax, c);
  }
  rep.mean = s / R;
  for (std::size_t c : rep.counts) s2 += (static_cast<double>(c) - rep.mean) * (static_cast<double>(c) - rep.mean);
  rep.variance = s2 / (R - 1.0);
  rep.histogram.assign(kmax + 1, 0);
  for (std::size_t c : rep.counts) ++rep.histogram[c];
  rep.empirical_step_probability = s / (R * static_cast<double>(rep.t_prime));
  const ChiSquare chi = poisson_chi_square(rep.counts, tau);
  rep.chi2 = chi.statistic;
  rep.dof = chi.dof;
  rep.p_value = chi.p_value;
  return rep;
}

// ---------------------------------------------------------------------------
// REPP
// ---------------------------------------------------------------------------

double pearson_correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw InputError("pearson_correlation: need two equal-length samples");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0 && syy > 0.0)) throw DegenerateData("pearson_correlation: constant sample");
  return sxy / std::sqrt(sxx * syy);
}

ReppReport repp_laplace_check(const ModelConfig& config, const StatsContext& ctx, ReppSpec spec,
                              std::span<const std::vector<double>> y_values, std::size_t t_scale,
                              std::size_t replicas, SeededStream stream, const EvtOptions& opt) {
  if (spec.intervals.empty()) throw InputError("repp_laplace_check needs at least one interval");
  if (!(spec.tau > 0.0)) throw InputError("repp_laplace_check needs tau > 0");
  if (replicas < 2) throw InputError("repp_laplace_check needs at least two replicas");
  std::vector<Interval> sorted = spec.intervals;
  std::sort(sorted.begin(), sorted.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  for (std::size_t l = 0; l < sorted.size(); ++l) {
    if (!(sorted[l].lo >= 0.0 && sorted[l].hi > sorted[l].lo)) throw InputError("REPP intervals must be nonempty and in [0, inf)");
    if (l > 0 && sorted[l].lo < sorted[l - 1].hi) throw InputError("REPP intervals must be disjoint");
  }
  for (const auto& y : y_values)
    if (y.size() != spec.intervals.size()) throw InputError("REPP: one y value per interval is required");

  ReppReport rep;
  rep.center = opt.center.value_or(stationary_mode(ctx.mu));
  rep.replicas = replicas;
  rep.conjectural = !config.obs().s().is_constant();
  const BallTarget ball = threshold_from_tau(1.0, t_scale, ctx.mu, config, rep.center);
  rep.radius = ball.radius;
  rep.visit_probability = ball_visit_probability(ctx.mu, config.obs(), rep.center, ball.radius);
  spec.v_t = static_cast<std::size_t>(std::floor(spec.tau / rep.visit_probability));
  if (spec.v_t < 1) throw DegenerateData("repp_laplace_check: v_t is zero");
  rep.spec = spec;

  const std::size_t L = spec.intervals.size();
  const double vt = static_cast<double>(spec.v_t);
  double horizon = 0.0;
  for (const auto& iv : spec.intervals) horizon = std::max(horizon, iv.hi);
  const auto n = static_cast<std::size_t>(std::ceil(horizon * vt)) + 1;

  rep.counts.assign(replicas, std::vector<std::size_t>(L, 0));
  const SimulateOptions sopt = stationary_options(ctx, observation_bound_holds(config));
  parallel_for(replicas, [&](std::size_t r) {
    const Trajectory tr = simulate(config, n, Start::stationary(), {stream.seed, stream.stream_id + r}, sopt);
    for (std::size_t j = 1; j < tr.z.size(); ++j) {
      if (!ball.contains(tr.z[j])) continue;
      const double s = static_cast<double>(j) / vt;
      for (std::size_t l = 0; l < L; ++l)
        if (s >= spec.intervals[l].lo && s < spec.intervals[l].hi) ++rep.counts[r][l];
    }
  });

  for (const auto& y : y_values) {
    ReppRow row;
    row.y = y;
    double acc = 0.0;
    for (const auto& c : rep.counts) {
      double e = 0.0;
      for (std::size_t l = 0; l < L; ++l) e += y[l] * static_cast<double>(c[l]);
      acc += std::exp(-e);
    }
    row.empirical = acc / static_cast<double>(replicas);
    double expo = 0.0;
    for (std::size_t l = 0; l < L; ++l) expo += (1.0 - std::exp(-y[l])) * spec.intervals[l].length();
    row.closed_form = std::exp(-spec.tau * expo);
    row.relative_error = std::abs(row.empirical - row.closed_form) / row.closed_form;
    rep.rows.push_back(row);
  }
  if (L >= 2) {
    std::vector<double> a(replicas), b(replicas);
    for (std::size_t r = 0; r < replicas; ++r) {
      a[r] = static_cast<double>(rep.counts[r][0]);
      b[r] = static_cast<double>(rep.counts[r][1]);
    }
    rep.count_correlation = pearson_correlation(a, b);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Block maxima and modulation detection
// ---------------------------------------------------------------------------

std::vector<double> block_maxima(std::span<const double> series, std::size_t m, std::size_t* dropped) {
  if (m == 0) throw InputError("block_maxima needs m >= 1");
  if (m > series.size()) throw InputError("block_maxima: more bins than values");
  const std::size_t b = series.size() / m;
  if (dropped != nullptr) *dropped = series.size() - b * m;
  std::vector<double> out(m);
  for (std::size_t j = 0; j < m; ++j)
    out[j] = *std::max_element(series.begin() + static_cast<std::ptrdiff_t>(j * b),
                               series.begin() + static_cast<std::ptrdiff_t>((j + 1) * b));
  return out;
}

ModulationReport modulation_detect(const ModelConfig& config, const StatsContext& ctx, std::size_t t,
                                   std::span<const std::size_t> m_list, SeededStream stream,
                                   std::optional<double> center) {
  if (t < 1 || m_list.empty()) throw InputError("modulation_detect needs t >= 1 and at least one m");
  ModulationReport rep;
  // The midpoint of the support keeps every latent state within reach of the
  // centre for the widest observation noise.
  rep.center = center.value_or(support_midpoint(ctx.mu));

  const Profile& s = config.obs().s();
  const Grid& g = ctx.mu.grid();
  std::vector<double> inv_s(g.n, 0.0);
  for (std::size_t i = 0; i < g.n; ++i) {
    if (!(ctx.mu.mass(i) > 0.0)) continue;
    const double smin = std::min(s(g.edge(i)), s(g.edge(i + 1)));
    if (!(smin > 0.0)) throw AssumptionViolation("modulation_detect: s vanishes on the stationary support");
    inv_s[i] = quad::gl8([&](double x) { return 1.0 / s(x); }, g.edge(i), g.edge(i + 1)) / g.width();
  }
  rep.target_integral = std::log(ctx.mu.expect(inv_s));
  const double r0 = 1e-7;
  rep.target_local = std::log(ball_visit_probability(ctx.mu, config.obs(), rep.center, r0) / r0);

  const std::size_t m_max = *std::max_element(m_list.begin(), m_list.end());
  SimulateOptions sopt = stationary_options(ctx, false);
  const Trajectory tr = simulate(config, m_max * t, Start::stationary(), stream, sopt);
  std::vector<double> Y(tr.z.size());
  for (std::size_t i = 0; i < Y.size(); ++i) Y[i] = observable_phi(tr.z[i], rep.center);

  rep.rows.resize(m_list.size());
  parallel_for(m_list.size(), [&](std::size_t k) {
    ModulationRow row;
    row.m = m_list[k];
    row.t = t;
    row.K = row.m * t;
    const std::vector<double> maxima = block_maxima(std::span<const double>(Y).first(row.K), row.m);
    row.fit = gev_fit(maxima);
    row.log_t = std::log(static_cast<double>(t));
    row.estimate = row.fit.kappa - row.log_t;
    rep.rows[k] = row;
  });
  return rep;
}

}  // namespace heterodyn
