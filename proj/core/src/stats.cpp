#include "heterodyn/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "heterodyn/error.hpp"
#include "heterodyn/parallel.hpp"
#include "heterodyn/quadrature.hpp"

namespace heterodyn {

// ---------------------------------------------------------------------------
// mu' and Kantorovich
// ---------------------------------------------------------------------------

GridDensity embed(const GridDensity& source, const Grid& target) {
  const Grid& g = source.grid();
  const double h = g.width();
  const double offset = (g.interval.lo - target.interval.lo) / h;
  const auto k = static_cast<std::ptrdiff_t>(std::llround(offset));
  if (std::abs(target.width() - h) > 1e-12 * h || std::abs(offset - static_cast<double>(k)) > 1e-6 ||
      k < 0 || static_cast<std::size_t>(k) + g.n > target.n)
    throw GridMismatch("embed: target grid does not extend the source by whole cells");
  std::vector<double> w(target.n, 0.0);
  for (std::size_t i = 0; i < g.n; ++i) w[i + static_cast<std::size_t>(k)] = source.weight(i);
  // Copy verbatim: the widths agree, so the mass is already 1.
  return GridDensity(target, std::move(w));
}

MuPrime mu_prime(const GridDensity& stationary, const ModelConfig& config) {
  const Grid& g = stationary.grid();
  const ObsNoise& obs = config.obs();
  const double h = g.width();
  const double spread = obs.s_max() * obs.half_width();
  const auto k = static_cast<std::size_t>(std::ceil(spread / h - 1e-9));
  const Grid out({g.interval.lo - static_cast<double>(k) * h, g.interval.hi + static_cast<double>(k) * h},
                 g.n + 2 * k);
  if (obs.s().intercept == 0.0 && obs.s().slope == 0.0) return {embed(stationary, out)};

  const std::vector<double> m = stationary.masses();
  std::vector<double> mass(out.n, 0.0);
  parallel_for(out.n, [&](std::size_t j) {
    // Probability that x + s(x) eps lands in target cell j, averaged over source cells.
    const std::vector<double> pi = smeared_ball_probability(g, obs, out.center(j), 0.5 * h);
    double s = 0.0;
    for (std::size_t i = 0; i < g.n; ++i) s += pi[i] * m[i];
    mass[j] = s;
  });
  return {GridDensity::from_masses(out, mass)};
}

double kantorovich(const GridDensity& f, const GridDensity& g) {
  require_same_grid(f.grid(), g.grid(), "kantorovich");
  double F = 0.0, G = 0.0, s = 0.0;
  const double h = f.grid().width();
  for (std::size_t i = 0; i + 1 < f.size(); ++i) {
    F += f.weight(i) * h;
    G += g.weight(i) * h;
    s += std::abs(F - G);
  }
  return s * h;
}

GapReport mu_mu_prime_gap(const GridDensity& stationary, const MuPrime& mu_p, const ModelConfig& config) {
  if (!config.obs().s().is_constant())
    throw AssumptionViolation("mu_mu_prime_gap requires a constant s");
  GapReport r;
  r.kappa = kantorovich(embed(stationary, mu_p.density.grid()), mu_p.density);
  r.bound = std::abs(config.obs().s().intercept) * config.obs().psi_mean_abs();
  return r;
}

GridDensity empirical_measure(const Trajectory& traj, const Grid& grid) {
  return histogram(grid, traj.z);
}

StatsContext make_stats_context(const ModelConfig& config, std::size_t n_cells) {
  KernelMatrix L = build_ulam(config, n_cells);
  GridDensity mu = stationary_density(L).leading_density;
  MuPrime mp = mu_prime(mu, config);
  return {std::move(L), std::move(mu), std::move(mp)};
}

// ---------------------------------------------------------------------------
// Birkhoff sums and the CLT
// ---------------------------------------------------------------------------

double integrate(const Observable& u, const GridDensity& w) {
  return w.expect(project(w.grid(), u.fn));
}

BirkhoffSeries birkhoff(const Trajectory& traj, const Observable& u, const MuPrime& mu_p,
                        bool centered) {
  BirkhoffSeries b;
  b.observable_id = u.id;
  b.centered = centered;
  const double shift = centered ? integrate(u, mu_p.density) : 0.0;
  b.values.reserve(traj.z.size());
  double s = 0.0;
  for (double z : traj.z) {
    s += u.fn(z) - shift;
    b.values.push_back(s);
  }
  return b;
}

std::vector<double> birkhoff_sums(const ModelConfig& config, const StatsContext& ctx,
                                  const Observable& u, std::size_t n, std::size_t replicas,
                                  SeededStream stream) {
  const double shift = integrate(u, ctx.mu_p.density);
  std::vector<double> sums(replicas);
  SimulateOptions opt;
  opt.stationary = &ctx.mu;
  opt.record_latent = false;
  parallel_for(replicas, [&](std::size_t r) {
    const Trajectory tr =
        simulate(config, n, Start::stationary(), {stream.seed, stream.stream_id + r}, opt);
    double s = 0.0;
    for (double z : tr.z) s += u.fn(z) - shift;
    sums[r] = s;
  });
  return sums;
}

double sigma2_series(const ModelConfig& config, const StatsContext& ctx, const Observable& u,
                     std::size_t t_max) {
  const ObsNoise& obs = config.obs();
  const double hw = obs.half_width();
  // E_psi u(x + s(x) eps): psi is polynomial on each half, so GL8 per half is exact in eps.
  auto u_hat = [&](double x) {
    const double sx = obs.s()(x);
    auto inner = [&](double e) { return obs.psi_pdf(e) * u.fn(x + sx * e); };
    return quad::gl8(inner, -hw, 0.0) + quad::gl8(inner, 0.0, hw);
  };
  const std::vector<double> uh = project(ctx.mu.grid(), u_hat);

  const double m1 = integrate(u, ctx.mu_p.density);
  const Observable u2{u.id + "^2", [&](double z) { return u.fn(z) * u.fn(z); }};
  const double var = integrate(u2, ctx.mu_p.density) - m1 * m1;
  const std::vector<double> C = correlation(uh, uh, ctx.L, ctx.mu, t_max);
  double s = var;
  for (std::size_t t = 1; t <= t_max; ++t) s += 2.0 * C[t];
  return s;
}

double kolmogorov_survival(double lambda) {
  if (lambda < 0.2) return 1.0;
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    s += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(s, 0.0, 1.0);
}

KsResult ks_normal(std::span<const double> xs) {
  if (xs.empty()) throw InputError("ks_normal: empty sample");
  std::vector<double> v(xs.begin(), xs.end());
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  double d = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double F = 0.5 * std::erfc(-v[i] / std::sqrt(2.0));
    d = std::max({d, (i + 1) / n - F, F - i / n});
  }
  const double sn = std::sqrt(n);
  return {d, kolmogorov_survival((sn + 0.12 + 0.11 / sn) * d)};
}

CltReport clt_check(const ModelConfig& config, const StatsContext& ctx, const Observable& u,
                    std::size_t n, std::size_t replicas, SeededStream stream, std::size_t t_max) {
  if (n < 1 || replicas < 2) throw InputError("clt_check needs n >= 1 and at least two replicas");
  CltReport r;
  r.n = n;
  r.replicas = replicas;
  r.mean_mu_prime = integrate(u, ctx.mu_p.density);
  r.sigma2_series = sigma2_series(config, ctx, u, t_max);
  r.sums = birkhoff_sums(config, ctx, u, n, replicas, stream);
  double s2 = 0.0;
  for (double s : r.sums) s2 += s * s;
  r.sigma2_batch = s2 / (static_cast<double>(replicas) * static_cast<double>(n));
  if (r.sigma2_batch < 1e-12) throw DegenerateData("CLT variance estimate vanishes");
  r.relative_gap = std::abs(r.sigma2_batch - r.sigma2_series) / std::abs(r.sigma2_series);
  std::vector<double> z(r.sums.size());
  const double scale = std::sqrt(r.sigma2_batch * static_cast<double>(n));
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = r.sums[i] / scale;
  r.ks = ks_normal(z);
  return r;
}

// ---------------------------------------------------------------------------
// Large deviations
// ---------------------------------------------------------------------------

LdReport ld_from_sums(std::span<const double> sums, std::size_t n, std::span<const double> eps_grid,
                      double sigma2, double convex_tol) {
  LdReport rep;
  rep.n = n;
  rep.replicas = sums.size();
  rep.sigma2 = sigma2;
  const double nn = static_cast<double>(n), R = static_cast<double>(sums.size());
  for (double eps : eps_grid) {
    LdPoint p;
    p.eps = eps;
    p.count = static_cast<std::size_t>(
        std::count_if(sums.begin(), sums.end(), [&](double s) { return s > nn * eps; }));
    p.censored = p.count == 0;
    p.rate = p.censored ? std::log(R) / nn : -std::log(static_cast<double>(p.count) / R) / nn;
    p.gaussian_rate = eps * eps / (2.0 * sigma2);
    const double tail = 0.5 * std::erfc(eps * std::sqrt(nn / sigma2) / std::sqrt(2.0));
    p.gaussian_finite_n = -std::log(tail) / nn;
    rep.points.push_back(p);
  }
  rep.monotone = true;
  rep.convex = true;
  std::vector<const LdPoint*> ok;
  for (const auto& p : rep.points)
    if (!p.censored) ok.push_back(&p);
  for (std::size_t i = 1; i < ok.size(); ++i)
    if (ok[i]->eps > ok[i - 1]->eps && ok[i]->rate < ok[i - 1]->rate) rep.monotone = false;
  for (std::size_t i = 2; i < ok.size(); ++i) {
    const double h1 = ok[i - 1]->eps - ok[i - 2]->eps, h2 = ok[i]->eps - ok[i - 1]->eps;
    if (!(h1 > 0.0 && h2 > 0.0)) continue;
    const double d2 = ((ok[i]->rate - ok[i - 1]->rate) / h2 - (ok[i - 1]->rate - ok[i - 2]->rate) / h1) /
                      (0.5 * (h1 + h2));
    if (d2 < -convex_tol) rep.convex = false;
  }
  return rep;
}

LdReport ld_rate(const ModelConfig& config, const StatsContext& ctx, const Observable& u,
                 std::span<const double> eps_grid, std::size_t n, std::size_t replicas,
                 SeededStream stream) {
  const std::vector<double> sums = birkhoff_sums(config, ctx, u, n, replicas, stream);
  return ld_from_sums(sums, n, eps_grid, sigma2_series(config, ctx, u, 100));
}

// ---------------------------------------------------------------------------
// Concentration
// ---------------------------------------------------------------------------

double concentration_bound(double t, std::span<const double> lip, double c_eps, double c_x,
                           double s_max) {
  double l2 = 0.0;
  for (double l : lip) l2 += l * l;
  return 2.0 * std::exp(-t * t / (4.0 * l2 * (c_eps * s_max * s_max + c_x)));
}

double ols_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw InputError("ols_slope needs two or more points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (!(sxx > 0.0)) throw DegenerateData("ols_slope: constant regressor");
  return sxy / sxx;
}

namespace {

double quantile_sorted(const std::vector<double>& v, double p) {
  const double pos = p * static_cast<double>(v.size() - 1);
  const auto i = static_cast<std::size_t>(pos);
  const double f = pos - static_cast<double>(i);
  return i + 1 < v.size() ? v[i] * (1.0 - f) + v[i + 1] * f : v[i];
}

}  // namespace

ConcentrationReport concentration_check(const ModelConfig& config, const StatsContext& ctx,
                                        std::span<const std::size_t> n_list, std::size_t replicas,
                                        SeededStream stream) {
  if (replicas < 2) throw InputError("concentration_check needs at least two replicas");
  ConcentrationReport rep;
  SimulateOptions opt;
  opt.stationary = &ctx.mu;
  opt.record_latent = false;
  const Grid& grid = ctx.mu_p.density.grid();
  std::vector<double> logn, logk;
  for (std::size_t k = 0; k < n_list.size(); ++k) {
    ConcentrationRow row;
    row.n = n_list[k];
    row.kappas.resize(replicas);
    parallel_for(replicas, [&](std::size_t r) {
      const SeededStream s{stream.seed, stream.stream_id + k * replicas + r};
      const Trajectory tr = simulate(config, row.n, Start::stationary(), s, opt);
      row.kappas[r] = kantorovich(empirical_measure(tr, grid), ctx.mu_p.density);
    });
    std::vector<double> sorted = row.kappas;
    std::sort(sorted.begin(), sorted.end());
    row.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(replicas);
    row.q05 = quantile_sorted(sorted, 0.05);
    row.q50 = quantile_sorted(sorted, 0.50);
    row.q95 = quantile_sorted(sorted, 0.95);

    // log P(kappa > mean + t) against t^2 over a few t in (0, q95 - mean].
    std::vector<double> tx, ty;
    const double span = sorted.back() - row.mean;
    for (int j = 0; j <= 5 && span > 0.0; ++j) {
      const double t = span * j / 6.0;
      const auto cnt = std::count_if(sorted.begin(), sorted.end(), [&](double v) { return v > row.mean + t; });
      if (cnt == 0) break;
      tx.push_back(t * t);
      ty.push_back(std::log(static_cast<double>(cnt) / static_cast<double>(replicas)));
    }
    row.tail_slope = tx.size() >= 2 ? ols_slope(tx, ty) : 0.0;
    logn.push_back(std::log(static_cast<double>(row.n)));
    logk.push_back(std::log(row.mean));
    rep.rows.push_back(std::move(row));
  }
  rep.loglog_slope = logn.size() >= 2 ? ols_slope(logn, logk) : 0.0;
  return rep;
}

}  // namespace heterodyn
