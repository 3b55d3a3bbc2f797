#include "heterodyn/report.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <type_traits>
#include <ostream>
#include <string>

#include "heterodyn/version.hpp"

namespace heterodyn {

namespace {

// Comma-joined row of numbers.
template <typename... Ts>
void row(std::ostream& os, const Ts&... vs) {
  bool first = true;
  auto put = [&](const auto& v) {
    if (!first) os << ',';
    first = false;
    if constexpr (std::is_floating_point_v<std::decay_t<decltype(v)>>) os << format_number(v);
    else os << v;
  };
  (put(vs), ...);
  os << '\n';
}

void note(std::ostream& os, const std::string& key, double v) { os << "# " << key << '=' << format_number(v) << '\n'; }

}  // namespace

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_header(std::ostream& os, std::uint64_t config_hash, const SeededStream& seed) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(config_hash));
  os << "# heterodyn version=" << kVersion << " config_hash=" << buf << " seed=" << seed.seed << ':'
     << seed.stream_id << '\n';
}

void write_validation_csv(std::ostream& os, const ValidationReport& r, std::uint64_t hash, const SeededStream& seed) {
  write_header(os, hash, seed);
  os << "check,status,detail\n";
  for (const auto& c : r.checks) os << c.name << ',' << (c.passed ? "PASS" : "FAIL") << ",\"" << c.detail << "\"\n";
}

void write_trajectory_csv(std::ostream& os, const Trajectory& tr) {
  write_header(os, tr.config_hash, tr.seed);
  os << "t,x,z\n";
  for (std::size_t t = 0; t < tr.z.size(); ++t)
    row(os, t, t < tr.x.size() ? tr.x[t] : std::numeric_limits<double>::quiet_NaN(), tr.z[t]);
}

void write_density_csv(std::ostream& os, const GridDensity& w, std::uint64_t hash, const SeededStream& seed) {
  write_header(os, hash, seed);
  os << "cell,lo,hi,center,density\n";
  const Grid& g = w.grid();
  for (std::size_t i = 0; i < g.n; ++i) row(os, i, g.edge(i), g.edge(i + 1), g.center(i), w.weight(i));
}

void write_spectral_csv(std::ostream& os, const SpectralReport& r, std::span<const double> correlations,
                        std::uint64_t hash, const SeededStream& seed) {
  write_header(os, hash, seed);
  note(os, "leading_eigenvalue", r.leading_eigenvalue.real());
  note(os, "second_modulus", r.second_modulus);
  note(os, "iterations", static_cast<double>(r.iterations));
  note(os, "residual", r.residual);
  os << "t,correlation\n";
  for (std::size_t t = 0; t < correlations.size(); ++t) row(os, t, correlations[t]);
}

void write_stability_csv(std::ostream& os, const StabilityReport& r, std::uint64_t hash, const SeededStream& seed) {
  write_header(os, hash, seed);
  note(os, "z0", r.assumption.z0);
  note(os, "certificate_c", r.certificate.c);
  note(os, "certificate_lambda", r.certificate.lambda);
  note(os, "assumption_passed", r.assumption.passed() ? 1.0 : 0.0);
  // Steps at infinite Hilbert distance (priors with different supports) keep
  // only their total variation, as notes, so the table stays finite.
  std::size_t skipped = 0;
  for (const auto& s : r.steps) {
    if (std::isfinite(s.theta0) && std::isfinite(s.bound)) continue;
    note(os, "tv_step_" + std::to_string(s.step), s.tv);
    ++skipped;
  }
  note(os, "steps_at_infinite_distance", static_cast<double>(skipped));
  os << "step,theta0,tv,event,bound\n";
  for (const auto& s : r.steps)
    if (std::isfinite(s.theta0) && std::isfinite(s.bound)) row(os, s.step, s.theta0, s.tv, s.event ? 1 : 0, s.bound);
}

void write_clt_csv(std::ostream& os, const CltReport& r, std::uint64_t hash, const SeededStream& seed) {
  write_header(os, hash, seed);
  note(os, "mean_mu_prime", r.mean_mu_prime);
  note(os, "sigma2_batch", r.sigma2_batch);
  note(os, "sigma2_series", r.sigma2_series);
  note(os, "relative_gap", r.relative_gap);
  note(os, "ks_statistic", r.ks.statistic);
  note(os, "ks_p_value", r.ks.p_value);
  os << "n,replica,S_n\n";
  for (std::size_t i = 0; i < r.sums.size(); ++i) row(os, r.n, i, r.sums[i]);
}

void write_ld_csv(std::ostream& os, const LdReport& r, std::uint64_t hash, const SeededStream& seed) {
  write_header(os, hash, seed);
  note(os, "sigma2", r.sigma2);
  note(os, "monotone", r.monotone ? 1.0 : 0.0);
  note(os, "convex", r.convex ? 1.0 : 0.0);
  os << "n,eps,count,rate,censored,gaussian_rate,gaussian_finite_n\n";
  for (const auto& p : r.points) row(os, r.n, p.eps, p.count, p.rate, p.censored ? 1 : 0, p.gaussian_rate, p.gaussian_finite_n);
}

void write_concentration_csv(std::ostream& os, const ConcentrationReport& r, std::uint64_t hash,
                             const SeededStream& seed) {
  write_header(os, hash, seed);
  note(os, "loglog_slope", r.loglog_slope);
  for (const auto& c : r.rows) {
    os << "# n=" << c.n << " mean=" << format_number(c.mean) << " q05=" << format_number(c.q05)
       << " q50=" << format_number(c.q50) << " q95=" << format_number(c.q95)
       << " tail_slope=" << format_number(c.tail_slope) << '\n';
  }
  os << "n,replica,kappa\n";
  for (const auto& c : r.rows)
    for (std::size_t i = 0; i < c.kappas.size(); ++i) row(os, c.n, i, c.kappas[i]);
}

void write_gumbel_csv(std::ostream& os, const GumbelReport& r, std::uint64_t hash, const SeededStream& seed) {
  write_header(os, hash, seed);
  note(os, "center", r.center);
  note(os, "t", static_cast<double>(r.t));
  note(os, "replicas", static_cast<double>(r.replicas));
  if (r.conjectural) os << "# conjectural: s is not constant\n";
  os << "tau,u_t,W_hat,ci_lo,ci_hi,e_minus_tau,beta_spectral\n";
  for (const auto& g : r.rows) row(os, g.tau, g.u_t, g.W_hat, g.ci.lo, g.ci.hi, g.e_minus_tau, g.beta_spectral);
}

void write_poisson_csv(std::ostream& os, const PoissonReport& r, std::uint64_t hash, const SeededStream& seed) {
  write_header(os, hash, seed);
  note(os, "tau", r.tau);
  note(os, "center", r.center);
  note(os, "radius", r.radius);
  note(os, "t_prime", static_cast<double>(r.t_prime));
  note(os, "mean", r.mean);
  note(os, "variance", r.variance);
  note(os, "empirical_step_probability_times_t_prime",
       r.empirical_step_probability * static_cast<double>(r.t_prime));
  note(os, "chi2", r.chi2);
  note(os, "dof", static_cast<double>(r.dof));
  note(os, "p_value", r.p_value);
  if (r.conjectural) os << "# conjectural: s is not constant\n";
  os << "k,observed,expected\n";
  double logf = 0.0;
  for (std::size_t k = 0; k < r.histogram.size(); ++k) {
    if (k > 0) logf += std::log(static_cast<double>(k));
    const double e = static_cast<double>(r.replicas) * std::exp(static_cast<double>(k) * std::log(r.tau) - r.tau - logf);
    row(os, k, r.histogram[k], e);
  }
}

void write_repp_csv(std::ostream& os, const ReppReport& r, std::uint64_t hash, const SeededStream& seed) {
  write_header(os, hash, seed);
  note(os, "tau", r.spec.tau);
  note(os, "v_t", static_cast<double>(r.spec.v_t));
  note(os, "center", r.center);
  note(os, "radius", r.radius);
  note(os, "count_correlation", r.count_correlation);
  if (r.conjectural) os << "# conjectural: s is not constant\n";
  os << "row,y,empirical,closed_form,relative_error\n";
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    std::string ys;
    for (std::size_t l = 0; l < r.rows[i].y.size(); ++l) ys += (l ? ";" : "") + format_number(r.rows[i].y[l]);
    row(os, i, ys, r.rows[i].empirical, r.rows[i].closed_form, r.rows[i].relative_error);
  }
}

void write_modulation_csv(std::ostream& os, const ModulationReport& r, std::uint64_t hash, const SeededStream& seed) {
  write_header(os, hash, seed);
  note(os, "center", r.center);
  note(os, "target_local", r.target_local);
  os << "K,t,kappa_hat,sigma_hat,xi_hat,log_t,target_integral\n";
  for (const auto& m : r.rows)
    row(os, m.K, m.t, m.fit.kappa, m.fit.sigma, m.fit.xi, m.log_t, r.target_integral);
}

}  // namespace heterodyn
