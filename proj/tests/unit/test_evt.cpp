#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "heterodyn/error.hpp"
#include "heterodyn/evt.hpp"
#include "test_util.hpp"

namespace heterodyn {
namespace {

using testing::shipped;

struct EvtSetup {
  explicit EvtSetup(const char* name) : cfg(shipped(name)), ctx(make_stats_context(cfg, 1024)) {}
  ModelConfig cfg;
  StatsContext ctx;
};

const EvtSetup& reference() {
  static const EvtSetup s("reference.cfg");
  return s;
}

TEST(Phi, Values) {
  EXPECT_EQ(observable_phi(1.5, 0.5), 0.0);
  EXPECT_NEAR(observable_phi(0.5 + std::exp(-5.0), 0.5), 5.0, 1e-12);
  EXPECT_EQ(observable_phi(0.5, 0.5), std::numeric_limits<double>::infinity());
}

TEST(Phi, SuperLevelSetIsBall) {
  const BallTarget b = BallTarget::from_radius(0.4, 0.01);
  EXPECT_NEAR(b.threshold, -std::log(0.01), 1e-15);
  for (int k = 0; k <= 10000; ++k) {
    const double x = 0.38 + 0.04 * k / 10000.0;
    EXPECT_EQ(b.contains(x), observable_phi(x, 0.4) >= b.threshold);
    if (std::abs(std::abs(x - 0.4) - 0.01) > 1e-12) EXPECT_EQ(b.contains(x), std::abs(x - 0.4) <= 0.01) << x;
  }
  EXPECT_TRUE(BallTarget::from_radius(0.4, 0.0).empty());
  EXPECT_FALSE(BallTarget::from_radius(0.4, 0.0).contains(0.4));
}

// With psi uniform on [-1, 1] and s constant, P(|Z - y| <= r) = r / s while
// the ball is deep inside every band, so u_t = log(t s^-1 / tau).
TEST(Threshold, ClosedFormsForConstantS) {
  for (auto [name, s] : {std::pair{"modulation_s1.cfg", 1.0}, std::pair{"modulation_s05.cfg", 0.5}}) {
    const EvtSetup st(name);
    const double c = support_midpoint(st.ctx.mu);
    for (auto [tau, t] : {std::pair{1.0, std::size_t{1000}}, std::pair{2.0, std::size_t{100000}}}) {
      const BallTarget b = threshold_from_tau(tau, t, st.ctx.mu, st.cfg, c);
      EXPECT_NEAR(b.threshold, std::log(t / (s * tau)), 2e-6) << name << " tau " << tau;
    }
  }
  const EvtSetup s1("modulation_s1.cfg");
  EXPECT_NEAR(threshold_from_tau(1.0, 1000, s1.ctx.mu, s1.cfg, support_midpoint(s1.ctx.mu)).threshold,
              6.9078, 1e-4);
}

TEST(Threshold, AffineSSatisfiesScalingByFineQuadrature) {
  const EvtSetup st("modulation_affine.cfg");
  const double c = support_midpoint(st.ctx.mu), tau = 1.0;
  const std::size_t t = 5000;
  const BallTarget b = threshold_from_tau(tau, t, st.ctx.mu, st.cfg, c);
  // Independent: 400 midpoints per cell, uniform psi on [-1, 1] in closed form.
  const Grid& g = st.ctx.mu.grid();
  double p = 0.0;
  for (std::size_t i = 0; i < g.n; ++i) {
    if (st.ctx.mu.weight(i) == 0.0) continue;
    double acc = 0.0;
    for (int k = 0; k < 400; ++k) {
      const double x = g.edge(i) + g.width() * (k + 0.5) / 400.0;
      const double s = 0.3 + 0.4 * x;
      const double lo = std::max(-1.0, (c - b.radius - x) / s), hi = std::min(1.0, (c + b.radius - x) / s);
      acc += std::max(0.0, hi - lo) / 2.0;
    }
    p += st.ctx.mu.mass(i) * acc / 400.0;
  }
  EXPECT_NEAR(t * p, tau, 1e-6 * tau);
}

TEST(Threshold, Errors) {
  const EvtSetup& r = reference();
  EXPECT_THROW(threshold_from_tau(1.0, 0, r.ctx.mu, r.cfg, 0.7), InputError);
  EXPECT_THROW(threshold_from_tau(1.0, 10, r.ctx.mu, r.cfg, 2.0), InputError);
  EXPECT_THROW(threshold_from_tau(20.0, 10, r.ctx.mu, r.cfg, 0.7), DomainError);
  EXPECT_TRUE(threshold_from_tau(0.0, 10, r.ctx.mu, r.cfg, 0.7).empty());
}

TEST(HittingTime, TrivialBalls) {
  const std::vector<double> z{0.1, 0.3, 0.5, 0.7};
  EXPECT_EQ(hitting_time(z, BallTarget::from_radius(0.5, 5.0)), std::optional<std::size_t>(1));
  EXPECT_EQ(hitting_time(z, BallTarget::from_radius(3.0, 0.5)), std::nullopt);
  // z_0 is not a candidate: the first index is 1.
  EXPECT_EQ(hitting_time(z, BallTarget::from_radius(0.1, 0.01)), std::nullopt);
  EXPECT_EQ(hitting_time(z, BallTarget::from_radius(0.7, 0.01)), std::optional<std::size_t>(3));
}

// {hitting time > t} and {M_t < u_t} are the same replicas.
TEST(HittingTime, EventIdentityWithRunningMax) {
  const EvtSetup& r = reference();
  const double c = stationary_mode(r.ctx.mu);
  const std::size_t t = 500;
  const BallTarget b = threshold_from_tau(1.0, t, r.ctx.mu, r.cfg, c);
  SimulateOptions opt;
  opt.stationary = &r.ctx.mu;
  opt.record_latent = false;
  std::vector<bool> by_hit, by_max;
  for (std::uint64_t k = 0; k < 2000; ++k) {
    const Trajectory tr = simulate(r.cfg, t + 1, Start::stationary(), {51, k}, opt);
    const auto h = hitting_time(tr.z, b);
    by_hit.push_back(!h || *h > t);
    by_max.push_back(running_max(tr.z, c, t) < b.threshold);
  }
  EXPECT_EQ(by_hit, by_max);
  const auto survivors = std::count(by_hit.begin(), by_hit.end(), true);
  EXPECT_GT(survivors, 0);
  EXPECT_LT(survivors, 2000);
}

TEST(Wilson, KnownInterval) {
  // k = 5, n = 10, z = 1.96: 0.5 -+ 0.2683 (center stays at 1/2 by symmetry).
  const Interval iv = wilson_interval(5, 10, 1.96);
  EXPECT_NEAR(iv.mid(), 0.5, 1e-15);
  const double z2 = 1.96 * 1.96;
  EXPECT_NEAR(iv.length() / 2.0, 1.96 * std::sqrt(0.25 / 10 + z2 / 400) / (1 + z2 / 10), 1e-12);
}

TEST(Gumbel, EmptyBallAndExponentialLaw) {
  const EvtSetup& r = reference();
  const double taus[] = {0.0, 1.0, 2.0};
  const GumbelReport rep = gumbel_check(r.cfg, r.ctx, taus, 1000, 4000, {60, 0});
  ASSERT_EQ(rep.rows.size(), 3u);
  EXPECT_FALSE(rep.conjectural);
  EXPECT_EQ(rep.rows[0].W_hat, 1.0);
  for (std::size_t i = 1; i < 3; ++i) {
    const auto& row = rep.rows[i];
    EXPECT_NEAR(row.e_minus_tau, std::exp(-row.tau), 1e-15);
    const double sd = std::sqrt(row.e_minus_tau * (1 - row.e_minus_tau) / 4000.0);
    EXPECT_NEAR(row.W_hat, row.e_minus_tau, 3.0 * sd) << "tau " << row.tau;
    EXPECT_TRUE(row.ci.contains(row.W_hat));
  }
  EXPECT_NEAR(rep.rows[1].e_minus_tau, 0.3679, 1e-4);
  EXPECT_NEAR(rep.rows[2].e_minus_tau, 0.1353, 1e-4);
}

TEST(Poisson, ChiSquareOnExactCounts) {
  // Counts laid out exactly as Poisson(1) expectations for 1000 replicas.
  std::vector<std::size_t> counts;
  const double e = std::exp(-1.0);
  const double pmf[] = {e, e, e / 2, e / 6, e / 24};
  EXPECT_NEAR(pmf[0], 0.3679, 1e-4);
  EXPECT_NEAR(pmf[2], 0.1839, 1e-4);
  for (std::size_t k = 0; k < 5; ++k)
    counts.insert(counts.end(), static_cast<std::size_t>(std::lround(1000 * pmf[k])), k);
  const ChiSquare cs = poisson_chi_square(counts, 1.0);
  EXPECT_LT(cs.statistic, 1.0);
  EXPECT_GT(cs.p_value, 0.5);
  // All mass at 3 is far from Poisson(1).
  const std::vector<std::size_t> bad(1000, 3);
  EXPECT_LT(poisson_chi_square(bad, 1.0).p_value, 1e-6);
}

TEST(Poisson, VisitCountsArePoisson) {
  const EvtSetup& r = reference();
  const PoissonReport rep = visit_count_check(r.cfg, r.ctx, 1.0, 1000, 4000, {70, 0});
  const double R = static_cast<double>(rep.replicas);
  EXPECT_NEAR(rep.mean, 1.0, 3.0 * std::sqrt(1.0 / R));
  EXPECT_GT(rep.p_value, 0.01);
  // Per-step visit probability times t' recovers tau.
  const double steps = R * static_cast<double>(rep.t_prime);
  EXPECT_NEAR(rep.empirical_step_probability * rep.t_prime, 1.0,
              3.0 * std::sqrt(rep.visit_probability / steps) * rep.t_prime + 1.0 / rep.t_prime);
  std::size_t total = 0;
  for (std::size_t h : rep.histogram) total += h;
  EXPECT_EQ(total, rep.replicas);
}

// Sanity direction: a large ball (t_scale = 3) puts the experiment outside the
// scaling regime and the median p-value drops.
TEST(Poisson, LargeBallDegradesFit) {
  const EvtSetup& r = reference();
  std::vector<double> small, large;
  for (std::uint64_t s = 0; s < 5; ++s) {
    small.push_back(visit_count_check(r.cfg, r.ctx, 1.0, 1000, 2000, {80, s * 10000}).p_value);
    large.push_back(visit_count_check(r.cfg, r.ctx, 1.0, 3, 2000, {80, s * 10000}).p_value);
  }
  std::sort(small.begin(), small.end());
  std::sort(large.begin(), large.end());
  EXPECT_LT(large[2], small[2]);
}

TEST(Repp, LaplaceTransform) {
  const EvtSetup& r = reference();
  ReppSpec spec;
  spec.intervals = {{0.0, 1.0}, {1.0, 2.0}};
  spec.tau = 1.0;
  const std::vector<std::vector<double>> ys{{0.0, 0.0}, {std::log(2.0), 0.0}, {0.5, 1.5}};
  const std::size_t R = 4000;
  const ReppReport rep = repp_laplace_check(r.cfg, r.ctx, spec, ys, 1000, R, {90, 0});
  ASSERT_EQ(rep.rows.size(), 3u);
  EXPECT_EQ(rep.rows[0].empirical, 1.0);
  EXPECT_EQ(rep.rows[0].closed_form, 1.0);
  EXPECT_NEAR(rep.rows[1].closed_form, std::exp(-0.5), 1e-15);
  EXPECT_NEAR(rep.rows[1].closed_form, 0.6065, 1e-4);
  EXPECT_NEAR(rep.rows[2].closed_form, std::exp(-(1 - std::exp(-0.5)) - (1 - std::exp(-1.5))), 1e-15);
  for (const auto& row : rep.rows) EXPECT_LT(row.relative_error, 0.05);
  EXPECT_LT(std::abs(rep.count_correlation), 3.0 / std::sqrt(static_cast<double>(R)));
  EXPECT_EQ(rep.spec.v_t, static_cast<std::size_t>(std::floor(1.0 / rep.visit_probability)));
}

TEST(BlockMaxima, HandCases) {
  std::vector<double> s(12);
  std::iota(s.begin(), s.end(), 1.0);
  EXPECT_EQ(block_maxima(s, 3), (std::vector<double>{4, 8, 12}));
  EXPECT_EQ(block_maxima(s, 12), s);
  EXPECT_EQ(block_maxima(s, 1), (std::vector<double>{12}));
  std::size_t dropped = 0;
  EXPECT_EQ(block_maxima(s, 5, &dropped), (std::vector<double>{2, 4, 6, 8, 10}));
  EXPECT_EQ(dropped, 2u);
  EXPECT_THROW(block_maxima(s, 13), InputError);
  EXPECT_THROW(block_maxima(s, 0), InputError);
}

TEST(BlockMaxima, MaxStability) {
  const EvtSetup& r = reference();
  const Trajectory tr = simulate(r.cfg, 100000, Start::at(0.5), {3, 3});
  std::vector<double> y(tr.z.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = observable_phi(tr.z[i], 0.8);
  const std::size_t m = 50;
  const auto coarse = block_maxima(y, m), fine = block_maxima(y, 2 * m);
  for (std::size_t j = 0; j < m; ++j) EXPECT_EQ(coarse[j], std::max(fine[2 * j], fine[2 * j + 1]));
}

TEST(Modulation, UnitNoiseGivesLogT) {
  const EvtSetup st("modulation_s1.cfg");
  const std::size_t ms[] = {1000};
  const ModulationReport rep = modulation_detect(st.cfg, st.ctx, 1000, ms, {100, 0});
  ASSERT_EQ(rep.rows.size(), 1u);
  const auto& row = rep.rows[0];
  EXPECT_NEAR(rep.target_integral, 0.0, 1e-12);
  EXPECT_NEAR(row.log_t, std::log(1000.0), 1e-15);
  EXPECT_NEAR(row.estimate, row.fit.kappa - row.log_t, 1e-15);
  EXPECT_TRUE(row.fit.ci_95[1].contains(row.log_t + rep.target_local));
  EXPECT_NEAR(rep.target_local, 0.0, 1e-6);
}

}  // namespace
}  // namespace heterodyn
