#include <gtest/gtest.h>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <numbers>

#include "heterodyn/error.hpp"
#include "heterodyn/model.hpp"
#include "heterodyn/quadrature.hpp"
#include "test_util.hpp"

namespace heterodyn {
namespace {

using testing::shipped;
using testing::shipped_spec;

ModelSpec identity_spec() {
  ModelSpec s;
  s.map.omega = 1.0;
  s.map.c = 0.0;
  s.map.sigma_eps_bar = 0.0;
  return s;
}

// Independent bump: flat core, exp(1 - 1/(1 - t^2)) shoulders.
double bump_oracle(double y, double a, double ups) {
  const double ay = std::abs(y), flat = (1.0 - ups) * a;
  if (ay >= a) return 0.0;
  if (ay <= flat) return 1.0;
  const double t = (ay - flat) / (ups * a);
  return std::exp(1.0 - 1.0 / (1.0 - t * t));
}

// c_a by a plain midpoint Riemann sum with 10^6 points.
double c_a_oracle(double a, double ups) {
  const int N = 1'000'000;
  const double h = 2.0 * a / N;
  double s = 0.0;
  for (int k = 0; k < N; ++k) {
    const double y = -a + (k + 0.5) * h;
    s += bump_oracle(y, a, ups) * std::exp(-0.5 * y * y);
  }
  return 1.0 / (s * h);
}

TEST(EvalA, IdentityParametersGiveOneAtZero) {
  MapParams p{15.969, 1.0, 0.0, 0.0};
  EXPECT_DOUBLE_EQ(eval_A(0.0, p), 1.0);
}

TEST(EvalA, IdentityParametersGiveLinearNumerator) {
  MapParams p{15.969, 1.0, 0.0, 0.0};
  for (double u : {0.1, 0.3, 0.77, 0.999}) EXPECT_NEAR(eval_A(u, p), 1.0 + 15.969 * u, 1e-12);
}

TEST(EvalA, MatchesFiftyDigitEvaluation) {
  using big = boost::multiprecision::cpp_bin_float_50;
  const MapParams p;
  for (double u : {0.0, 0.25, 0.5, 0.9, 0.999}) {
    const big U(u), g0(p.gamma0), om(p.omega), c(p.c), S(p.sigma_eps_bar);
    const big num = 1 + g0 * U;
    const big br = om * (1 - c * U) * (1 - c * U) + S * num * num / ((1 - U) * (1 - U));
    const double ref = static_cast<double>(num / sqrt(br));
    EXPECT_NEAR(eval_A(u, p), ref, 1e-13 * std::abs(ref)) << "u = " << u;
  }
}

TEST(EvalA, RejectsOutsideUnitInterval) {
  const MapParams p;
  EXPECT_THROW(eval_A(1.0, p), DomainError);
  EXPECT_THROW(eval_A(-0.1, p), DomainError);
  MapParams bad{15.969, 0.0, 0.0, 0.0};
  EXPECT_THROW(eval_A(0.5, bad), DomainError);
}

TEST(EvalT, IdentityParametersGiveIdentity) {
  const UnimodalMap m = UnimodalMap::finance(identity_spec().map);
  EXPECT_NEAR(m.on_unit(0.3), 0.3, 1e-14);
}

TEST(EvalT, LimitAtOneIsMinusInverseGamma0) {
  const ModelConfig cfg = shipped("reference.cfg");
  EXPECT_NEAR(cfg.map()(1.0 - 1e-9), -1.0 / 15.969, 1e-6);
}

TEST(EvalT, ContinuousAtZero) {
  const ModelConfig cfg = shipped("reference.cfg");
  EXPECT_NEAR(cfg.map()(-1e-13), cfg.map()(0.0), 1e-10);
  EXPECT_NEAR(eval_T(0.4, cfg.spec().map, cfg.geometry()), cfg.map()(0.4), 0.0);
}

TEST(EvalT, DomainChecked) {
  const ModelConfig cfg = shipped("reference.cfg");
  EXPECT_THROW(cfg.map()(1.0), DomainError);
  EXPECT_THROW(cfg.map()(-cfg.geometry().Gamma - 1e-9), DomainError);
}

TEST(EvalT, LeftExtensionDecreasingAndBelowDelta) {
  const ModelConfig cfg = shipped("reference.cfg");
  const Geometry& g = cfg.geometry();
  EXPECT_LT(cfg.map().left_slope(), 0.0);
  EXPECT_LT(cfg.map()(-g.Gamma), g.Delta);
  EXPECT_GT(cfg.map()(-g.Gamma), cfg.map()(-0.5 * g.Gamma));
}

TEST(EvalT, UnimodalOnFineGrid) {
  const ModelConfig cfg = shipped("reference.cfg");
  const int N = 10000;
  int changes = 0, prev = 0;
  for (int k = 0; k < N; ++k) {
    const double x = (k + 0.5) / N * (1.0 - 1e-6);
    const double h = 1e-7;
    const double d = cfg.map().on_unit(std::min(x + h, 1.0 - 1e-7)) - cfg.map().on_unit(std::max(x - h, 0.0));
    const int sg = d > 0 ? 1 : (d < 0 ? -1 : 0);
    if (sg == 0) continue;
    if (prev == 0) EXPECT_EQ(sg, 1);
    if (prev != 0 && sg != prev) ++changes;
    prev = sg;
  }
  EXPECT_EQ(changes, 1);
}

TEST(Geometry, ReferenceValues) {
  const ModelConfig cfg = shipped("reference.cfg");
  const Geometry& g = cfg.geometry();
  EXPECT_TRUE(g.interior_max);
  EXPECT_LT(g.Delta, 1.0);
  EXPECT_NEAR(g.Gamma, 1.0 - g.Delta, 1e-15);
  EXPECT_NEAR(g.q, cfg.map().on_unit(0.0), 1e-15);
  // The maximiser: T' vanishes there and no grid point beats it.
  for (int k = 0; k <= 2000; ++k) EXPECT_LE(cfg.map().on_unit(k / 2000.0 * (1 - 1e-6)), g.Delta + 1e-12);
  EXPECT_NEAR(g.I_Gamma.lo, 0.5 * cfg.map().on_unit(1.0 - 0.5 * g.Gamma), 1e-15);
  EXPECT_NEAR(g.I_Gamma.hi, 1.0 - 0.5 * g.Gamma, 1e-15);
  EXPECT_TRUE(g.confinement.contains(g.I_Gamma));
  EXPECT_TRUE(g.extended_domain.contains(g.confinement));
}

TEST(Geometry, TestMaps) {
  const ModelConfig tent = shipped("tent.cfg");
  EXPECT_NEAR(tent.geometry().critical_point, 0.5, 1e-9);
  EXPECT_NEAR(tent.geometry().Delta, 0.9, 1e-12);
  EXPECT_NEAR(tent.geometry().q, 0.1, 1e-15);
  ModelSpec s = shipped_spec("tent.cfg");
  s.map_kind = MapKind::logistic;
  const ModelConfig logi(s);
  EXPECT_NEAR(logi.geometry().critical_point, 0.5, 1e-6);
  EXPECT_NEAR(logi.geometry().Delta, 0.9, 1e-12);
  EXPECT_NEAR(logi.map().on_unit(0.25), 0.1 + 0.8 * 0.75, 1e-12);
}

TEST(Bump, ShapeAndSupport) {
  for (double y : {-0.1, -0.03, 0.0, 0.02, 0.026, 0.04, 0.049, 0.05, 0.2})
    EXPECT_DOUBLE_EQ(bump(y, 0.05, 0.5), bump_oracle(y, 0.05, 0.5)) << y;
  EXPECT_EQ(bump(0.05, 0.05, 0.5), 0.0);
  EXPECT_EQ(bump(0.025, 0.05, 0.5), 1.0);
}

TEST(EvalG, ZeroOutsideSupportAndSymmetric) {
  const ModelConfig cfg = shipped("reference.cfg");
  const DynNoise& d = cfg.dyn();
  EXPECT_EQ(eval_g(2.0 * d.a(), d), 0.0);
  EXPECT_EQ(eval_g(-d.a(), d), 0.0);
  for (double e : {0.1, 0.7, 1.3, 1.59}) EXPECT_EQ(eval_g(e, d), eval_g(-e, d));
}

TEST(EvalG, IntegratesToOne) {
  for (double a : {0.05, 0.7, 1.6}) {
    ModelSpec s;
    s.a = a;
    const ModelConfig cfg(s);
    const double I = quad::adaptive([&](double e) { return eval_g(e, cfg.dyn()); }, -a, a, 1e-12);
    EXPECT_NEAR(I, 1.0, 1e-8) << "a = " << a;
  }
}

TEST(EvalG, MatchesRiemannOracle) {
  ModelSpec s;
  s.a = 0.05;
  const ModelConfig cfg(s);
  const double ca = c_a_oracle(0.05, 0.5);
  EXPECT_NEAR(cfg.dyn().c_a(), ca, 1e-9 * ca);
  EXPECT_NEAR(eval_g(0.025, cfg.dyn()), ca * bump_oracle(0.025, 0.05, 0.5) * std::exp(-0.5 * 0.025 * 0.025),
              1e-9 * ca);
}

TEST(EvalKernel, VanishesOutsideBandAndPeaks) {
  ModelSpec s;
  s.a = 0.05;
  const ModelConfig cfg(s);
  const double Tx = cfg.map()(0.5);
  EXPECT_EQ(eval_kernel_p(0.5, Tx + 0.05 * 0.02 * 1.0001, cfg), 0.0);
  EXPECT_EQ(eval_kernel_p(0.5, Tx - 0.05 * 0.02 * 1.0001, cfg), 0.0);
  EXPECT_NEAR(eval_kernel_p(0.5, Tx, cfg), c_a_oracle(0.05, 0.5) / 0.02, 1e-7);
}

TEST(EvalKernel, RowsIntegrateToOne) {
  const ModelConfig cfg = shipped("reference.cfg");
  const Geometry& g = cfg.geometry();
  const double aw = cfg.dyn().a() * 0.02;
  for (double x : {-g.Gamma, -0.01, 0.0, 0.2, 0.71, 0.95, 1.0 - 1e-9}) {
    const double Tx = cfg.map()(x);
    const double flat = 0.5 * aw;
    auto f = [&](double y) { return eval_kernel_p(x, y, cfg); };
    const double I = quad::adaptive(f, Tx - aw, Tx - flat, 1e-12) + quad::adaptive(f, Tx - flat, Tx + flat, 1e-12) +
                     quad::adaptive(f, Tx + flat, Tx + aw, 1e-12);
    EXPECT_NEAR(I, 1.0, 1e-8) << "x = " << x;
  }
}

TEST(EvalKernel, RejectsNonPositiveSigma) {
  ModelSpec s;
  s.sigma = Profile::affine(0.0, 0.02);
  const ModelConfig cfg(s);
  EXPECT_THROW(eval_kernel_p(-0.01, 0.1, cfg), DomainError);
}

TEST(EvalLikelihood, UniformBand) {
  const ModelConfig cfg = shipped("reference.cfg");
  const double x = 0.5, half = 0.01 * 0.05;
  EXPECT_EQ(eval_likelihood(x + 1.01 * half, x, cfg), 0.0);
  EXPECT_EQ(eval_likelihood(x - 1.01 * half, x, cfg), 0.0);
  EXPECT_DOUBLE_EQ(eval_likelihood(x + 0.3 * half, x, cfg), 1.0 / (0.1 * 0.01));
}

TEST(EvalLikelihood, IntegratesToOneInZ) {
  for (auto psi : {PsiKind::uniform, PsiKind::triangular}) {
    ModelSpec s;
    s.psi = psi;
    s.s = Profile::affine(0.01, 0.005);
    const ModelConfig cfg(s);
    for (double x : {0.2, 0.6}) {
      // Stay a hair inside the band so the jump of the uniform law is not sampled.
      const double half = cfg.obs().s()(x) * 0.05 * (1.0 - 1e-13);
      auto f = [&](double z) { return eval_likelihood(z, x, cfg); };
      const double I = quad::adaptive(f, x - half, x, 1e-12) + quad::adaptive(f, x, x + half, 1e-12);
      EXPECT_NEAR(I, 1.0, 1e-8);
    }
  }
}

TEST(EvalLikelihood, RejectsNonPositiveS) {
  ModelSpec s;
  s.s = Profile::constant(0.0);
  const ModelConfig cfg(s);
  EXPECT_THROW(eval_likelihood(0.5, 0.5, cfg), DomainError);
}

TEST(ObsNoise, PsiMoments) {
  for (auto psi : {PsiKind::uniform, PsiKind::triangular}) {
    ModelSpec s;
    s.psi = psi;
    const ModelConfig cfg(s);
    const ObsNoise& o = cfg.obs();
    const double h = o.half_width();
    EXPECT_NEAR(quad::adaptive([&](double e) { return o.psi_pdf(e); }, -h, 0.0) +
                    quad::adaptive([&](double e) { return o.psi_pdf(e); }, 0.0, h),
                1.0, 1e-12);
    EXPECT_NEAR(quad::adaptive([&](double e) { return std::abs(e) * o.psi_pdf(e); }, -h, 0.0) +
                    quad::adaptive([&](double e) { return std::abs(e) * o.psi_pdf(e); }, 0.0, h),
                o.psi_mean_abs(), 1e-12);
    auto pdf = [&](double t) { return o.psi_pdf(t); };
    for (double e : {-0.04, -0.01, 0.0, 0.02}) {
      const double ref = e <= 0.0 ? quad::adaptive(pdf, -h, e) : quad::adaptive(pdf, -h, 0.0) + quad::adaptive(pdf, 0.0, e);
      EXPECT_NEAR(o.psi_cdf(e), ref, 1e-12);
    }
  }
  ModelSpec s;
  EXPECT_DOUBLE_EQ(ModelConfig(s).obs().psi_mean_abs(), 0.1 / 4.0);
}

TEST(Validate, IdentityConfigIsInvalid) {
  const ModelConfig cfg(identity_spec());
  const ValidationReport r = validate_config(cfg);
  EXPECT_FALSE(r.valid());
  ASSERT_NE(r.find("delta_below_one"), nullptr);
  EXPECT_FALSE(r.find("delta_below_one")->passed);
}

TEST(Validate, ReferenceWithAmplitudeAtBoundIsValid) {
  ModelSpec s = shipped_spec("reference.cfg");
  const ModelConfig probe(s);
  s.a = max_noise_amplitude(probe.map(), s.sigma);
  const ValidationReport r = validate_config(ModelConfig(s));
  for (const auto& c : r.checks) EXPECT_TRUE(c.passed) << c.name << ": " << c.detail;
}

TEST(Validate, ShippedConfigsAreValid) {
  for (const char* name : {"reference.cfg", "filter.cfg", "tent.cfg"}) {
    const ValidationReport r = validate_config(shipped(name));
    for (const auto& c : r.checks) EXPECT_TRUE(c.passed) << name << " " << c.name << ": " << c.detail;
  }
  // Wide observation noise breaks only the observation bound.
  const ValidationReport r = validate_config(shipped("modulation_s05.cfg"));
  EXPECT_FALSE(r.valid());
  EXPECT_TRUE(r.dynamics_valid());
  EXPECT_FALSE(r.find("observation_noise_bound")->passed);
}

TEST(Validate, ObservationBoundIsStrict) {
  ModelSpec s = shipped_spec("reference.cfg");
  const double Gamma = ModelConfig(s).geometry().Gamma;
  s.s = Profile::constant(Gamma / (s.epsilon / 2.0));  // sup |s eps| = Gamma
  EXPECT_FALSE(validate_config(ModelConfig(s)).find("observation_noise_bound")->passed);
  s.s = Profile::constant(0.5 * Gamma / (s.epsilon / 2.0));  // equality with Gamma / 2
  EXPECT_FALSE(validate_config(ModelConfig(s)).find("observation_noise_bound")->passed);
}

TEST(Validate, AmplitudeAboveBoundFails) {
  ModelSpec s = shipped_spec("reference.cfg");
  s.a = 1.7;
  const ValidationReport r = validate_config(ModelConfig(s));
  EXPECT_FALSE(r.find("noise_amplitude_bound")->passed);
}

// Deterministic confinement: T(x) +- a sigma(x) stays in the confinement interval.
TEST(Validate, ConfinementOnGrid) {
  const ModelConfig cfg = shipped("reference.cfg");
  const Interval C = cfg.geometry().confinement;
  for (int k = 0; k <= 4000; ++k) {
    const double x = C.lo + (C.hi - C.lo) * k / 4000.0;
    const double Tx = cfg.map()(x), w = cfg.dyn().a() * cfg.dyn().sigma()(x);
    EXPECT_TRUE(C.contains(Tx - w) && C.contains(Tx + w)) << x;
  }
}

TEST(ModelConfig, RejectsBadNoiseParameters) {
  ModelSpec s;
  s.a = -1.0;
  EXPECT_THROW(ModelConfig{s}, ConfigError);
  s = ModelSpec{};
  s.upsilon = 1.0;
  EXPECT_THROW(ModelConfig{s}, ConfigError);
  s = ModelSpec{};
  s.epsilon = 0.0;
  EXPECT_THROW(ModelConfig{s}, ConfigError);
}

}  // namespace
}  // namespace heterodyn
