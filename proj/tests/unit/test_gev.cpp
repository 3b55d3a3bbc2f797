#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "heterodyn/error.hpp"
#include "heterodyn/gev.hpp"

namespace heterodyn {
namespace {

std::vector<double> synthetic(double xi, double kappa, double sigma, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) {
    double p = u(rng);
    while (p == 0.0) p = u(rng);
    x = gev_quantile(p, xi, kappa, sigma);
  }
  return v;
}

TEST(GevLaw, CdfQuantileRoundTrip) {
  for (double xi : {-0.3, -1e-8, 0.0, 1e-8, 0.25})
    for (double p : {0.001, 0.2, 0.5, 0.9, 0.999})
      EXPECT_NEAR(gev_cdf(gev_quantile(p, xi, 1.5, 0.7), xi, 1.5, 0.7), p, 1e-12) << xi << " " << p;
  EXPECT_NEAR(gev_cdf(0.0, 0.0, 0.0, 1.0), std::exp(-1.0), 1e-15);
  EXPECT_THROW(gev_quantile(1.0, 0.0, 0.0, 1.0), DomainError);
  EXPECT_THROW(gev_quantile(0.0, 0.0, 0.0, 1.0), DomainError);
}

TEST(GevLaw, GumbelLikelihoodClosedForm) {
  const std::vector<double> d{0.1, 1.2, -0.4, 2.5};
  const double k = 0.3, s = 1.4;
  double ref = 0.0;
  for (double y : d) {
    const double z = (y - k) / s;
    ref += std::log(s) + z + std::exp(-z);
  }
  EXPECT_NEAR(gev_nll(d, 0.0, k, s), ref, 1e-12);
  EXPECT_NEAR(gev_nll(d, 1e-9, k, s), ref, 1e-6);
  EXPECT_TRUE(std::isinf(gev_nll(d, 0.0, k, -1.0)));
  // xi = 0.5 puts the lower support end at kappa - 2 sigma = -2.5; -3 lies outside.
  EXPECT_TRUE(std::isinf(gev_nll(std::vector<double>{-3.0}, 0.5, k, s)));
}

TEST(GevFit, RecoversGumbel) {
  const std::vector<double> d = synthetic(0.0, 3.0, 1.0, 10000, 1);
  const GevFit f = gev_fit(d);
  EXPECT_TRUE(f.ci_95[1].contains(3.0));
  EXPECT_TRUE(f.ci_95[2].contains(1.0));
  EXPECT_LT(std::abs(f.xi), 0.05);
  EXPECT_GT(f.sigma, 0.0);
  for (const auto& iv : f.ci_95) EXPECT_LT(iv.lo, iv.hi);
}

TEST(GevFit, AffineEquivariance) {
  const std::vector<double> d = synthetic(0.1, 0.5, 2.0, 2000, 2);
  const GevFit f = gev_fit(d);
  const double c = 3.0, b = -7.0;
  std::vector<double> e(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) e[i] = c * d[i] + b;
  const GevFit g = gev_fit(e);
  EXPECT_NEAR(g.xi, f.xi, 1e-4);
  EXPECT_NEAR(g.sigma, c * f.sigma, 1e-4 * c * f.sigma);
  EXPECT_NEAR(g.kappa, c * f.kappa + b, 1e-4 * c * f.sigma);
}

TEST(GevFit, FitRespectsSupport) {
  const std::vector<double> d = synthetic(-0.3, 0.0, 1.0, 1000, 3);
  const GevFit f = gev_fit(d);
  for (double y : d) EXPECT_GT(1.0 + f.xi * (y - f.kappa) / f.sigma, 0.0);
  EXPECT_LE(f.neg_log_likelihood, gev_nll(d, -0.3, 0.0, 1.0));
}

TEST(GevFit, IntervalCoverage) {
  for (double xi : {-0.2, 0.0, 0.2}) {
    int cover[3] = {0, 0, 0};
    for (std::uint64_t rep = 0; rep < 100; ++rep) {
      const GevFit f = gev_fit(synthetic(xi, 1.0, 0.5, 500, 1000 + rep));
      cover[0] += f.ci_95[0].contains(xi);
      cover[1] += f.ci_95[1].contains(1.0);
      cover[2] += f.ci_95[2].contains(0.5);
    }
    for (int k = 0; k < 3; ++k) EXPECT_GE(cover[k], 90) << "xi " << xi << " parameter " << k;
  }
}

TEST(GevFit, RejectsDegenerateInput) {
  EXPECT_THROW(gev_fit(std::vector<double>(49, 1.0)), DegenerateData);
  EXPECT_THROW(gev_fit(std::vector<double>(100, 2.0)), DegenerateData);
  std::vector<double> d = synthetic(0.0, 0.0, 1.0, 100, 4);
  d[7] = NAN;
  EXPECT_THROW(gev_fit(d), InputError);
}

}  // namespace
}  // namespace heterodyn
