#pragma once

#include <array>
#include <cstddef>
#include <span>

#include "heterodyn/model.hpp"

namespace heterodyn {

// Generalised extreme value law
//   F(y) = exp(-(1 + xi (y - kappa)/sigma)^(-1/xi)),
// with the Gumbel limit exp(-exp(-(y - kappa)/sigma)) at xi = 0.
struct GevFit {
  double xi = 0.0;
  double kappa = 0.0;
  double sigma = 1.0;
  double neg_log_likelihood = 0.0;
  std::array<Interval, 3> ci_95{};  // xi, kappa, sigma
  std::size_t iterations = 0;
};

double gev_cdf(double y, double xi, double kappa, double sigma);
double gev_quantile(double p, double xi, double kappa, double sigma);
// +inf outside the support or for sigma <= 0.
double gev_nll(std::span<const double> data, double xi, double kappa, double sigma);

// Maximum likelihood fit; needs at least 50 maxima that are not all equal.
// Starts from the Gumbel profile MLE, then Nelder-Mead and a Newton polish.
// 95% intervals from the inverse observed information.
GevFit gev_fit(std::span<const double> maxima);

}  // namespace heterodyn
