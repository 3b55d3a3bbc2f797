#include "heterodyn/gev.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "heterodyn/error.hpp"

namespace heterodyn {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// log1p(xi z) / xi, continued through xi = 0 by its series.
double reduced_log(double xi, double z) {
  if (std::abs(xi) < 1e-6) return z - 0.5 * xi * z * z + xi * xi * z * z * z / 3.0;
  return std::log1p(xi * z) / xi;
}

}  // namespace

double gev_cdf(double y, double xi, double kappa, double sigma) {
  const double z = (y - kappa) / sigma;
  if (1.0 + xi * z <= 0.0) return xi > 0.0 ? 0.0 : 1.0;
  return std::exp(-std::exp(-reduced_log(xi, z)));
}

double gev_quantile(double p, double xi, double kappa, double sigma) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("gev_quantile: p must lie in (0, 1)");
  const double w = -std::log(-std::log(p));  // Gumbel quantile
  if (std::abs(xi) < 1e-12) return kappa + sigma * w;
  return kappa + sigma * std::expm1(xi * w) / xi;
}

double gev_nll(std::span<const double> data, double xi, double kappa, double sigma) {
  if (!(sigma > 0.0)) return kInf;
  double s = static_cast<double>(data.size()) * std::log(sigma);
  for (double y : data) {
    const double z = (y - kappa) / sigma;
    if (1.0 + xi * z <= 0.0) return kInf;
    const double h = reduced_log(xi, z);
    s += (1.0 + xi) * h + std::exp(-h);
  }
  return s;
}

namespace {

struct GumbelStart {
  double kappa, sigma;
};

// Profile MLE of the Gumbel sub-model: sigma solves
// sigma = mean(y) - sum y e^{-y/sigma} / sum e^{-y/sigma}, then kappa in closed form.
GumbelStart gumbel_profile(std::span<const double> y) {
  const double n = static_cast<double>(y.size());
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double var = 0.0;
  for (double v : y) var += (v - mean) * (v - mean);
  var /= n;
  const double ymax = *std::max_element(y.begin(), y.end());
  auto eq = [&](double s) {
    double num = 0.0, den = 0.0;
    for (double v : y) {
      const double e = std::exp(-(v - ymax) / s);
      num += v * e;
      den += e;
    }
    return s - mean + num / den;
  };
  double s0 = std::sqrt(6.0 * var) / M_PI;
  double lo = s0, hi = s0;
  while (eq(lo) > 0.0 && lo > 1e-12 * s0) lo *= 0.5;
  while (eq(hi) < 0.0 && hi < 1e12 * s0) hi *= 2.0;
  double sigma = s0;
  if (eq(lo) <= 0.0 && eq(hi) >= 0.0) {
    boost::uintmax_t iters = 200;
    const auto r = boost::math::tools::toms748_solve(eq, lo, hi,
                                                     boost::math::tools::eps_tolerance<double>(50), iters);
    sigma = 0.5 * (r.first + r.second);
  }
  double acc = 0.0;
  for (double v : y) acc += std::exp(-(v - ymax) / sigma);
  const double kappa = ymax - sigma * std::log(acc / n);
  return {kappa, sigma};
}

using Vec3 = Eigen::Vector3d;

// Nelder-Mead on (xi, kappa, log sigma).
template <typename F>
Vec3 nelder_mead(F&& f, Vec3 x0, const Vec3& step, std::size_t max_iter, std::size_t& used) {
  std::array<Vec3, 4> p;
  std::array<double, 4> v;
  p[0] = x0;
  for (int k = 0; k < 3; ++k) {
    p[k + 1] = x0;
    p[k + 1][k] += step[k];
  }
  for (int k = 0; k < 4; ++k) v[k] = f(p[k]);
  std::size_t it = 0;
  for (; it < max_iter; ++it) {
    std::array<int, 4> idx = {0, 1, 2, 3};
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return v[a] < v[b]; });
    const int best = idx[0], worst = idx[3], second = idx[2];
    if (std::abs(v[worst] - v[best]) <= 1e-12 * (1.0 + std::abs(v[best]))) break;
    Vec3 c = Vec3::Zero();
    for (int k = 0; k < 3; ++k) c += p[idx[k]];
    c /= 3.0;
    const Vec3 xr = c + (c - p[worst]);
    const double fr = f(xr);
    if (fr < v[best]) {
      const Vec3 xe = c + 2.0 * (c - p[worst]);
      const double fe = f(xe);
      if (fe < fr) {
        p[worst] = xe;
        v[worst] = fe;
      } else {
        p[worst] = xr;
        v[worst] = fr;
      }
    } else if (fr < v[second]) {
      p[worst] = xr;
      v[worst] = fr;
    } else {
      const bool outside = fr < v[worst];
      const Vec3 xc = outside ? Vec3(c + 0.5 * (xr - c)) : Vec3(c + 0.5 * (p[worst] - c));
      const double fc = f(xc);
      if (fc < std::min(fr, v[worst])) {
        p[worst] = xc;
        v[worst] = fc;
      } else {
        for (int k = 1; k < 4; ++k) {
          p[idx[k]] = p[best] + 0.5 * (p[idx[k]] - p[best]);
          v[idx[k]] = f(p[idx[k]]);
        }
      }
    }
  }
  used = it;
  const auto b = std::min_element(v.begin(), v.end()) - v.begin();
  return p[b];
}

template <typename F>
Eigen::Matrix3d numeric_hessian(F&& f, const Vec3& x, const Vec3& h) {
  Eigen::Matrix3d H;
  const double f0 = f(x);
  for (int i = 0; i < 3; ++i) {
    for (int j = i; j < 3; ++j) {
      if (i == j) {
        Vec3 a = x, b = x;
        a[i] += h[i];
        b[i] -= h[i];
        H(i, i) = (f(a) - 2.0 * f0 + f(b)) / (h[i] * h[i]);
      } else {
        Vec3 pp = x, pm = x, mp = x, mm = x;
        pp[i] += h[i], pp[j] += h[j];
        pm[i] += h[i], pm[j] -= h[j];
        mp[i] -= h[i], mp[j] += h[j];
        mm[i] -= h[i], mm[j] -= h[j];
        H(i, j) = H(j, i) = (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * h[i] * h[j]);
      }
    }
  }
  return H;
}

template <typename F>
Vec3 numeric_gradient(F&& f, const Vec3& x, const Vec3& h) {
  Vec3 g;
  for (int i = 0; i < 3; ++i) {
    Vec3 a = x, b = x;
    a[i] += h[i];
    b[i] -= h[i];
    g[i] = (f(a) - f(b)) / (2.0 * h[i]);
  }
  return g;
}

}  // namespace

GevFit gev_fit(std::span<const double> maxima) {
  if (maxima.size() < 50) throw DegenerateData("gev_fit needs at least 50 maxima");
  const auto [mn, mx] = std::minmax_element(maxima.begin(), maxima.end());
  if (*mn == *mx) throw DegenerateData("gev_fit: all maxima are equal");
  for (double v : maxima)
    if (!std::isfinite(v)) throw InputError("gev_fit: non-finite maximum");

  const GumbelStart g0 = gumbel_profile(maxima);
  auto f_log = [&](const Vec3& p) { return gev_nll(maxima, p[0], p[1], std::exp(p[2])); };
  auto f_nat = [&](const Vec3& p) { return gev_nll(maxima, p[0], p[1], p[2]); };

  // Two Nelder-Mead passes (restart guards against premature collapse).
  std::size_t used = 0, total = 0;
  Vec3 x{0.0, g0.kappa, std::log(g0.sigma)};
  const Vec3 step{0.1, 0.3 * g0.sigma, 0.2};
  x = nelder_mead(f_log, x, step, 5000, used);
  total += used;
  x = nelder_mead(f_log, x, 0.1 * step, 5000, used);
  total += used;

  // Newton polish in natural coordinates with step halving.
  Vec3 th{x[0], x[1], std::exp(x[2])};
  const Vec3 hd{1e-4, 1e-4 * th[2], 1e-4 * th[2]};
  for (int it = 0; it < 20; ++it) {
    const Eigen::Matrix3d H = numeric_hessian(f_nat, th, hd);
    const Vec3 g = numeric_gradient(f_nat, th, hd);
    Eigen::LDLT<Eigen::Matrix3d> ldlt(H);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) break;
    Vec3 d = ldlt.solve(g);
    const double f0 = f_nat(th);
    double t = 1.0;
    bool moved = false;
    for (int k = 0; k < 30; ++k, t *= 0.5) {
      const Vec3 cand = th - t * d;
      if (f_nat(cand) <= f0) {
        th = cand;
        moved = true;
        break;
      }
    }
    ++total;
    if (!moved || (t * d).norm() < 1e-10 * (1.0 + th.norm())) break;
  }

  GevFit fit;
  fit.xi = th[0];
  fit.kappa = th[1];
  fit.sigma = th[2];
  fit.neg_log_likelihood = f_nat(th);
  fit.iterations = total;
  if (!std::isfinite(fit.neg_log_likelihood) || !(fit.sigma > 0.0))
    throw ConvergenceError("gev_fit: optimiser left the parameter domain", fit.neg_log_likelihood);

  const Eigen::Matrix3d H = numeric_hessian(f_nat, th, Vec3{1e-4, 1e-4 * fit.sigma, 1e-4 * fit.sigma});
  Eigen::LDLT<Eigen::Matrix3d> ldlt(H);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
    throw ConvergenceError("gev_fit: observed information is not positive definite", 0.0);
  const Eigen::Matrix3d cov = ldlt.solve(Eigen::Matrix3d::Identity());
  for (int k = 0; k < 3; ++k) {
    const double se = std::sqrt(std::max(cov(k, k), 0.0));
    fit.ci_95[k] = {th[k] - 1.959963984540054 * se, th[k] + 1.959963984540054 * se};
  }
  return fit;
}

}  // namespace heterodyn
