#include "heterodyn/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "heterodyn/error.hpp"
#include "heterodyn/quadrature.hpp"

namespace heterodyn {

namespace {

constexpr double kSearchHi = 1.0 - 1e-6;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

bool all_finite(std::initializer_list<double> xs) {
  return std::all_of(xs.begin(), xs.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace

double eval_A(double u, const MapParams& p) {
  if (!(u >= 0.0 && u < 1.0)) throw DomainError("eval_A: u must lie in [0, 1), got " + fmt(u));
  const double num = 1.0 + p.gamma0 * u;
  const double lin = 1.0 - p.c * u;
  const double inv = 1.0 / (1.0 - u);
  const double bracket = p.omega * lin * lin + p.sigma_eps_bar * inv * inv * num * num;
  if (!(bracket > 0.0)) throw DomainError("eval_A: non-positive bracket at u = " + fmt(u));
  return num / std::sqrt(bracket);
}

// ---------------------------------------------------------------------------
// UnimodalMap
// ---------------------------------------------------------------------------

UnimodalMap::UnimodalMap(MapKind kind, const MapParams& params, double peak, double base)
    : kind_(kind), params_(params), peak_(peak), base_(base) {
  compute_geometry();
}

UnimodalMap UnimodalMap::finance(const MapParams& params) {
  if (!all_finite({params.gamma0, params.omega, params.c, params.sigma_eps_bar}))
    throw ConfigError("map parameters must be finite");
  if (!(params.gamma0 > 0.0)) throw ConfigError("gamma0 must be positive");
  if (!(params.omega > 0.0)) throw ConfigError("omega must be positive");
  if (params.sigma_eps_bar < 0.0) throw ConfigError("sigma_eps_bar must be nonnegative");
  return UnimodalMap(MapKind::finance, params, 0.0, 0.0);
}

UnimodalMap UnimodalMap::tent(double peak, double base) {
  if (!all_finite({peak, base}) || !(peak > base)) throw ConfigError("tent map needs peak > base");
  return UnimodalMap(MapKind::tent, MapParams{}, peak, base);
}

UnimodalMap UnimodalMap::logistic(double peak, double base) {
  if (!all_finite({peak, base}) || !(peak > base))
    throw ConfigError("logistic map needs peak > base");
  return UnimodalMap(MapKind::logistic, MapParams{}, peak, base);
}

double UnimodalMap::on_unit(double phi) const {
  switch (kind_) {
    case MapKind::finance: {
      const double A = eval_A(phi, params_);
      return (A - 1.0) / (params_.gamma0 + params_.c * A);
    }
    case MapKind::tent:
      return base_ + (peak_ - base_) * (1.0 - std::abs(2.0 * phi - 1.0));
    case MapKind::logistic:
      return base_ + (peak_ - base_) * 4.0 * phi * (1.0 - phi);
  }
  return 0.0;
}

double UnimodalMap::operator()(double phi) const {
  const double G = geometry_.Gamma;
  if (!(phi >= -G && phi < 1.0))
    throw DomainError("T: argument " + fmt(phi) + " outside [-Gamma, 1)");
  if (phi >= 0.0) return on_unit(phi);
  return geometry_.q + left_slope_ * phi;
}

void UnimodalMap::compute_geometry() {
  // Golden-section search for the maximiser on [0, 1 - 1e-6].
  const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double lo = 0.0, hi = kSearchHi;
  double x1 = hi - inv_phi * (hi - lo), x2 = lo + inv_phi * (hi - lo);
  double f1 = on_unit(x1), f2 = on_unit(x2);
  while (hi - lo > 1e-12) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = on_unit(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = on_unit(x1);
    }
  }
  Geometry& g = geometry_;
  g.critical_point = 0.5 * (lo + hi);
  g.Delta = on_unit(g.critical_point);
  g.Gamma = 1.0 - g.Delta;
  g.q = on_unit(0.0);
  // A maximiser pinned to either end of the search window is not a critical point.
  g.interior_max = g.critical_point > 1e-8 && g.critical_point < kSearchHi - 1e-8 &&
                   g.Delta > on_unit(0.0) && g.Delta > on_unit(kSearchHi);

  const double G = std::max(g.Gamma, 0.0);
  g.confinement = {-0.5 * G, 1.0 - 0.5 * G};
  g.extended_domain = {-G, 1.0};
  if (G > 0.0) {
    g.I_Gamma = {0.5 * on_unit(1.0 - 0.5 * G), 1.0 - 0.5 * G};
  } else {
    g.I_Gamma = {0.0, 1.0};
  }

  // Affine decreasing extension on [-Gamma, 0) matching T(0); the slope is the
  // mirrored one-sided derivative at 0+, flattened when needed so T(-Gamma) < Delta.
  const double h = 1e-6;
  const double d0 = (-3.0 * on_unit(0.0) + 4.0 * on_unit(h) - on_unit(2.0 * h)) / (2.0 * h);
  double m = -std::abs(d0);
  if (G > 0.0 && g.Delta > g.q) m = std::max(m, -0.9 * (g.Delta - g.q) / G);
  left_slope_ = m;
}

double eval_T(double phi, const MapParams& params, const Geometry& geometry) {
  const double G = geometry.Gamma;
  if (!(phi >= -G && phi < 1.0))
    throw DomainError("eval_T: argument " + fmt(phi) + " outside [-Gamma, 1)");
  if (phi < 0.0) {
    // Same extension rule as UnimodalMap, recomputed from the formula.
    const UnimodalMap map = UnimodalMap::finance(params);
    return map(phi);
  }
  const double A = eval_A(phi, params);
  return (A - 1.0) / (params.gamma0 + params.c * A);
}

UnimodalMap make_map(const ModelSpec& spec) {
  switch (spec.map_kind) {
    case MapKind::finance:
      return UnimodalMap::finance(spec.map);
    case MapKind::tent:
      return UnimodalMap::tent(spec.map_peak, spec.map_base);
    case MapKind::logistic:
      return UnimodalMap::logistic(spec.map_peak, spec.map_base);
  }
  throw ConfigError("unknown map kind");
}

// ---------------------------------------------------------------------------
// Noise
// ---------------------------------------------------------------------------

double Profile::max_on(const Interval& iv) const { return std::max((*this)(iv.lo), (*this)(iv.hi)); }
double Profile::min_on(const Interval& iv) const { return std::min((*this)(iv.lo), (*this)(iv.hi)); }

double bump(double y, double a, double upsilon) {
  const double ay = std::abs(y);
  if (ay >= a) return 0.0;
  const double flat = (1.0 - upsilon) * a;
  if (ay <= flat) return 1.0;
  const double t = (ay - flat) / (upsilon * a);
  return std::exp(1.0 - 1.0 / (1.0 - t * t));
}

DynNoise::DynNoise(double a, double upsilon, Profile sigma, const Geometry& geometry)
    : a_(a), upsilon_(upsilon), sigma_(sigma) {
  if (!(std::isfinite(a) && a > 0.0)) throw ConfigError("a must be positive");
  if (!(upsilon > 0.0 && upsilon < 1.0)) throw ConfigError("upsilon must lie in (0, 1)");
  if (!all_finite({sigma.intercept, sigma.slope})) throw ConfigError("sigma must be finite");

  // Flat part in closed form, shoulders by adaptive quadrature.
  const double flat = (1.0 - upsilon) * a;
  const double core = std::sqrt(2.0 * M_PI) * std::erf(flat / std::sqrt(2.0));
  const double shoulder = quad::adaptive(
      [&](double eta) { return bump(eta, a, upsilon) * std::exp(-0.5 * eta * eta); }, flat, a,
      1e-12);
  c_a_ = 1.0 / (core + 2.0 * shoulder);
  sigma_max_ = sigma.max_on(geometry.extended_domain);
  sigma_min_on_support_ = sigma.min_on(geometry.I_Gamma);
}

double DynNoise::density(double eta) const { return c_a_ * chi(eta) * std::exp(-0.5 * eta * eta); }

ObsNoise::ObsNoise(Profile s, PsiKind psi, double epsilon, const Geometry& geometry)
    : s_(s), psi_(psi), epsilon_(epsilon) {
  if (!(std::isfinite(epsilon) && epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  if (!all_finite({s.intercept, s.slope})) throw ConfigError("s must be finite");
  s_max_ = std::max(std::abs(s(geometry.extended_domain.lo)), std::abs(s(geometry.extended_domain.hi)));
}

double ObsNoise::psi_pdf(double e) const {
  const double h = half_width();
  if (std::abs(e) > h) return 0.0;
  if (psi_ == PsiKind::uniform) return 1.0 / epsilon_;
  return (1.0 - std::abs(e) / h) / h;
}

double ObsNoise::psi_cdf(double e) const {
  const double h = half_width();
  if (e <= -h) return 0.0;
  if (e >= h) return 1.0;
  if (psi_ == PsiKind::uniform) return (e + h) / epsilon_;
  const double r = 1.0 - std::abs(e) / h;  // distance to the nearer end, in units of h
  return e < 0.0 ? 0.5 * r * r : 1.0 - 0.5 * r * r;
}

double ObsNoise::psi_mean_abs() const {
  return psi_ == PsiKind::uniform ? 0.5 * half_width() : half_width() / 3.0;
}

double ObsNoise::psi_quantile_pair(double u1, double u2) const {
  const double h = half_width();
  if (psi_ == PsiKind::uniform) return h * (2.0 * u1 - 1.0);
  return h * (u1 + u2 - 1.0);
}

ModelConfig::ModelConfig(const ModelSpec& spec)
    : spec_(spec),
      map_(make_map(spec)),
      dyn_(spec.a, spec.upsilon, spec.sigma, map_.geometry()),
      obs_(spec.s, spec.psi, spec.epsilon, map_.geometry()) {}

double max_noise_amplitude(const UnimodalMap& map, const Profile& sigma) {
  const Geometry& g = map.geometry();
  const double smax = sigma.max_on(g.extended_domain);
  if (!(g.Gamma > 0.0)) return 0.0;
  const double room = std::min({0.5 * g.Gamma, 0.5 * g.q, 0.5 * map.on_unit(1.0 - 0.5 * g.Gamma)});
  if (!(smax > 0.0)) return room > 0.0 ? std::numeric_limits<double>::infinity() : room;
  return room / smax;
}

double eval_g(double eta, const DynNoise& dyn) { return dyn.density(eta); }

double eval_kernel_p(double x, double y, const ModelConfig& config) {
  const double sig = config.dyn().sigma()(x);
  if (!(sig > 0.0)) throw DomainError("kernel: sigma(x) must be positive at x = " + fmt(x));
  return config.dyn().density((y - config.map()(x)) / sig) / sig;
}

double eval_likelihood(double z, double x, const ModelConfig& config) {
  const double s = config.obs().s()(x);
  if (!(s > 0.0)) throw DomainError("likelihood: s(x) must be positive at x = " + fmt(x));
  return config.obs().psi_pdf((z - x) / s) / s;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

bool ValidationReport::valid() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

bool ValidationReport::dynamics_valid() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const CheckResult& c) { return !c.dynamics || c.passed; });
}

const CheckResult* ValidationReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

ValidationReport validate_config(const ModelConfig& config) {
  ValidationReport rep;
  const UnimodalMap& T = config.map();
  const Geometry& g = config.geometry();
  const DynNoise& dyn = config.dyn();
  const ObsNoise& obs = config.obs();

  rep.checks.push_back({"delta_below_one", g.interior_max && g.Delta < 1.0,
                        "Delta = " + fmt(g.Delta) + ", critical point = " + fmt(g.critical_point) +
                            (g.interior_max ? "" : " (no interior maximum)"),
                        true});

  {
    const double T0 = T.on_unit(0.0), Tc = T.on_unit(g.critical_point);
    const bool ok = std::abs(T0 - g.q) <= 1e-10 && std::abs(Tc - g.Delta) <= 1e-10 &&
                    std::abs(1.0 - g.Delta - g.Gamma) <= 1e-10 &&
                    g.confinement.contains(g.I_Gamma) && g.extended_domain.contains(g.confinement);
    rep.checks.push_back({"geometry_consistent", ok,
                          "I_Gamma = [" + fmt(g.I_Gamma.lo) + ", " + fmt(g.I_Gamma.hi) + "]", true});
  }

  {
    const double bound = max_noise_amplitude(T, dyn.sigma());
    const bool ok = bound > 0.0 && dyn.a() <= bound * (1.0 + 1e-12);
    rep.checks.push_back(
        {"noise_amplitude_bound", ok, "a = " + fmt(dyn.a()) + ", bound = " + fmt(bound), true});
  }

  {
    const double sobs = obs.s_max() * obs.half_width();
    const bool nonneg = obs.s().min_on(g.extended_domain) >= 0.0;
    const bool ok = nonneg && sobs < 0.5 * g.Gamma;
    rep.checks.push_back({"observation_noise_bound", ok,
                          "s_max * epsilon / 2 = " + fmt(sobs) + ", Gamma / 2 = " + fmt(0.5 * g.Gamma),
                          false});
  }

  {
    bool ok = g.Gamma > 0.0;
    double left = std::numeric_limits<double>::quiet_NaN();
    if (ok) {
      left = T(-g.Gamma);
      ok = left < g.Delta && std::abs(T(-1e-14) - T(0.0)) <= 1e-10;
    }
    rep.checks.push_back({"left_extension", ok,
                          "T(-Gamma) = " + fmt(left) + ", slope = " + fmt(T.left_slope()), true});
  }

  {
    const double smin_ext = dyn.sigma().min_on(g.extended_domain);
    const bool ok = dyn.sigma_min_on_support() > 0.0 && smin_ext >= 0.0;
    rep.checks.push_back({"sigma_positive_on_support", ok,
                          "min sigma on I_Gamma = " + fmt(dyn.sigma_min_on_support()), true});
  }

  {
    // Forward-difference sign scan on 10^4 points of [0, 1 - 1e-6].
    constexpr int kN = 10000;
    int changes = 0, prev = 0, first = 0;
    double last = T.on_unit(0.0);
    for (int i = 1; i < kN; ++i) {
      const double x = kSearchHi * i / (kN - 1);
      const double v = T.on_unit(x);
      const int sgn = (v > last) - (v < last);
      last = v;
      if (sgn == 0) continue;
      if (first == 0) first = sgn;
      if (prev != 0 && sgn != prev) ++changes;
      prev = sgn;
    }
    const bool ok = changes == 1 && first == 1;
    rep.checks.push_back({"unimodal", ok, "derivative sign changes = " + std::to_string(changes), true});
  }

  {
    bool ok = g.Gamma > 0.0;
    double worst = 0.0;
    if (ok) {
      constexpr int kN = 4001;
      const Interval& C = g.confinement;
      for (int i = 0; i < kN && ok; ++i) {
        const double x = C.lo + C.length() * i / (kN - 1);
        const double tx = T(x), spread = dyn.a() * std::abs(dyn.sigma()(x));
        const double over = std::max(C.lo - (tx - spread), (tx + spread) - C.hi);
        worst = std::max(worst, over);
        if (over > 1e-12) ok = false;
      }
    }
    rep.checks.push_back({"confinement", ok, "largest excursion = " + fmt(worst), true});
  }

  return rep;
}

}  // namespace heterodyn
