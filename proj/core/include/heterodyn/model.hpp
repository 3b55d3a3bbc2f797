#pragma once

#include <optional>
#include <string>
#include <vector>

namespace heterodyn {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double length() const { return hi - lo; }
  double mid() const { return 0.5 * (lo + hi); }
  bool contains(double x) const { return x >= lo && x <= hi; }
  bool contains(const Interval& other) const { return other.lo >= lo && other.hi <= hi; }
};

// ---------------------------------------------------------------------------
// Deterministic map
// ---------------------------------------------------------------------------

// Leverage-model parameters: gamma0 (leverage elasticity), omega, c and the
// exogenous volatility sigma_eps_bar.
struct MapParams {
  double gamma0 = 15.969;
  double omega = 0.22;
  double c = 0.6;
  double sigma_eps_bar = 2.7e-5;
};

// `finance` is the leverage map; `tent` and `logistic` are test maps on [0,1]
// with T(0) = T(1) = base and T(1/2) = peak.
enum class MapKind { finance, tent, logistic };

// A(u) = (1 + gamma0 u) / [omega (1 - c u)^2 + S (1 - u)^-2 (1 + gamma0 u)^2]^(1/2).
// Throws DomainError for u outside [0, 1) or a non-positive bracket.
double eval_A(double u, const MapParams& params);

struct Geometry {
  double critical_point = 0.0;  // location of the maximum of T on [0, 1)
  double Delta = 0.0;           // T(critical_point)
  double Gamma = 0.0;           // 1 - Delta
  double q = 0.0;               // T(0)
  bool interior_max = false;    // false when the maximiser sits on the search boundary
  Interval I_Gamma;             // [T(1 - Gamma/2) / 2, 1 - Gamma/2]
  Interval confinement;         // [-Gamma/2, 1 - Gamma/2]
  Interval extended_domain;     // [-Gamma, 1]
};

class UnimodalMap {
 public:
  static UnimodalMap finance(const MapParams& params);
  static UnimodalMap tent(double peak, double base);
  static UnimodalMap logistic(double peak, double base);

  MapKind kind() const { return kind_; }
  const MapParams& params() const { return params_; }
  double peak() const { return peak_; }
  double base() const { return base_; }
  const Geometry& geometry() const { return geometry_; }

  // Slope of the affine decreasing extension used on [-Gamma, 0).
  double left_slope() const { return left_slope_; }

  // T on the extended domain [-Gamma, 1); DomainError outside.
  double operator()(double phi) const;

  // T restricted to [0, 1), no domain check.
  double on_unit(double phi) const;

 private:
  UnimodalMap(MapKind kind, const MapParams& params, double peak, double base);
  void compute_geometry();

  MapKind kind_;
  MapParams params_;
  double peak_ = 0.0;
  double base_ = 0.0;
  double left_slope_ = 0.0;
  Geometry geometry_;
};

// Same as map(phi) for the leverage family; kept for callers that carry the
// parameters and the geometry separately.
double eval_T(double phi, const MapParams& params, const Geometry& geometry);

// ---------------------------------------------------------------------------
// Noise laws
// ---------------------------------------------------------------------------

enum class ProfileKind { constant, affine };

// State-dependent amplitude x -> intercept + slope * x (slope is zero for
// `constant`). Used for both sigma (dynamic) and s (observational).
struct Profile {
  ProfileKind kind = ProfileKind::constant;
  double intercept = 0.0;
  double slope = 0.0;

  static Profile constant(double value) { return {ProfileKind::constant, value, 0.0}; }
  static Profile affine(double intercept, double slope) {
    return {ProfileKind::affine, intercept, slope};
  }

  double operator()(double x) const { return intercept + slope * x; }
  double max_on(const Interval& iv) const;
  double min_on(const Interval& iv) const;
  bool is_constant() const { return kind == ProfileKind::constant || slope == 0.0; }
};

// Smooth bump chi_a: 1 on |y| <= (1-upsilon) a, exp(1 - 1/(1-t^2)) on the
// shoulders, 0 beyond a.
double bump(double y, double a, double upsilon);

class DynNoise {
 public:
  DynNoise(double a, double upsilon, Profile sigma, const Geometry& geometry);

  double a() const { return a_; }
  double upsilon() const { return upsilon_; }
  const Profile& sigma() const { return sigma_; }
  double c_a() const { return c_a_; }
  double sigma_max() const { return sigma_max_; }
  double sigma_min_on_support() const { return sigma_min_on_support_; }

  double chi(double eta) const { return bump(eta, a_, upsilon_); }
  // g(eta) = c_a chi_a(eta) exp(-eta^2 / 2).
  double density(double eta) const;

 private:
  double a_;
  double upsilon_;
  Profile sigma_;
  double c_a_ = 0.0;
  double sigma_max_ = 0.0;
  double sigma_min_on_support_ = 0.0;
};

enum class PsiKind { uniform, triangular };

// Observational noise s(x) * eps with eps ~ psi on [-epsilon/2, epsilon/2].
class ObsNoise {
 public:
  ObsNoise(Profile s, PsiKind psi, double epsilon, const Geometry& geometry);

  const Profile& s() const { return s_; }
  PsiKind psi_kind() const { return psi_; }
  double epsilon() const { return epsilon_; }
  double half_width() const { return 0.5 * epsilon_; }
  double s_max() const { return s_max_; }

  double psi_pdf(double e) const;
  double psi_cdf(double e) const;
  // Integral of |eps| dpsi(eps).
  double psi_mean_abs() const;
  // psi-probability of the interval [lo, hi].
  double psi_mass(double lo, double hi) const { return psi_cdf(hi) - psi_cdf(lo); }
  // Maps a uniform (u1, u2) pair to a psi draw.
  double psi_quantile_pair(double u1, double u2) const;

 private:
  Profile s_;
  PsiKind psi_;
  double epsilon_;
  double s_max_ = 0.0;
};

// ---------------------------------------------------------------------------
// Full configuration
// ---------------------------------------------------------------------------

// Flat description of a configuration, mirrors the key-value file.
struct ModelSpec {
  MapKind map_kind = MapKind::finance;
  MapParams map;
  double map_peak = 0.9;
  double map_base = 0.1;
  double a = 1.6;
  double upsilon = 0.5;
  Profile sigma = Profile::constant(0.02);
  Profile s = Profile::constant(0.01);
  PsiKind psi = PsiKind::uniform;
  double epsilon = 0.1;
  std::optional<double> alpha;  // documentation-only
};

class ModelConfig {
 public:
  explicit ModelConfig(const ModelSpec& spec);

  const ModelSpec& spec() const { return spec_; }
  const UnimodalMap& map() const { return map_; }
  const Geometry& geometry() const { return map_.geometry(); }
  const DynNoise& dyn() const { return dyn_; }
  const ObsNoise& obs() const { return obs_; }

 private:
  ModelSpec spec_;
  UnimodalMap map_;
  DynNoise dyn_;
  ObsNoise obs_;
};

UnimodalMap make_map(const ModelSpec& spec);

// Largest a allowed by (1/sigma_max) min{Gamma/2, q/2, T(1 - Gamma/2)/2};
// +inf when sigma vanishes on the extended domain.
double max_noise_amplitude(const UnimodalMap& map, const Profile& sigma);

double eval_g(double eta, const DynNoise& dyn);

// p(x, y) = g((y - T(x)) / sigma(x)) / sigma(x).
double eval_kernel_p(double x, double y, const ModelConfig& config);

// Likelihood of observing z from latent x: psi'((z - x)/s(x)) / s(x) on the band
// |z - x| <= s(x) epsilon / 2.
double eval_likelihood(double z, double x, const ModelConfig& config);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
  bool dynamics = true;  // false for checks that concern only the observational noise
};

struct ValidationReport {
  std::vector<CheckResult> checks;

  bool valid() const;
  // All checks on the map and the dynamic noise (everything the transfer
  // operator depends on) pass.
  bool dynamics_valid() const;
  const CheckResult* find(const std::string& name) const;
};

ValidationReport validate_config(const ModelConfig& config);

}  // namespace heterodyn
