#include "heterodyn/transfer.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "heterodyn/error.hpp"
#include "heterodyn/parallel.hpp"
#include "heterodyn/quadrature.hpp"

namespace heterodyn {

// ---------------------------------------------------------------------------
// KernelMatrix
// ---------------------------------------------------------------------------

KernelMatrix KernelMatrix::plain(Grid grid, std::vector<double> entries) {
  const std::size_t n = grid.n;
  if (entries.size() != n * n) throw InputError("kernel entries must be n x n");
  auto first = std::make_shared<std::vector<std::size_t>>(n, 0);
  auto last = std::make_shared<std::vector<std::size_t>>(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = entries.data() + i * n;
    std::size_t f = 0, l = n;
    while (f < n && row[f] == 0.0) ++f;
    while (l > f && row[l - 1] == 0.0) --l;
    (*first)[i] = f;
    (*last)[i] = l;
  }
  KernelMatrix k;
  k.grid_ = grid;
  k.kind_ = KernelKind::plain;
  k.p_ = std::make_shared<const std::vector<double>>(std::move(entries));
  k.first_ = std::move(first);
  k.last_ = std::move(last);
  return k;
}

std::complex<double> KernelMatrix::row_factor(std::size_t i) const {
  return kind_ == KernelKind::plain ? std::complex<double>(1.0, 0.0) : factor_[i];
}

std::complex<double> KernelMatrix::entry(std::size_t i, std::size_t j) const {
  return row_factor(i) * plain_entry(i, j);
}

KernelMatrix KernelMatrix::with_hole(std::vector<double> pi) const {
  if (kind_ != KernelKind::plain) throw InputError("hole operators are built from a plain matrix");
  if (pi.size() != grid_.n) throw GridMismatch("hole: pi has the wrong length");
  KernelMatrix k = *this;
  k.kind_ = KernelKind::hole;
  k.factor_.resize(pi.size());
  for (std::size_t i = 0; i < pi.size(); ++i) k.factor_[i] = {1.0 - pi[i], 0.0};
  k.pi_ = std::move(pi);
  return k;
}

KernelMatrix KernelMatrix::with_twist(std::vector<double> pi, double lambda) const {
  if (kind_ != KernelKind::plain) throw InputError("twisted operators are built from a plain matrix");
  if (pi.size() != grid_.n) throw GridMismatch("twist: pi has the wrong length");
  KernelMatrix k = *this;
  k.kind_ = KernelKind::twisted;
  k.lambda_ = lambda;
  const double lr = std::fmod(lambda, 2.0 * M_PI);
  const double cr = std::cos(lr), sr = std::sin(lr);
  k.factor_.resize(pi.size());
  for (std::size_t i = 0; i < pi.size(); ++i) {
    // E_psi exp(i lambda 1_B) = 1 - pi + pi e^{i lambda}.
    k.factor_[i] = lr == 0.0 ? std::complex<double>(1.0, 0.0)
                             : std::complex<double>(1.0 - pi[i] * (1.0 - cr), pi[i] * sr);
  }
  k.pi_ = std::move(pi);
  return k;
}

void KernelMatrix::push(std::span<const double> in, std::span<double> out) const {
  if (kind_ == KernelKind::twisted) throw InputError("real push on a twisted operator");
  const std::size_t n = grid_.n;
  if (in.size() != n || out.size() != n) throw GridMismatch("push: size mismatch");
  std::fill(out.begin(), out.end(), 0.0);
  const double* P = p_->data();
  for (std::size_t i = 0; i < n; ++i) {
    double m = in[i];
    if (kind_ == KernelKind::hole) m *= factor_[i].real();
    if (m == 0.0) continue;
    const double* row = P + i * n;
    for (std::size_t j = (*first_)[i]; j < (*last_)[i]; ++j) out[j] += m * row[j];
  }
}

void KernelMatrix::push(std::span<const std::complex<double>> in,
                        std::span<std::complex<double>> out) const {
  const std::size_t n = grid_.n;
  if (in.size() != n || out.size() != n) throw GridMismatch("push: size mismatch");
  std::fill(out.begin(), out.end(), std::complex<double>(0.0, 0.0));
  const double* P = p_->data();
  for (std::size_t i = 0; i < n; ++i) {
    const std::complex<double> m = in[i] * row_factor(i);
    if (m == 0.0) continue;
    const double* row = P + i * n;
    for (std::size_t j = (*first_)[i]; j < (*last_)[i]; ++j) out[j] += m * row[j];
  }
}

void KernelMatrix::pull(std::span<const double> f, std::span<double> out) const {
  if (kind_ == KernelKind::twisted) throw InputError("real pull on a twisted operator");
  const std::size_t n = grid_.n;
  if (f.size() != n || out.size() != n) throw GridMismatch("pull: size mismatch");
  const double* P = p_->data();
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = P + i * n;
    double s = 0.0;
    for (std::size_t j = (*first_)[i]; j < (*last_)[i]; ++j) s += row[j] * f[j];
    out[i] = kind_ == KernelKind::hole ? s * factor_[i].real() : s;
  }
}

// ---------------------------------------------------------------------------
// Assembly
// ---------------------------------------------------------------------------

Grid default_ulam_grid(const ModelConfig& config, std::size_t n_cells) {
  const Geometry& g = config.geometry();
  const double pad = config.dyn().a() * config.dyn().sigma_max();
  return Grid({g.I_Gamma.lo - pad, g.I_Gamma.hi + pad}, n_cells);
}

KernelMatrix build_ulam(const ModelConfig& config, std::size_t n_cells) {
  if (n_cells < 16) throw InputError("build_ulam needs at least 16 cells");
  const ValidationReport rep = validate_config(config);
  if (!rep.dynamics_valid()) {
    std::string failed;
    for (const auto& c : rep.checks)
      if (c.dynamics && !c.passed) failed += (failed.empty() ? "" : ", ") + c.name;
    throw ConfigError("configuration fails: " + failed);
  }
  return build_ulam(config, default_ulam_grid(config, n_cells));
}

KernelMatrix build_ulam(const ModelConfig& config, const Grid& grid) {
  const std::size_t n = grid.n;
  const DynNoise& dyn = config.dyn();
  const double a = dyn.a(), flat = (1.0 - dyn.upsilon()) * a;
  std::vector<double> P(n * n, 0.0);

  parallel_for(n, [&](std::size_t i) {
    double* row = P.data() + i * n;
    const double x = grid.center(i);
    const double tx = config.map()(x);
    const double sig = dyn.sigma()(x);
    if (!(sig > 0.0)) {
      row[grid.cell_of(tx)] = 1.0;
      return;
    }
    // Breakpoints of g((y - T x)/sigma): support ends and the flat/shoulder joins.
    const double cuts[4] = {tx - a * sig, tx - flat * sig, tx + flat * sig, tx + a * sig};
    const double glo = grid.interval.lo, ghi = grid.interval.hi;
    if (cuts[3] <= glo || cuts[0] >= ghi) {
      row[grid.cell_of(tx)] = 1.0;
      return;
    }
    const std::size_t j0 = grid.cell_of(cuts[0]), j1 = grid.cell_of(cuts[3]);
    auto dens = [&](double y) { return dyn.density((y - tx) / sig) / sig; };
    double total = 0.0;
    for (std::size_t j = j0; j <= j1; ++j) {
      const double lo = std::max(grid.edge(j), cuts[0]);
      const double hi = std::min(j + 1 == n ? ghi : grid.edge(j + 1), cuts[3]);
      if (!(hi > lo)) continue;
      double acc = 0.0, from = lo;
      for (double c : {cuts[1], cuts[2], hi}) {
        if (c <= from) continue;
        const double to = std::min(c, hi);
        acc += quad::gl8(dens, from, to);
        from = to;
        if (from >= hi) break;
      }
      row[j] = acc;
      total += acc;
    }
    if (!(total > 0.0)) {
      row[grid.cell_of(tx)] = 1.0;
      return;
    }
    for (std::size_t j = j0; j <= j1; ++j) row[j] /= total;
  });
  return KernelMatrix::plain(grid, std::move(P));
}

// ---------------------------------------------------------------------------
// Spectral quantities
// ---------------------------------------------------------------------------

SpectralReport stationary_density(const KernelMatrix& L, PowerOptions opt) {
  if (L.kind() != KernelKind::plain) throw InputError("stationary_density needs a plain matrix");
  const std::size_t n = L.size();
  std::vector<double> m(n, 1.0 / static_cast<double>(n)), next(n);
  double residual = 1.0;
  std::size_t it = 0;
  while (it < opt.max_iter) {
    L.push(m, next);
    double total = 0.0;
    for (double v : next) total += v;
    residual = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      next[j] /= total;
      residual += std::abs(next[j] - m[j]);
    }
    m.swap(next);
    ++it;
    if (residual <= opt.tol) break;
  }
  if (residual > opt.tol) throw ConvergenceError("stationary density did not converge", residual);
  SpectralReport rep;
  rep.leading_eigenvalue = {1.0, 0.0};
  rep.leading_density = GridDensity::from_masses(L.grid(), m);
  rep.iterations = it;
  rep.residual = residual;
  rep.second_modulus = second_eigen_modulus(L, rep.leading_density);
  return rep;
}

double second_eigen_modulus(const KernelMatrix& L, const GridDensity& w, double tol,
                            std::size_t max_iter) {
  const std::size_t n = L.size();
  require_same_grid(L.grid(), w.grid(), "second_eigen_modulus");
  const std::size_t k = std::min<std::size_t>(6, n - 1);
  const std::vector<double> mass = w.masses();

  // Deflated observable action A f = L f - <m, f> 1.
  auto apply = [&](const Eigen::MatrixXd& V, Eigen::MatrixXd& out) {
    std::vector<double> col(n), res(n);
    for (Eigen::Index c = 0; c < V.cols(); ++c) {
      for (std::size_t i = 0; i < n; ++i) col[i] = V(static_cast<Eigen::Index>(i), c);
      L.pull(col, res);
      double proj = 0.0;
      for (std::size_t i = 0; i < n; ++i) proj += mass[i] * col[i];
      for (std::size_t i = 0; i < n; ++i) out(static_cast<Eigen::Index>(i), c) = res[i] - proj;
    }
  };

  // Deterministic start: low-frequency cosines plus a ramp.
  Eigen::MatrixXd V(n, k), W(n, k);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < k; ++c)
      V(i, c) = std::cos(M_PI * (c + 1) * (i + 0.5) / n) + 1e-3 * std::sin(0.37 * (i + 1) * (c + 1));
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(V);
  V = qr.householderQ() * Eigen::MatrixXd::Identity(n, k);

  double prev = -1.0, est = 0.0;
  for (std::size_t it = 1; it <= max_iter; ++it) {
    apply(V, W);
    qr.compute(W);
    Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, k);
    if (it % 5 == 0) {
      Eigen::MatrixXd AQ(n, k);
      apply(Q, AQ);
      const Eigen::MatrixXd H = Q.transpose() * AQ;
      Eigen::EigenSolver<Eigen::MatrixXd> es(H, false);
      est = es.eigenvalues().cwiseAbs().maxCoeff();
      if (std::abs(est - prev) <= tol * std::max(est, 1e-300)) return est;
      prev = est;
    }
    V = std::move(Q);
  }
  throw ConvergenceError("second eigenvalue did not converge", std::abs(est - prev));
}

std::vector<double> correlation(std::span<const double> f, std::span<const double> g,
                                const KernelMatrix& L, const GridDensity& w, std::size_t t_max) {
  const std::size_t n = L.size();
  require_same_grid(L.grid(), w.grid(), "correlation");
  if (f.size() != n || g.size() != n) throw GridMismatch("correlation: observable size mismatch");
  std::vector<double> m(n), next(n);
  double ef = 0.0, eg = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = f[i] * w.mass(i);
    ef += m[i];
    eg += g[i] * w.mass(i);
  }
  std::vector<double> C(t_max + 1);
  for (std::size_t t = 0; t <= t_max; ++t) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += m[j] * g[j];
    C[t] = s - ef * eg;
    if (t < t_max) {
      L.push(m, next);
      m.swap(next);
    }
  }
  return C;
}

std::vector<double> correlation(std::span<const double> f, std::span<const double> g,
                                const KernelMatrix& L, std::size_t t_max) {
  return correlation(f, g, L, stationary_density(L).leading_density, t_max);
}

std::vector<double> smeared_ball_probability(const Grid& grid, const ObsNoise& obs, double center,
                                             double radius) {
  std::vector<double> pi(grid.n, 0.0);
  if (!(radius > 0.0)) return pi;
  const Profile& s = obs.s();
  const double lo_b = center - radius, hi_b = center + radius, hw = obs.half_width();

  auto prob = [&](double x) {
    const double sx = s(x);
    if (!(sx > 0.0)) return (x >= lo_b && x <= hi_b) ? 1.0 : 0.0;
    return obs.psi_mass((lo_b - x) / sx, (hi_b - x) / sx);
  };

  // x where (y - x)/s(x) = e for y a ball end and e in {-hw, 0, hw}.
  std::vector<double> breaks = {lo_b, hi_b};
  for (double y : {lo_b, hi_b})
    for (double e : {-hw, 0.0, hw}) {
      const double den = 1.0 + s.slope * e;
      if (den != 0.0) breaks.push_back((y - s.intercept * e) / den);
    }
  if (s.slope != 0.0) breaks.push_back(-s.intercept / s.slope);
  std::sort(breaks.begin(), breaks.end());

  const double reach = radius + obs.s_max() * hw;
  const double h = grid.width();
  for (std::size_t i = 0; i < grid.n; ++i) {
    const double a = grid.edge(i), b = grid.edge(i + 1);
    if (b < center - reach - h || a > center + reach + h) continue;
    double acc = 0.0, from = a;
    for (double c : breaks) {
      if (c <= from) continue;
      if (c >= b) break;
      acc += quad::gl8(prob, from, c);
      from = c;
    }
    acc += quad::gl8(prob, from, b);
    pi[i] = std::clamp(acc / h, 0.0, 1.0);
  }
  return pi;
}

double smeared_ball_measure(std::span<const double> pi, const GridDensity& w) {
  if (pi.size() != w.size()) throw GridMismatch("smeared_ball_measure: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < pi.size(); ++i) s += pi[i] * w.mass(i);
  return s;
}

PerturbedEigen perturbed_top_eigenvalue(const KernelMatrix& L_hat, const GridDensity& w,
                                        PowerOptions opt) {
  if (L_hat.kind() != KernelKind::hole) throw InputError("perturbed_top_eigenvalue needs a hole matrix");
  require_same_grid(L_hat.grid(), w.grid(), "perturbed_top_eigenvalue");
  PerturbedEigen out;
  out.Delta_t = smeared_ball_measure(L_hat.pi(), w);
  const auto& pi = L_hat.pi();
  if (std::all_of(pi.begin(), pi.end(), [](double p) { return p == 0.0; })) return out;

  const std::size_t n = L_hat.size();
  std::vector<double> m = w.masses(), next(n);
  double iota = 1.0, prev = 2.0, change = 1.0;
  std::size_t it = 0;
  while (it < opt.max_iter) {
    L_hat.push(m, next);
    double total = 0.0;
    for (double v : next) total += v;
    ++it;
    if (!(total > 0.0)) {
      out.iota = 0.0;
      out.iterations = it;
      return out;
    }
    iota = total;
    change = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      next[j] /= total;
      change += std::abs(next[j] - m[j]);
    }
    m.swap(next);
    if (std::abs(iota - prev) <= opt.tol && change <= 1e-11) break;
    prev = iota;
  }
  if (std::abs(iota - prev) > opt.tol && change > 1e-11)
    throw ConvergenceError("hole eigenvalue did not converge", std::abs(iota - prev));
  out.iota = iota;
  out.iterations = it;
  return out;
}

ExtremalIndex extremal_index(const KernelMatrix& L, const KernelMatrix& L_hat, const GridDensity& w,
                             std::size_t k_max) {
  if (L.kind() != KernelKind::plain || L_hat.kind() != KernelKind::hole)
    throw InputError("extremal_index needs a plain and a hole matrix");
  require_same_grid(L.grid(), L_hat.grid(), "extremal_index");
  require_same_grid(L.grid(), w.grid(), "extremal_index");
  const auto& pi = L_hat.pi();
  const double Delta = smeared_ball_measure(pi, w);
  if (!(Delta > 0.0)) throw DegenerateData("extremal index undefined: Delta_t = 0");

  const std::size_t n = L.size();
  // (L - L_hat) f = L(pi f) in the mass picture.
  std::vector<double> v(n), next(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = w.mass(i) * pi[i];
  L.push(v, next);
  v.swap(next);

  ExtremalIndex out;
  out.q.resize(k_max + 1);
  double sum = 0.0;
  for (std::size_t k = 0; k <= k_max; ++k) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += v[j] * pi[j];
    out.q[k] = s / Delta;
    sum += out.q[k];
    if (k < k_max) {
      L_hat.push(v, next);
      v.swap(next);
    }
  }
  out.beta = 1.0 - sum;
  return out;
}

std::complex<double> twisted_top_eigenvalue(const KernelMatrix& L_tilde, const GridDensity& w,
                                            PowerOptions opt) {
  if (L_tilde.kind() != KernelKind::twisted) throw InputError("twisted_top_eigenvalue needs a twisted matrix");
  require_same_grid(L_tilde.grid(), w.grid(), "twisted_top_eigenvalue");
  const std::size_t n = L_tilde.size();
  bool trivial = true;
  for (std::size_t i = 0; i < n && trivial; ++i) trivial = L_tilde.row_factor(i) == 1.0;
  if (trivial) return {1.0, 0.0};

  std::vector<std::complex<double>> v(n), next(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = w.mass(i);
  std::complex<double> ups = 1.0, prev = 2.0;
  double change = 1.0;
  for (std::size_t it = 0; it < opt.max_iter; ++it) {
    L_tilde.push(v, next);
    std::complex<double> total = 0.0;
    for (const auto& c : next) total += c;
    if (std::abs(total) == 0.0) return 0.0;
    ups = total;  // v is kept at unit sum
    change = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      next[j] /= total;
      change += std::abs(next[j] - v[j]);
    }
    v.swap(next);
    if (std::abs(ups - prev) <= opt.tol && change <= 1e-11) return ups;
    prev = ups;
  }
  throw ConvergenceError("twisted eigenvalue did not converge", std::abs(ups - prev));
}

// ---------------------------------------------------------------------------
// Binary container
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'U', 'L', 'A', 'M'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw InputError("truncated ULAM container");
  return v;
}

void put_header(std::ostream& os, std::uint32_t type, std::uint64_t rows, std::uint64_t cols,
                const Grid& g, double lambda) {
  os.write(kMagic, 4);
  put(os, kVersion);
  put(os, type);
  put(os, rows);
  put(os, cols);
  put(os, g.interval.lo);
  put(os, g.interval.hi);
  put(os, lambda);
}

struct Header {
  std::uint32_t type;
  std::uint64_t rows, cols;
  double lo, hi, lambda;
};

Header get_header(std::istream& is) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0) throw InputError("not a ULAM container");
  if (get<std::uint32_t>(is) != kVersion) throw InputError("unsupported ULAM version");
  Header h{};
  h.type = get<std::uint32_t>(is);
  h.rows = get<std::uint64_t>(is);
  h.cols = get<std::uint64_t>(is);
  h.lo = get<double>(is);
  h.hi = get<double>(is);
  h.lambda = get<double>(is);
  return h;
}

}  // namespace

void write_ulam(std::ostream& os, const KernelMatrix& L) {
  const std::size_t n = L.size();
  const std::uint32_t type = L.kind() == KernelKind::plain ? 1 : L.kind() == KernelKind::hole ? 2 : 3;
  put_header(os, type, n, n, L.grid(), L.lambda());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) put(os, L.plain_entry(i, j));
  if (L.kind() != KernelKind::plain)
    for (double p : L.pi()) put(os, p);
}

KernelMatrix read_ulam(std::istream& is) {
  const Header h = get_header(is);
  if (h.type < 1 || h.type > 3 || h.rows != h.cols) throw InputError("ULAM payload is not a kernel matrix");
  const std::size_t n = h.rows;
  const Grid grid({h.lo, h.hi}, n);
  std::vector<double> re(n * n);
  for (double& v : re) v = get<double>(is);
  KernelMatrix plain = KernelMatrix::plain(grid, std::move(re));
  if (h.type == 1) return plain;
  std::vector<double> pi(n);
  for (double& p : pi) p = get<double>(is);
  return h.type == 2 ? plain.with_hole(std::move(pi)) : plain.with_twist(std::move(pi), h.lambda);
}

void write_ulam(std::ostream& os, const GridDensity& w) {
  put_header(os, 0, 1, w.size(), w.grid(), 0.0);
  for (double v : w.weights()) put(os, v);
}

GridDensity read_ulam_density(std::istream& is) {
  const Header h = get_header(is);
  if (h.type != 0 || h.rows != 1) throw InputError("ULAM payload is not a density");
  std::vector<double> w(h.cols);
  for (double& v : w) v = get<double>(is);
  return GridDensity(Grid({h.lo, h.hi}, h.cols), std::move(w));
}

}  // namespace heterodyn
