#pragma once

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "heterodyn/grid.hpp"
#include "heterodyn/model.hpp"

namespace heterodyn {

enum class KernelKind { plain, hole, twisted };

// Ulam discretisation of a transition kernel. Row i is the source cell, so
// densities travel as row vectors of cell masses (m' = m L) and observables
// as column vectors (f' = L f, the adjoint action).
//
// Hole and twisted variants share the plain matrix and carry one factor per
// source row: keep_i = 1 - pi_i, or 1 - pi_i + pi_i e^{i lambda}, where pi_i is
// the cell-averaged probability that the observation lands in the ball.
class KernelMatrix {
 public:
  static KernelMatrix plain(Grid grid, std::vector<double> entries);

  const Grid& grid() const { return grid_; }
  std::size_t size() const { return grid_.n; }
  KernelKind kind() const { return kind_; }
  double lambda() const { return lambda_; }
  const std::vector<double>& pi() const { return pi_; }

  double plain_entry(std::size_t i, std::size_t j) const { return (*p_)[i * grid_.n + j]; }
  std::complex<double> entry(std::size_t i, std::size_t j) const;
  std::complex<double> row_factor(std::size_t i) const;
  // Nonzero column range [first, last) of row i of the plain matrix.
  std::size_t row_first(std::size_t i) const { return (*first_)[i]; }
  std::size_t row_last(std::size_t i) const { return (*last_)[i]; }

  // out = in L (density/mass action). Plain and hole kinds.
  void push(std::span<const double> in, std::span<double> out) const;
  // Complex mass action, valid for every kind.
  void push(std::span<const std::complex<double>> in, std::span<std::complex<double>> out) const;
  // out = L f (observable action). Plain and hole kinds.
  void pull(std::span<const double> f, std::span<double> out) const;

  KernelMatrix with_hole(std::vector<double> pi) const;
  KernelMatrix with_twist(std::vector<double> pi, double lambda) const;

 private:
  KernelMatrix() = default;

  Grid grid_;
  KernelKind kind_ = KernelKind::plain;
  double lambda_ = 0.0;
  std::vector<double> pi_;
  std::vector<std::complex<double>> factor_;
  std::shared_ptr<const std::vector<double>> p_;
  std::shared_ptr<const std::vector<std::size_t>> first_;
  std::shared_ptr<const std::vector<std::size_t>> last_;
};

// I_Gamma padded on both sides by a * sigma_max.
Grid default_ulam_grid(const ModelConfig& config, std::size_t n_cells);

// Validates the dynamics checks (ConfigError listing the failures), then
// assembles on the default grid. n_cells >= 16.
KernelMatrix build_ulam(const ModelConfig& config, std::size_t n_cells);
// Assembles on an explicit grid without validating the configuration.
KernelMatrix build_ulam(const ModelConfig& config, const Grid& grid);

struct SpectralReport {
  std::complex<double> leading_eigenvalue{1.0, 0.0};
  double second_modulus = 0.0;
  GridDensity leading_density;
  std::size_t iterations = 0;
  double residual = 0.0;
};

struct PowerOptions {
  double tol = 1e-12;
  std::size_t max_iter = 100000;
};

// Fixed point of a plain matrix by power iteration (L1 residual between
// successive iterates); second_modulus filled by second_eigen_modulus.
SpectralReport stationary_density(const KernelMatrix& L, PowerOptions opt = {});

// |lambda_2| from block subspace iteration on L - 1 w^T.
double second_eigen_modulus(const KernelMatrix& L, const GridDensity& w, double tol = 1e-10,
                            std::size_t max_iter = 20000);

// C(t) = <L^t(f w), g> - <f, w><g, w>, t = 0..t_max; f and g are cell values.
std::vector<double> correlation(std::span<const double> f, std::span<const double> g,
                                const KernelMatrix& L, const GridDensity& w, std::size_t t_max);
std::vector<double> correlation(std::span<const double> f, std::span<const double> g,
                                const KernelMatrix& L, std::size_t t_max);

// Cell-averaged psi-probability that x + s(x) e falls in [center - r, center + r].
std::vector<double> smeared_ball_probability(const Grid& grid, const ObsNoise& obs, double center,
                                             double radius);

// Delta_t = sum_i pi_i w_i h.
double smeared_ball_measure(std::span<const double> pi, const GridDensity& w);

struct PerturbedEigen {
  double iota = 1.0;
  double Delta_t = 0.0;
  std::size_t iterations = 0;
};

PerturbedEigen perturbed_top_eigenvalue(const KernelMatrix& L_hat, const GridDensity& w,
                                        PowerOptions opt = {1e-14, 100000});

struct ExtremalIndex {
  double beta = 1.0;
  std::vector<double> q;
};

ExtremalIndex extremal_index(const KernelMatrix& L, const KernelMatrix& L_hat, const GridDensity& w,
                             std::size_t k_max);

std::complex<double> twisted_top_eigenvalue(const KernelMatrix& L_tilde, const GridDensity& w,
                                            PowerOptions opt = {1e-14, 100000});

// Binary container: magic "ULAM", u32 version, u32 payload type, u64 rows,
// u64 cols, f64 lo, f64 hi, f64 lambda, row-major f64 payload. Kernel
// payloads hold the plain matrix; hole/twisted append pi, and the row factors
// are rebuilt from pi and lambda.
void write_ulam(std::ostream& os, const KernelMatrix& L);
KernelMatrix read_ulam(std::istream& is);
void write_ulam(std::ostream& os, const GridDensity& w);
GridDensity read_ulam_density(std::istream& is);

}  // namespace heterodyn
