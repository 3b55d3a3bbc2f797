#include "heterodyn/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "heterodyn/error.hpp"
#include "heterodyn/quadrature.hpp"

namespace heterodyn {

Grid::Grid(Interval iv, std::size_t cells) : interval(iv), n(cells) {
  if (cells == 0) throw InputError("grid needs at least one cell");
  if (!(iv.hi > iv.lo) || !std::isfinite(iv.lo) || !std::isfinite(iv.hi))
    throw InputError("grid interval must be finite and non-empty");
}

std::size_t Grid::cell_of(double x) const {
  const double r = (x - interval.lo) / width();
  if (!(r > 0.0)) return 0;
  const auto i = static_cast<std::size_t>(r);
  return std::min(i, n - 1);
}

bool Grid::same_as(const Grid& o) const {
  return n == o.n && interval.lo == o.interval.lo && interval.hi == o.interval.hi;
}

void require_same_grid(const Grid& a, const Grid& b, const char* where) {
  if (!a.same_as(b)) throw GridMismatch(std::string(where) + ": operands live on different grids");
}

GridDensity::GridDensity(Grid grid, std::vector<double> weights)
    : grid_(grid), weights_(std::move(weights)) {
  if (weights_.size() != grid_.n) throw InputError("density size does not match grid");
  double total = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw InputError("density weights must be finite and >= 0");
    total += w;
  }
  total *= grid_.width();
  if (std::abs(total - 1.0) > 1e-10)
    throw InputError("density integrates to " + std::to_string(total) + ", expected 1");
}

GridDensity GridDensity::normalized(Grid grid, std::vector<double> heights) {
  double total = 0.0;
  for (double v : heights) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw InputError("density heights must be finite and >= 0");
    total += v;
  }
  total *= grid.width();
  if (!(total > 0.0)) throw DegenerateData("cannot normalise a density with zero mass");
  for (double& v : heights) v /= total;
  return GridDensity(grid, std::move(heights));
}

GridDensity GridDensity::from_masses(Grid grid, std::span<const double> masses) {
  return normalized(grid, std::vector<double>(masses.begin(), masses.end()));
}

GridDensity GridDensity::uniform(Grid grid) {
  return GridDensity(grid, std::vector<double>(grid.n, 1.0 / grid.interval.length()));
}

GridDensity GridDensity::point_mass(Grid grid, double x) {
  std::vector<double> w(grid.n, 0.0);
  w[grid.cell_of(x)] = 1.0 / grid.width();
  return GridDensity(grid, std::move(w));
}

std::vector<double> GridDensity::masses() const {
  std::vector<double> m(weights_.size());
  const double h = grid_.width();
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = weights_[i] * h;
  return m;
}

double GridDensity::expect(std::span<const double> v) const {
  if (v.size() != weights_.size()) throw GridMismatch("expect: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s += v[i] * weights_[i];
  return s * grid_.width();
}

double GridDensity::mean() const {
  double s = 0.0;
  for (std::size_t i = 0; i < weights_.size(); ++i) s += grid_.center(i) * weights_[i];
  return s * grid_.width();
}

double GridDensity::mass_outside(const Interval& iv) const {
  double s = 0.0;
  for (std::size_t i = 0; i < weights_.size(); ++i)
    if (!iv.contains(grid_.center(i))) s += weights_[i];
  return s * grid_.width();
}

double l1_distance(const GridDensity& f, const GridDensity& g) {
  require_same_grid(f.grid(), g.grid(), "l1_distance");
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += std::abs(f.weight(i) - g.weight(i));
  return s * f.grid().width();
}

double tv_distance(const GridDensity& f, const GridDensity& g) { return 0.5 * l1_distance(f, g); }

std::vector<double> project(const Grid& grid, const std::function<double(double)>& f) {
  std::vector<double> out(grid.n);
  const double h = grid.width();
  for (std::size_t i = 0; i < grid.n; ++i) out[i] = quad::gl8(f, grid.edge(i), grid.edge(i + 1)) / h;
  return out;
}

GridDensity histogram(const Grid& grid, std::span<const double> samples) {
  if (samples.empty()) throw InputError("histogram of an empty sample");
  std::vector<double> counts(grid.n, 0.0);
  for (double x : samples) counts[grid.cell_of(x)] += 1.0;
  return GridDensity::normalized(grid, std::move(counts));
}

}  // namespace heterodyn
