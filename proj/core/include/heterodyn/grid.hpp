#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "heterodyn/model.hpp"

namespace heterodyn {

// Uniform partition of `interval` into n cells.
struct Grid {
  Interval interval;
  std::size_t n = 0;

  Grid() = default;
  Grid(Interval iv, std::size_t cells);

  double width() const { return interval.length() / static_cast<double>(n); }
  double edge(std::size_t i) const { return interval.lo + width() * static_cast<double>(i); }
  double center(std::size_t i) const { return interval.lo + width() * (static_cast<double>(i) + 0.5); }
  // Index of the cell containing x, clamped to [0, n-1].
  std::size_t cell_of(double x) const;
  bool same_as(const Grid& other) const;
};

void require_same_grid(const Grid& a, const Grid& b, const char* where);

// Piecewise-constant probability density: weights are cell heights, so the
// cell masses are weights * width and sum to 1.
class GridDensity {
 public:
  GridDensity() = default;
  // Throws InputError unless weights are nonnegative and integrate to 1 +- 1e-10.
  GridDensity(Grid grid, std::vector<double> weights);

  // Rescales nonnegative heights to unit mass; DegenerateData on zero mass.
  static GridDensity normalized(Grid grid, std::vector<double> heights);
  static GridDensity from_masses(Grid grid, std::span<const double> masses);
  static GridDensity uniform(Grid grid);
  // All mass in the cell containing x.
  static GridDensity point_mass(Grid grid, double x);

  const Grid& grid() const { return grid_; }
  std::size_t size() const { return weights_.size(); }
  const std::vector<double>& weights() const { return weights_; }
  double weight(std::size_t i) const { return weights_[i]; }
  double mass(std::size_t i) const { return weights_[i] * grid_.width(); }
  std::vector<double> masses() const;

  // Sum of cell values times cell masses.
  double expect(std::span<const double> cell_values) const;
  double mean() const;
  // Mass carried by cells whose centre lies outside iv.
  double mass_outside(const Interval& iv) const;

 private:
  Grid grid_;
  std::vector<double> weights_;
};

double l1_distance(const GridDensity& f, const GridDensity& g);
double tv_distance(const GridDensity& f, const GridDensity& g);

// Cell averages of f, each by 8-point Gauss-Legendre on the cell.
std::vector<double> project(const Grid& grid, const std::function<double(double)>& f);

// Histogram of samples; out-of-range samples go to the edge cells.
GridDensity histogram(const Grid& grid, std::span<const double> samples);

}  // namespace heterodyn
