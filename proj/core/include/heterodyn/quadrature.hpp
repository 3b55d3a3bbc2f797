#pragma once

#include <array>
#include <cstddef>
#include <functional>

namespace heterodyn::quad {

// 8-point Gauss-Legendre rule on [-1, 1].
inline constexpr std::array<double, 8> kGl8Nodes = {
    -0.9602898564975362316835609, -0.7966664774136267395915539,
    -0.5255324099163289858177390, -0.1834346424956498049394761,
    0.1834346424956498049394761,  0.5255324099163289858177390,
    0.7966664774136267395915539,  0.9602898564975362316835609};
inline constexpr std::array<double, 8> kGl8Weights = {
    0.1012285362903762591525314, 0.2223810344533744705443560,
    0.3137066458778872873379622, 0.3626837833783619829651504,
    0.3626837833783619829651504, 0.3137066458778872873379622,
    0.2223810344533744705443560, 0.1012285362903762591525314};

// Maps the GL8 nodes onto [lo, hi]; `nodes[k]` pairs with `weights[k]`,
// and the weights already include the Jacobian (hi - lo) / 2.
struct Gl8Panel {
  std::array<double, 8> nodes;
  std::array<double, 8> weights;
};

inline Gl8Panel gl8_panel(double lo, double hi) {
  Gl8Panel p{};
  const double half = 0.5 * (hi - lo);
  const double mid = 0.5 * (hi + lo);
  for (std::size_t k = 0; k < 8; ++k) {
    p.nodes[k] = mid + half * kGl8Nodes[k];
    p.weights[k] = half * kGl8Weights[k];
  }
  return p;
}

template <typename F>
double gl8(F&& f, double lo, double hi) {
  const double half = 0.5 * (hi - lo);
  const double mid = 0.5 * (hi + lo);
  double sum = 0.0;
  for (std::size_t k = 0; k < 8; ++k) sum += kGl8Weights[k] * f(mid + half * kGl8Nodes[k]);
  return half * sum;
}

template <typename F>
double gl8_composite(F&& f, double lo, double hi, std::size_t panels) {
  const double h = (hi - lo) / static_cast<double>(panels);
  double sum = 0.0;
  for (std::size_t p = 0; p < panels; ++p) sum += gl8(f, lo + h * p, lo + h * (p + 1));
  return sum;
}

// Adaptive Gauss-Kronrod (15 point) to the requested relative tolerance.
double adaptive(const std::function<double(double)>& f, double lo, double hi,
                double rel_tol = 1e-10);

}  // namespace heterodyn::quad
