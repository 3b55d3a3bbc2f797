#include "heterodyn/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace heterodyn::quad {

double adaptive(const std::function<double(double)>& f, double lo, double hi, double rel_tol) {
  if (hi <= lo) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, lo, hi, 15, rel_tol);
}

}  // namespace heterodyn::quad
