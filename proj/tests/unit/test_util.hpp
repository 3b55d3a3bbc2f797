#pragma once

#include <boost/math/distributions/chi_squared.hpp>
#include <span>
#include <string>
#include <vector>

#include "heterodyn/config_io.hpp"
#include "heterodyn/model.hpp"

namespace heterodyn::testing {

inline ModelSpec shipped_spec(const std::string& name) {
  return load_model_spec(std::string(HETERODYN_CONFIG_DIR) + "/" + name);
}

inline ModelConfig shipped(const std::string& name) { return ModelConfig(shipped_spec(name)); }

// Pearson chi-square p-value of observed counts against expected counts;
// bins with expected < 5 are merged into their right neighbour.
inline double chi_square_p(std::span<const double> observed, std::span<const double> expected,
                           std::size_t fitted_params = 0) {
  std::vector<double> o, e;
  double oa = 0.0, ea = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    oa += observed[i];
    ea += expected[i];
    if (ea >= 5.0) {
      o.push_back(oa);
      e.push_back(ea);
      oa = ea = 0.0;
    }
  }
  if (ea > 0.0 && !e.empty()) {
    o.back() += oa;
    e.back() += ea;
  }
  double stat = 0.0;
  for (std::size_t i = 0; i < o.size(); ++i) stat += (o[i] - e[i]) * (o[i] - e[i]) / e[i];
  const double dof = static_cast<double>(o.size() - 1 - fitted_params);
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared(dof), stat));
}

}  // namespace heterodyn::testing
