#include "heterodyn/rng.hpp"

#include <cmath>

namespace heterodyn {

Rng::Rng(SeededStream stream) : stream_(stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(stream.seed),
                    static_cast<std::uint32_t>(stream.seed >> 32),
                    static_cast<std::uint32_t>(stream.stream_id),
                    static_cast<std::uint32_t>(stream.stream_id >> 32)};
  engine_.seed(seq);
}

double Rng::uniform_open() {
  double u;
  do u = uniform();
  while (u == 0.0);
  return u;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double r = std::sqrt(-2.0 * std::log(uniform_open()));
  const double th = 2.0 * M_PI * uniform();
  spare_ = r * std::sin(th);
  has_spare_ = true;
  return r * std::cos(th);
}

}  // namespace heterodyn
