#include "photonstat/rng.hpp"

#include <cmath>
#include <numbers>

namespace photonstat {

double standard_normal(Engine& eng) {
  const double u1 = uniform01_open(eng);
  const double u2 = uniform01(eng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace photonstat
