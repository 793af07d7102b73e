#include "xeq/rng.hpp"

#include <cmath>
#include <numbers>

namespace xeq {

double RngStream::next_normal() {
  const double u1 = next_uniform();
  const double u2 = next_uniform();
  const double radius = std::sqrt(-2.0 * std::log1p(-u1));
  return radius * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace xeq
