#ifndef MLSA_ROUND_HPP
#define MLSA_ROUND_HPP

#include <cmath>

namespace mlsa {

/// Half-up rounding of a percentage to two decimals, used at every
/// reporting boundary. The value is first settled at the third decimal
/// (half-up) and then at the second, so figures within half a milli-point
/// of a two-decimal tie round upward with it.
inline double round_pct(double v) {
  double milli = std::floor(v * 1000.0 + 0.5);
  return std::floor(milli / 10.0 + 0.5) / 100.0;
}

} // namespace mlsa

#endif
