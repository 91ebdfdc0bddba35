#pragma once

#include <cmath>
#include <cstdint>

namespace pidc::detail {

__extension__ typedef __int128 wide_int;

// Binary fixed point with 72 fractional bits.  Sums of fixed values are
// exact, so results do not depend on summation order or thread schedule.
inline constexpr int fixed_fraction_bits = 72;

inline wide_int to_fixed(double x) {
  return static_cast<wide_int>(std::nearbyint(std::ldexp(x, fixed_fraction_bits)));
}

inline double from_fixed(wide_int v) {
  return std::ldexp(static_cast<double>(v), -fixed_fraction_bits);
}

}  // namespace pidc::detail
