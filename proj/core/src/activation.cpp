#include <algorithm>

#include "sns/error.hpp"
#include "sns/network.hpp"

namespace sns {

double activation(double u, double e_lo, double e_hi) {
  if (!(e_lo < e_hi)) {
    throw InvalidParameter("activation: e_lo must be below e_hi");
  }
  return (std::clamp(u, e_lo, e_hi) - e_lo) / (e_hi - e_lo);
}

double activation_slope(double u, double e_lo, double e_hi) {
  if (u > e_lo && u < e_hi) return 1.0 / (e_hi - e_lo);
  return 0.0;
}

}  // namespace sns
