#pragma once

namespace bect {

/// Polynomial smoothstep of odd degree 2p+1: s(0)=0, s(1)=1, with the first
/// p derivatives vanishing at both ends. `order` is the polynomial degree
/// (7 -> C^3 joins, 11 -> C^5, ...). Clamped outside [0,1].
double smoothstep(int order, double t);

/// Derivative of smoothstep with respect to t (zero outside [0,1]).
double smoothstep_deriv(int order, double t);

/// Monotone ramp 0 -> 1 across [lo, hi] built on smoothstep.
inline double ramp(int order, double lo, double hi, double x) {
  return smoothstep(order, (x - lo) / (hi - lo));
}

}  // namespace bect
