#include "bect/smoothstep.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace bect {
namespace {

// s_p(t) = sum_k c_k t^{p+1+k}, the unique degree-(2p+1) polynomial with
// s(0)=0, s(1)=1 and p flat derivatives at both ends:
//   s_p(t) = t^{p+1} * sum_{k=0}^{p} binom(p+k, k) binom(2p+1, p-k) (-t)^k
std::vector<double> coefficients(int p) {
  auto binom = [](int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
  };
  std::vector<double> c(p + 1);
  for (int k = 0; k <= p; ++k)
    c[k] = binom(p + k, k) * binom(2 * p + 1, p - k) * ((k % 2) ? -1.0 : 1.0);
  return c;
}

int half_order(int order) {
  if (order < 1 || order % 2 == 0)
    throw std::invalid_argument("smoothstep order must be a positive odd integer");
  return (order - 1) / 2;
}

}  // namespace

double smoothstep(int order, double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const int p = half_order(order);
  const auto c = coefficients(p);
  double acc = 0.0;
  for (int k = p; k >= 0; --k) acc = acc * t + c[k];
  return acc * std::pow(t, p + 1);
}

double smoothstep_deriv(int order, double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  const int p = half_order(order);
  const auto c = coefficients(p);
  double acc = 0.0;
  for (int k = p; k >= 0; --k) acc = acc * t + c[k] * (p + 1 + k);
  return acc * std::pow(t, p);
}

}  // namespace bect
