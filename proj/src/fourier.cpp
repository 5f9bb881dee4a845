#include "bect/fourier.hpp"

#include <cmath>

namespace bect {

std::vector<double> spectral_derivative_kernel(int n) {
  std::vector<double> w(n, 0.0);
  const int mmax = (n - 1) / 2;
  for (int j = 1; j < n; ++j) {
    Complex acc(0, 0);
    for (int m = -mmax; m <= mmax; ++m)
      acc += Complex(0, m) * std::exp(Complex(0, -kTwoPi * m * j / double(n)));
    w[j] = acc.real() / n;
  }
  return w;
}

std::vector<ComplexMatrix> differentiate_field(const std::vector<ComplexMatrix>& field,
                                               const BZGrid& grid, int direction, Exec exec) {
  const int n = direction == 0 ? grid.n1 : grid.n2;
  const std::vector<double> w = spectral_derivative_kernel(n);
  std::vector<ComplexMatrix> out(field.size());
  parallel_for(grid.nodes(), exec, [&](std::size_t node) {
    const int a = static_cast<int>(node) / grid.n2;
    const int b = static_cast<int>(node) % grid.n2;
    ComplexMatrix acc = ComplexMatrix::Zero(field[node].rows(), field[node].cols());
    for (int j = 1; j < n; ++j) {
      if (w[j] == 0.0) continue;
      const int idx = direction == 0 ? grid.index(a + j, b) : grid.index(a, b + j);
      acc += w[j] * field[idx];
    }
    out[node] = std::move(acc);
  });
  return out;
}

}  // namespace bect
