#pragma once

#include <vector>

#include "bect/bands.hpp"
#include "bect/types.hpp"

namespace bect {

/// Coefficients of exact trigonometric-interpolation differentiation on N
/// uniform samples of a 2*pi-periodic function: f'(x_a) ~= sum_j w[j] f(x_{a+j}).
/// For even N the Nyquist mode is dropped. The kernel is real and odd.
std::vector<double> spectral_derivative_kernel(int n);

/// Differentiate a matrix-valued field sampled on a BZ grid along direction
/// 0 (xi1) or 1 (xi2). Pure stencil application; preserves Hermiticity.
std::vector<ComplexMatrix> differentiate_field(const std::vector<ComplexMatrix>& field,
                                               const BZGrid& grid, int direction,
                                               Exec exec = Exec::Parallel);

}  // namespace bect
