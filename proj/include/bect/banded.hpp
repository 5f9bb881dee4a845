#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "bect/types.hpp"

namespace bect {

/// General banded complex matrix in LAPACK-style storage with room for fill:
/// entry (i, j) lives at ab(kl + ku + i - j, j), |i - j| <= band before
/// factorization. LU with partial pivoting widens the upper band to ku + kl.
class BandedLU {
 public:
  /// Factor A - sigma*Id where A is given entrywise through `entries`
  /// (a callback enumerating (i, j, value) with |i - j| <= band).
  BandedLU(int n, int band,
           const std::function<void(const std::function<void(int, int, Complex)>&)>& entries,
           Complex sigma);

  void solve_in_place(ComplexVector& x) const;
  int size() const { return n_; }

 private:
  int n_ = 0, kl_ = 0, ku_ = 0;
  Eigen::MatrixXcd ab_;
  std::vector<int> pivots_;
};

struct WindowEigsOptions {
  int max_iterations = 250;   // Lanczos steps per pass
  int max_passes = 5;         // deflated restarts until no new pairs appear
  double residual_tol = 1e-9; // relative to the operator norm bound
  std::uint64_t seed = 0x5eed;
};

struct WindowEigs {
  std::vector<double> values;   // ascending, inside [lo, hi]
  ComplexMatrix vectors;        // orthonormal columns matching values
};

/// All eigenpairs of a Hermitian operator inside [lo, hi], found by
/// shift-invert Lanczos at sigma = (lo + hi) / 2 with full reorthogonalization
/// and deflated restart passes (catches multiplicities that a single Krylov
/// run cannot see). Residuals are verified against `apply`; `norm_bound`
/// scales the tolerance.
WindowEigs window_eigenpairs(const std::function<void(const ComplexVector&, ComplexVector&)>& apply,
                             const BandedLU& shifted, int n, double sigma, double lo, double hi,
                             double norm_bound, const WindowEigsOptions& opts = {});

}  // namespace bect
