#pragma once

#include <optional>
#include <vector>

#include "bect/models.hpp"
#include "bect/parallel.hpp"
#include "bect/types.hpp"

namespace bect {

/// Uniform periodic grid on the dual torus: nodes (2 pi a / n1, 2 pi b / n2).
struct BZGrid {
  int n1 = 24;
  int n2 = 24;

  BZGrid() = default;
  BZGrid(int n1_, int n2_) : n1(n1_), n2(n2_) {
    if (n1 < 4 || n2 < 4) throw ConfigError("BZ grid sizes must be >= 4");
  }
  int nodes() const { return n1 * n2; }
  int index(int a, int b) const {
    a %= n1;
    if (a < 0) a += n1;
    b %= n2;
    if (b < 0) b += n2;
    return a * n2 + b;
  }
  Vec2 node(int a, int b) const { return Vec2(kTwoPi * a / n1, kTwoPi * b / n2); }
};

/// Eigen-decompositions over a BZ grid. Eigenvalues ascending per node;
/// eigenvector columns (when kept) are orthonormal.
struct BandStructure {
  BZGrid grid;
  int dim = 0;
  int truncation = 0;  // plane-wave K for continuous models, 0 otherwise
  std::vector<RealVector> eigenvalues;     // grid.nodes() entries of size dim
  std::vector<ComplexMatrix> eigenvectors; // empty when not requested

  bool has_vectors() const { return !eigenvectors.empty(); }
  int bands() const { return dim; }

  /// max over grid edges and bands of |dlambda| / step, a discrete Lipschitz
  /// estimate used for gap-certification slack.
  double lipschitz_estimate() const;
};

BandStructure compute_bands(const BlochFamily& family, const BZGrid& grid, bool want_vectors,
                            Exec exec = Exec::Parallel);

struct GapReport {
  double lambda0 = 0;
  double half_width = 0;  // epsilon
  bool gapped = false;
  int n_below = 0;     // bands strictly below lambda0 at every node
  double max_below = 0;
  double min_above = 0;
  double lipschitz = 0;       // from the band structure
  bool lipschitz_ok = false;  // L * grid step < epsilon / 2
};

/// Grid-level certificate that [lambda0 - 2 eps, lambda0 + 2 eps] avoids the
/// sampled spectrum, with a Lipschitz-slack margin reported alongside.
GapReport check_gap(const BandStructure& b, double lambda0, double epsilon);

struct CrossingDiagnostic {
  int band = 0;  // n: gap function is lambda_{n+1} - lambda_n (1-based n)
  std::vector<double> heights;      // x2 samples
  BZGrid grid;
  std::vector<RealVector> gapfn;    // per height, per node
  std::vector<RealVector> midpoint; // per height, per node
  double delta = 0;
  std::vector<std::vector<char>> in_z_delta;  // gapfn <= 2 delta
  bool z_delta_empty = true;
};

/// Scans the junction family over x2 heights and flags near-crossings of the
/// n-th and (n+1)-th dispersion surfaces.
CrossingDiagnostic crossing_diagnostic(const JunctionFamily& family, int band, double delta,
                                       const std::vector<double>& heights, const BZGrid& grid,
                                       int K = 0, Exec exec = Exec::Parallel);

}  // namespace bect
