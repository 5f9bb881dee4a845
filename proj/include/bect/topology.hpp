#pragma once

#include <string>
#include <vector>

#include "bect/bands.hpp"
#include "bect/models.hpp"

namespace bect {

/// Spectral projector onto the bands below lambda0, sampled over a BZ grid.
/// Gauge-free: only the projectors (and optional per-node frames of their
/// range) are stored, never node-to-node eigenvector phases.
struct ProjectorField {
  BZGrid grid;
  int dim = 0;
  int rank = 0;
  double lambda0 = 0;
  std::vector<ComplexMatrix> projectors;  // dim x dim per node
  std::vector<ComplexMatrix> frames;      // dim x rank per node (optional)

  bool has_frames() const { return !frames.empty(); }
  /// Per-node orthonormal basis of the range; recomputed from the projector
  /// when no frame is stored.
  ComplexMatrix frame(int node) const;
};

/// Pi(xi) = sum_{lambda_i < lambda0} v_i v_i^dagger. Requires eigenvectors and
/// constant rank across the grid.
ProjectorField fermi_projector(const BandStructure& b, double lambda0);

struct ChernResult {
  int value = 0;
  Complex raw{0, 0};
  double residual = 0;
  std::string method;
};

struct CurvatureField {
  BZGrid grid;
  std::vector<Complex> values;  // Tr(Pi [d1 Pi, d2 Pi]) per node, purely imaginary
};

CurvatureField berry_curvature(const ProjectorField& p, Exec exec = Exec::Parallel);

/// c1 = (i / 2 pi) * integral of Tr(Pi [d1 Pi, d2 Pi]) over the torus,
/// spectral differentiation + trapezoid quadrature. Throws when the rounded
/// integer is not trustworthy (residual >= 0.5).
ChernResult berry_chern(const ProjectorField& p, Exec exec = Exec::Parallel);

/// Gauge-invariant plaquette method: link determinants of range frames,
/// summed plaquette phases / 2 pi. Integer by construction; requires every
/// plaquette phase < pi in magnitude. Orientation is fixed so that both
/// methods agree (calibrated once on the two-band reference model).
ChernResult lattice_chern(const ProjectorField& p, Exec exec = Exec::Parallel);

/// Closed-form curvature of the two-band reference model on the plateau
/// region xi1 in [-1, 1]: i eps^2 nu / (2 (xi1^2 + eps^2)^{3/2}).
Complex appendix_curvature_exact(double epsilon, int nu, double xi1);

/// Max entry deviation between Pi(xi + 2 pi k) and the index-shifted
/// conjugation of Pi(xi) on the common interior block |m_j| <= K_interior.
/// rank selects the projector (lowest `rank` bands at the sampled points).
double equivariance_check(const ContinuousModel& m, const Vec2& xi, int k1, int k2, int K,
                          int K_interior, int rank);

/// Same check at the Bloch-matrix level (exact away from truncated rows).
double matrix_equivariance_check(const ContinuousModel& m, const Vec2& xi, int k1, int k2, int K,
                                 int K_interior);

}  // namespace bect
