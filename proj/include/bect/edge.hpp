#pragma once

#include <optional>
#include <vector>

#include "bect/bands.hpp"
#include "bect/models.hpp"
#include "bect/topology.hpp"

namespace bect {

/// Interface Hamiltonian on a truncated strip: sites x2 in {-W..W}, open ends,
/// Floquet parameter zeta along the edge. Bond blocks come from the glued
/// hopping tables evaluated at the bond midpoint height, which keeps the
/// assembly Hermitian for every zeta. Rows far from the transition reproduce
/// the pure bulk blocks exactly.
class StripOperator {
 public:
  StripOperator(const JunctionFamily& junction, int width);

  int width() const { return width_; }
  int orbital_dim() const { return dim_; }
  int size() const { return dim_ * (2 * width_ + 1); }
  int hopping_range() const;

  ComplexMatrix matrix(double zeta) const;

  /// Fraction of the norm of column q carried by sites |x2| <= width/3.
  double localization_weight(const ComplexMatrix& vectors, int q) const;

  /// Union of the two bulk spectra at this zeta, sampled over transverse
  /// momentum: the essential-spectrum proxy for the truncated strip.
  std::vector<std::pair<double, double>> bulk_bands(double zeta, int n_xi2 = 64) const;

 private:
  StripHoppings minus_, plus_, barrier_;
  GlueProfile profile_;
  int width_ = 0;
  int dim_ = 0;
  std::vector<int> offsets_;  // union of the three tables

  ComplexMatrix bond_block(int r2, double zeta, double midpoint_height) const;
};

struct FloquetState {
  double eigenvalue = 0;
  double localization = 0;
};

/// Window spectrum of the strip family over an adaptively refined zeta grid
/// on [0, 2*pi]. Refinement continues until matched eigenvalue curves move
/// less than window/4 per step (and entries/exits stay near the window edge).
struct FloquetSpectrum {
  double lambda0 = 0;
  double window = 0;  // half-width w; states kept when |lambda - lambda0| < w
  std::vector<double> zetas;                    // ascending, zetas.front()=0, back()=2*pi
  std::vector<std::vector<FloquetState>> states;  // per zeta, ascending eigenvalue
  bool partial = false;  // node budget exhausted before the displacement bound
  std::vector<std::pair<double, double>> unresolved;  // zeta intervals left ambiguous
};

struct FloquetOptions {
  int initial_nodes = 200;
  int node_budget = 4000;
  int max_refine_depth = 16;
  Exec exec = Exec::Parallel;
};

/// Abstract Floquet fiber: zeta -> Hermitian matrix plus a localization
/// weight for eigenvector columns. Lattice strips and finite-difference
/// continuous strips both sweep through this interface.
struct FiberFamily {
  std::function<ComplexMatrix(double zeta)> matrix;
  std::function<double(const ComplexMatrix& vectors, int column)> localization;
};

FloquetSpectrum floquet_spectrum(const FiberFamily& family, double lambda0, double window,
                                 const FloquetOptions& opts = {});
FloquetSpectrum floquet_spectrum(const StripOperator& strip, double lambda0, double window,
                                 const FloquetOptions& opts = {});

struct Crossing {
  double zeta = 0;
  int sign = 0;           // +1 for upward, -1 for downward
  double localization = 0;
};

struct SpectralFlowResult {
  int flow = 0;
  std::vector<Crossing> crossings;  // retained crossings only
  bool filtered = true;
  int unfiltered_flow = 0;
};

/// Counts signed crossings of lambda0 along matched eigenvalue curves.
/// Crossings carried by states with localization weight < theta are discarded
/// when filtering (they belong to the open outer boundaries, not the
/// interface).
SpectralFlowResult spectral_flow(const FloquetSpectrum& fs, double lambda0, double theta,
                                 bool filtered = true);

struct BecReport {
  int c1_plus = 0;
  int c1_minus = 0;
  int spectral_flow = 0;
  bool match = false;
  double berry_residual_plus = 0;
  double berry_residual_minus = 0;
};

struct BecOptions {
  int width = 40;
  int zeta_nodes = 200;
  double window = 0;          // 0: half of the certified joint gap half-width
  double loc_threshold = 0.5;
  BZGrid chern_grid{24, 24};
  Exec exec = Exec::Parallel;
};

/// Full bulk-edge pipeline: bulk Chern numbers via the plaquette method,
/// filtered spectral flow of the glued strip, and the equality check
/// flow == c1(plus) - c1(minus).
BecReport verify_bec(const BulkModel& minus, const BulkModel& plus, double lambda0,
                     const BecOptions& opts = {});

struct ConcatenationReport {
  int flow_minus_plus = 0;
  int flow_minus_barrier = 0;
  int flow_barrier_plus = 0;
  bool additive = false;
};

/// flow(minus, plus) == flow(minus, barrier) + flow(barrier, plus).
ConcatenationReport concatenation_check(const BulkModel& minus, const BulkModel& plus,
                                        const BulkModel& barrier, double lambda0,
                                        const BecOptions& opts = {});

// ---------------------------------------------------------------------------
// Continuous interfaces (Fourier modes along the edge, finite differences
// across). Provided for PDE junctions; the verification suite runs on the
// lattice path.
// ---------------------------------------------------------------------------

struct ContinuousStripOptions {
  int fourier_modes = 6;    // modes m with |m| <= fourier_modes along the edge
  int points_per_cell = 8;  // finite-difference resolution across the strip
  int half_width = 8;       // strip covers x2 in [-half_width, half_width]
};

/// Floquet fiber of a glued continuous junction: Dirichlet ends, second-order
/// differences in x2, plane waves e^{i (2 pi m + zeta) x1} along the edge.
ComplexMatrix continuous_strip_matrix(const JunctionFamily& junction, double zeta,
                                      const ContinuousStripOptions& opts);

/// Sweepable family for continuous junctions (owns a copy of the junction).
/// Localization weights measure the norm fraction within |x2| <= half_width/3.
FiberFamily continuous_fiber(JunctionFamily junction, const ContinuousStripOptions& opts);

}  // namespace bect
