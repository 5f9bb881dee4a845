#pragma once

#include <vector>

#include "bect/topology.hpp"

namespace bect {

/// Two-level symbol E(xi; lambda) = (lambda - lambda1) Pi1(xi) + (lambda - lambda2) Pi2(xi)
/// with Pi2 = Id - Pi1. Invertible off {lambda1, lambda2} with
/// E^{-1} = Pi1/(lambda - lambda1) + Pi2/(lambda - lambda2), and dE/dlambda = Id.
struct TwoLevelSymbol {
  ProjectorField pi1;
  double lambda1 = -1;
  double lambda2 = 1;

  TwoLevelSymbol(ProjectorField p, double l1, double l2);

  ComplexMatrix eval(int node, Complex lambda) const;
  ComplexMatrix inverse(int node, Complex lambda) const;
};

/// Circle in the complex plane enclosing lambda1 but not lambda2,
/// counterclockwise.
struct ContourSpec {
  Complex center{-1, 0};
  double radius = 1;
  int nodes = 64;

  void validate(double lambda1, double lambda2) const;
  static ContourSpec default_for(double lambda1, double lambda2);
};

struct EffectiveIndexResult {
  Complex J{0, 0};
  Complex two_i_pi_J{0, 0};
  int chern = 0;
  double residual = 0;
  std::string method;
};

/// Spectrum flattening Q(xi) = lambda1 Pi + lambda2 (Id - Pi) per node.
std::vector<ComplexMatrix> two_level_rearrangement(const ProjectorField& p, double lambda1,
                                                   double lambda2);

/// Compression of a projector field in a D-dimensional space onto per-node
/// orthonormal frames phi_1..phi_d: Pi1 = F^dagger Pi F. Frames must be
/// orthonormal and contain the range of Pi (leakage checked to `tol`).
ProjectorField reduced_projector(const ProjectorField& p,
                                 const std::vector<ComplexMatrix>& frames, double tol = 1e-8);

/// A symbol family sampled over the torus grid, for the contour evaluator:
/// matrices E(xi; lambda) and their lambda-derivatives at arbitrary complex
/// lambda. Any family works as long as E is invertible on the contour.
struct SampledSymbolFamily {
  int dim = 0;
  BZGrid grid;
  std::function<ComplexMatrix(int node, Complex lambda)> eval;
  std::function<ComplexMatrix(int node, Complex lambda)> eval_dlambda;
};

/// Index of an effective symbol family by contour-times-torus quadrature:
///   J = -(1/2 i pi) * contour integral of  (1/(2 pi)^2) * sum_xi
///         Tr(d_xi1 E * E^{-1} * d_xi2(d_lambda E * E^{-1})).
/// E is sampled and inverted numerically per (xi, lambda) node; invertibility
/// on the contour is certified per node.
EffectiveIndexResult index_J_contour(const SampledSymbolFamily& family, const ContourSpec& c,
                                     Exec exec = Exec::Parallel);

/// Two-level specialization: validates that the contour encloses lambda1 and
/// excludes lambda2, then runs the general evaluator.
EffectiveIndexResult index_J_contour(const TwoLevelSymbol& t, const ContourSpec& c,
                                     Exec exec = Exec::Parallel);

/// Same index after resolving the contour into residues at lambda1:
///   J = (1/(2 pi)^2) * integral of Tr(Pi1 [d1 Pi1, d2 Pi1]),
/// evaluated with the curvature-quadrature machinery. 2 i pi J = c1(Pi1).
EffectiveIndexResult index_J_residue(const TwoLevelSymbol& t, Exec exec = Exec::Parallel);

}  // namespace bect
