#pragma once

#include <functional>
#include <map>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "bect/types.hpp"

namespace bect {

using LatticeVector = std::pair<int, int>;

/// Z^2-periodic function given by finitely many Fourier coefficients on the
/// basis e^{2 pi i k.y}.
struct FourierFunction {
  std::map<LatticeVector, Complex> coeffs;

  Complex coeff(int k1, int k2) const;
  void set(int k1, int k2, Complex v);
  int support_radius() const;  // max over coefficients of max(|k1|,|k2|)
  Complex eval(double y1, double y2) const;
  /// f real-valued <=> fhat(-k) = conj(fhat(k)).
  double reality_defect() const;
  bool empty() const { return coeffs.empty(); }
};

enum class ContinuousKind { MagneticSchrodinger, DivergenceForm, GeneralSecondOrder };

std::string to_string(ContinuousKind);
ContinuousKind continuous_kind_from_string(const std::string&);

/// Periodic second-order differential operator on the unit cell, band-limited
/// coefficients. Coefficient functions are keyed by name:
///   magnetic-schrodinger : V, A1, A2          (-(grad + iA)^2 + V)
///   divergence-form      : s11, s12, s21, s22 (-div(sigma grad))
///   general-second-order : a00, a10, a01, a20, a11, a02  (sum a_alpha D^alpha)
struct ContinuousModel {
  ContinuousKind kind = ContinuousKind::MagneticSchrodinger;
  std::map<std::string, FourierFunction> fns;

  /// Certified ellipticity constant of the principal part, set by validate().
  double ellipticity = 0.0;

  const FourierFunction& fn(const std::string& name) const;
  int support_radius() const;

  /// Enforces the reality/Hermiticity conditions on the coefficients and
  /// certifies ellipticity on a probe grid. Throws ConfigError on violation.
  void validate();
};

/// Tight-binding symbol H(xi) = sum_r T_r e^{i r.xi} with finite hopping
/// support and T_{-r} = T_r^dagger.
struct MatrixModel {
  int dim = 0;
  std::map<LatticeVector, ComplexMatrix> hoppings;

  void validate() const;
  int r1_range() const;
  int r2_range() const;
  /// xi is reduced mod 2*pi componentwise, so H(xi + 2*pi*k) == H(xi) exactly.
  ComplexMatrix symbol(const Vec2& xi) const;

  /// Diagonal model c*Id, the default interface barrier.
  static MatrixModel scalar_barrier(int dim, double c);
};

/// Two-band reference model with tunable Chern number. The diagonal profile
/// alpha equals xi1 on [-1,1] and bridges to sin(xi1) outside; beta vanishes
/// on [-1,1] and is positive elsewhere on the fundamental domain. Windows are
/// polynomial smoothsteps (order >= 7). The spectral gap at 0 is certified
/// numerically at construction.
struct AppendixModel {
  double epsilon = 0.3;
  int nu = 1;
  int window_order = 11;
  double plateau_end = 1.0;   // window == 1 on [-plateau_end, plateau_end]
  double support_end = 2.5;   // window == 0 outside (-support_end, support_end)

  double window(double xi1) const;
  double alpha(double xi1) const;
  double beta(double xi1) const;
  Eigen::Matrix2cd symbol(const Vec2& xi) const;

  /// min over a probe grid of sqrt(-det M) = half the certified gap width.
  double min_gap(int probe_n = 512) const;
  void validate() const;  // epsilon > 0, beta > 0 off the plateau, gap > 0
};

using BulkModel = std::variant<ContinuousModel, MatrixModel, AppendixModel>;

/// Square plane-wave truncation |k_j| <= K of L^2 of the unit cell.
struct PlaneWaveBasis {
  int K;
  explicit PlaneWaveBasis(int K_) : K(K_) {}
  int size() const { return (2 * K + 1) * (2 * K + 1); }
  int index(int k1, int k2) const { return (k1 + K) * (2 * K + 1) + (k2 + K); }
  LatticeVector wave(int i) const { return {i / (2 * K + 1) - K, i % (2 * K + 1) - K}; }
  bool contains(int k1, int k2) const { return std::abs(k1) <= K && std::abs(k2) <= K; }
};

/// Convolution (multiplication-operator) matrix of f on the truncated basis.
ComplexMatrix convolution_matrix(const FourierFunction& f, const PlaneWaveBasis& basis);

/// Bloch fiber of a continuous model at quasimomentum xi, assembled by
/// operator composition on the truncated plane-wave basis and symmetrized.
/// Requires K >= support radius of the coefficients.
ComplexMatrix bloch_matrix(const ContinuousModel& model, const Vec2& xi, int K);

/// Uniform handle on "xi -> Hermitian matrix" families. Continuous models are
/// bound to a truncation K at construction. Evaluation is pure and safe to
/// call concurrently.
class BlochFamily {
 public:
  BlochFamily(MatrixModel m);
  BlochFamily(AppendixModel m);
  BlochFamily(ContinuousModel m, int K);

  int dim() const { return dim_; }
  int truncation() const { return K_; }  // 0 for lattice models
  ComplexMatrix operator()(const Vec2& xi) const;
  const BulkModel& model() const { return model_; }

 private:
  BulkModel model_;
  int K_ = 0;
  int dim_ = 0;
};

// ---------------------------------------------------------------------------
// Interface gluing
// ---------------------------------------------------------------------------

/// Partition of unity along x2: chi_plus ramps 0->1 on [1,2], chi_minus is the
/// mirror image, chi_zero = 1 - chi_plus - chi_minus covers the middle.
struct GlueProfile {
  int order = 7;
  double chi_plus(double x2) const;
  double chi_minus(double x2) const;
  double chi_zero(double x2) const;
};

/// Junction data: bulk model below (x2 <= -2), bulk model above (x2 >= 2) and
/// the barrier in between.
struct JunctionFamily {
  BulkModel minus;
  BulkModel plus;
  BulkModel barrier;
  GlueProfile profile;

  /// Default barrier c*Id with c = |lambda0| + 2 (matrix models) or
  /// -Delta + |lambda0| + 2 (continuous models).
  static JunctionFamily make(BulkModel minus, BulkModel plus, double lambda0);
  static JunctionFamily make_with_barrier(BulkModel minus, BulkModel plus, BulkModel barrier);
};

/// Coefficient snapshot at height x2: chi_+ * plus + chi_- * minus + chi_0 * barrier.
/// Both bulks (and the barrier) must be of the same concrete type and size.
BulkModel glue_family(const JunctionFamily& j, double x2);

// ---------------------------------------------------------------------------
// Hopping tables (edge-direction reductions)
// ---------------------------------------------------------------------------

/// Partial Fourier transform along the edge: T_{r2}(zeta) = sum_{r1} T_{(r1,r2)} e^{i r1 zeta},
/// so that sum_{r2} T_{r2}(zeta) e^{i r2 xi2} reconstructs the full symbol.
/// Entries satisfy T_{-r2}(zeta) = T_{r2}(zeta)^dagger.
struct StripHoppings {
  int dim = 0;
  std::vector<int> offsets;  // the r2 with a nonzero block
  std::function<ComplexMatrix(int r2, double zeta)> block;

  int range() const;
};

StripHoppings hopping_table(const MatrixModel& m);
/// Exact: the winding factor e^{i nu xi2} yields blocks at r2 in {-nu, 0, nu}.
StripHoppings hopping_table(const AppendixModel& m);
StripHoppings hopping_table(const BulkModel& m);

/// Real-space hopping blocks for finite boxes. Exact for matrix models; the
/// appendix profiles are truncated in r1 at `r1_max` and the dropped Fourier
/// weight is reported in truncation_tail (sup-norm bound on the error).
struct RealHoppings {
  int dim = 0;
  std::map<LatticeVector, ComplexMatrix> blocks;
  double truncation_tail = 0.0;

  int r1_range() const;
  int r2_range() const;
};

RealHoppings real_hoppings(const MatrixModel& m);
RealHoppings real_hoppings(const AppendixModel& m, int r1_max);
RealHoppings real_hoppings(const BulkModel& m, int r1_max);

/// Truncated lattice form of the two-band reference model (edge-direction
/// profiles expanded in r1 Fourier modes up to r1_max).
MatrixModel to_matrix_model(const AppendixModel& m, int r1_max = 16);

// ---------------------------------------------------------------------------
// JSON model files
// ---------------------------------------------------------------------------

BulkModel model_from_json_text(const std::string& text);
BulkModel model_from_json_file(const std::string& path);
std::string model_to_json_text(const BulkModel& m);

int model_dim(const BulkModel& m);  // orbital dimension (1 for continuous)

}  // namespace bect
