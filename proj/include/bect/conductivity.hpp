#pragma once

#include <cstdint>
#include <vector>

#include "bect/models.hpp"
#include "bect/parallel.hpp"

namespace bect {

/// Spatial and spectral switch profiles of the trace formula. f ramps 0 -> 1
/// across [center - ell, center + ell]; g steps 1 -> 0 across
/// [lambda0 - eps, lambda0 + eps], so g' is a negative bump of total mass -1
/// supported inside the bulk gap.
struct SwitchFunctions {
  double lambda0 = 0;
  double eps = 0.1;
  double center = 0;
  double ell = 4;
  int f_order = 7;
  int g_order = 7;

  double f(double x1) const;
  double g(double lambda) const;
  double gprime(double lambda) const;
};

/// Glued interface Hamiltonian on the finite box {0..L1-1} x {-L2..L2} with
/// open boundaries, interface along x2 = 0. Hoppings along x1 are truncated
/// at r1_max for profile models (exact for matrix models); the dropped weight
/// is available as truncation_tail().
class BoxOperator {
 public:
  BoxOperator(const JunctionFamily& junction, int L1, int L2, int r1_max = 12);

  int L1() const { return L1_; }
  int L2() const { return L2_; }
  int orbital_dim() const { return dim_; }
  int size() const { return L1_ * (2 * L2_ + 1) * dim_; }
  int index(int n1, int n2, int orb) const {
    return ((n2 + L2_) * L1_ + n1) * dim_ + orb;
  }
  int bandwidth() const;
  double norm_bound() const;  // Gershgorin-type bound on ||H||
  double truncation_tail() const { return tail_; }

  void apply(const ComplexVector& x, ComplexVector& y) const;
  ComplexMatrix dense() const;
  /// Enumerate all entries (Hermitian, both triangles).
  void for_each_entry(const std::function<void(int, int, Complex)>& fn) const;

  /// Add a random Hermitian perturbation supported on sites |x2| <= 2 with
  /// operator norm at most `bound` (on-site terms only).
  void perturb_interface(std::uint64_t seed, double bound);

  const BulkModel& bulk_minus() const { return bulk_minus_; }
  const BulkModel& bulk_plus() const { return bulk_plus_; }

 private:
  int L1_ = 0, L2_ = 0, dim_ = 0;
  // mixed bond block for each hopping key, per midpoint height index
  struct Bond {
    int r1, r2;
    std::vector<ComplexMatrix> by_height;  // indexed by n2 + L2
  };
  std::vector<Bond> bonds_;
  double tail_ = 0;
  BulkModel bulk_minus_, bulk_plus_;  // kept for gap certification
};

struct WindowSpec {
  int margin = 8;
  void validate(int L1, int L2) const;
};

struct ConductivityResult {
  double value = 0;
  double two_pi_value = 0;
  int nearest_int = 0;
  double deviation = 0;          // |2 pi value - nearest_int|
  double imag_residual = 0;      // size of the discarded imaginary part
  double full_trace = 0;         // unwindowed trace, vanishes identically
  int window_states = 0;         // eigenpairs inside supp(g')
  bool dense_path = false;
};

struct ConductivityOptions {
  int dense_threshold = 2600;  // full diagonalization up to this matrix size
  std::uint64_t seed = 0x5eed;
  Exec exec = Exec::Parallel;
};

/// Windowed trace of i [H, f(x1)] g'(H) over sites at distance >= margin from
/// the box boundary. The unwindowed trace vanishes identically on a finite
/// box; the interface contribution survives the margin cut and 2 pi times the
/// value estimates the Chern-number difference across the interface. Only
/// eigenpairs inside supp(g') contribute, so large boxes use shift-invert
/// extraction of the gap-window eigenpairs instead of a full diagonalization.
ConductivityResult windowed_conductivity(const BoxOperator& box, const SwitchFunctions& s,
                                         const WindowSpec& w,
                                         const ConductivityOptions& opts = {});

struct ConvergenceRow {
  int L1 = 0, L2 = 0, margin = 0;
  double value = 0;
  double two_pi_value = 0;
  double diff_prev = 0;  // |2pi value - previous 2pi value|, 0 for the first row
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  /// Conservative finite-size error bar: the largest successive difference.
  double error_bar() const;
};

ConvergenceTable conductivity_convergence(const JunctionFamily& junction,
                                          const std::vector<std::pair<int, int>>& boxes,
                                          const SwitchFunctions& s, int margin, int r1_max = 12,
                                          const ConductivityOptions& opts = {});

}  // namespace bect
