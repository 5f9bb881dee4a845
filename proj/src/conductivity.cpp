#include "bect/conductivity.hpp"

#include <cmath>
#include <random>
#include <set>

#include "bect/banded.hpp"
#include "bect/smoothstep.hpp"

namespace bect {

double SwitchFunctions::f(double x1) const {
  return smoothstep(f_order, (x1 - center + ell) / (2 * ell));
}

double SwitchFunctions::g(double lambda) const {
  return 1.0 - smoothstep(g_order, (lambda - lambda0 + eps) / (2 * eps));
}

double SwitchFunctions::gprime(double lambda) const {
  return -smoothstep_deriv(g_order, (lambda - lambda0 + eps) / (2 * eps)) / (2 * eps);
}

// ---------------------------------------------------------------------------
// BoxOperator
// ---------------------------------------------------------------------------

BoxOperator::BoxOperator(const JunctionFamily& junction, int L1, int L2, int r1_max)
    : L1_(L1), L2_(L2), bulk_minus_(junction.minus), bulk_plus_(junction.plus) {
  if (L1 < 8 || L2 < 4) throw ConfigError("box too small");
  const RealHoppings hm = real_hoppings(junction.minus, r1_max);
  const RealHoppings hp = real_hoppings(junction.plus, r1_max);
  const RealHoppings hb = real_hoppings(junction.barrier, r1_max);
  if (hm.dim != hp.dim || hm.dim != hb.dim)
    throw ConfigError("box bulks must share the orbital dimension");
  dim_ = hm.dim;
  tail_ = hm.truncation_tail + hp.truncation_tail + hb.truncation_tail;

  std::set<LatticeVector> keys;
  for (const auto* h : {&hm, &hp, &hb})
    for (const auto& [r, T] : h->blocks) keys.insert(r);

  const int heights = 2 * L2_ + 1;
  for (const auto& r : keys) {
    Bond bond;
    bond.r1 = r.first;
    bond.r2 = r.second;
    bond.by_height.resize(heights);
    for (int n2 = -L2_; n2 <= L2_; ++n2) {
      const double mid = n2 + 0.5 * bond.r2;
      const double wp = junction.profile.chi_plus(mid);
      const double wm = junction.profile.chi_minus(mid);
      const double w0 = junction.profile.chi_zero(mid);
      ComplexMatrix T = ComplexMatrix::Zero(dim_, dim_);
      auto add = [&](const RealHoppings& h, double w) {
        auto it = h.blocks.find(r);
        if (it != h.blocks.end() && w != 0.0) T += w * it->second;
      };
      add(hm, wm);
      add(hp, wp);
      add(hb, w0);
      bond.by_height[n2 + L2_] = std::move(T);
    }
    bonds_.push_back(std::move(bond));
  }
}

int BoxOperator::bandwidth() const {
  int b = 0;
  for (const auto& bond : bonds_)
    b = std::max(b, (std::abs(bond.r2) * L1_ + std::abs(bond.r1)) * dim_ + dim_ - 1);
  return b;
}

double BoxOperator::norm_bound() const {
  double bound = 0;
  for (int n2 = -L2_; n2 <= L2_; ++n2) {
    double row = 0;
    for (const auto& bond : bonds_) row += bond.by_height[n2 + L2_].cwiseAbs().maxCoeff() * dim_;
    bound = std::max(bound, row);
  }
  return bound;
}

void BoxOperator::for_each_entry(const std::function<void(int, int, Complex)>& fn) const {
  for (const auto& bond : bonds_)
    for (int n2 = -L2_; n2 <= L2_; ++n2) {
      const int m2 = n2 + bond.r2;
      if (m2 < -L2_ || m2 > L2_) continue;
      const ComplexMatrix& T = bond.by_height[n2 + L2_];
      if (T.isZero(0)) continue;
      const int lo1 = std::max(0, -bond.r1), hi1 = std::min(L1_, L1_ - bond.r1);
      for (int n1 = lo1; n1 < hi1; ++n1)
        for (int o = 0; o < dim_; ++o)
          for (int op = 0; op < dim_; ++op) {
            const Complex v = T(o, op);
            if (v != Complex(0, 0)) fn(index(n1, n2, o), index(n1 + bond.r1, m2, op), v);
          }
    }
}

void BoxOperator::apply(const ComplexVector& x, ComplexVector& y) const {
  y.setZero();
  for (const auto& bond : bonds_)
    for (int n2 = -L2_; n2 <= L2_; ++n2) {
      const int m2 = n2 + bond.r2;
      if (m2 < -L2_ || m2 > L2_) continue;
      const ComplexMatrix& T = bond.by_height[n2 + L2_];
      if (T.isZero(0)) continue;
      const int lo1 = std::max(0, -bond.r1), hi1 = std::min(L1_, L1_ - bond.r1);
      for (int n1 = lo1; n1 < hi1; ++n1) {
        const int row = index(n1, n2, 0), col = index(n1 + bond.r1, m2, 0);
        for (int o = 0; o < dim_; ++o) {
          Complex acc(0, 0);
          for (int op = 0; op < dim_; ++op) acc += T(o, op) * x(col + op);
          y(row + o) += acc;
        }
      }
    }
}

ComplexMatrix BoxOperator::dense() const {
  ComplexMatrix H = ComplexMatrix::Zero(size(), size());
  for_each_entry([&](int i, int j, Complex v) { H(i, j) += v; });
  return H;
}

void BoxOperator::perturb_interface(std::uint64_t seed, double bound) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Bond onsite;
  onsite.r1 = 0;
  onsite.r2 = 0;
  onsite.by_height.assign(2 * L2_ + 1, ComplexMatrix::Zero(dim_, dim_));
  for (int n2 = -2; n2 <= 2; ++n2) {
    ComplexMatrix W(dim_, dim_);
    for (int o = 0; o < dim_; ++o)
      for (int op = 0; op < dim_; ++op) W(o, op) = Complex(u(rng), u(rng));
    W = 0.5 * (W + W.adjoint().eval());
    const double nrm = W.operatorNorm();
    if (nrm > 0) W *= bound / nrm;
    onsite.by_height[n2 + L2_] = W;
  }
  bonds_.push_back(std::move(onsite));
}

// ---------------------------------------------------------------------------
// Windowed trace
// ---------------------------------------------------------------------------

void WindowSpec::validate(int L1, int L2) const {
  const int limit = std::min(L1, 2 * L2 + 1) / 3;
  if (!(margin > 0 && margin < limit))
    throw ConfigError("window margin must satisfy 0 < m < min(L1, 2 L2 + 1) / 3");
}

namespace {

// supp(g') must avoid the spectra of both bulk models.
void certify_bulk_gap(const BulkModel& m, double lambda0, double eps) {
  const BlochFamily family = std::holds_alternative<MatrixModel>(m)
                                 ? BlochFamily(std::get<MatrixModel>(m))
                                 : BlochFamily(std::get<AppendixModel>(m));
  const int probe = 48;
  for (int a = 0; a < probe; ++a)
    for (int b = 0; b < probe; ++b) {
      Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(
          family(Vec2(kTwoPi * a / probe, kTwoPi * b / probe)), Eigen::EigenvaluesOnly);
      for (int q = 0; q < family.dim(); ++q)
        if (std::fabs(es.eigenvalues()(q) - lambda0) < eps)
          throw NumericalError("conductivity",
                               "bulk gap not certified: a bulk eigenvalue " +
                                   std::to_string(es.eigenvalues()(q)) +
                                   " lies inside the switch window");
    }
}

}  // namespace

ConductivityResult windowed_conductivity(const BoxOperator& box, const SwitchFunctions& s,
                                         const WindowSpec& w, const ConductivityOptions& opts) {
  w.validate(box.L1(), box.L2());
  if (!(s.ell <= box.L1() / 4.0))
    throw ConfigError("switch half-width ell must be at most L1/4");
  certify_bulk_gap(box.bulk_minus(), s.lambda0, s.eps);
  certify_bulk_gap(box.bulk_plus(), s.lambda0, s.eps);
  const int n = box.size();

  // Eigenpairs carrying weight: g' vanishes outside [lambda0 - eps, lambda0 + eps].
  std::vector<double> values;
  ComplexMatrix vectors;
  bool dense_path = n <= opts.dense_threshold;
  if (dense_path) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(box.dense());
    std::vector<int> keep;
    for (int q = 0; q < n; ++q)
      if (s.gprime(es.eigenvalues()(q)) != 0.0) keep.push_back(q);
    vectors = ComplexMatrix(n, keep.size());
    for (std::size_t i = 0; i < keep.size(); ++i) {
      values.push_back(es.eigenvalues()(keep[i]));
      vectors.col(i) = es.eigenvectors().col(keep[i]);
    }
  } else {
    const double lo = s.lambda0 - s.eps, hi = s.lambda0 + s.eps;
    const double sigma = s.lambda0;
    BandedLU shifted(
        n, box.bandwidth(),
        [&](const std::function<void(int, int, Complex)>& put) { box.for_each_entry(put); },
        Complex(sigma, 0));
    auto apply = [&](const ComplexVector& x, ComplexVector& y) { box.apply(x, y); };
    WindowEigsOptions weo;
    weo.seed = opts.seed;
    const WindowEigs eigs =
        window_eigenpairs(apply, shifted, n, sigma, lo, hi, box.norm_bound(), weo);
    values = eigs.values;
    vectors = eigs.vectors;
  }

  // Diagonal switch profile and interior mask.
  RealVector fdiag(n);
  std::vector<char> interior(n, 0);
  for (int n1 = 0; n1 < box.L1(); ++n1)
    for (int n2 = -box.L2(); n2 <= box.L2(); ++n2) {
      const bool in = n1 >= w.margin && n1 < box.L1() - w.margin && n2 >= -box.L2() + w.margin &&
                      n2 <= box.L2() - w.margin;
      for (int o = 0; o < box.orbital_dim(); ++o) {
        const int id = box.index(n1, n2, o);
        fdiag(id) = s.f(n1);
        interior[id] = in;
      }
    }

  Complex windowed(0, 0), full(0, 0);
  ComplexVector Hv(n), com(n);
  for (std::size_t q = 0; q < values.size(); ++q) {
    const double weight = s.gprime(values[q]);
    if (weight == 0.0) continue;
    const ComplexVector v = vectors.col(q);
    box.apply(v, Hv);
    // [H, F] v = H (F v) - F (H v)
    ComplexVector Fv = fdiag.cast<Complex>().cwiseProduct(v);
    box.apply(Fv, com);
    com -= fdiag.cast<Complex>().cwiseProduct(Hv);
    Complex acc_window(0, 0), acc_full(0, 0);
    for (int i = 0; i < n; ++i) {
      const Complex t = std::conj(v(i)) * Complex(0, 1) * com(i);
      acc_full += t;
      if (interior[i]) acc_window += t;
    }
    windowed += weight * acc_window;
    full += weight * acc_full;
  }

  ConductivityResult r;
  r.value = windowed.real();
  r.imag_residual = std::abs(windowed.imag());
  r.full_trace = std::abs(full);
  r.two_pi_value = kTwoPi * r.value;
  r.nearest_int = (int)std::llround(r.two_pi_value);
  r.deviation = std::fabs(r.two_pi_value - r.nearest_int);
  r.window_states = (int)values.size();
  r.dense_path = dense_path;
  return r;
}

double ConvergenceTable::error_bar() const {
  if (rows.size() < 2) return 1e300;
  double bar = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) bar = std::max(bar, rows[i].diff_prev);
  return bar;
}

ConvergenceTable conductivity_convergence(const JunctionFamily& junction,
                                          const std::vector<std::pair<int, int>>& boxes,
                                          const SwitchFunctions& s, int margin, int r1_max,
                                          const ConductivityOptions& opts) {
  ConvergenceTable table;
  for (const auto& [L1, L2] : boxes) {
    BoxOperator box(junction, L1, L2, r1_max);
    SwitchFunctions sw = s;
    sw.center = L1 / 2.0 - 0.5;
    sw.ell = std::min(s.ell, L1 / 4.0);  // keep the ramp admissible on small boxes
    WindowSpec w;
    w.margin = margin;
    const ConductivityResult res = windowed_conductivity(box, sw, w, opts);
    ConvergenceRow row;
    row.L1 = L1;
    row.L2 = L2;
    row.margin = margin;
    row.value = res.value;
    row.two_pi_value = res.two_pi_value;
    row.diff_prev =
        table.rows.empty() ? 0.0 : std::fabs(res.two_pi_value - table.rows.back().two_pi_value);
    table.rows.push_back(row);
  }
  return table;
}

}  // namespace bect
