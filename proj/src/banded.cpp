#include "bect/banded.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace bect {

BandedLU::BandedLU(int n, int band,
                   const std::function<void(const std::function<void(int, int, Complex)>&)>& entries,
                   Complex sigma)
    : n_(n), kl_(band), ku_(band) {
  ab_ = Eigen::MatrixXcd::Zero(2 * kl_ + ku_ + 1, n_);
  const int row0 = kl_ + ku_;
  entries([&](int i, int j, Complex v) {
    if (i < 0 || j < 0 || i >= n_ || j >= n_ || std::abs(i - j) > band)
      throw ConfigError("banded entry outside the declared bandwidth");
    ab_(row0 + i - j, j) += v;
  });
  // the shift applies to every diagonal slot, including ones never touched
  // by the callback (sparse assemblers skip exact zeros)
  for (int j = 0; j < n_; ++j) ab_(row0, j) -= sigma;

  pivots_.resize(n_);
  const int kv = kl_ + ku_;  // widened upper band
  for (int j = 0; j < n_; ++j) {
    const int pmax = std::min(kl_, n_ - 1 - j);
    // partial pivot within the column
    int p = 0;
    double best = std::abs(ab_(row0, j));
    for (int i = 1; i <= pmax; ++i) {
      const double m = std::abs(ab_(row0 + i, j));
      if (m > best) {
        best = m;
        p = i;
      }
    }
    pivots_[j] = j + p;
    if (best == 0.0) throw NumericalError("banded", "exactly singular pivot in banded LU");
    const int ncols = std::min(kv, n_ - 1 - j);
    if (p != 0)
      for (int k = 0; k <= ncols; ++k) std::swap(ab_(row0 + p - k, j + k), ab_(row0 - k, j + k));
    const Complex piv = ab_(row0, j);
    for (int i = 1; i <= pmax; ++i) ab_(row0 + i, j) /= piv;
    for (int k = 1; k <= ncols; ++k) {
      const Complex up = ab_(row0 - k, j + k);
      if (up == Complex(0, 0)) continue;
      for (int i = 1; i <= pmax; ++i) ab_(row0 + i - k, j + k) -= ab_(row0 + i, j) * up;
    }
  }
}

void BandedLU::solve_in_place(ComplexVector& x) const {
  const int row0 = kl_ + ku_;
  const int kv = kl_ + ku_;
  for (int j = 0; j < n_; ++j) {
    if (pivots_[j] != j) std::swap(x(j), x(pivots_[j]));
    const Complex xj = x(j);
    if (xj == Complex(0, 0)) continue;
    const int imax = std::min(kl_, n_ - 1 - j);
    for (int i = 1; i <= imax; ++i) x(j + i) -= ab_(row0 + i, j) * xj;
  }
  for (int j = n_ - 1; j >= 0; --j) {
    const int kmax = std::min(kv, n_ - 1 - j);
    Complex acc = x(j);
    for (int k = 1; k <= kmax; ++k) acc -= ab_(row0 - k, j + k) * x(j + k);
    x(j) = acc / ab_(row0, j);
  }
}

namespace {

ComplexVector random_start(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  ComplexVector v(n);
  for (int i = 0; i < n; ++i) v(i) = Complex(g(rng), g(rng));
  v /= v.norm();
  return v;
}

}  // namespace

WindowEigs window_eigenpairs(const std::function<void(const ComplexVector&, ComplexVector&)>& apply,
                             const BandedLU& shifted, int n, double sigma, double lo, double hi,
                             double norm_bound, const WindowEigsOptions& opts) {
  WindowEigs out;
  std::vector<ComplexVector> locked;
  const double tol = opts.residual_tol * std::max(norm_bound, 1.0);

  for (int pass = 0; pass < opts.max_passes; ++pass) {
    const int m = std::min(opts.max_iterations, n - (int)locked.size());
    if (m < 2) break;

    std::vector<ComplexVector> basis;
    std::vector<double> alpha, beta;
    ComplexVector v = random_start(n, opts.seed + 977 * pass);
    auto project_out = [&](ComplexVector& w) {
      for (const auto& u : locked) w -= u * u.dot(w);
      for (const auto& u : basis) w -= u * u.dot(w);
    };
    project_out(v);
    if (v.norm() < 1e-12) break;
    v /= v.norm();

    for (int k = 0; k < m; ++k) {
      basis.push_back(v);
      ComplexVector w = v;
      shifted.solve_in_place(w);
      // (H - sigma)^{-1} is Hermitian, so the Lanczos recursion applies.
      const double a = std::real(basis[k].dot(w));
      alpha.push_back(a);
      // full reorthogonalization, twice for safety
      project_out(w);
      project_out(w);
      const double b = w.norm();
      if (b < 1e-12) break;
      beta.push_back(b);
      v = w / b;
    }
    beta.resize(alpha.size() > 0 ? alpha.size() - 1 : 0);

    const int k = (int)alpha.size();
    if (k == 0) break;
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(k, k);
    for (int i = 0; i < k; ++i) {
      T(i, i) = alpha[i];
      if (i + 1 < k) T(i, i + 1) = T(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);

    int found = 0;
    for (int q = 0; q < k; ++q) {
      const double mu = es.eigenvalues()(q);
      if (mu == 0.0) continue;
      const double lambda = sigma + 1.0 / mu;
      if (lambda < lo || lambda > hi) continue;
      ComplexVector y = ComplexVector::Zero(n);
      for (int i = 0; i < k; ++i) y += es.eigenvectors()(i, q) * basis[i];
      for (const auto& u : locked) y -= u * u.dot(y);
      const double nrm = y.norm();
      if (nrm < 1e-8) continue;  // already represented in a previous pass
      y /= nrm;
      ComplexVector Hy(n);
      apply(y, Hy);
      const double lam = std::real(y.dot(Hy));
      if ((Hy - lam * y).norm() > tol) continue;
      if (lam < lo || lam > hi) continue;
      locked.push_back(y);
      out.values.push_back(lam);
      ++found;
    }
    if (found == 0 && pass > 0) break;
  }

  // sort ascending, keep vector columns aligned
  std::vector<int> order(out.values.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = (int)i;
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return out.values[a] < out.values[b]; });
  WindowEigs sorted;
  sorted.vectors = ComplexMatrix(n, out.values.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    sorted.values.push_back(out.values[order[i]]);
    sorted.vectors.col(i) = locked[order[i]];
  }
  return sorted;
}

}  // namespace bect
