#include <random>

#include "bect/banded.hpp"
#include "bect/conductivity.hpp"
#include "doctest.h"
#include "test_helpers.hpp"

using namespace bect;

namespace {

AppendixModel appendix(double eps, int nu) {
  AppendixModel m;
  m.epsilon = eps;
  m.nu = nu;
  return m;
}

JunctionFamily reference_junction() {
  return JunctionFamily::make(appendix(0.3, 1), MatrixModel::scalar_barrier(2, 2.0), 0.0);
}

SwitchFunctions switches_for(int L1, double eps = 0.15, int f_order = 7, int g_order = 7) {
  SwitchFunctions s;
  s.lambda0 = 0.0;
  s.eps = eps;
  s.center = L1 / 2.0 - 0.5;
  s.ell = L1 / 4.0;
  s.f_order = f_order;
  s.g_order = g_order;
  return s;
}

}  // namespace

TEST_CASE("switch function invariants") {
  SwitchFunctions s = switches_for(24);

  SUBCASE("f ramps monotonically from 0 to 1 with support in [-ell, ell]") {
    CHECK(s.f(s.center - s.ell - 0.1) == 0.0);
    CHECK(s.f(s.center + s.ell + 0.1) == 1.0);
    double prev = -1;
    for (double x = 0; x <= 24; x += 0.25) {
      CHECK(s.f(x) >= prev);
      prev = s.f(x);
    }
  }
  SUBCASE("g' is a negative bump of total mass -1 supported in the gap") {
    CHECK(s.gprime(s.lambda0 - s.eps - 1e-9) == 0.0);
    CHECK(s.gprime(s.lambda0 + s.eps + 1e-9) == 0.0);
    const int n = 20000;
    double integral = 0;
    for (int i = 0; i < n; ++i) {
      const double l = s.lambda0 - s.eps + 2 * s.eps * (i + 0.5) / n;
      const double gp = s.gprime(l);
      CHECK(gp <= 0.0);
      integral += gp * (2 * s.eps / n);
    }
    CHECK(integral == doctest::Approx(-1.0).epsilon(1e-10));
  }
  SUBCASE("g steps from 1 to 0") {
    CHECK(s.g(s.lambda0 - s.eps) == 1.0);
    CHECK(s.g(s.lambda0 + s.eps) == 0.0);
  }
}

TEST_CASE("box operator assembly") {
  BoxOperator box(reference_junction(), 16, 10, 10);

  SUBCASE("dense form is Hermitian") {
    const ComplexMatrix H = box.dense();
    CHECK((H - H.adjoint().eval()).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("sparse apply matches the dense matrix") {
    const ComplexMatrix H = box.dense();
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g(0, 1);
    ComplexVector x(box.size()), y(box.size());
    for (int i = 0; i < box.size(); ++i) x(i) = Complex(g(rng), g(rng));
    box.apply(x, y);
    CHECK((y - H * x).norm() < 1e-10 * x.norm() * box.norm_bound());
  }
  SUBCASE("deep bulk rows reproduce the pure models") {
    const ComplexMatrix H = box.dense();
    const RealHoppings app = real_hoppings(appendix(0.3, 1), 10);
    // a row well below the interface: all its blocks equal the appendix blocks
    const int n1 = 8, n2 = -7;
    for (const auto& [r, T] : app.blocks) {
      const int m1 = n1 + r.first, m2 = n2 + r.second;
      if (m1 < 0 || m1 >= 16 || m2 < -10 || m2 > 10) continue;
      ComplexMatrix got(2, 2);
      for (int o = 0; o < 2; ++o)
        for (int op = 0; op < 2; ++op) got(o, op) = H(box.index(n1, n2, o), box.index(m1, m2, op));
      CHECK((got - T).cwiseAbs().maxCoeff() < 1e-14);
    }
  }
}

TEST_CASE("banded LU solves against Eigen") {
  const int n = 150, band = 11;
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g(0, 1);
  ComplexMatrix A = ComplexMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = std::max(0, i - band); j <= std::min(n - 1, i + band); ++j)
      A(i, j) = Complex(g(rng), g(rng));
  A = (0.5 * (A + A.adjoint().eval())).eval();
  const Complex sigma(0.321, 0);
  BandedLU lu(
      n, band,
      [&](const std::function<void(int, int, Complex)>& put) {
        for (int i = 0; i < n; ++i)
          for (int j = std::max(0, i - band); j <= std::min(n - 1, i + band); ++j)
            if (A(i, j) != Complex(0, 0)) put(i, j, A(i, j));
      },
      sigma);
  ComplexVector rhs(n);
  for (int i = 0; i < n; ++i) rhs(i) = Complex(g(rng), g(rng));
  ComplexVector x = rhs;
  lu.solve_in_place(x);
  const ComplexMatrix M = A - sigma * ComplexMatrix::Identity(n, n);
  CHECK((M * x - rhs).norm() < 1e-10 * rhs.norm() * M.norm());
}

TEST_CASE("shifted factorization handles zero diagonals sparse assemblers skip") {
  // pure hopping chain: every diagonal entry is an exact zero the entry
  // callback never emits, so the shift must be applied independently
  const int n = 90;
  ComplexMatrix A = ComplexMatrix::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) {
    A(i, i + 1) = 1.0;
    A(i + 1, i) = 1.0;
  }
  const Complex sigma(0.4, 0);
  BandedLU lu(
      n, 1,
      [&](const std::function<void(int, int, Complex)>& put) {
        for (int i = 0; i + 1 < n; ++i) {
          put(i, i + 1, Complex(1, 0));
          put(i + 1, i, Complex(1, 0));
        }
      },
      sigma);
  ComplexVector rhs = ComplexVector::Ones(n);
  ComplexVector x = rhs;
  lu.solve_in_place(x);
  const ComplexMatrix M = A - sigma * ComplexMatrix::Identity(n, n);
  CHECK((M * x - rhs).norm() < 1e-10 * rhs.norm() * M.norm());

  SUBCASE("window eigenpairs around a nonzero shift") {
    auto apply = [&](const ComplexVector& v, ComplexVector& y) { y = A * v; };
    const WindowEigs eigs = window_eigenpairs(apply, lu, n, 0.4, 0.3, 0.5, A.norm());
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> dense(A);
    std::vector<double> expected;
    for (int q = 0; q < n; ++q)
      if (dense.eigenvalues()(q) >= 0.3 && dense.eigenvalues()(q) <= 0.5)
        expected.push_back(dense.eigenvalues()(q));
    REQUIRE(eigs.values.size() == expected.size());
    for (std::size_t q = 0; q < expected.size(); ++q)
      CHECK(eigs.values[q] == doctest::Approx(expected[q]).epsilon(1e-9));
  }
}

TEST_CASE("shift-invert window eigenpairs match a dense decomposition") {
  // random banded Hermitian with a handful of eigenvalues near zero
  const int n = 260, band = 7;
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g(0, 0.7);
  ComplexMatrix A = ComplexMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j <= std::min(n - 1, i + band); ++j) {
      A(i, j) = Complex(g(rng), g(rng));
      A(j, i) = std::conj(A(i, j));
    }
    A(i, i) = Complex(g(rng), 0);
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> dense(A);
  const double lo = -0.2, hi = 0.2;

  BandedLU lu(
      n, band,
      [&](const std::function<void(int, int, Complex)>& put) {
        for (int i = 0; i < n; ++i)
          for (int j = std::max(0, i - band); j <= std::min(n - 1, i + band); ++j)
            if (A(i, j) != Complex(0, 0)) put(i, j, A(i, j));
      },
      Complex(0, 0));
  auto apply = [&](const ComplexVector& x, ComplexVector& y) { y = A * x; };
  const WindowEigs eigs = window_eigenpairs(apply, lu, n, 0.0, lo, hi, A.norm());

  std::vector<double> expected;
  for (int q = 0; q < n; ++q)
    if (dense.eigenvalues()(q) >= lo && dense.eigenvalues()(q) <= hi)
      expected.push_back(dense.eigenvalues()(q));
  REQUIRE(eigs.values.size() == expected.size());
  for (std::size_t q = 0; q < expected.size(); ++q)
    CHECK(eigs.values[q] == doctest::Approx(expected[q]).epsilon(1e-9));
  // orthonormal vectors with small residuals
  for (std::size_t q = 0; q < eigs.values.size(); ++q) {
    CHECK(std::fabs(eigs.vectors.col(q).norm() - 1.0) < 1e-9);
    CHECK((A * eigs.vectors.col(q) - eigs.values[q] * eigs.vectors.col(q)).norm() <
          1e-7 * A.norm());
  }
}

TEST_CASE("windowed conductivity") {
  const JunctionFamily junction = reference_junction();

  SUBCASE("full-box trace vanishes and the windowed value finds the integer") {
    BoxOperator box(junction, 20, 12, 10);
    const SwitchFunctions s = switches_for(20);
    WindowSpec w;
    w.margin = 4;
    const ConductivityResult r = windowed_conductivity(box, s, w);
    CHECK(r.dense_path);
    CHECK(r.full_trace < 1e-10);
    CHECK(r.imag_residual < 1e-10);
    CHECK(r.nearest_int == 1);  // c1(barrier) - c1(appendix nu=1)
    CHECK(r.deviation < 0.15);
  }

  SUBCASE("identical gapped bulks give a near-zero control value") {
    AppendixModel m = appendix(0.3, 1);
    JunctionFamily control = JunctionFamily::make(m, m, 0.0);
    BoxOperator box(control, 20, 12, 10);
    const ConductivityResult r = windowed_conductivity(box, switches_for(20), WindowSpec{4});
    CHECK(std::fabs(r.two_pi_value) < 0.02);
  }

  SUBCASE("window margin invariant is enforced") {
    BoxOperator box(junction, 20, 12, 10);
    CHECK_THROWS_AS(windowed_conductivity(box, switches_for(20), WindowSpec{0}),
                    ConfigError);
    CHECK_THROWS_AS(windowed_conductivity(box, switches_for(20), WindowSpec{7}),
                    ConfigError);
  }

  SUBCASE("over-wide switch ramp is rejected") {
    BoxOperator box(junction, 20, 12, 10);
    SwitchFunctions s = switches_for(20);
    s.ell = 8.0;  // > L1 / 4
    CHECK_THROWS_AS(windowed_conductivity(box, s, WindowSpec{4}), ConfigError);
  }

  SUBCASE("a switch window touching the bulk bands is rejected") {
    BoxOperator box(junction, 20, 12, 10);
    SwitchFunctions s = switches_for(20, 0.4);  // wider than the bulk gap
    CHECK_THROWS_AS(windowed_conductivity(box, s, WindowSpec{4}), NumericalError);
  }

  SUBCASE("shift-invert path agrees with dense diagonalization") {
    BoxOperator box(junction, 20, 12, 10);
    const SwitchFunctions s = switches_for(20);
    WindowSpec w;
    w.margin = 4;
    ConductivityOptions dense_opts, lanczos_opts;
    dense_opts.dense_threshold = 1 << 20;
    lanczos_opts.dense_threshold = 0;
    const ConductivityResult rd = windowed_conductivity(box, s, w, dense_opts);
    const ConductivityResult rl = windowed_conductivity(box, s, w, lanczos_opts);
    CHECK(rd.dense_path);
    CHECK_FALSE(rl.dense_path);
    CHECK(rd.window_states == rl.window_states);
    CHECK(std::fabs(rd.value - rl.value) < 1e-8);
  }
}

TEST_CASE("independence surrogates on a desk-size box") {
  const JunctionFamily junction = reference_junction();
  BoxOperator box(junction, 20, 12, 10);
  WindowSpec w;
  w.margin = 4;
  const ConductivityResult base = windowed_conductivity(box, switches_for(20), w);
  // the finite-size error observed for this box
  const double bar = std::max(base.deviation, 0.02);

  SUBCASE("two admissible f profiles") {
    SwitchFunctions s2 = switches_for(20);
    s2.ell = 3.0;
    s2.f_order = 11;
    const ConductivityResult r = windowed_conductivity(box, s2, w);
    CHECK(std::fabs(r.value - base.value) * kTwoPi < bar);
  }
  SUBCASE("two admissible g bumps") {
    SwitchFunctions s2 = switches_for(20, 0.10, 7, 9);
    const ConductivityResult r = windowed_conductivity(box, s2, w);
    CHECK(std::fabs(r.value - base.value) * kTwoPi < bar);
  }
  SUBCASE("gap-bounded interface perturbation") {
    BoxOperator perturbed(junction, 20, 12, 10);
    perturbed.perturb_interface(314159, 0.15);  // half the bulk gap
    const ConductivityResult r = windowed_conductivity(perturbed, switches_for(20), w);
    CHECK(std::fabs(r.value - base.value) * kTwoPi < bar);
    CHECK(r.nearest_int == base.nearest_int);
  }
}

TEST_CASE("convergence table shrinks toward the integer") {
  const JunctionFamily junction = reference_junction();
  const SwitchFunctions s = switches_for(16);
  const ConvergenceTable t =
      conductivity_convergence(junction, {{16, 10}, {24, 14}}, s, 3, 10);
  REQUIRE(t.rows.size() == 2);
  CHECK(std::fabs(t.rows[1].two_pi_value - 1.0) <= std::fabs(t.rows[0].two_pi_value - 1.0) + 0.02);
  CHECK(t.error_bar() < 0.2);
}
