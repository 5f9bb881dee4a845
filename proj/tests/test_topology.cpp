#include <random>

#include "bect/fourier.hpp"
#include "bect/topology.hpp"
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

}  // namespace

TEST_CASE("fermi projector basics") {
  SUBCASE("appendix model: rank 1 everywhere, idempotent, commutes with H") {
    const BlochFamily fam(appendix(0.3, 1));
    const BZGrid grid(16, 16);
    const BandStructure b = compute_bands(fam, grid, true);
    const ProjectorField p = fermi_projector(b, 0.0);
    CHECK(p.rank == 1);
    for (int a = 0; a < grid.n1; ++a)
      for (int bb = 0; bb < grid.n2; ++bb) {
        const int node = grid.index(a, bb);
        const auto& P = p.projectors[node];
        CHECK((P * P - P).cwiseAbs().maxCoeff() < 1e-10);
        CHECK((P - P.adjoint().eval()).cwiseAbs().maxCoeff() < 1e-10);
        CHECK(std::abs(P.trace() - Complex(1, 0)) < 1e-10);
        const ComplexMatrix H = fam(grid.node(a, bb));
        CHECK((P * H - H * P).cwiseAbs().maxCoeff() <= 1e-9 * H.norm());
      }
  }
  SUBCASE("barrier below the spectrum has a zero projector") {
    const BlochFamily fam(MatrixModel::scalar_barrier(2, 3.0));
    const BandStructure b = compute_bands(fam, BZGrid(8, 8), true);
    const ProjectorField p = fermi_projector(b, 0.0);
    CHECK(p.rank == 0);
    for (const auto& P : p.projectors) CHECK(P.cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("projector plus complement is the identity") {
    const BlochFamily fam(testing::trs_two_band_model());
    const BandStructure b = compute_bands(fam, BZGrid(8, 8), true);
    const ProjectorField below = fermi_projector(b, 0.0);
    // complement built from the remaining eigenvectors
    for (int node = 0; node < b.grid.nodes(); ++node) {
      const ComplexMatrix V = b.eigenvectors[node].rightCols(b.dim - below.rank);
      const ComplexMatrix sum = below.projectors[node] + V * V.adjoint();
      CHECK((sum - ComplexMatrix::Identity(b.dim, b.dim)).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
  SUBCASE("rank drop across the grid is rejected") {
    // lambda0 inside a band: counts differ between nodes
    const BlochFamily fam(testing::nn_cosine_model());
    const BandStructure b = compute_bands(fam, BZGrid(8, 8), true);
    CHECK_THROWS_AS(fermi_projector(b, 0.0), NumericalError);
  }
}

TEST_CASE("appendix closed-form curvature values") {
  CHECK(appendix_curvature_exact(0.1, 1, 0.0) == Complex(0, 5.0));
  CHECK(appendix_curvature_exact(0.1, 0, 0.7).imag() == 0.0);
  CHECK(appendix_curvature_exact(0.1, 1, 0.1).imag() ==
        doctest::Approx(1.7677669529663689).epsilon(1e-12));
  CHECK_THROWS_AS(appendix_curvature_exact(0.1, 1, 1.5), ConfigError);
}

TEST_CASE("numerical Berry curvature matches the closed form on the plateau") {
  // eps = 0.1 concentrates the curvature; a fine grid resolves it to 1e-6.
  AppendixModel m = appendix(0.1, 1);
  const BZGrid grid(512, 8);
  const BandStructure b = compute_bands(BlochFamily(m), grid, true);
  const ProjectorField p = fermi_projector(b, 0.0);
  const CurvatureField c = berry_curvature(p);
  int checked = 0;
  for (int a = 0; a < grid.n1 && checked < 64; ++a) {
    const double xi1 = wrap_pi(grid.node(a, 0)[0]);
    if (std::fabs(xi1) > 1.0) continue;
    const Complex exact = appendix_curvature_exact(0.1, 1, xi1);
    const Complex got = c.values[grid.index(a, 3)];
    CHECK(std::abs(got - exact) / std::abs(exact) < 1e-6);
    ++checked;
  }
  CHECK(checked == 64);

  SUBCASE("curvature is purely imaginary") {
    for (int node = 0; node < grid.nodes(); ++node)
      CHECK(std::fabs(c.values[node].real()) < 1e-8);
  }
}

TEST_CASE("plateau curvature integral approaches -nu for small eps") {
  // (i / 2 pi) * integral over [-1,1] x [-pi,pi] of the closed form at eps = 0.05:
  // the xi2 integral contributes 2 pi, so the value is minus the xi1 integral
  // of the imaginary part.
  const double eps = 0.05;
  const int nu = 1;
  const int n = 4000;
  double integral = 0;
  for (int i = 0; i < n; ++i) {
    const double xi1 = -1.0 + 2.0 * (i + 0.5) / n;
    integral += appendix_curvature_exact(eps, nu, xi1).imag() * (2.0 / n);
  }
  CHECK(std::fabs(-integral - double(-nu)) < 0.05);
}

TEST_CASE("chern numbers of the appendix family") {
  for (int nu : {1, 2, 3}) {
    const BlochFamily fam(appendix(0.3, nu));
    const BandStructure b = compute_bands(fam, BZGrid(24, 24), true);
    const ProjectorField p = fermi_projector(b, 0.0);
    const ChernResult lat = lattice_chern(p);
    const ChernResult ber = berry_chern(p);
    CHECK(lat.value == -nu);
    CHECK(ber.value == -nu);
    CHECK(ber.residual < 0.05);
    CHECK(lat.residual < 1e-9);
  }
}

TEST_CASE("chern trivial cases") {
  SUBCASE("constant projector field") {
    ProjectorField p;
    p.grid = BZGrid(8, 8);
    p.dim = 3;
    p.rank = 1;
    ComplexMatrix P = ComplexMatrix::Zero(3, 3);
    P(0, 0) = 1;
    p.projectors.assign(p.grid.nodes(), P);
    const ChernResult r = berry_chern(p);
    CHECK(r.value == 0);
    CHECK(std::abs(r.raw) < 1e-12);
  }
  SUBCASE("identity projector field") {
    ProjectorField p;
    p.grid = BZGrid(8, 8);
    p.dim = 2;
    p.rank = 2;
    p.projectors.assign(p.grid.nodes(), ComplexMatrix::Identity(2, 2));
    CHECK(berry_chern(p).value == 0);
    CHECK(lattice_chern(p).value == 0);
  }
  SUBCASE("time-reversal symmetric model has zero Chern number") {
    const BlochFamily fam(testing::trs_two_band_model());
    const BandStructure b = compute_bands(fam, BZGrid(24, 24), true);
    const ProjectorField p = fermi_projector(b, 0.0);
    CHECK(lattice_chern(p).value == 0);
    CHECK(berry_chern(p).value == 0);
  }
}

TEST_CASE("methods agree on random gapped two-band models") {
  std::mt19937_64 rng(20240229);
  for (int t = 0; t < 20; ++t) {
    const MatrixModel m = testing::random_gapped_two_band(rng);
    const BandStructure b = compute_bands(BlochFamily(m), BZGrid(24, 24), true);
    const ProjectorField p = fermi_projector(b, 0.0);
    const ChernResult lat = lattice_chern(p);
    const ChernResult ber = berry_chern(p);
    CHECK(lat.value == ber.value);
    CHECK(ber.residual < 0.05);
  }
}

TEST_CASE("lattice chern is frame-gauge invariant") {
  const BlochFamily fam(appendix(0.3, 2));
  const BandStructure b = compute_bands(fam, BZGrid(16, 16), true);
  ProjectorField p = fermi_projector(b, 0.0);
  const int before = lattice_chern(p).value;

  std::mt19937_64 rng(99);
  std::normal_distribution<double> g(0, 1);
  for (auto& F : p.frames) {
    // rank-1 frames: remix by a random phase
    const double phase = g(rng);
    F *= std::exp(Complex(0, phase));
  }
  CHECK(lattice_chern(p).value == before);

  SUBCASE("frames recomputed from projectors give the same integer") {
    p.frames.clear();
    CHECK(lattice_chern(p).value == before);
  }
}

TEST_CASE("lattice chern is stable across grid sizes") {
  for (int nu : {1, 2}) {
    int reference = 0;
    for (int n : {16, 24, 32}) {
      const BandStructure b = compute_bands(BlochFamily(appendix(0.3, nu)), BZGrid(n, n), true);
      const int c = lattice_chern(fermi_projector(b, 0.0)).value;
      if (n == 16)
        reference = c;
      else
        CHECK(c == reference);
    }
  }
  SUBCASE("also on a random gapped model") {
    std::mt19937_64 rng(5);
    const MatrixModel m = testing::random_gapped_two_band(rng);
    int reference = 0;
    for (int n : {16, 24, 32}) {
      const BandStructure b = compute_bands(BlochFamily(m), BZGrid(n, n), true);
      const int c = lattice_chern(fermi_projector(b, 0.0)).value;
      if (n == 16)
        reference = c;
      else
        CHECK(c == reference);
    }
  }
}

TEST_CASE("complementary projectors carry opposite Chern numbers") {
  for (int nu : {1, 3}) {
    const BandStructure b = compute_bands(BlochFamily(appendix(0.3, nu)), BZGrid(20, 20), true);
    const ProjectorField below = fermi_projector(b, 0.0);
    ProjectorField above = below;
    above.rank = below.dim - below.rank;
    above.frames.clear();
    for (auto& P : above.projectors)
      P = ComplexMatrix::Identity(below.dim, below.dim) - P;
    CHECK(lattice_chern(below).value + lattice_chern(above).value == 0);
    CHECK(berry_chern(below).value + berry_chern(above).value == 0);
  }
}

TEST_CASE("projector equivariance under xi -> xi + 2 pi k") {
  ContinuousModel m;
  m.kind = ContinuousKind::MagneticSchrodinger;
  m.fns["V"].set(1, 0, Complex(0.15, 0));
  m.fns["V"].set(-1, 0, Complex(0.15, 0));
  m.fns["A1"].set(0, 1, Complex(0, -0.1));
  m.fns["A1"].set(0, -1, Complex(0, 0.1));
  m.fns["A2"].set(1, 0, Complex(0, -0.1));
  m.fns["A2"].set(-1, 0, Complex(0, 0.1));
  m.validate();

  SUBCASE("magnetic model, K = 5, interior block 3") {
    const double dev = equivariance_check(m, Vec2(0.6, -0.9), 1, 0, 5, 3, 1);
    CHECK(dev < 1e-10);
  }
  SUBCASE("free Laplacian is exactly equivariant") {
    ContinuousModel f;
    f.kind = ContinuousKind::MagneticSchrodinger;
    f.validate();
    const double dev = equivariance_check(f, Vec2(0.3, 0.4), 1, 1, 4, 2, 1);
    CHECK(dev < 1e-12);
  }
  SUBCASE("matrix models are exactly periodic") {
    const MatrixModel mm = testing::trs_two_band_model();
    const ComplexMatrix a = mm.symbol(Vec2(0.7, 0.2));
    const ComplexMatrix b = mm.symbol(Vec2(0.7 + kTwoPi, 0.2 - kTwoPi));
    CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("spectral differentiation is exact on band-limited fields") {
  const BZGrid grid(12, 12);
  std::vector<ComplexMatrix> field(grid.nodes());
  for (int a = 0; a < grid.n1; ++a)
    for (int b = 0; b < grid.n2; ++b) {
      const Vec2 xi = grid.node(a, b);
      ComplexMatrix F(1, 1);
      F(0, 0) = std::exp(Complex(0, 2 * xi[0])) + 0.5 * std::exp(Complex(0, -3 * xi[1]));
      field[grid.index(a, b)] = F;
    }
  const auto d1 = differentiate_field(field, grid, 0);
  const auto d2 = differentiate_field(field, grid, 1);
  for (int a = 0; a < grid.n1; ++a)
    for (int b = 0; b < grid.n2; ++b) {
      const Vec2 xi = grid.node(a, b);
      const Complex e1 = Complex(0, 2) * std::exp(Complex(0, 2 * xi[0]));
      const Complex e2 = Complex(0, -1.5) * std::exp(Complex(0, -3 * xi[1]));
      CHECK(std::abs(d1[grid.index(a, b)](0, 0) - e1) < 1e-12);
      CHECK(std::abs(d2[grid.index(a, b)](0, 0) - e2) < 1e-12);
    }
}

TEST_CASE("serial and parallel chern kernels agree") {
  const BandStructure b = compute_bands(BlochFamily(appendix(0.3, 2)), BZGrid(16, 16), true);
  const ProjectorField p = fermi_projector(b, 0.0);
  const ChernResult s = berry_chern(p, Exec::Serial);
  const ChernResult par = berry_chern(p, Exec::Parallel);
  CHECK(s.raw == par.raw);
  CHECK(lattice_chern(p, Exec::Serial).raw == lattice_chern(p, Exec::Parallel).raw);
}
