#include "bect/topology.hpp"

#include <atomic>
#include <cmath>

#include "bect/fourier.hpp"

namespace bect {

ComplexMatrix ProjectorField::frame(int node) const {
  if (has_frames()) return frames[node];
  if (rank == 0) return ComplexMatrix(dim, 0);
  // Range basis from the projector itself: eigenvectors with eigenvalue ~ 1.
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(projectors[node]);
  return es.eigenvectors().rightCols(rank);
}

ProjectorField fermi_projector(const BandStructure& b, double lambda0) {
  if (!b.has_vectors())
    throw ConfigError("fermi_projector requires a band structure with eigenvectors");
  ProjectorField p;
  p.grid = b.grid;
  p.dim = b.dim;
  p.lambda0 = lambda0;
  p.projectors.resize(b.grid.nodes());
  p.frames.resize(b.grid.nodes());

  int rank = -1;
  for (int node = 0; node < b.grid.nodes(); ++node) {
    int count = 0;
    while (count < b.dim && b.eigenvalues[node](count) < lambda0) ++count;
    if (rank < 0)
      rank = count;
    else if (count != rank)
      throw NumericalError("topology", "projector rank varies across the grid (" +
                                           std::to_string(rank) + " vs " + std::to_string(count) +
                                           "): lambda0 is not in a gap on this grid");
    const ComplexMatrix V = b.eigenvectors[node].leftCols(count);
    p.frames[node] = V;
    p.projectors[node] = V * V.adjoint();
  }
  p.rank = std::max(rank, 0);
  return p;
}

CurvatureField berry_curvature(const ProjectorField& p, Exec exec) {
  CurvatureField c;
  c.grid = p.grid;
  c.values.resize(p.grid.nodes());
  const auto d1 = differentiate_field(p.projectors, p.grid, 0, exec);
  const auto d2 = differentiate_field(p.projectors, p.grid, 1, exec);
  parallel_for(p.grid.nodes(), exec, [&](std::size_t node) {
    c.values[node] = (p.projectors[node] * (d1[node] * d2[node] - d2[node] * d1[node])).trace();
  });
  return c;
}

namespace {

ChernResult package_chern(Complex raw, const char* method, const char* stage) {
  ChernResult r;
  r.raw = raw;
  r.method = method;
  const double nearest = std::round(raw.real());
  r.residual = std::abs(raw - Complex(nearest, 0));
  if (r.residual >= 0.5)
    throw NumericalError(stage, std::string("no trustworthy integer: |raw - nearest| = ") +
                                    std::to_string(r.residual) + " (refine the grid)");
  r.value = static_cast<int>(nearest);
  return r;
}

}  // namespace

ChernResult berry_chern(const ProjectorField& p, Exec exec) {
  const CurvatureField c = berry_curvature(p, exec);
  Complex acc(0, 0);
  for (int node = 0; node < p.grid.nodes(); ++node) acc += c.values[node];
  const Complex raw = Complex(0, 1) / kTwoPi * acc * (kTwoPi / p.grid.n1) * (kTwoPi / p.grid.n2);
  return package_chern(raw, "berry-quadrature", "topology");
}

ChernResult lattice_chern(const ProjectorField& p, Exec exec) {
  const int n2 = p.grid.n2;
  if (p.rank == 0 || p.rank == p.dim) {
    ChernResult r;
    r.value = 0;
    r.raw = Complex(0, 0);
    r.residual = 0;
    r.method = "lattice-gauge";
    return r;
  }

  std::vector<ComplexMatrix> frames(p.grid.nodes());
  parallel_for(p.grid.nodes(), exec, [&](std::size_t node) {
    frames[node] = p.frame(static_cast<int>(node));
  });

  auto link = [&](int node_a, int node_b) -> Complex {
    return (frames[node_a].adjoint() * frames[node_b]).determinant();
  };

  std::vector<double> phases(p.grid.nodes());
  std::atomic<int> singular{0}, branch_cut{0};
  parallel_for(p.grid.nodes(), exec, [&](std::size_t node) {
    const int a = static_cast<int>(node) / n2;
    const int b = static_cast<int>(node) % n2;
    const int n00 = p.grid.index(a, b), n10 = p.grid.index(a + 1, b);
    const int n11 = p.grid.index(a + 1, b + 1), n01 = p.grid.index(a, b + 1);
    // plaquette orientation chosen to match the curvature-quadrature sign
    const Complex l1 = link(n00, n01), l2 = link(n01, n11), l3 = link(n11, n10),
                  l4 = link(n10, n00);
    if (std::min({std::abs(l1), std::abs(l2), std::abs(l3), std::abs(l4)}) < 1e-10) {
      singular.store(1);
      return;
    }
    const double phase = std::arg(l1 * l2 * l3 * l4);
    if (std::abs(phase) >= kPi - 1e-9) branch_cut.store(1);
    phases[node] = phase;
  });
  if (singular.load())
    throw NumericalError("topology",
                         "singular plaquette overlap: grid too coarse near a band crossing");
  if (branch_cut.load())
    throw NumericalError("topology", "plaquette phase at the branch cut: refine the grid");
  double total = 0;
  for (int node = 0; node < p.grid.nodes(); ++node) total += phases[node];
  return package_chern(Complex(total / kTwoPi, 0), "lattice-gauge", "topology");
}

Complex appendix_curvature_exact(double epsilon, int nu, double xi1) {
  if (std::fabs(xi1) > 1.0)
    throw ConfigError("closed-form curvature only valid for xi1 in [-1, 1]");
  const double m2 = xi1 * xi1 + epsilon * epsilon;
  return Complex(0, epsilon * epsilon * nu / (2.0 * std::pow(m2, 1.5)));
}

namespace {

ComplexMatrix lowest_projector(const ComplexMatrix& H, int rank) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(H);
  const ComplexMatrix V = es.eigenvectors().leftCols(rank);
  return V * V.adjoint();
}

double interior_block_deviation(const ComplexMatrix& A, const ComplexMatrix& B, int K,
                                int K_interior, int shift1, int shift2) {
  // A is the field at xi evaluated on wave indices shifted by k; B at xi+2pik.
  PlaneWaveBasis basis(K);
  double dev = 0;
  for (int m1 = -K_interior; m1 <= K_interior; ++m1)
    for (int m2 = -K_interior; m2 <= K_interior; ++m2)
      for (int p1 = -K_interior; p1 <= K_interior; ++p1)
        for (int p2 = -K_interior; p2 <= K_interior; ++p2) {
          const int i = basis.index(m1, m2), j = basis.index(p1, p2);
          const int is = basis.index(m1 + shift1, m2 + shift2);
          const int js = basis.index(p1 + shift1, p2 + shift2);
          dev = std::max(dev, std::abs(A(is, js) - B(i, j)));
        }
  return dev;
}

}  // namespace

double equivariance_check(const ContinuousModel& m, const Vec2& xi, int k1, int k2, int K,
                          int K_interior, int rank) {
  if (K_interior + std::max(std::abs(k1), std::abs(k2)) > K)
    throw ConfigError("interior block plus shift exceeds truncation");
  const ComplexMatrix H0 = bloch_matrix(m, xi, K);
  const ComplexMatrix H1 = bloch_matrix(m, xi + kTwoPi * Vec2(k1, k2), K);
  const ComplexMatrix P0 = lowest_projector(H0, rank);
  const ComplexMatrix P1 = lowest_projector(H1, rank);
  return interior_block_deviation(P0, P1, K, K_interior, k1, k2);
}

double matrix_equivariance_check(const ContinuousModel& m, const Vec2& xi, int k1, int k2, int K,
                                 int K_interior) {
  if (K_interior + std::max(std::abs(k1), std::abs(k2)) > K)
    throw ConfigError("interior block plus shift exceeds truncation");
  const ComplexMatrix H0 = bloch_matrix(m, xi, K);
  const ComplexMatrix H1 = bloch_matrix(m, xi + kTwoPi * Vec2(k1, k2), K);
  return interior_block_deviation(H0, H1, K, K_interior, k1, k2);
}

}  // namespace bect
