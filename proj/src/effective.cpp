#include "bect/effective.hpp"

#include <atomic>
#include <cmath>

#include "bect/fourier.hpp"

namespace bect {

TwoLevelSymbol::TwoLevelSymbol(ProjectorField p, double l1, double l2)
    : pi1(std::move(p)), lambda1(l1), lambda2(l2) {
  if (!(lambda1 < lambda2)) throw ConfigError("two-level symbol requires lambda1 < lambda2");
}

ComplexMatrix TwoLevelSymbol::eval(int node, Complex lambda) const {
  const ComplexMatrix& P = pi1.projectors[node];
  return (lambda - lambda2) * ComplexMatrix::Identity(pi1.dim, pi1.dim) +
         (lambda2 - lambda1) * P;
}

ComplexMatrix TwoLevelSymbol::inverse(int node, Complex lambda) const {
  const ComplexMatrix& P = pi1.projectors[node];
  const ComplexMatrix id = ComplexMatrix::Identity(pi1.dim, pi1.dim);
  return P / (lambda - lambda1) + (id - P) / (lambda - lambda2);
}

void ContourSpec::validate(double lambda1, double lambda2) const {
  if (nodes < 8) throw ConfigError("contour needs at least 8 quadrature nodes");
  const double d1 = std::abs(center - Complex(lambda1, 0));
  const double d2 = std::abs(center - Complex(lambda2, 0));
  if (!(d1 < radius && radius < d2))
    throw ConfigError("contour must enclose lambda1 and exclude lambda2: |c-l1| < r < |c-l2|");
}

ContourSpec ContourSpec::default_for(double lambda1, double lambda2) {
  ContourSpec c;
  c.center = Complex(lambda1, 0);
  c.radius = 0.5 * (lambda2 - lambda1);
  c.nodes = 64;
  return c;
}

std::vector<ComplexMatrix> two_level_rearrangement(const ProjectorField& p, double lambda1,
                                                   double lambda2) {
  if (!(lambda1 < lambda2)) throw ConfigError("rearrangement requires lambda1 < lambda2");
  std::vector<ComplexMatrix> q(p.grid.nodes());
  const ComplexMatrix id = ComplexMatrix::Identity(p.dim, p.dim);
  for (int node = 0; node < p.grid.nodes(); ++node)
    q[node] = lambda1 * p.projectors[node] + lambda2 * (id - p.projectors[node]);
  return q;
}

ProjectorField reduced_projector(const ProjectorField& p,
                                 const std::vector<ComplexMatrix>& frames, double tol) {
  if (static_cast<int>(frames.size()) != p.grid.nodes())
    throw ConfigError("one frame per grid node required");
  ProjectorField out;
  out.grid = p.grid;
  out.lambda0 = p.lambda0;
  out.rank = p.rank;
  out.dim = static_cast<int>(frames.front().cols());
  out.projectors.resize(p.grid.nodes());

  double max_leak = 0;
  for (int node = 0; node < p.grid.nodes(); ++node) {
    const ComplexMatrix& F = frames[node];
    if (F.rows() != p.dim || F.cols() != out.dim)
      throw ConfigError("frame dimensions do not match the projector field");
    const ComplexMatrix gram = F.adjoint() * F;
    if ((gram - ComplexMatrix::Identity(out.dim, out.dim)).cwiseAbs().maxCoeff() > 1e-10)
      throw ConfigError("frame columns must be orthonormal");
    // Range inclusion: (Id - F F^dagger) Pi must vanish.
    const ComplexMatrix leak = p.projectors[node] - F * (F.adjoint() * p.projectors[node]);
    max_leak = std::max(max_leak, leak.norm());
    out.projectors[node] = F.adjoint() * p.projectors[node] * F;
  }
  if (max_leak > tol)
    throw NumericalError("effective", "projector range leaks outside the frame span: max leakage " +
                                          std::to_string(max_leak));
  return out;
}

namespace {

EffectiveIndexResult package_index(Complex J, const char* method) {
  EffectiveIndexResult r;
  r.J = J;
  r.two_i_pi_J = Complex(0, 2 * kPi) * J;
  r.method = method;
  const double nearest = std::round(r.two_i_pi_J.real());
  r.residual = std::abs(r.two_i_pi_J - Complex(nearest, 0));
  if (r.residual >= 0.5)
    throw NumericalError("effective",
                         "index quadrature does not resolve an integer: residual " +
                             std::to_string(r.residual));
  r.chern = static_cast<int>(nearest);
  return r;
}

}  // namespace

EffectiveIndexResult index_J_contour(const SampledSymbolFamily& family, const ContourSpec& c,
                                     Exec exec) {
  if (c.nodes < 8) throw ConfigError("contour needs at least 8 quadrature nodes");
  const BZGrid& grid = family.grid;
  const int nodes = grid.nodes();
  const ComplexMatrix id = ComplexMatrix::Identity(family.dim, family.dim);

  std::vector<Complex> contour_values(c.nodes);
  std::atomic<int> not_invertible{0};
  parallel_for(c.nodes, exec, [&](std::size_t m) {
    const double theta = kTwoPi * m / c.nodes;
    const Complex lambda = c.center + c.radius * std::exp(Complex(0, theta));

    // Sample E over the torus at this lambda, then differentiate the samples.
    std::vector<ComplexMatrix> E(nodes), dlE_Einv(nodes), Einv(nodes);
    for (int n = 0; n < nodes; ++n) {
      E[n] = family.eval(n, lambda);
      Eigen::PartialPivLU<ComplexMatrix> lu(E[n]);
      if (!(lu.rcond() > 1e-12)) {
        not_invertible.store(1);
        return;
      }
      Einv[n] = lu.solve(id);
      dlE_Einv[n] = family.eval_dlambda(n, lambda) * Einv[n];
    }
    const auto d1E = differentiate_field(E, grid, 0, Exec::Serial);
    const auto d2 = differentiate_field(dlE_Einv, grid, 1, Exec::Serial);
    Complex acc(0, 0);
    for (int n = 0; n < nodes; ++n) acc += (d1E[n] * Einv[n] * d2[n]).trace();
    contour_values[m] = acc / double(nodes);
  });
  if (not_invertible.load())
    throw NumericalError("effective", "effective symbol not invertible on the contour");

  // -(1/(2 i pi)) * closed contour integral, trapezoid in the angle.
  Complex J(0, 0);
  for (int m = 0; m < c.nodes; ++m) {
    const double theta = kTwoPi * m / c.nodes;
    const Complex dlambda = Complex(0, 1) * c.radius * std::exp(Complex(0, theta));
    J += contour_values[m] * dlambda;
  }
  J *= -(kTwoPi / c.nodes) / (Complex(0, 2 * kPi));
  return package_index(J, "contour");
}

EffectiveIndexResult index_J_contour(const TwoLevelSymbol& t, const ContourSpec& c, Exec exec) {
  c.validate(t.lambda1, t.lambda2);
  SampledSymbolFamily family;
  family.dim = t.pi1.dim;
  family.grid = t.pi1.grid;
  const ComplexMatrix id = ComplexMatrix::Identity(t.pi1.dim, t.pi1.dim);
  family.eval = [&t](int node, Complex lambda) { return t.eval(node, lambda); };
  family.eval_dlambda = [id](int, Complex) { return id; };
  return index_J_contour(family, c, exec);
}

EffectiveIndexResult index_J_residue(const TwoLevelSymbol& t, Exec exec) {
  const CurvatureField c = berry_curvature(t.pi1, exec);
  Complex acc(0, 0);
  for (Complex v : c.values) acc += v;
  const Complex J = acc / double(t.pi1.grid.nodes());
  return package_index(J, "residue");
}

}  // namespace bect
