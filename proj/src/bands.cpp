#include "bect/bands.hpp"

#include <atomic>
#include <cmath>

namespace bect {

double BandStructure::lipschitz_estimate() const {
  double worst = 0;
  const double step = std::min(kTwoPi / grid.n1, kTwoPi / grid.n2);
  for (int a = 0; a < grid.n1; ++a)
    for (int b = 0; b < grid.n2; ++b) {
      const auto& here = eigenvalues[grid.index(a, b)];
      for (const auto& there :
           {eigenvalues[grid.index(a + 1, b)], eigenvalues[grid.index(a, b + 1)]}) {
        for (int q = 0; q < dim; ++q) worst = std::max(worst, std::fabs(there(q) - here(q)));
      }
    }
  return worst / step;
}

BandStructure compute_bands(const BlochFamily& family, const BZGrid& grid, bool want_vectors,
                            Exec exec) {
  BandStructure out;
  out.grid = grid;
  out.dim = family.dim();
  out.truncation = family.truncation();
  out.eigenvalues.resize(grid.nodes());
  if (want_vectors) out.eigenvectors.resize(grid.nodes());

  std::atomic<int> failed_node{-1};
  parallel_for(grid.nodes(), exec, [&](std::size_t node) {
    const int a = static_cast<int>(node) / grid.n2;
    const int b = static_cast<int>(node) % grid.n2;
    const ComplexMatrix H = family(grid.node(a, b));
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(
        H, want_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
      failed_node.store(static_cast<int>(node));
      return;
    }
    out.eigenvalues[node] = solver.eigenvalues();
    if (want_vectors) out.eigenvectors[node] = solver.eigenvectors();
  });
  if (failed_node.load() >= 0)
    throw NumericalError("bands", "eigensolver failed to converge at node " +
                                      std::to_string(failed_node.load()));
  return out;
}

GapReport check_gap(const BandStructure& b, double lambda0, double epsilon) {
  GapReport r;
  r.lambda0 = lambda0;
  r.half_width = epsilon;

  double max_below = -1e300, min_above = 1e300;
  int n_below = -1;
  bool constant_count = true;
  for (int node = 0; node < b.grid.nodes(); ++node) {
    int count = 0;
    for (int q = 0; q < b.dim; ++q) {
      const double l = b.eigenvalues[node](q);
      if (l < lambda0) {
        ++count;
        max_below = std::max(max_below, l);
      } else {
        min_above = std::min(min_above, l);
      }
    }
    if (n_below < 0)
      n_below = count;
    else if (count != n_below)
      constant_count = false;
  }
  r.max_below = max_below;
  r.min_above = min_above;
  r.n_below = std::max(n_below, 0);
  r.gapped = (max_below < lambda0 - 2 * epsilon) && (min_above > lambda0 + 2 * epsilon);

  // Lipschitz slack for the two bands bracketing lambda0: the slope that
  // could hide a gap violation between grid nodes.
  const double step = std::max(kTwoPi / b.grid.n1, kTwoPi / b.grid.n2);
  double slope = 0;
  for (int a = 0; a < b.grid.n1; ++a)
    for (int bb = 0; bb < b.grid.n2; ++bb) {
      const auto& here = b.eigenvalues[b.grid.index(a, bb)];
      for (const auto& there :
           {b.eigenvalues[b.grid.index(a + 1, bb)], b.eigenvalues[b.grid.index(a, bb + 1)]}) {
        for (int q = std::max(0, r.n_below - 1); q <= std::min(b.dim - 1, r.n_below); ++q)
          slope = std::max(slope, std::fabs(there(q) - here(q)));
      }
    }
  r.lipschitz = slope / std::min(kTwoPi / b.grid.n1, kTwoPi / b.grid.n2);
  r.lipschitz_ok = r.lipschitz * step < epsilon / 2;
  if (r.gapped && !constant_count)
    throw NumericalError("bands", "inconsistent band count below lambda0 across a gapped grid");
  return r;
}

CrossingDiagnostic crossing_diagnostic(const JunctionFamily& family, int band, double delta,
                                       const std::vector<double>& heights, const BZGrid& grid,
                                       int K, Exec exec) {
  CrossingDiagnostic d;
  d.band = band;
  d.heights = heights;
  d.grid = grid;
  d.delta = delta;

  for (double h : heights) {
    BulkModel snap = glue_family(family, h);
    BlochFamily f = std::holds_alternative<ContinuousModel>(snap)
                        ? BlochFamily(std::get<ContinuousModel>(snap), K)
                        : (std::holds_alternative<MatrixModel>(snap)
                               ? BlochFamily(std::get<MatrixModel>(snap))
                               : BlochFamily(std::get<AppendixModel>(snap)));
    if (band < 1 || band >= f.dim())
      throw ConfigError("crossing diagnostic band index out of range");
    const BandStructure b = compute_bands(f, grid, false, exec);
    RealVector gap(grid.nodes()), mid(grid.nodes());
    std::vector<char> mask(grid.nodes());
    for (int node = 0; node < grid.nodes(); ++node) {
      const double lo = b.eigenvalues[node](band - 1);
      const double hi = b.eigenvalues[node](band);
      gap(node) = hi - lo;
      mid(node) = 0.5 * (hi + lo);
      mask[node] = gap(node) <= 2 * delta;
      if (mask[node]) d.z_delta_empty = false;
    }
    d.gapfn.push_back(std::move(gap));
    d.midpoint.push_back(std::move(mid));
    d.in_z_delta.push_back(std::move(mask));
  }
  return d;
}

}  // namespace bect
