// Timing comparison of the OpenMP kernels against their serial reference
// paths. Both paths produce identical output (asserted here as well as in
// the unit tests); the table reports wall times and speedup.

#include <chrono>
#include <cstdio>
#include <functional>

#include "bect/edge.hpp"
#include "bect/effective.hpp"
#include "bect/topology.hpp"

using namespace bect;

namespace {

double timed(const std::function<void()>& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void row(const char* name, double serial, double parallel, bool identical) {
  std::printf("%-28s %9.3f s %9.3f s %7.2fx   %s\n", name, serial, parallel,
              serial / parallel, identical ? "outputs identical" : "OUTPUTS DIFFER");
}

}  // namespace

int main() {
  AppendixModel model;
  model.epsilon = 0.3;
  model.nu = 2;
  const BlochFamily family(model);

  std::printf("%-28s %11s %11s %9s\n", "kernel", "serial", "parallel", "speedup");

  {
    const BZGrid grid(96, 96);
    BandStructure s, p;
    const double ts = timed([&] { s = compute_bands(family, grid, true, Exec::Serial); });
    const double tp = timed([&] { p = compute_bands(family, grid, true, Exec::Parallel); });
    bool same = true;
    for (int n = 0; n < grid.nodes(); ++n)
      same = same && (s.eigenvalues[n] - p.eigenvalues[n]).cwiseAbs().maxCoeff() == 0.0;
    row("band sweep 96x96", ts, tp, same);

    const ProjectorField proj = fermi_projector(p, 0.0);
    ChernResult cs, cp;
    const double cs_t = timed([&] { cs = berry_chern(proj, Exec::Serial); });
    const double cp_t = timed([&] { cp = berry_chern(proj, Exec::Parallel); });
    row("curvature + quadrature", cs_t, cp_t, cs.raw == cp.raw);

    ChernResult ls, lp;
    const double ls_t = timed([&] { ls = lattice_chern(proj, Exec::Serial); });
    const double lp_t = timed([&] { lp = lattice_chern(proj, Exec::Parallel); });
    row("plaquette field", ls_t, lp_t, ls.raw == lp.raw);
  }

  {
    JunctionFamily junction =
        JunctionFamily::make(model, MatrixModel::scalar_barrier(2, 2.0), 0.0);
    StripOperator strip(junction, 40);
    FloquetOptions so, po;
    so.initial_nodes = po.initial_nodes = 200;
    so.exec = Exec::Serial;
    po.exec = Exec::Parallel;
    FloquetSpectrum fs, fp;
    const double ts = timed([&] { fs = floquet_spectrum(strip, 0.0, 0.15, so); });
    const double tp = timed([&] { fp = floquet_spectrum(strip, 0.0, 0.15, po); });
    bool same = fs.zetas.size() == fp.zetas.size();
    for (std::size_t i = 0; same && i < fs.zetas.size(); ++i) {
      same = fs.states[i].size() == fp.states[i].size();
      for (std::size_t q = 0; same && q < fs.states[i].size(); ++q)
        same = fs.states[i][q].eigenvalue == fp.states[i][q].eigenvalue;
    }
    row("Floquet sweep W=40", ts, tp, same);
  }

  {
    const BandStructure b = compute_bands(family, BZGrid(48, 48), true);
    TwoLevelSymbol t(fermi_projector(b, 0.0), -1.0, 1.0);
    const ContourSpec c = ContourSpec::default_for(-1.0, 1.0);
    EffectiveIndexResult rs, rp;
    const double ts = timed([&] { rs = index_J_contour(t, c, Exec::Serial); });
    const double tp = timed([&] { rp = index_J_contour(t, c, Exec::Parallel); });
    row("contour index 48x48", ts, tp, rs.J == rp.J);
  }

  return 0;
}
