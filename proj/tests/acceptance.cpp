// Verification suite: one pass/fail line per criterion. Run via ctest as
// `acceptance` or directly; exits nonzero when any criterion fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <vector>

#include "bect/conductivity.hpp"
#include "bect/edge.hpp"
#include "bect/effective.hpp"
#include "bect/fourier.hpp"
#include "bect/topology.hpp"
#include "test_helpers.hpp"

using namespace bect;

namespace {

int failures = 0;
bool current_ok = true;
std::string current_notes;

void expect(bool ok, const std::string& what) {
  if (!ok) {
    current_ok = false;
    current_notes += (current_notes.empty() ? "" : "; ") + what;
  }
}

void criterion(int number, const std::string& title, const std::function<void()>& body) {
  current_ok = true;
  current_notes.clear();
  const auto start = std::chrono::steady_clock::now();
  try {
    body();
  } catch (const std::exception& e) {
    current_ok = false;
    current_notes = std::string("exception: ") + e.what();
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("%s criterion %d: %s (%.1f s)%s%s\n", current_ok ? "PASS" : "FAIL", number,
              title.c_str(), secs, current_notes.empty() ? "" : " -- ",
              current_notes.c_str());
  std::fflush(stdout);
  if (!current_ok) ++failures;
}

AppendixModel appendix(double eps, int nu) {
  AppendixModel m;
  m.epsilon = eps;
  m.nu = nu;
  return m;
}

const MatrixModel kBarrier = MatrixModel::scalar_barrier(2, 2.0);

ProjectorField appendix_projector(int nu, int n, double eps = 0.3) {
  const BandStructure b = compute_bands(BlochFamily(appendix(eps, nu)), BZGrid(n, n), true);
  return fermi_projector(b, 0.0);
}

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main() {
  criterion(1, "plaquette Chern numbers of the reference family are exactly -nu", [] {
    const auto t0 = std::chrono::steady_clock::now();
    for (int nu : {1, 2, 3}) {
      const ChernResult r = lattice_chern(appendix_projector(nu, 24));
      expect(r.value == -nu, "nu=" + std::to_string(nu) + " gave " + std::to_string(r.value));
    }
    const double secs = seconds_since(t0);
    expect(secs < 5.0, "runtime " + std::to_string(secs) + " s exceeds 5 s");
  });

  criterion(2, "Berry curvature matches the closed form and integrates to -nu", [] {
    // pointwise comparison on the plateau at eps = 0.1
    AppendixModel m = appendix(0.1, 1);
    const BZGrid grid(512, 8);
    const ProjectorField p =
        fermi_projector(compute_bands(BlochFamily(m), grid, true), 0.0);
    const CurvatureField c = berry_curvature(p);
    int checked = 0;
    double worst = 0;
    for (int a = 0; a < grid.n1 && checked < 64; ++a) {
      const double xi1 = wrap_pi(grid.node(a, 0)[0]);
      if (std::fabs(xi1) > 1.0) continue;
      const Complex exact = appendix_curvature_exact(0.1, 1, xi1);
      worst = std::max(worst, std::abs(c.values[grid.index(a, 2)] - exact) / std::abs(exact));
      ++checked;
    }
    expect(checked == 64, "fewer than 64 plateau nodes");
    expect(worst < 1e-6, "worst relative error " + std::to_string(worst));

    // plateau integral of the closed form at eps = 0.05:
    // (i/2 pi) int B = -(1/2 pi) * 2 pi * int Im B dxi1
    const int n = 20000;
    double integral = 0;
    for (int i = 0; i < n; ++i)
      integral +=
          appendix_curvature_exact(0.05, 1, -1.0 + 2.0 * (i + 0.5) / n).imag() * (2.0 / n);
    expect(std::fabs(-integral - (-1.0)) < 0.05,
           "plateau integral " + std::to_string(-integral));
  });

  criterion(3, "curvature and plaquette methods agree on every gapped test model", [] {
    auto both = [&](const ProjectorField& p, const std::string& tag) {
      const ChernResult lat = lattice_chern(p);
      const ChernResult ber = berry_chern(p);
      expect(lat.value == ber.value, tag + ": methods disagree");
      expect(ber.residual < 0.05, tag + ": berry residual " + std::to_string(ber.residual));
      return lat.value;
    };
    for (int nu : {1, 2, 3})
      expect(both(appendix_projector(nu, 24), "appendix nu=" + std::to_string(nu)) == -nu,
             "wrong integer for nu=" + std::to_string(nu));
    {
      const BandStructure b = compute_bands(BlochFamily(kBarrier), BZGrid(24, 24), true);
      expect(both(fermi_projector(b, 0.0), "barrier") == 0, "barrier nonzero");
    }
    {
      const BandStructure b =
          compute_bands(BlochFamily(bect::testing::trs_two_band_model()), BZGrid(24, 24), true);
      expect(both(fermi_projector(b, 0.0), "trs") == 0, "TRS model nonzero");
    }
    std::mt19937_64 rng(20240229);
    for (int t = 0; t < 20; ++t) {
      const MatrixModel m = bect::testing::random_gapped_two_band(rng);
      const BandStructure b = compute_bands(BlochFamily(m), BZGrid(24, 24), true);
      both(fermi_projector(b, 0.0), "random model " + std::to_string(t));
    }
  });

  criterion(4, "filtered spectral flow equals the Chern difference, stable in the width", [] {
    struct Pair {
      BulkModel minus, plus;
      std::string tag;
    };
    const std::vector<Pair> pairs = {{appendix(0.3, 1), kBarrier, "app1|barrier"},
                                     {appendix(0.3, 2), kBarrier, "app2|barrier"},
                                     {appendix(0.3, 2), appendix(0.3, 1), "app2|app1"}};
    for (const auto& pr : pairs) {
      const auto t0 = std::chrono::steady_clock::now();
      int flow40 = 0;
      for (int width : {30, 40, 50}) {
        BecOptions opts;
        opts.width = width;
        opts.zeta_nodes = 200;
        opts.loc_threshold = 0.5;
        const BecReport r = verify_bec(pr.minus, pr.plus, 0.0, opts);
        expect(r.match, pr.tag + " W=" + std::to_string(width) + ": flow " +
                            std::to_string(r.spectral_flow) + " != c1 difference " +
                            std::to_string(r.c1_plus - r.c1_minus));
        if (width == 30) flow40 = r.spectral_flow;
        expect(r.spectral_flow == flow40, pr.tag + ": flow changed with the width");
      }
      const double secs = seconds_since(t0);
      expect(secs < 120.0, pr.tag + ": runtime " + std::to_string(secs) + " s exceeds 2 min");
    }
  });

  criterion(5, "interface flows concatenate through the barrier", [] {
    struct Pair {
      BulkModel minus, plus;
      std::string tag;
    };
    const std::vector<Pair> pairs = {{appendix(0.3, 1), kBarrier, "app1|barrier"},
                                     {appendix(0.3, 2), kBarrier, "app2|barrier"},
                                     {appendix(0.3, 2), appendix(0.3, 1), "app2|app1"}};
    for (const auto& pr : pairs) {
      BecOptions opts;
      opts.width = 40;
      opts.zeta_nodes = 200;
      const ConcatenationReport r =
          concatenation_check(pr.minus, pr.plus, kBarrier, 0.0, opts);
      expect(r.additive, pr.tag + ": " + std::to_string(r.flow_minus_plus) +
                             " != " + std::to_string(r.flow_minus_barrier) + " + " +
                             std::to_string(r.flow_barrier_plus));
    }
  });

  criterion(6, "contour and residue evaluations of the effective index find the Chern number", [] {
    for (int nu : {1, 2, 3}) {
      const ProjectorField p = appendix_projector(nu, 48);
      const int reference = lattice_chern(p).value;
      TwoLevelSymbol t(p, -1.0, 1.0);
      const EffectiveIndexResult rc = index_J_contour(t, ContourSpec::default_for(-1.0, 1.0));
      const EffectiveIndexResult rr = index_J_residue(t);
      expect(std::abs(rc.J - rr.J) < 1e-6,
             "nu=" + std::to_string(nu) + ": routes differ by " + std::to_string(std::abs(rc.J - rr.J)));
      expect(rc.chern == reference && rr.chern == reference,
             "nu=" + std::to_string(nu) + ": wrong integer");
      expect(std::abs(rc.two_i_pi_J - Complex(reference, 0)) < 1e-3,
             "nu=" + std::to_string(nu) + ": contour residual " + std::to_string(rc.residual));
      expect(std::abs(rr.two_i_pi_J - Complex(reference, 0)) < 1e-3,
             "nu=" + std::to_string(nu) + ": residue residual " + std::to_string(rr.residual));
    }
  });

  criterion(7, "windowed trace formula reproduces the Chern difference on a finite box", [] {
    const auto t0 = std::chrono::steady_clock::now();
    JunctionFamily j = JunctionFamily::make(appendix(0.3, 1), kBarrier, 0.0);
    BoxOperator box(j, 48, 40, 12);
    SwitchFunctions s;
    s.lambda0 = 0.0;
    s.eps = 0.15;
    s.center = 48 / 2.0 - 0.5;
    s.ell = 12;
    const ConductivityResult r = windowed_conductivity(box, s, WindowSpec{8});
    expect(r.full_trace < 1e-10, "unwindowed trace " + std::to_string(r.full_trace));
    expect(std::fabs(r.two_pi_value - 1.0) < 0.15,
           "2 pi value " + std::to_string(r.two_pi_value) + " not within 0.15 of +1");

    JunctionFamily cj = JunctionFamily::make(appendix(0.3, 1), appendix(0.3, 1), 0.0);
    BoxOperator cbox(cj, 48, 40, 12);
    const ConductivityResult rc = windowed_conductivity(cbox, s, WindowSpec{8});
    expect(std::fabs(rc.two_pi_value) < 0.02,
           "identical-bulk control " + std::to_string(rc.two_pi_value));
    const double secs = seconds_since(t0);
    expect(secs < 180.0, "runtime " + std::to_string(secs) + " s exceeds 3 min");
  });

  criterion(8, "continuous models: exact free bands, trivial TRS Chern number, equivariance", [] {
    ContinuousModel free_model;
    free_model.kind = ContinuousKind::MagneticSchrodinger;
    free_model.validate();
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-kPi, kPi);
    for (int t = 0; t < 6; ++t) {
      const Vec2 xi(u(rng), u(rng));
      Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(bloch_matrix(free_model, xi, 3),
                                                      Eigen::EigenvaluesOnly);
      std::vector<double> expected;
      for (int k1 = -3; k1 <= 3; ++k1)
        for (int k2 = -3; k2 <= 3; ++k2)
          expected.push_back(std::pow(kTwoPi * k1 + xi[0], 2) + std::pow(kTwoPi * k2 + xi[1], 2));
      std::sort(expected.begin(), expected.end());
      for (std::size_t q = 0; q < expected.size(); ++q)
        expect(std::fabs(es.eigenvalues()((int)q) - expected[q]) <=
                   1e-8 * std::max(1.0, expected[q]),
               "free band mismatch");
    }

    // time-reversal symmetric periodic potential with a certified gap
    ContinuousModel trs;
    trs.kind = ContinuousKind::MagneticSchrodinger;
    for (auto [k1, k2] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}})
      trs.fns["V"].set(k1, k2, Complex(-8.0, 0));
    trs.validate();
    const BandStructure b = compute_bands(BlochFamily(trs, 5), BZGrid(12, 12), true);
    double top1 = -1e300, bot2 = 1e300;
    for (const auto& ev : b.eigenvalues) {
      top1 = std::max(top1, ev(0));
      bot2 = std::min(bot2, ev(1));
    }
    const double lam0 = 0.5 * (top1 + bot2);
    expect(check_gap(b, lam0, (bot2 - top1) / 8).gapped, "TRS model gap not certified");
    const ProjectorField p = fermi_projector(b, lam0);
    expect(lattice_chern(p).value == 0, "TRS lattice Chern nonzero");
    expect(berry_chern(p).value == 0, "TRS berry Chern nonzero");

    // equivariance of the projector under xi -> xi + 2 pi k
    ContinuousModel mag;
    mag.kind = ContinuousKind::MagneticSchrodinger;
    mag.fns["V"].set(1, 0, Complex(0.15, 0));
    mag.fns["V"].set(-1, 0, Complex(0.15, 0));
    mag.fns["A1"].set(0, 1, Complex(0, -0.1));
    mag.fns["A1"].set(0, -1, Complex(0, 0.1));
    mag.fns["A2"].set(1, 0, Complex(0, -0.1));
    mag.fns["A2"].set(-1, 0, Complex(0, 0.1));
    mag.validate();
    const double dev = equivariance_check(mag, Vec2(0.6, -0.9), 1, 0, 5, 3, 1);
    expect(dev < 1e-10, "equivariance deviation " + std::to_string(dev));
  });

  criterion(9, "windowed conductivity is robust to the switch profiles and interface noise", [] {
    JunctionFamily j = JunctionFamily::make(appendix(0.3, 1), kBarrier, 0.0);
    SwitchFunctions s;
    s.lambda0 = 0.0;
    s.eps = 0.15;
    s.ell = 12;
    const ConvergenceTable table =
        conductivity_convergence(j, {{32, 27}, {48, 40}, {64, 53}}, s, 8, 12);
    double prev = 1e300;
    for (const auto& row : table.rows) {
      const double err = std::fabs(row.two_pi_value - 1.0);
      expect(err <= prev, "error not shrinking at L1=" + std::to_string(row.L1));
      prev = err;
    }
    const double bar = table.error_bar();

    BoxOperator box(j, 48, 40, 12);
    s.center = 48 / 2.0 - 0.5;
    const ConductivityResult base = windowed_conductivity(box, s, WindowSpec{8});

    SwitchFunctions f2 = s;
    f2.ell = 8;
    f2.f_order = 11;
    const double df =
        std::fabs(windowed_conductivity(box, f2, WindowSpec{8}).two_pi_value - base.two_pi_value);
    expect(df < bar, "f-profile change " + std::to_string(df) + " vs bar " + std::to_string(bar));

    SwitchFunctions g2 = s;
    g2.eps = 0.10;
    g2.g_order = 9;
    const double dg =
        std::fabs(windowed_conductivity(box, g2, WindowSpec{8}).two_pi_value - base.two_pi_value);
    expect(dg < bar, "g-profile change " + std::to_string(dg) + " vs bar " + std::to_string(bar));

    BoxOperator perturbed(j, 48, 40, 12);
    perturbed.perturb_interface(314159, 0.15);
    const double dp = std::fabs(windowed_conductivity(perturbed, s, WindowSpec{8}).two_pi_value -
                                base.two_pi_value);
    expect(dp < bar, "interface perturbation " + std::to_string(dp) + " vs bar " +
                         std::to_string(bar));
  });

  if (failures == 0) std::printf("all criteria passed\n");
  return failures;
}
