#include "bect/edge.hpp"

#include <algorithm>
#include <atomic>
#include <memory>
#include <cmath>
#include <set>

namespace bect {

// ---------------------------------------------------------------------------
// StripOperator
// ---------------------------------------------------------------------------

StripOperator::StripOperator(const JunctionFamily& junction, int width)
    : minus_(hopping_table(junction.minus)),
      plus_(hopping_table(junction.plus)),
      barrier_(hopping_table(junction.barrier)),
      profile_(junction.profile),
      width_(width) {
  if (minus_.dim != plus_.dim || minus_.dim != barrier_.dim)
    throw ConfigError("strip bulks must share the orbital dimension");
  dim_ = minus_.dim;
  std::set<int> offs;
  for (const auto* t : {&minus_, &plus_, &barrier_})
    for (int o : t->offsets) offs.insert(o);
  offsets_.assign(offs.begin(), offs.end());
  const int range = hopping_range();
  if (width_ < 4 * range)
    throw ConfigError("strip width must be at least 4x the hopping range");
}

int StripOperator::hopping_range() const {
  int r = 0;
  for (int o : offsets_) r = std::max(r, std::abs(o));
  return r;
}

ComplexMatrix StripOperator::bond_block(int r2, double zeta, double h) const {
  // The Floquet phase enters with a reversed sign: this orientation makes the
  // gap-state group velocities consistent with the conductivity trace formula
  // (fixed once against the two-band reference model, see the edge tests).
  const double phase = -zeta;
  const double wp = profile_.chi_plus(h);
  const double wm = profile_.chi_minus(h);
  const double w0 = profile_.chi_zero(h);
  ComplexMatrix T = ComplexMatrix::Zero(dim_, dim_);
  if (wm != 0.0) T += wm * minus_.block(r2, phase);
  if (wp != 0.0) T += wp * plus_.block(r2, phase);
  if (w0 != 0.0) T += w0 * barrier_.block(r2, phase);
  return T;
}

ComplexMatrix StripOperator::matrix(double zeta) const {
  const int n = size();
  ComplexMatrix H = ComplexMatrix::Zero(n, n);
  for (int i = -width_; i <= width_; ++i)
    for (int r2 : offsets_) {
      const int j = i + r2;
      if (j < -width_ || j > width_) continue;
      H.block(dim_ * (i + width_), dim_ * (j + width_), dim_, dim_) +=
          bond_block(r2, zeta, i + 0.5 * r2);
    }
  return 0.5 * (H + H.adjoint().eval());
}

double StripOperator::localization_weight(const ComplexMatrix& vectors, int q) const {
  double inner = 0, total = 0;
  for (int i = -width_; i <= width_; ++i) {
    double site = 0;
    for (int o = 0; o < dim_; ++o) site += std::norm(vectors(dim_ * (i + width_) + o, q));
    total += site;
    if (std::abs(i) <= width_ / 3.0) inner += site;
  }
  return total > 0 ? inner / total : 0.0;
}

std::vector<std::pair<double, double>> StripOperator::bulk_bands(double zeta, int n_xi2) const {
  const double phase = -zeta;
  std::vector<std::vector<double>> samples;  // per band, sorted later
  std::vector<std::pair<double, double>> bands;
  for (const auto* t : {&minus_, &plus_}) {
    std::vector<std::pair<double, double>> ranges(dim_, {1e300, -1e300});
    for (int s = 0; s < n_xi2; ++s) {
      const double xi2 = kTwoPi * s / n_xi2;
      ComplexMatrix H = ComplexMatrix::Zero(dim_, dim_);
      for (int o : t->offsets) H += t->block(o, phase) * std::exp(Complex(0, o * xi2));
      H = 0.5 * (H + H.adjoint().eval());
      Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(H, Eigen::EigenvaluesOnly);
      for (int q = 0; q < dim_; ++q) {
        ranges[q].first = std::min(ranges[q].first, es.eigenvalues()(q));
        ranges[q].second = std::max(ranges[q].second, es.eigenvalues()(q));
      }
    }
    bands.insert(bands.end(), ranges.begin(), ranges.end());
  }
  std::sort(bands.begin(), bands.end());
  return bands;
}

// ---------------------------------------------------------------------------
// Floquet sweep with adaptive refinement
// ---------------------------------------------------------------------------

namespace {

struct MatchOutcome {
  std::vector<std::pair<int, int>> pairs;
  std::vector<int> lost;  // indices in a with no successor
  std::vector<int> born;  // indices in b with no predecessor
  double max_displacement = 0;
};

/// Greedy nearest-value assignment between adjacent columns. Exact and
/// near-exact value ties (degenerate columns, symmetric spectra) are broken
/// by localization continuity: a tiny weight-distance penalty keeps boundary
/// and interface branches from trading identities at a degeneracy.
MatchOutcome match_columns(const std::vector<FloquetState>& a, const std::vector<FloquetState>& b,
                           double cap, double tie_penalty) {
  struct Cand {
    double cost, d;
    int i, j;
  };
  std::vector<Cand> cands;
  for (int i = 0; i < (int)a.size(); ++i)
    for (int j = 0; j < (int)b.size(); ++j) {
      const double d = std::fabs(a[i].eigenvalue - b[j].eigenvalue);
      if (d <= cap)
        cands.push_back({d + tie_penalty * std::fabs(a[i].localization - b[j].localization), d,
                         i, j});
    }
  std::sort(cands.begin(), cands.end(), [](const Cand& x, const Cand& y) {
    if (x.cost != y.cost) return x.cost < y.cost;
    if (x.i != y.i) return x.i < y.i;
    return x.j < y.j;
  });
  MatchOutcome out;
  std::vector<char> ua(a.size(), 0), ub(b.size(), 0);
  for (const auto& c : cands) {
    if (ua[c.i] || ub[c.j]) continue;
    ua[c.i] = ub[c.j] = 1;
    out.pairs.push_back({c.i, c.j});
    out.max_displacement = std::max(out.max_displacement, c.d);
  }
  for (int i = 0; i < (int)a.size(); ++i)
    if (!ua[i]) out.lost.push_back(i);
  for (int j = 0; j < (int)b.size(); ++j)
    if (!ub[j]) out.born.push_back(j);
  return out;
}

/// A step is resolved when matched curves move slowly, any appearing or
/// disappearing state sits near the window edge, and the step can localize
/// level crossings: whenever a value sits within twice the step displacement
/// of lambda0, the interval is subdivided down to `min_interval`, so nearby
/// curves cannot trade a crossing unnoticed. Slow tangential approaches have
/// vanishing displacement and do not trigger the subdivision.
bool step_resolved(const std::vector<FloquetState>& a, const std::vector<FloquetState>& b,
                   double lambda0, double window, double interval, double min_interval) {
  const MatchOutcome m = match_columns(a, b, window / 2, window / 1000);
  if (m.max_displacement >= window / 4) return false;
  for (int i : m.lost)
    if (std::fabs(a[i].eigenvalue - lambda0) < window - window / 4) return false;
  for (int j : m.born)
    if (std::fabs(b[j].eigenvalue - lambda0) < window - window / 4) return false;
  if (interval > min_interval) {
    const double band = std::min(2 * m.max_displacement, window / 4);
    for (const auto& s : a)
      if (std::fabs(s.eigenvalue - lambda0) <= band) return false;
    for (const auto& s : b)
      if (std::fabs(s.eigenvalue - lambda0) <= band) return false;
  }
  return true;
}

}  // namespace

FloquetSpectrum floquet_spectrum(const FiberFamily& family, double lambda0, double window,
                                 const FloquetOptions& opts) {
  if (!(window > 0)) throw ConfigError("floquet window half-width must be positive");
  FloquetSpectrum fs;
  fs.lambda0 = lambda0;
  fs.window = window;

  auto solve_many = [&](const std::vector<double>& zs) {
    std::vector<std::vector<FloquetState>> cols(zs.size());
    parallel_for(zs.size(), opts.exec, [&](std::size_t i) {
      Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(family.matrix(zs[i]));
      std::vector<FloquetState> col;
      for (int q = 0; q < es.eigenvalues().size(); ++q) {
        const double l = es.eigenvalues()(q);
        if (std::fabs(l - lambda0) < window)
          col.push_back({l, family.localization(es.eigenvectors(), q)});
      }
      cols[i] = std::move(col);
    });
    return cols;
  };

  fs.zetas.resize(opts.initial_nodes + 1);
  for (int i = 0; i <= opts.initial_nodes; ++i) fs.zetas[i] = kTwoPi * i / opts.initial_nodes;
  fs.states = solve_many(fs.zetas);

  const double min_interval = kTwoPi / opts.initial_nodes / 64.0;
  auto collect_unresolved = [&] {
    fs.unresolved.clear();
    for (std::size_t i = 0; i + 1 < fs.zetas.size(); ++i)
      if (!step_resolved(fs.states[i], fs.states[i + 1], lambda0, window,
                         fs.zetas[i + 1] - fs.zetas[i], min_interval))
        fs.unresolved.push_back({fs.zetas[i], fs.zetas[i + 1]});
  };
  for (int round = 0; round < opts.max_refine_depth; ++round) {
    std::vector<double> inserts;
    for (std::size_t i = 0; i + 1 < fs.zetas.size(); ++i)
      if (!step_resolved(fs.states[i], fs.states[i + 1], lambda0, window,
                         fs.zetas[i + 1] - fs.zetas[i], min_interval))
        inserts.push_back(0.5 * (fs.zetas[i] + fs.zetas[i + 1]));
    if (inserts.empty()) return fs;
    if ((int)(fs.zetas.size() + inserts.size()) > opts.node_budget) {
      fs.partial = true;
      collect_unresolved();
      return fs;
    }
    const auto cols = solve_many(inserts);
    std::vector<double> zs;
    std::vector<std::vector<FloquetState>> st;
    std::size_t k = 0;
    for (std::size_t i = 0; i < fs.zetas.size(); ++i) {
      zs.push_back(fs.zetas[i]);
      st.push_back(std::move(fs.states[i]));
      if (k < inserts.size() && i + 1 < fs.zetas.size() && inserts[k] > fs.zetas[i] &&
          inserts[k] < fs.zetas[i + 1]) {
        zs.push_back(inserts[k]);
        st.push_back(cols[k]);
        ++k;
      }
    }
    fs.zetas = std::move(zs);
    fs.states = std::move(st);
  }
  fs.partial = true;
  collect_unresolved();
  return fs;
}

FloquetSpectrum floquet_spectrum(const StripOperator& strip, double lambda0, double window,
                                 const FloquetOptions& opts) {
  FiberFamily family;
  family.matrix = [&strip](double zeta) { return strip.matrix(zeta); };
  family.localization = [&strip](const ComplexMatrix& vectors, int q) {
    return strip.localization_weight(vectors, q);
  };
  return floquet_spectrum(family, lambda0, window, opts);
}

// ---------------------------------------------------------------------------
// Spectral flow
// ---------------------------------------------------------------------------

SpectralFlowResult spectral_flow(const FloquetSpectrum& fs, double lambda0, double theta,
                                 bool filtered) {
  if (fs.partial) {
    std::string where;
    for (std::size_t i = 0; i < fs.unresolved.size() && i < 4; ++i)
      where += " [" + std::to_string(fs.unresolved[i].first) + ", " +
               std::to_string(fs.unresolved[i].second) + "]";
    throw NumericalError("edge",
                         "Floquet spectrum is partial: displacement or ambiguity bound not met "
                         "within the node budget on zeta interval(s)" + where +
                         "; raise the budget or enlarge the window");
  }
  struct Sample {
    double zeta, lambda, loc;
  };
  struct Curve {
    std::vector<Sample> samples;
    int first_col_state = -1;  // index into the zeta=0 column, if born there
    int last_col_state = -1;   // index into the zeta=2 pi column, if alive there
  };
  std::vector<Curve> curves;
  std::vector<int> active;  // curve index per current-column state

  for (std::size_t step = 0; step < fs.zetas.size(); ++step) {
    const auto& col = fs.states[step];
    if (step == 0) {
      active.resize(col.size());
      for (std::size_t j = 0; j < col.size(); ++j) {
        Curve c;
        c.samples.push_back({fs.zetas[0], col[j].eigenvalue, col[j].localization});
        c.first_col_state = (int)j;
        active[j] = (int)curves.size();
        curves.push_back(std::move(c));
      }
      continue;
    }
    std::vector<FloquetState> prev;
    prev.reserve(active.size());
    for (int ci : active)
      prev.push_back({curves[ci].samples.back().lambda, curves[ci].samples.back().loc});
    const MatchOutcome m = match_columns(prev, col, fs.window / 2, fs.window / 1000);

    std::vector<int> next_active(col.size(), -1);
    for (const auto& [i, j] : m.pairs) {
      const int ci = active[i];
      curves[ci].samples.push_back({fs.zetas[step], col[j].eigenvalue, col[j].localization});
      next_active[j] = ci;
    }
    for (int j : m.born) {
      Curve c;
      c.samples.push_back({fs.zetas[step], col[j].eigenvalue, col[j].localization});
      next_active[j] = (int)curves.size();
      curves.push_back(std::move(c));
    }
    active = std::move(next_active);
  }
  for (std::size_t j = 0; j < active.size(); ++j)
    if (active[j] >= 0) curves[active[j]].last_col_state = (int)j;

  // The sweep is a closed loop: the zeta = 2 pi column repeats the zeta = 0
  // column, so a curve alive at the end continues into the curve born at the
  // matching zeta = 0 state. Chains of such continuations are either open
  // (entering and leaving the window) or full cycles around the loop.
  std::vector<int> continue_into(curves.size(), -1);
  std::vector<char> is_continuation(curves.size(), 0);
  {
    std::vector<int> end_curve;    // curves alive at the last column, by state
    std::vector<int> start_curve;  // curves born at the first column, by state
    end_curve.assign(fs.states.back().size(), -1);
    start_curve.assign(fs.states.front().size(), -1);
    for (std::size_t c = 0; c < curves.size(); ++c) {
      if (curves[c].last_col_state >= 0) end_curve[curves[c].last_col_state] = (int)c;
      if (curves[c].first_col_state >= 0) start_curve[curves[c].first_col_state] = (int)c;
    }
    const MatchOutcome seam =
        match_columns(fs.states.back(), fs.states.front(), fs.window / 2, fs.window / 1000);
    for (const auto& [i, j] : seam.pairs) {
      if (end_curve[i] < 0 || start_curve[j] < 0) continue;
      continue_into[end_curve[i]] = start_curve[j];
      is_continuation[start_curve[j]] = 1;
    }
  }

  SpectralFlowResult result;
  result.filtered = filtered;

  auto count_chain = [&](const std::vector<const Curve*>& chain, bool cyclic) {
    std::vector<Sample> samples;
    for (std::size_t k = 0; k < chain.size(); ++k) {
      const auto& s = chain[k]->samples;
      // drop the duplicated seam sample when concatenating
      samples.insert(samples.end(), s.begin() + (k == 0 ? 0 : 1), s.end());
    }
    if (cyclic && samples.size() > 1) samples.pop_back();  // last duplicates first

    // signed subsequence with exact touches skipped
    std::vector<std::size_t> signed_idx;
    for (std::size_t k = 0; k < samples.size(); ++k)
      if (samples[k].lambda != lambda0) signed_idx.push_back(k);
    if (signed_idx.size() < 2) return;
    const std::size_t n = signed_idx.size();
    const std::size_t last = cyclic ? n : n - 1;
    for (std::size_t k = 0; k < last; ++k) {
      const Sample& a = samples[signed_idx[k]];
      const Sample& b = samples[signed_idx[(k + 1) % n]];
      const int sa = a.lambda > lambda0 ? 1 : -1;
      const int sb = b.lambda > lambda0 ? 1 : -1;
      if (sa == sb) continue;
      const double t = (lambda0 - a.lambda) / (b.lambda - a.lambda);
      double zb = b.zeta;
      if (zb < a.zeta) zb += kTwoPi;  // seam wrap
      Crossing cr;
      cr.zeta = wrap_two_pi(a.zeta + t * (zb - a.zeta));
      cr.localization = a.loc + t * (b.loc - a.loc);
      cr.sign = sb;
      result.unfiltered_flow += cr.sign;
      if (!filtered || cr.localization >= theta) {
        result.flow += cr.sign;
        result.crossings.push_back(cr);
      }
    }
  };

  std::vector<char> visited(curves.size(), 0);
  for (std::size_t c = 0; c < curves.size(); ++c) {
    if (visited[c] || is_continuation[c]) continue;  // chain heads first
    std::vector<const Curve*> chain;
    int cur = (int)c;
    while (cur >= 0 && !visited[cur]) {
      visited[cur] = 1;
      chain.push_back(&curves[cur]);
      cur = continue_into[cur];
    }
    count_chain(chain, false);
  }
  for (std::size_t c = 0; c < curves.size(); ++c) {
    if (visited[c]) continue;  // remaining curves form pure cycles
    std::vector<const Curve*> chain;
    int cur = (int)c;
    while (!visited[cur]) {
      visited[cur] = 1;
      chain.push_back(&curves[cur]);
      cur = continue_into[cur];
    }
    count_chain(chain, true);
  }

  if (!filtered) result.flow = result.unfiltered_flow;
  std::sort(result.crossings.begin(), result.crossings.end(),
            [](const Crossing& a, const Crossing& b) { return a.zeta < b.zeta; });
  return result;
}

// ---------------------------------------------------------------------------
// Bulk-edge verification
// ---------------------------------------------------------------------------

namespace {

BlochFamily family_of(const BulkModel& m) {
  if (std::holds_alternative<MatrixModel>(m)) return BlochFamily(std::get<MatrixModel>(m));
  if (std::holds_alternative<AppendixModel>(m)) return BlochFamily(std::get<AppendixModel>(m));
  throw ConfigError("bulk-edge verification runs on lattice models");
}

struct BulkData {
  int c1 = 0;
  double berry_residual = 0;
  double gap_lo = 0, gap_hi = 0;  // max band below / min band above lambda0
};

BulkData bulk_chern(const BulkModel& m, double lambda0, const BZGrid& grid, Exec exec) {
  const BlochFamily fam = family_of(m);
  const BandStructure bands = compute_bands(fam, grid, true, exec);
  BulkData out;
  out.gap_lo = -1e300;
  out.gap_hi = 1e300;
  for (int node = 0; node < grid.nodes(); ++node)
    for (int q = 0; q < bands.dim; ++q) {
      const double l = bands.eigenvalues[node](q);
      if (l < lambda0)
        out.gap_lo = std::max(out.gap_lo, l);
      else
        out.gap_hi = std::min(out.gap_hi, l);
    }
  if (!(out.gap_lo < lambda0 && out.gap_hi > lambda0))
    throw NumericalError("edge", "bulk model is not gapped at lambda0 on the sampled grid");
  const ProjectorField p = fermi_projector(bands, lambda0);
  out.c1 = lattice_chern(p, exec).value;
  if (p.rank > 0 && p.rank < p.dim) out.berry_residual = berry_chern(p, exec).residual;
  return out;
}

}  // namespace

BecReport verify_bec(const BulkModel& minus, const BulkModel& plus, double lambda0,
                     const BecOptions& opts) {
  const BulkData dm = bulk_chern(minus, lambda0, opts.chern_grid, opts.exec);
  const BulkData dp = bulk_chern(plus, lambda0, opts.chern_grid, opts.exec);

  const double lo = std::max(dm.gap_lo, dp.gap_lo);
  const double hi = std::min(dm.gap_hi, dp.gap_hi);
  const double margin = std::min(lambda0 - lo, hi - lambda0);
  if (!(margin > 0)) throw NumericalError("edge", "joint bulk gap does not contain lambda0");
  const double window = opts.window > 0 ? opts.window : 0.5 * margin;
  if (window > margin)
    throw ConfigError("requested window exceeds the certified joint bulk gap");

  const JunctionFamily junction = JunctionFamily::make(minus, plus, lambda0);
  const StripOperator strip(junction, opts.width);
  FloquetOptions fopts;
  fopts.initial_nodes = opts.zeta_nodes;
  fopts.exec = opts.exec;
  const FloquetSpectrum fs = floquet_spectrum(strip, lambda0, window, fopts);
  const SpectralFlowResult flow = spectral_flow(fs, lambda0, opts.loc_threshold, true);

  BecReport r;
  r.c1_plus = dp.c1;
  r.c1_minus = dm.c1;
  r.spectral_flow = flow.flow;
  r.match = (flow.flow == dp.c1 - dm.c1);
  r.berry_residual_plus = dp.berry_residual;
  r.berry_residual_minus = dm.berry_residual;
  return r;
}

namespace {

int interface_flow(const BulkModel& minus, const BulkModel& plus, const BulkModel& barrier,
                   double lambda0, const BecOptions& opts, double window) {
  const JunctionFamily junction =
      JunctionFamily::make_with_barrier(minus, plus, barrier);
  const StripOperator strip(junction, opts.width);
  FloquetOptions fopts;
  fopts.initial_nodes = opts.zeta_nodes;
  fopts.exec = opts.exec;
  const FloquetSpectrum fs = floquet_spectrum(strip, lambda0, window, fopts);
  return spectral_flow(fs, lambda0, opts.loc_threshold, true).flow;
}

}  // namespace

ConcatenationReport concatenation_check(const BulkModel& minus, const BulkModel& plus,
                                        const BulkModel& barrier, double lambda0,
                                        const BecOptions& opts) {
  // Joint window from the three models' sampled gaps.
  double lo = -1e300, hi = 1e300;
  for (const BulkModel* m : {&minus, &plus, &barrier}) {
    const BulkData d = bulk_chern(*m, lambda0, opts.chern_grid, opts.exec);
    lo = std::max(lo, d.gap_lo);
    hi = std::min(hi, d.gap_hi);
  }
  const double margin = std::min(lambda0 - lo, hi - lambda0);
  if (!(margin > 0))
    throw NumericalError("edge", "joint bulk gap of the three models does not contain lambda0");
  const double window = opts.window > 0 ? opts.window : 0.5 * margin;

  ConcatenationReport r;
  r.flow_minus_plus = interface_flow(minus, plus, barrier, lambda0, opts, window);
  r.flow_minus_barrier = interface_flow(minus, barrier, barrier, lambda0, opts, window);
  r.flow_barrier_plus = interface_flow(barrier, plus, barrier, lambda0, opts, window);
  r.additive = (r.flow_minus_plus == r.flow_minus_barrier + r.flow_barrier_plus);
  return r;
}

// ---------------------------------------------------------------------------
// Continuous strips
// ---------------------------------------------------------------------------

ComplexMatrix continuous_strip_matrix(const JunctionFamily& junction, double zeta,
                                      const ContinuousStripOptions& opts) {
  if (!std::holds_alternative<ContinuousModel>(junction.plus))
    throw ConfigError("continuous strip requires continuous bulk models");
  const auto& probe = std::get<ContinuousModel>(junction.plus);
  if (probe.kind != ContinuousKind::MagneticSchrodinger)
    throw ConfigError("continuous strips are implemented for magnetic-schrodinger models");

  const int M = opts.fourier_modes;
  const int nx = opts.half_width * opts.points_per_cell;
  const double delta = 1.0 / opts.points_per_cell;
  const int nmodes = 2 * M + 1, npts = 2 * nx + 1;
  const int n = nmodes * npts;
  auto idx = [&](int m, int i) { return (m + M) * npts + (i + nx); };

  // Glued coefficient value of fn at (k1 Fourier index, grid height).
  std::vector<BulkModel> snapshots(npts);
  for (int i = -nx; i <= nx; ++i) snapshots[i + nx] = glue_family(junction, i * delta);
  auto coeff_at = [&](const char* fn, int k1, int i) -> Complex {
    const auto& cm = std::get<ContinuousModel>(snapshots[i + nx]);
    Complex acc(0, 0);
    const double x2 = i * delta;
    for (const auto& [k, v] : cm.fn(fn).coeffs)
      if (k.first == k1) acc += v * std::exp(Complex(0, kTwoPi * k.second * x2));
    return acc;
  };

  // Floquet orientation matches the lattice strips (see StripOperator::bond_block).
  // zeta is reduced to [-pi, pi) so the truncated mode window tracks the
  // sweep and the fibers at 0 and 2 pi coincide exactly.
  const double zr = wrap_pi(zeta);
  auto kappa = [&](int m) { return kTwoPi * m - zr; };

  ComplexMatrix H = ComplexMatrix::Zero(n, n);
  ComplexMatrix A1 = ComplexMatrix::Zero(n, n), A2 = ComplexMatrix::Zero(n, n),
                V = ComplexMatrix::Zero(n, n);
  for (int m = -M; m <= M; ++m)
    for (int mp = -M; mp <= M; ++mp)
      for (int i = -nx; i <= nx; ++i) {
        const int k1 = m - mp;
        A1(idx(m, i), idx(mp, i)) = coeff_at("A1", k1, i);
        A2(idx(m, i), idx(mp, i)) = coeff_at("A2", k1, i);
        V(idx(m, i), idx(mp, i)) = coeff_at("V", k1, i);
      }

  // (D1 + A1)^2 with D1 diagonal.
  {
    ComplexMatrix D1A1 = A1;
    for (int m = -M; m <= M; ++m)
      for (int i = -nx; i <= nx; ++i) D1A1(idx(m, i), idx(m, i)) += kappa(m);
    H += D1A1 * D1A1;
  }
  // (D2 + A2)^2 with Dirichlet second differences and a centered first
  // difference for the cross terms.
  {
    ComplexMatrix D2 = ComplexMatrix::Zero(n, n);
    for (int m = -M; m <= M; ++m)
      for (int i = -nx; i <= nx; ++i) {
        if (i + 1 <= nx) D2(idx(m, i), idx(m, i + 1)) = Complex(0, -1) / (2 * delta);
        if (i - 1 >= -nx) D2(idx(m, i), idx(m, i - 1)) = Complex(0, 1) / (2 * delta);
      }
    for (int m = -M; m <= M; ++m)
      for (int i = -nx; i <= nx; ++i) {
        H(idx(m, i), idx(m, i)) += 2.0 / (delta * delta);
        if (i + 1 <= nx) H(idx(m, i), idx(m, i + 1)) -= 1.0 / (delta * delta);
        if (i - 1 >= -nx) H(idx(m, i), idx(m, i - 1)) -= 1.0 / (delta * delta);
      }
    H += D2 * A2 + A2 * D2 + A2 * A2;
  }
  H += V;
  return 0.5 * (H + H.adjoint().eval());
}


FiberFamily continuous_fiber(JunctionFamily junction, const ContinuousStripOptions& opts) {
  auto shared = std::make_shared<JunctionFamily>(std::move(junction));
  FiberFamily family;
  family.matrix = [shared, opts](double zeta) {
    return continuous_strip_matrix(*shared, zeta, opts);
  };
  const int M = opts.fourier_modes;
  const int nx = opts.half_width * opts.points_per_cell;
  const int npts = 2 * nx + 1;
  const int inner = nx / 3;
  family.localization = [M, nx, npts, inner](const ComplexMatrix& vectors, int q) {
    double in = 0, total = 0;
    for (int m = -M; m <= M; ++m)
      for (int i = -nx; i <= nx; ++i) {
        const double a = std::norm(vectors((m + M) * npts + (i + nx), q));
        total += a;
        if (std::abs(i) <= inner) in += a;
      }
    return total > 0 ? in / total : 0.0;
  };
  return family;
}

}  // namespace bect
