#include "bect/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace bect {

using nlohmann::json;

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string band_csv(const BandStructure& b) {
  std::string out = "xi1,xi2,band_index,eigenvalue\n";
  for (int a = 0; a < b.grid.n1; ++a)
    for (int bb = 0; bb < b.grid.n2; ++bb) {
      const Vec2 xi = b.grid.node(a, bb);
      const auto& ev = b.eigenvalues[b.grid.index(a, bb)];
      for (int q = 0; q < b.dim; ++q)
        out += num(xi[0]) + "," + num(xi[1]) + "," + std::to_string(q + 1) + "," + num(ev(q)) + "\n";
    }
  return out;
}

std::string curvature_csv(const CurvatureField& c) {
  std::string out = "xi1,xi2,im_curvature\n";
  for (int a = 0; a < c.grid.n1; ++a)
    for (int b = 0; b < c.grid.n2; ++b) {
      const Vec2 xi = c.grid.node(a, b);
      out += num(xi[0]) + "," + num(xi[1]) + "," + num(c.values[c.grid.index(a, b)].imag()) + "\n";
    }
  return out;
}

std::string floquet_csv(const FloquetSpectrum& fs) {
  std::string out = "zeta,eigenvalue,localization_weight\n";
  for (std::size_t i = 0; i < fs.zetas.size(); ++i)
    for (const auto& s : fs.states[i])
      out += num(fs.zetas[i]) + "," + num(s.eigenvalue) + "," + num(s.localization) + "\n";
  return out;
}

std::string convergence_csv(const ConvergenceTable& t) {
  std::string out = "L1,L2,margin,value,two_pi_value,diff_prev\n";
  for (const auto& r : t.rows)
    out += std::to_string(r.L1) + "," + std::to_string(r.L2) + "," + std::to_string(r.margin) +
           "," + num(r.value) + "," + num(r.two_pi_value) + "," + num(r.diff_prev) + "\n";
  return out;
}

std::string gap_json(const GapReport& r) {
  json j{{"lambda0", r.lambda0},   {"half_width", r.half_width},
         {"gapped", r.gapped},     {"n_below", r.n_below},
         {"max_below", r.max_below}, {"min_above", r.min_above},
         {"lipschitz", r.lipschitz}, {"lipschitz_ok", r.lipschitz_ok}};
  return j.dump(2);
}

std::string chern_json(const ChernResult& r) {
  json j{{"value", r.value},
         {"raw_re", r.raw.real()},
         {"raw_im", r.raw.imag()},
         {"residual", r.residual},
         {"method", r.method}};
  return j.dump(2);
}

std::string flow_json(const SpectralFlowResult& r) {
  json crossings = json::array();
  for (const auto& c : r.crossings)
    crossings.push_back({{"zeta", c.zeta}, {"sign", c.sign}, {"localization", c.localization}});
  json j{{"flow", r.flow},
         {"filtered", r.filtered},
         {"unfiltered_flow", r.unfiltered_flow},
         {"crossings", crossings}};
  return j.dump(2);
}

std::string bec_json(const BecReport& r) {
  json j{{"c1_plus", r.c1_plus},
         {"c1_minus", r.c1_minus},
         {"spectral_flow", r.spectral_flow},
         {"match", r.match},
         {"berry_residual_plus", r.berry_residual_plus},
         {"berry_residual_minus", r.berry_residual_minus}};
  return j.dump(2);
}

std::string concatenation_json(const ConcatenationReport& r) {
  json j{{"flow_minus_plus", r.flow_minus_plus},
         {"flow_minus_barrier", r.flow_minus_barrier},
         {"flow_barrier_plus", r.flow_barrier_plus},
         {"additive", r.additive}};
  return j.dump(2);
}

std::string effective_json(const EffectiveIndexResult& r) {
  json j{{"J_re", r.J.real()},
         {"J_im", r.J.imag()},
         {"two_i_pi_J_re", r.two_i_pi_J.real()},
         {"chern", r.chern},
         {"residual", r.residual},
         {"method", r.method}};
  return j.dump(2);
}

std::string conductivity_json(const ConductivityResult& r) {
  json j{{"value", r.value},
         {"two_pi_value", r.two_pi_value},
         {"nearest_int", r.nearest_int},
         {"deviation", r.deviation},
         {"imag_residual", r.imag_residual},
         {"full_trace", r.full_trace},
         {"window_states", r.window_states},
         {"dense_path", r.dense_path}};
  return j.dump(2);
}

std::string crossing_json(const CrossingDiagnostic& d) {
  json heights = json::array();
  for (std::size_t h = 0; h < d.heights.size(); ++h) {
    double min_gap = 1e300;
    int in_mask = 0;
    for (int node = 0; node < d.grid.nodes(); ++node) {
      min_gap = std::min(min_gap, d.gapfn[h](node));
      in_mask += d.in_z_delta[h][node] ? 1 : 0;
    }
    heights.push_back({{"x2", d.heights[h]}, {"min_gap", min_gap}, {"z_delta_nodes", in_mask}});
  }
  json j{{"band", d.band},
         {"delta", d.delta},
         {"z_delta_empty", d.z_delta_empty},
         {"heights", heights}};
  return j.dump(2);
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write file: " + path);
  out << content;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string content_hash(const std::string& content) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : content) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", (unsigned long long)h);
  return buf;
}

}  // namespace bect
