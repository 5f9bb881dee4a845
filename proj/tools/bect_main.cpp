// bect: bulk and edge topology toolkit.
//
// Subcommands compute band structures, Chern numbers, interface spectra,
// spectral flow, the windowed conductivity and effective-symbol indices from
// a JSON experiment config, and write CSV/JSON artifacts. Identical configs
// reproduce byte-identical artifacts; results are cached under
// <out>/cache keyed by a content hash of (command, config).

#include <filesystem>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "bect/io.hpp"
#include "bect/parallel.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace bect;

namespace {

constexpr const char* kToolVersion = "bect 0.1.0";

struct Cli {
  std::string config_path;
  std::string out_dir = "out";
  bool force = false;
  int threads = 0;
};

struct Experiment {
  json doc;
  fs::path base;  // directory of the config file, for relative model paths

  BulkModel model(const std::string& key) const {
    if (!doc.contains(key)) throw ConfigError("config field missing: " + key);
    const auto& v = doc.at(key);
    if (v.is_string()) {
      fs::path p = v.get<std::string>();
      if (p.is_relative()) p = base / p;
      return model_from_json_file(p.string());
    }
    return model_from_json_text(v.dump());
  }

  double number(const std::string& key, std::optional<double> fallback = {}) const {
    if (doc.contains(key)) return doc.at(key).get<double>();
    if (fallback) return *fallback;
    throw ConfigError("config field missing: " + key);
  }

  json section(const std::string& key) const {
    return doc.contains(key) ? doc.at(key) : json::object();
  }
};

BZGrid grid_of(const Experiment& ex, int def = 24) {
  const json g = ex.section("grid");
  return BZGrid(g.value("n1", def), g.value("n2", def));
}

BlochFamily family_of(const Experiment& ex, const BulkModel& m) {
  if (const auto* cm = std::get_if<ContinuousModel>(&m)) {
    const int K = ex.doc.value("truncation_K", 4);
    return BlochFamily(*cm, K);
  }
  if (const auto* mm = std::get_if<MatrixModel>(&m)) return BlochFamily(*mm);
  return BlochFamily(std::get<AppendixModel>(m));
}

ProjectorField projector_of(const Experiment& ex, const std::string& key, const BZGrid& grid,
                            double lambda0) {
  const BulkModel m = ex.model(key);
  const BandStructure b = compute_bands(family_of(ex, m), grid, true);
  return fermi_projector(b, lambda0);
}

BecOptions bec_options(const Experiment& ex) {
  BecOptions o;
  const json s = ex.section("strip");
  o.width = s.value("width", 40);
  o.zeta_nodes = s.value("zeta_nodes", 200);
  o.window = s.value("window", 0.0);
  o.loc_threshold = s.value("loc_threshold", 0.5);
  o.chern_grid = grid_of(ex);
  return o;
}

JunctionFamily junction_of(const Experiment& ex) {
  const BulkModel minus = ex.model("model_minus");
  const BulkModel plus = ex.model("model_plus");
  if (ex.doc.contains("barrier"))
    return JunctionFamily::make_with_barrier(minus, plus, ex.model("barrier"));
  return JunctionFamily::make(minus, plus, ex.number("lambda0", 0.0));
}

// artifact set produced by one command
using Artifacts = std::vector<std::pair<std::string, std::string>>;

// default BZ grids: 24x24 for lattice models, 12x12 for plane-wave models
int default_grid(const BulkModel& m) {
  return std::holds_alternative<ContinuousModel>(m) ? 12 : 24;
}

Artifacts run_bands(const Experiment& ex) {
  const BulkModel m = ex.model("model");
  const BandStructure b = compute_bands(family_of(ex, m), grid_of(ex, default_grid(m)), false);
  Artifacts out{{"bands.csv", band_csv(b)}};
  if (ex.doc.contains("lambda0") && ex.doc.contains("epsilon")) {
    const GapReport r = check_gap(b, ex.number("lambda0"), ex.number("epsilon"));
    out.push_back({"gap.json", gap_json(r)});
  }
  return out;
}

Artifacts run_chern(const Experiment& ex) {
  const BulkModel m = ex.model("model");
  const BandStructure b =
      compute_bands(family_of(ex, m), grid_of(ex, default_grid(m)), true);
  const ProjectorField p = fermi_projector(b, ex.number("lambda0", 0.0));
  const CurvatureField c = berry_curvature(p);
  Artifacts out;
  out.push_back({"chern_lattice.json", chern_json(lattice_chern(p))});
  out.push_back({"chern_berry.json", chern_json(berry_chern(p))});
  out.push_back({"curvature.csv", curvature_csv(c)});
  return out;
}

FloquetSpectrum sweep_of(const Experiment& ex) {
  const BecOptions o = bec_options(ex);
  const double lambda0 = ex.number("lambda0", 0.0);
  JunctionFamily j = junction_of(ex);
  double window = o.window;
  if (window <= 0) {
    // half of the certified joint gap of the two bulks on the chern grid
    double lo = -1e300, hi = 1e300;
    for (const BulkModel* m : {&j.minus, &j.plus}) {
      const BandStructure b = compute_bands(family_of(ex, *m), o.chern_grid, false);
      for (const auto& ev : b.eigenvalues)
        for (int q = 0; q < b.dim; ++q) {
          if (ev(q) < lambda0)
            lo = std::max(lo, ev(q));
          else
            hi = std::min(hi, ev(q));
        }
    }
    const double margin = std::min(lambda0 - lo, hi - lambda0);
    if (!(margin > 0)) throw NumericalError("edge", "bulk models are not gapped at lambda0");
    window = 0.5 * margin;
  }
  FloquetOptions fo;
  fo.initial_nodes = o.zeta_nodes;
  if (std::holds_alternative<ContinuousModel>(j.minus)) {
    const json cs = ex.section("cstrip");
    ContinuousStripOptions copts;
    copts.fourier_modes = cs.value("fourier_modes", 4);
    copts.points_per_cell = cs.value("points_per_cell", 8);
    copts.half_width = cs.value("half_width", 8);
    return floquet_spectrum(continuous_fiber(std::move(j), copts), lambda0, window, fo);
  }
  StripOperator strip(j, o.width);
  return floquet_spectrum(strip, lambda0, window, fo);
}

Artifacts run_edge_spectrum(const Experiment& ex) {
  return {{"edge_spectrum.csv", floquet_csv(sweep_of(ex))}};
}

Artifacts run_spectral_flow(const Experiment& ex) {
  const BecOptions o = bec_options(ex);
  const FloquetSpectrum fs_ = sweep_of(ex);
  const SpectralFlowResult r =
      spectral_flow(fs_, ex.number("lambda0", 0.0), o.loc_threshold, true);
  return {{"spectral_flow.json", flow_json(r)}, {"edge_spectrum.csv", floquet_csv(fs_)}};
}

Artifacts run_verify(const Experiment& ex) {
  const BecReport r = verify_bec(ex.model("model_minus"), ex.model("model_plus"),
                                 ex.number("lambda0", 0.0), bec_options(ex));
  std::cout << "bulk-edge correspondence: flow = " << r.spectral_flow
            << ", c1(plus) - c1(minus) = " << (r.c1_plus - r.c1_minus) << " -> "
            << (r.match ? "MATCH" : "MISMATCH") << "\n";
  return {{"verify.json", bec_json(r)}};
}

Artifacts run_effective_index(const Experiment& ex) {
  const json levels = ex.section("levels");
  const double l1 = levels.value("lambda1", -1.0);
  const double l2 = levels.value("lambda2", 1.0);
  const ProjectorField p =
      projector_of(ex, "model", grid_of(ex, 48), ex.number("lambda0", 0.0));
  TwoLevelSymbol t(p, l1, l2);
  ContourSpec c = ContourSpec::default_for(l1, l2);
  const json cs = ex.section("contour");
  if (cs.contains("center")) c.center = Complex(cs["center"].get<double>(), 0);
  if (cs.contains("radius")) c.radius = cs["radius"].get<double>();
  if (cs.contains("nodes")) c.nodes = cs["nodes"].get<int>();
  Artifacts out;
  out.push_back({"effective_contour.json", effective_json(index_J_contour(t, c))});
  out.push_back({"effective_residue.json", effective_json(index_J_residue(t))});
  return out;
}

Artifacts run_conductivity(const Experiment& ex) {
  const json bx = ex.section("box");
  const int L1 = bx.value("L1", 48), L2 = bx.value("L2", 40);
  const int margin = bx.value("margin", 8);
  const int r1_max = bx.value("r1_max", 12);
  JunctionFamily j = junction_of(ex);
  SwitchFunctions s;
  s.lambda0 = ex.number("lambda0", 0.0);
  s.eps = bx.value("eps", ex.number("epsilon", 0.15));
  s.center = L1 / 2.0 - 0.5;
  s.ell = bx.value("ell", L1 / 4.0);
  ConductivityOptions opts;
  opts.seed = (std::uint64_t)ex.doc.value("seed", 24);

  Artifacts out;
  if (ex.doc.contains("boxes")) {
    std::vector<std::pair<int, int>> boxes;
    for (const auto& b : ex.doc["boxes"]) boxes.push_back({b[0].get<int>(), b[1].get<int>()});
    const ConvergenceTable t = conductivity_convergence(j, boxes, s, margin, r1_max, opts);
    out.push_back({"conductivity_convergence.csv", convergence_csv(t)});
  } else {
    BoxOperator box(j, L1, L2, r1_max);
    const ConductivityResult r = windowed_conductivity(box, s, WindowSpec{margin}, opts);
    out.push_back({"conductivity.json", conductivity_json(r)});
  }
  return out;
}

Artifacts run_crossing(const Experiment& ex) {
  const json cr = ex.section("crossing");
  const int band = cr.value("band", 1);
  const double delta = cr.value("delta", 0.05);
  const int r1_max = cr.value("r1_max", 12);
  std::vector<double> heights;
  if (cr.contains("heights"))
    for (const auto& h : cr["heights"]) heights.push_back(h.get<double>());
  else
    for (double h = -3.0; h <= 3.01; h += 0.5) heights.push_back(h);
  // coefficient mixing is closed over matrix and continuous models only
  auto lattice_form = [&](BulkModel m) -> BulkModel {
    if (const auto* a = std::get_if<AppendixModel>(&m)) return to_matrix_model(*a, r1_max);
    return m;
  };
  JunctionFamily j = junction_of(ex);
  j.minus = lattice_form(std::move(j.minus));
  j.plus = lattice_form(std::move(j.plus));
  j.barrier = lattice_form(std::move(j.barrier));
  const CrossingDiagnostic d = crossing_diagnostic(j, band, delta, heights, grid_of(ex),
                                                   ex.doc.value("truncation_K", 4));
  return {{"crossing.json", crossing_json(d)}};
}

int run_command(const std::string& command, const Cli& cli, json doc) {
  Experiment ex;
  ex.doc = std::move(doc);
  ex.base = fs::path(cli.config_path).parent_path();

  const std::string key = content_hash(command + "\n" + ex.doc.dump());
  const fs::path outdir = cli.out_dir;
  const fs::path cachedir = outdir / "cache";
  fs::create_directories(cachedir);
  const fs::path record_path = cachedir / (key + ".json");

  auto emit = [&](const Artifacts& artifacts) {
    for (const auto& [name, content] : artifacts)
      write_text_file((outdir / name).string(), content);
  };

  if (!cli.force && fs::exists(record_path)) {
    try {
      const json record = json::parse(read_text_file(record_path.string()));
      Artifacts artifacts;
      for (const auto& [name, content] : record.at("outputs").items())
        artifacts.push_back({name, content.get<std::string>()});
      emit(artifacts);
      for (const auto& [name, content] : artifacts)
        if (name == "verify.json") {
          const json r = json::parse(content);
          std::cout << "bulk-edge correspondence: flow = " << r["spectral_flow"]
                    << ", c1(plus) - c1(minus) = "
                    << (r["c1_plus"].get<int>() - r["c1_minus"].get<int>()) << " -> "
                    << (r["match"].get<bool>() ? "MATCH" : "MISMATCH") << "\n";
        }
      std::cout << "cache hit " << key << ": reused " << artifacts.size() << " artifact(s)\n";
      return 0;
    } catch (const std::exception& e) {
      std::cerr << "warning: corrupt cache record " << record_path << ", recomputing\n";
    }
  }

  Artifacts artifacts;
  if (command == "bands") artifacts = run_bands(ex);
  else if (command == "chern") artifacts = run_chern(ex);
  else if (command == "edge-spectrum") artifacts = run_edge_spectrum(ex);
  else if (command == "spectral-flow") artifacts = run_spectral_flow(ex);
  else if (command == "verify") artifacts = run_verify(ex);
  else if (command == "effective-index") artifacts = run_effective_index(ex);
  else if (command == "conductivity") artifacts = run_conductivity(ex);
  else if (command == "crossing-diagnostic") artifacts = run_crossing(ex);
  else throw ConfigError("unknown command: " + command);

  emit(artifacts);
  json outputs = json::object();
  for (const auto& [name, content] : artifacts) outputs[name] = content;
  json record{{"config_hash", key},
              {"command", command},
              {"timestamp_unix", (long long)std::time(nullptr)},
              {"tool_version", kToolVersion},
              {"outputs", outputs}};
  write_text_file(record_path.string(), record.dump(2));
  for (const auto& [name, content] : artifacts) std::cout << "wrote " << (outdir / name).string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bulk and edge topology toolkit"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  Cli cli;
  app.add_option("--config", cli.config_path, "experiment config (JSON)")->required();
  app.add_option("--out", cli.out_dir, "output directory");
  app.add_flag("--force", cli.force, "recompute even on a cache hit");
  app.add_option("--threads", cli.threads, "cap worker threads (0 = default)");

  // strip and box flags override the config sections
  std::optional<int> width, zeta_nodes, margin;
  std::optional<double> window, loc_threshold, ell;
  std::optional<std::pair<int, int>> box;
  for (const char* name : {"bands", "chern", "edge-spectrum", "spectral-flow", "verify",
                           "effective-index", "conductivity", "crossing-diagnostic"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--width", width, "strip half-width");
    sub->add_option("--zeta-nodes", zeta_nodes, "initial Floquet nodes");
    sub->add_option("--window", window, "energy window half-width");
    sub->add_option("--loc-threshold", loc_threshold, "localization filter threshold");
    sub->add_option("--margin", margin, "box trace margin");
    sub->add_option("--ell", ell, "switch ramp half-width");
    sub->add_option("--box", box, "box sizes L1 L2");
  }

  CLI11_PARSE(app, argc, argv);
  if (cli.threads > 0) set_max_threads(cli.threads);

  try {
    // flag overrides are applied to the parsed config, so they take part in
    // the cache key like any other config field
    json doc = json::parse(read_text_file(cli.config_path), nullptr, true, true);
    if (width) doc["strip"]["width"] = *width;
    if (zeta_nodes) doc["strip"]["zeta_nodes"] = *zeta_nodes;
    if (window) doc["strip"]["window"] = *window;
    if (loc_threshold) doc["strip"]["loc_threshold"] = *loc_threshold;
    if (margin) doc["box"]["margin"] = *margin;
    if (ell) doc["box"]["ell"] = *ell;
    if (box) {
      doc["box"]["L1"] = box->first;
      doc["box"]["L2"] = box->second;
    }
    return run_command(app.get_subcommands().front()->get_name(), cli, std::move(doc));
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
