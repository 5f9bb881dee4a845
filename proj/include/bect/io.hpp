#pragma once

#include <string>

#include "bect/bands.hpp"
#include "bect/conductivity.hpp"
#include "bect/edge.hpp"
#include "bect/effective.hpp"
#include "bect/topology.hpp"

namespace bect {

// CSV emitters (fixed column layouts, %.17g round-trip floats).
std::string band_csv(const BandStructure& b);
std::string curvature_csv(const CurvatureField& c);
std::string floquet_csv(const FloquetSpectrum& fs);
std::string convergence_csv(const ConvergenceTable& t);

// JSON emitters.
std::string gap_json(const GapReport& r);
std::string chern_json(const ChernResult& r);
std::string flow_json(const SpectralFlowResult& r);
std::string bec_json(const BecReport& r);
std::string concatenation_json(const ConcatenationReport& r);
std::string effective_json(const EffectiveIndexResult& r);
std::string conductivity_json(const ConductivityResult& r);
std::string crossing_json(const CrossingDiagnostic& d);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

/// FNV-1a of the canonical content, hex string; used for the result cache.
std::string content_hash(const std::string& content);

}  // namespace bect
