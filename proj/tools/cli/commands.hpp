#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "cli/manifest.hpp"
#include "kmodels/diagnostics.hpp"
#include "kmodels/evaluation.hpp"

namespace kmodels::cli {

inline constexpr int kSchemaVersion = 1;

using Json = nlohmann::ordered_json;

/// Ingest, preprocess, cluster (best of restarts) and diagnose. Pure apart from reading the input.
Json cluster_document(const RunManifest& manifest);

/// Same, on an already ingested dataset.
Json cluster_document(const RunManifest& manifest, const Ingested& raw);

/// Rebuild the clustering of a result document and recompute its diagnostics.
Json diagnose_document(const Json& result, std::size_t lags, double flag_threshold);

Json report_json(const DiagnosticsReport& report);

Json vanish_document(const GroundTruthSpec& spec, const VanishingConfig& config);
Json calibration_document(const CalibrationConfig& config);

/// scatter: "id,phi1..,theta1..,cluster" from a cluster result. hist: "replication,Q_r,Q_pacf" from a calibration result.
void export_plotdata(const Json& document, const std::string& kind, std::ostream& out);

/// Write text to a file, or to stdout when path is empty or "-".
void write_text(const std::string& path, const std::string& text);

Json read_json_file(const std::string& path);

}  // namespace kmodels::cli
