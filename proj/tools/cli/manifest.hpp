#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "cli/csv_io.hpp"
#include "kmodels/clustering.hpp"

namespace kmodels::cli {

struct Preprocessing {
    std::size_t rolling = 1;  ///< moving-average window, 1 = off
    bool log = false;
    std::size_t d = 0;
    bool center = false;
};

/// Everything that determines a clustering run. Serializes to one JSON document.
struct RunManifest {
    std::string input;
    CsvFormat format = CsvFormat::Wide;
    std::optional<std::string> labels;  ///< label column name
    Preprocessing preprocessing;
    std::size_t p = 1;
    std::size_t q = 0;
    std::string loss = "l2";       ///< l1 | l2 (ARMA families require l2)
    std::size_t k = 2;
    std::string init = "prototype";  ///< prototype | partition
    std::size_t restarts = 1;
    std::uint64_t seed = 0;
    std::size_t max_iters = 100;
    std::string vanish = "drop";  ///< drop | reassign
    std::size_t lags = 20;
    double flag_threshold = 0.01;
    std::string output;

    /// Throws InvalidArgument on inconsistent settings.
    void validate() const;

    /// Family for the already-preprocessed data (d is applied by preprocess, so family.d = 0).
    [[nodiscard]] ModelFamily family() const;
    [[nodiscard]] KModelsConfig config() const;
};

nlohmann::ordered_json to_json(const RunManifest& m);
/// Missing keys keep their defaults; unknown keys are an error.
RunManifest manifest_from_json(const nlohmann::json& j);
RunManifest load_manifest(const std::string& path);

/// rolling mean, then log, then differencing, then centering.
Dataset preprocess(const Dataset& raw, const Preprocessing& steps);

}  // namespace kmodels::cli
