#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "kmodels/clustering.hpp"
#include "kmodels/series.hpp"

namespace kmodels {

struct ClusterDesign {
    std::vector<double> phi;
    std::vector<double> theta;
    std::size_t count = 25;
    std::size_t length = 1000;

    friend bool operator==(const ClusterDesign&, const ClusterDesign&) = default;
};

/// A synthetic ground-truth corpus: one generating process per cluster.
struct GroundTruthSpec {
    std::string name;
    std::vector<ClusterDesign> clusters;
    std::uint64_t seed = 0;

    friend bool operator==(const GroundTruthSpec&, const GroundTruthSpec&) = default;
};

/// Simulation designs used by the experiments (AR(2) and ARMA(1,1) families).
std::vector<GroundTruthSpec> builtin_specs();

/// Look up a builtin spec by name. Throws InvalidArgument if unknown.
GroundTruthSpec lookup_spec(const std::string& name);

struct LabeledDataset {
    Dataset data;
    std::map<std::string, int> labels;  ///< id -> generating cluster
};

/**
 * Simulate every series of a spec. Series j of cluster c is named "c<c>_s<j>" and uses
 * seed mix_seed(spec.seed, running index), so a spec and seed fully determine the data.
 */
LabeledDataset generate(const GroundTruthSpec& spec);

using Partition = std::map<std::string, int>;  ///< id -> cell label

struct SimilarityScore {
    double value = 0.0;
    std::string reference;
    std::string candidate;
};

/**
 * Average over reference cells of the best Dice overlap 2|A_i n B_j| / (|A_i| + |B_j|)
 * with any candidate cell. Not symmetric. Candidate entries labeled kUnassigned are
 * treated as an extra cell. Throws InvalidArgument if the id sets differ.
 */
SimilarityScore similarity(const Partition& reference, const Partition& candidate,
                           std::string reference_name = "reference", std::string candidate_name = "candidate");

struct VanishingRow {
    std::size_t k = 0;
    double mean_live = 0.0;
    std::size_t succeeded = 0;
    std::size_t failed = 0;
    std::vector<std::size_t> live_counts;
};

struct VanishingConfig {
    std::vector<std::size_t> k_values{2, 3, 4, 5, 7, 10};
    InitKind init = InitKind::Prototype;
    FamilyKind family = FamilyKind::AR_L1;
    std::size_t p = 2;
    std::size_t q = 0;
    std::size_t replications = 100;
    std::size_t max_iters = 100;
};

/**
 * For each k, run the clustering `replications` times on fresh data (spec seed + rep)
 * with fresh init seeds and the Drop policy, and average the number of live clusters.
 * A failed replication is counted in `failed` and excluded from the mean.
 */
std::vector<VanishingRow> vanishing_study(const GroundTruthSpec& spec, const VanishingConfig& config);

struct CalibrationConfig {
    std::size_t n = 10;
    std::size_t length = 2000;
    std::size_t lags = 15;
    std::size_t replications = 2000;
    double phi = 0.5;
    double alpha = 0.05;
    std::uint64_t seed = 1;
};

struct StatSummary {
    double mean = 0.0;
    double variance = 0.0;
    double q05 = 0.0;
    double q50 = 0.0;
    double q95 = 0.0;
    double rejection_rate = 0.0;
};

struct CalibrationResult {
    std::size_t df = 0;
    StatSummary q_r;
    StatSummary q_pacf;
    std::vector<double> q_r_values;
    std::vector<double> q_pacf_values;
};

/// Monte-Carlo distribution of the grouped statistics for n correctly specified AR(1) series.
CalibrationResult calibration_study(const CalibrationConfig& config);

}  // namespace kmodels
