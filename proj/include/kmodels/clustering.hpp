#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "kmodels/ar_fit.hpp"
#include "kmodels/arma_fit.hpp"
#include "kmodels/series.hpp"

namespace kmodels {

enum class FamilyKind { AR_L2, AR_L1, ARMA_CSS };

using ClusterModel = std::variant<ArModel, ArmaModel>;

/**
 * @brief A model class together with the loss used for both fitting and assignment.
 *
 * fit() minimizes the cluster sum of loss(); routing both through this type is what
 * keeps every family under the monotone-loss guarantee of the K-Models iteration.
 */
struct ModelFamily {
    FamilyKind kind = FamilyKind::AR_L2;
    std::size_t p = 1;
    std::size_t q = 0;
    std::size_t d = 0;  ///< differencing applied once to every series before clustering
    ArmaFitConfig arma{.warn_non_invertible = false};
    LadOptions lad{};

    static ModelFamily ar_l2(std::size_t p, std::size_t d = 0);
    static ModelFamily ar_l1(std::size_t p, std::size_t d = 0);
    static ModelFamily arma_css(std::size_t p, std::size_t q, std::size_t d = 0);

    /// Number of MA coefficients the family estimates (0 for AR families).
    [[nodiscard]] std::size_t ma_order() const noexcept { return kind == FamilyKind::ARMA_CSS ? q : 0; }

    /// Smallest (already differenced) series length the family can fit as a singleton.
    [[nodiscard]] std::size_t min_length() const noexcept;

    /// Throws InvalidArgument for unusable orders.
    void validate() const;

    [[nodiscard]] double loss(const TimeSeries& series, const ClusterModel& model) const;

    /// Fit to a cluster. `warm`, when given, is used as a starting point where the family supports one.
    [[nodiscard]] ClusterModel fit(const Dataset& cluster, const std::optional<ClusterModel>& warm = std::nullopt) const;

    /// Difference every series d times (identity when d == 0).
    [[nodiscard]] Dataset prepare(const Dataset& raw) const;
};

std::vector<double> model_phi(const ClusterModel& m);
std::vector<double> model_theta(const ClusterModel& m);

enum class InitKind { Prototype, RandomPartition };

struct InitMethod {
    InitKind kind = InitKind::Prototype;
    std::uint64_t seed = 0;
};

enum class VanishPolicy { Drop, ReassignFarthest };

struct KModelsConfig {
    std::size_t k = 2;
    std::size_t max_iters = 100;
    std::size_t restarts = 1;
    InitMethod init{};
    ModelFamily family{};
    VanishPolicy vanish_policy = VanishPolicy::Drop;
};

/// Marker for a series not (yet) owned by a live cluster.
inline constexpr int kUnassigned = -1;

struct Clustering {
    std::vector<std::string> ids;              ///< dataset order
    std::vector<int> assignments;              ///< cluster index per series, or kUnassigned
    std::vector<std::optional<ClusterModel>> models;  ///< one slot per cluster; empty when vanished
    std::vector<double> loss_trace;            ///< global loss E(C, M) after each update step
    double final_loss = 0.0;                   ///< E(C, M) of the returned state
    std::size_t n_iterations = 0;
    std::vector<std::size_t> vanished;         ///< cluster indices, ascending
    bool converged = false;
    std::uint64_t seed = 0;                    ///< initialization seed that produced this result

    [[nodiscard]] std::size_t k() const noexcept { return models.size(); }
    [[nodiscard]] std::size_t live_clusters() const noexcept { return models.size() - vanished.size(); }
    [[nodiscard]] bool is_vanished(std::size_t c) const;
    /// Members of cluster c in dataset order.
    [[nodiscard]] std::vector<std::size_t> members(std::size_t c) const;
    /// id -> cluster index.
    [[nodiscard]] std::map<std::string, int> partition() const;
};

/**
 * Prototype: k distinct series drawn without replacement, each fitted alone; only the
 * prototypes carry an assignment. RandomPartition: uniform labels, redrawn until every
 * cluster is non-empty, then one fit per cluster. A fit that fails here vanishes its cluster.
 */
Clustering initialize(const Dataset& dataset, const KModelsConfig& config);

/// Assignment step: each series goes to the live model with the smallest loss, ties to the lower index.
std::vector<int> assign(const Dataset& dataset, const std::vector<std::optional<ClusterModel>>& models,
                        const ModelFamily& family);

/// Full alternating loop from initialize() until a fixed point, a stalled loss, or max_iters.
Clustering run(const Dataset& dataset, const KModelsConfig& config);

/// `config.restarts` runs with seeds init.seed, init.seed + 1, ...; the lowest final loss wins, ties to the earliest.
Clustering best_of(const Dataset& dataset, const KModelsConfig& config);

/// Global loss of an assignment under the given models (orphans are ignored).
double global_loss(const Dataset& prepared, const Clustering& clustering, const ModelFamily& family);

}  // namespace kmodels
