#include "kmodels/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "kmodels/errors.hpp"
#include "kmodels/log.hpp"
#include "kmodels/rng.hpp"

namespace kmodels {

// ---------------------------------------------------------------------------
// ModelFamily

ModelFamily ModelFamily::ar_l2(std::size_t p, std::size_t d) {
    ModelFamily f;
    f.kind = FamilyKind::AR_L2;
    f.p = p;
    f.q = 0;
    f.d = d;
    return f;
}

ModelFamily ModelFamily::ar_l1(std::size_t p, std::size_t d) {
    ModelFamily f = ar_l2(p, d);
    f.kind = FamilyKind::AR_L1;
    return f;
}

ModelFamily ModelFamily::arma_css(std::size_t p, std::size_t q, std::size_t d) {
    ModelFamily f;
    f.kind = FamilyKind::ARMA_CSS;
    f.p = p;
    f.q = q;
    f.d = d;
    return f;
}

std::size_t ModelFamily::min_length() const noexcept {
    if (kind == FamilyKind::ARMA_CSS) return 2 * std::max(p, q) + 1;
    return 2 * p;
}

void ModelFamily::validate() const {
    if (kind == FamilyKind::ARMA_CSS) {
        if (p + q == 0) throw InvalidArgument("ARMA family needs p + q >= 1");
    } else if (p == 0) {
        throw InvalidArgument("AR family needs p >= 1");
    }
}

double ModelFamily::loss(const TimeSeries& series, const ClusterModel& model) const {
    switch (kind) {
        case FamilyKind::AR_L2: return ar_loss(series, std::get<ArModel>(model), LossKind::L2);
        case FamilyKind::AR_L1: return ar_loss(series, std::get<ArModel>(model), LossKind::L1);
        case FamilyKind::ARMA_CSS: return arma_loss(series, std::get<ArmaModel>(model));
    }
    return std::numeric_limits<double>::infinity();
}

ClusterModel ModelFamily::fit(const Dataset& cluster, const std::optional<ClusterModel>& warm) const {
    switch (kind) {
        case FamilyKind::AR_L2: return fit_ar(cluster, p, LossKind::L2);
        case FamilyKind::AR_L1: {
            std::optional<ArModel> start;
            if (warm) start = std::get<ArModel>(*warm);
            return fit_ar(cluster, p, LossKind::L1, start, lad);
        }
        case FamilyKind::ARMA_CSS: {
            std::optional<ArmaModel> start;
            if (warm) start = std::get<ArmaModel>(*warm);
            return fit_arma(cluster, p, q, arma, start);
        }
    }
    throw InvalidArgument("unknown model family");
}

Dataset ModelFamily::prepare(const Dataset& raw) const {
    if (d == 0) return raw;
    return map_series(raw, [this](const TimeSeries& s) { return difference(s, d); });
}

std::vector<double> model_phi(const ClusterModel& m) {
    return std::visit([](const auto& x) { return x.phi; }, m);
}

std::vector<double> model_theta(const ClusterModel& m) {
    if (const auto* arma = std::get_if<ArmaModel>(&m)) return arma->theta;
    return {};
}

// ---------------------------------------------------------------------------
// Clustering

bool Clustering::is_vanished(std::size_t c) const {
    return std::binary_search(vanished.begin(), vanished.end(), c);
}

std::vector<std::size_t> Clustering::members(std::size_t c) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignments.size(); ++i) {
        if (assignments[i] == static_cast<int>(c)) out.push_back(i);
    }
    return out;
}

std::map<std::string, int> Clustering::partition() const {
    std::map<std::string, int> out;
    for (std::size_t i = 0; i < ids.size(); ++i) out.emplace(ids[i], assignments[i]);
    return out;
}

double global_loss(const Dataset& prepared, const Clustering& clustering, const ModelFamily& family) {
    double total = 0.0;
    for (std::size_t i = 0; i < prepared.size(); ++i) {
        const int c = clustering.assignments[i];
        if (c == kUnassigned) continue;
        total += family.loss(prepared[i], *clustering.models[static_cast<std::size_t>(c)]);
    }
    return total;
}

namespace {

void check_config(const Dataset& prepared, const KModelsConfig& config) {
    config.family.validate();
    if (config.k == 0) throw InvalidArgument("k must be positive");
    if (config.k > prepared.size()) {
        throw InvalidArgument("k = " + std::to_string(config.k) + " exceeds the number of series (" +
                              std::to_string(prepared.size()) + ")");
    }
    if (config.max_iters == 0) throw InvalidArgument("max_iters must be positive");
    const std::size_t need = config.family.min_length();
    for (const auto& s : prepared) {
        if (s.size() < need) {
            throw TooShortSeries("series '" + s.id() + "' has length " + std::to_string(s.size()) +
                                     " after differencing, the model family needs " + std::to_string(need),
                                 s.id());
        }
    }
}

void mark_vanished(Clustering& c, std::size_t cluster) {
    c.models[cluster].reset();
    auto it = std::lower_bound(c.vanished.begin(), c.vanished.end(), cluster);
    if (it == c.vanished.end() || *it != cluster) c.vanished.insert(it, cluster);
}

std::optional<ClusterModel> try_fit(const ModelFamily& family, const Dataset& cluster,
                                    const std::optional<ClusterModel>& warm) {
    try {
        return family.fit(cluster, warm);
    } catch (const DegenerateFit&) {
    } catch (const NumericalDivergence&) {
    } catch (const TooShortSeries&) {
    }
    return std::nullopt;
}

double cluster_loss(const ModelFamily& family, const Dataset& cluster, const ClusterModel& model) {
    double total = 0.0;
    for (const auto& s : cluster) total += family.loss(s, model);
    return total;
}

Clustering initialize_prepared(const Dataset& prepared, const KModelsConfig& config) {
    check_config(prepared, config);
    const std::size_t n = prepared.size();
    const std::size_t k = config.k;

    Clustering c;
    c.seed = config.init.seed;
    c.ids.reserve(n);
    for (const auto& s : prepared) c.ids.push_back(s.id());
    c.assignments.assign(n, kUnassigned);
    c.models.resize(k);

    Rng rng(config.init.seed);
    if (config.init.kind == InitKind::Prototype) {
        // partial Fisher-Yates: the first k entries become the prototypes
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        for (std::size_t i = 0; i < k; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
            std::swap(order[i], order[j]);
        }
        for (std::size_t cl = 0; cl < k; ++cl) {
            const std::size_t idx[] = {order[cl]};
            c.models[cl] = try_fit(config.family, prepared.subset(idx), std::nullopt);
            if (c.models[cl]) {
                c.assignments[order[cl]] = static_cast<int>(cl);
            } else {
                mark_vanished(c, cl);
            }
        }
    } else {
        std::vector<std::size_t> counts;
        do {
            counts.assign(k, 0);
            for (std::size_t i = 0; i < n; ++i) {
                const auto label = static_cast<std::size_t>(rng.below(k));
                c.assignments[i] = static_cast<int>(label);
                ++counts[label];
            }
        } while (std::find(counts.begin(), counts.end(), std::size_t{0}) != counts.end());

        for (std::size_t cl = 0; cl < k; ++cl) {
            const auto members = c.members(cl);
            c.models[cl] = try_fit(config.family, prepared.subset(members), std::nullopt);
            if (!c.models[cl]) {
                mark_vanished(c, cl);
                for (auto i : members) c.assignments[i] = kUnassigned;
            }
        }
    }
    if (c.live_clusters() == 0) throw ClusteringFailure("no cluster model could be fitted at initialization");
    return c;
}

struct AssignResult {
    std::vector<int> labels;
    std::vector<double> losses;
};

AssignResult assign_prepared(const Dataset& prepared, const std::vector<std::optional<ClusterModel>>& models,
                             const ModelFamily& family) {
    const bool any_live = std::any_of(models.begin(), models.end(), [](const auto& m) { return m.has_value(); });
    if (!any_live) throw InvalidArgument("assignment needs at least one live model");

    AssignResult out{std::vector<int>(prepared.size(), kUnassigned),
                     std::vector<double>(prepared.size(), std::numeric_limits<double>::infinity())};
    for (std::size_t i = 0; i < prepared.size(); ++i) {
        for (std::size_t cl = 0; cl < models.size(); ++cl) {
            if (!models[cl]) continue;
            double loss = std::numeric_limits<double>::infinity();
            try {
                loss = family.loss(prepared[i], *models[cl]);
            } catch (const std::exception&) {
            }
            if (!std::isfinite(loss)) continue;
            if (loss < out.losses[i]) {
                out.losses[i] = loss;
                out.labels[i] = static_cast<int>(cl);
            }
        }
        if (out.labels[i] == kUnassigned) {
            throw AssignmentError("series '" + prepared[i].id() + "' has no finite loss under any live model");
        }
    }
    return out;
}

}  // namespace

Clustering initialize(const Dataset& dataset, const KModelsConfig& config) {
    return initialize_prepared(config.family.prepare(dataset), config);
}

std::vector<int> assign(const Dataset& dataset, const std::vector<std::optional<ClusterModel>>& models,
                        const ModelFamily& family) {
    return assign_prepared(family.prepare(dataset), models, family).labels;
}

Clustering run(const Dataset& dataset, const KModelsConfig& config) {
    const Dataset prepared = config.family.prepare(dataset);
    const ModelFamily& family = config.family;
    Clustering c = initialize_prepared(prepared, config);
    const std::size_t k = c.k();

    // Previous model per cluster, used to warm-start and safeguard the update.
    std::vector<std::optional<ClusterModel>> previous = c.models;
    double prev_loss = std::numeric_limits<double>::infinity();

    for (std::size_t iter = 0; iter < config.max_iters; ++iter) {
        AssignResult step = assign_prepared(prepared, c.models, family);

        std::vector<std::size_t> counts(k, 0);
        for (int label : step.labels) ++counts[static_cast<std::size_t>(label)];

        bool reassigned = false;
        for (std::size_t cl = 0; cl < k; ++cl) {
            if (!c.models[cl] || counts[cl] > 0) continue;
            if (config.vanish_policy == VanishPolicy::ReassignFarthest) {
                // worst-fitting series whose cluster can spare it
                std::size_t worst = prepared.size();
                for (std::size_t i = 0; i < prepared.size(); ++i) {
                    if (counts[static_cast<std::size_t>(step.labels[i])] < 2) continue;
                    if (worst == prepared.size() || step.losses[i] > step.losses[worst]) worst = i;
                }
                if (worst != prepared.size()) {
                    --counts[static_cast<std::size_t>(step.labels[worst])];
                    previous[cl] = c.models[static_cast<std::size_t>(step.labels[worst])];
                    step.labels[worst] = static_cast<int>(cl);
                    counts[cl] = 1;
                    reassigned = true;
                    continue;
                }
            }
            mark_vanished(c, cl);
            previous[cl].reset();
        }

        const bool fixed_point = !reassigned && step.labels == c.assignments;
        c.assignments = std::move(step.labels);
        if (fixed_point) {
            c.converged = true;
            break;
        }
        c.n_iterations = iter + 1;

        // Update step. A refit that is worse on the new cluster than the model it replaces,
        // or that fails outright, keeps the old model; this preserves the monotone loss.
        for (std::size_t cl = 0; cl < k; ++cl) {
            if (!c.models[cl] && !previous[cl]) continue;
            const Dataset members = prepared.subset(c.members(cl));
            std::optional<ClusterModel> fitted = try_fit(family, members, previous[cl]);
            if (previous[cl]) {
                const double old_loss = cluster_loss(family, members, *previous[cl]);
                if (!fitted) {
                    warn("refit of cluster " + std::to_string(cl) + " failed; keeping its previous model");
                    fitted = previous[cl];
                } else if (cluster_loss(family, members, *fitted) > old_loss) {
                    fitted = previous[cl];
                }
            }
            if (!fitted) throw ClusteringFailure("cluster " + std::to_string(cl) + " could not be fitted");
            c.models[cl] = std::move(fitted);
            previous[cl] = c.models[cl];
        }

        const double loss = global_loss(prepared, c, family);
        c.loss_trace.push_back(loss);
        if (std::isfinite(prev_loss) && prev_loss - loss <= 1e-9 * prev_loss) {
            c.converged = true;
            break;
        }
        prev_loss = loss;
    }

    if (c.live_clusters() == 0) throw ClusteringFailure("every cluster vanished");
    c.final_loss = global_loss(prepared, c, family);
    return c;
}

Clustering best_of(const Dataset& dataset, const KModelsConfig& config) {
    if (config.restarts == 0) throw InvalidArgument("restarts must be at least 1");
    std::optional<Clustering> best;
    std::string last_error;
    for (std::size_t r = 0; r < config.restarts; ++r) {
        KModelsConfig cfg = config;
        cfg.init.seed = config.init.seed + r;
        try {
            Clustering c = run(dataset, cfg);
            if (!best || c.final_loss < best->final_loss) best = std::move(c);
        } catch (const ClusteringFailure& e) {
            last_error = e.what();
        } catch (const AssignmentError& e) {
            last_error = e.what();
        }
    }
    if (!best) throw ClusteringFailure("every restart failed: " + last_error);
    return *best;
}

}  // namespace kmodels
