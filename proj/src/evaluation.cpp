#include "kmodels/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "kmodels/diagnostics.hpp"
#include "kmodels/errors.hpp"
#include "kmodels/rng.hpp"

namespace kmodels {
namespace {

GroundTruthSpec ar2_spec(std::string name, std::vector<std::pair<double, double>> params, std::size_t length) {
    GroundTruthSpec spec{std::move(name), {}, 0};
    for (auto [a, b] : params) spec.clusters.push_back(ClusterDesign{{a, b}, {}, 25, length});
    return spec;
}

GroundTruthSpec arma11_spec(std::string name, std::vector<std::pair<double, double>> params, std::size_t length) {
    GroundTruthSpec spec{std::move(name), {}, 0};
    for (auto [phi, theta] : params) spec.clusters.push_back(ClusterDesign{{phi}, {theta}, 25, length});
    return spec;
}

StatSummary summarize(std::vector<double> values, std::size_t df, double alpha) {
    StatSummary s;
    const double n = static_cast<double>(values.size());
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double ss = 0.0;
    std::size_t rejected = 0;
    for (double v : values) {
        ss += (v - s.mean) * (v - s.mean);
        if (chi2_sf(v, df) < alpha) ++rejected;
    }
    s.variance = values.size() > 1 ? ss / (n - 1.0) : 0.0;
    s.rejection_rate = static_cast<double>(rejected) / n;
    std::sort(values.begin(), values.end());
    auto quantile = [&](double prob) {
        const auto idx = static_cast<std::size_t>(std::ceil(prob * n));
        return values[std::clamp<std::size_t>(idx, 1, values.size()) - 1];
    };
    s.q05 = quantile(0.05);
    s.q50 = quantile(0.50);
    s.q95 = quantile(0.95);
    return s;
}

}  // namespace

std::vector<GroundTruthSpec> builtin_specs() {
    std::vector<GroundTruthSpec> specs;
    specs.push_back(ar2_spec("2-AR(2)", {{0.7, 0.25}, {-0.3, 0.2}}, 100));
    specs.push_back(ar2_spec("4-AR(2)", {{0.7, 0.2}, {-0.3, 0.2}, {0.4, -0.2}, {-0.2, -0.5}}, 1000));
    specs.push_back(ar2_spec("10-AR(2)",
                             {{-0.097, -0.945},
                              {-0.215, -0.463},
                              {0.419, 0.206},
                              {-0.237, 0.135},
                              {0.273, 0.640},
                              {0.403, -0.497},
                              {0.281, 0.500},
                              {0.144, 0.824},
                              {0.105, -0.550},
                              {0.861, -0.520}},
                             1000));
    specs.push_back(arma11_spec("2-ARMA(1,1)", {{-0.4, 0.2}, {-0.2, 0.4}}, 1000));
    specs.push_back(arma11_spec("4-ARMA(1,1)", {{-0.4, 0.2}, {-0.2, 0.4}, {0.2, 0.4}, {-0.2, -0.4}}, 1000));
    specs.push_back(arma11_spec("ARMA(1,1)-pair", {{-0.4, -0.2}, {0.4, 0.4}}, 200));
    auto outlier = arma11_spec("ARMA(1,1)-outlier", {{-0.4, -0.2}, {0.4, 0.4}}, 200);
    outlier.clusters.push_back(ClusterDesign{{0.2}, {-0.2}, 1, 200});
    specs.push_back(std::move(outlier));
    return specs;
}

GroundTruthSpec lookup_spec(const std::string& name) {
    for (auto& s : builtin_specs()) {
        if (s.name == name) return s;
    }
    std::string known;
    for (const auto& s : builtin_specs()) known += (known.empty() ? "" : ", ") + s.name;
    throw InvalidArgument("unknown spec '" + name + "' (known: " + known + ")");
}

LabeledDataset generate(const GroundTruthSpec& spec) {
    std::vector<TimeSeries> series;
    std::map<std::string, int> labels;
    std::uint64_t stream = 0;
    for (std::size_t c = 0; c < spec.clusters.size(); ++c) {
        const auto& design = spec.clusters[c];
        if (design.count == 0) throw InvalidArgument("cluster design with zero series");
        for (std::size_t j = 0; j < design.count; ++j) {
            std::string id = "c" + std::to_string(c) + "_s" + std::to_string(j);
            labels.emplace(id, static_cast<int>(c));
            series.push_back(simulate_arma(design.phi, design.theta, design.length, mix_seed(spec.seed, stream++), 1.0,
                                           std::move(id)));
        }
    }
    return LabeledDataset{Dataset(std::move(series)), std::move(labels)};
}

SimilarityScore similarity(const Partition& reference, const Partition& candidate, std::string reference_name,
                           std::string candidate_name) {
    if (reference.size() != candidate.size()) throw InvalidArgument("partitions cover different id sets");
    for (const auto& [id, _] : reference) {
        if (!candidate.contains(id)) throw InvalidArgument("id '" + id + "' missing from candidate partition");
    }
    if (reference.empty()) throw InvalidArgument("partitions are empty");

    std::map<int, std::set<std::string>> ref_cells;
    std::map<int, std::set<std::string>> cand_cells;
    for (const auto& [id, label] : reference) ref_cells[label].insert(id);
    for (const auto& [id, label] : candidate) cand_cells[label].insert(id);

    double total = 0.0;
    for (const auto& [_, a] : ref_cells) {
        double best = 0.0;
        for (const auto& [__, b] : cand_cells) {
            std::size_t overlap = 0;
            for (const auto& id : a) overlap += b.count(id);
            best = std::max(best, 2.0 * static_cast<double>(overlap) / static_cast<double>(a.size() + b.size()));
        }
        total += best;
    }
    return SimilarityScore{total / static_cast<double>(ref_cells.size()), std::move(reference_name),
                           std::move(candidate_name)};
}

std::vector<VanishingRow> vanishing_study(const GroundTruthSpec& spec, const VanishingConfig& config) {
    if (config.replications == 0) throw InvalidArgument("replications must be positive");
    ModelFamily family;
    switch (config.family) {
        case FamilyKind::AR_L2: family = ModelFamily::ar_l2(config.p); break;
        case FamilyKind::AR_L1: family = ModelFamily::ar_l1(config.p); break;
        case FamilyKind::ARMA_CSS: family = ModelFamily::arma_css(config.p, config.q); break;
    }

    std::vector<LabeledDataset> datasets;
    datasets.reserve(config.replications);
    for (std::size_t r = 0; r < config.replications; ++r) {
        GroundTruthSpec s = spec;
        s.seed = spec.seed + r;
        datasets.push_back(generate(s));
    }

    std::vector<VanishingRow> rows;
    for (std::size_t k : config.k_values) {
        VanishingRow row;
        row.k = k;
        for (std::size_t r = 0; r < config.replications; ++r) {
            KModelsConfig cfg;
            cfg.k = k;
            cfg.max_iters = config.max_iters;
            cfg.init = InitMethod{config.init, mix_seed(spec.seed + r, k)};
            cfg.family = family;
            cfg.vanish_policy = VanishPolicy::Drop;
            try {
                const Clustering c = run(datasets[r].data, cfg);
                row.live_counts.push_back(c.live_clusters());
                ++row.succeeded;
            } catch (const std::exception&) {
                ++row.failed;
            }
        }
        if (row.succeeded > 0) {
            row.mean_live = static_cast<double>(std::accumulate(row.live_counts.begin(), row.live_counts.end(),
                                                                std::size_t{0})) /
                            static_cast<double>(row.succeeded);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

CalibrationResult calibration_study(const CalibrationConfig& config) {
    if (config.n == 0 || config.replications == 0) throw InvalidArgument("n and replications must be positive");
    if (config.lags + 1 >= config.length) throw InvalidArgument("lags must be below the residual length");
    const std::size_t p = 1;
    const std::size_t df = config.n * config.lags - p;
    if (config.n * config.lags <= p) throw InvalidArgument("n*m must exceed the model order");

    CalibrationResult out;
    out.df = df;
    out.q_r_values.reserve(config.replications);
    out.q_pacf_values.reserve(config.replications);
    const std::vector<double> phi{config.phi};
    for (std::size_t rep = 0; rep < config.replications; ++rep) {
        std::vector<TimeSeries> series;
        series.reserve(config.n);
        for (std::size_t i = 0; i < config.n; ++i) {
            series.push_back(simulate_arma(phi, {}, config.length, mix_seed(config.seed, rep * config.n + i), 1.0,
                                           "s" + std::to_string(i)));
        }
        const Dataset data(std::move(series));
        const ArModel model = fit_ar(data, p, LossKind::L2);
        std::vector<ResidualStats> stats;
        stats.reserve(config.n);
        for (const auto& s : data) stats.push_back(residual_stats(s.id(), ar_residuals(s, model), config.lags));
        out.q_r_values.push_back(q_group(stats, p, 0, false).statistic);
        out.q_pacf_values.push_back(q_group(stats, p, 0, true).statistic);
    }
    out.q_r = summarize(out.q_r_values, df, config.alpha);
    out.q_pacf = summarize(out.q_pacf_values, df, config.alpha);
    return out;
}

}  // namespace kmodels
