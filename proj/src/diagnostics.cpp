#include "kmodels/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/special_functions/gamma.hpp>

#include "kmodels/errors.hpp"

namespace kmodels {

const char* to_string(PortmanteauKind kind) {
    switch (kind) {
        case PortmanteauKind::LB: return "LB";
        case PortmanteauKind::GroupR: return "GroupR";
        case PortmanteauKind::GroupPacf: return "GroupPacf";
        case PortmanteauKind::TotalR: return "TotalR";
        case PortmanteauKind::TotalPacf: return "TotalPacf";
    }
    return "?";
}

double chi2_sf(double x, std::size_t df) {
    if (df == 0) throw InvalidArgument("chi-squared df must be positive");
    if (!(x >= 0.0)) throw InvalidArgument("chi-squared argument must be non-negative");
    if (x == 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    return boost::math::gamma_q(0.5 * static_cast<double>(df), 0.5 * x);
}

std::vector<double> residual_acf(std::span<const double> a, std::size_t m) {
    const std::size_t T = a.size();
    if (m == 0 || m >= T) {
        throw InvalidArgument("lag count m=" + std::to_string(m) + " must satisfy 0 < m < T=" + std::to_string(T));
    }
    double denom = 0.0;
    for (double v : a) denom += v * v;
    if (denom == 0.0) throw UndefinedAcf("residuals are identically zero");

    std::vector<double> r(m);
    for (std::size_t l = 1; l <= m; ++l) {
        double num = 0.0;
        for (std::size_t t = l; t < T; ++t) num += a[t] * a[t - l];
        r[l - 1] = num / denom;
    }
    return r;
}

std::vector<double> residual_pacf(std::span<const double> acf) {
    const std::size_t m = acf.size();
    std::vector<double> pacf(m);
    std::vector<double> phi(m, 0.0);
    std::vector<double> prev(m, 0.0);
    double err = 1.0;  // innovation variance ratio of the order-(k-1) predictor
    for (std::size_t k = 1; k <= m; ++k) {
        double num = acf[k - 1];
        for (std::size_t j = 1; j < k; ++j) num -= prev[j - 1] * acf[k - j - 1];
        if (!(err > 0.0)) throw NumericallyDegenerate("Durbin-Levinson pivot vanished at lag " + std::to_string(k));
        const double kk = num / err;
        if (!std::isfinite(kk) || std::abs(kk) >= 1.0 + 1e-9) {
            throw NumericallyDegenerate("Durbin-Levinson unit pivot at lag " + std::to_string(k));
        }
        for (std::size_t j = 1; j < k; ++j) phi[j - 1] = prev[j - 1] - kk * prev[k - j - 1];
        phi[k - 1] = kk;
        pacf[k - 1] = kk;
        err *= (1.0 - kk * kk);
        std::copy(phi.begin(), phi.begin() + static_cast<std::ptrdiff_t>(k), prev.begin());
    }
    return pacf;
}

ResidualStats residual_stats(std::string series_id, std::vector<double> residuals, std::size_t m) {
    ResidualStats s;
    s.series_id = std::move(series_id);
    s.acf = residual_acf(residuals, m);
    s.pacf = residual_pacf(s.acf);
    s.T = residuals.size();
    s.residuals = std::move(residuals);
    return s;
}

namespace {

double lb_sum(std::span<const double> r, std::size_t T) {
    const double n = static_cast<double>(T);
    double total = 0.0;
    for (std::size_t l = 1; l <= r.size(); ++l) total += r[l - 1] * r[l - 1] / (n - static_cast<double>(l));
    return n * (n + 2.0) * total;
}

PortmanteauResult finish(double statistic, std::size_t df, PortmanteauKind kind) {
    return PortmanteauResult{statistic, df, chi2_sf(statistic, df), kind};
}

PortmanteauResult grouped(std::span<const ResidualStats> stats, std::size_t p, std::size_t q, bool use_pacf,
                          bool relaxed) {
    if (stats.empty()) throw InvalidArgument("grouped statistic needs at least one series");
    const std::size_t m = stats.front().acf.size();
    const std::size_t T = stats.front().T;
    for (const auto& s : stats) {
        if (s.acf.size() != m || s.pacf.size() != m) {
            throw InvalidArgument("series '" + s.series_id + "' uses a different lag count");
        }
        if (!relaxed && s.T != T) {
            throw InvalidArgument("series '" + s.series_id + "' has residual length " + std::to_string(s.T) +
                                  ", expected " + std::to_string(T) + " (equal lengths required)");
        }
        if (m >= s.T) throw InvalidArgument("lag count must be below the residual length of '" + s.series_id + "'");
    }
    const std::size_t nm = stats.size() * m;
    if (nm <= p + q) throw InvalidArgument("n*m must exceed p + q");

    double statistic = 0.0;
    for (const auto& s : stats) statistic += lb_sum(use_pacf ? s.pacf : s.acf, s.T);
    return finish(statistic, nm - p - q, use_pacf ? PortmanteauKind::GroupPacf : PortmanteauKind::GroupR);
}

}  // namespace

PortmanteauResult ljung_box(std::span<const double> r, std::size_t T, std::size_t p, std::size_t q) {
    const std::size_t m = r.size();
    if (m <= p + q) {
        throw InvalidArgument("Ljung-Box needs m > p + q (m=" + std::to_string(m) + ", p+q=" + std::to_string(p + q) +
                              ")");
    }
    if (m >= T) throw InvalidArgument("Ljung-Box needs m < T");
    return finish(lb_sum(r, T), m - p - q, PortmanteauKind::LB);
}

PortmanteauResult q_group(std::span<const ResidualStats> stats, std::size_t p, std::size_t q, bool use_pacf) {
    return grouped(stats, p, q, use_pacf, false);
}

PortmanteauResult q_group_relaxed(std::span<const ResidualStats> stats, std::size_t p, std::size_t q,
                                  bool use_pacf) {
    return grouped(stats, p, q, use_pacf, true);
}

PortmanteauResult q_total(std::span<const ClusterStats> clusters, bool use_pacf, bool relaxed) {
    if (clusters.empty()) throw InvalidArgument("total statistic needs at least one cluster");
    double statistic = 0.0;
    std::size_t df = 0;
    std::size_t common_T = 0;
    for (std::size_t i = 0; i < clusters.size(); ++i) {
        try {
            const auto& c = clusters[i];
            if (!relaxed && !c.stats.empty()) {
                if (common_T == 0) common_T = c.stats.front().T;
                if (c.stats.front().T != common_T) throw InvalidArgument("residual length differs from other clusters");
            }
            const auto g = grouped(c.stats, c.p, c.q, use_pacf, relaxed);
            statistic += g.statistic;
            df += g.df;
        } catch (const std::exception& e) {
            throw InvalidArgument("cluster " + std::to_string(i) + ": " + e.what());
        }
    }
    return finish(statistic, df, use_pacf ? PortmanteauKind::TotalPacf : PortmanteauKind::TotalR);
}

std::vector<double> model_residuals(const TimeSeries& series, const ClusterModel& model) {
    if (const auto* ar = std::get_if<ArModel>(&model)) return ar_residuals(series, *ar);
    const auto& arma = std::get<ArmaModel>(model);
    auto eps = conditional_residuals(series, arma);
    eps.erase(eps.begin(), eps.begin() + static_cast<std::ptrdiff_t>(std::max(arma.p(), arma.q())));
    return eps;
}

DiagnosticsReport cluster_report(const Clustering& clustering, const Dataset& dataset, const ModelFamily& family,
                                 const ReportOptions& options) {
    const std::size_t p = family.p;
    const std::size_t q = family.ma_order();
    const std::size_t m = options.lags;
    if (m <= p + q) {
        throw InvalidArgument("lags m=" + std::to_string(m) + " must exceed p + q = " + std::to_string(p + q));
    }
    const Dataset prepared = family.prepare(dataset);
    if (prepared.size() != clustering.assignments.size()) {
        throw InvalidArgument("clustering does not match the dataset size");
    }

    DiagnosticsReport report;
    report.lags = m;
    report.flag_threshold = options.flag_threshold;

    std::vector<ClusterStats> per_cluster;
    std::vector<std::size_t> cluster_index;
    for (std::size_t cl = 0; cl < clustering.k(); ++cl) {
        if (!clustering.models[cl]) continue;
        const auto members = clustering.members(cl);
        if (members.empty()) continue;
        ClusterStats cs{{}, p, q};
        for (auto i : members) {
            const auto& s = prepared[i];
            try {
                cs.stats.push_back(residual_stats(dataset[i].id(), model_residuals(s, *clustering.models[cl]), m));
            } catch (const std::exception& e) {
                throw InvalidArgument("series '" + dataset[i].id() + "' in cluster " + std::to_string(cl) + ": " +
                                      e.what());
            }
        }
        per_cluster.push_back(std::move(cs));
        cluster_index.push_back(cl);
    }
    if (per_cluster.empty()) throw InvalidArgument("clustering has no populated cluster");

    const std::size_t T0 = per_cluster.front().stats.front().T;
    for (const auto& cs : per_cluster) {
        for (const auto& s : cs.stats) {
            if (s.T != T0) report.relaxed_lengths = true;
        }
    }
    if (report.relaxed_lengths && !options.allow_unequal_lengths) {
        throw InvalidArgument("series lengths differ; the grouped statistics require equal lengths");
    }
    const bool relaxed = report.relaxed_lengths;

    for (std::size_t c = 0; c < per_cluster.size(); ++c) {
        const auto& cs = per_cluster[c];
        ClusterDiagnostics cd;
        cd.cluster = cluster_index[c];
        cd.size = cs.stats.size();
        try {
            cd.group_r = grouped(cs.stats, p, q, false, relaxed);
            cd.group_pacf = grouped(cs.stats, p, q, true, relaxed);
        } catch (const std::exception& e) {
            throw InvalidArgument("cluster " + std::to_string(cd.cluster) + ": " + e.what());
        }
        double max_stat = -1.0;
        for (const auto& s : cs.stats) {
            SeriesDiagnostics sd;
            sd.series_id = s.series_id;
            sd.cluster = cd.cluster;
            sd.ljung_box = ljung_box(s.acf, s.T, p, q);
            sd.ljung_box_pacf = ljung_box(s.pacf, s.T, p, q);
            sd.flagged = sd.ljung_box.p_value < options.flag_threshold;
            if (sd.ljung_box.statistic > max_stat) {
                max_stat = sd.ljung_box.statistic;
                cd.max_lb_series = s.series_id;
            }
            report.series.push_back(std::move(sd));
        }
        report.clusters.push_back(std::move(cd));
    }
    report.total_r = q_total(per_cluster, false, relaxed);
    report.total_pacf = q_total(per_cluster, true, relaxed);

    // keep series rows in dataset order
    std::vector<SeriesDiagnostics> ordered;
    ordered.reserve(report.series.size());
    for (const auto& s : dataset) {
        for (auto& sd : report.series) {
            if (sd.series_id == s.id()) {
                ordered.push_back(sd);
                break;
            }
        }
    }
    report.series = std::move(ordered);
    return report;
}

}  // namespace kmodels
