#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "kmodels/clustering.hpp"
#include "kmodels/series.hpp"

namespace kmodels {

/// Residual autocorrelation summary of one series under its cluster's model.
struct ResidualStats {
    std::string series_id;
    std::vector<double> residuals;  ///< conditional residuals, zero-initialized prefix removed
    std::vector<double> acf;        ///< lags 1..m
    std::vector<double> pacf;       ///< lags 1..m
    std::size_t T = 0;              ///< residuals.size()
};

enum class PortmanteauKind { LB, GroupR, GroupPacf, TotalR, TotalPacf };

const char* to_string(PortmanteauKind kind);

struct PortmanteauResult {
    double statistic = 0.0;
    std::size_t df = 0;
    double p_value = 1.0;
    PortmanteauKind kind = PortmanteauKind::LB;
};

/// Upper tail of the chi-squared distribution with `df` degrees of freedom.
double chi2_sf(double x, std::size_t df);

/**
 * Un-centered residual autocorrelations
 *   r_l = sum_{t>l} a_t a_{t-l} / sum_t a_t^2,  l = 1..m.
 * Throws InvalidArgument unless 0 < m < T, UndefinedAcf for all-zero residuals.
 */
std::vector<double> residual_acf(std::span<const double> residuals, std::size_t m);

/// Partial autocorrelations by the Durbin-Levinson recursion. Throws NumericallyDegenerate on a unit pivot.
std::vector<double> residual_pacf(std::span<const double> acf);

/// Build ResidualStats from an already-trimmed residual sequence.
ResidualStats residual_stats(std::string series_id, std::vector<double> residuals, std::size_t m);

/**
 * Ljung-Box statistic T(T+2) sum_l r_l^2 / (T - l) over the given autocorrelations
 * (or partial autocorrelations), with df = m - p - q.
 */
PortmanteauResult ljung_box(std::span<const double> acf_or_pacf, std::size_t T, std::size_t p, std::size_t q);

/**
 * Grouped statistic: the Ljung-Box sum over every series of a cluster, df = n*m - p - q.
 * All members must share T and m.
 */
PortmanteauResult q_group(std::span<const ResidualStats> stats, std::size_t p, std::size_t q, bool use_pacf);

/**
 * Unequal-length variant: each series contributes with its own T_i. Same df rule.
 * Not covered by the equal-length asymptotic result; reported as such.
 */
PortmanteauResult q_group_relaxed(std::span<const ResidualStats> stats, std::size_t p, std::size_t q,
                                  bool use_pacf);

struct ClusterStats {
    std::vector<ResidualStats> stats;
    std::size_t p = 0;
    std::size_t q = 0;
};

/// Sum of per-cluster grouped statistics, df = sum_i (n_i m - p_i - q_i).
PortmanteauResult q_total(std::span<const ClusterStats> clusters, bool use_pacf, bool relaxed = false);

struct SeriesDiagnostics {
    std::string series_id;
    std::size_t cluster = 0;
    PortmanteauResult ljung_box;       ///< on r-hat
    PortmanteauResult ljung_box_pacf;  ///< on pi-hat
    bool flagged = false;              ///< ljung_box.p_value < threshold
};

struct ClusterDiagnostics {
    std::size_t cluster = 0;
    std::size_t size = 0;
    PortmanteauResult group_r;
    PortmanteauResult group_pacf;
    std::string max_lb_series;  ///< member with the largest individual Ljung-Box statistic
};

struct DiagnosticsReport {
    std::size_t lags = 0;
    double flag_threshold = 0.01;
    bool relaxed_lengths = false;  ///< true when members differ in length and the relaxed statistic was used
    std::vector<SeriesDiagnostics> series;
    std::vector<ClusterDiagnostics> clusters;
    PortmanteauResult total_r;
    PortmanteauResult total_pacf;
};

struct ReportOptions {
    std::size_t lags = 20;
    double flag_threshold = 0.01;
    bool allow_unequal_lengths = true;
};

/**
 * @brief Goodness-of-fit report for a finished clustering.
 *
 * `dataset` is the raw dataset the clustering was run on; the family's differencing is
 * re-applied. Residuals come from each series' owning cluster model.
 */
DiagnosticsReport cluster_report(const Clustering& clustering, const Dataset& dataset, const ModelFamily& family,
                                 const ReportOptions& options = {});

/// Residuals of a series under a cluster model, with the conditioning prefix removed.
std::vector<double> model_residuals(const TimeSeries& series, const ClusterModel& model);

}  // namespace kmodels
