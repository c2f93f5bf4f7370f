#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "kmodels/series.hpp"

namespace kmodels {

/// Zero-mean AR(p) model X_t = a_t + sum_i phi_i X_{t-i}.
struct ArModel {
    std::vector<double> phi;

    [[nodiscard]] std::size_t order() const noexcept { return phi.size(); }
};

enum class LossKind { L2, L1 };

/// Stacked conditional-regression problem for a cluster.
struct ArDesign {
    Eigen::VectorXd response;  ///< X_{i,t} for t = p+1..T_i, series stacked in order
    Eigen::MatrixXd lags;      ///< row-aligned (X_{i,t-1}, ..., X_{i,t-p})
};

/// Stack each series' lag matrix row-blockwise. Throws TooShortSeries if some T_i < p + 1.
ArDesign build_design(const Dataset& cluster, std::size_t p);

struct LadOptions {
    double weight_floor = 1e-8;   ///< |residual| floor in the IRLS weights
    double coef_tol = 1e-8;       ///< stop when max |coefficient change| drops below this
    std::size_t max_iters = 200;
};

/**
 * @brief Fit one AR(p) model to every series of a cluster.
 *
 * L2 is conditional least squares solved through a column-pivoted Householder QR.
 * L1 minimizes the stacked sum of absolute deviations by iteratively reweighted
 * least squares, started from `start` when given (otherwise from the L2 solution);
 * at exact ties it may pick a different minimizer than an LP solver would.
 *
 * Throws DegenerateFit when the lag matrix is rank deficient.
 */
ArModel fit_ar(const Dataset& cluster, std::size_t p, LossKind loss,
               const std::optional<ArModel>& start = std::nullopt, const LadOptions& lad = {});

/// Same, over an explicit design (exposed for oracle tests).
Eigen::VectorXd solve_l2(const ArDesign& design);
Eigen::VectorXd solve_l1(const ArDesign& design, const Eigen::VectorXd& start, const LadOptions& lad = {});

/// Conditional AR loss of one series: sum over t = p+1..T of the squared or absolute one-step error.
double ar_loss(const TimeSeries& series, const ArModel& model, LossKind loss);

/// One-step errors X_t - sum phi_i X_{t-i} for t = p+1..T.
std::vector<double> ar_residuals(const TimeSeries& series, const ArModel& model);

}  // namespace kmodels
