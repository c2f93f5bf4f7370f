#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "kmodels/series.hpp"

namespace kmodels {

/**
 * @brief Zero-mean ARMA(p,q) model X_t = a_t + sum phi_i X_{t-i} + sum theta_j a_{t-j}.
 *
 * The fitter works in psi = -theta; psi() derives it on demand so the two can never disagree.
 */
struct ArmaModel {
    std::vector<double> phi;
    std::vector<double> theta;
    double sigma2 = 0.0;  ///< unweighted cSSE / number of residual terms, set by fit_arma

    [[nodiscard]] std::size_t p() const noexcept { return phi.size(); }
    [[nodiscard]] std::size_t q() const noexcept { return theta.size(); }
    [[nodiscard]] std::vector<double> psi() const;
};

enum class ArmaInit {
    ZeroMA_ARStart,  ///< phi from conditional LS AR(p), psi = 0
    Zeros,
};

struct ArmaFitConfig {
    std::size_t max_outer_iters = 100;
    double loss_rel_tol = 1e-8;
    ArmaInit init_strategy = ArmaInit::ZeroMA_ARStart;
    bool weight_by_length = false;
    std::size_t step_halving_max = 10;
    bool warn_non_invertible = true;  ///< emit a warning when the fitted MA polynomial is not invertible
};

/// Magnitude past which a residual recursion is considered divergent.
inline constexpr double kDivergenceGuard = 1e12;

/**
 * @brief Conditional residuals with the first max(p,q) innovations fixed at zero.
 *
 * Returns the full length-T sequence; entries t < max(p,q) are the zero prefix.
 * Throws TooShortSeries if T <= max(p,q), NumericalDivergence past kDivergenceGuard.
 */
std::vector<double> conditional_residuals(const TimeSeries& series, const ArmaModel& model);

/// Conditional sum of squares of one series (residuals after the zero prefix).
double arma_loss(const TimeSeries& series, const ArmaModel& model);

/// Sum of arma_loss over the cluster, each term optionally scaled by 1/T_i.
double cluster_css(const Dataset& cluster, const ArmaModel& model, bool weight_by_length);

/**
 * @brief Fit one ARMA(p,q) model to a cluster by iterated Gauss-Newton regressions.
 *
 * Each outer iteration recomputes the residuals and their sensitivities to phi and psi,
 * regresses the residuals on the sensitivities and steps by the solution, halving the
 * step while the cSSE would increase. Iteration stops once the relative improvement is
 * below config.loss_rel_tol, when no halved step improves, or after max_outer_iters.
 *
 * `start`, when given with matching orders, competes with the configured initial
 * strategy and the one with the lower cSSE seeds the iteration, so the returned cSSE
 * never exceeds the cSSE of `start`.
 *
 * Throws DegenerateFit if the sensitivity regression is rank deficient at the start,
 * NumericalDivergence if no starting point has a finite recursion.
 */
ArmaModel fit_arma(const Dataset& cluster, std::size_t p, std::size_t q, const ArmaFitConfig& config = {},
                   const std::optional<ArmaModel>& start = std::nullopt);

/// True when 1 + theta_1 z + ... + theta_q z^q has every root strictly outside the unit circle.
bool is_invertible(const std::vector<double>& theta);

}  // namespace kmodels
