#include "kmodels/arma_fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>

#include "kmodels/ar_fit.hpp"
#include "kmodels/errors.hpp"
#include "kmodels/log.hpp"

namespace kmodels {
namespace {

void check_length(const TimeSeries& s, std::size_t r) {
    if (s.size() <= r) {
        throw TooShortSeries("series '" + s.id() + "' has length " + std::to_string(s.size()) +
                                 ", needs more than " + std::to_string(r),
                             s.id());
    }
}

// Residuals and their sensitivities for one series, rows t = r..T-1.
// Column i < p holds -d(eps_t)/d(phi_i), column p + j holds -d(eps_t)/d(psi_j).
// Each column obeys c_t = driver_t + sum_j psi_j c_{t-j} with c_t = 0 for t < r; the
// driver is X_{t-i} for AR lags and -eps_{t-j} for MA lags.
void append_regression(const TimeSeries& s, const std::vector<double>& phi, const std::vector<double>& psi,
                       const std::vector<double>& eps, double row_weight, Eigen::Index row0,
                       Eigen::VectorXd& target, Eigen::MatrixXd& jac) {
    const std::size_t p = phi.size();
    const std::size_t q = psi.size();
    const std::size_t r = std::max(p, q);
    const std::size_t T = s.size();
    std::vector<double> col(T);
    for (std::size_t c = 0; c < p + q; ++c) {
        std::fill(col.begin(), col.end(), 0.0);
        for (std::size_t t = r; t < T; ++t) {
            double v = c < p ? s[t - (c + 1)] : -eps[t - (c - p + 1)];
            for (std::size_t j = 1; j <= q; ++j) v += psi[j - 1] * col[t - j];
            col[t] = v;
            jac(row0 + static_cast<Eigen::Index>(t - r), static_cast<Eigen::Index>(c)) = row_weight * v;
        }
    }
    for (std::size_t t = r; t < T; ++t) target(row0 + static_cast<Eigen::Index>(t - r)) = row_weight * eps[t];
}

// Weighted objective; +inf when a recursion diverges.
double objective(const Dataset& cluster, const ArmaModel& m, bool weighted) {
    try {
        return cluster_css(cluster, m, weighted);
    } catch (const NumericalDivergence&) {
        return std::numeric_limits<double>::infinity();
    }
}

ArmaModel with_psi(const std::vector<double>& phi, const std::vector<double>& psi) {
    ArmaModel m;
    m.phi = phi;
    m.theta.resize(psi.size());
    std::transform(psi.begin(), psi.end(), m.theta.begin(), [](double v) { return -v; });
    return m;
}

}  // namespace

std::vector<double> ArmaModel::psi() const {
    std::vector<double> out(theta.size());
    std::transform(theta.begin(), theta.end(), out.begin(), [](double v) { return -v; });
    return out;
}

std::vector<double> conditional_residuals(const TimeSeries& series, const ArmaModel& model) {
    const std::size_t p = model.p();
    const std::size_t q = model.q();
    const std::size_t r = std::max(p, q);
    check_length(series, r);

    std::vector<double> eps(series.size(), 0.0);
    for (std::size_t t = r; t < series.size(); ++t) {
        double e = series[t];
        for (std::size_t i = 1; i <= p; ++i) e -= model.phi[i - 1] * series[t - i];
        // + psi_j eps_{t-j} with psi = -theta
        for (std::size_t j = 1; j <= q; ++j) e -= model.theta[j - 1] * eps[t - j];
        if (!(std::abs(e) <= kDivergenceGuard)) {
            throw NumericalDivergence("residual recursion diverged at t=" + std::to_string(t) + " in series '" +
                                      series.id() + "'");
        }
        eps[t] = e;
    }
    return eps;
}

double arma_loss(const TimeSeries& series, const ArmaModel& model) {
    const auto eps = conditional_residuals(series, model);
    double total = 0.0;
    for (double e : eps) total += e * e;
    return total;
}

double cluster_css(const Dataset& cluster, const ArmaModel& model, bool weight_by_length) {
    double total = 0.0;
    for (const auto& s : cluster) {
        const double loss = arma_loss(s, model);
        total += weight_by_length ? loss / static_cast<double>(s.size()) : loss;
    }
    return total;
}

bool is_invertible(const std::vector<double>& theta) {
    std::vector<double> psi(theta.size());
    std::transform(theta.begin(), theta.end(), psi.begin(), [](double v) { return -v; });
    return is_stationary(psi);
}

ArmaModel fit_arma(const Dataset& cluster, std::size_t p, std::size_t q, const ArmaFitConfig& config,
                   const std::optional<ArmaModel>& start) {
    if (p + q == 0) throw InvalidArgument("ARMA fit needs p + q >= 1");
    if (!(config.loss_rel_tol > 0.0 && config.loss_rel_tol < 1.0)) {
        throw InvalidArgument("loss_rel_tol must lie in (0, 1)");
    }
    const std::size_t r = std::max(p, q);
    std::size_t rows = 0;
    for (const auto& s : cluster) {
        if (s.size() <= 2 * r) {
            throw TooShortSeries("series '" + s.id() + "' has length " + std::to_string(s.size()) + ", ARMA(" +
                                     std::to_string(p) + "," + std::to_string(q) + ") needs more than " +
                                     std::to_string(2 * r),
                                 s.id());
        }
        rows += s.size() - r;
    }
    const bool weighted = config.weight_by_length;

    std::vector<double> phi(p, 0.0);
    std::vector<double> psi(q, 0.0);
    if (config.init_strategy == ArmaInit::ZeroMA_ARStart && p > 0) phi = fit_ar(cluster, p, LossKind::L2).phi;
    double css = objective(cluster, with_psi(phi, psi), weighted);

    if (start && start->p() == p && start->q() == q) {
        const double start_css = objective(cluster, *start, weighted);
        if (start_css < css) {
            phi = start->phi;
            psi = start->psi();
            css = start_css;
        }
    }
    if (!std::isfinite(css)) throw NumericalDivergence("no finite starting point for the ARMA fit");

    const auto k = static_cast<Eigen::Index>(p + q);
    Eigen::VectorXd target(static_cast<Eigen::Index>(rows));
    Eigen::MatrixXd jac(static_cast<Eigen::Index>(rows), k);

    for (std::size_t iter = 0; iter < config.max_outer_iters && css > 0.0; ++iter) {
        // The update regression's printed lower limit t = max(p,q) (1-based) is the last
        // zero-initialized step; its row is identically zero, so rows start at t = max(p,q)+1.
        Eigen::Index row = 0;
        for (const auto& s : cluster) {
            const auto eps = conditional_residuals(s, with_psi(phi, psi));
            const double w = weighted ? 1.0 / std::sqrt(static_cast<double>(s.size())) : 1.0;
            append_regression(s, phi, psi, eps, w, row, target, jac);
            row += static_cast<Eigen::Index>(s.size() - r);
        }

        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(jac);
        if (qr.rank() < k) {
            if (iter == 0) throw DegenerateFit("ARMA update regression is rank deficient");
            break;
        }
        const Eigen::VectorXd delta = qr.solve(target);
        if (!delta.allFinite()) break;

        double step = 1.0;
        bool accepted = false;
        std::vector<double> next_phi(p);
        std::vector<double> next_psi(q);
        double next_css = css;
        for (std::size_t h = 0; h <= config.step_halving_max; ++h, step *= 0.5) {
            for (std::size_t i = 0; i < p; ++i) next_phi[i] = phi[i] + step * delta(static_cast<Eigen::Index>(i));
            for (std::size_t j = 0; j < q; ++j) next_psi[j] = psi[j] + step * delta(static_cast<Eigen::Index>(p + j));
            next_css = objective(cluster, with_psi(next_phi, next_psi), weighted);
            if (next_css <= css) {
                accepted = true;
                break;
            }
        }
        if (!accepted) break;

        const double rel = (css - next_css) / css;
        phi = std::move(next_phi);
        psi = std::move(next_psi);
        next_phi.assign(p, 0.0);
        next_psi.assign(q, 0.0);
        css = next_css;
        if (rel < config.loss_rel_tol) break;
    }

    ArmaModel model = with_psi(phi, psi);
    model.sigma2 = cluster_css(cluster, model, false) / static_cast<double>(rows);
    if (config.warn_non_invertible && q > 0 && !is_invertible(model.theta)) {
        std::ostringstream msg;
        msg << "fitted MA polynomial is not invertible (theta =";
        for (double t : model.theta) msg << ' ' << t;
        msg << ')';
        warn(msg.str());
    }
    return model;
}

}  // namespace kmodels
