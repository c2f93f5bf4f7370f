#pragma once

// Shared generators and brute-force oracles for the test suites.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kmodels/ar_fit.hpp"
#include "kmodels/rng.hpp"
#include "kmodels/series.hpp"

namespace testing {

inline std::vector<double> normals(kmodels::Rng& rng, std::size_t n, double scale = 1.0) {
    std::vector<double> v(n);
    for (auto& x : v) x = scale * rng.normal();
    return v;
}

inline double uniform_in(kmodels::Rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

/// Stationary AR coefficients of order p drawn by mapping reflection coefficients in (-0.9, 0.9).
inline std::vector<double> random_stationary(kmodels::Rng& rng, std::size_t p) {
    std::vector<double> phi;
    for (std::size_t k = 0; k < p; ++k) {
        const double r = uniform_in(rng, -0.9, 0.9);
        std::vector<double> next(k + 1);
        for (std::size_t j = 0; j < k; ++j) next[j] = phi[j] - r * phi[k - 1 - j];
        next[k] = r;
        phi = std::move(next);
    }
    return phi;
}

/// n series of length T from one ARMA process, ids "<prefix><i>".
inline kmodels::Dataset arma_cluster(const std::vector<double>& phi, const std::vector<double>& theta, std::size_t n,
                                     std::size_t T, std::uint64_t seed, const std::string& prefix = "s") {
    std::vector<kmodels::TimeSeries> out;
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(kmodels::simulate_arma(phi, theta, T, kmodels::mix_seed(seed, i), 1.0, prefix + std::to_string(i)));
    }
    return kmodels::Dataset(std::move(out));
}

/// Least squares by the explicit normal equations (X'X)^-1 X'Y.
inline Eigen::VectorXd normal_equations(const kmodels::ArDesign& d) {
    const Eigen::MatrixXd xtx = d.lags.transpose() * d.lags;
    return xtx.inverse() * (d.lags.transpose() * d.response);
}

inline double l1_objective(const kmodels::ArDesign& d, const Eigen::VectorXd& beta) {
    return (d.response - d.lags * beta).cwiseAbs().sum();
}

/**
 * Exact least-absolute-deviations optimum. Some optimal solution of the LP lies on a vertex
 * where p residuals vanish, so enumerating all p-row interpolants finds the minimum.
 */
inline double lad_oracle(const kmodels::ArDesign& d) {
    const auto rows = static_cast<std::size_t>(d.lags.rows());
    const auto p = static_cast<std::size_t>(d.lags.cols());
    std::vector<std::size_t> pick(p);
    std::iota(pick.begin(), pick.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    while (true) {
        Eigen::MatrixXd a(p, p);
        Eigen::VectorXd b(p);
        for (std::size_t i = 0; i < p; ++i) {
            a.row(static_cast<Eigen::Index>(i)) = d.lags.row(static_cast<Eigen::Index>(pick[i]));
            b(static_cast<Eigen::Index>(i)) = d.response(static_cast<Eigen::Index>(pick[i]));
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
        if (lu.isInvertible()) best = std::min(best, l1_objective(d, lu.solve(b)));
        // next combination
        std::size_t i = p;
        while (i > 0 && pick[i - 1] == rows - p + i - 1) --i;
        if (i == 0) break;
        ++pick[i - 1];
        for (std::size_t j = i; j < p; ++j) pick[j] = pick[j - 1] + 1;
    }
    return best;
}

/// Direct double loop over the un-centered autocorrelation definition.
inline std::vector<double> brute_acf(const std::vector<double>& a, std::size_t m) {
    long double den = 0;
    for (double v : a) den += static_cast<long double>(v) * v;
    std::vector<double> r;
    for (std::size_t l = 1; l <= m; ++l) {
        long double num = 0;
        for (std::size_t t = 0; t < a.size(); ++t) {
            if (t >= l) num += static_cast<long double>(a[t]) * a[t - l];
        }
        r.push_back(static_cast<double>(num / den));
    }
    return r;
}

/// Partial autocorrelation at lag k as the last coefficient of the order-k Yule-Walker solve.
inline std::vector<double> yule_walker_pacf(const std::vector<double>& r) {
    std::vector<double> out;
    for (std::size_t k = 1; k <= r.size(); ++k) {
        Eigen::MatrixXd R(k, k);
        Eigen::VectorXd rhs(k);
        for (std::size_t i = 0; i < k; ++i) {
            rhs(static_cast<Eigen::Index>(i)) = r[i];
            for (std::size_t j = 0; j < k; ++j) {
                const std::size_t lag = i > j ? i - j : j - i;
                R(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = lag == 0 ? 1.0 : r[lag - 1];
            }
        }
        out.push_back(R.fullPivLu().solve(rhs)(static_cast<Eigen::Index>(k - 1)));
    }
    return out;
}

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm,
                               double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol) return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

/**
 * Chi-squared upper tail by quadrature. With t = u^2 the density becomes the smooth
 * 2 u^(k-1) exp(-u^2/2) / (2^(k/2) Gamma(k/2)), integrated from sqrt(x) outwards.
 */
inline double chi2_sf_quadrature(double x, std::size_t df) {
    const double k = static_cast<double>(df);
    const double log_norm = std::log(2.0) - 0.5 * k * std::log(2.0) - std::lgamma(0.5 * k);
    auto f = [&](double u) { return u <= 0 ? (df == 1 ? std::exp(log_norm) : 0.0)
                                           : std::exp(log_norm + (k - 1) * std::log(u) - 0.5 * u * u); };
    const double lo = std::sqrt(x);
    const double hi = std::max(lo, std::sqrt(k)) + 40.0;
    double total = 0.0;
    const int pieces = 64;
    for (int i = 0; i < pieces; ++i) {
        const double a = lo + (hi - lo) * i / pieces, b = lo + (hi - lo) * (i + 1) / pieces;
        const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
        total += adaptive_simpson(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4 * fm + fb), 1e-15, 40);
    }
    return total;
}

}  // namespace testing
