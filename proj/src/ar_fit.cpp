#include "kmodels/ar_fit.hpp"

#include <algorithm>
#include <cmath>

#include "kmodels/errors.hpp"

namespace kmodels {

ArDesign build_design(const Dataset& cluster, std::size_t p) {
    if (p == 0) throw InvalidArgument("AR order must be positive");
    std::size_t rows = 0;
    for (const auto& s : cluster) {
        if (s.size() < p + 1) {
            throw TooShortSeries("series '" + s.id() + "' has length " + std::to_string(s.size()) +
                                     ", AR(" + std::to_string(p) + ") needs at least " + std::to_string(p + 1),
                                 s.id());
        }
        rows += s.size() - p;
    }

    ArDesign design{Eigen::VectorXd(static_cast<Eigen::Index>(rows)),
                    Eigen::MatrixXd(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(p))};
    Eigen::Index row = 0;
    for (const auto& s : cluster) {
        for (std::size_t t = p; t < s.size(); ++t, ++row) {
            design.response(row) = s[t];
            for (std::size_t i = 1; i <= p; ++i) design.lags(row, static_cast<Eigen::Index>(i - 1)) = s[t - i];
        }
    }
    return design;
}

Eigen::VectorXd solve_l2(const ArDesign& design) {
    const auto& X = design.lags;
    if (X.rows() < X.cols()) throw DegenerateFit("fewer regression rows than AR coefficients");
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    if (qr.rank() < X.cols()) {
        throw DegenerateFit("lag matrix has rank " + std::to_string(qr.rank()) + " < " +
                            std::to_string(X.cols()));
    }
    return qr.solve(design.response);
}

namespace {

// Simplex-style descent over vertices of the LAD objective, started from the
// rows IRLS already fits best. IRLS alone stalls slightly above the optimum
// when the solution sits on a vertex.
Eigen::VectorXd polish_l1(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& start,
                          double start_obj) {
    const Eigen::Index n = X.rows(), p = X.cols();
    if (n <= p) return start;

    const Eigen::VectorXd r0 = y - X * start;
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return std::abs(r0(a)) < std::abs(r0(b)); });

    std::vector<Eigen::Index> basis;
    Eigen::MatrixXd q(p, p);
    for (auto i : order) {
        Eigen::VectorXd v = X.row(i).transpose();
        const double norm = v.norm();
        if (norm == 0.0) continue;
        for (std::size_t k = 0; k < basis.size(); ++k) {
            const auto col = q.col(static_cast<Eigen::Index>(k));
            v -= col.dot(v) * col;
        }
        if (v.norm() <= 1e-10 * norm) continue;
        q.col(static_cast<Eigen::Index>(basis.size())) = v.normalized();
        basis.push_back(i);
        if (static_cast<Eigen::Index>(basis.size()) == p) break;
    }
    if (static_cast<Eigen::Index>(basis.size()) < p) return start;

    Eigen::MatrixXd xb(p, p);
    Eigen::VectorXd yb(p);
    for (Eigen::Index k = 0; k < p; ++k) {
        xb.row(k) = X.row(basis[static_cast<std::size_t>(k)]);
        yb(k) = y(basis[static_cast<std::size_t>(k)]);
    }
    Eigen::VectorXd beta = xb.fullPivLu().solve(yb);
    if (!beta.allFinite()) return start;
    double obj = (y - X * beta).cwiseAbs().sum();

    std::vector<std::pair<double, double>> knots;
    std::vector<Eigen::Index> knot_row;
    std::vector<std::size_t> idx;
    const std::size_t max_pivots = 50 * static_cast<std::size_t>(p) + 50;
    for (std::size_t pivot = 0; pivot < max_pivots; ++pivot) {
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(xb);
        Eigen::VectorXd r = y - X * beta;
        std::vector<char> in_basis(static_cast<std::size_t>(n), 0);
        for (auto b : basis) {
            in_basis[static_cast<std::size_t>(b)] = 1;
            r(b) = 0.0;
        }

        bool moved = false;
        for (Eigen::Index j = 0; j < p && !moved; ++j) {
            const Eigen::VectorXd d = lu.solve(Eigen::VectorXd::Unit(p, j));
            const Eigen::VectorXd a = X * d;
            // objective along beta + t d is sum |a_i| |t - r_i / a_i| + |t|
            knots.clear();
            knot_row.clear();
            knots.emplace_back(0.0, 1.0);
            knot_row.push_back(-1);
            double total = 1.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                if (in_basis[static_cast<std::size_t>(i)] || std::abs(a(i)) < 1e-14) continue;
                knots.emplace_back(r(i) / a(i), std::abs(a(i)));
                knot_row.push_back(i);
                total += std::abs(a(i));
            }
            idx.resize(knots.size());
            for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = k;
            std::sort(idx.begin(), idx.end(), [&](auto u, auto v) { return knots[u].first < knots[v].first; });
            double acc = 0.0;
            std::size_t pick = idx.front();
            for (auto k : idx) {
                acc += knots[k].second;
                if (acc >= 0.5 * total) {
                    pick = k;
                    break;
                }
            }
            if (knot_row[pick] < 0) continue;
            const Eigen::VectorXd next = beta + knots[pick].first * d;
            const double next_obj = (y - X * next).cwiseAbs().sum();
            if (!(next_obj < obj - 1e-13 * (1.0 + obj))) continue;
            beta = next;
            obj = next_obj;
            basis[static_cast<std::size_t>(j)] = knot_row[pick];
            xb.row(j) = X.row(knot_row[pick]);
            moved = true;
        }
        if (!moved) break;
    }
    return obj < start_obj ? beta : start;
}

}  // namespace

Eigen::VectorXd solve_l1(const ArDesign& design, const Eigen::VectorXd& start, const LadOptions& lad) {
    const auto& X = design.lags;
    const auto& y = design.response;
    const Eigen::Index p = X.cols();

    Eigen::VectorXd beta = start;
    Eigen::VectorXd best = start;
    double best_obj = (y - X * start).cwiseAbs().sum();

    Eigen::MatrixXd gram(p, p);
    Eigen::VectorXd rhs(p);
    for (std::size_t iter = 0; iter < lad.max_iters; ++iter) {
        const Eigen::VectorXd resid = y - X * beta;
        const Eigen::VectorXd w = resid.cwiseAbs().cwiseMax(lad.weight_floor).cwiseInverse();
        gram.noalias() = X.transpose() * w.asDiagonal() * X;
        rhs.noalias() = X.transpose() * w.cwiseProduct(y);

        Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
        if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) break;
        Eigen::VectorXd next = ldlt.solve(rhs);
        if (!next.allFinite()) break;

        const double change = (next - beta).cwiseAbs().maxCoeff();
        beta = std::move(next);
        const double obj = (y - X * beta).cwiseAbs().sum();
        if (obj < best_obj) {
            best_obj = obj;
            best = beta;
        }
        if (change < lad.coef_tol) break;
    }
    return polish_l1(X, y, best, best_obj);
}

ArModel fit_ar(const Dataset& cluster, std::size_t p, LossKind loss, const std::optional<ArModel>& start,
               const LadOptions& lad) {
    const ArDesign design = build_design(cluster, p);
    const Eigen::VectorXd l2 = solve_l2(design);
    Eigen::VectorXd coef = l2;
    if (loss == LossKind::L1) {
        Eigen::VectorXd init = l2;
        if (start && start->order() == p) {
            const Eigen::VectorXd warm = Eigen::Map<const Eigen::VectorXd>(start->phi.data(), static_cast<Eigen::Index>(p));
            const double warm_obj = (design.response - design.lags * warm).cwiseAbs().sum();
            const double l2_obj = (design.response - design.lags * l2).cwiseAbs().sum();
            if (warm_obj < l2_obj) init = warm;
        }
        coef = solve_l1(design, init, lad);
    }
    return ArModel{std::vector<double>(coef.data(), coef.data() + coef.size())};
}

std::vector<double> ar_residuals(const TimeSeries& series, const ArModel& model) {
    const std::size_t p = model.order();
    if (series.size() < p + 1) {
        throw TooShortSeries("series '" + series.id() + "' is too short for AR(" + std::to_string(p) + ")",
                             series.id());
    }
    std::vector<double> out(series.size() - p);
    for (std::size_t t = p; t < series.size(); ++t) {
        double e = series[t];
        for (std::size_t i = 1; i <= p; ++i) e -= model.phi[i - 1] * series[t - i];
        out[t - p] = e;
    }
    return out;
}

double ar_loss(const TimeSeries& series, const ArModel& model, LossKind loss) {
    double total = 0.0;
    for (double e : ar_residuals(series, model)) total += loss == LossKind::L2 ? e * e : std::abs(e);
    return total;
}

}  // namespace kmodels
