#include "kmodels/series.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "kmodels/errors.hpp"
#include "kmodels/rng.hpp"

namespace kmodels {

TimeSeries::TimeSeries(std::string id, std::vector<double> values)
    : id_(std::move(id)), values_(std::move(values)) {
    if (values_.empty()) throw InvalidArgument("series '" + id_ + "' is empty");
    for (std::size_t t = 0; t < values_.size(); ++t) {
        if (!std::isfinite(values_[t])) {
            throw InvalidArgument("series '" + id_ + "' has a non-finite value at index " +
                                  std::to_string(t));
        }
    }
}

Dataset::Dataset(std::vector<TimeSeries> series) : series_(std::move(series)) {
    if (series_.empty()) throw InvalidArgument("dataset is empty");
    std::unordered_set<std::string> seen;
    for (const auto& s : series_) {
        if (!seen.insert(s.id()).second) throw InvalidArgument("duplicate series id '" + s.id() + "'");
    }
}

std::size_t Dataset::find(const std::string& id) const {
    for (std::size_t i = 0; i < series_.size(); ++i) {
        if (series_[i].id() == id) return i;
    }
    return series_.size();
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
    std::vector<TimeSeries> out;
    out.reserve(indices.size());
    for (auto i : indices) out.push_back(series_.at(i));
    return Dataset(std::move(out));
}

TimeSeries difference(const TimeSeries& series, std::size_t d) {
    if (d >= series.size()) {
        throw InvalidArgument("difference order " + std::to_string(d) + " >= length of series '" +
                              series.id() + "'");
    }
    if (d == 0) return series;
    std::vector<double> v(series.values().begin(), series.values().end());
    for (std::size_t pass = 0; pass < d; ++pass) {
        for (std::size_t t = 0; t + 1 < v.size(); ++t) v[t] = v[t + 1] - v[t];
        v.pop_back();
    }
    return TimeSeries(series.id() + "|d" + std::to_string(d), std::move(v));
}

TimeSeries rolling_mean(const TimeSeries& series, std::size_t window) {
    if (window == 0) throw InvalidArgument("rolling window must be positive");
    if (window > series.size()) {
        throw InvalidArgument("rolling window " + std::to_string(window) + " exceeds length of series '" +
                              series.id() + "'");
    }
    if (window == 1) return series;
    const auto x = series.values();
    std::vector<double> out(x.size() - window + 1);
    for (std::size_t t = 0; t < out.size(); ++t) {
        out[t] = std::accumulate(x.begin() + t, x.begin() + t + window, 0.0) / static_cast<double>(window);
    }
    return TimeSeries(series.id() + "|rm" + std::to_string(window), std::move(out));
}

TimeSeries log_transform(const TimeSeries& series) {
    const auto x = series.values();
    std::vector<double> out(x.size());
    for (std::size_t t = 0; t < x.size(); ++t) {
        if (!(x[t] > 0.0)) {
            throw DomainError("log transform of non-positive value at index " + std::to_string(t) +
                                  " in series '" + series.id() + "'",
                              t);
        }
        out[t] = std::log(x[t]);
    }
    return TimeSeries(series.id() + "|log", std::move(out));
}

TimeSeries center(const TimeSeries& series) {
    const auto x = series.values();
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
    std::vector<double> out(x.size());
    std::transform(x.begin(), x.end(), out.begin(), [mean](double v) { return v - mean; });
    return TimeSeries(series.id() + "|c", std::move(out));
}

bool is_stationary(std::span<const double> phi) {
    // Step-down (Schur-Cohn) recursion: stationary iff every reflection coefficient is inside (-1, 1).
    std::vector<double> a(phi.begin(), phi.end());
    for (std::size_t k = a.size(); k > 0; --k) {
        const double kappa = a[k - 1];
        if (!std::isfinite(kappa) || std::abs(kappa) >= 1.0) return false;
        const double denom = 1.0 - kappa * kappa;
        std::vector<double> next(k - 1);
        for (std::size_t j = 0; j + 1 < k; ++j) next[j] = (a[j] + kappa * a[k - 2 - j]) / denom;
        a = std::move(next);
    }
    return true;
}

std::size_t simulation_burn_in(std::size_t p, std::size_t q) {
    return std::max<std::size_t>(200, 10 * (p + q));
}

TimeSeries simulate_arma(std::span<const double> phi, std::span<const double> theta, std::size_t length,
                         std::uint64_t seed, double sigma, std::string id) {
    if (length == 0) throw InvalidArgument("simulation length must be positive");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InvalidArgument("sigma must be positive");
    if (!is_stationary(phi)) throw InvalidModel("AR polynomial is not stationary");
    for (double th : theta) {
        if (!std::isfinite(th)) throw InvalidModel("non-finite MA coefficient");
    }

    const std::size_t p = phi.size();
    const std::size_t q = theta.size();
    const std::size_t burn = simulation_burn_in(p, q);
    const std::size_t total = length + burn;

    Rng rng(seed);
    std::vector<double> a(total);
    for (auto& v : a) v = sigma * rng.normal();

    std::vector<double> x(total);
    for (std::size_t t = 0; t < total; ++t) {
        double v = a[t];
        for (std::size_t i = 1; i <= p && i <= t; ++i) v += phi[i - 1] * x[t - i];
        for (std::size_t j = 1; j <= q && j <= t; ++j) v += theta[j - 1] * a[t - j];
        x[t] = v;
    }
    return TimeSeries(std::move(id), std::vector<double>(x.begin() + static_cast<std::ptrdiff_t>(burn), x.end()));
}

}  // namespace kmodels
