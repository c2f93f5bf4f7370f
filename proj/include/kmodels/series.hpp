#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace kmodels {

/**
 * @brief An identified, ordered sequence of finite observations.
 *
 * Immutable after construction. Construction rejects empty or non-finite data.
 */
class TimeSeries {
public:
    TimeSeries(std::string id, std::vector<double> values);

    [[nodiscard]] const std::string& id() const noexcept { return id_; }
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    [[nodiscard]] double operator[](std::size_t t) const { return values_[t]; }

    friend bool operator==(const TimeSeries&, const TimeSeries&) = default;

private:
    std::string id_;
    std::vector<double> values_;
};

/// Non-empty ordered collection of series with unique ids. Lengths may differ.
class Dataset {
public:
    explicit Dataset(std::vector<TimeSeries> series);

    [[nodiscard]] std::size_t size() const noexcept { return series_.size(); }
    [[nodiscard]] const TimeSeries& operator[](std::size_t i) const { return series_[i]; }
    [[nodiscard]] std::span<const TimeSeries> series() const noexcept { return series_; }
    [[nodiscard]] auto begin() const noexcept { return series_.begin(); }
    [[nodiscard]] auto end() const noexcept { return series_.end(); }

    /// Index of the series with this id, or size() if absent.
    [[nodiscard]] std::size_t find(const std::string& id) const;

    /// Sub-dataset picking the given indices in the given order.
    [[nodiscard]] Dataset subset(std::span<const std::size_t> indices) const;

    friend bool operator==(const Dataset&, const Dataset&) = default;

private:
    std::vector<TimeSeries> series_;
};

/// ARIMA orders. d is applied as preprocessing only.
struct ArmaSpec {
    std::size_t p = 0;
    std::size_t d = 0;
    std::size_t q = 0;
};

/// d-fold adjacent differencing. The id gains a "|d<d>" suffix when d > 0.
TimeSeries difference(const TimeSeries& series, std::size_t d);

/// Moving average over `window` points. The id gains "|rm<window>" when window > 1.
TimeSeries rolling_mean(const TimeSeries& series, std::size_t window);

/// Elementwise natural log. Throws DomainError naming the first non-positive index.
TimeSeries log_transform(const TimeSeries& series);

/// Subtract the sample mean. The id gains "|c".
TimeSeries center(const TimeSeries& series);

/// Apply a series transform to every member of a dataset.
template <class F>
Dataset map_series(const Dataset& data, F&& f) {
    std::vector<TimeSeries> out;
    out.reserve(data.size());
    for (const auto& s : data) out.push_back(f(s));
    return Dataset(std::move(out));
}

/// True when 1 - phi_1 z - ... - phi_p z^p has every root strictly outside the unit circle.
bool is_stationary(std::span<const double> phi);

/// Burn-in prefix discarded by simulate_arma.
std::size_t simulation_burn_in(std::size_t p, std::size_t q);

/**
 * @brief Simulate X_t = a_t + sum phi_i X_{t-i} + sum theta_j a_{t-j}, a_t ~ N(0, sigma^2).
 *
 * Generates length + simulation_burn_in(p, q) points starting from zero pre-sample
 * values and keeps the last `length`. Innovations are sigma * Rng(seed).normal().
 * Throws InvalidModel when phi is not stationary.
 */
TimeSeries simulate_arma(std::span<const double> phi, std::span<const double> theta,
                         std::size_t length, std::uint64_t seed, double sigma = 1.0,
                         std::string id = "sim");

}  // namespace kmodels
