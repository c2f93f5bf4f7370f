#pragma once

#include <stdexcept>
#include <string>

namespace kmodels {

/// Bad argument or precondition violation supplied by the caller.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A value lies outside the domain of a transform (e.g. log of a non-positive value).
class DomainError : public std::domain_error {
public:
    DomainError(const std::string& what, std::size_t index)
        : std::domain_error(what), index_(index) {}
    [[nodiscard]] std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

/// Model coefficients describe a process we cannot use (e.g. non-stationary AR part).
class InvalidModel : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A series is too short for the requested model order.
class TooShortSeries : public std::invalid_argument {
public:
    TooShortSeries(const std::string& what, std::string series_id)
        : std::invalid_argument(what), series_id_(std::move(series_id)) {}
    [[nodiscard]] const std::string& series_id() const noexcept { return series_id_; }

private:
    std::string series_id_;
};

/// The regression behind a fit is rank deficient. Clustering treats this as model vanishing.
class DegenerateFit : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A residual recursion exploded past the overflow guard.
class NumericalDivergence : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Durbin-Levinson hit a unit pivot.
class NumericallyDegenerate : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Residuals are identically zero, autocorrelations are undefined.
class UndefinedAcf : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// No series could be evaluated under any live model.
class AssignmentError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Every cluster vanished, or every restart failed.
class ClusteringFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file. `line` is 1-based, 0 when not tied to a line.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line)
        : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}
    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace kmodels
