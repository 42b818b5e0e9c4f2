#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cht {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Index = Eigen::Index;

/// Base of every error raised by the library. `category()` is a short
/// machine-readable tag (e.g. "input", "degenerate") used by the CLI.
class Error : public std::runtime_error {
public:
    Error(std::string category, const std::string& what)
        : std::runtime_error(what), category_(std::move(category)) {}

    const std::string& category() const noexcept { return category_; }

private:
    std::string category_;
};

/// Malformed or invalid input data (parse failures, bad labels, sizes).
class InputError : public Error {
public:
    explicit InputError(const std::string& what) : Error("input", what) {}
};

/// A statistic is undefined because some spread is exactly zero.
class DegenerateError : public Error {
public:
    explicit DegenerateError(const std::string& what) : Error("degenerate", what) {}
};

/// Arguments violate an operation's precondition.
class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error("domain", what) {}
};

/// An unordered feature pair, always stored with j < k.
struct Pair {
    Index j = 0;
    Index k = 0;

    friend auto operator<=>(const Pair&, const Pair&) = default;
};

inline Pair make_pair_ordered(Index a, Index b) { return a < b ? Pair{a, b} : Pair{b, a}; }

}  // namespace cht
