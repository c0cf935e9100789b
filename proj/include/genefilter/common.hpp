#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace genefilter {

using Index = std::ptrdiff_t;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Added to a zero variance before it is used as a divisor.
inline constexpr double kVarianceFloor = 1e-8;

// Input that violates a documented precondition.
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Malformed file content; row and column are 1-based positions in the file.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& file, std::size_t row, std::size_t column, const std::string& what)
        : std::runtime_error(file + ":" + std::to_string(row) + ":" + std::to_string(column) + ": " + what),
          row_(row), column_(column) {}

    std::size_t row() const noexcept { return row_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t row_;
    std::size_t column_;
};

// splitmix64 finalizer, used to derive independent random streams from one seed.
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) noexcept {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

} // namespace genefilter
