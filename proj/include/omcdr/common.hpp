#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace omcdr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Base class for all errors raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input: bad shapes, bad files, bad parameters.
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// I/O failure (missing or unreadable/unwritable path).
class IoError : public Error {
public:
    using Error::Error;
};

/// A fit produced a non-finite value or an unsolvable system.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Seeded generator shared by every stochastic routine.
///
/// Uniform draws use the top 53 bits of mt19937_64 directly so that values
/// do not depend on the standard library's distribution implementation.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Integer in [0, n). n must be positive.
    std::size_t below(std::size_t n) {
        return static_cast<std::size_t>(uniform() * static_cast<double>(n));
    }

    double normal() { return normal_(engine_); }

    /// Matrix with i.i.d. uniform [0, 1) entries, filled row-major.
    Matrix uniform_matrix(Eigen::Index rows, Eigen::Index cols) {
        Matrix m(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i)
            for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = uniform();
        return m;
    }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

/// Sum of Euclidean row norms (the 2,1 norm).
inline double l21_norm(const Matrix& m) { return m.rowwise().norm().sum(); }

}  // namespace omcdr
