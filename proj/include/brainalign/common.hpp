#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>

namespace brainalign {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Index = Eigen::Index;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Failure classes surfaced by the command line front end.
enum class ErrorClass { Config, Io, Numeric };

class Error : public std::runtime_error {
public:
    Error(ErrorClass kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorClass kind() const noexcept { return kind_; }

private:
    ErrorClass kind_;
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(ErrorClass::Io, what) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ErrorClass::Config, what) {}
};

class NumericError : public Error {
public:
    explicit NumericError(const std::string& what) : Error(ErrorClass::Numeric, what) {}
};

/// Worker count taken from BRAINALIGN_THREADS, else the hardware concurrency.
unsigned default_threads();

/// Runs fn(i) for i in [0, n) on up to `threads` workers. Tasks must write
/// disjoint outputs; the first exception (lowest index) is rethrown.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

/// Shortest round-trip decimal representation; "nan", "inf", "-inf" for
/// non-finite values.
std::string format_double(double value);

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& m)
{
    return m.derived().array().isFinite().all();
}

} // namespace brainalign
