#pragma once

#include <Eigen/Dense>

#include <complex>
#include <limits>
#include <stdexcept>
#include <string>

namespace daepencil {

using Complex = std::complex<double>;
using Matrix  = Eigen::MatrixXcd;
using Vector  = Eigen::VectorXcd;
using Index   = Eigen::Index;

inline constexpr double kEps = std::numeric_limits<double>::epsilon();
inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Base class for every error this library throws on purpose.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A matrix that must be square is not.
struct NonSquareError : Error {
    using Error::Error;
};

/// A rank cutoff falls inside a singular-value cluster; the rank is ambiguous.
struct DegenerateToleranceError : Error {
    using Error::Error;
};

/// Operands have incompatible dimensions.
struct DimensionMismatchError : Error {
    using Error::Error;
};

/// The pencil fails the regularity test; downstream operations are undefined.
struct NotRegularError : Error {
    using Error::Error;
};

/// A resolvent was requested at (or numerically on top of) a spectral point.
struct SpectrumHitError : Error {
    using Error::Error;
};

/// A requested rank is outside [0, n] or inconsistent with other arguments.
struct BadRankError : Error {
    using Error::Error;
};

/// The initial value does not lie in the consistent initial value space.
struct InconsistentInitialValueError : Error {
    using Error::Error;
};

/// Two independent computations of the same quantity disagree beyond tolerance.
struct InternalInconsistencyError : Error {
    using Error::Error;
};

/// A Laplace weight rho does not dominate the spectral bound of the pencil.
struct RhoTooSmallError : Error {
    using Error::Error;
};

/// An iterative or adaptive procedure failed to reach its tolerance.
struct NonConvergentError : Error {
    using Error::Error;
};

/// A computation produced non-finite values.
struct OverflowError : Error {
    using Error::Error;
};

/// Malformed input (file contents or option values).
struct ParseError : Error {
    using Error::Error;
};

/// A splitting was requested for a pencil whose spectrum meets the strip around the imaginary axis.
struct NoDichotomyError : Error {
    using Error::Error;
};

/// A spectral projection was requested but some eigenvalue sits inside the
/// protective strip around the imaginary axis.
struct SpectrumTooCloseToAxisError : Error {
    using Error::Error;
};

/// A caller violated a documented precondition (bad grid, bad radius, ...).
struct InvalidArgumentError : Error {
    using Error::Error;
};

/// True when every entry of m is finite.
inline bool is_finite(const Matrix& m) {
    return m.allFinite();
}

/// Largest singular value; zero for empty matrices.
inline double op_norm(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    return Eigen::JacobiSVD<Matrix>(m).singularValues()(0);
}

/// Smallest singular value of a square matrix; +inf for empty matrices.
inline double sigma_min(const Matrix& m) {
    if (m.size() == 0) return kInf;
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues()(svd.singularValues().size() - 1);
}

/// Two-norm condition number; 1 for empty matrices, +inf for singular ones.
inline double cond2(const Matrix& m) {
    if (m.size() == 0) return 1.0;
    Eigen::JacobiSVD<Matrix> svd(m);
    const double smax = svd.singularValues()(0);
    const double smin = svd.singularValues()(svd.singularValues().size() - 1);
    if (smin == 0.0) return kInf;
    return smax / smin;
}

/// Default relative rank tolerance for an n x n matrix.
inline double default_rank_tol(Index n) {
    return 32.0 * static_cast<double>(n) * kEps;
}

}  // namespace daepencil
