#pragma once

#include <array>
#include <cmath>
#include <utility>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "daepencil/core.hpp"

namespace daepencil {

struct ExpmResult {
    Matrix value;
    int scaling_squaring_order = 0;  // number of squarings taken by the Pade path
};

namespace detail {

inline double one_norm(const Matrix& a) {
    if (a.size() == 0) return 0.0;
    return a.cwiseAbs().colwise().sum().maxCoeff();
}

// Diagonal Pade approximant r_m(a) = (V - U)^{-1}(V + U) with the classical
// coefficient tables; `a` must already be scaled below the matching theta.
inline Matrix pade_approximant(const Matrix& a, int m) {
    const Index n = a.rows();
    const Matrix id = Matrix::Identity(n, n);
    const Matrix a2 = a * a;
    Matrix u, v;
    if (m == 3) {
        static constexpr std::array<double, 4> b{120, 60, 12, 1};
        u = a * (b[3] * a2 + b[1] * id);
        v = b[2] * a2 + b[0] * id;
    } else if (m == 5) {
        static constexpr std::array<double, 6> b{30240, 15120, 3360, 420, 30, 1};
        const Matrix a4 = a2 * a2;
        u = a * (b[5] * a4 + b[3] * a2 + b[1] * id);
        v = b[4] * a4 + b[2] * a2 + b[0] * id;
    } else if (m == 7) {
        static constexpr std::array<double, 8> b{17297280, 8648640, 1995840, 277200,
                                                 25200,    1512,    56,      1};
        const Matrix a4 = a2 * a2;
        const Matrix a6 = a4 * a2;
        u = a * (b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id);
        v = b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
    } else if (m == 9) {
        static constexpr std::array<double, 10> b{17643225600, 8821612800, 2075673600,
                                                  302702400,   30270240,   2162160,
                                                  110880,      3960,       90,
                                                  1};
        const Matrix a4 = a2 * a2;
        const Matrix a6 = a4 * a2;
        const Matrix a8 = a6 * a2;
        u = a * (b[9] * a8 + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id);
        v = b[8] * a8 + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
    } else {
        static constexpr std::array<double, 14> b{64764752532480000.0, 32382376266240000.0,
                                                  7771770303897600.0,  1187353796428800.0,
                                                  129060195264000.0,   10559470521600.0,
                                                  670442572800.0,      33522128640.0,
                                                  1323241920.0,        40840800.0,
                                                  960960.0,            16380.0,
                                                  182.0,               1.0};
        const Matrix a4 = a2 * a2;
        const Matrix a6 = a4 * a2;
        u = a * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 +
                 b[3] * a2 + b[1] * id);
        v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2 +
            b[0] * id;
    }
    return Eigen::PartialPivLU<Matrix>(v - u).solve(v + u);
}

inline Matrix expm_pade(const Matrix& a, int& squarings) {
    static constexpr double theta3 = 1.495585217958292e-2;
    static constexpr double theta5 = 2.539398330063230e-1;
    static constexpr double theta7 = 9.504178996162932e-1;
    static constexpr double theta9 = 2.097847961257068;
    static constexpr double theta13 = 5.371920351148152;

    const double nrm = one_norm(a);
    squarings = 0;
    if (nrm <= theta9) {
        const int m = nrm <= theta3 ? 3 : nrm <= theta5 ? 5 : nrm <= theta7 ? 7 : 9;
        return pade_approximant(a, m);
    }
    squarings = static_cast<int>(std::ceil(std::log2(nrm / theta13)));
    Matrix r = pade_approximant(a / std::exp2(squarings), 13);
    for (int i = 0; i < squarings; ++i) r = Matrix(r * r);
    return r;
}

}  // namespace detail

/// exp(t*a) by an eigendecomposition when `a` is diagonalizable with a
/// well-conditioned eigenvector matrix, otherwise by scaling-and-squaring
/// with diagonal Pade approximants.
inline ExpmResult expm(const Matrix& a, double t = 1.0) {
    if (a.rows() != a.cols()) throw NonSquareError("expm: matrix must be square");
    if (!std::isfinite(t)) throw InvalidArgumentError("expm: time must be finite");
    if (!is_finite(a)) throw InvalidArgumentError("expm: matrix has non-finite entries");

    const Index n = a.rows();
    ExpmResult res;
    if (n == 0) {
        res.value = Matrix(0, 0);
        return res;
    }

    const Matrix at = t * a;
    Eigen::ComplexEigenSolver<Matrix> es(at, /*computeEigenvectors=*/true);
    if (es.info() == Eigen::Success) {
        const Matrix v = es.eigenvectors();
        const double cv = cond2(v);
        if (std::isfinite(cv) && cv < 1e6) {
            Vector el(n);
            for (Index i = 0; i < n; ++i) el(i) = std::exp(es.eigenvalues()(i));
            if (!el.allFinite()) throw OverflowError("expm: exp(t*a) overflows");
            res.value = v * el.asDiagonal() * v.inverse();
            if (!is_finite(res.value)) throw OverflowError("expm: exp(t*a) overflows");
            return res;
        }
    }

    res.value = detail::expm_pade(at, res.scaling_squaring_order);
    if (!is_finite(res.value)) throw OverflowError("expm: exp(t*a) overflows");
    return res;
}

/// exp(t*a) evaluated repeatedly: the spectral data of `a` is computed once
/// and reused across times.  Falls back to the Pade path per call when the
/// eigenvector basis is ill-conditioned.
class Propagator {
  public:
    Propagator() = default;

    explicit Propagator(Matrix a) : a_(std::move(a)) {
        if (a_.rows() != a_.cols()) throw NonSquareError("Propagator: matrix must be square");
        if (!is_finite(a_)) {
            throw InvalidArgumentError("Propagator: matrix has non-finite entries");
        }
        const Index n = a_.rows();
        if (n == 0) {
            vec_cond_ = 1.0;
            abscissa_ = -kInf;
            return;
        }
        Eigen::ComplexEigenSolver<Matrix> es(a_, /*computeEigenvectors=*/true);
        if (es.info() == Eigen::Success) {
            lambda_ = es.eigenvalues();
            abscissa_ = lambda_.real().maxCoeff();
            const double cv = cond2(es.eigenvectors());
            vec_cond_ = std::isfinite(cv) ? std::min(cv, 1e15) : 1e15;
            if (vec_cond_ < 1e6) {
                eigen_path_ = true;
                v_ = es.eigenvectors();
                v_inv_ = v_.inverse();
            }
        } else {
            vec_cond_ = 1e15;
            abscissa_ = op_norm(a_);  // Re(lambda) <= |a| always
        }
    }

    Index dim() const { return a_.rows(); }
    bool uses_eigen_path() const { return eigen_path_; }
    double vec_cond() const { return vec_cond_; }
    double abscissa() const { return abscissa_; }

    Matrix at(double t) const {
        if (dim() == 0) return Matrix(0, 0);
        if (!eigen_path_) return expm(a_, t).value;
        Matrix r = v_ * scaled_exponentials(t).asDiagonal() * v_inv_;
        if (!is_finite(r)) throw OverflowError("Propagator: exp(t*a) overflows");
        return r;
    }

    Vector apply(double t, const Vector& x) const {
        if (x.size() != dim()) {
            throw DimensionMismatchError("Propagator: vector length does not match");
        }
        if (dim() == 0) return Vector(0);
        if (!eigen_path_) return at(t) * x;
        Vector r = v_ * scaled_exponentials(t).cwiseProduct(v_inv_ * x);
        if (!r.allFinite()) throw OverflowError("Propagator: exp(t*a) overflows");
        return r;
    }

  private:
    Vector scaled_exponentials(double t) const {
        Vector el(lambda_.size());
        for (Index i = 0; i < lambda_.size(); ++i) el(i) = std::exp(t * lambda_(i));
        if (!el.allFinite()) throw OverflowError("Propagator: exp(t*a) overflows");
        return el;
    }

    Matrix a_;
    bool eigen_path_ = false;
    Matrix v_, v_inv_;
    Vector lambda_;
    double vec_cond_ = 1.0;
    double abscissa_ = -kInf;
};

}  // namespace daepencil
