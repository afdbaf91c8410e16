#pragma once

#include "core.hpp"
#include "subspaces.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace daepencil {

/// The linear pencil M(z) = z m0 + m1 on C^n. Both coefficients are n x n.
struct Pencil {
    Matrix m0;
    Matrix m1;
    Index n = 0;

    Pencil() = default;
    Pencil(Matrix m0_, Matrix m1_) : m0(std::move(m0_)), m1(std::move(m1_)) {
        if (m0.rows() != m0.cols())
            throw NonSquareError("Pencil: m0 is " + std::to_string(m0.rows()) + "x" +
                                 std::to_string(m0.cols()));
        if (m1.rows() != m1.cols())
            throw NonSquareError("Pencil: m1 is " + std::to_string(m1.rows()) + "x" +
                                 std::to_string(m1.cols()));
        if (m0.rows() != m1.rows())
            throw DimensionMismatchError("Pencil: m0 is " + std::to_string(m0.rows()) + "x" +
                                         std::to_string(m0.cols()) + " but m1 is " +
                                         std::to_string(m1.rows()) + "x" +
                                         std::to_string(m1.cols()));
        if (m0.rows() == 0) throw InvalidArgumentError("Pencil: dimension must be at least 1");
        if (!is_finite(m0) || !is_finite(m1))
            throw InvalidArgumentError("Pencil: coefficients contain non-finite entries");
        n = m0.rows();
    }

    /// Pointwise value z m0 + m1.
    Matrix eval(Complex z) const { return z * m0 + m1; }
};

/// The pencil z m0 - m1, whose solutions run the original dynamics backwards.
inline Pencil reversed(const Pencil& p) { return Pencil(p.m0, -p.m1); }

/// Outcome of the regularity test together with the quantities it was based on.
struct RegularityReport {
    bool regular = false;
    Index rank = 0;        // rank of m0
    double sigma_min_b = 0.0;  // smallest singular value of the corner block B
    double threshold = 0.0;    // acceptance threshold tol * |m1|
    std::string detail;
};

/// Congruence-type factorization  M(z) = U1^H V1 diag(z M0~ + M1~, B) V0 U0
/// with U0, U1 unitary (stacked subspace bases), V0 unit lower and V1 unit
/// upper triangular couplers, and B invertible exactly when the pencil is
/// regular with index zero. All spectral data of the pencil is carried by the
/// reduced generator A = -M0~^{-1} M1~ acting on the rank(m0)-dimensional
/// coordinate space of N(m0)-perp.
struct BlockFactorization {
    Matrix m0;
    Matrix m1;
    FundamentalDecomposition decomp;
    Index n = 0;
    Index rank = 0;

    Matrix m0_tilde;  // compression of m0 between R(m0) and N(m0)-perp, invertible
    Matrix m1_tilde;  // reduced m1 block after eliminating the coupling through B
    Matrix b;         // compression of m1 between R(m0)-perp and N(m0)
    Matrix c;         // compression of m1 between R(m0)-perp and N(m0)-perp
    Matrix d;         // compression of m1 between R(m0) and N(m0)
    Matrix b_inv_c;   // B^{-1} C
    Matrix d_b_inv;   // D B^{-1}
    Matrix reduced_generator_a;  // A = -M0~^{-1} M1~

    /// Stacked unitary U0 = [conull^H; null^H] mapping H to split coordinates.
    Matrix u0() const {
        Matrix u(n, n);
        u.topRows(rank) = decomp.conull_m0.basis.adjoint();
        u.bottomRows(n - rank) = decomp.null_m0.basis.adjoint();
        return u;
    }

    /// Stacked unitary U1 = [range^H; corange^H].
    Matrix u1() const {
        Matrix u(n, n);
        u.topRows(rank) = decomp.range_m0.basis.adjoint();
        u.bottomRows(n - rank) = decomp.corange_m0.basis.adjoint();
        return u;
    }

    /// Unit lower triangular coupler [[I, 0], [B^{-1}C, I]].
    Matrix v0() const {
        Matrix v = Matrix::Identity(n, n);
        v.bottomLeftCorner(n - rank, rank) = b_inv_c;
        return v;
    }

    /// Unit upper triangular coupler [[I, D B^{-1}], [0, I]].
    Matrix v1() const {
        Matrix v = Matrix::Identity(n, n);
        v.topRightCorner(rank, n - rank) = d_b_inv;
        return v;
    }

    /// Reassembles z m0 + m1 from the factors.
    Matrix evaluate(Complex z) const {
        Matrix delta = Matrix::Zero(n, n);
        delta.topLeftCorner(rank, rank) = z * m0_tilde + m1_tilde;
        delta.bottomRightCorner(n - rank, n - rank) = b;
        return u1().adjoint() * v1() * delta * v0() * u0();
    }
};

namespace detail {

struct RawBlocks {
    FundamentalDecomposition decomp;
    Matrix b, c, d, e;  // e is the R(m0) x N(m0)-perp compression of m1
    Matrix m0_tilde;
};

inline RawBlocks compress_pencil(const Pencil& p, double tol) {
    RawBlocks r;
    r.decomp = fundamental_decomposition(p.m0, tol);
    r.b = compress(p.m1, r.decomp.corange_m0, r.decomp.null_m0);
    r.c = compress(p.m1, r.decomp.corange_m0, r.decomp.conull_m0);
    r.d = compress(p.m1, r.decomp.range_m0, r.decomp.null_m0);
    r.e = compress(p.m1, r.decomp.range_m0, r.decomp.conull_m0);
    r.m0_tilde = compress(p.m0, r.decomp.range_m0, r.decomp.conull_m0);
    return r;
}

}  // namespace detail

/// Regularity test: the pencil is regular with index zero iff the corner
/// block B is invertible, decided by sigma_min(B) > tol * |m1|. A full-rank
/// m0 gives an empty B, which counts as invertible; a zero m0 gives B = m1
/// up to unitaries, so regularity reduces to invertibility of m1.
inline RegularityReport is_regular(const Pencil& p, double tol = -1.0) {
    if (tol < 0.0) tol = default_rank_tol(p.n);
    const auto raw = detail::compress_pencil(p, tol);

    RegularityReport rep;
    rep.rank = raw.decomp.rank;
    rep.sigma_min_b = sigma_min(raw.b);
    rep.threshold = tol * op_norm(p.m1);
    rep.regular = rep.sigma_min_b > rep.threshold;
    if (raw.b.size() == 0) {
        rep.detail = "m0 has full rank; the corner block is empty and the pencil is regular";
        rep.regular = true;
    } else if (rep.regular) {
        rep.detail = "corner block B is invertible";
    } else {
        rep.detail =
            "corner block B is numerically singular; the pencil is singular or has index >= 1";
    }
    return rep;
}

/// Builds the block factorization. Throws NotRegularError when the corner
/// block fails the invertibility test of is_regular.
inline BlockFactorization block_factorize(const Pencil& p, double tol = -1.0) {
    if (tol < 0.0) tol = default_rank_tol(p.n);
    auto raw = detail::compress_pencil(p, tol);

    const double smin_b = sigma_min(raw.b);
    const double thresh = tol * op_norm(p.m1);
    if (raw.b.size() > 0 && smin_b <= thresh)
        throw NotRegularError("block_factorize: corner block has sigma_min " +
                              std::to_string(smin_b) + " <= " + std::to_string(thresh) +
                              "; pencil is not regular with index zero");

    BlockFactorization f;
    f.m0 = p.m0;
    f.m1 = p.m1;
    f.n = p.n;
    f.rank = raw.decomp.rank;
    f.decomp = std::move(raw.decomp);
    f.b = std::move(raw.b);
    f.c = std::move(raw.c);
    f.d = std::move(raw.d);
    f.m0_tilde = std::move(raw.m0_tilde);

    if (f.rank < f.n) {
        f.b_inv_c = Eigen::PartialPivLU<Matrix>(f.b).solve(f.c);
        // D B^{-1} = (B^{-H} D^H)^H
        f.d_b_inv =
            Eigen::PartialPivLU<Matrix>(f.b.adjoint()).solve(Matrix(f.d.adjoint())).adjoint();
    } else {
        f.b_inv_c = Matrix::Zero(0, f.rank);
        f.d_b_inv = Matrix::Zero(f.rank, 0);
    }
    f.m1_tilde = raw.e - f.d * f.b_inv_c;
    if (f.rank > 0) {
        f.reduced_generator_a = -Eigen::PartialPivLU<Matrix>(f.m0_tilde).solve(f.m1_tilde);
    } else {
        f.reduced_generator_a = Matrix::Zero(0, 0);
    }
    return f;
}

/// Resolvent M(z)^{-1} evaluated through the block factorization. Refuses
/// points numerically on the spectrum: sigma_min(z M0~ + M1~) must exceed
/// 1e-12 times its norm.
inline Matrix resolvent(const BlockFactorization& f, Complex z) {
    const Index r = f.rank;
    const Index k = f.n - r;

    // right factor V1^{-1} U1, written in the two row blocks
    Matrix top = f.decomp.range_m0.basis.adjoint();
    if (k > 0) top -= f.d_b_inv * f.decomp.corange_m0.basis.adjoint();
    Matrix ytop(r, f.n);
    if (r > 0) {
        const Matrix delta = z * f.m0_tilde + f.m1_tilde;
        Eigen::JacobiSVD<Matrix> svd(delta, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const double smax = svd.singularValues()(0);
        const double smin = svd.singularValues()(r - 1);
        if (smax == 0.0 || smin < 1e-12 * smax)
            throw SpectrumHitError("resolvent: z = (" + std::to_string(z.real()) + ", " +
                                   std::to_string(z.imag()) +
                                   ") lies on or within 1e-12 of the spectrum");
        ytop = svd.solve(top);
    }

    if (k == 0) return f.decomp.conull_m0.basis * ytop;

    const Matrix bot = f.decomp.corange_m0.basis.adjoint();
    const Matrix ybot = Eigen::PartialPivLU<Matrix>(f.b).solve(bot);
    if (r == 0) return f.decomp.null_m0.basis * ybot;
    return f.decomp.conull_m0.basis * ytop +
           f.decomp.null_m0.basis * (ybot - f.b_inv_c * ytop);
}

inline Matrix resolvent(const Pencil& p, Complex z, double tol = -1.0) {
    return resolvent(block_factorize(p, tol), z);
}

/// Spectral summary of a regular pencil. The spectrum is the eigenvalue set
/// of the reduced generator A, hence has exactly rank(m0) points counted with
/// multiplicity. s0 is the infimum over real nu of half-planes Re z > nu on
/// which the pencil is invertible with bounded inverse; in finite dimension
/// this equals the spectral abscissa.
struct SpectrumReport {
    std::vector<Complex> eigenvalues;  // sorted by real part, then imaginary part
    double spectral_abscissa = -kInf;  // -inf when the spectrum is empty
    double s0 = -kInf;
    double imag_axis_margin = kInf;  // min |Re lambda|, +inf when empty
};

inline SpectrumReport spectrum(const BlockFactorization& f) {
    SpectrumReport rep;
    if (f.rank == 0) return rep;

    Eigen::ComplexEigenSolver<Matrix> es(f.reduced_generator_a, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success)
        throw NonConvergentError("spectrum: eigenvalue iteration failed to converge");

    rep.eigenvalues.assign(es.eigenvalues().data(), es.eigenvalues().data() + f.rank);
    std::sort(rep.eigenvalues.begin(), rep.eigenvalues.end(), [](Complex a, Complex b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    rep.spectral_abscissa = -kInf;
    rep.imag_axis_margin = kInf;
    for (Complex ev : rep.eigenvalues) {
        rep.spectral_abscissa = std::max(rep.spectral_abscissa, ev.real());
        rep.imag_axis_margin = std::min(rep.imag_axis_margin, std::abs(ev.real()));
    }
    rep.s0 = rep.spectral_abscissa;
    return rep;
}

inline SpectrumReport spectrum(const Pencil& p, double tol = -1.0) {
    return spectrum(block_factorize(p, tol));
}

/// Samples |M(z)^{-1}| on the circles of radius radius, 2*radius and 4*radius
/// and returns the largest value found. For a regular pencil this stays
/// bounded as the radius grows. Requires radius > max |spectrum| + 1 so that
/// every sample point is resolvent.
inline double resolvent_bound_probe(const BlockFactorization& f, double radius,
                                    int samples = 32) {
    if (samples < 4) throw InvalidArgumentError("resolvent_bound_probe: need at least 4 samples");
    const auto rep = spectrum(f);
    double spec_radius = 0.0;
    for (Complex ev : rep.eigenvalues) spec_radius = std::max(spec_radius, std::abs(ev));
    if (!(radius > spec_radius + 1.0))
        throw InvalidArgumentError("resolvent_bound_probe: radius " + std::to_string(radius) +
                                   " must exceed max |spectrum| + 1 = " +
                                   std::to_string(spec_radius + 1.0));

    double worst = 0.0;
    for (double scale : {1.0, 2.0, 4.0}) {
        for (int j = 0; j < samples; ++j) {
            const double theta = 2.0 * M_PI * j / samples;
            const Complex z = scale * radius * Complex(std::cos(theta), std::sin(theta));
            worst = std::max(worst, op_norm(resolvent(f, z)));
        }
    }
    return worst;
}

inline double resolvent_bound_probe(const Pencil& p, double radius, int samples = 32,
                                    double tol = -1.0) {
    return resolvent_bound_probe(block_factorize(p, tol), radius, samples);
}

namespace detail {

/// Uniform double in [0, 1) with all randomness drawn from the engine state,
/// so streams are identical across standard library implementations.
inline double unit_uniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Standard normal via Box-Muller on the pinned uniform stream.
inline double std_normal(std::mt19937_64& rng) {
    double u1 = unit_uniform(rng);
    while (u1 == 0.0) u1 = unit_uniform(rng);
    const double u2 = unit_uniform(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

inline Complex complex_normal(std::mt19937_64& rng) {
    const double re = std_normal(rng);
    const double im = std_normal(rng);
    return {re, im};
}

inline Matrix gaussian_matrix(Index rows, Index cols, std::mt19937_64& rng) {
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) m(i, j) = complex_normal(rng);
    return m;
}

/// Haar-like random unitary: QR of a Gaussian matrix with the phases of the
/// R diagonal absorbed into Q.
inline Matrix random_unitary(Index n, std::mt19937_64& rng) {
    if (n == 0) return Matrix::Zero(0, 0);
    const Matrix g = gaussian_matrix(n, n, rng);
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ() * Matrix::Identity(n, n);
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Index j = 0; j < n; ++j) {
        const Complex rd = r(j, j);
        if (std::abs(rd) > 0.0) q.col(j) *= rd / std::abs(rd);
    }
    return q;
}

/// Shifts b so that its Hermitian part is at least 0.5 * I. The shifted block
/// satisfies sigma_min >= 0.5.
inline void make_accretive(Matrix& b) {
    if (b.size() == 0) return;
    const Matrix herm = 0.5 * (b + b.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(herm);
    const double lmin = es.eigenvalues()(0);
    const double shift = std::max(0.0, 0.5 - lmin);
    b += shift * Matrix::Identity(b.rows(), b.cols());
}

}  // namespace detail

/// Deterministic generator of regular index-zero pencils. m0 is Hermitian
/// positive semidefinite with the requested rank and singular values in
/// [0.5, 2); the corner block of m1 is made strictly accretive, which forces
/// regularity. When spectrum_hint is given (one value per unit of rank) the
/// reduced generator is conjugated from a diagonal with exactly those
/// eigenvalues, so spectrum(generate_regular(...)) reproduces the hint.
inline Pencil generate_regular(Index n, Index rank, std::uint64_t seed,
                               const std::vector<Complex>& spectrum_hint = {}) {
    if (n < 1) throw BadRankError("generate_regular: dimension must be at least 1");
    if (rank < 0 || rank > n)
        throw BadRankError("generate_regular: rank " + std::to_string(rank) +
                           " is outside [0, " + std::to_string(n) + "]");
    if (!spectrum_hint.empty() && static_cast<Index>(spectrum_hint.size()) != rank)
        throw BadRankError("generate_regular: spectrum hint has " +
                           std::to_string(spectrum_hint.size()) + " entries, expected " +
                           std::to_string(rank));
    for (Complex h : spectrum_hint)
        if (!std::isfinite(h.real()) || !std::isfinite(h.imag()))
            throw InvalidArgumentError("generate_regular: non-finite spectrum hint");

    std::mt19937_64 rng(seed);
    const Index k = n - rank;
    const double block_scale = 1.0 / std::sqrt(static_cast<double>(n));

    const Matrix q = detail::random_unitary(n, rng);

    Eigen::VectorXd dr(rank);
    for (Index i = 0; i < rank; ++i) dr(i) = 0.5 + 1.5 * detail::unit_uniform(rng);

    Matrix e = detail::gaussian_matrix(rank, rank, rng) * block_scale;
    Matrix d = detail::gaussian_matrix(rank, k, rng) * block_scale;
    Matrix c = detail::gaussian_matrix(k, rank, rng) * block_scale;
    Matrix b = detail::gaussian_matrix(k, k, rng) * block_scale;
    detail::make_accretive(b);

    if (!spectrum_hint.empty()) {
        Matrix target(rank, rank);
        target.setZero();
        for (Index i = 0; i < rank; ++i) target(i, i) = spectrum_hint[i];
        const Matrix w = detail::random_unitary(rank, rng);
        target = w * target * w.adjoint();
        Matrix correction = Matrix::Zero(rank, rank);
        if (k > 0) correction = d * Eigen::PartialPivLU<Matrix>(b).solve(c);
        e = -dr.asDiagonal().toDenseMatrix().cast<Complex>() * target + correction;
    }

    Matrix m1_hat(n, n);
    m1_hat.topLeftCorner(rank, rank) = e;
    m1_hat.topRightCorner(rank, k) = d;
    m1_hat.bottomLeftCorner(k, rank) = c;
    m1_hat.bottomRightCorner(k, k) = b;

    Matrix m0_hat = Matrix::Zero(n, n);
    m0_hat.topLeftCorner(rank, rank) = dr.asDiagonal().toDenseMatrix().cast<Complex>();

    const Matrix m0_raw = q * m0_hat * q.adjoint();
    Matrix m0 = 0.5 * (m0_raw + m0_raw.adjoint());  // exact Hermitian symmetry
    Matrix m1 = q * m1_hat * q.adjoint();
    return Pencil(std::move(m0), std::move(m1));
}

}  // namespace daepencil
