#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "daepencil/consistent_iv.hpp"
#include "daepencil/core.hpp"
#include "daepencil/pencil.hpp"
#include "daepencil/solvers.hpp"
#include "daepencil/subspaces.hpp"

namespace daepencil {

enum class DichotomyVerdict {
    exponentially_stable,
    dichotomy,
    marginal,
    unstable_no_dichotomy,
};

inline const char* to_string(DichotomyVerdict v) {
    switch (v) {
        case DichotomyVerdict::exponentially_stable: return "exponentially_stable";
        case DichotomyVerdict::dichotomy: return "dichotomy";
        case DichotomyVerdict::marginal: return "marginal";
        default: return "unstable_no_dichotomy";
    }
}

/// Spectral stability classification of a regular pencil.
///
/// The verdict is decided by the spectrum relative to a protective strip of
/// half-width margin_tol around the imaginary axis; eigenvalues inside the
/// strip yield `marginal` and no dichotomy claim.  projector_p and the bases
/// are only present for the two verdicts that assert a splitting; s_basis and
/// t_basis are given in N(M0)-perp coordinates (the domain of A).
struct DichotomyReport {
    SpectrumReport spectrum;
    DichotomyVerdict verdict = DichotomyVerdict::marginal;
    double margin = 0.0;             // distance of the spectrum to the imaginary axis
    double margin_tol = 0.0;
    std::optional<Matrix> projector_p;
    std::optional<SubspaceBasis> s_basis;
    std::optional<SubspaceBasis> t_basis;
    double decay_rate = 0.0;              // rho of the dichotomy estimate, = margin
    double nonnormality_constant = 1.0;   // C of |u(t)| <= C e^{-rho t} |u0|

    Index dim_s() const { return s_basis ? s_basis->dim() : 0; }
    Index dim_t() const { return t_basis ? t_basis->dim() : 0; }
};

/// Dunford projection onto the stable spectral part of `a`, computed by
/// partitioning the eigendecomposition by the sign of the real part.
inline Matrix dunford_projection(const Matrix& a, double margin_tol = -1.0) {
    if (a.rows() != a.cols()) throw NonSquareError("dunford_projection: matrix must be square");
    const Index n = a.rows();
    if (n == 0) return Matrix(0, 0);
    if (margin_tol < 0.0) margin_tol = 1e-8 * std::max(1.0, op_norm(a));

    Eigen::ComplexEigenSolver<Matrix> es(a, /*computeEigenvectors=*/true);
    if (es.info() != Eigen::Success) {
        throw NonConvergentError("dunford_projection: eigensolver failed");
    }
    for (Index i = 0; i < n; ++i) {
        if (std::abs(es.eigenvalues()(i).real()) <= margin_tol) {
            throw SpectrumTooCloseToAxisError(
                "dunford_projection: eigenvalue " + std::to_string(es.eigenvalues()(i).real()) +
                (es.eigenvalues()(i).imag() < 0 ? "-" : "+") +
                std::to_string(std::abs(es.eigenvalues()(i).imag())) +
                "i lies within " + std::to_string(margin_tol) + " of the imaginary axis");
        }
    }
    Vector gate(n);
    Index stable_count = 0;
    for (Index i = 0; i < n; ++i) {
        const bool stable = es.eigenvalues()(i).real() < 0.0;
        gate(i) = stable ? Complex(1, 0) : Complex(0, 0);
        stable_count += stable ? 1 : 0;
    }
    // One-sided spectra need no eigenvector basis; this also covers
    // defective matrices whose eigenvectors are numerically dependent.
    if (stable_count == n) return Matrix::Identity(n, n);
    if (stable_count == 0) return Matrix::Zero(n, n);

    const Matrix v = es.eigenvectors();
    const Matrix p = v * gate.asDiagonal() * Eigen::PartialPivLU<Matrix>(v).solve(
                                                 Matrix(Matrix::Identity(n, n)));
    if (!is_finite(p)) {
        throw NonConvergentError("dunford_projection: eigenvector basis is numerically singular");
    }
    return p;
}

namespace detail {

// Orthonormal basis of the range of a (possibly oblique) projector with the
// given rank, via the dominant left singular vectors.
inline Matrix projector_range_basis(const Matrix& p, Index rank) {
    if (rank == 0) return Matrix(p.rows(), 0);
    Eigen::JacobiSVD<Matrix> svd(p, Eigen::ComputeThinU);
    return svd.matrixU().leftCols(rank);
}

}  // namespace detail

/// Stability and dichotomy classification from the pencil spectrum.
inline DichotomyReport classify(const Pencil& p, double margin_tol = -1.0) {
    const auto f = block_factorize(p);
    const Matrix& a = f.reduced_generator_a;
    if (margin_tol < 0.0) margin_tol = 1e-8 * std::max(1.0, op_norm(a));

    DichotomyReport rep;
    rep.spectrum = spectrum(f);
    rep.margin = rep.spectrum.imag_axis_margin;
    rep.margin_tol = margin_tol;

    Index n_left = 0, n_right = 0;
    for (Complex ev : rep.spectrum.eigenvalues) (ev.real() < 0.0 ? n_left : n_right) += 1;

    if (rep.spectrum.spectral_abscissa < -margin_tol) {
        rep.verdict = DichotomyVerdict::exponentially_stable;
    } else if (rep.margin > margin_tol && n_left > 0 && n_right > 0) {
        rep.verdict = DichotomyVerdict::dichotomy;
    } else if (rep.margin <= margin_tol) {
        rep.verdict = DichotomyVerdict::marginal;
    } else {
        rep.verdict = DichotomyVerdict::unstable_no_dichotomy;
    }

    const bool splits = rep.verdict == DichotomyVerdict::exponentially_stable ||
                        rep.verdict == DichotomyVerdict::dichotomy;
    if (!splits) return rep;

    rep.decay_rate = rep.margin;

    // Envelope constant: conditioning of the splitting of the IV generator.
    // iota_IV is isometric, so |u(t)| = |exp(-tG) xi| <= kappa(V_G) e^{-rho t} |u0|
    // holds in the ambient norm for consistent data in S.
    const auto iv = compute_iv(f);
    if (iv.dim() > 0) {
        Eigen::ComplexEigenSolver<Matrix> es(iv.generator_g, /*computeEigenvectors=*/true);
        double kappa = es.info() == Eigen::Success ? cond2(es.eigenvectors()) : kInf;
        if (!std::isfinite(kappa)) kappa = 1e15;  // defective: envelope still reported, loosely
        rep.nonnormality_constant = std::max(1.0, std::min(kappa, 1e15));
    }

    rep.projector_p = dunford_projection(a, margin_tol);
    const auto& proj = *rep.projector_p;
    rep.s_basis = SubspaceBasis{f.rank, detail::projector_range_basis(proj, n_left), "S"};
    rep.t_basis = SubspaceBasis{
        f.rank,
        detail::projector_range_basis(Matrix(Matrix::Identity(f.rank, f.rank) - proj), n_right),
        "T"};
    return rep;
}

/// The stable and unstable subspaces in all three coordinate systems:
/// N(M0)-perp (mild), IV coordinates (strong), and the ambient space.
struct SplitSubspaces {
    SubspaceBasis s_mild, t_mild;
    SubspaceBasis s_strong, t_strong;
    SubspaceBasis s_ambient, t_ambient;
    double direct_sum_residual = 0.0;   // |E_S - P|, E_S the oblique projector onto S along T
    double invariance_residual = 0.0;   // worst sampled defect of M(z)^{-1}M0 invariance of S
    double decay_rate = 0.0;
    double nonnormality_constant = 1.0;
};

namespace detail {

// Distance of each column image to the span of an orthonormal basis,
// relative to the column norm; zero columns contribute nothing.
inline double span_defect(const Matrix& images, const Matrix& basis) {
    double worst = 0.0;
    for (Index j = 0; j < images.cols(); ++j) {
        const Vector c = images.col(j);
        const double nc = c.norm();
        if (nc < 1e-300) continue;
        const Vector proj = basis * (basis.adjoint() * c);
        worst = std::max(worst, (c - proj).norm() / nc);
    }
    return worst;
}

}  // namespace detail

/// Splits the reduced space along the Dunford projection and transports the
/// pieces to IV and ambient coordinates through K.  The direct-sum residual
/// compares the oblique projector rebuilt from the bases against P; the
/// invariance residual samples containment of (M(z)^{-1}M0)[S] in S on a circle enclosing
/// the spectrum.
inline SplitSubspaces split_subspaces(const BlockFactorization& f, const IvSpace& iv,
                                      const DichotomyReport& rep, int invariance_samples = 20) {
    const bool splits = rep.verdict == DichotomyVerdict::exponentially_stable ||
                        rep.verdict == DichotomyVerdict::dichotomy;
    if (!splits || !rep.projector_p || !rep.s_basis || !rep.t_basis) {
        throw NoDichotomyError(std::string("split_subspaces: verdict '") +
                               to_string(rep.verdict) + "' asserts no splitting");
    }
    const Index r = f.rank;
    SplitSubspaces out;
    out.decay_rate = rep.decay_rate;
    out.nonnormality_constant = rep.nonnormality_constant;
    out.s_mild = *rep.s_basis;
    out.t_mild = *rep.t_basis;

    const Index ks = out.s_mild.dim();
    const Index kt = out.t_mild.dim();

    auto through_k_inverse = [&](const Matrix& cols, const char* label) {
        if (cols.cols() == 0) return SubspaceBasis{r, Matrix(r, 0), label};
        const Matrix mapped = Eigen::PartialPivLU<Matrix>(iv.iso_k).solve(cols);
        Eigen::HouseholderQR<Matrix> qr(mapped);
        return SubspaceBasis{r, Matrix(qr.householderQ()).leftCols(cols.cols()), label};
    };
    out.s_strong = through_k_inverse(out.s_mild.basis, "S");
    out.t_strong = through_k_inverse(out.t_mild.basis, "T");
    out.s_ambient = SubspaceBasis{f.n, iv.basis.basis * out.s_strong.basis, "S"};
    out.t_ambient = SubspaceBasis{f.n, iv.basis.basis * out.t_strong.basis, "T"};

    if (r == 0) return out;

    // Oblique projector onto S along T, rebuilt from the bases.
    Matrix st(r, r);
    st.leftCols(ks) = out.s_mild.basis;
    st.rightCols(kt) = out.t_mild.basis;
    Matrix gate = Matrix::Zero(r, r);
    gate.topLeftCorner(ks, ks) = Matrix::Identity(ks, ks);
    const Matrix oblique =
        st * gate * Eigen::PartialPivLU<Matrix>(st).solve(Matrix(Matrix::Identity(r, r)));
    out.direct_sum_residual = op_norm(Matrix(oblique - *rep.projector_p));

    double spec_radius = 0.0;
    for (Complex ev : rep.spectrum.eigenvalues) spec_radius = std::max(spec_radius, std::abs(ev));
    const double rho_z = 2.0 * (spec_radius + 1.0);
    for (int k = 0; k < invariance_samples; ++k) {
        const double th = 2.0 * M_PI * k / invariance_samples;
        const Complex z = rho_z * Complex(std::cos(th), std::sin(th));
        const Matrix images = resolvent(f, z) * (f.m0 * out.s_ambient.basis);
        out.invariance_residual =
            std::max(out.invariance_residual, detail::span_defect(images, out.s_ambient.basis));
    }
    return out;
}

struct DecayCheck {
    double fitted_rate = 0.0;  // least-squares slope of log|u| on the grid
    bool envelope_ok = false;
};

namespace detail {

inline double fit_log_slope(const std::vector<double>& times, const std::vector<double>& norms) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (norms[i] < 1e-290) continue;
        const double y = std::log(norms[i]);
        sx += times[i];
        sy += y;
        sxx += times[i] * times[i];
        sxy += times[i] * y;
        ++m;
    }
    if (m < 2) return 0.0;
    const double denom = m * sxx - sx * sx;
    if (denom == 0.0) return 0.0;
    return (m * sxy - sx * sy) / denom;
}

}  // namespace detail

/// Empirical check of the dichotomy estimate for a datum in S or in T.
///
/// For u0 in S the forward trajectory must obey |u(t)| <= 1.01 C e^{-rho t}|u0|.
/// For u0 in T the same envelope is checked on the reversed pencil's
/// trajectory, which certifies the forward growth bound by the decay-growth
/// duality.  The fitted rate always refers to the simulated (decaying) flow.
inline DecayCheck verify_decay(const Pencil& p, const SplitSubspaces& split, const Vector& u0,
                               double horizon, int grid) {
    if (!(horizon > 0.0) || grid < 2) {
        throw InvalidArgumentError("verify_decay: need positive horizon and at least 2 points");
    }
    DecayCheck out;
    if (u0.norm() == 0.0) {
        out.envelope_ok = true;
        return out;
    }

    const double member_tol = 1e-8;
    const bool in_s = split.s_ambient.distance(u0) <= member_tol * u0.norm();
    const bool in_t = split.t_ambient.distance(u0) <= member_tol * u0.norm();
    if (!in_s && !in_t) {
        throw InvalidArgumentError(
            "verify_decay: u0 lies in neither the stable nor the unstable subspace");
    }

    const Pencil q = in_s ? p : reversed(p);
    const auto f = block_factorize(q);
    const auto iv = compute_iv(f);
    std::vector<double> times(static_cast<std::size_t>(grid));
    for (int i = 0; i < grid; ++i) {
        times[static_cast<std::size_t>(i)] = horizon * static_cast<double>(i) / (grid - 1);
    }
    times.front() = 0.0;

    MildOptions opts;
    opts.internal_checks = false;
    const Trajectory traj = solve_mild(f, iv, u0, times, opts);

    std::vector<double> norms(traj.states.size());
    for (std::size_t i = 0; i < traj.states.size(); ++i) norms[i] = traj.states[i].norm();

    const double c = split.nonnormality_constant;
    const double rho = split.decay_rate;
    out.envelope_ok = true;
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double bound = 1.01 * c * std::exp(-rho * times[i]) * u0.norm();
        if (norms[i] > bound) {
            out.envelope_ok = false;
            break;
        }
    }
    out.fitted_rate = detail::fit_log_slope(times, norms);
    return out;
}

}  // namespace daepencil
