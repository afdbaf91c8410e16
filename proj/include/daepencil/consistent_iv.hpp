#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "daepencil/core.hpp"
#include "daepencil/pencil.hpp"
#include "daepencil/subspaces.hpp"

namespace daepencil {

/// The space of consistent initial values IV = { u : M1 u in ran M0 },
/// together with the operators of the reduced first-order problem on it.
///
/// IV is the graph of the coupling map N(M0)^perp -> N(M0); `basis` is an
/// orthonormal basis of it.  The generator G satisfies
///   (iota_ran^* M0 iota_IV) G = iota_ran^* M1 iota_IV,
/// so strong solutions evolve by u(t) = iota_IV exp(-tG) iota_IV^* u(0).
/// K = iota_conull^* iota_IV is the isomorphism IV -> N(M0)^perp that
/// intertwines -G with the reduced generator A.
struct IvSpace {
    SubspaceBasis basis;      // orthonormal basis of IV, n x r
    Matrix b;                 // corange block of M1, invertible by regularity
    Matrix c;                 // corange x conull block of M1
    Matrix coupling;          // -B^{-1} C : N(M0)^perp coords -> N(M0) coords
    Matrix generator_g;       // r x r generator of the strong evolution on IV
    Matrix iso_k;             // r x r, coordinates of IV columns in N(M0)^perp

    // Retained for the membership cross-check and diagnostics.
    Matrix m1;                // copy of the pencil's M1
    SubspaceBasis range_m0;   // from the fundamental decomposition
    SubspaceBasis corange_m0;
    double gram_cond = 1.0;   // condition number of iota_ran^* M0 iota_IV

    Index ambient_dim() const { return basis.ambient_dim; }
    Index dim() const { return basis.dim(); }
};

/// Builds the consistent-initial-value space of a regular pencil.
///
/// The graph column block conull + null * coupling already has full column
/// rank r; a QR pass re-orthonormalizes it so `basis` is unitary up to
/// roundoff.  All derived blocks are computed in that orthonormal basis.
inline IvSpace compute_iv(const BlockFactorization& f) {
    const Index n = f.n;
    const Index r = f.rank;

    IvSpace iv;
    iv.b = f.b;
    iv.c = f.c;
    iv.coupling = -f.b_inv_c;
    iv.m1 = f.m1;
    iv.range_m0 = f.decomp.range_m0;
    iv.corange_m0 = f.decomp.corange_m0;

    if (r == 0) {
        iv.basis = SubspaceBasis{n, Matrix(n, 0), "IV"};
        iv.generator_g = Matrix(0, 0);
        iv.iso_k = Matrix(0, 0);
        iv.gram_cond = 1.0;
        return iv;
    }

    const Matrix graph =
        f.decomp.conull_m0.basis + f.decomp.null_m0.basis * iv.coupling;
    Eigen::HouseholderQR<Matrix> qr(graph);
    const Matrix q = Matrix(qr.householderQ()).leftCols(r);
    iv.basis = SubspaceBasis{n, q, "IV"};

    const Matrix gram = f.decomp.range_m0.basis.adjoint() * (f.m0 * q);
    const Matrix rhs = f.decomp.range_m0.basis.adjoint() * (f.m1 * q);
    Eigen::PartialPivLU<Matrix> gram_lu(gram);
    iv.generator_g = gram_lu.solve(rhs);
    iv.gram_cond = cond2(gram);
    if (!is_finite(iv.generator_g) || !std::isfinite(iv.gram_cond)) {
        throw InternalInconsistencyError(
            "compute_iv: the compression of M0 to IV is numerically singular");
    }

    iv.iso_k = f.decomp.conull_m0.basis.adjoint() * q;
    return iv;
}

/// Spectrum of -G, sorted like spectrum(); equals the pencil spectrum.
inline std::vector<Complex> generator_spectrum(const IvSpace& iv) {
    std::vector<Complex> eigs;
    if (iv.dim() == 0) return eigs;
    Eigen::ComplexEigenSolver<Matrix> es(iv.generator_g, false);
    if (es.info() != Eigen::Success) {
        throw NonConvergentError("generator_spectrum: eigensolver failed on G");
    }
    eigs.reserve(static_cast<std::size_t>(iv.dim()));
    for (Index i = 0; i < iv.dim(); ++i) eigs.push_back(-es.eigenvalues()(i));
    std::sort(eigs.begin(), eigs.end(), [](Complex a, Complex b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return eigs;
}

/// Membership test for IV, decided two ways and cross-checked.
///
/// Route 1 measures the distance of u0 to span(basis); route 2 measures the
/// defect iota_coran^* M1 u0 of the defining condition M1 u0 in ran M0.  The
/// two residuals r1, r2 obey r2 <= ||M1|| r1 and r1 <= c_B r2 with
/// c_B = sqrt(1 + ||coupling||^2) / sigma_min(B), so a disagreement beyond
/// those factors indicates a corrupted IvSpace and is refused.
inline bool iv_membership(const IvSpace& iv, const Vector& u0, double tol = 1e-10) {
    if (u0.size() != iv.ambient_dim()) {
        throw DimensionMismatchError("iv_membership: u0 has length " +
                                     std::to_string(u0.size()) + ", ambient dimension is " +
                                     std::to_string(iv.ambient_dim()));
    }
    if (!(tol > 0.0) || !std::isfinite(tol)) {
        throw DegenerateToleranceError("iv_membership: tolerance must be positive");
    }
    const double u_norm = u0.norm();
    if (u_norm == 0.0) return true;

    const double r1 = iv.basis.distance(u0) / u_norm;
    const bool in_by_basis = r1 <= tol;

    const double m1_norm = op_norm(iv.m1);
    double r2 = 0.0;
    if (iv.corange_m0.dim() > 0) {
        r2 = (iv.corange_m0.basis.adjoint() * (iv.m1 * u0)).norm() /
             (std::max(m1_norm, kEps) * u_norm);
    }
    const bool in_by_defect = r2 <= tol;

    if (in_by_basis == in_by_defect) return in_by_basis;

    // Disagreement band: tolerate it only while both residuals sit within the
    // equivalence factors of the threshold.
    const double smin_b = iv.b.size() == 0 ? kInf : sigma_min(iv.b);
    const double c_b =
        std::sqrt(1.0 + op_norm(iv.coupling) * op_norm(iv.coupling)) / smin_b;
    const double band = 10.0 * std::max(1.0, c_b * m1_norm);
    if (r1 <= band * tol && r2 <= band * tol) return in_by_basis;

    throw InternalInconsistencyError(
        "iv_membership: the basis distance and the range defect disagree "
        "beyond their equivalence band (r1=" +
        std::to_string(r1) + ", r2=" + std::to_string(r2) + ")");
}

/// Position of N(M0)^perp relative to IV, read off the coupling block
/// C = iota_coran^* M1 iota_conull.
struct IvStructure {
    bool nbot_subset_iv = false;          // N(M0)^perp inside IV, i.e. C == 0
    bool iv_meets_nbot_trivially = false;  // IV meets N(M0)^perp only in 0, i.e. C injective
};

/// An empty C (full-rank or zero M0) makes both predicates true: the empty
/// map is both the zero map and injective.
inline IvStructure iv_structure_predicates(const BlockFactorization& f,
                                           double tol = 1e-10) {
    if (!(tol > 0.0) || !std::isfinite(tol)) {
        throw DegenerateToleranceError("iv_structure_predicates: tolerance must be positive");
    }
    if (f.c.rows() == 0 || f.c.cols() == 0) return {true, true};

    const double scale = std::max(op_norm(f.m1), kEps);
    IvStructure s;
    s.nbot_subset_iv = op_norm(f.c) <= tol * scale;
    s.iv_meets_nbot_trivially =
        f.c.rows() >= f.c.cols() && sigma_min(f.c) > tol * scale;
    return s;
}

}  // namespace daepencil
