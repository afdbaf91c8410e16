#pragma once

#include "core.hpp"

#include <string>
#include <utility>

namespace daepencil {

/// An orthonormal basis of a subspace of C^ambient_dim, stored column-wise.
/// basis has ambient_dim rows; dim() columns; basis^H basis = I.
struct SubspaceBasis {
    Index ambient_dim = 0;
    Matrix basis;
    std::string label;

    SubspaceBasis() = default;
    SubspaceBasis(Index ambient, Matrix b, std::string name)
        : ambient_dim(ambient), basis(std::move(b)), label(std::move(name)) {}

    Index dim() const { return basis.cols(); }

    /// Orthogonal projection of v onto the subspace.
    Vector project(const Vector& v) const { return basis * (basis.adjoint() * v); }

    /// Coordinates of the projection of v, i.e. basis^H v.
    Vector coordinates(const Vector& v) const { return basis.adjoint() * v; }

    /// Euclidean distance from v to the subspace.
    double distance(const Vector& v) const { return (v - project(v)).norm(); }
};

/// The four fundamental subspaces of a square matrix m0, each orthonormal.
/// null_m0 + conull_m0 and range_m0 + corange_m0 are orthogonal splittings
/// of the ambient space; rank = dim range_m0 = dim conull_m0.
struct FundamentalDecomposition {
    SubspaceBasis null_m0;     // N(m0)
    SubspaceBasis conull_m0;   // N(m0) orthogonal complement
    SubspaceBasis range_m0;    // R(m0)
    SubspaceBasis corange_m0;  // R(m0) orthogonal complement
    Index rank = 0;
    double tolerance_used = 0.0;
};

/// Rank decision by SVD with relative cutoff tol * sigma_max. Singular values
/// at or below the cutoff count as zero. Refuses to decide when the cutoff
/// lands inside a cluster: the largest discarded and the smallest kept value
/// must be separated from the cutoff by at least a factor of 10 on at least
/// one side, otherwise the rank is reported as ambiguous.
inline FundamentalDecomposition fundamental_decomposition(const Matrix& m0, double tol = -1.0) {
    if (m0.rows() != m0.cols())
        throw NonSquareError("fundamental_decomposition: matrix is " + std::to_string(m0.rows()) +
                             "x" + std::to_string(m0.cols()));
    if (!is_finite(m0)) throw InvalidArgumentError("fundamental_decomposition: non-finite entries");

    const Index n = m0.rows();
    if (tol < 0.0) tol = default_rank_tol(n);

    Eigen::JacobiSVD<Matrix> svd(m0, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();

    const double smax   = (n > 0) ? sv(0) : 0.0;
    const double cutoff = tol * smax;

    Index rank = 0;
    while (rank < n && sv(rank) > cutoff) ++rank;

    if (rank > 0 && rank < n && smax > 0.0) {
        const double smallest_kept   = sv(rank - 1);
        const double largest_dropped = sv(rank);
        if (largest_dropped > cutoff / 10.0 && smallest_kept < cutoff * 10.0)
            throw DegenerateToleranceError(
                "fundamental_decomposition: singular values " + std::to_string(smallest_kept) +
                " and " + std::to_string(largest_dropped) + " straddle the cutoff " +
                std::to_string(cutoff) + " within a factor of 10; rank is ambiguous");
    }

    FundamentalDecomposition d;
    d.rank           = rank;
    d.tolerance_used = tol;
    d.conull_m0  = SubspaceBasis(n, svd.matrixV().leftCols(rank), "N(M0) complement");
    d.null_m0    = SubspaceBasis(n, svd.matrixV().rightCols(n - rank), "N(M0)");
    d.range_m0   = SubspaceBasis(n, svd.matrixU().leftCols(rank), "R(M0)");
    d.corange_m0 = SubspaceBasis(n, svd.matrixU().rightCols(n - rank), "R(M0) complement");
    return d;
}

/// Compression left^H t right of an operator to a pair of subspaces.
inline Matrix compress(const Matrix& t, const SubspaceBasis& left, const SubspaceBasis& right) {
    if (left.ambient_dim != t.rows() || right.ambient_dim != t.cols())
        throw DimensionMismatchError("compress: operator is " + std::to_string(t.rows()) + "x" +
                                     std::to_string(t.cols()) + ", ambient dims are " +
                                     std::to_string(left.ambient_dim) + " and " +
                                     std::to_string(right.ambient_dim));
    return left.basis.adjoint() * t * right.basis;
}

/// Membership test relative to |v|: true iff dist(v, span) <= tol |v|.
/// The zero vector belongs to every subspace.
inline bool subspace_contains(const SubspaceBasis& s, const Vector& v, double tol = 1e-10) {
    if (v.size() != s.ambient_dim)
        throw DimensionMismatchError("subspace_contains: vector has size " +
                                     std::to_string(v.size()) + ", ambient dim is " +
                                     std::to_string(s.ambient_dim));
    const double nv = v.norm();
    if (nv == 0.0) return true;
    return s.distance(v) <= tol * nv;
}

}  // namespace daepencil
