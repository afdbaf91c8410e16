#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "daepencil/consistent_iv.hpp"
#include "daepencil/core.hpp"
#include "daepencil/expm.hpp"
#include "daepencil/pencil.hpp"
#include "daepencil/quadrature.hpp"

namespace daepencil {

enum class TrajectoryKind { strong, mild };

inline const char* to_string(TrajectoryKind k) {
    return k == TrajectoryKind::strong ? "strong" : "mild";
}

/// A sampled solution of M0 u' + M1 u = 0.
///
/// states[0] always holds the given datum.  Mild solutions are L2-class
/// objects; their continuous representative for t > 0 can differ from the
/// datum in the N(M0) components, and `jump` records (u0_given, u(0+)).
/// The attainment M0 u(0+) = M0 u0_given holds regardless.
struct Trajectory {
    std::vector<double> times;
    std::vector<Vector> states;
    TrajectoryKind kind = TrajectoryKind::strong;
    std::optional<std::pair<Vector, Vector>> jump;
};

namespace detail {

inline void validate_times(const std::vector<double>& times) {
    if (times.empty()) throw InvalidArgumentError("time grid must be non-empty");
    if (times.front() != 0.0) throw InvalidArgumentError("time grid must start at 0");
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!std::isfinite(times[i])) throw InvalidArgumentError("time grid must be finite");
        if (i > 0 && !(times[i] > times[i - 1])) {
            throw InvalidArgumentError("time grid must be strictly increasing");
        }
    }
}

}  // namespace detail

/// Continuous strong solution u(t) = iota_IV exp(-tG) iota_IV^* u0.
class StrongSolution {
  public:
    StrongSolution(const IvSpace& iv, const Vector& u0, double tol = 1e-9)
        : basis_(iv.basis.basis),
          g_(iv.generator_g),
          prop_(Matrix(-iv.generator_g)),
          coords_(iv.basis.coordinates(u0)) {
        if (!iv_membership(iv, u0, tol)) {
            throw InconsistentInitialValueError(
                "solve_strong: u0 is not a consistent initial value (distance " +
                std::to_string(iv.basis.distance(u0)) +
                " from IV); use solve_mild for arbitrary data");
        }
    }

    Vector operator()(double t) const { return basis_ * prop_.apply(t, coords_); }

    Vector derivative(double t) const {
        return Vector(-(basis_ * (g_ * prop_.apply(t, coords_))));
    }

  private:
    Matrix basis_;
    Matrix g_;
    Propagator prop_;
    Vector coords_;
};

/// Continuous representative of the mild solution for arbitrary u0:
/// x(t) = exp(tA) iota_{N-perp}^* u0, u(t) = iota_{N-perp} x + iota_N coupling x.
class MildSolution {
  public:
    MildSolution(const BlockFactorization& f, const IvSpace& iv, const Vector& u0)
        : prop_(f.reduced_generator_a) {
        if (u0.size() != f.n) {
            throw DimensionMismatchError("solve_mild: u0 has length " +
                                         std::to_string(u0.size()) + ", pencil dimension is " +
                                         std::to_string(f.n));
        }
        j_ = f.decomp.conull_m0.basis + f.decomp.null_m0.basis * iv.coupling;
        x0_ = f.decomp.conull_m0.basis.adjoint() * u0;
        j_norm_ = op_norm(j_);
    }

    Vector operator()(double t) const { return j_ * prop_.apply(t, x0_); }

    Vector u0_plus() const { return (*this)(0.0); }

    // |u(t)| <= envelope_const * exp(envelope_rate * t).
    double envelope_rate() const { return prop_.abscissa(); }
    double envelope_const() const { return j_norm_ * prop_.vec_cond() * x0_.norm(); }

  private:
    Matrix j_;
    Propagator prop_;
    Vector x0_;
    double j_norm_ = 0.0;
};

/// ||M0 u(t) + int_0^t M1 u ds - M0 u0|| for the continuous representative.
inline double integrated_identity_residual(const BlockFactorization& f, const MildSolution& sol,
                                           const Vector& u0, double t, double quad_tol = 1e-9) {
    const Vector integral = adaptive_simpson(
        std::function<Vector(double)>([&](double s) { return Vector(f.m1 * sol(s)); }), 0.0, t,
        quad_tol);
    return (f.m0 * sol(t) + integral - f.m0 * u0).norm();
}

/// ||iota_corange^* M1 u||, the mild constraint that u(t) stays in IV.
inline double mild_constraint_residual(const BlockFactorization& f, const Vector& u) {
    if (f.rank == f.n) return 0.0;
    return (f.decomp.corange_m0.basis.adjoint() * (f.m1 * u)).norm();
}

inline Trajectory solve_strong(const IvSpace& iv, const Vector& u0,
                               const std::vector<double>& times, double tol = 1e-9) {
    detail::validate_times(times);
    if (u0.size() != iv.ambient_dim()) {
        throw DimensionMismatchError("solve_strong: u0 does not match the ambient dimension");
    }
    const StrongSolution sol(iv, u0, tol);
    Trajectory traj;
    traj.kind = TrajectoryKind::strong;
    traj.times = times;
    traj.states.reserve(times.size());
    traj.states.push_back(u0);
    for (std::size_t i = 1; i < times.size(); ++i) traj.states.push_back(sol(times[i]));
    return traj;
}

struct MildOptions {
    bool internal_checks = true;
    double quad_tol = 1e-9;         // refinement target of the identity quadrature
    double coincidence_tol = 1e-9;  // mild-extends-strong comparison when u0 in IV
};

/// Mild solution for arbitrary data.  The returned trajectory stores the
/// given u0 at t=0 and the continuous representative afterwards.
///
/// With internal checks on, the attainment M0 u(0+) = M0 u0, the integrated
/// identity at the mid and final grid times, and (for consistent data) the
/// coincidence with the strong solution are verified before returning.
inline Trajectory solve_mild(const BlockFactorization& f, const IvSpace& iv, const Vector& u0,
                             const std::vector<double>& times, const MildOptions& opts = {}) {
    detail::validate_times(times);
    const MildSolution sol(f, iv, u0);
    const Vector u0p = sol.u0_plus();

    Trajectory traj;
    traj.kind = TrajectoryKind::mild;
    traj.times = times;
    traj.states.reserve(times.size());
    traj.states.push_back(u0);
    for (std::size_t i = 1; i < times.size(); ++i) traj.states.push_back(sol(times[i]));
    traj.jump = std::make_pair(u0, u0p);

    if (!opts.internal_checks) return traj;

    const double m0_scale = std::max(1.0, op_norm(f.m0) * u0.norm());
    const double attainment = (f.m0 * (u0p - u0)).norm();
    if (attainment > 1e-10 * m0_scale) {
        throw InternalInconsistencyError(
            "solve_mild: the datum is not attained, |M0(u(0+) - u0)| = " +
            std::to_string(attainment));
    }

    // The identity is checked at the mid and final grid times; the absolute
    // budget follows the contract, the relative term covers growing modes.
    double sup_norm = u0.norm();
    for (const Vector& s : traj.states) sup_norm = std::max(sup_norm, s.norm());
    for (std::size_t i : {times.size() / 2, times.size() - 1}) {
        const double t = times[i];
        if (t == 0.0) continue;
        const double resid = integrated_identity_residual(f, sol, u0, t, opts.quad_tol);
        const double budget =
            1e-7 * (1.0 + u0.norm()) + 1e-8 * (1.0 + t) * op_norm(f.m1) * sup_norm;
        if (resid > budget) {
            throw InternalInconsistencyError(
                "solve_mild: integrated identity residual " + std::to_string(resid) +
                " exceeds " + std::to_string(budget) + " at t=" + std::to_string(t));
        }
    }

    if (iv_membership(iv, u0, opts.coincidence_tol)) {
        const StrongSolution strong(iv, u0, opts.coincidence_tol);
        for (std::size_t i = 1; i < times.size(); ++i) {
            const Vector us = strong(times[i]);
            const double gap = (traj.states[i] - us).norm();
            if (gap > opts.coincidence_tol * (1.0 + u0.norm() + us.norm())) {
                throw InternalInconsistencyError(
                    "solve_mild: trajectory departs from the strong solution by " +
                    std::to_string(gap) + " at t=" + std::to_string(times[i]));
            }
        }
    }
    return traj;
}

/// Backward evolution: the mild solution of the reversed pencil (M0, -M1),
/// which solves M0 w' - M1 w = 0.  `f` and `iv` must come from reversed(p).
inline Trajectory solve_backward(const BlockFactorization& f, const IvSpace& iv,
                                 const Vector& w0, const std::vector<double>& times,
                                 const MildOptions& opts = {}) {
    return solve_mild(f, iv, w0, times, opts);
}

/// Forward-backward duality defect: evolve u over [0, T], feed u(T) to the
/// reversed pencil, and return max_t |w(t) - u(T - t)| over interior grid
/// times.  Vanishes for exact solution operators.
inline double duality_check(const Pencil& p, const Vector& u0, double big_t, int grid) {
    if (!(big_t > 0.0) || !std::isfinite(big_t)) {
        throw InvalidArgumentError("duality_check: horizon must be positive and finite");
    }
    if (grid < 3) throw InvalidArgumentError("duality_check: need at least 3 grid points");

    const auto f = block_factorize(p);
    const auto iv = compute_iv(f);
    const auto fr = block_factorize(reversed(p));
    const auto ivr = compute_iv(fr);

    std::vector<double> times(static_cast<std::size_t>(grid));
    for (int i = 0; i < grid; ++i) {
        times[static_cast<std::size_t>(i)] = big_t * static_cast<double>(i) / (grid - 1);
    }
    times.front() = 0.0;
    times.back() = big_t;

    MildOptions opts;
    opts.internal_checks = false;
    const Trajectory u = solve_mild(f, iv, u0, times, opts);
    const Trajectory w = solve_backward(fr, ivr, u.states.back(), times, opts);

    double worst = 0.0;
    for (int i = 1; i + 1 < grid; ++i) {
        const auto wi = static_cast<std::size_t>(i);
        const auto ui = static_cast<std::size_t>(grid - 1 - i);
        worst = std::max(worst, (w.states[wi] - u.states[ui]).norm());
    }
    return worst;
}

}  // namespace daepencil
