#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "daepencil/consistent_iv.hpp"
#include "daepencil/core.hpp"
#include "daepencil/pencil.hpp"
#include "daepencil/quadrature.hpp"
#include "daepencil/solvers.hpp"

namespace daepencil {

/// Exponential envelope |u(t)| <= kappa * e^{alpha t}, used to bound the
/// truncation tail of half-line integrals.
struct SignalEnvelope {
    double kappa = 0.0;
    double alpha = 0.0;
};

/// (int_0^inf |u(t)|^2 e^{-2 rho t} dt)^{1/2}, integrated over [0, truncation_t]
/// with the envelope tail bound appended.  The tail must fall below quad_tol
/// at the given truncation; otherwise the weight does not tame the signal on
/// the allowed horizon and the computation is refused.
inline double weighted_l2_norm(const std::function<Vector(double)>& u, double rho,
                               double truncation_t, const SignalEnvelope& env,
                               double quad_tol = 1e-10) {
    if (!(truncation_t > 0.0) || !std::isfinite(truncation_t)) {
        throw InvalidArgumentError("weighted_l2_norm: truncation horizon must be positive");
    }
    if (!std::isfinite(rho)) throw InvalidArgumentError("weighted_l2_norm: rho must be finite");

    double tail_sq = 0.0;
    if (env.kappa > 0.0) {
        if (env.alpha >= rho) {
            throw NonConvergentError(
                "weighted_l2_norm: envelope rate " + std::to_string(env.alpha) +
                " is not dominated by rho = " + std::to_string(rho));
        }
        tail_sq = env.kappa * env.kappa *
                  std::exp(2.0 * (env.alpha - rho) * truncation_t) / (2.0 * (rho - env.alpha));
        if (std::sqrt(tail_sq) > quad_tol) {
            throw NonConvergentError(
                "weighted_l2_norm: tail bound " + std::to_string(std::sqrt(tail_sq)) +
                " exceeds the tolerance at truncation " + std::to_string(truncation_t));
        }
    }

    const auto integrand = std::function<double(double)>([&](double s) {
        const double norm = u(s).norm();
        return norm * norm * std::exp(-2.0 * rho * s);
    });
    const double body = adaptive_simpson(integrand, 0.0, truncation_t, quad_tol);
    return std::sqrt(std::max(0.0, body) + tail_sq);
}

struct LaplaceConfig {
    double rho = -1.0;           // <= 0 selects max(0, s0) + 1
    double truncation_t = -1.0;  // <= 0 selects the horizon from the tail bound
    std::vector<double> frequencies{-10.0, -1.0, 0.0, 1.0, 10.0};
    double quad_tol = 1e-9;
};

struct LaplaceCheckReport {
    double rho = 0.0;
    double rho_alt = 0.0;  // second weight of the rho-independence check
    std::vector<double> frequencies;
    std::vector<double> residuals;       // per frequency, at rho
    double max_residual = 0.0;
    double rho_pair_discrepancy = 0.0;   // worst residual of the rerun at rho_alt
    double truncation_t_used = 0.0;
};

namespace detail {

// Smallest horizon at which the transform tail bound drops below the target,
// clamped to [1, 1e5].
inline double transform_horizon(double kappa, double alpha, double rho, double target) {
    if (kappa <= 0.0) return 1.0;
    const double gap = rho - alpha;
    double t = std::log(kappa / (gap * target)) / gap;
    if (!std::isfinite(t)) t = 1.0;
    return std::min(std::max(t, 1.0), 1e5);
}

inline double transform_tail(double kappa, double alpha, double rho, double horizon) {
    if (kappa <= 0.0) return 0.0;
    return kappa * std::exp((alpha - rho) * horizon) / ((rho - alpha) * std::sqrt(2.0 * M_PI));
}

}  // namespace detail

/// Checks the transform representation of the mild solution: for each
/// frequency tau, the quadrature of (2pi)^{-1/2} int_0^T e^{-(i tau + rho)s} u(s) ds
/// is compared against the resolvent value (2pi)^{-1/2} M(i tau + rho)^{-1} M0 u0.
/// The report also reruns the identity at rho + 1; both weights validating the
/// same trajectory is the rho-independence statement.
inline LaplaceCheckReport transform_residual(const Pencil& p, const Vector& u0,
                                             const LaplaceConfig& cfg = {}) {
    const auto f = block_factorize(p);
    const auto srep = spectrum(f);
    const double floor = std::max(srep.s0, 0.0);
    const double rho = cfg.rho > 0.0 ? cfg.rho : floor + 1.0;
    if (rho <= floor) {
        throw RhoTooSmallError("transform_residual: rho = " + std::to_string(rho) +
                               " does not exceed max(s0, 0) = " + std::to_string(floor));
    }
    if (cfg.frequencies.empty()) {
        throw InvalidArgumentError("transform_residual: need at least one frequency");
    }

    const auto iv = compute_iv(f);
    const MildSolution sol(f, iv, u0);
    const double kappa = sol.envelope_const();
    const double alpha = sol.envelope_rate();
    const Vector m0u0 = f.m0 * u0;
    const double inv_sqrt2pi = 1.0 / std::sqrt(2.0 * M_PI);

    LaplaceCheckReport rep;
    rep.rho = rho;
    rep.rho_alt = rho + 1.0;
    rep.frequencies = cfg.frequencies;

    auto run = [&](double weight) {
        const double horizon = cfg.truncation_t > 0.0
                                   ? cfg.truncation_t
                                   : detail::transform_horizon(kappa, alpha, weight,
                                                               0.1 * cfg.quad_tol);
        const double tail = detail::transform_tail(kappa, alpha, weight, horizon);
        if (tail > cfg.quad_tol) {
            throw NonConvergentError(
                "transform_residual: tail bound " + std::to_string(tail) +
                " exceeds the quadrature tolerance at truncation " + std::to_string(horizon));
        }
        std::vector<double> residuals;
        residuals.reserve(cfg.frequencies.size());
        for (double tau : cfg.frequencies) {
            const Complex z(weight, tau);
            const auto integrand = std::function<Vector(double)>(
                [&](double s) { return Vector(std::exp(-z * s) * sol(s)); });
            const Vector numeric =
                inv_sqrt2pi * adaptive_simpson(integrand, 0.0, horizon, 0.1 * cfg.quad_tol);
            const Vector reference = inv_sqrt2pi * (resolvent(f, z) * m0u0);
            residuals.push_back((numeric - reference).norm());
        }
        return std::make_pair(residuals, horizon);
    };

    auto [res, horizon] = run(rho);
    rep.residuals = std::move(res);
    rep.truncation_t_used = horizon;
    for (double r : rep.residuals) rep.max_residual = std::max(rep.max_residual, r);

    const auto [res_alt, horizon_alt] = run(rep.rho_alt);
    (void)horizon_alt;
    for (double r : res_alt) rep.rho_pair_discrepancy = std::max(rep.rho_pair_discrepancy, r);
    return rep;
}

}  // namespace daepencil
