#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "daepencil/asymptotics.hpp"
#include "daepencil/consistent_iv.hpp"
#include "daepencil/core.hpp"
#include "daepencil/io.hpp"
#include "daepencil/laplace.hpp"
#include "daepencil/pencil.hpp"
#include "daepencil/solvers.hpp"

namespace daepencil {

struct VerifyOptions {
    std::uint64_t seed = 20260815;
    std::string only;            // empty runs every suite; otherwise one of the suite names
    bool inject_fault = false;   // corrupts the first suite on purpose (harness self-test)
    double rho = -1.0;           // transform weight override; <= 0 keeps the automatic choice
    int duality_instances = 100;
    int laplace_instances = 20;
    int dichotomy_instances = 50;
    Index max_n = 10;
};

struct SuiteResult {
    std::string name;
    int instances = 0;
    int failures = 0;
    double max_residual = 0.0;
    double tolerance = 0.0;  // headline bound held against max_residual
    std::vector<std::string> failure_notes;  // ordered by instance id
    bool pass() const { return failures == 0; }
};

struct VerifyReport {
    std::uint64_t seed = 0;
    std::vector<SuiteResult> suites;
    bool all_pass() const {
        return std::all_of(suites.begin(), suites.end(),
                           [](const SuiteResult& s) { return s.pass(); });
    }
};

namespace detail {

inline std::uint64_t instance_seed(std::uint64_t seed, std::uint64_t suite, std::uint64_t i) {
    std::uint64_t x = seed ^ (0x9e3779b97f4a7c15ULL * (suite * 1000003ULL + i + 1ULL));
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    return x;
}

inline double unit_draw(std::mt19937_64& rng) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline void record_failure(SuiteResult& suite, std::uint64_t id, const std::string& what) {
    suite.failures += 1;
    suite.failure_notes.push_back("instance " + std::to_string(id) + ": " + what);
}

}  // namespace detail

/// Forward-backward consistency: w(t) = u(T - t) across random pencils, with
/// the gap measured relative to the size of the forward trajectory.
inline SuiteResult run_duality_suite(const VerifyOptions& opt) {
    SuiteResult suite;
    suite.name = "duality";
    suite.tolerance = 1e-8;
    const double big_t = 2.0;
    const int grid = 64;
    for (int i = 0; i < opt.duality_instances; ++i) {
        std::mt19937_64 rng(detail::instance_seed(opt.seed, 1, i));
        const Index n = 2 + static_cast<Index>(rng() % static_cast<std::uint64_t>(opt.max_n - 1));
        const Index rank = 1 + static_cast<Index>(rng() % static_cast<std::uint64_t>(n));
        suite.instances += 1;
        try {
            const Pencil p = generate_regular(n, rank, rng());
            const Vector u0 = detail::gaussian_matrix(n, 1, rng).col(0);
            const double gap = duality_check(p, u0, big_t, grid);

            const auto f = block_factorize(p);
            const auto iv = compute_iv(f);
            std::vector<double> times(grid);
            for (int k = 0; k < grid; ++k) times[k] = big_t * k / (grid - 1);
            times.back() = big_t;
            MildOptions mopt;
            mopt.internal_checks = false;
            const auto traj = solve_mild(f, iv, u0, times, mopt);
            double sup = 1.0;
            for (const auto& u : traj.states) sup = std::max(sup, u.norm());

            const double rel = gap / sup;
            suite.max_residual = std::max(suite.max_residual, rel);
            if (rel > suite.tolerance) {
                detail::record_failure(suite, i, "relative duality gap " + std::to_string(rel));
            }
        } catch (const Error& e) {
            detail::record_failure(suite, i, std::string("exception: ") + e.what());
        }
    }
    return suite;
}

/// Transform representation of mild solutions on planted-stable pencils,
/// including the rerun at the shifted weight.
inline SuiteResult run_laplace_suite(const VerifyOptions& opt) {
    SuiteResult suite;
    suite.name = "laplace";
    suite.tolerance = 1e-6;
    for (int i = 0; i < opt.laplace_instances; ++i) {
        std::mt19937_64 rng(detail::instance_seed(opt.seed, 2, i));
        const Index n = 2 + static_cast<Index>(rng() % static_cast<std::uint64_t>(opt.max_n - 1));
        const Index rank = 1 + static_cast<Index>(rng() % static_cast<std::uint64_t>(n));
        suite.instances += 1;
        try {
            std::vector<Complex> hint;
            for (Index k = 0; k < rank; ++k) {
                hint.emplace_back(-0.2 - 2.0 * detail::unit_draw(rng),
                                  2.0 * detail::unit_draw(rng) - 1.0);
            }
            const Pencil p = generate_regular(n, rank, rng(), hint);
            const Vector u0 = detail::gaussian_matrix(n, 1, rng).col(0);
            LaplaceConfig cfg;
            cfg.rho = opt.rho;
            const auto rep = transform_residual(p, u0, cfg);
            const double worst = std::max(rep.max_residual, rep.rho_pair_discrepancy);
            suite.max_residual = std::max(suite.max_residual, worst);
            if (worst > suite.tolerance) {
                detail::record_failure(suite, i, "transform residual " + std::to_string(worst));
            }
        } catch (const Error& e) {
            detail::record_failure(suite, i, std::string("exception: ") + e.what());
        }
    }
    return suite;
}

/// Planted-spectrum classification, Dunford projection algebra, subspace
/// invariance, and decay envelopes on both halves of the splitting. The
/// headline tolerance is the invariance bound; the projection algebra is held
/// to 1e-10 separately.
inline SuiteResult run_dichotomy_suite(const VerifyOptions& opt) {
    SuiteResult suite;
    suite.name = "dichotomy";
    suite.tolerance = 1e-9;
    for (int i = 0; i < opt.dichotomy_instances; ++i) {
        std::mt19937_64 rng(detail::instance_seed(opt.seed, 3, i));
        const Index n = 2 + static_cast<Index>(rng() % static_cast<std::uint64_t>(opt.max_n - 1));
        const Index rank = 1 + static_cast<Index>(rng() % static_cast<std::uint64_t>(n));
        suite.instances += 1;
        try {
            // Plant eigenvalues at distance >= 0.5 from the imaginary axis.
            // Instance id selects the sign pattern so that every verdict of
            // the taxonomy occurs in the pool.
            std::vector<Complex> hint;
            bool has_left = false, has_right = false;
            for (Index k = 0; k < rank; ++k) {
                const double mag = 0.5 + 1.5 * detail::unit_draw(rng);
                double sign;
                if (i % 3 == 1) {
                    sign = -1.0;
                } else if (i % 3 == 2) {
                    sign = 1.0;
                } else {
                    sign = k == 0 ? -1.0 : (k == 1 ? 1.0 : (detail::unit_draw(rng) < 0.5 ? -1.0 : 1.0));
                }
                hint.emplace_back(sign * mag, 2.0 * detail::unit_draw(rng) - 1.0);
                (sign < 0 ? has_left : has_right) = true;
            }
            DichotomyVerdict expected;
            if (!has_right) {
                expected = DichotomyVerdict::exponentially_stable;
            } else if (has_left) {
                expected = DichotomyVerdict::dichotomy;
            } else {
                expected = DichotomyVerdict::unstable_no_dichotomy;
            }

            const Pencil p = generate_regular(n, rank, rng(), hint);
            const auto rep = classify(p);
            if (rep.verdict != expected) {
                detail::record_failure(suite, i, std::string("verdict ") + to_string(rep.verdict) +
                                                     ", planted " + to_string(expected));
                continue;
            }

            const auto f = block_factorize(p);
            if (rep.projector_p) {
                const Matrix& pr = *rep.projector_p;
                const Matrix& a = f.reduced_generator_a;
                const double idem = op_norm(Matrix(pr * pr - pr));
                const double comm = op_norm(Matrix(pr * a - a * pr));
                suite.max_residual = std::max({suite.max_residual, idem, comm});
                if (idem > 1e-10 || comm > 1e-10) {
                    detail::record_failure(suite, i, "projection algebra residual " +
                                                         std::to_string(std::max(idem, comm)));
                }
            }

            if (rep.verdict == DichotomyVerdict::exponentially_stable ||
                rep.verdict == DichotomyVerdict::dichotomy) {
                const auto iv = compute_iv(f);
                const auto split = split_subspaces(f, iv, rep);
                suite.max_residual = std::max(
                    {suite.max_residual, split.invariance_residual, split.direct_sum_residual});
                if (split.invariance_residual > 1e-9 || split.direct_sum_residual > 1e-10) {
                    detail::record_failure(
                        suite, i, "subspace residual " + std::to_string(std::max(
                                      split.invariance_residual, split.direct_sum_residual)));
                }
                if (split.s_ambient.dim() > 0) {
                    const Vector u0 =
                        split.s_ambient.basis *
                        detail::gaussian_matrix(split.s_ambient.dim(), 1, rng).col(0);
                    const auto chk = verify_decay(p, split, u0, 10.0, 21);
                    if (!chk.envelope_ok) detail::record_failure(suite, i, "S-envelope violated");
                }
                if (split.t_ambient.dim() > 0) {
                    const Vector u0 =
                        split.t_ambient.basis *
                        detail::gaussian_matrix(split.t_ambient.dim(), 1, rng).col(0);
                    const auto chk = verify_decay(p, split, u0, 10.0, 21);
                    if (!chk.envelope_ok) detail::record_failure(suite, i, "T-envelope violated");
                }
            }
        } catch (const Error& e) {
            detail::record_failure(suite, i, std::string("exception: ") + e.what());
        }
    }
    return suite;
}

/// Runs the property suites sequentially with per-instance seeds derived from
/// the master seed, so reports are reproducible byte for byte.
inline VerifyReport run_verification(const VerifyOptions& opt) {
    static const std::vector<std::string> known = {"duality", "laplace", "dichotomy"};
    if (!opt.only.empty() && std::find(known.begin(), known.end(), opt.only) == known.end()) {
        throw InvalidArgumentError("verify: unknown suite \"" + opt.only +
                                   "\"; expected duality, laplace, or dichotomy");
    }
    if (opt.max_n < 2) throw InvalidArgumentError("verify: max_n must be at least 2");

    VerifyReport rep;
    rep.seed = opt.seed;
    auto wanted = [&](const std::string& name) { return opt.only.empty() || opt.only == name; };
    if (wanted("duality")) rep.suites.push_back(run_duality_suite(opt));
    if (wanted("laplace")) rep.suites.push_back(run_laplace_suite(opt));
    if (wanted("dichotomy")) rep.suites.push_back(run_dichotomy_suite(opt));

    if (opt.inject_fault && !rep.suites.empty()) {
        SuiteResult& target = rep.suites.front();
        target.max_residual = std::max(target.max_residual, 10.0 * target.tolerance);
        detail::record_failure(target, target.instances, "injected fault (harness self-test)");
    }
    return rep;
}

inline Json verify_report_to_json(const VerifyReport& rep) {
    Json doc;
    doc["seed"] = rep.seed;
    doc["all_pass"] = rep.all_pass();
    Json suites = Json::array();
    for (const auto& s : rep.suites) {
        Json entry;
        entry["name"] = s.name;
        entry["instances"] = s.instances;
        entry["failures"] = s.failures;
        entry["pass"] = s.pass();
        entry["max_residual"] = json_real(s.max_residual);
        entry["tolerance"] = json_real(s.tolerance);
        entry["failure_notes"] = s.failure_notes;
        suites.push_back(std::move(entry));
    }
    doc["suites"] = std::move(suites);
    return doc;
}

}  // namespace daepencil
