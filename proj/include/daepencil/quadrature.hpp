#pragma once

#include <cmath>
#include <functional>

#include "daepencil/core.hpp"

namespace daepencil {

namespace detail {

// One bisection step of adaptive Simpson with Richardson acceptance.  The
// whole-interval estimate `s` is compared against the two half estimates;
// the accepted value carries the usual (S2 - S1)/15 correction.
inline Vector simpson_recurse(const std::function<Vector(double)>& f, double a, double b,
                              const Vector& fa, const Vector& fm, const Vector& fb,
                              const Vector& s, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const Vector flm = f(lm);
    const Vector frm = f(rm);
    const Vector sl = ((m - a) / 6.0) * (fa + 4.0 * flm + fm);
    const Vector sr = ((b - m) / 6.0) * (fm + 4.0 * frm + fb);
    const Vector s2 = sl + sr;
    if ((s2 - s).norm() <= 15.0 * tol) return s2 + (s2 - s) / 15.0;
    if (depth <= 0) {
        throw NonConvergentError(
            "adaptive_simpson: bisection depth exhausted before reaching the tolerance");
    }
    return simpson_recurse(f, a, m, fa, flm, fm, sl, 0.5 * tol, depth - 1) +
           simpson_recurse(f, m, b, fm, frm, fb, sr, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson quadrature of a vector-valued integrand over [a, b].
/// The estimate is refined until the local Richardson error indicator drops
/// below `tol` (in the Euclidean norm, distributed over subintervals).
inline Vector adaptive_simpson(const std::function<Vector(double)>& f, double a, double b,
                               double tol, int max_depth = 48) {
    if (!std::isfinite(a) || !std::isfinite(b) || a > b) {
        throw InvalidArgumentError("adaptive_simpson: need finite bounds with a <= b");
    }
    if (!(tol > 0.0)) {
        throw DegenerateToleranceError("adaptive_simpson: tolerance must be positive");
    }
    const Vector fa = f(a);
    if (a == b) return Vector::Zero(fa.size());
    const Vector fm = f(0.5 * (a + b));
    const Vector fb = f(b);
    const Vector s = ((b - a) / 6.0) * (fa + 4.0 * fm + fb);
    return detail::simpson_recurse(f, a, b, fa, fm, fb, s, tol, max_depth);
}

/// Scalar convenience wrapper.
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double tol, int max_depth = 48) {
    auto lifted = [&f](double x) {
        Vector v(1);
        v(0) = Complex(f(x), 0.0);
        return v;
    };
    const Vector r = adaptive_simpson(std::function<Vector(double)>(lifted), a, b, tol, max_depth);
    return r(0).real();
}

}  // namespace daepencil
