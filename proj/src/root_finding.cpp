#include "orlicz_ot/root_finding.hpp"

#include <cmath>
#include <limits>

namespace orlicz_ot::roots {

std::optional<Bracket> expand_bracket(const std::function<double(double)>& f, double x0,
                                      double step, double growth, double limit) {
    if (!(step > 0.0) || !(growth > 1.0)) {
        return std::nullopt;
    }
    double lo = x0;
    double hi = x0;
    double flo = f(lo);
    double fhi = flo;
    double down = step;
    double up = step;
    // Move whichever end is on the wrong side of the root.
    while (!(flo < 0.0)) {
        if (down > limit) return std::nullopt;
        hi = lo;
        fhi = flo;
        lo = x0 - down;
        flo = f(lo);
        down *= growth;
    }
    while (!(fhi >= 0.0)) {
        if (up > limit) return std::nullopt;
        lo = std::max(lo, hi);
        hi = x0 + up;
        fhi = f(hi);
        up *= growth;
    }
    return Bracket{lo, hi};
}

RootResult safeguarded_newton(const std::function<double(double)>& f,
                              const std::function<double(double)>* derivative, Bracket bracket,
                              const RootOptions& options) {
    double lo = bracket.lo;
    double hi = bracket.hi;
    double x = 0.5 * (lo + hi);
    double fx = f(x);
    double step = hi - lo;

    RootResult result;
    for (int it = 1; it <= options.max_iterations; ++it) {
        result.iterations = it;
        // An exact zero may sit inside a flat segment: accept it only when
        // the function is negative just below it.
        const bool flat_zero = fx == 0.0 && x > lo && f(std::nextafter(x, lo)) >= 0.0;
        if (std::abs(fx) <= options.tol_f && !flat_zero) {
            result.x = x;
            result.residual = fx;
            result.converged = true;
            return result;
        }
        if (fx < 0.0) {
            lo = x;
        } else {
            hi = x;
        }
        if (hi - lo <= options.tol_x) {
            break;
        }

        double next = 0.5 * (lo + hi);
        bool took_newton = false;
        if (derivative != nullptr) {
            const double d = (*derivative)(x);
            if (std::isfinite(d) && d > 0.0) {
                const double newton = x - fx / d;
                // Newton is kept only while it lands inside the bracket and
                // the steps keep halving (rtsafe criterion).
                if (newton > lo && newton < hi && std::abs(2.0 * fx) <= std::abs(step * d)) {
                    next = newton;
                    took_newton = true;
                }
            }
        }
        step = took_newton ? std::abs(next - x) : 0.5 * (hi - lo);
        if (next <= lo || next >= hi) {
            // Adjacent doubles: nothing left to split.
            break;
        }
        x = next;
        fx = f(x);
    }

    // Bracket exhausted. The upper end is the infimum-root side.
    const double fhi = f(hi);
    const double flo = f(lo);
    if (std::abs(flo) < std::abs(fhi)) {
        result.x = lo;
        result.residual = flo;
    } else {
        result.x = hi;
        result.residual = fhi;
    }
    result.converged = std::abs(result.residual) <= options.tol_f || hi - lo <= options.tol_x ||
                       std::nextafter(lo, hi) >= hi;
    return result;
}

double bisect_predicate(const std::function<bool(double)>& pred, double lo, double hi,
                        double abs_tol, double rel_tol, int max_iterations) {
    for (int it = 0; it < max_iterations; ++it) {
        const double width = hi - lo;
        if (width <= abs_tol || width <= rel_tol * std::abs(hi)) break;
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (pred(mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return hi;
}

}  // namespace orlicz_ot::roots
