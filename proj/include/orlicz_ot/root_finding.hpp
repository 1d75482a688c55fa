#pragma once

#include <functional>
#include <optional>

namespace orlicz_ot::roots {

// Interval [lo, hi] with f(lo) < 0 <= f(hi) for a nondecreasing f.
struct Bracket {
    double lo;
    double hi;
};

struct RootResult {
    double x = 0.0;
    double residual = 0.0;
    int iterations = 0;
    bool converged = false;
};

struct RootOptions {
    double tol_f = 1e-12;      // stop once |f(x)| <= tol_f
    double tol_x = 0.0;        // stop once hi - lo <= tol_x (0: run to adjacent doubles)
    int max_iterations = 200;
};

// Grows [x0 - step, x0 + step] geometrically until it brackets the root of the
// nondecreasing function f. Returns nullopt once either end moves further than
// `limit` from x0.
std::optional<Bracket> expand_bracket(const std::function<double(double)>& f, double x0,
                                      double step, double growth, double limit);

// Root of a nondecreasing function inside a bracket. Uses Newton steps when a
// derivative is supplied and the step stays inside the bracket, bisection
// otherwise. On flat zero segments the bracket shrinks onto the infimum root.
RootResult safeguarded_newton(const std::function<double(double)>& f,
                              const std::function<double(double)>* derivative, Bracket bracket,
                              const RootOptions& options = {});

// Plain bisection on a monotone predicate: returns the smallest x in [lo, hi]
// (to tolerance) such that pred(x) holds, assuming pred(hi) holds and the
// predicate is monotone (false ... false true ... true).
double bisect_predicate(const std::function<bool(double)>& pred, double lo, double hi,
                        double abs_tol, double rel_tol, int max_iterations = 200);

}  // namespace orlicz_ot::roots
