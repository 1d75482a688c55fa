#include "orlicz_ot/young_functions.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>
#include <stdexcept>

#include "orlicz_ot/root_finding.hpp"

namespace orlicz_ot {

std::string to_string(Family family) {
    switch (family) {
        case Family::entropy: return "entropy";
        case Family::power: return "power";
        case Family::tsallis: return "tsallis";
        case Family::shifted: return "shifted";
        case Family::custom: return "custom";
    }
    return "unknown";
}

Regularizer::Regularizer(Parts parts) : parts_(std::move(parts)) {
    if (!parts_.phi || !parts_.density || !parts_.conj || !parts_.conj_deriv) {
        throw std::invalid_argument("Regularizer: phi, density, conj and conj_deriv are required");
    }
    if (parts_.phi_at_zero > 0.0) {
        throw std::invalid_argument("Regularizer: Phi(0) must be <= 0");
    }
}

double Regularizer::phi_plus(double t) const { return std::max(phi(t), 0.0); }

bool Regularizer::is_young() const {
    return parts_.phi_at_zero == 0.0 && parts_.slope_threshold >= 0.0;
}

namespace {

void verify_conjugate(const Regularizer& reg) {
    const double r0 = reg.slope_threshold();
    const double base = std::isfinite(r0) ? r0 : 0.0;
    for (const double offset : {-2.0, -0.5, 0.25, 1.0, 3.0, 6.0}) {
        const double r = base + offset;
        const double analytic = reg.conj(r);
        const double numeric = numeric_legendre(reg, r);
        if (!(std::abs(analytic - numeric) <= 1e-4)) {
            std::ostringstream msg;
            msg << reg.name() << ": closed-form conjugate " << analytic << " disagrees with numeric "
                << numeric << " at r=" << r;
            throw std::logic_error(msg.str());
        }
    }
}

}  // namespace

Regularizer make_entropy() {
    Regularizer::Parts parts;
    parts.phi = [](double t) {
        if (t > 0.0) return t * std::log(t);
        return t == 0.0 ? 0.0 : kInf;
    };
    parts.density = [](double t) { return t > 0.0 ? std::log(t) + 1.0 : -kInf; };
    parts.conj = [](double r) { return std::exp(r - 1.0); };
    parts.conj_deriv = [](double r) { return std::exp(r - 1.0); };
    parts.conj_second = [](double r) { return std::exp(r - 1.0); };
    parts.slope_threshold = -kInf;
    parts.phi_at_zero = 0.0;
    parts.family = Family::entropy;
    parts.name = "entropy";
    Regularizer reg(std::move(parts));
    verify_conjugate(reg);
    return reg;
}

Regularizer make_power(double p) {
    if (!(p > 1.0) || !std::isfinite(p)) {
        throw std::invalid_argument("power regularizer requires p > 1");
    }
    const double q = p / (p - 1.0);
    Regularizer::Parts parts;
    parts.phi = [p](double t) {
        if (t < 0.0) return kInf;
        return std::pow(t, p) / p;
    };
    parts.density = [p](double t) { return t > 0.0 ? std::pow(t, p - 1.0) : 0.0; };
    if (p == 2.0) {
        parts.conj = [](double r) { return r > 0.0 ? 0.5 * r * r : 0.0; };
        parts.conj_deriv = [](double r) { return r > 0.0 ? r : 0.0; };
        parts.conj_second = [](double r) { return r > 0.0 ? 1.0 : 0.0; };
    } else {
        parts.conj = [q](double r) { return r > 0.0 ? std::pow(r, q) / q : 0.0; };
        parts.conj_deriv = [q](double r) { return r > 0.0 ? std::pow(r, q - 1.0) : 0.0; };
        parts.conj_second = [q](double r) {
            return r > 0.0 ? (q - 1.0) * std::pow(r, q - 2.0) : 0.0;
        };
    }
    parts.slope_threshold = 0.0;
    parts.phi_at_zero = 0.0;
    parts.family = Family::power;
    parts.parameter = p;
    std::ostringstream name;
    name << "power(" << p << ")";
    parts.name = name.str();
    Regularizer reg(std::move(parts));
    verify_conjugate(reg);
    return reg;
}

Regularizer make_tsallis(double q) {
    if (!(q > 1.0) || !std::isfinite(q)) {
        throw std::invalid_argument("tsallis regularizer requires q > 1");
    }
    // Phi(t) = (t^q - t)/(q - 1); phi(t) = (q t^{q-1} - 1)/(q - 1).
    // With s = (q - 1) r + 1 the maximizer is t* = (s/q)^{1/(q-1)} and the
    // conjugate is (s/q)^{q/(q-1)}.
    Regularizer::Parts parts;
    parts.phi = [q](double t) {
        if (t < 0.0) return kInf;
        return (std::pow(t, q) - t) / (q - 1.0);
    };
    parts.density = [q](double t) {
        return t > 0.0 ? (q * std::pow(t, q - 1.0) - 1.0) / (q - 1.0) : -1.0 / (q - 1.0);
    };
    parts.conj = [q](double r) {
        const double s = (q - 1.0) * r + 1.0;
        return s > 0.0 ? std::pow(s / q, q / (q - 1.0)) : 0.0;
    };
    parts.conj_deriv = [q](double r) {
        const double s = (q - 1.0) * r + 1.0;
        return s > 0.0 ? std::pow(s / q, 1.0 / (q - 1.0)) : 0.0;
    };
    parts.conj_second = [q](double r) {
        const double s = (q - 1.0) * r + 1.0;
        return s > 0.0 ? std::pow(s / q, (2.0 - q) / (q - 1.0)) / q : 0.0;
    };
    parts.slope_threshold = -1.0 / (q - 1.0);
    parts.phi_at_zero = 0.0;
    parts.family = Family::tsallis;
    parts.parameter = q;
    std::ostringstream name;
    name << "tsallis(" << q << ")";
    parts.name = name.str();
    Regularizer reg(std::move(parts));
    verify_conjugate(reg);
    return reg;
}

Regularizer make_builtin(Family family, double param) {
    switch (family) {
        case Family::entropy: return make_entropy();
        case Family::power: return make_power(param);
        case Family::tsallis: return make_tsallis(param);
        default: break;
    }
    throw std::invalid_argument("make_builtin: " + to_string(family) + " is not a builtin family");
}

namespace {

// Piecewise-linear density with exact integrals and exact generalized inverse.
struct DensityTable {
    std::vector<double> t;
    std::vector<double> v;
    std::vector<double> integral;  // Phi at each knot
    double tail_slope = 0.0;

    double density(double x) const {
        if (x < 0.0) return v.front();
        const auto it = std::lower_bound(t.begin(), t.end(), x);
        if (it == t.end()) return v.back() + tail_slope * (x - t.back());
        const auto j = static_cast<std::size_t>(it - t.begin());
        if (*it == x || j == 0) return v[j];
        const double w = (x - t[j - 1]) / (t[j] - t[j - 1]);
        return v[j - 1] + w * (v[j] - v[j - 1]);
    }

    double phi(double x) const {
        if (x < 0.0) return kInf;
        const auto it = std::lower_bound(t.begin(), t.end(), x);
        if (it == t.end()) {
            const double dx = x - t.back();
            return integral.back() + v.back() * dx + 0.5 * tail_slope * dx * dx;
        }
        const auto j = static_cast<std::size_t>(it - t.begin());
        if (j == 0) return 0.0;
        const double dx = x - t[j - 1];
        return integral[j - 1] + 0.5 * dx * (v[j - 1] + density(x));
    }

    // inf{x >= 0 : density(x) >= r}
    double inverse(double r) const {
        if (r <= v.front()) return 0.0;
        const auto it = std::lower_bound(v.begin(), v.end(), r);
        if (it == v.end()) {
            if (!(tail_slope > 0.0)) return kInf;
            return t.back() + (r - v.back()) / tail_slope;
        }
        const auto k = static_cast<std::size_t>(it - v.begin());
        if (t[k] == t[k - 1]) return t[k];
        return t[k - 1] + (r - v[k - 1]) / (v[k] - v[k - 1]) * (t[k] - t[k - 1]);
    }

    double inverse_slope(double r) const {
        const double x = inverse(r);
        if (!std::isfinite(x)) return 0.0;
        if (x >= t.back()) return tail_slope > 0.0 ? 1.0 / tail_slope : kInf;
        const auto it = std::upper_bound(t.begin(), t.end(), x);
        const auto j = static_cast<std::size_t>(it - t.begin());
        const double slope = (v[j] - v[j - 1]) / (t[j] - t[j - 1]);
        return slope > 0.0 ? 1.0 / slope : kInf;
    }
};

}  // namespace

Regularizer make_custom(std::vector<std::pair<double, double>> density_table,
                        bool require_superlinear) {
    if (density_table.size() < 2) {
        throw std::invalid_argument("custom regularizer: density table needs at least 2 rows");
    }
    if (density_table.front().first != 0.0) {
        throw std::invalid_argument("custom regularizer: first abscissa must be 0");
    }
    auto table = std::make_shared<DensityTable>();
    for (std::size_t k = 0; k < density_table.size(); ++k) {
        const auto [tk, vk] = density_table[k];
        if (!std::isfinite(tk) || !std::isfinite(vk)) {
            throw std::invalid_argument("custom regularizer: non-finite table entry");
        }
        if (k > 0 && (tk < table->t.back() || vk < table->v.back())) {
            throw std::invalid_argument("custom regularizer: table must be nondecreasing in t and phi");
        }
        table->t.push_back(tk);
        table->v.push_back(vk);
    }
    table->integral.assign(table->t.size(), 0.0);
    for (std::size_t k = 1; k < table->t.size(); ++k) {
        table->integral[k] =
            table->integral[k - 1] + 0.5 * (table->t[k] - table->t[k - 1]) * (table->v[k] + table->v[k - 1]);
    }
    for (std::size_t k = table->t.size() - 1; k > 0; --k) {
        if (table->t[k] > table->t[k - 1]) {
            table->tail_slope = (table->v[k] - table->v[k - 1]) / (table->t[k] - table->t[k - 1]);
            break;
        }
    }
    if (require_superlinear && !(table->tail_slope > 0.0)) {
        throw std::invalid_argument(
            "custom regularizer: last segment must have positive slope (Phi(t)/t -> infinity)");
    }

    Regularizer::Parts parts;
    parts.phi = [table](double x) { return table->phi(x); };
    parts.density = [table](double x) { return table->density(x); };
    parts.conj_deriv = [table](double r) { return table->inverse(r); };
    parts.conj = [table](double r) {
        const double x = table->inverse(r);
        if (!std::isfinite(x)) return kInf;
        return r * x - table->phi(x);
    };
    parts.conj_second = [table](double r) { return table->inverse_slope(r); };
    parts.slope_threshold = estimate_slope_threshold(parts.density);
    parts.phi_at_zero = 0.0;
    parts.family = Family::custom;
    parts.name = "custom";
    return Regularizer(std::move(parts));
}

Regularizer complementary(const Regularizer& reg) {
    if (!reg.is_young()) {
        throw std::invalid_argument("complementary: " + reg.name() + " is not a Young's function");
    }
    auto inverse = [reg](double s) -> double {
        if (!(s > 0.0)) return 0.0;
        double hi = 1.0;
        while (reg.density(hi) < s) {
            hi *= 2.0;
            if (hi > 1e300) return kInf;
        }
        return roots::bisect_predicate([&reg, s](double t) { return reg.density(t) >= s; }, 0.0, hi,
                                       0.0, 1e-15);
    };
    Regularizer::Parts parts;
    parts.density = inverse;
    parts.phi = [reg, inverse](double s) -> double {
        if (s < 0.0) return kInf;
        if (s == 0.0) return 0.0;
        const double t = inverse(s);
        if (!std::isfinite(t)) return kInf;
        // Equality case of Young's inequality: Psi(s) = s psi(s) - Phi(psi(s)).
        return s * t - reg.phi(t);
    };
    parts.conj = [reg](double r) { return reg.phi(std::max(r, 0.0)); };
    parts.conj_deriv = [reg](double r) { return r > 0.0 ? reg.density(r) : 0.0; };
    parts.slope_threshold = estimate_slope_threshold(inverse);
    parts.phi_at_zero = 0.0;
    parts.family = Family::custom;
    parts.name = "complement(" + reg.name() + ")";
    return Regularizer(std::move(parts));
}

Regularizer shifted_positive_part(const Regularizer& reg, double t0) {
    if (!(t0 >= 0.0) || !std::isfinite(t0)) {
        throw std::invalid_argument("shifted_positive_part: t0 must be finite and >= 0");
    }
    if (!reg.is_young()) {
        throw std::invalid_argument("shifted_positive_part: " + reg.name() + " is not a Young's function");
    }
    if (t0 == 0.0) {
        return reg;
    }
    const double phi_t0 = reg.phi(t0);
    Regularizer::Parts parts;
    parts.phi = [reg, phi_t0](double t) {
        if (t < 0.0) return kInf;
        return std::max(reg.phi(t) - phi_t0, 0.0);
    };
    parts.density = [reg, t0](double t) { return t > t0 ? reg.density(t) : 0.0; };
    // For r > 0 the supremum sits at max(t0, psi(r)).
    parts.conj = [reg, t0, phi_t0](double r) {
        if (r <= 0.0) return 0.0;
        if (reg.conj_deriv(r) <= t0) return r * t0;
        return reg.conj(r) + phi_t0;
    };
    parts.conj_deriv = [reg, t0](double r) {
        if (r <= 0.0) return 0.0;
        return std::max(t0, reg.conj_deriv(r));
    };
    if (reg.has_conj_second()) {
        parts.conj_second = [reg, t0](double r) {
            if (r <= 0.0 || reg.conj_deriv(r) <= t0) return 0.0;
            return reg.conj_second(r);
        };
    }
    parts.slope_threshold = 0.0;
    parts.phi_at_zero = 0.0;
    parts.family = Family::shifted;
    parts.parameter = t0;
    std::ostringstream name;
    name << "shifted(" << t0 << ", " << reg.name() << ")";
    parts.name = name.str();
    return Regularizer(std::move(parts));
}

double ext_value(const Regularizer& reg, double t) { return t < 0.0 ? kInf : reg.phi(t); }

double numeric_legendre(const Regularizer& reg, double r, const LegendreGrid& grid) {
    const auto objective = [&reg, r](double t) {
        const double v = reg.phi(t);
        return std::isfinite(v) ? r * t - v : -kInf;
    };

    // Find a point past the argmax: the objective is concave, so one step of
    // decrease (or an infinite Phi) brackets the maximizer.
    double upper = grid.t_max > 0.0 ? grid.t_max : 1.0;
    for (;;) {
        const double here = objective(upper);
        if (!std::isfinite(here)) break;
        const double there = objective(2.0 * upper);
        if (there < here) {
            upper *= 2.0;
            break;
        }
        upper *= 2.0;
        if (upper > 1e300) {
            throw std::domain_error("numeric_legendre: no decreasing tail found for " + reg.name() +
                                    " (regularizer not superlinear?)");
        }
    }

    const int n = std::max(grid.points, 8);
    std::vector<double> ts;
    ts.reserve(static_cast<std::size_t>(n) + 1);
    ts.push_back(0.0);
    // Geometric samples resolve maximizers that sit very close to zero.
    const double lo_exp = std::log(upper) - 40.0 * std::log(10.0);
    for (int k = 0; k < n; ++k) {
        const double e = lo_exp + (std::log(upper) - lo_exp) * k / (n - 1);
        ts.push_back(std::exp(e));
    }
    ts.back() = upper;

    auto argmax_of = [&objective](const std::vector<double>& pts, double& best) {
        std::size_t arg = 0;
        best = -kInf;
        for (std::size_t k = 0; k < pts.size(); ++k) {
            const double v = objective(pts[k]);
            if (v > best) {
                best = v;
                arg = k;
            }
        }
        return arg;
    };

    double best = -kInf;
    std::size_t arg = argmax_of(ts, best);
    for (int pass = 0; pass < grid.max_refinements; ++pass) {
        const double a = ts[arg == 0 ? 0 : arg - 1];
        const double b = ts[std::min(arg + 1, ts.size() - 1)];
        if (!(b > a) || (b - a) <= 1e-15 * std::max(1.0, b)) break;
        ts.clear();
        for (int k = 0; k < n; ++k) ts.push_back(a + (b - a) * k / (n - 1));
        double refined = -kInf;
        arg = argmax_of(ts, refined);
        const double change = refined - best;
        best = std::max(best, refined);
        if (pass > 0 && std::abs(change) < grid.tolerance) break;
    }
    return best;
}

double luxemburg_norm(const Regularizer& reg, std::span<const double> values,
                      std::span<const double> weights, double bound) {
    if (values.size() != weights.size()) {
        throw std::invalid_argument("luxemburg_norm: values and weights differ in length");
    }
    if (!(bound > 0.0)) {
        throw std::invalid_argument("luxemburg_norm: bound must be positive");
    }
    double peak = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (weights[i] < 0.0) throw std::invalid_argument("luxemburg_norm: negative weight");
        if (weights[i] > 0.0) peak = std::max(peak, std::abs(values[i]));
    }
    if (peak == 0.0) return 0.0;

    const auto integral = [&](double g) {
        double sum = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (weights[i] == 0.0) continue;
            sum += reg.phi(std::abs(values[i]) / g) * weights[i];
        }
        return sum;
    };
    // The feasible set {g : integral(g) <= bound} is [norm, inf) because
    // u -> integral(1/u) is convex and vanishes at u = 0.
    const auto feasible = [&](double g) { return integral(g) <= bound; };

    double hi = peak;
    while (!feasible(hi)) hi *= 2.0;
    double lo = hi;
    while (feasible(lo)) {
        lo *= 0.5;
        if (lo < 1e-300) return 0.0;
    }
    const double tol = std::min(1e-12, 1e-14 * hi);
    return roots::bisect_predicate(feasible, lo, hi, tol, 0.0);
}

double estimate_slope_threshold(const Regularizer::ScalarFn& density) {
    std::vector<double> v;
    for (int k = 1; k <= 12; ++k) {
        const double x = density(std::pow(10.0, -k));
        if (!std::isfinite(x)) return x < 0.0 ? -kInf : x;
        v.push_back(x);
    }
    const double d_last = v[10] - v[11];
    const double d_prev = v[9] - v[10];
    if (std::abs(d_last) <= 1e-12 * (1.0 + std::abs(v[11]))) return v[11];
    if (d_prev != 0.0) {
        const double ratio = d_last / d_prev;
        if (ratio >= 0.0 && ratio < 0.5) {
            // Geometric tail: Aitken extrapolation of the remaining decrease.
            return v[11] - d_last * ratio / (1.0 - ratio);
        }
    }
    return -kInf;
}

std::vector<InvariantViolation> check_invariants(const Regularizer& reg) {
    std::vector<InvariantViolation> out;
    auto fail = [&out](std::string check, std::string detail) {
        out.push_back({std::move(check), std::move(detail)});
    };

    std::vector<double> ts{0.0};
    for (int k = -6; k <= 12; ++k) ts.push_back(std::pow(10.0, k / 3.0));

    for (const double s : ts) {
        for (const double t : ts) {
            for (const double theta : {0.25, 0.5, 0.75}) {
                const double lhs = reg.phi(theta * s + (1.0 - theta) * t);
                const double rhs = theta * reg.phi(s) + (1.0 - theta) * reg.phi(t);
                if (lhs > rhs + 1e-9 * (1.0 + std::abs(rhs))) {
                    std::ostringstream d;
                    d << "s=" << s << " t=" << t << " theta=" << theta;
                    fail("convexity", d.str());
                    goto convexity_done;
                }
            }
        }
    }
convexity_done:

    if (reg.phi(0.0) != reg.phi_at_zero()) {
        fail("phi_at_zero", "Phi(0) does not match the recorded value");
    }
    double previous = -kInf;
    double lowest = kInf;
    for (const double t : ts) {
        const double d = reg.density(t);
        if (d < previous) {
            fail("density_monotone", "density decreases near t=" + std::to_string(t));
            break;
        }
        previous = d;
        lowest = std::min(lowest, reg.phi(t));
    }
    if (!std::isfinite(lowest)) fail("bounded_below", "Phi is not bounded below on samples");
    if (reg.is_young()) {
        if (reg.density(0.0) != 0.0) fail("young_density_zero", "phi(0) != 0");
        for (const double t : ts) {
            if (reg.phi(t) < 0.0) {
                fail("young_nonnegative", "Phi < 0 at t=" + std::to_string(t));
                break;
            }
        }
    }

    const double r1 = reg.phi(1e2) / 1e2;
    const double r2 = reg.phi(1e4) / 1e4;
    const double r3 = reg.phi(1e6) / 1e6;
    if (!(r1 < r2 && r2 < r3)) fail("superlinear", "Phi(t)/t not increasing on {1e2,1e4,1e6}");

    const double r0 = reg.slope_threshold();
    const double base = std::isfinite(r0) ? r0 : 0.0;
    previous = -kInf;
    for (int k = 0; k <= 100; ++k) {
        const double r = base - 5.0 + 0.25 * k;
        const double d = reg.conj_deriv(r);
        if (d < previous) {
            fail("conj_deriv_monotone", "conjugate derivative decreases near r=" + std::to_string(r));
            break;
        }
        previous = d;
    }
    if (std::isfinite(r0)) {
        for (const double r : {r0, r0 - 1.0, r0 - 10.0}) {
            if (std::abs(reg.conj(r) + reg.phi_at_zero()) > 1e-12) {
                fail("conj_below_threshold", "conj(r) != -Phi(0) at r=" + std::to_string(r));
                break;
            }
        }
    }
    return out;
}

bool phi_over_t_monotone(const Regularizer& reg) {
    bool increasing = true;
    bool decreasing = true;
    double previous = std::numeric_limits<double>::quiet_NaN();
    for (int k = -18; k <= 18; ++k) {
        const double t = std::pow(10.0, k / 3.0);
        const double v = reg.phi(t) / t;
        if (!std::isnan(previous)) {
            const double slack = 1e-12 * (1.0 + std::abs(v));
            if (v < previous - slack) increasing = false;
            if (v > previous + slack) decreasing = false;
        }
        previous = v;
    }
    return increasing || decreasing;
}

}  // namespace orlicz_ot
