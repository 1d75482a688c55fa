#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace orlicz_ot {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Family { entropy, power, tsallis, shifted, custom };

std::string to_string(Family family);

/// A Young's or quasi-Young's function together with its extended convex
/// conjugate. Values are immutable once constructed; copies share nothing
/// mutable, so a Regularizer can be used from any number of threads.
///
/// `conj` is the conjugate of the extension by +infinity to the negative axis,
/// i.e. it equals -phi(0) for every r at or below `slope_threshold()`.
class Regularizer {
public:
    using ScalarFn = std::function<double(double)>;

    struct Parts {
        ScalarFn phi;            // t >= 0 -> Phi(t), may be +inf
        ScalarFn density;        // t >= 0 -> phi(t), left-continuous, nondecreasing
        ScalarFn conj;           // r -> (ext Phi)^*(r)
        ScalarFn conj_deriv;     // r -> ((ext Phi)^*)'(r)
        ScalarFn conj_second;    // optional; empty when not available analytically
        double slope_threshold = 0.0;
        double phi_at_zero = 0.0;
        Family family = Family::custom;
        double parameter = 0.0;  // p, q or t0 depending on the family
        std::string name;
    };

    explicit Regularizer(Parts parts);

    double phi(double t) const { return parts_.phi(t); }
    double phi_plus(double t) const;
    double density(double t) const { return parts_.density(t); }
    double conj(double r) const { return parts_.conj(r); }
    double conj_deriv(double r) const { return parts_.conj_deriv(r); }
    bool has_conj_second() const { return static_cast<bool>(parts_.conj_second); }
    double conj_second(double r) const { return parts_.conj_second(r); }

    double slope_threshold() const { return parts_.slope_threshold; }
    double phi_at_zero() const { return parts_.phi_at_zero; }
    Family family() const { return parts_.family; }
    double parameter() const { return parts_.parameter; }
    const std::string& name() const { return parts_.name; }

    // Phi(0) == 0 and Phi >= 0: a Young's function rather than merely quasi.
    bool is_young() const;

private:
    Parts parts_;
};

/// Builtin families. `param` is p for power, q for tsallis and ignored for
/// entropy. Throws std::invalid_argument for p <= 1 or q <= 1, and
/// std::logic_error if the closed-form conjugate disagrees with the numeric
/// Legendre transform by more than 1e-4 (checked on construction).
Regularizer make_builtin(Family family, double param = 0.0);
Regularizer make_entropy();
Regularizer make_power(double p);
Regularizer make_tsallis(double q);

/// Regularizer from tabulated (t, phi(t)) pairs with linear interpolation of
/// the density. The first abscissa must be 0; repeated abscissae encode jumps
/// (the density is left-continuous there). Beyond the table the last
/// segment's slope is continued. With `require_superlinear` the last segment
/// must have positive slope so that Phi(t)/t -> infinity.
Regularizer make_custom(std::vector<std::pair<double, double>> density_table,
                        bool require_superlinear = true);

/// Complementary Young's function: psi(s) = inf{t : phi(t) >= s} by monotone
/// inversion, Psi(s) = integral of psi, evaluated through the equality case of
/// Young's inequality. Throws std::invalid_argument unless `reg.is_young()`.
Regularizer complementary(const Regularizer& reg);

/// (Phi(t) - Phi(t0))_+ with density phi * 1_{(t0, inf)}.
Regularizer shifted_positive_part(const Regularizer& reg, double t0);

/// Phi(t) for t >= 0, +inf for t < 0.
double ext_value(const Regularizer& reg, double t);

struct LegendreGrid {
    double t_max = 0.0;      // 0: grow from 1 until r*t - Phi(t) decreases
    int points = 128;        // samples per refinement pass
    double tolerance = 1e-8;
    int max_refinements = 200;
};

/// max_{t >= 0} r t - Phi(t) evaluated by grid search with local refinement
/// around the argmax. Uses only `reg.phi`. Throws std::domain_error if no
/// decreasing tail is found (Phi not superlinear).
double numeric_legendre(const Regularizer& reg, double r, const LegendreGrid& grid = {});

/// inf{g >= 0 : sum_i Phi(|f_i| / g) w_i <= bound}. `values` and `weights`
/// are cell coefficients and cell masses of a piecewise-constant function.
double luxemburg_norm(const Regularizer& reg, std::span<const double> values,
                      std::span<const double> weights, double bound = 1.0);

/// lim_{t -> 0+} density(t) sampled on 1e-1 .. 1e-12; -inf when the samples
/// keep decreasing without settling.
double estimate_slope_threshold(const Regularizer::ScalarFn& density);

struct InvariantViolation {
    std::string check;
    std::string detail;
};

/// Sampled checks of convexity, the Young / quasi-Young conditions,
/// superlinearity, monotone conjugate derivative and conj == -Phi(0) below the
/// slope threshold. Empty result means every check passed.
std::vector<InvariantViolation> check_invariants(const Regularizer& reg);

/// True if t -> Phi(t)/t is monotone on a sampled grid (admits the relaxed
/// coupling rules).
bool phi_over_t_monotone(const Regularizer& reg);

}  // namespace orlicz_ot
