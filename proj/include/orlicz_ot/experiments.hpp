#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "orlicz_ot/grid_measures.hpp"
#include "orlicz_ot/solvers.hpp"
#include "orlicz_ot/transport_core.hpp"
#include "orlicz_ot/young_functions.hpp"

namespace orlicz_ot {

enum class CouplingRule { disc_strict, disc_monotone, smooth_strict, smooth_monotone, custom };

std::string to_string(CouplingRule rule);
CouplingRule parse_coupling_rule(const std::string& text);

// Discretization rules couple gamma with h, smoothing rules with delta.
bool is_smoothing_rule(CouplingRule rule);

struct ScheduleEntry {
    int level = 0;                 // grid level (discretization) or entry index (smoothing)
    double gamma = 1.0;
    std::optional<double> delta;   // smoothing scale
    std::optional<double> h;       // overrides the minimum product-cell base mass
};

struct Schedule {
    std::vector<ScheduleEntry> entries;
    CouplingRule rule = CouplingRule::disc_strict;

    // Nonempty, gamma > 0 and nonincreasing, levels strictly increasing;
    // smoothing rules also need delta > 0 and nonincreasing on every entry.
    // Throws std::invalid_argument.
    void validate() const;
};

struct CouplingReport {
    std::vector<double> quantities;
    bool rule_admissible = true;  // monotone rules need Phi(t)/t monotone
    double decrease_factor = 0.0; // first / last
    bool pass = false;
    std::string criterion;        // human-readable statement of the verdict rule

    std::string verdict() const { return pass ? "pass" : "fail"; }
};

// Per-entry quantity of the coupling rule (h: minimum product-cell base
// mass; delta: smoothing scale, one dimension per axis):
//   disc_strict      gamma Phi_+(1/h)
//   disc_monotone    gamma h Phi_+(1/h)
//   smooth_strict    gamma Phi_+(delta^-2)
//   smooth_monotone  gamma delta^2 Phi_+(delta^-2)
//   custom           gamma
// Verdict pass when the first quantity is at least 1.5 times the last.
// Entries missing the required h or delta make the quantity NaN (fail).
CouplingReport validate_coupling(const Schedule& schedule, const Regularizer& reg);

inline constexpr double kCouplingDecreaseFactor = 1.5;

struct SweepRow {
    int k = 0;
    double gamma = 0.0;
    std::optional<double> delta;
    double h = 0.0;
    double coupling_qty = 0.0;
    double reg_value = 0.0;   // primal objective of the regularized solve
    double ref_value = 0.0;   // exact unregularized value at the same grid
    double gap = 0.0;         // reg_value - ref_value
    double residual = 0.0;    // L1 marginal residual
    int sweeps = 0;
    double seconds = 0.0;
    bool converged = false;
    std::string failure;
    double transport_cost = 0.0;
    double duality_gap = 0.0;
    std::optional<double> nw_value;  // monotone coupling value when applicable
    std::optional<double> monitor;   // gamma * Luxemburg norm of the smoothed first marginal
};

struct SweepResult {
    std::string kind;  // "discretization" or "smoothing"
    std::vector<SweepRow> rows;
    CouplingReport coupling;
};

// At every entry: assemble the template at the entry's level, solve with
// gamma_k, compare against the transportation simplex at the same level.
// Solver failures are recorded in the row and the sweep continues.
SweepResult run_discretization_sweep(const ProblemSpec& tmpl, const Regularizer& reg,
                                     const Schedule& schedule, const SolverConfig& config);

// On the template's fixed grid, padded once by the widest kernel: mollify the
// binned marginals at delta_k, solve with gamma_k on the padded grid with
// Lebesgue base measures, compare with the exact value for the unsmoothed
// binned marginals.
SweepResult run_smoothing_sweep(const ProblemSpec& tmpl, const Regularizer& reg, const Schedule& schedule,
                                const SolverConfig& config, Kernel kernel = Kernel::bump);

// CSV with header k,gamma,delta,h,coupling_qty,reg_value,ref_value,gap,residual,sweeps,seconds.
// `comment` (if nonempty) is written first as a `# ...` line.
void write_sweep_csv(std::ostream& out, const SweepResult& result, const std::string& comment = "");

struct FixtureRow {
    std::string fixture;
    std::string quantity;
    double h = 0.0;
    double gamma = 0.0;
    double computed = 0.0;
    double expected = 0.0;

    double error() const;
};

// Atom-plus-Lebesgue example with p = 2 (regularized optimum against
// (1/p)(1+h)^{2-2p}), the binned Dirac plan under entropy (regularization
// term against gamma log(h^-2)) and the atom-only base variant (term 0).
std::vector<FixtureRow> reproduce_fixtures(const SolverConfig& config = {});

}  // namespace orlicz_ot
