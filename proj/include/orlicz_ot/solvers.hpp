#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "orlicz_ot/dense_matrix.hpp"
#include "orlicz_ot/transport_core.hpp"

namespace orlicz_ot {

enum class SolveMode { generic, entropy_closed_form, automatic };

std::string to_string(SolveMode mode);
SolveMode parse_solve_mode(const std::string& text);

struct SolverConfig {
    double tol_marginal = 1e-9;  // stop once the L1 marginal residual is below this
    double tol_root = 1e-12;     // per-block residual, relative to max(1, target)
    int max_sweeps = 10000;
    double bracket_growth = 2.0;
    SolveMode mode = SolveMode::automatic;
    bool record_dual_history = false;

    void validate() const;
};

// Thrown when a block equation cannot be bracketed.
class BracketError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SolveReport {
    DenseMatrix plan;
    DualPotentials duals;
    double primal_value = 0.0;
    double dual_value = 0.0;
    double gap = 0.0;
    Residuals residual;
    int iterations = 0;
    bool converged = false;
    std::string failure;
    std::vector<double> dual_history;  // dual objective after every sweep
    SolveMode mode_used = SolveMode::generic;
};

// Solves sum_j lambda2_j conj_deriv((alpha_i + beta_j - c_ij)/gamma) = mu1_i / lambda1_i
// for alpha_i. Returns the current alpha_i unchanged on an inactive row.
// Flat segments resolve to the infimum root. Throws BracketError when the
// bracket grows past 1e3 (1 + |c_lower| + max|beta| + gamma).
double block_update_row(const TransportProblem& prob, const DualPotentials& duals, std::size_t i,
                        const SolverConfig& config = {});
double block_update_col(const TransportProblem& prob, const DualPotentials& duals, std::size_t j,
                        const SolverConfig& config = {});

// Closed-form entropy updates (log-sum-exp over active entries).
double entropy_update_row(const TransportProblem& prob, const DualPotentials& duals, std::size_t i);
double entropy_update_col(const TransportProblem& prob, const DualPotentials& duals, std::size_t j);

// Gauss-Seidel dual block ascent: all rows, then all columns, until the L1
// marginal residual is at most tol_marginal or max_sweeps is reached.
// Rejects gamma < 1e-12 with std::invalid_argument. `mode = automatic`
// selects the closed form for entropy.
SolveReport solve_regularized(const TransportProblem& prob, const SolverConfig& config = {});

// Same iteration with the closed-form entropy step. Throws
// std::invalid_argument for other families.
SolveReport solve_entropy_closed_form(const TransportProblem& prob, const SolverConfig& config = {});

struct PlanEntry {
    std::size_t i;
    std::size_t j;
    double mass;
};

struct SparsePlan {
    std::vector<PlanEntry> entries;
    double value = 0.0;
};

// Monotone (north-west corner) coupling of two 1-D discrete measures on
// sorted supports; optimal for costs h(x - y) with convex h. On an exact
// mass tie the row is consumed first.
SparsePlan nw_monotone_1d(const std::vector<double>& mu1, const std::vector<double>& x,
                          const std::vector<double>& mu2, const std::vector<double>& y,
                          const CostSpec& cost);

struct SimplexResult {
    DenseMatrix plan;  // transported masses
    double value = 0.0;
    std::vector<double> u;  // row potentials
    std::vector<double> v;  // column potentials
    double min_reduced_cost = 0.0;  // >= -tolerance certifies optimality
    bool optimal = false;
    int pivots = 0;
};

// Exact transportation LP by the network simplex method: north-west corner
// basis, MODI potentials, Bland's rule. Throws std::invalid_argument when the
// totals differ by more than 1e-12 or a cost is not finite.
SimplexResult transportation_simplex(const std::vector<double>& mu1, const std::vector<double>& mu2,
                                     const DenseMatrix& cost);

}  // namespace orlicz_ot
