#include <algorithm>
#include <cmath>
#include <sstream>

#include "orlicz_ot/root_finding.hpp"
#include "orlicz_ot/solvers.hpp"

namespace orlicz_ot {

std::string to_string(SolveMode mode) {
    switch (mode) {
        case SolveMode::generic: return "generic";
        case SolveMode::entropy_closed_form: return "entropy_closed_form";
        case SolveMode::automatic: return "auto";
    }
    return "unknown";
}

SolveMode parse_solve_mode(const std::string& text) {
    if (text == "generic") return SolveMode::generic;
    if (text == "entropy_closed_form") return SolveMode::entropy_closed_form;
    if (text == "auto") return SolveMode::automatic;
    throw std::invalid_argument("unknown solver mode: " + text);
}

void SolverConfig::validate() const {
    if (!(tol_marginal > 0.0) || !(tol_root > 0.0)) {
        throw std::invalid_argument("solver tolerances must be > 0");
    }
    if (max_sweeps < 1) throw std::invalid_argument("max_sweeps must be >= 1");
    if (!(bracket_growth > 1.0)) throw std::invalid_argument("bracket_growth must be > 1");
}

namespace {

// One block equation: sum_k w_k conj_deriv((a + other_k - c_k)/gamma) = target
// over the active entries, solved for a.
struct BlockEquation {
    const Regularizer& reg;
    double gamma;
    double target;
    std::vector<double> shift;   // other_k - c_k
    std::vector<double> weight;  // base measure of the other axis

    double value(double a) const {
        double s = 0.0;
        for (std::size_t k = 0; k < shift.size(); ++k) s += weight[k] * reg.conj_deriv((a + shift[k]) / gamma);
        return s - target;
    }

    double slope(double a) const {
        double s = 0.0;
        for (std::size_t k = 0; k < shift.size(); ++k) s += weight[k] * reg.conj_second((a + shift[k]) / gamma);
        return s / gamma;
    }
};

double solve_block(const BlockEquation& eq, double start, double limit_scale, const SolverConfig& config) {
    const std::function<double(double)> f = [&eq](double a) { return eq.value(a); };
    const std::function<double(double)> df = [&eq](double a) { return eq.slope(a); };
    const double limit = 1e3 * limit_scale;
    const auto bracket = roots::expand_bracket(f, start, eq.gamma, config.bracket_growth, limit);
    if (!bracket) {
        std::ostringstream msg;
        msg << "block equation not bracketed within " << limit << " of " << start
            << " (inconsistent data or gamma too small)";
        throw BracketError(msg.str());
    }
    roots::RootOptions options;
    options.tol_f = config.tol_root * std::max(1.0, eq.target);
    const bool smooth = eq.reg.has_conj_second();
    const roots::RootResult root = roots::safeguarded_newton(f, smooth ? &df : nullptr, *bracket, options);

    double x = root.x;
    // Move to the left end of a flat zero segment so ties resolve to the
    // infimum root.
    if (!smooth || !(eq.slope(x) > 0.0)) {
        const double probe = x - 1e-9 * (1.0 + std::abs(x));
        if (probe > bracket->lo && f(probe) >= -options.tol_f) {
            x = roots::bisect_predicate([&f, &options](double a) { return f(a) >= -options.tol_f; },
                                        bracket->lo, x, 0.0, 1e-15);
        }
    }
    return x;
}

double max_abs(const std::vector<double>& v, const std::vector<bool>& active) {
    double m = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (active[k]) m = std::max(m, std::abs(v[k]));
    }
    return m;
}

void check_gamma(const TransportProblem& prob) {
    if (!(prob.gamma >= 1e-12)) {
        throw std::invalid_argument("gamma below 1e-12: use the exact solvers for the unregularized limit");
    }
}

}  // namespace

double block_update_row(const TransportProblem& prob, const DualPotentials& duals, std::size_t i,
                        const SolverConfig& config) {
    if (!duals.row_active[i]) return duals.alpha[i];
    BlockEquation eq{prob.reg, prob.gamma, prob.mu1.masses[i] / prob.lambda1.masses[i], {}, {}};
    for (std::size_t j = 0; j < prob.cols(); ++j) {
        if (!duals.col_active[j]) continue;
        eq.shift.push_back(duals.beta[j] - prob.cost(i, j));
        eq.weight.push_back(prob.lambda2.masses[j]);
    }
    const double scale = 1.0 + std::abs(prob.cost_lower_bound) + max_abs(duals.beta, duals.col_active) + prob.gamma;
    return solve_block(eq, duals.alpha[i], scale, config);
}

double block_update_col(const TransportProblem& prob, const DualPotentials& duals, std::size_t j,
                        const SolverConfig& config) {
    if (!duals.col_active[j]) return duals.beta[j];
    BlockEquation eq{prob.reg, prob.gamma, prob.mu2.masses[j] / prob.lambda2.masses[j], {}, {}};
    for (std::size_t i = 0; i < prob.rows(); ++i) {
        if (!duals.row_active[i]) continue;
        eq.shift.push_back(duals.alpha[i] - prob.cost(i, j));
        eq.weight.push_back(prob.lambda1.masses[i]);
    }
    const double scale = 1.0 + std::abs(prob.cost_lower_bound) + max_abs(duals.alpha, duals.row_active) + prob.gamma;
    return solve_block(eq, duals.beta[j], scale, config);
}

namespace {

// gamma * (log target - log sum_k exp(log w_k + shift_k / gamma - 1))
double entropy_block(double gamma, double target, const std::vector<double>& log_weight,
                     const std::vector<double>& shift) {
    double peak = -kInf;
    for (std::size_t k = 0; k < shift.size(); ++k) peak = std::max(peak, log_weight[k] + shift[k] / gamma - 1.0);
    double s = 0.0;
    for (std::size_t k = 0; k < shift.size(); ++k) s += std::exp(log_weight[k] + shift[k] / gamma - 1.0 - peak);
    return gamma * (std::log(target) - (peak + std::log(s)));
}

void require_entropy(const TransportProblem& prob) {
    if (prob.reg.family() != Family::entropy) {
        throw std::invalid_argument("closed-form entropy path requires the entropy regularizer, got " +
                                    prob.reg.name());
    }
}

}  // namespace

double entropy_update_row(const TransportProblem& prob, const DualPotentials& duals, std::size_t i) {
    require_entropy(prob);
    if (!duals.row_active[i]) return duals.alpha[i];
    std::vector<double> lw;
    std::vector<double> shift;
    for (std::size_t j = 0; j < prob.cols(); ++j) {
        if (!duals.col_active[j]) continue;
        lw.push_back(std::log(prob.lambda2.masses[j]));
        shift.push_back(duals.beta[j] - prob.cost(i, j));
    }
    return entropy_block(prob.gamma, prob.mu1.masses[i] / prob.lambda1.masses[i], lw, shift);
}

double entropy_update_col(const TransportProblem& prob, const DualPotentials& duals, std::size_t j) {
    require_entropy(prob);
    if (!duals.col_active[j]) return duals.beta[j];
    std::vector<double> lw;
    std::vector<double> shift;
    for (std::size_t i = 0; i < prob.rows(); ++i) {
        if (!duals.row_active[i]) continue;
        lw.push_back(std::log(prob.lambda1.masses[i]));
        shift.push_back(duals.alpha[i] - prob.cost(i, j));
    }
    return entropy_block(prob.gamma, prob.mu2.masses[j] / prob.lambda2.masses[j], lw, shift);
}

namespace {

template <typename RowStep, typename ColStep>
SolveReport run_ascent(const TransportProblem& prob, const SolverConfig& config, SolveMode mode,
                       RowStep row_step, ColStep col_step) {
    SolveReport report;
    report.mode_used = mode;
    report.duals = initial_duals(prob);
    DualPotentials& d = report.duals;
    try {
        for (int sweep = 1; sweep <= config.max_sweeps; ++sweep) {
            for (std::size_t i = 0; i < prob.rows(); ++i) d.alpha[i] = row_step(d, i);
            for (std::size_t j = 0; j < prob.cols(); ++j) d.beta[j] = col_step(d, j);
            report.iterations = sweep;
            if (config.record_dual_history) report.dual_history.push_back(dual_objective(prob, d));
            report.residual = marginal_residuals(prob, plan_from_duals(prob, d));
            if (report.residual.total() <= config.tol_marginal) {
                report.converged = true;
                break;
            }
        }
        if (!report.converged) {
            std::ostringstream msg;
            msg << "marginal residual " << report.residual.total() << " above " << config.tol_marginal
                << " after " << report.iterations << " sweeps";
            report.failure = msg.str();
        }
    } catch (const BracketError& e) {
        report.converged = false;
        report.failure = e.what();
    }
    report.plan = plan_from_duals(prob, d);
    report.residual = marginal_residuals(prob, report.plan);
    report.primal_value = primal_objective(prob, report.plan);
    report.dual_value = dual_objective(prob, d);
    report.gap = report.primal_value - report.dual_value;
    return report;
}

}  // namespace

SolveReport solve_entropy_closed_form(const TransportProblem& prob, const SolverConfig& config) {
    config.validate();
    check_gamma(prob);
    require_entropy(prob);
    return run_ascent(
        prob, config, SolveMode::entropy_closed_form,
        [&prob](const DualPotentials& d, std::size_t i) { return entropy_update_row(prob, d, i); },
        [&prob](const DualPotentials& d, std::size_t j) { return entropy_update_col(prob, d, j); });
}

SolveReport solve_regularized(const TransportProblem& prob, const SolverConfig& config) {
    config.validate();
    check_gamma(prob);
    SolveMode mode = config.mode;
    if (mode == SolveMode::automatic) {
        mode = prob.reg.family() == Family::entropy ? SolveMode::entropy_closed_form : SolveMode::generic;
    }
    if (mode == SolveMode::entropy_closed_form) return solve_entropy_closed_form(prob, config);
    return run_ascent(
        prob, config, SolveMode::generic,
        [&prob, &config](const DualPotentials& d, std::size_t i) { return block_update_row(prob, d, i, config); },
        [&prob, &config](const DualPotentials& d, std::size_t j) { return block_update_col(prob, d, j, config); });
}

}  // namespace orlicz_ot
