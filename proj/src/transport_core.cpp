#include "orlicz_ot/transport_core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace orlicz_ot {

namespace {

constexpr double kGrowthLimit = 1e3;

void normalize_marginal(GridMeasure& mu, const char* name) {
    const double total = mu.total();
    if (!(total > 0.0)) {
        throw std::invalid_argument(std::string(name) + ": marginal has zero total mass");
    }
    if (std::abs(total - 1.0) > 1e-6) {
        std::ostringstream msg;
        msg << name << ": marginal mass " << total << " is not 1";
        throw std::invalid_argument(msg.str());
    }
    for (double& m : mu.masses) m /= total;
}

void finish(TransportProblem& prob) {
    if (!(prob.gamma > 0.0) || !std::isfinite(prob.gamma)) {
        throw std::invalid_argument("gamma must be finite and > 0");
    }
    const std::size_t n1 = prob.lambda1.masses.size();
    const std::size_t n2 = prob.lambda2.masses.size();
    if (prob.mu1.masses.size() != n1 || prob.mu2.masses.size() != n2) {
        throw std::invalid_argument("marginal and base measure sizes differ");
    }
    if (prob.cost.rows() != n1 || prob.cost.cols() != n2) {
        throw std::invalid_argument("cost matrix shape does not match the grid");
    }
    normalize_marginal(prob.mu1, "mu1");
    normalize_marginal(prob.mu2, "mu2");

    double floor = kInf;
    auto scan = [&floor](const GridMeasure& mu, const GridMeasure& lambda, const char* name) {
        for (std::size_t i = 0; i < mu.masses.size(); ++i) {
            if (!(lambda.masses[i] >= 0.0) || !std::isfinite(lambda.masses[i])) {
                throw std::invalid_argument(std::string(name) + ": invalid base measure mass");
            }
            if (lambda.masses[i] == 0.0) {
                if (mu.masses[i] > 0.0) {
                    throw std::invalid_argument(std::string(name) +
                                                ": marginal charges a cell of zero base measure");
                }
                continue;
            }
            floor = std::min(floor, mu.masses[i] / lambda.masses[i]);
        }
    };
    scan(prob.mu1, prob.lambda1, "axis 1");
    scan(prob.mu2, prob.lambda2, "axis 2");
    prob.marginal_density_floor = std::isfinite(floor) ? floor : 0.0;

    double lower = kInf;
    for (const double c : prob.cost.values()) {
        if (!std::isfinite(c)) throw std::invalid_argument("cost matrix has non-finite entries");
        lower = std::min(lower, c);
    }
    prob.cost_lower_bound = lower;
}

}  // namespace

TransportProblem assemble(const ProblemSpec& spec, const Regularizer& reg, double gamma) {
    GridPartition grid = GridPartition::uniform({spec.domain1, spec.domain2}, spec.level);
    GridPartition g1({grid.axis(0)}, spec.level);
    GridPartition g2({grid.axis(1)}, spec.level);
    TransportProblem prob{grid,
                          bin_measure(spec.lambda1, g1),
                          bin_measure(spec.lambda2, g2),
                          bin_measure(spec.mu1, g1),
                          bin_measure(spec.mu2, g2),
                          cell_average_cost(spec.cost, grid, spec.lambda1, spec.lambda2, spec.quadrature_order),
                          reg,
                          gamma};
    finish(prob);
    return prob;
}

TransportProblem make_problem(std::vector<double> lambda1, std::vector<double> lambda2,
                              std::vector<double> mu1, std::vector<double> mu2, DenseMatrix cost,
                              const Regularizer& reg, double gamma) {
    auto axis = [](std::size_t n) {
        if (n == 0) throw std::invalid_argument("make_problem: empty marginal");
        std::vector<double> b(n + 1);
        for (std::size_t k = 0; k <= n; ++k) b[k] = static_cast<double>(k) / static_cast<double>(n);
        return Axis(std::move(b));
    };
    const Axis a1 = axis(lambda1.size());
    const Axis a2 = axis(lambda2.size());
    GridPartition grid({a1, a2});
    GridPartition g1({a1});
    GridPartition g2({a2});
    TransportProblem prob{grid,
                          GridMeasure{g1, std::move(lambda1)},
                          GridMeasure{g2, std::move(lambda2)},
                          GridMeasure{g1, std::move(mu1)},
                          GridMeasure{g2, std::move(mu2)},
                          std::move(cost),
                          reg,
                          gamma};
    finish(prob);
    return prob;
}

TransportProblem make_problem(GridMeasure lambda1, GridMeasure lambda2, GridMeasure mu1, GridMeasure mu2,
                              DenseMatrix cost, const Regularizer& reg, double gamma) {
    if (lambda1.partition.dims() != 1 || lambda2.partition.dims() != 1) {
        throw std::invalid_argument("make_problem: base measures must live on one-axis partitions");
    }
    GridPartition grid({lambda1.partition.axis(0), lambda2.partition.axis(0)}, lambda1.partition.level());
    TransportProblem prob{std::move(grid),  std::move(lambda1), std::move(lambda2), std::move(mu1),
                          std::move(mu2),   std::move(cost),    reg,                gamma};
    finish(prob);
    return prob;
}

DualPotentials initial_duals(const TransportProblem& prob) {
    DualPotentials d;
    d.alpha.assign(prob.rows(), 0.0);
    d.beta.assign(prob.cols(), 0.0);
    d.row_active.resize(prob.rows());
    d.col_active.resize(prob.cols());
    for (std::size_t i = 0; i < prob.rows(); ++i) d.row_active[i] = prob.mu1.masses[i] > 0.0;
    for (std::size_t j = 0; j < prob.cols(); ++j) d.col_active[j] = prob.mu2.masses[j] > 0.0;
    return d;
}

namespace {

void check_plan(const TransportProblem& prob, const DenseMatrix& plan) {
    if (plan.rows() != prob.rows() || plan.cols() != prob.cols()) {
        throw std::invalid_argument("plan shape does not match the problem");
    }
}

void check_duals(const TransportProblem& prob, const DualPotentials& d) {
    if (d.alpha.size() != prob.rows() || d.beta.size() != prob.cols() ||
        d.row_active.size() != prob.rows() || d.col_active.size() != prob.cols()) {
        throw std::invalid_argument("dual potentials do not match the problem");
    }
}

}  // namespace

double transport_cost(const TransportProblem& prob, const DenseMatrix& plan) {
    check_plan(prob, plan);
    double sum = 0.0;
    for (std::size_t i = 0; i < prob.rows(); ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < prob.cols(); ++j) {
            row += prob.cost(i, j) * plan(i, j) * prob.lambda2.masses[j];
        }
        sum += row * prob.lambda1.masses[i];
    }
    return sum;
}

double regularization_term(const TransportProblem& prob, const DenseMatrix& plan) {
    check_plan(prob, plan);
    double sum = 0.0;
    for (std::size_t i = 0; i < prob.rows(); ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < prob.cols(); ++j) {
            row += ext_value(prob.reg, plan(i, j)) * prob.lambda2.masses[j];
        }
        sum += row * prob.lambda1.masses[i];
    }
    return prob.gamma * sum;
}

double primal_objective(const TransportProblem& prob, const DenseMatrix& plan) {
    check_plan(prob, plan);
    double sum = 0.0;
    for (std::size_t i = 0; i < prob.rows(); ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < prob.cols(); ++j) {
            const double p = plan(i, j);
            if (p < 0.0) return kInf;
            row += (prob.cost(i, j) * p + prob.gamma * prob.reg.phi(p)) * prob.lambda2.masses[j];
        }
        sum += row * prob.lambda1.masses[i];
    }
    return sum;
}

double dual_objective(const TransportProblem& prob, const DualPotentials& d) {
    check_duals(prob, d);
    const double inactive = -prob.reg.phi_at_zero();
    double linear = 0.0;
    for (std::size_t i = 0; i < prob.rows(); ++i) {
        if (d.row_active[i]) linear += d.alpha[i] * prob.mu1.masses[i];
    }
    for (std::size_t j = 0; j < prob.cols(); ++j) {
        if (d.col_active[j]) linear += d.beta[j] * prob.mu2.masses[j];
    }
    double conj_sum = 0.0;
    for (std::size_t i = 0; i < prob.rows(); ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < prob.cols(); ++j) {
            const double v = (d.row_active[i] && d.col_active[j])
                                 ? prob.reg.conj((d.alpha[i] + d.beta[j] - prob.cost(i, j)) / prob.gamma)
                                 : inactive;
            row += v * prob.lambda2.masses[j];
        }
        conj_sum += row * prob.lambda1.masses[i];
    }
    return linear - prob.gamma * conj_sum;
}

double p_dagger_objective(const TransportProblem& prob, const DualPotentials& d) {
    if (prob.reg.family() != Family::power) {
        throw std::invalid_argument("p_dagger_objective requires a power regularizer, got " + prob.reg.name());
    }
    check_duals(prob, d);
    const double p = prob.reg.parameter();
    const double q = p / (p - 1.0);
    double linear = 0.0;
    for (std::size_t i = 0; i < prob.rows(); ++i) {
        if (d.row_active[i]) linear += d.alpha[i] * prob.mu1.masses[i];
    }
    for (std::size_t j = 0; j < prob.cols(); ++j) {
        if (d.col_active[j]) linear += d.beta[j] * prob.mu2.masses[j];
    }
    double norm = 0.0;
    for (std::size_t i = 0; i < prob.rows(); ++i) {
        if (!d.row_active[i]) continue;
        double row = 0.0;
        for (std::size_t j = 0; j < prob.cols(); ++j) {
            if (!d.col_active[j]) continue;
            const double r = d.alpha[i] + d.beta[j] - prob.cost(i, j);
            if (r > 0.0) row += std::pow(r, q) * prob.lambda2.masses[j];
        }
        norm += row * prob.lambda1.masses[i];
    }
    return norm / q - std::pow(prob.gamma, q - 1.0) * linear;
}

DenseMatrix plan_from_duals(const TransportProblem& prob, const DualPotentials& d) {
    check_duals(prob, d);
    DenseMatrix plan(prob.rows(), prob.cols(), 0.0);
    for (std::size_t i = 0; i < prob.rows(); ++i) {
        if (!d.row_active[i]) continue;
        for (std::size_t j = 0; j < prob.cols(); ++j) {
            if (!d.col_active[j]) continue;
            plan(i, j) = prob.reg.conj_deriv((d.alpha[i] + d.beta[j] - prob.cost(i, j)) / prob.gamma);
        }
    }
    return plan;
}

Residuals marginal_residuals(const TransportProblem& prob, const DenseMatrix& plan) {
    check_plan(prob, plan);
    Residuals r;
    std::vector<double> col_mass(prob.cols(), 0.0);
    for (std::size_t i = 0; i < prob.rows(); ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < prob.cols(); ++j) {
            const double m = plan(i, j) * prob.lambda1.masses[i] * prob.lambda2.masses[j];
            row += m;
            col_mass[j] += m;
        }
        r.rows += std::abs(row - prob.mu1.masses[i]);
    }
    for (std::size_t j = 0; j < prob.cols(); ++j) r.cols += std::abs(col_mass[j] - prob.mu2.masses[j]);
    return r;
}

ExistenceReport validate_existence_conditions(const TransportProblem& prob) {
    ExistenceReport report;
    const Regularizer& reg = prob.reg;

    auto density_norm = [&reg](const GridMeasure& mu, const GridMeasure& lambda) {
        std::vector<double> f(mu.masses.size(), 0.0);
        for (std::size_t i = 0; i < f.size(); ++i) {
            if (lambda.masses[i] > 0.0) f[i] = mu.masses[i] / lambda.masses[i];
        }
        return luxemburg_norm(reg, std::span<const double>(f), std::span<const double>(lambda.masses));
    };
    report.marginal_norm1 = density_norm(prob.mu1, prob.lambda1);
    report.marginal_norm2 = density_norm(prob.mu2, prob.lambda2);
    report.norms_finite = std::isfinite(report.marginal_norm1) && std::isfinite(report.marginal_norm2);
    if (!report.norms_finite) report.warnings.push_back("marginal density has infinite Luxemburg norm");

    std::vector<double> xs;
    for (int k = -12; k <= 12; ++k) xs.push_back(std::pow(10.0, k / 4.0));
    for (const double x : xs) {
        for (const double y : xs) {
            const double top = reg.phi_plus(x * y);
            const double px = reg.phi_plus(x);
            const double py = reg.phi_plus(y);
            if (top <= 0.0) continue;
            const double mult = px * py > 0.0 ? top / (px * py) : kInf;
            const double add_den = x * py + y * px;
            const double add = add_den > 0.0 ? top / add_den : kInf;
            report.multiplicative_constant = std::max(report.multiplicative_constant, mult);
            report.additive_constant = std::max(report.additive_constant, add);
        }
    }
    report.growth_condition = report.multiplicative_constant <= kGrowthLimit ||
                              report.additive_constant <= kGrowthLimit;
    if (!report.growth_condition) {
        report.warnings.push_back("neither the multiplicative nor the additive growth bound holds on samples");
    }

    report.density_floor = prob.marginal_density_floor;
    report.dual_guarantee = report.density_floor > 0.0;
    if (!report.dual_guarantee) {
        report.warnings.push_back("marginal density floor is 0: dual attainment is not guaranteed");
    }

    double sum = 0.0;
    for (std::size_t i = 0; i < prob.rows(); ++i) {
        for (std::size_t j = 0; j < prob.cols(); ++j) {
            sum += prob.lambda1.masses[i] * prob.lambda2.masses[j] * reg.conj(-prob.cost(i, j) / prob.gamma);
        }
    }
    report.conjugate_integral = sum;
    report.conjugate_integrable = std::isfinite(sum);
    if (!report.conjugate_integrable) report.warnings.push_back("conjugate of -c/gamma is not integrable");
    return report;
}

}  // namespace orlicz_ot
