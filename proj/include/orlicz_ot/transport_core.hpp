#pragma once

#include <string>
#include <utility>
#include <vector>

#include "orlicz_ot/dense_matrix.hpp"
#include "orlicz_ot/grid_measures.hpp"
#include "orlicz_ot/young_functions.hpp"

namespace orlicz_ot {

// Geometry, measures and cost of a problem on Omega_1 x Omega_2, each a
// compact interval, before binning.
struct ProblemSpec {
    std::pair<double, double> domain1{0.0, 1.0};
    std::pair<double, double> domain2{0.0, 1.0};
    int level = 0;
    MeasureSpec mu1 = MeasureSpec::lebesgue();
    MeasureSpec mu2 = MeasureSpec::lebesgue();
    MeasureSpec lambda1 = MeasureSpec::lebesgue();
    MeasureSpec lambda2 = MeasureSpec::lebesgue();
    CostSpec cost;
    int quadrature_order = 3;
};

struct TransportProblem {
    GridPartition grid;
    GridMeasure lambda1;
    GridMeasure lambda2;
    GridMeasure mu1;
    GridMeasure mu2;
    DenseMatrix cost;
    Regularizer reg;
    double gamma = 1.0;
    double cost_lower_bound = 0.0;
    double marginal_density_floor = 0.0;

    std::size_t rows() const { return cost.rows(); }
    std::size_t cols() const { return cost.cols(); }
};

// Bins measures at spec.level, averages the cost and normalizes the
// marginals to unit mass. Throws std::invalid_argument for a zero-total
// marginal, a marginal off unit mass by more than 1e-6, mu-mass on a
// zero-lambda cell, or gamma <= 0.
TransportProblem assemble(const ProblemSpec& spec, const Regularizer& reg, double gamma);

// Problem from explicit cell masses on [0,1]^2 with equal-width cells. Same
// validation as `assemble`.
TransportProblem make_problem(std::vector<double> lambda1, std::vector<double> lambda2,
                              std::vector<double> mu1, std::vector<double> mu2, DenseMatrix cost,
                              const Regularizer& reg, double gamma);

// Problem from binned measures on one-axis partitions; the grid is their
// product. Same validation as `assemble`.
TransportProblem make_problem(GridMeasure lambda1, GridMeasure lambda2, GridMeasure mu1, GridMeasure mu2,
                              DenseMatrix cost, const Regularizer& reg, double gamma);

struct DualPotentials {
    std::vector<double> alpha;
    std::vector<double> beta;
    std::vector<bool> row_active;
    std::vector<bool> col_active;
};

// alpha = beta = 0; rows and columns without marginal mass are inactive.
DualPotentials initial_duals(const TransportProblem& prob);

// sum (c p + gamma ext Phi(p)) lambda1 lambda2; +inf if some p_ij < 0.
double primal_objective(const TransportProblem& prob, const DenseMatrix& plan);
double transport_cost(const TransportProblem& prob, const DenseMatrix& plan);
double regularization_term(const TransportProblem& prob, const DenseMatrix& plan);

// sum alpha mu1 + sum beta mu2 - gamma sum lambda1 lambda2 conj((alpha+beta-c)/gamma),
// with the conjugate replaced by -Phi(0) on inactive rows and columns.
double dual_objective(const TransportProblem& prob, const DualPotentials& duals);

// Power regularizers only (std::invalid_argument otherwise):
// (1/q) sum lambda1 lambda2 (alpha+beta-c)_+^q - gamma^{q-1} (sum alpha mu1 + sum beta mu2).
// At identical arguments this equals -gamma^{q-1} * dual_objective.
double p_dagger_objective(const TransportProblem& prob, const DualPotentials& duals);

// p_ij = conj_deriv((alpha_i + beta_j - c_ij)/gamma) on active pairs, 0 elsewhere.
DenseMatrix plan_from_duals(const TransportProblem& prob, const DualPotentials& duals);

struct Residuals {
    double rows = 0.0;  // sum_i |sum_j p_ij lambda1_i lambda2_j - mu1_i|
    double cols = 0.0;
    double total() const { return rows + cols; }
};

Residuals marginal_residuals(const TransportProblem& prob, const DenseMatrix& plan);

struct ExistenceReport {
    // (a) Luxemburg norms of dmu1/dlambda1 and dmu2/dlambda2.
    double marginal_norm1 = 0.0;
    double marginal_norm2 = 0.0;
    bool norms_finite = true;
    // (b) empirical constants of Phi_+(xy) <= C Phi_+(x) Phi_+(y) and
    // Phi_+(xy) <= C (x Phi_+(y) + y Phi_+(x)) on a sample grid.
    double multiplicative_constant = 0.0;
    double additive_constant = 0.0;
    bool growth_condition = true;
    // (c) min over cells of mu / lambda.
    double density_floor = 0.0;
    bool dual_guarantee = false;
    // (d) sum lambda1 lambda2 conj(-c/gamma).
    double conjugate_integral = 0.0;
    bool conjugate_integrable = true;
    std::vector<std::string> warnings;

    bool all_pass() const { return norms_finite && growth_condition && dual_guarantee && conjugate_integrable; }
};

ExistenceReport validate_existence_conditions(const TransportProblem& prob);

}  // namespace orlicz_ot
