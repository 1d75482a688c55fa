#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "generators.hpp"
#include "orlicz_ot/solvers.hpp"

using namespace orlicz_ot;

namespace {

TransportProblem unit_cell(const Regularizer& reg, double gamma) {
    return make_problem({1.0}, {1.0}, {1.0}, {1.0}, DenseMatrix(1, 1, 0.0), reg, gamma);
}

double row_density(const TransportProblem& prob, const DenseMatrix& plan, std::size_t i) {
    double s = 0.0;
    for (std::size_t j = 0; j < prob.cols(); ++j) s += plan(i, j) * prob.lambda2.masses[j];
    return s;
}

// Signed gap identity: primal - dual = <alpha, row excess> + <beta, column excess>.
double gap_from_residuals(const TransportProblem& prob, const SolveReport& rep) {
    double acc = 0.0;
    for (std::size_t i = 0; i < prob.rows(); ++i) {
        if (!rep.duals.row_active[i]) continue;
        acc += rep.duals.alpha[i] * (prob.lambda1.masses[i] * row_density(prob, rep.plan, i) - prob.mu1.masses[i]);
    }
    for (std::size_t j = 0; j < prob.cols(); ++j) {
        if (!rep.duals.col_active[j]) continue;
        double s = 0.0;
        for (std::size_t i = 0; i < prob.rows(); ++i) s += rep.plan(i, j) * prob.lambda1.masses[i];
        acc += rep.duals.beta[j] * (prob.lambda2.masses[j] * s - prob.mu2.masses[j]);
    }
    return acc;
}

}  // namespace

TEST_CASE("block update reference values") {
    {
        const TransportProblem prob = unit_cell(make_power(2.0), 0.5);
        CHECK(block_update_row(prob, initial_duals(prob), 0) == doctest::Approx(0.5).epsilon(1e-12));
    }
    {
        const TransportProblem prob = unit_cell(make_entropy(), 1.0);
        CHECK(block_update_row(prob, initial_duals(prob), 0) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(entropy_update_row(prob, initial_duals(prob), 0) == doctest::Approx(1.0).epsilon(1e-15));
    }
    {
        const TransportProblem prob =
            make_problem({0.5, 0.5}, {1.0}, {1.0, 0.0}, {1.0}, DenseMatrix(2, 1, 0.0), make_power(2.0), 1.0);
        DualPotentials d = initial_duals(prob);
        d.alpha[1] = -7.25;
        CHECK(block_update_row(prob, d, 1) == -7.25);
    }
}

TEST_CASE("a row update matches the row marginal") {
    testgen::Rng rng(41);
    for (int c = 0; c < 200; ++c) {
        const Regularizer& reg = testgen::pick(rng, testgen::solver_pool());
        const TransportProblem prob = testgen::problem(rng, reg, 4, testgen::index(rng, 1, 7),
                                                       testgen::uniform(rng, 0.05, 2.0));
        DualPotentials d = initial_duals(prob);
        for (double& b : d.beta) b = testgen::uniform(rng, -1.0, 1.0);
        const std::size_t i = testgen::index(rng, 0, 3);
        d.alpha[i] = block_update_row(prob, d, i);
        const DenseMatrix plan = plan_from_duals(prob, d);
        const double target = prob.mu1.masses[i] / prob.lambda1.masses[i];
        CAPTURE(reg.name());
        CHECK(row_density(prob, plan, i) == doctest::Approx(target).epsilon(1e-10));
        if (reg.name().rfind("power", 0) == 0) {
            for (std::size_t j = 0; j < prob.cols(); ++j) {
                const bool in_support = d.alpha[i] + d.beta[j] > prob.cost(i, j);
                CHECK((plan(i, j) > 0.0) == in_support);
            }
        }
    }
}

TEST_CASE("a single cell forces the plan") {
    for (const Regularizer& reg : testgen::solver_pool()) {
        const TransportProblem prob =
            make_problem({2.0}, {0.25}, {1.0}, {1.0}, DenseMatrix(1, 1, 0.3), reg, 0.7);
        const SolveReport rep = solve_regularized(prob);
        CAPTURE(reg.name());
        REQUIRE(rep.converged);
        // Exact up to the block root tolerance (1e-12 relative).
        CHECK(rep.plan(0, 0) == doctest::Approx(2.0).epsilon(1e-10));
        const double expected = (0.3 * 2.0 + 0.7 * reg.phi(2.0)) * 0.5;
        CHECK(rep.primal_value == doctest::Approx(expected).epsilon(1e-10));
    }
}

TEST_CASE("closed-form and generic entropy agree on a single row or column") {
    testgen::Rng rng(42);
    for (int c = 0; c < 20; ++c) {
        const std::size_t n = testgen::index(rng, 1, 8);
        const bool row = testgen::coin(rng);
        const TransportProblem prob = row ? testgen::problem(rng, make_entropy(), 1, n, 0.2)
                                          : testgen::problem(rng, make_entropy(), n, 1, 0.2);
        SolverConfig generic;
        generic.mode = SolveMode::generic;
        const SolveReport a = solve_regularized(prob, generic);
        const SolveReport b = solve_entropy_closed_form(prob);
        REQUIRE(a.converged);
        REQUIRE(b.converged);
        CHECK(b.mode_used == SolveMode::entropy_closed_form);
        CHECK(a.mode_used == SolveMode::generic);
        CHECK(a.primal_value == doctest::Approx(b.primal_value).epsilon(1e-10));
        for (std::size_t k = 0; k < a.plan.size(); ++k) {
            CHECK(a.plan.values()[k] == doctest::Approx(b.plan.values()[k]).epsilon(1e-8).scale(1e-8));
        }
    }
}

TEST_CASE("uniform marginals and zero cost give the product plan after one sweep") {
    ProblemSpec spec;
    spec.level = 3;
    spec.cost.kind = CostSpec::Kind::zero;
    for (const Regularizer& reg : testgen::solver_pool()) {
        const SolveReport rep = solve_regularized(assemble(spec, reg, 0.3));
        CAPTURE(reg.name());
        CHECK(rep.converged);
        CHECK(rep.iterations == 1);
        for (double v : rep.plan.values()) CHECK(v == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("a large entropic gamma approaches the product plan") {
    // Only entropy has the product as its cost-free minimizer.
    testgen::Rng rng(43);
    for (int c = 0; c < 5; ++c) {
        const TransportProblem prob = testgen::problem(rng, make_entropy(), 5, 4, 1e3);
        const SolveReport rep = solve_regularized(prob);
        REQUIRE(rep.converged);
        for (std::size_t i = 0; i < 5; ++i) {
            for (std::size_t j = 0; j < 4; ++j) {
                const double product = prob.mu1.masses[i] * prob.mu2.masses[j] /
                                       (prob.lambda1.masses[i] * prob.lambda2.masses[j]);
                CHECK(rep.plan(i, j) == doctest::Approx(product).epsilon(1e-2));
            }
        }
    }
}

TEST_CASE("duality gap is controlled by the marginal residual") {
    testgen::Rng rng(44);
    for (int c = 0; c < 60; ++c) {
        const Regularizer& reg = testgen::pick(rng, testgen::solver_pool());
        const TransportProblem prob = testgen::problem(rng, reg, testgen::index(rng, 1, 6),
                                                       testgen::index(rng, 1, 6), testgen::uniform(rng, 0.05, 2.0));
        SolverConfig cfg;
        cfg.mode = testgen::coin(rng) ? SolveMode::generic : SolveMode::automatic;
        cfg.record_dual_history = true;
        const SolveReport rep = solve_regularized(prob, cfg);
        CAPTURE(reg.name());
        REQUIRE(rep.converged);
        CHECK(rep.residual.total() <= cfg.tol_marginal);
        CHECK(rep.gap == doctest::Approx(rep.primal_value - rep.dual_value).epsilon(1e-12).scale(1.0));
        double dual_sup = 0.0;
        for (double a : rep.duals.alpha) dual_sup = std::max(dual_sup, std::abs(a));
        for (double b : rep.duals.beta) dual_sup = std::max(dual_sup, std::abs(b));
        CHECK(std::abs(rep.gap) <= dual_sup * rep.residual.total() + 1e-12 * (1.0 + std::abs(rep.primal_value)));
        // Both sides cancel O(1) terms, so only rounding separates them.
        CHECK(std::abs(rep.gap - gap_from_residuals(prob, rep)) <= 1e-13 * (1.0 + std::abs(rep.primal_value)));
        REQUIRE(rep.dual_history.size() == static_cast<std::size_t>(rep.iterations));
        for (std::size_t k = 1; k < rep.dual_history.size(); ++k) {
            CHECK(rep.dual_history[k] >= rep.dual_history[k - 1] - 1e-12 * (1.0 + std::abs(rep.dual_history[k])));
        }
    }
}

TEST_CASE("solver configuration errors") {
    testgen::Rng rng(45);
    CHECK_THROWS_AS(solve_regularized(testgen::problem(rng, make_entropy(), 2, 2, 1e-13)), std::invalid_argument);
    SolverConfig bad;
    bad.max_sweeps = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    CHECK_THROWS_AS(solve_entropy_closed_form(testgen::problem(rng, make_power(2.0), 2, 2, 1.0)),
                    std::invalid_argument);
    CHECK(parse_solve_mode("auto") == SolveMode::automatic);
    CHECK_THROWS(parse_solve_mode("fastest"));
}

TEST_CASE("monotone coupling examples") {
    CostSpec sq;
    const SparsePlan one = nw_monotone_1d({1.0}, {0.0}, {1.0}, {1.0}, sq);
    CHECK(one.value == doctest::Approx(1.0));
    REQUIRE(one.entries.size() == 1);
    const std::vector<double> mu{0.2, 0.3, 0.5}, x{0.0, 0.4, 1.0};
    CHECK(nw_monotone_1d(mu, x, mu, x, sq).value == 0.0);
    const SparsePlan shifted = nw_monotone_1d({0.5, 0.5}, {0.0, 1.0}, {0.5, 0.5}, {0.5, 1.5}, sq);
    CHECK(shifted.value == doctest::Approx(0.25));
    // The tie consumes the row first: (0,0) 0.5, (1,1) 0.5 and no zero-mass entry in between.
    CHECK(shifted.entries.size() == 2);
}

TEST_CASE("transportation simplex examples") {
    DenseMatrix c(1, 3, std::vector<double>{0.5, 1.0, 2.0});
    const SimplexResult row = transportation_simplex({1.0}, {0.2, 0.3, 0.5}, c);
    CHECK(row.optimal);
    CHECK(row.value == doctest::Approx(0.5 * 0.2 + 0.3 + 1.0));
    CHECK(row.plan(0, 2) == doctest::Approx(0.5));

    ProblemSpec spec;
    spec.domain2 = {0.5, 1.5};
    spec.level = 6;
    const TransportProblem prob = assemble(spec, make_entropy(), 1.0);
    const SimplexResult shifted = transportation_simplex(prob.mu1.masses, prob.mu2.masses, prob.cost);
    const double h = 1.0 / 64.0;
    CHECK(shifted.optimal);
    CHECK(std::abs(shifted.value - 0.25) <= 2.0 * h);
    CHECK(shifted.value == doctest::Approx(0.25 + h * h / 6.0).epsilon(1e-9));
    CHECK(shifted.min_reduced_cost >= -1e-12);

    CHECK_THROWS_AS(transportation_simplex({1.0}, {0.5}, DenseMatrix(1, 1, 0.0)), std::invalid_argument);
    CHECK_THROWS_AS(transportation_simplex({1.0}, {1.0}, DenseMatrix(1, 1, std::nan(""))), std::invalid_argument);
}
