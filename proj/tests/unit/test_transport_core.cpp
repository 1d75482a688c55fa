#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "generators.hpp"
#include "orlicz_ot/solvers.hpp"
#include "orlicz_ot/transport_core.hpp"

using namespace orlicz_ot;

namespace {

ProblemSpec atom_plus_lebesgue(int level) {
    ProblemSpec spec;
    spec.domain1 = spec.domain2 = {-1.0, 1.0};
    spec.level = level;
    spec.lambda1 = spec.lambda2 = MeasureSpec::mixture({MeasureSpec::lebesgue(), MeasureSpec::atom(0.0)});
    spec.mu1 = spec.mu2 = MeasureSpec::atom(0.0);
    spec.cost.kind = CostSpec::Kind::zero;
    return spec;
}

double brute_primal(const TransportProblem& prob, const DenseMatrix& p) {
    double acc = 0.0;
    for (std::size_t i = 0; i < prob.rows(); ++i) {
        for (std::size_t j = 0; j < prob.cols(); ++j) {
            const double w = prob.lambda1.masses[i] * prob.lambda2.masses[j];
            acc += (prob.cost(i, j) * p(i, j) + prob.gamma * prob.reg.phi(p(i, j))) * w;
        }
    }
    return acc;
}

// Product of the marginal densities, then mass-preserving swaps.
DenseMatrix random_feasible_plan(testgen::Rng& rng, const TransportProblem& prob) {
    const std::size_t m = prob.rows(), n = prob.cols();
    DenseMatrix mass(m, n);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) mass(i, j) = prob.mu1.masses[i] * prob.mu2.masses[j];
    }
    for (int s = 0; s < 20 && m > 1 && n > 1; ++s) {
        const std::size_t i = testgen::index(rng, 0, m - 1), k = testgen::index(rng, 0, m - 1);
        const std::size_t j = testgen::index(rng, 0, n - 1), l = testgen::index(rng, 0, n - 1);
        if (i == k || j == l) continue;
        const double eps = testgen::uniform(rng, 0.0, 0.9) * std::min(mass(i, l), mass(k, j));
        mass(i, j) += eps;
        mass(k, l) += eps;
        mass(i, l) -= eps;
        mass(k, j) -= eps;
    }
    DenseMatrix p(m, n);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) p(i, j) = mass(i, j) / (prob.lambda1.masses[i] * prob.lambda2.masses[j]);
    }
    return p;
}

}  // namespace

TEST_CASE("assembling the atom-plus-Lebesgue problem") {
    const TransportProblem prob = assemble(atom_plus_lebesgue(1), make_power(2.0), 1.0);
    CHECK(prob.lambda1.masses == std::vector<double>{2.0, 1.0});
    CHECK(prob.mu1.masses == std::vector<double>{1.0, 0.0});
    CHECK(prob.mu2.masses == std::vector<double>{1.0, 0.0});
    CHECK(prob.marginal_density_floor == 0.0);
    const DualPotentials d = initial_duals(prob);
    CHECK(d.row_active == std::vector<bool>{true, false});
    CHECK(d.col_active == std::vector<bool>{true, false});
}

TEST_CASE("uniform marginals with quadratic cost give a symmetric matrix") {
    ProblemSpec spec;
    spec.level = 2;
    const TransportProblem prob = assemble(spec, make_entropy(), 0.5);
    CHECK(prob.rows() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 4; ++j) CHECK(prob.cost(i, j) == doctest::Approx(prob.cost(j, i)).epsilon(1e-15));
    }
    CHECK(prob.mu1.total() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(prob.marginal_density_floor == doctest::Approx(1.0));
    CHECK(prob.cost_lower_bound >= 0.0);
}

TEST_CASE("a point mass at the corner allows only the corner cell") {
    ProblemSpec spec;
    spec.level = 3;
    spec.mu1 = spec.mu2 = MeasureSpec::atom(0.0);
    const TransportProblem prob = assemble(spec, make_entropy(), 1.0);
    CHECK(prob.mu1.masses[0] == 1.0);
    CHECK(std::accumulate(prob.mu1.masses.begin() + 1, prob.mu1.masses.end(), 0.0) == 0.0);
}

TEST_CASE("assemble rejects invalid inputs") {
    ProblemSpec spec;
    spec.level = 1;
    spec.mu1 = MeasureSpec::lebesgue(0.0);
    CHECK_THROWS_AS(assemble(spec, make_entropy(), 1.0), std::invalid_argument);
    spec.mu1 = MeasureSpec::lebesgue(2.0);
    CHECK_THROWS_AS(assemble(spec, make_entropy(), 1.0), std::invalid_argument);
    spec.mu1 = MeasureSpec::atom(0.9);
    spec.lambda1 = MeasureSpec::atom(0.1);
    CHECK_THROWS_AS(assemble(spec, make_entropy(), 1.0), std::invalid_argument);
    CHECK_THROWS_AS(assemble(ProblemSpec{}, make_entropy(), 0.0), std::invalid_argument);
}

TEST_CASE("primal objective") {
    testgen::Rng rng(31);
    const TransportProblem prob = testgen::problem(rng, make_power(2.0), 4, 5, 0.7);
    CHECK(primal_objective(prob, DenseMatrix(4, 5, 0.0)) == 0.0);
    DenseMatrix neg(4, 5, 1.0);
    neg(2, 3) = -1e-3;
    CHECK(primal_objective(prob, neg) == std::numeric_limits<double>::infinity());
    for (const Regularizer& reg : testgen::regularizer_pool()) {
        const TransportProblem q = testgen::problem(rng, reg, 3, 6, 0.3);
        const DenseMatrix p = testgen::matrix(rng, 3, 6, 0.0, 3.0);
        CHECK(primal_objective(q, p) == doctest::Approx(brute_primal(q, p)).epsilon(1e-14));
        CHECK(primal_objective(q, p) ==
              doctest::Approx(transport_cost(q, p) + regularization_term(q, p)).epsilon(1e-14));
    }
}

TEST_CASE("the binned Dirac plan has entropy term gamma log(h^-2)") {
    for (int level = 1; level <= 4; ++level) {
        ProblemSpec spec;
        spec.level = level;
        spec.mu1 = spec.mu2 = MeasureSpec::atom(0.0);
        spec.cost.kind = CostSpec::Kind::zero;
        const TransportProblem prob = assemble(spec, make_entropy(), 0.3);
        DenseMatrix plan(prob.rows(), prob.cols(), 0.0);
        const double h = std::ldexp(1.0, -level);
        plan(0, 0) = 1.0 / (h * h);
        CHECK(regularization_term(prob, plan) == doctest::Approx(0.3 * std::log(1.0 / (h * h))).epsilon(1e-14));
    }
}

TEST_CASE("dual objective reference values") {
    const Regularizer quad = make_power(2.0);
    const TransportProblem p = make_problem({0.5, 0.5}, {1.0}, {0.5, 0.5}, {1.0}, DenseMatrix(2, 1, 0.0), quad, 1.0);
    CHECK(dual_objective(p, initial_duals(p)) == 0.0);
    const TransportProblem e = make_problem({1.0}, {1.0}, {1.0}, {1.0}, DenseMatrix(1, 1, 0.0), make_entropy(), 1.0);
    CHECK(dual_objective(e, initial_duals(e)) == doctest::Approx(-std::exp(-1.0)).epsilon(1e-15));
}

TEST_CASE("inactive rows contribute -Phi(0) to the dual") {
    const Regularizer tsallis = make_tsallis(2.0);
    const TransportProblem p = make_problem({0.5, 0.5}, {1.0}, {1.0, 0.0}, {1.0}, DenseMatrix(2, 1, 0.0), tsallis, 2.0);
    DualPotentials d = initial_duals(p);
    d.alpha = {0.3, 123.0};  // the inactive value is ignored
    const double expected = 0.3 * 1.0 - 2.0 * 0.5 * tsallis.conj(0.3 / 2.0) - 2.0 * 0.5 * (-tsallis.phi_at_zero());
    CHECK(dual_objective(p, d) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("weak duality on random feasible plans") {
    testgen::Rng rng(32);
    for (int c = 0; c < 300; ++c) {
        const Regularizer& reg = testgen::pick(rng, testgen::solver_pool());
        const TransportProblem prob = testgen::problem(rng, reg, testgen::index(rng, 1, 6), testgen::index(rng, 1, 6),
                                                       testgen::uniform(rng, 0.05, 3.0));
        const DenseMatrix p = random_feasible_plan(rng, prob);
        REQUIRE(marginal_residuals(prob, p).total() < 1e-12);
        DualPotentials d = initial_duals(prob);
        for (double& a : d.alpha) a = testgen::uniform(rng, -2.0, 2.0);
        for (double& b : d.beta) b = testgen::uniform(rng, -2.0, 2.0);
        CAPTURE(reg.name());
        CHECK(dual_objective(prob, d) <= primal_objective(prob, p) + 1e-9);
    }
}

TEST_CASE("p-dagger objective") {
    testgen::Rng rng(33);
    for (double pp : {1.5, 2.0, 3.0}) {
        const Regularizer reg = make_power(pp);
        const double q = pp / (pp - 1.0);
        const TransportProblem prob = testgen::problem(rng, reg, 4, 3, testgen::uniform(rng, 0.2, 2.0));
        CHECK(p_dagger_objective(prob, initial_duals(prob)) == 0.0);
        DualPotentials d = initial_duals(prob);
        for (double& a : d.alpha) a = testgen::uniform(rng, -1.0, 2.0);
        for (double& b : d.beta) b = testgen::uniform(rng, -1.0, 2.0);
        double brute = 0.0, lin = 0.0;
        for (std::size_t i = 0; i < 4; ++i) {
            lin += d.alpha[i] * prob.mu1.masses[i];
            for (std::size_t j = 0; j < 3; ++j) {
                const double r = std::max(0.0, d.alpha[i] + d.beta[j] - prob.cost(i, j));
                brute += prob.lambda1.masses[i] * prob.lambda2.masses[j] * std::pow(r, q) / q;
            }
        }
        for (std::size_t j = 0; j < 3; ++j) lin += d.beta[j] * prob.mu2.masses[j];
        brute -= std::pow(prob.gamma, q - 1.0) * lin;
        CHECK(p_dagger_objective(prob, d) == doctest::Approx(brute).epsilon(1e-14));
        CHECK(p_dagger_objective(prob, d) ==
              doctest::Approx(-std::pow(prob.gamma, q - 1.0) * dual_objective(prob, d)).epsilon(1e-12));
    }
    const TransportProblem ent = testgen::problem(rng, make_entropy(), 2, 2, 1.0);
    CHECK_THROWS_AS(p_dagger_objective(ent, initial_duals(ent)), std::invalid_argument);
}

TEST_CASE("p-dagger on the atom-plus-Lebesgue problem as a function of one potential") {
    // Only (0,0) is active; with alpha + beta = t the objective is
    // (1/2) * 4 * t_+^2 - t, minimized at t = 1/4 with value -1/8.
    const TransportProblem prob = assemble(atom_plus_lebesgue(1), make_power(2.0), 1.0);
    double best_t = 0.0, best = 1e300;
    for (int k = 0; k <= 1000; ++k) {
        const double t = -0.5 + k * 1e-3;
        DualPotentials d = initial_duals(prob);
        d.alpha[0] = 0.5 * t;
        d.beta[0] = 0.5 * t;
        const double v = p_dagger_objective(prob, d);
        CHECK(v == doctest::Approx(2.0 * std::max(0.0, t) * std::max(0.0, t) - t).epsilon(1e-10));
        if (v < best) {
            best = v;
            best_t = t;
        }
    }
    CHECK(best_t == doctest::Approx(0.25));
    CHECK(best == doctest::Approx(-0.125));
}

TEST_CASE("marginal residuals") {
    testgen::Rng rng(34);
    const TransportProblem prob = testgen::problem(rng, make_entropy(), 5, 4, 1.0);
    const Residuals zero = marginal_residuals(prob, DenseMatrix(5, 4, 0.0));
    CHECK(zero.rows == doctest::Approx(1.0));
    CHECK(zero.cols == doctest::Approx(1.0));
    CHECK(marginal_residuals(prob, random_feasible_plan(rng, prob)).total() < 1e-14);
    const DenseMatrix p = testgen::matrix(rng, 5, 4, 0.0, 2.0);
    double rows = 0.0, cols = 0.0;
    for (std::size_t i = 0; i < 5; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < 4; ++j) s += p(i, j) * prob.lambda1.masses[i] * prob.lambda2.masses[j];
        rows += std::abs(s - prob.mu1.masses[i]);
    }
    for (std::size_t j = 0; j < 4; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < 5; ++i) s += p(i, j) * prob.lambda1.masses[i] * prob.lambda2.masses[j];
        cols += std::abs(s - prob.mu2.masses[j]);
    }
    const Residuals r = marginal_residuals(prob, p);
    CHECK(r.rows == doctest::Approx(rows).epsilon(1e-14));
    CHECK(r.cols == doctest::Approx(cols).epsilon(1e-14));
}

TEST_CASE("existence diagnostics") {
    ProblemSpec spec;
    spec.level = 2;
    const ExistenceReport e = validate_existence_conditions(assemble(spec, make_entropy(), 0.5));
    CHECK(e.growth_condition);
    CHECK(e.norms_finite);
    CHECK(e.dual_guarantee);
    CHECK(e.conjugate_integrable);
    CHECK(e.all_pass());
    const ExistenceReport p = validate_existence_conditions(assemble(spec, make_power(3.0), 0.5));
    CHECK(p.growth_condition);
    spec.mu1 = MeasureSpec::atom(0.0);
    const ExistenceReport d = validate_existence_conditions(assemble(spec, make_entropy(), 0.5));
    CHECK(d.density_floor == 0.0);
    CHECK_FALSE(d.dual_guarantee);
    CHECK_FALSE(d.warnings.empty());
}

TEST_CASE("scaling cost and gamma together scales the optimum") {
    testgen::Rng rng(35);
    for (const Regularizer& reg : testgen::solver_pool()) {
        TransportProblem prob = testgen::problem(rng, reg, 4, 5, 0.4);
        const SolveReport a = solve_regularized(prob);
        const double k = 3.7;
        for (double& c : prob.cost.values()) c *= k;
        prob.gamma *= k;
        prob.cost_lower_bound *= k;
        const SolveReport b = solve_regularized(prob);
        CAPTURE(reg.name());
        REQUIRE(a.converged);
        REQUIRE(b.converged);
        CHECK(b.primal_value == doctest::Approx(k * a.primal_value).epsilon(1e-7));
        CHECK(b.dual_value == doctest::Approx(k * a.dual_value).epsilon(1e-7));
        for (std::size_t c = 0; c < a.plan.values().size(); ++c) {
            CHECK(b.plan.values()[c] == doctest::Approx(a.plan.values()[c]).epsilon(1e-6).scale(1e-6));
        }
    }
}

TEST_CASE("relabeling cells permutes plans and duals and keeps values") {
    testgen::Rng rng(36);
    for (const Regularizer& reg : testgen::solver_pool()) {
        const std::size_t m = 5, n = 4;
        const auto l1 = testgen::masses(rng, m, 1.2), l2 = testgen::masses(rng, n, 0.7);
        const auto u1 = testgen::masses(rng, m), u2 = testgen::masses(rng, n);
        const DenseMatrix c = testgen::matrix(rng, m, n, 0.0, 1.0);
        std::vector<std::size_t> pr{3, 0, 4, 1, 2}, pc{2, 3, 0, 1};
        auto permute = [](const std::vector<double>& v, const std::vector<std::size_t>& p) {
            std::vector<double> out(v.size());
            for (std::size_t k = 0; k < v.size(); ++k) out[k] = v[p[k]];
            return out;
        };
        DenseMatrix cp(m, n);
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < n; ++j) cp(i, j) = c(pr[i], pc[j]);
        }
        const TransportProblem a = make_problem(l1, l2, u1, u2, c, reg, 0.3);
        const TransportProblem b =
            make_problem(permute(l1, pr), permute(l2, pc), permute(u1, pr), permute(u2, pc), cp, reg, 0.3);

        const DenseMatrix p = testgen::matrix(rng, m, n, 0.0, 2.0);
        DenseMatrix pp(m, n);
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < n; ++j) pp(i, j) = p(pr[i], pc[j]);
        }
        CHECK(primal_objective(b, pp) == doctest::Approx(primal_objective(a, p)).epsilon(1e-12));
        DualPotentials da = initial_duals(a);
        for (double& x : da.alpha) x = testgen::uniform(rng, -1.0, 1.0);
        for (double& x : da.beta) x = testgen::uniform(rng, -1.0, 1.0);
        DualPotentials db = initial_duals(b);
        db.alpha = permute(da.alpha, pr);
        db.beta = permute(da.beta, pc);
        CHECK(dual_objective(b, db) == doctest::Approx(dual_objective(a, da)).epsilon(1e-12));

        const SolveReport sa = solve_regularized(a), sb = solve_regularized(b);
        CHECK(sb.primal_value == doctest::Approx(sa.primal_value).epsilon(1e-8));
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                CHECK(sb.plan(i, j) == doctest::Approx(sa.plan(pr[i], pc[j])).epsilon(1e-6).scale(1e-6));
            }
        }
    }
}
