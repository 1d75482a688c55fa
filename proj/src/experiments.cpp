#include "orlicz_ot/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace orlicz_ot {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

std::string to_string(CouplingRule rule) {
    switch (rule) {
        case CouplingRule::disc_strict: return "disc_strict";
        case CouplingRule::disc_monotone: return "disc_monotone";
        case CouplingRule::smooth_strict: return "smooth_strict";
        case CouplingRule::smooth_monotone: return "smooth_monotone";
        case CouplingRule::custom: return "custom";
    }
    return "unknown";
}

CouplingRule parse_coupling_rule(const std::string& text) {
    for (const auto rule : {CouplingRule::disc_strict, CouplingRule::disc_monotone, CouplingRule::smooth_strict,
                            CouplingRule::smooth_monotone, CouplingRule::custom}) {
        if (text == to_string(rule)) return rule;
    }
    throw std::invalid_argument("unknown coupling rule: " + text);
}

bool is_smoothing_rule(CouplingRule rule) {
    return rule == CouplingRule::smooth_strict || rule == CouplingRule::smooth_monotone;
}

void Schedule::validate() const {
    if (entries.empty()) throw std::invalid_argument("schedule is empty");
    for (std::size_t k = 0; k < entries.size(); ++k) {
        const ScheduleEntry& e = entries[k];
        if (!(e.gamma > 0.0) || !std::isfinite(e.gamma)) {
            throw std::invalid_argument("schedule entry " + std::to_string(k) + ": gamma must be finite and > 0");
        }
        if (e.h && !(*e.h > 0.0)) {
            throw std::invalid_argument("schedule entry " + std::to_string(k) + ": h must be > 0");
        }
        if (e.delta && !(*e.delta > 0.0)) {
            throw std::invalid_argument("schedule entry " + std::to_string(k) + ": delta must be > 0");
        }
        if (is_smoothing_rule(rule) && !e.delta) {
            throw std::invalid_argument("schedule entry " + std::to_string(k) + ": smoothing rule needs delta");
        }
        if (k == 0) continue;
        const ScheduleEntry& prev = entries[k - 1];
        if (!(e.level > prev.level)) {
            throw std::invalid_argument("schedule levels must be strictly increasing");
        }
        if (e.gamma > prev.gamma) {
            throw std::invalid_argument("schedule gamma must be nonincreasing");
        }
        if (e.delta && prev.delta && *e.delta > *prev.delta) {
            throw std::invalid_argument("schedule delta must be nonincreasing");
        }
    }
}

CouplingReport validate_coupling(const Schedule& schedule, const Regularizer& reg) {
    if (schedule.entries.empty()) throw std::invalid_argument("validate_coupling: empty schedule");
    CouplingReport report;
    const CouplingRule rule = schedule.rule;
    if (rule == CouplingRule::disc_monotone || rule == CouplingRule::smooth_monotone) {
        report.rule_admissible = phi_over_t_monotone(reg);
    }
    for (const ScheduleEntry& e : schedule.entries) {
        double q = kNaN;
        switch (rule) {
            case CouplingRule::disc_strict:
                if (e.h) q = e.gamma * reg.phi_plus(1.0 / *e.h);
                break;
            case CouplingRule::disc_monotone:
                if (e.h) q = e.gamma * *e.h * reg.phi_plus(1.0 / *e.h);
                break;
            case CouplingRule::smooth_strict:
                if (e.delta) q = e.gamma * reg.phi_plus(1.0 / (*e.delta * *e.delta));
                break;
            case CouplingRule::smooth_monotone:
                if (e.delta) {
                    const double d2 = *e.delta * *e.delta;
                    q = e.gamma * d2 * reg.phi_plus(1.0 / d2);
                }
                break;
            case CouplingRule::custom:
                q = e.gamma;
                break;
        }
        report.quantities.push_back(q);
    }
    const double first = report.quantities.front();
    const double last = report.quantities.back();
    report.decrease_factor = last > 0.0 ? first / last : (first > 0.0 ? kInf : kNaN);
    const bool finite = std::all_of(report.quantities.begin(), report.quantities.end(),
                                    [](double q) { return std::isfinite(q); });
    report.pass = report.rule_admissible && finite && report.decrease_factor >= kCouplingDecreaseFactor;
    std::ostringstream crit;
    crit << to_string(rule) << ": pass if first/last >= " << kCouplingDecreaseFactor;
    if (!report.rule_admissible) crit << " (rule not admissible: Phi(t)/t is not monotone)";
    report.criterion = crit.str();
    return report;
}

namespace {

using Clock = std::chrono::steady_clock;

double min_positive(const std::vector<double>& v) {
    double m = kInf;
    for (const double x : v) {
        if (x > 0.0) m = std::min(m, x);
    }
    return m;
}

std::vector<double> midpoints(const Axis& axis) {
    std::vector<double> out(axis.cells());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = axis.midpoint(i);
    return out;
}

void mark_failed(SweepRow& row, const std::string& what) {
    row.converged = false;
    row.failure = what;
    row.reg_value = kNaN;
    row.gap = kNaN;
    row.residual = kNaN;
    row.transport_cost = kNaN;
    row.duality_gap = kNaN;
}

void fill_from_report(SweepRow& row, const TransportProblem& prob, const SolveReport& rep) {
    row.reg_value = rep.primal_value;
    row.gap = rep.primal_value - row.ref_value;
    row.residual = rep.residual.total();
    row.sweeps = rep.iterations;
    row.converged = rep.converged;
    row.failure = rep.failure;
    row.transport_cost = transport_cost(prob, rep.plan);
    row.duality_gap = rep.gap;
}

}  // namespace

SweepResult run_discretization_sweep(const ProblemSpec& tmpl, const Regularizer& reg,
                                     const Schedule& schedule, const SolverConfig& config) {
    schedule.validate();
    if (is_smoothing_rule(schedule.rule)) {
        throw std::invalid_argument("discretization sweep needs a discretization coupling rule");
    }
    SweepResult result;
    result.kind = "discretization";
    Schedule filled = schedule;
    for (std::size_t k = 0; k < schedule.entries.size(); ++k) {
        const ScheduleEntry& e = schedule.entries[k];
        SweepRow row;
        row.k = e.level;
        row.gamma = e.gamma;
        row.delta = e.delta;
        row.ref_value = kNaN;
        const auto start = Clock::now();
        try {
            ProblemSpec spec = tmpl;
            spec.level = e.level;
            const TransportProblem prob = assemble(spec, reg, e.gamma);
            row.h = e.h ? *e.h : min_positive(prob.lambda1.masses) * min_positive(prob.lambda2.masses);
            filled.entries[k].h = row.h;

            const SimplexResult lp = transportation_simplex(prob.mu1.masses, prob.mu2.masses, prob.cost);
            row.ref_value = lp.value;
            if (tmpl.cost.kind == CostSpec::Kind::squared_distance ||
                tmpl.cost.kind == CostSpec::Kind::absolute_distance) {
                const SparsePlan nw = nw_monotone_1d(prob.mu1.masses, midpoints(prob.grid.axis(0)),
                                                     prob.mu2.masses, midpoints(prob.grid.axis(1)), tmpl.cost);
                double v = 0.0;
                for (const PlanEntry& pe : nw.entries) v += pe.mass * prob.cost(pe.i, pe.j);
                row.nw_value = v;
            }
            const SolveReport rep = solve_regularized(prob, config);
            fill_from_report(row, prob, rep);
        } catch (const std::exception& ex) {
            mark_failed(row, ex.what());
        }
        row.seconds = std::chrono::duration<double>(Clock::now() - start).count();
        result.rows.push_back(std::move(row));
    }
    result.coupling = validate_coupling(filled, reg);
    for (std::size_t k = 0; k < result.rows.size(); ++k) {
        result.rows[k].coupling_qty = result.coupling.quantities[k];
    }
    return result;
}

SweepResult run_smoothing_sweep(const ProblemSpec& tmpl, const Regularizer& reg, const Schedule& schedule,
                                const SolverConfig& config, Kernel kernel) {
    schedule.validate();
    if (schedule.rule == CouplingRule::disc_strict || schedule.rule == CouplingRule::disc_monotone) {
        throw std::invalid_argument("smoothing sweep needs a smoothing coupling rule");
    }
    double widest = 0.0;
    for (const ScheduleEntry& e : schedule.entries) {
        if (!e.delta) throw std::invalid_argument("smoothing sweep: every entry needs delta");
        widest = std::max(widest, *e.delta);
    }

    const GridPartition grid = GridPartition::uniform({tmpl.domain1, tmpl.domain2}, tmpl.level);
    const GridPartition g1({grid.axis(0)}, tmpl.level);
    const GridPartition g2({grid.axis(1)}, tmpl.level);
    const double side1 = grid.axis(0).width(0);
    const double side2 = grid.axis(1).width(0);
    const std::size_t pad = std::max(mollifier_support(widest, side1), mollifier_support(widest, side2));

    const GridPartition pg1 = pad_partition(g1, pad);
    const GridPartition pg2 = pad_partition(g2, pad);
    const GridPartition pgrid({pg1.axis(0), pg2.axis(0)}, tmpl.level);
    const GridMeasure lebesgue1 = bin_measure(MeasureSpec::lebesgue(), pg1);
    const GridMeasure lebesgue2 = bin_measure(MeasureSpec::lebesgue(), pg2);
    const DenseMatrix cost =
        cell_average_cost(tmpl.cost, pgrid, MeasureSpec::lebesgue(), MeasureSpec::lebesgue(), tmpl.quadrature_order);

    const GridMeasure mu1 = bin_measure(tmpl.mu1, g1);
    const GridMeasure mu2 = bin_measure(tmpl.mu2, g2);
    auto normalized = [](std::vector<double> v) {
        double s = 0.0;
        for (const double x : v) s += x;
        if (!(s > 0.0)) throw std::invalid_argument("smoothing sweep: marginal has zero mass");
        for (double& x : v) x /= s;
        return v;
    };
    const std::vector<double> raw1 = normalized(pad_values(g1, mu1.masses, pad));
    const std::vector<double> raw2 = normalized(pad_values(g2, mu2.masses, pad));
    const double reference = transportation_simplex(raw1, raw2, cost).value;

    auto density = [](const GridMeasure& mu) {
        GridFunction f{mu.partition, mu.masses};
        for (std::size_t i = 0; i < f.values.size(); ++i) f.values[i] /= mu.partition.axis(0).width(i);
        return f;
    };
    const GridFunction f1 = density(mu1);
    const GridFunction f2 = density(mu2);
    auto to_masses = [](const MollifyResult& m) {
        GridMeasure out{m.smoothed.partition, m.smoothed.values};
        for (std::size_t i = 0; i < out.masses.size(); ++i) out.masses[i] *= m.smoothed.partition.axis(0).width(i);
        return out;
    };

    SweepResult result;
    result.kind = "smoothing";
    Schedule filled = schedule;
    for (std::size_t k = 0; k < schedule.entries.size(); ++k) {
        const ScheduleEntry& e = schedule.entries[k];
        SweepRow row;
        row.k = e.level;
        row.gamma = e.gamma;
        row.delta = e.delta;
        row.h = e.h ? *e.h : side1 * side2;
        filled.entries[k].h = row.h;
        row.ref_value = reference;
        const auto start = Clock::now();
        try {
            const MollifyResult s1 = mollify(f1, *e.delta, kernel, pad);
            const MollifyResult s2 = mollify(f2, *e.delta, kernel, pad);
            const TransportProblem prob =
                make_problem(lebesgue1, lebesgue2, to_masses(s1), to_masses(s2), cost, reg, e.gamma);
            row.monitor = e.gamma * luxemburg_norm(reg, std::span<const double>(s1.smoothed.values),
                                                   std::span<const double>(lebesgue1.masses));
            const SolveReport rep = solve_regularized(prob, config);
            fill_from_report(row, prob, rep);
        } catch (const std::exception& ex) {
            mark_failed(row, ex.what());
        }
        row.seconds = std::chrono::duration<double>(Clock::now() - start).count();
        result.rows.push_back(std::move(row));
    }
    result.coupling = validate_coupling(filled, reg);
    for (std::size_t k = 0; k < result.rows.size(); ++k) {
        result.rows[k].coupling_qty = result.coupling.quantities[k];
    }
    return result;
}

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void write_sweep_csv(std::ostream& out, const SweepResult& result, const std::string& comment) {
    if (!comment.empty()) out << "# " << comment << '\n';
    out << "k,gamma,delta,h,coupling_qty,reg_value,ref_value,gap,residual,sweeps,seconds\n";
    for (const SweepRow& r : result.rows) {
        char seconds[32];
        std::snprintf(seconds, sizeof seconds, "%.6f", r.seconds);
        out << r.k << ',' << fmt(r.gamma) << ',' << (r.delta ? fmt(*r.delta) : "") << ',' << fmt(r.h) << ','
            << fmt(r.coupling_qty) << ',' << fmt(r.reg_value) << ',' << fmt(r.ref_value) << ',' << fmt(r.gap)
            << ',' << fmt(r.residual) << ',' << r.sweeps << ',' << seconds << '\n';
    }
}

double FixtureRow::error() const { return std::abs(computed - expected); }

std::vector<FixtureRow> reproduce_fixtures(const SolverConfig& config) {
    std::vector<FixtureRow> rows;

    const Regularizer quad = make_power(2.0);
    for (int level = 1; level <= 4; ++level) {
        ProblemSpec spec;
        spec.domain1 = spec.domain2 = {-1.0, 1.0};
        spec.level = level;
        spec.lambda1 = spec.lambda2 = MeasureSpec::mixture({MeasureSpec::lebesgue(), MeasureSpec::atom(0.0)});
        spec.mu1 = spec.mu2 = MeasureSpec::atom(0.0);
        spec.cost.kind = CostSpec::Kind::zero;
        const TransportProblem prob = assemble(spec, quad, 1.0);
        const SolveReport rep = solve_regularized(prob, config);
        const double h = 2.0 / static_cast<double>(1 << level);
        rows.push_back({"atom_plus_lebesgue", "optimal value (p=2)", h, 1.0, rep.primal_value,
                        0.5 * std::pow(1.0 + h, -2.0)});
    }

    const Regularizer entropy = make_entropy();
    for (const double gamma : {1.0, 0.1}) {
        for (int level = 1; level <= 3; ++level) {
            ProblemSpec spec;
            spec.level = level;
            spec.mu1 = spec.mu2 = MeasureSpec::atom(0.0);
            spec.cost.kind = CostSpec::Kind::zero;
            const TransportProblem prob = assemble(spec, entropy, gamma);
            DenseMatrix plan(prob.rows(), prob.cols(), 0.0);
            plan(0, 0) = 1.0 / (prob.lambda1.masses[0] * prob.lambda2.masses[0]);
            const double h = 1.0 / static_cast<double>(1 << level);
            rows.push_back({"binned_dirac", "entropy term", h, gamma, regularization_term(prob, plan),
                            gamma * std::log(1.0 / (h * h))});
        }
    }

    {
        ProblemSpec spec;
        spec.level = 2;
        spec.lambda1 = spec.lambda2 = MeasureSpec::atom(0.0);
        spec.mu1 = spec.mu2 = MeasureSpec::atom(0.0);
        spec.cost.kind = CostSpec::Kind::zero;
        const TransportProblem prob = assemble(spec, entropy, 0.1);
        const SolveReport rep = solve_regularized(prob, config);
        rows.push_back({"atom_only_base", "entropy term", 0.25, 0.1, regularization_term(prob, rep.plan), 0.0});
    }
    return rows;
}

}  // namespace orlicz_ot
