#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "orlicz_ot/config_io.hpp"
#include "orlicz_ot/experiments.hpp"
#include "orlicz_ot/grid_measures.hpp"
#include "orlicz_ot/solvers.hpp"
#include "orlicz_ot/transport_core.hpp"
#include "orlicz_ot/version.hpp"
#include "orlicz_ot/young_functions.hpp"

namespace orlicz_ot::cli {

namespace fs = std::filesystem;
using config::ConfigError;
using config::json;

namespace {

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// Stamp carried by every output of a run.
struct Provenance {
    std::string command;
    std::string config_hash;
    std::uint64_t seed = 0;

    std::string comment() const {
        return "orlicz-ot " + std::string(kVersion) + " command=" + command + " config_hash=" + config_hash +
               " seed=" + std::to_string(seed);
    }
    json to_json() const {
        return json{{"version", kVersion}, {"command", command}, {"config_hash", config_hash}, {"seed", seed}};
    }
};

Provenance stamp(const std::string& command, const json& effective, std::uint64_t seed) {
    return Provenance{command, config::fnv1a_hex(effective.dump()), seed};
}

std::uint64_t seed_of(const json& j) {
    return j.is_object() && j.contains("seed") ? j.at("seed").get<std::uint64_t>() : 0;
}

void write_json_file(const fs::path& path, const json& j) {
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot write " + path.string());
    f << j.dump(2) << '\n';
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot write " + path.string());
    return f;
}

json residual_json(const Residuals& r) {
    return json{{"rows", r.rows}, {"cols", r.cols}, {"total", r.total()}};
}

// Inline object or path to a problem file, resolved against `dir`.
config::ProblemConfig problem_from(const json& j, const fs::path& dir, json& effective) {
    if (j.is_string()) {
        fs::path p(j.get<std::string>());
        if (p.is_relative() && !dir.empty()) p = dir / p;
        config::LoadedJson loaded = config::load_json(p);
        effective = loaded.value;
        return config::parse_problem(loaded.value, loaded.dir);
    }
    effective = j;
    return config::parse_problem(j, dir);
}

bool nonincreasing(const std::vector<double>& v) {
    for (std::size_t k = 1; k < v.size(); ++k) {
        if (!(v[k] <= v[k - 1] + 1e-12 * std::max(1.0, std::abs(v[k - 1])))) return false;
    }
    return true;
}

// ---- solve ----------------------------------------------------------------

struct SolveArgs {
    std::string problem;
    std::string out;
    std::string report;
    std::string mode;
    std::optional<double> gamma;
    std::optional<int> level;
    std::optional<double> tol_marginal;
    std::optional<int> max_sweeps;
    std::optional<std::uint64_t> seed;
    bool history = false;
};

int cmd_solve(const SolveArgs& a, std::ostream& out) {
    config::LoadedJson loaded = config::load_json(a.problem);
    json j = loaded.value;
    if (!j.is_object()) throw ConfigError("problem file must hold a JSON object");
    if (a.gamma) j["gamma"] = *a.gamma;
    if (a.level) j["level"] = *a.level;
    if (a.seed) j["seed"] = *a.seed;
    const bool exact = a.mode == "exact";
    if (!a.mode.empty() && !exact) j["solver"]["mode"] = a.mode;
    if (a.tol_marginal) j["solver"]["tol_marginal"] = *a.tol_marginal;
    if (a.max_sweeps) j["solver"]["max_sweeps"] = *a.max_sweeps;

    config::ProblemConfig cfg = config::parse_problem(j, loaded.dir);
    cfg.solver.record_dual_history = a.history;
    json effective = j;
    if (exact) effective["solver"]["mode"] = "exact";
    const Provenance prov = stamp("solve", effective, cfg.seed);

    TransportProblem prob = [&] {
        try {
            return assemble(cfg.spec, cfg.reg, cfg.gamma);
        } catch (const std::exception& e) {
            throw ConfigError(std::string("problem: ") + e.what());
        }
    }();

    json report = prov.to_json();
    report["rows"] = prob.rows();
    report["cols"] = prob.cols();
    report["level"] = cfg.spec.level;
    report["gamma"] = cfg.gamma;
    report["regularizer"] = prob.reg.name();

    DenseMatrix plan;
    bool converged = false;
    if (exact) {
        const SimplexResult lp = transportation_simplex(prob.mu1.masses, prob.mu2.masses, prob.cost);
        plan = DenseMatrix(prob.rows(), prob.cols(), 0.0);
        for (std::size_t i = 0; i < prob.rows(); ++i) {
            for (std::size_t j2 = 0; j2 < prob.cols(); ++j2) {
                const double m = lp.plan(i, j2);
                if (m != 0.0) plan(i, j2) = m / (prob.lambda1.masses[i] * prob.lambda2.masses[j2]);
            }
        }
        double dual = 0.0;
        for (std::size_t i = 0; i < prob.rows(); ++i) dual += lp.u[i] * prob.mu1.masses[i];
        for (std::size_t j2 = 0; j2 < prob.cols(); ++j2) dual += lp.v[j2] * prob.mu2.masses[j2];
        converged = lp.optimal;
        report["mode_used"] = "exact";
        report["primal_value"] = lp.value;
        report["dual_value"] = dual;
        report["gap"] = nullptr;
        report["iterations"] = lp.pivots;
        report["min_reduced_cost"] = lp.min_reduced_cost;
        report["converged"] = converged;
        report["failure"] = converged ? "" : "reduced-cost certificate failed";
        report["duals"] = json{{"u", lp.u}, {"v", lp.v}};
        report["transport_cost"] = transport_cost(prob, plan);
        report["residual"] = residual_json(marginal_residuals(prob, plan));
    } else {
        SolveReport rep;
        try {
            rep = solve_regularized(prob, cfg.solver);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
        plan = rep.plan;
        converged = rep.converged;
        report["mode_used"] = to_string(rep.mode_used);
        report["primal_value"] = rep.primal_value;
        report["dual_value"] = rep.dual_value;
        report["gap"] = rep.gap;
        report["iterations"] = rep.iterations;
        report["converged"] = rep.converged;
        report["failure"] = rep.failure;
        report["duals"] = json{{"alpha", rep.duals.alpha}, {"beta", rep.duals.beta}};
        report["transport_cost"] = transport_cost(prob, plan);
        report["regularization_term"] = regularization_term(prob, plan);
        report["residual"] = residual_json(rep.residual);
        if (a.history) report["dual_history"] = rep.dual_history;
    }

    if (!a.out.empty()) {
        std::ofstream f = open_output(a.out);
        write_plan_csv(f, plan, prov.comment());
        report["plan_file"] = a.out;
    }
    if (!a.report.empty()) {
        write_json_file(a.report, report);
        out << "primal_value " << fmt(report["primal_value"].get<double>()) << (converged ? "" : " (not converged)")
            << '\n';
    } else {
        out << report.dump(2) << '\n';
    }
    return converged ? kOk : kNotConverged;
}

// ---- sweep ----------------------------------------------------------------

int cmd_sweep(const std::string& path, const std::string& csv, const std::string& summary, std::ostream& out) {
    config::LoadedJson loaded = config::load_json(path);
    const config::SweepConfig cfg = config::parse_sweep(loaded.value, loaded.dir);
    const Provenance prov = stamp("sweep", loaded.value, cfg.problem.seed);

    SweepResult result;
    try {
        result = cfg.kind == "smoothing"
                     ? run_smoothing_sweep(cfg.problem.spec, cfg.problem.reg, cfg.schedule, cfg.problem.solver,
                                           cfg.kernel)
                     : run_discretization_sweep(cfg.problem.spec, cfg.problem.reg, cfg.schedule,
                                                cfg.problem.solver);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("sweep: ") + e.what());
    }

    std::vector<double> gaps;
    bool all_converged = true;
    json rows = json::array();
    for (const SweepRow& r : result.rows) {
        gaps.push_back(r.gap);
        all_converged = all_converged && r.converged;
        json row{{"k", r.k},
                 {"gamma", r.gamma},
                 {"delta", r.delta ? json(*r.delta) : json(nullptr)},
                 {"h", r.h},
                 {"coupling_qty", r.coupling_qty},
                 {"reg_value", r.reg_value},
                 {"ref_value", r.ref_value},
                 {"gap", r.gap},
                 {"residual", r.residual},
                 {"sweeps", r.sweeps},
                 {"converged", r.converged},
                 {"failure", r.failure},
                 {"transport_cost", r.transport_cost},
                 {"duality_gap", r.duality_gap},
                 {"nw_value", r.nw_value ? json(*r.nw_value) : json(nullptr)},
                 {"monitor", r.monitor ? json(*r.monitor) : json(nullptr)}};
        rows.push_back(std::move(row));
    }

    json s = prov.to_json();
    s["kind"] = result.kind;
    s["regularizer"] = cfg.problem.reg.name();
    s["coupling_rule"] = to_string(cfg.schedule.rule);
    s["coupling_verdict"] = result.coupling.verdict();
    s["coupling_criterion"] = result.coupling.criterion;
    s["coupling_quantities"] = result.coupling.quantities;
    s["decrease_factor"] = result.coupling.decrease_factor;
    s["rule_admissible"] = result.coupling.rule_admissible;
    s["gap_nonincreasing"] = nonincreasing(gaps);
    s["all_converged"] = all_converged;
    s["final_value"] = result.rows.empty() ? json(nullptr) : json(result.rows.back().reg_value);
    s["final_gap"] = result.rows.empty() ? json(nullptr) : json(result.rows.back().gap);
    s["entries"] = std::move(rows);

    if (!csv.empty()) {
        std::ofstream f = open_output(csv);
        write_sweep_csv(f, result, prov.comment());
    } else {
        write_sweep_csv(out, result, prov.comment());
    }
    if (!summary.empty()) write_json_file(summary, s);
    out << "coupling_verdict " << result.coupling.verdict() << '\n';
    return all_converged ? kOk : kNotConverged;
}

// ---- norm -----------------------------------------------------------------

GridPartition partition_from(const json& j) {
    const json& domains = j.at("domains");
    if (!domains.is_array() || domains.empty() || domains.size() > 2) {
        throw ConfigError("norm: domains must hold one or two intervals");
    }
    std::vector<std::pair<double, double>> box;
    for (const json& d : domains) {
        if (!d.is_array() || d.size() != 2) throw ConfigError("norm: a domain must be [a, b]");
        box.emplace_back(d[0].get<double>(), d[1].get<double>());
    }
    const int level = j.contains("level") ? j.at("level").get<int>() : 0;
    return GridPartition::uniform(box, level);
}

int cmd_norm(const std::string& path, const std::string& json_out, std::ostream& out) {
    config::LoadedJson loaded = config::load_json(path);
    const json& j = loaded.value;
    double norm = 0.0;
    std::size_t cells = 0;
    Regularizer reg = make_entropy();
    try {
        if (!j.is_object() || !j.contains("domains") || !j.contains("function") || !j.contains("regularizer")) {
            throw ConfigError("norm: need domains, function and regularizer");
        }
        reg = config::parse_regularizer(j.at("regularizer"));
        const GridPartition grid = partition_from(j);
        cells = grid.cell_count();
        const MeasureSpec nu_spec =
            j.contains("measure") ? config::parse_measure(j.at("measure"), loaded.dir) : MeasureSpec::lebesgue();
        const GridMeasure nu = bin_measure(nu_spec, grid);

        const json& fj = j.at("function");
        std::vector<double> values;
        if (fj.contains("constant")) {
            values.assign(cells, fj.at("constant").get<double>());
        } else if (fj.contains("values")) {
            values = fj.at("values").get<std::vector<double>>();
        } else if (fj.contains("file")) {
            fs::path p(fj.at("file").get<std::string>());
            if (p.is_relative()) p = loaded.dir / p;
            values = load_cell_masses(p.string());
        } else if (fj.contains("density_of")) {
            const GridMeasure mu = bin_measure(config::parse_measure(fj.at("density_of"), loaded.dir), grid);
            values = binned_density(mu, nu).values;
        } else {
            throw ConfigError("norm: function needs constant, values, file or density_of");
        }
        if (values.size() != cells) {
            throw ConfigError("norm: function has " + std::to_string(values.size()) + " values for " +
                              std::to_string(cells) + " cells");
        }
        const double bound = j.contains("bound") ? j.at("bound").get<double>() : 1.0;
        norm = luxemburg_norm(reg, GridFunction{grid, std::move(values)}, nu, bound);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("norm: ") + e.what());
    }

    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", norm);
    out << buf << '\n';
    if (!json_out.empty()) {
        json r = stamp("norm", j, seed_of(j)).to_json();
        r["norm"] = norm;
        r["regularizer"] = reg.name();
        r["cells"] = cells;
        write_json_file(json_out, r);
    }
    return kOk;
}

// ---- verify ---------------------------------------------------------------

struct Check {
    std::string name;
    std::string status;  // PASS, FAIL or INFO
    std::string detail;
};

int cmd_verify(const std::string& path, const std::string& json_out, std::ostream& out) {
    config::LoadedJson loaded = config::load_json(path);
    const json& j = loaded.value;
    if (!j.is_object()) throw ConfigError("verify: config must hold a JSON object");

    std::vector<Check> checks;
    json result = stamp("verify", j, seed_of(j)).to_json();
    std::optional<Regularizer> reg;
    std::optional<TransportProblem> prob;

    if (j.contains("problem")) {
        json problem_json;
        config::ProblemConfig cfg = problem_from(j.at("problem"), loaded.dir, problem_json);
        try {
            prob = assemble(cfg.spec, cfg.reg, cfg.gamma);
        } catch (const std::exception& e) {
            throw ConfigError(std::string("problem: ") + e.what());
        }
        reg = cfg.reg;
    } else if (j.contains("regularizer")) {
        reg = config::parse_regularizer(j.at("regularizer"));
    }
    if (!reg) throw ConfigError("verify: need a problem or a regularizer");

    const auto violations = check_invariants(*reg);
    std::string vdetail;
    for (const auto& v : violations) vdetail += (vdetail.empty() ? "" : "; ") + v.check + ": " + v.detail;
    checks.push_back({"regularizer.invariants", violations.empty() ? "PASS" : "FAIL",
                      violations.empty() ? reg->name() : vdetail});

    if (prob) {
        const ExistenceReport ex = validate_existence_conditions(*prob);
        checks.push_back({"existence.marginal_norms", ex.norms_finite ? "INFO" : "WARN",
                          fmt(ex.marginal_norm1) + ", " + fmt(ex.marginal_norm2)});
        checks.push_back({"existence.growth", ex.growth_condition ? "INFO" : "WARN",
                          "C_mul " + fmt(ex.multiplicative_constant) + ", C_add " + fmt(ex.additive_constant)});
        checks.push_back({"existence.density_floor", ex.dual_guarantee ? "INFO" : "WARN", fmt(ex.density_floor)});
        checks.push_back({"existence.conjugate_integral", ex.conjugate_integrable ? "INFO" : "WARN",
                          fmt(ex.conjugate_integral)});
        result["existence"] = json{{"marginal_norm1", ex.marginal_norm1},
                                   {"marginal_norm2", ex.marginal_norm2},
                                   {"multiplicative_constant", ex.multiplicative_constant},
                                   {"additive_constant", ex.additive_constant},
                                   {"density_floor", ex.density_floor},
                                   {"conjugate_integral", ex.conjugate_integral},
                                   {"warnings", ex.warnings}};
    }

    if (j.contains("plan")) {
        if (!prob) throw ConfigError("verify: a plan needs a problem");
        fs::path p(j.at("plan").get<std::string>());
        if (p.is_relative()) p = loaded.dir / p;
        const DenseMatrix plan = read_plan_csv(p, prob->rows(), prob->cols());
        const auto& vals = plan.values();
        const bool finite = std::all_of(vals.begin(), vals.end(), [](double x) { return std::isfinite(x); });
        const auto neg = std::count_if(vals.begin(), vals.end(), [](double x) { return x < 0.0; });
        checks.push_back({"plan.finite", finite ? "PASS" : "FAIL", ""});
        checks.push_back({"plan.positivity", neg == 0 ? "PASS" : "FAIL", std::to_string(neg) + " negative entries"});
        const double tol = j.contains("residual_tol") ? j.at("residual_tol").get<double>() : 1e-6;
        const Residuals res = marginal_residuals(*prob, plan);
        checks.push_back({"plan.marginal_residual", res.total() <= tol ? "PASS" : "FAIL",
                          fmt(res.total()) + " (tol " + fmt(tol) + ")"});
        result["residual"] = residual_json(res);
        result["primal_value"] = primal_objective(*prob, plan);
    }

    if (j.contains("schedule")) {
        const Schedule schedule = config::parse_schedule(j.at("schedule"), loaded.dir);
        const CouplingReport cr = validate_coupling(schedule, *reg);
        checks.push_back({"coupling." + to_string(schedule.rule), cr.pass ? "PASS" : "FAIL",
                          "first/last " + fmt(cr.decrease_factor) + "; " + cr.criterion});
        result["coupling_verdict"] = cr.verdict();
        result["coupling_quantities"] = cr.quantities;
    }

    bool ok = true;
    json jchecks = json::array();
    for (const Check& c : checks) {
        char line[96];
        std::snprintf(line, sizeof line, "%-30s %-5s ", c.name.c_str(), c.status.c_str());
        out << line << c.detail << '\n';
        ok = ok && c.status != "FAIL";
        jchecks.push_back(json{{"name", c.name}, {"status", c.status}, {"detail", c.detail}});
    }
    out << (ok ? "verify: PASS" : "verify: FAIL") << '\n';
    result["checks"] = std::move(jchecks);
    result["pass"] = ok;
    if (!json_out.empty()) write_json_file(json_out, result);
    return ok ? kOk : kVerifyFailed;
}

// ---- conjugate-table --------------------------------------------------------

int cmd_conjugate_table(const std::string& reg_text, const std::string& reg_file, double from, double to,
                        int points, bool numeric, const std::string& csv, std::ostream& out) {
    json rj;
    if (!reg_file.empty()) {
        config::LoadedJson loaded = config::load_json(reg_file);
        rj = loaded.value.contains("regularizer") ? loaded.value.at("regularizer") : loaded.value;
    } else {
        try {
            rj = json::parse(reg_text);
        } catch (const json::parse_error& e) {
            throw ConfigError(std::string("--regularizer: ") + e.what());
        }
    }
    const Regularizer reg = config::parse_regularizer(rj);
    if (points < 2 || !(to > from)) throw ConfigError("conjugate-table: need --points >= 2 and --to > --from");

    std::ofstream file;
    if (!csv.empty()) file = open_output(csv);
    std::ostream& o = csv.empty() ? out : file;
    o << "# " << stamp("conjugate-table", rj, 0).comment() << " regularizer=" << reg.name() << '\n';
    o << (numeric ? "r,conj,numeric\n" : "r,conj\n");
    for (int k = 0; k < points; ++k) {
        const double r = from + (to - from) * k / (points - 1);
        o << fmt(r) << ',' << fmt(reg.conj(r));
        if (numeric) o << ',' << fmt(numeric_legendre(reg, r));
        o << '\n';
    }
    return kOk;
}

}  // namespace

void write_plan_csv(std::ostream& out, const DenseMatrix& plan, const std::string& comment) {
    if (!comment.empty()) out << "# " << comment << '\n';
    out << "i,j,p_ij\n";
    for (std::size_t i = 0; i < plan.rows(); ++i) {
        for (std::size_t j = 0; j < plan.cols(); ++j) out << i << ',' << j << ',' << fmt(plan(i, j)) << '\n';
    }
}

DenseMatrix read_plan_csv(const fs::path& path, std::size_t rows, std::size_t cols) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open plan file: " + path.string());
    DenseMatrix plan(rows, cols, 0.0);
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen && line.rfind("i,", 0) == 0) {
            header_seen = true;
            continue;
        }
        std::stringstream ss(line);
        std::string a, b, c;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, c)) {
            throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": expected i,j,p_ij");
        }
        long long i = 0, j = 0;
        double v = 0.0;
        try {
            i = std::stoll(a);
            j = std::stoll(b);
            v = std::stod(c);
        } catch (const std::logic_error&) {
            throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": non-numeric entry");
        }
        if (i < 0 || j < 0 || static_cast<std::size_t>(i) >= rows || static_cast<std::size_t>(j) >= cols) {
            throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": index out of range");
        }
        plan(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = v;
    }
    return plan;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Orlicz-regularized discrete optimal transport"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    SolveArgs sa;
    auto* solve = app.add_subcommand("solve", "solve one regularized (or exact) problem");
    solve->add_option("--problem,-p", sa.problem, "problem JSON file")->required();
    solve->add_option("--out,-o", sa.out, "plan density CSV");
    solve->add_option("--report,-r", sa.report, "report JSON (stdout if omitted)");
    solve->add_option("--mode", sa.mode, "auto | generic | entropy_closed_form | exact")
        ->check(CLI::IsMember({"auto", "generic", "entropy_closed_form", "exact"}));
    solve->add_option("--gamma", sa.gamma, "override gamma");
    solve->add_option("--level", sa.level, "override grid level");
    solve->add_option("--tol-marginal", sa.tol_marginal, "override marginal tolerance");
    solve->add_option("--max-sweeps", sa.max_sweeps, "override sweep limit");
    solve->add_option("--seed", sa.seed, "override seed");
    solve->add_flag("--history", sa.history, "record the dual objective after every sweep");

    std::string sweep_cfg, sweep_csv, sweep_summary;
    auto* sweep = app.add_subcommand("sweep", "run a discretization or smoothing sweep");
    sweep->add_option("--config,-c", sweep_cfg, "sweep JSON file")->required();
    sweep->add_option("--out,-o", sweep_csv, "sweep CSV (stdout if omitted)");
    sweep->add_option("--summary,-s", sweep_summary, "summary JSON");

    std::string norm_cfg, norm_json;
    auto* norm = app.add_subcommand("norm", "Luxemburg norm of a grid function");
    norm->add_option("--config,-c", norm_cfg, "norm JSON file")->required();
    norm->add_option("--json", norm_json, "result JSON");

    std::string verify_cfg, verify_json;
    auto* verify = app.add_subcommand("verify", "check a problem, plan and schedule");
    verify->add_option("--config,-c", verify_cfg, "verify JSON file")->required();
    verify->add_option("--json", verify_json, "result JSON");

    std::string ct_reg, ct_file, ct_csv;
    double ct_from = -5.0, ct_to = 5.0;
    int ct_points = 101;
    bool ct_numeric = false;
    auto* table = app.add_subcommand("conjugate-table", "tabulate the conjugate of a regularizer");
    auto* reg_opt = table->add_option("--regularizer", ct_reg, "regularizer JSON, e.g. '{\"family\":\"entropy\"}'");
    table->add_option("--config,-c", ct_file, "JSON file holding a regularizer")->excludes(reg_opt);
    table->add_option("--from", ct_from, "first r");
    table->add_option("--to", ct_to, "last r");
    table->add_option("--points", ct_points, "number of r values");
    table->add_flag("--numeric", ct_numeric, "add a numerical Legendre transform column");
    table->add_option("--out,-o", ct_csv, "CSV (stdout if omitted)");

    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::CallForVersion&) {
        out << kVersion << '\n';
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
    }

    try {
        if (*solve) return cmd_solve(sa, out);
        if (*sweep) return cmd_sweep(sweep_cfg, sweep_csv, sweep_summary, out);
        if (*norm) return cmd_norm(norm_cfg, norm_json, out);
        if (*verify) return cmd_verify(verify_cfg, verify_json, out);
        if (*table) {
            if (ct_reg.empty() && ct_file.empty()) throw ConfigError("conjugate-table: need --regularizer or --config");
            return cmd_conjugate_table(ct_reg, ct_file, ct_from, ct_to, ct_points, ct_numeric, ct_csv, out);
        }
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
    } catch (const json::exception& e) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
    }
    return kConfigError;
}

}  // namespace orlicz_ot::cli
