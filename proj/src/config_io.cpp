#include "orlicz_ot/config_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace orlicz_ot::config {

namespace fs = std::filesystem;

LoadedJson load_json(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    LoadedJson out;
    out.text = buf.str();
    out.dir = path.parent_path();
    try {
        out.value = json::parse(out.text);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return out;
}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

const json& require(const json& j, const char* key, const char* where) {
    if (!j.is_object() || !j.contains(key)) {
        throw ConfigError(std::string(where) + ": missing key \"" + key + "\"");
    }
    return j.at(key);
}

double number(const json& j, const char* what) {
    if (!j.is_number()) throw ConfigError(std::string(what) + " must be a number");
    return j.get<double>();
}

fs::path resolve(const fs::path& base_dir, const std::string& file) {
    const fs::path p(file);
    return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
}

// Numeric rows of a CSV file; blank and `#` lines skipped, a non-numeric
// first row is treated as a header.
std::vector<std::vector<double>> read_numeric_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open file: " + path.string());
    std::vector<std::vector<double>> rows;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        bool ok = true;
        while (std::getline(ss, cell, ',')) {
            if (cell.find_first_not_of(" \t") == std::string::npos) {
                row.push_back(std::numeric_limits<double>::quiet_NaN());
                continue;
            }
            try {
                std::size_t used = 0;
                row.push_back(std::stod(cell, &used));
            } catch (const std::logic_error&) {
                ok = false;
                break;
            }
        }
        if (!ok) {
            if (first) {
                first = false;
                continue;
            }
            throw ConfigError(path.string() + ": non-numeric row: " + line);
        }
        first = false;
        rows.push_back(std::move(row));
    }
    return rows;
}

Family parse_family(const std::string& name) {
    if (name == "entropy") return Family::entropy;
    if (name == "power") return Family::power;
    if (name == "tsallis") return Family::tsallis;
    throw ConfigError("unknown regularizer family: " + name);
}

}  // namespace

Regularizer parse_regularizer(const json& j) {
    try {
        const std::string family = require(j, "family", "regularizer").get<std::string>();
        if (family == "custom") {
            std::vector<std::pair<double, double>> table;
            for (const auto& row : require(j, "density_table", "regularizer")) {
                if (!row.is_array() || row.size() != 2) throw ConfigError("density_table rows must be [t, phi]");
                table.emplace_back(number(row[0], "density_table t"), number(row[1], "density_table phi"));
            }
            return make_custom(std::move(table));
        }
        if (family == "shifted") {
            return shifted_positive_part(parse_regularizer(require(j, "base", "regularizer")),
                                         number(require(j, "t0", "regularizer"), "t0"));
        }
        if (family == "complementary") {
            return complementary(parse_regularizer(require(j, "base", "regularizer")));
        }
        const Family f = parse_family(family);
        double param = 0.0;
        if (f == Family::power) param = number(require(j, "p", "regularizer"), "p");
        if (f == Family::tsallis) param = number(require(j, "q", "regularizer"), "q");
        return make_builtin(f, param);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("regularizer: ") + e.what());
    }
}

MeasureSpec parse_measure(const json& j, const fs::path& base_dir) {
    try {
        const std::string kind = require(j, "kind", "measure").get<std::string>();
        if (kind == "lebesgue") {
            return MeasureSpec::lebesgue(j.contains("scale") ? number(j.at("scale"), "scale") : 1.0);
        }
        if (kind == "atom") {
            const json& at = require(j, "at", "atom");
            std::vector<double> loc;
            if (at.is_array()) {
                for (const auto& x : at) loc.push_back(number(x, "atom location"));
            } else {
                loc.push_back(number(at, "atom location"));
            }
            return MeasureSpec::atom(std::move(loc), j.contains("mass") ? number(j.at("mass"), "mass") : 1.0);
        }
        if (kind == "mixture") {
            std::vector<MeasureSpec> parts;
            for (const auto& part : require(j, "parts", "mixture")) parts.push_back(parse_measure(part, base_dir));
            return MeasureSpec::mixture(std::move(parts));
        }
        if (kind == "cells") {
            const std::string file = require(j, "file", "cells").get<std::string>();
            return MeasureSpec::cells(load_cell_masses(resolve(base_dir, file).string()));
        }
        throw ConfigError("unknown measure kind: " + kind);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("measure: ") + e.what());
    }
}

CostSpec parse_cost(const json& j, const fs::path& base_dir) {
    CostSpec cost;
    const std::string kind = require(j, "kind", "cost").get<std::string>();
    if (kind == "squared_distance") {
        cost.kind = CostSpec::Kind::squared_distance;
    } else if (kind == "absolute_distance") {
        cost.kind = CostSpec::Kind::absolute_distance;
    } else if (kind == "zero") {
        cost.kind = CostSpec::Kind::zero;
    } else if (kind == "matrix") {
        cost.kind = CostSpec::Kind::matrix;
        std::vector<std::vector<double>> rows;
        if (j.contains("values")) {
            for (const auto& row : j.at("values")) {
                std::vector<double> r;
                for (const auto& v : row) r.push_back(number(v, "cost entry"));
                rows.push_back(std::move(r));
            }
        } else {
            rows = read_numeric_csv(resolve(base_dir, require(j, "file", "cost").get<std::string>()));
        }
        if (rows.empty() || rows.front().empty()) throw ConfigError("cost matrix is empty");
        std::vector<double> data;
        for (const auto& r : rows) {
            if (r.size() != rows.front().size()) throw ConfigError("cost matrix rows differ in length");
            data.insert(data.end(), r.begin(), r.end());
        }
        cost.matrix = DenseMatrix(rows.size(), rows.front().size(), std::move(data));
    } else {
        throw ConfigError("unknown cost kind: " + kind);
    }
    return cost;
}

SolverConfig parse_solver(const json& j) {
    SolverConfig c;
    if (j.is_null()) return c;
    if (!j.is_object()) throw ConfigError("solver must be an object");
    try {
        if (j.contains("tol_marginal")) c.tol_marginal = number(j.at("tol_marginal"), "tol_marginal");
        if (j.contains("tol_root")) c.tol_root = number(j.at("tol_root"), "tol_root");
        if (j.contains("max_sweeps")) c.max_sweeps = j.at("max_sweeps").get<int>();
        if (j.contains("bracket_growth")) c.bracket_growth = number(j.at("bracket_growth"), "bracket_growth");
        if (j.contains("mode")) c.mode = parse_solve_mode(j.at("mode").get<std::string>());
        c.validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("solver: ") + e.what());
    }
    return c;
}

Kernel parse_kernel(const std::string& text) {
    if (text == "bump") return Kernel::bump;
    if (text == "box") return Kernel::box;
    throw ConfigError("unknown kernel: " + text);
}

ProblemConfig parse_problem(const json& j, const fs::path& base_dir) {
    try {
        ProblemSpec spec;
        const json& domains = require(j, "domains", "problem");
        if (!domains.is_array() || domains.size() != 2) throw ConfigError("domains must hold two intervals");
        auto interval = [](const json& d) {
            if (!d.is_array() || d.size() != 2) throw ConfigError("a domain must be [a, b]");
            return std::pair<double, double>{number(d[0], "domain bound"), number(d[1], "domain bound")};
        };
        spec.domain1 = interval(domains[0]);
        spec.domain2 = interval(domains[1]);
        spec.level = require(j, "level", "problem").get<int>();
        const json& marginals = require(j, "marginals", "problem");
        if (!marginals.is_array() || marginals.size() != 2) throw ConfigError("marginals must hold two measures");
        spec.mu1 = parse_measure(marginals[0], base_dir);
        spec.mu2 = parse_measure(marginals[1], base_dir);
        if (j.contains("base_measures")) {
            const json& base = j.at("base_measures");
            if (!base.is_array() || base.size() != 2) throw ConfigError("base_measures must hold two measures");
            spec.lambda1 = parse_measure(base[0], base_dir);
            spec.lambda2 = parse_measure(base[1], base_dir);
        }
        spec.cost = parse_cost(require(j, "cost", "problem"), base_dir);
        if (j.contains("quadrature_order")) spec.quadrature_order = j.at("quadrature_order").get<int>();
        Regularizer reg = parse_regularizer(require(j, "regularizer", "problem"));
        const double gamma = j.contains("gamma") ? number(j.at("gamma"), "gamma") : 1.0;
        if (!(gamma > 0.0)) throw ConfigError("gamma must be > 0");
        const SolverConfig solver = parse_solver(j.contains("solver") ? j.at("solver") : json());
        const std::uint64_t seed = j.contains("seed") ? j.at("seed").get<std::uint64_t>() : 0;
        return ProblemConfig{std::move(spec), std::move(reg), gamma, solver, seed};
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("problem: ") + e.what());
    }
}

Schedule parse_schedule(const json& j, const fs::path& base_dir) {
    Schedule s;
    try {
        s.rule = parse_coupling_rule(require(j, "coupling_rule", "schedule").get<std::string>());
        if (j.contains("schedule")) {
            for (const auto& e : j.at("schedule")) {
                ScheduleEntry entry;
                entry.level = require(e, "k", "schedule entry").get<int>();
                entry.gamma = number(require(e, "gamma", "schedule entry"), "gamma");
                if (e.contains("delta") && !e.at("delta").is_null()) entry.delta = number(e.at("delta"), "delta");
                if (e.contains("h") && !e.at("h").is_null()) entry.h = number(e.at("h"), "h");
                s.entries.push_back(entry);
            }
        } else if (j.contains("schedule_csv")) {
            for (const auto& row : read_numeric_csv(resolve(base_dir, j.at("schedule_csv").get<std::string>()))) {
                if (row.size() < 2) throw ConfigError("schedule_csv rows need k,gamma");
                ScheduleEntry entry;
                entry.level = static_cast<int>(row[0]);
                entry.gamma = row[1];
                if (row.size() > 2 && !std::isnan(row[2])) entry.delta = row[2];
                if (row.size() > 3 && !std::isnan(row[3])) entry.h = row[3];
                s.entries.push_back(entry);
            }
        } else {
            throw ConfigError("schedule: need \"schedule\" or \"schedule_csv\"");
        }
        s.validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("schedule: ") + e.what());
    }
    return s;
}

SweepConfig parse_sweep(const json& j, const fs::path& base_dir) {
    const std::string kind = j.contains("kind") ? j.at("kind").get<std::string>() : "discretization";
    if (kind != "discretization" && kind != "smoothing") throw ConfigError("unknown sweep kind: " + kind);
    json problem_json;
    fs::path problem_dir = base_dir;
    if (j.contains("template")) {
        problem_json = j.at("template");
    } else if (j.contains("problem")) {
        const fs::path path = resolve(base_dir, j.at("problem").get<std::string>());
        LoadedJson loaded = load_json(path);
        problem_json = std::move(loaded.value);
        problem_dir = loaded.dir;
    } else {
        throw ConfigError("sweep: need \"template\" or \"problem\"");
    }
    // The template's gamma is irrelevant; the schedule supplies it.
    if (!problem_json.contains("gamma")) problem_json["gamma"] = 1.0;
    ProblemConfig problem = parse_problem(problem_json, problem_dir);
    if (j.contains("solver")) problem.solver = parse_solver(j.at("solver"));
    if (j.contains("seed")) problem.seed = j.at("seed").get<std::uint64_t>();
    Schedule schedule = parse_schedule(j, base_dir);
    const Kernel kernel = j.contains("kernel") ? parse_kernel(j.at("kernel").get<std::string>()) : Kernel::bump;
    return SweepConfig{kind, std::move(problem), std::move(schedule), kernel};
}

}  // namespace orlicz_ot::config
