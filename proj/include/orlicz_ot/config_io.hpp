#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "orlicz_ot/experiments.hpp"
#include "orlicz_ot/grid_measures.hpp"
#include "orlicz_ot/solvers.hpp"
#include "orlicz_ot/transport_core.hpp"
#include "orlicz_ot/young_functions.hpp"

namespace orlicz_ot::config {

using json = nlohmann::json;

// Malformed or inconsistent configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// File contents and parsed JSON. Throws ConfigError.
struct LoadedJson {
    json value;
    std::string text;
    std::filesystem::path dir;
};
LoadedJson load_json(const std::filesystem::path& path);

// 64-bit FNV-1a of the bytes, as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

// {"family": "entropy"} | {"family": "power", "p": 2} | {"family": "tsallis", "q": 1.5}
// | {"family": "custom", "density_table": [[t, phi], ...]}
// | {"family": "shifted", "t0": 1, "base": {...}} | {"family": "complementary", "base": {...}}
Regularizer parse_regularizer(const json& j);

// {"kind": "lebesgue", "scale": s} | {"kind": "atom", "at": x, "mass": m}
// | {"kind": "mixture", "parts": [...]} | {"kind": "cells", "file": "masses.csv"}
MeasureSpec parse_measure(const json& j, const std::filesystem::path& base_dir);

// {"kind": "squared_distance" | "absolute_distance" | "zero"}
// | {"kind": "matrix", "values": [[...]]} | {"kind": "matrix", "file": "cost.csv"}
CostSpec parse_cost(const json& j, const std::filesystem::path& base_dir);

// Keys tol_marginal, tol_root, max_sweeps, bracket_growth, mode; missing keys keep defaults.
SolverConfig parse_solver(const json& j);

Kernel parse_kernel(const std::string& text);

struct ProblemConfig {
    ProblemSpec spec;
    Regularizer reg;
    double gamma = 1.0;
    SolverConfig solver;
    std::uint64_t seed = 0;
};

// {"domains": [[a, b], [c, d]], "level": k, "marginals": [m1, m2],
//  "base_measures": [l1, l2], "cost": {...}, "regularizer": {...}, "gamma": g,
//  "quadrature_order": 3, "solver": {...}, "seed": 0}
ProblemConfig parse_problem(const json& j, const std::filesystem::path& base_dir);

// {"coupling_rule": "...", "schedule": [{"k": 3, "gamma": 0.1, "delta": 0.05, "h": ...}, ...]}
// or "schedule_csv": "file.csv" with columns k,gamma[,delta[,h]].
Schedule parse_schedule(const json& j, const std::filesystem::path& base_dir);

struct SweepConfig {
    std::string kind;  // discretization | smoothing
    ProblemConfig problem;
    Schedule schedule;
    Kernel kernel = Kernel::bump;
};

// {"kind": "discretization", "template": {...problem...} | "problem": "path.json",
//  "coupling_rule": ..., "schedule": [...], "kernel": "bump", "solver": {...}, "seed": 0}
SweepConfig parse_sweep(const json& j, const std::filesystem::path& base_dir);

}  // namespace orlicz_ot::config
