#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "orlicz_ot/dense_matrix.hpp"

namespace orlicz_ot::cli {

enum ExitCode : int { kOk = 0, kConfigError = 1, kNotConverged = 2, kVerifyFailed = 3 };

// Parses argv (including the program name) and runs one command.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Plan density CSV: optional `#` comment lines, header i,j,p_ij, one row per cell.
void write_plan_csv(std::ostream& out, const DenseMatrix& plan, const std::string& comment);

// Reads a plan CSV into a rows x cols matrix; cells not listed are zero.
// Throws config::ConfigError on malformed rows or out-of-range indices.
DenseMatrix read_plan_csv(const std::filesystem::path& path, std::size_t rows, std::size_t cols);

}  // namespace orlicz_ot::cli
