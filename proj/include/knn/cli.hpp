#pragma once

#include "knn/run_config.hpp"

#include <json.hpp>

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace knn {

struct ResultRow {
    std::string engine;  // series | quadrature | mc
    std::string manifold;
    long long k = 0;
    long long N = 0;
    double alpha = 1.0;
    double value = 0.0;
    double uncertainty = 0.0;
    std::uint64_t seed = 0;
    std::map<std::string, double> extras;  // CSV: folded into the note column
    std::string note;
};

struct Report {
    std::vector<ResultRow> rows;
    nlohmann::json summary = nlohmann::json::object();
};

constexpr int kSchemaVersion = 1;

/// Runs one configured computation. Throws std::invalid_argument for bad requests and other
/// exceptions for computational failures.
Report run(const RunConfig& cfg);

std::string render(const Report& r, OutputFormat format);

/// Seed actually used for site count N: the base seed mixed with N, so that estimates at
/// different N are statistically independent.
std::uint64_t seed_for(std::uint64_t base, long long N);

/// Parses argv, runs the subcommand and writes its output (atomically when a file is given).
/// Returns 0 on success, 1 on a computation error and 2 on a usage error.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace knn
