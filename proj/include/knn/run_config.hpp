#pragma once

#include "knn/curvature.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace knn {

enum class OutputFormat { Default, Csv, Json };

/// Everything one CLI invocation needs. Serialises to canonical JSON (sorted keys, every
/// field present), and parsing that JSON gives back the same config.
struct RunConfig {
    std::string subcommand;
    std::string manifold = "flat-torus";
    std::map<std::string, double> params;
    std::vector<long long> k{1};
    std::vector<long long> N{100};
    long long trials = 100000;
    std::uint64_t seed = 0;
    int streams = 1;
    double alpha = 1.0;
    std::string output;  // empty: standard output
    OutputFormat format = OutputFormat::Default;
    bool fit = false;
    bool nuisance = false;
    int order = 8;       // area-series order for `invert`, coefficient order for `curvature`
    CurvatureJet jet;    // input of `invert`
    std::string off_path;
    CurvatureOptions tolerances;

    [[nodiscard]] nlohmann::json to_json() const;
    static RunConfig from_json(const nlohmann::json& j);
    /// Throws std::invalid_argument on inconsistent settings.
    void validate() const;
    /// csv for mc and sweep, json otherwise, unless set explicitly.
    [[nodiscard]] OutputFormat resolved_format() const;
};

std::vector<std::string> subcommand_names();

}  // namespace knn
