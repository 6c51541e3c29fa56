#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "dscope/likert.hpp"
#include "dscope/remote_source.hpp"
#include "dscope/tree_sampler.hpp"

namespace dscope {

/// Everything one experiment run needs. Loaded from a JSON config file and/or
/// CLI flags (CLI wins); validated before any network call. The API key is
/// read from the environment only.
struct RunConfig {
    std::string source = "toy";  // toy | replay | remote
    std::string toy_table;       // toy LM table path
    std::string fixtures;        // replay input fixture file
    RemoteConfig remote;

    double temperature = 10.0;  // T for E(s)
    /// Default grid: per-ordering scores for all three conditions; the report
    /// adds the ascending+reversed positional average alongside.
    std::vector<ChoiceOrdering> orderings{ChoiceOrdering::ascending, ChoiceOrdering::reversed,
                                          ChoiceOrdering::random};
    std::uint64_t seed = 0;
    std::string template_path;
    std::string choices_path;
    std::string out_dir = "out";
    int workers = 1;
    int shuffles = 10000;
    double abort_fail_fraction = 0.10;
    bool record_fixtures = true;
    std::vector<std::string> formats{"text", "json", "csv"};
    /// Optional per-label variant override, label -> accepted token strings.
    std::map<std::string, std::vector<std::string>> label_variants;

    // tree mode
    TreeConfig tree;
    double tree_min_probability = 0.001;

    static RunConfig from_json(const nlohmann::json& doc);
    static RunConfig from_file(const std::string& path);
    nlohmann::json to_json() const;

    void validate() const;
};

}  // namespace dscope
