#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sysrisk/analysis.hpp"

namespace sysrisk {

inline constexpr const char* kLibraryVersion = "0.1.0";

/// One experiment run: topology selection, model parameters, seed and
/// output directory. Defaults follow the baseline parameterization
/// (s = 4, balance ratios from BalanceRatios). The seed is mandatory.
struct ScenarioConfig {
    std::string experiment;  // fig1 fig2 dg contagion infection decompose optimize sweep-s topology-table
    std::string topology = "";    // reference letter/name, "none", "complete", or empty for edge file
    std::string edges_file = "";  // plain-text edge list
    int n_banks = 5;
    BalanceRatios ratios;
    std::string family = "normal";  // normal | student_t | correlated_six
    double dof = 3.0;
    double rho = 0.0;
    double p = 0.1;
    double s = 4.0;
    std::vector<double> s_list = {4.0, 8.0, 15.0};  // sweep-s
    std::int64_t draws = 20000;
    int n_portfolios = 5000;  // dg
    int k_assets = 3;         // dg
    int n_min = 2, n_max = 30;  // fig1
    std::optional<std::uint64_t> seed;
    int threads = 1;
    std::string out_dir = ".";
};

/// Parses a flat key = value config file ('#' starts a comment).
ScenarioConfig load_config_file(const std::string& path);

/// Applies one key/value pair; throws on unknown keys or unparsable values.
void apply_config_entry(ScenarioConfig& cfg, const std::string& key, const std::string& value);

/// Empty iff run() would accept the config.
std::vector<std::string> validate(const ScenarioConfig& cfg);

/// Resolves the configured topology (named, file or edgeless/complete).
Topology resolve_topology(const ScenarioConfig& cfg);

/// Runs the experiment and writes one or more CSVs plus manifest.txt into
/// out_dir. Returns 0 on success. Identical configs produce byte-identical
/// CSVs.
int run(const ScenarioConfig& cfg);

/// Serializes a double with 17 significant digits (round-trip stable).
std::string format_double(double v);

/// Audit dump of a return sample: one row per draw, one column per asset.
void write_returns_csv(const std::string& path, const ReturnSample& sample);

}  // namespace sysrisk
