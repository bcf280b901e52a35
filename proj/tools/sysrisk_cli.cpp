#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "sysrisk/scenario.hpp"

int main(int argc, char** argv) {
    CLI::App app{"sysrisk: interbank clearing and external-asset allocation experiments"};
    app.set_version_flag("--version", std::string(sysrisk::kLibraryVersion));

    std::string config_path;
    bool validate_only = false;
    app.add_option("--config", config_path, "flat key = value config file ('#' comments)")
        ->envname("SYSRISK_CONFIG");
    app.add_flag("--validate", validate_only, "check the config and exit without running");

    // Every flag funnels through the same key = value path as the config
    // file; flags (and SYSRISK_* env vars) override file entries.
    std::vector<std::pair<std::string, std::string>> overrides;
    auto add = [&](const std::string& flag, const std::string& key, const std::string& env,
                   const std::string& help) {
        return app
            .add_option_function<std::string>(
                flag, [&overrides, key](const std::string& v) { overrides.emplace_back(key, v); },
                help)
            ->envname(env);
    };
    add("--experiment", "experiment", "SYSRISK_EXPERIMENT",
        "one of fig1, fig2, dg, contagion, infection, decompose, optimize, sweep-s, "
        "topology-table");
    add("--topology", "topology", "SYSRISK_TOPOLOGY",
        "reference structure (letter or degree-sequence name), 'none' or 'complete'");
    add("--edges", "edges", "SYSRISK_EDGES", "edge-list file (first line N, then 'i j' pairs)");
    add("--n-banks", "n_banks", "SYSRISK_N_BANKS", "bank count for 'none'/'complete' topologies");
    add("--family", "family", "SYSRISK_FAMILY", "normal, student_t or correlated_six");
    add("--v", "v", "SYSRISK_V", "Student-t degrees of freedom");
    add("--rho", "rho", "SYSRISK_RHO", "correlation parameter of the six-asset set, in [0,1]");
    add("--p", "p", "SYSRISK_P", "single-asset fundamental default probability, in (0,1)");
    add("--s", "s", "SYSRISK_S", "social cost exponent, >= 1");
    add("--s-list", "s_list", "SYSRISK_S_LIST", "comma-separated exponents for sweep-s");
    add("--draws", "draws", "SYSRISK_DRAWS", "Monte Carlo draws per cell");
    add("--n-portfolios", "n_portfolios", "SYSRISK_N_PORTFOLIOS",
        "random portfolios for the dg experiment");
    add("--k", "k", "SYSRISK_K", "asset count for the dg experiment");
    add("--n-min", "n_min", "SYSRISK_N_MIN", "smallest N for fig1");
    add("--n-max", "n_max", "SYSRISK_N_MAX", "largest N for fig1");
    add("--seed", "seed", "SYSRISK_SEED", "RNG seed (mandatory; no wall-clock seeding)");
    add("--threads", "threads", "SYSRISK_THREADS", "worker threads for allocation sweeps");
    add("--out", "out", "SYSRISK_OUT", "output directory (default: current directory)");

    CLI11_PARSE(app, argc, argv);

    sysrisk::ScenarioConfig cfg;
    try {
        if (!config_path.empty()) cfg = sysrisk::load_config_file(config_path);
        for (const auto& [key, value] : overrides) sysrisk::apply_config_entry(cfg, key, value);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    }

    if (validate_only) {
        auto diags = sysrisk::validate(cfg);
        for (const auto& d : diags) std::fprintf(stderr, "config error: %s\n", d.c_str());
        if (diags.empty()) std::printf("ok\n");
        return diags.empty() ? 0 : 1;
    }
    return sysrisk::run(cfg);
}
