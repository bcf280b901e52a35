#include "sysrisk/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sysrisk {

namespace fs = std::filesystem;

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stod(trim(tok)));
    return out;
}

std::string family_name(Family f) {
    switch (f) {
        case Family::Normal: return "normal";
        case Family::StudentT: return "student_t";
        case Family::CorrelatedSix: return "correlated_six";
    }
    return "?";
}

std::string mode_name(AllocationMode m) {
    switch (m) {
        case AllocationMode::FullDiversity: return "diversity";
        case AllocationMode::FullDiversification: return "diversification";
        case AllocationMode::MDiversified: return "m_diversified";
    }
    return "?";
}

std::string assignment_string(const std::vector<int>& a) {
    std::string s;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (i) s += '-';
        s += std::to_string(a[i] + 1);  // 1-indexed assets in output
    }
    return s;
}

const std::vector<std::string> kExperiments = {"fig1",      "fig2",     "dg",
                                               "contagion", "infection", "decompose",
                                               "optimize",  "sweep-s",  "topology-table"};

bool needs_topology(const std::string& experiment) {
    return experiment != "fig1" && experiment != "fig2" && experiment != "topology-table";
}

}  // namespace

void apply_config_entry(ScenarioConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "experiment") cfg.experiment = value;
    else if (key == "topology") cfg.topology = value;
    else if (key == "edges") cfg.edges_file = value;
    else if (key == "n_banks") cfg.n_banks = std::stoi(value);
    else if (key == "capital_to_assets") cfg.ratios.capital_to_assets = std::stod(value);
    else if (key == "external_to_capital") cfg.ratios.external_to_capital = std::stod(value);
    else if (key == "ib_asset_to_capital") cfg.ratios.ib_asset_to_capital = std::stod(value);
    else if (key == "ib_liability_to_capital") cfg.ratios.ib_liability_to_capital = std::stod(value);
    else if (key == "unit_loan") cfg.ratios.unit_loan = std::stod(value);
    else if (key == "family") cfg.family = value;
    else if (key == "v" || key == "dof") cfg.dof = std::stod(value);
    else if (key == "rho") cfg.rho = std::stod(value);
    else if (key == "p") cfg.p = std::stod(value);
    else if (key == "s") cfg.s = std::stod(value);
    else if (key == "s_list") cfg.s_list = parse_double_list(value);
    else if (key == "draws") cfg.draws = std::stoll(value);
    else if (key == "n_portfolios") cfg.n_portfolios = std::stoi(value);
    else if (key == "k") cfg.k_assets = std::stoi(value);
    else if (key == "n_min") cfg.n_min = std::stoi(value);
    else if (key == "n_max") cfg.n_max = std::stoi(value);
    else if (key == "seed") cfg.seed = std::stoull(value);
    else if (key == "threads") cfg.threads = std::stoi(value);
    else if (key == "out") cfg.out_dir = value;
    // Ignored bookkeeping keys, so an emitted manifest re-runs as a config.
    else if (key == "library_version" || key == "wall_seconds") {}
    else throw std::invalid_argument("unknown config key: " + key);
}

ScenarioConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    ScenarioConfig cfg;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected key = value");
        apply_config_entry(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

Topology resolve_topology(const ScenarioConfig& cfg) {
    if (!cfg.edges_file.empty()) return topology_from_edge_list_file(cfg.edges_file);
    if (cfg.topology == "none" || cfg.topology.empty())
        return build_topology(cfg.n_banks, {});
    if (cfg.topology == "complete") {
        std::vector<std::pair<int, int>> edges;
        for (int i = 1; i <= cfg.n_banks; ++i)
            for (int j = i + 1; j <= cfg.n_banks; ++j) edges.emplace_back(i, j);
        return build_topology(cfg.n_banks, edges);
    }
    auto named = named_topologies();
    if (auto it = named.find(cfg.topology); it != named.end()) return it->second;
    throw std::invalid_argument("unknown topology: " + cfg.topology);
}

std::vector<std::string> validate(const ScenarioConfig& cfg) {
    std::vector<std::string> diags;
    if (std::find(kExperiments.begin(), kExperiments.end(), cfg.experiment) == kExperiments.end())
        diags.push_back("experiment: unknown experiment '" + cfg.experiment + "'");
    if (!cfg.seed) diags.push_back("seed: a seed is mandatory (no wall-clock seeding)");
    if (cfg.p <= 0.0 || cfg.p >= 1.0) diags.push_back("p: must be in (0,1)");
    if (cfg.s < 1.0) diags.push_back("s: must be >= 1");
    if (cfg.rho < 0.0 || cfg.rho > 1.0) diags.push_back("rho: must be in [0,1]");
    if (cfg.draws < 1) diags.push_back("draws: must be >= 1");
    if (cfg.threads < 1) diags.push_back("threads: must be >= 1");
    if (cfg.n_banks < 1) diags.push_back("n_banks: must be >= 1");
    if (cfg.family != "normal" && cfg.family != "student_t" && cfg.family != "correlated_six")
        diags.push_back("family: must be normal, student_t or correlated_six");
    if (cfg.family == "student_t" && cfg.dof <= 0.0) diags.push_back("v: must be positive");
    try {
        cfg.ratios.validate();
    } catch (const std::exception& e) {
        diags.push_back(std::string("ratios: ") + e.what());
    }
    if (!diags.empty()) return diags;

    if (needs_topology(cfg.experiment)) {
        try {
            Topology t = resolve_topology(cfg);
            if (t.edge_count() > 0 && !is_connected(t))
                diags.push_back("topology: a topology with edges must be connected");
        } catch (const std::exception& e) {
            diags.push_back(std::string("topology: ") + e.what());
        }
    }
    return diags;
}

namespace {

class CsvWriter {
public:
    CsvWriter(const fs::path& path, const std::string& header) : out_(path) {
        if (!out_) throw std::runtime_error("cannot open output file: " + path.string());
        out_ << header << "\n";
    }
    template <typename... Args>
    void row(const Args&... args) {
        bool first = true;
        ((out_ << (first ? "" : ","), first = false, write(args)), ...);
        out_ << "\n";
    }

private:
    void write(double v) { out_ << format_double(v); }
    void write(const std::string& s) { out_ << s; }
    void write(const char* s) { out_ << s; }
    template <typename T>
        requires std::is_integral_v<T>
    void write(T v) { out_ << v; }
    std::ofstream out_;
};

AssetUniverse resolve_universe(const ScenarioConfig& cfg, int k_needed) {
    const double threshold = cfg.ratios.loss_threshold();
    if (cfg.family == "correlated_six") return build_correlated_six(cfg.rho, cfg.p, threshold);
    if (cfg.family == "student_t")
        return independent_universe(Family::StudentT, cfg.dof, k_needed, cfg.p, threshold);
    return independent_universe(Family::Normal, 0.0, k_needed, cfg.p, threshold);
}

void run_fig1(const ScenarioConfig& cfg, const fs::path& out) {
    std::vector<int> n_list;
    for (int n = cfg.n_min; n <= cfg.n_max; ++n) n_list.push_back(n);
    std::vector<FamilySpec> families = {{Family::Normal, 0.0}, {Family::StudentT, cfg.dof}};
    CostSpec spec{cfg.s};
    CsvWriter csv(out / "fig1.csv", "N,family,dof,mode,expected_cost,std_error,draws,seed");
    for (auto mode : {AllocationMode::FullDiversity, AllocationMode::FullDiversification}) {
        auto rows = simultaneity_sweep(n_list, families, cfg.p, spec, mode, cfg.draws, *cfg.seed);
        for (const auto& r : rows)
            csv.row(r.n_banks, family_name(r.family), r.dof, mode_name(r.mode), r.expected_cost,
                    r.std_error, r.n_draws, std::to_string(r.seed));
    }
}

void run_fig2(const ScenarioConfig& cfg, const fs::path& out) {
    CostSpec spec{cfg.s};
    auto rows = simultaneity_sweep({cfg.n_banks}, {{Family::Normal, 0.0}}, cfg.p, spec,
                                   AllocationMode::MDiversified, cfg.draws, *cfg.seed);
    CsvWriter csv(out / "fig2.csv", "N,m_diversified,expected_cost,std_error,draws,seed");
    for (const auto& r : rows)
        csv.row(r.n_banks, r.m_diversified, r.expected_cost, r.std_error, r.n_draws,
                std::to_string(r.seed));
}

void run_dg(const ScenarioConfig& cfg, const fs::path& out) {
    Scenario sc{resolve_topology(cfg), cfg.ratios, resolve_universe(cfg, cfg.k_assets)};
    DgLandscape lan = dg_landscape(sc, CostSpec{cfg.s}, cfg.n_portfolios, cfg.draws, *cfg.seed);
    CsvWriter csv(out / "dg.csv", "pattern_id,D,G,expected_cost,std_error,is_min");
    for (std::size_t i = 0; i < lan.points.size(); ++i) {
        const auto& pt = lan.points[i];
        csv.row(static_cast<std::int64_t>(i), pt.d, pt.g, pt.expected_cost, pt.std_error,
                static_cast<int>(i == static_cast<std::size_t>(lan.min_index)));
    }
}

void run_contagion(const ScenarioConfig& cfg, const fs::path& out) {
    Topology t = resolve_topology(cfg);
    Scenario sc{t, cfg.ratios, resolve_universe(cfg, t.n)};
    ContagionMatrix m = contagion_matrix(sc, cfg.draws, *cfg.seed);
    CsvWriter csv(out / "contagion.csv", "bank_i,bank_j,defaults_per_1000,events_i");
    for (int i = 0; i < m.n; ++i)
        for (int j = 0; j < m.n; ++j)
            csv.row(i + 1, j + 1, m(i, j), m.event_counts[i]);
}

void run_infection(const ScenarioConfig& cfg, const fs::path& out) {
    Topology t = resolve_topology(cfg);
    Scenario sc{t, cfg.ratios, resolve_universe(cfg, t.n)};
    InfectionScores scores = infection_scores(sc, cfg.draws, *cfg.seed);
    CentralityScores pr = pagerank(t);
    CsvWriter csv(out / "infection.csv",
                  "bank,infectivity,susceptibility,pagerank,single_default_events,"
                  "fundamental_defaults,contagious_defaults");
    for (int i = 0; i < t.n; ++i)
        csv.row(i + 1, scores.infectivity[i], scores.susceptibility[i], pr.pagerank[i],
                scores.single_default_events[i], scores.fundamental_defaults[i],
                scores.contagious_defaults[i]);
}

void run_decompose(const ScenarioConfig& cfg, const fs::path& out) {
    Topology t = resolve_topology(cfg);
    Scenario sc{t, cfg.ratios, resolve_universe(cfg, t.n)};
    DecompositionTable table = decompose_collective_defaults(sc, CostSpec{cfg.s}, cfg.draws,
                                                             *cfg.seed);
    CsvWriter csv(out / "decompose.csv", "index,banks,count,share");
    for (std::size_t i = 0; i < table.entries.size(); ++i) {
        const auto& e = table.entries[i];
        std::string banks;
        for (std::size_t b = 0; b < e.banks.size(); ++b)
            banks += (b ? "-" : "") + std::to_string(e.banks[b]);
        csv.row(static_cast<std::int64_t>(i + 1), banks, e.count, e.share);
    }
}

void run_optimize(const ScenarioConfig& cfg, const fs::path& out, const std::vector<double>& s_list,
                  const std::string& csv_name) {
    Topology t = resolve_topology(cfg);
    const double threshold = cfg.ratios.loss_threshold();
    Scenario sc{t, cfg.ratios, build_correlated_six(cfg.rho, cfg.p, threshold)};
    auto results = optimize_allocation_discrete(sc, s_list, cfg.draws, *cfg.seed, cfg.threads);

    CsvWriter csv(out / csv_name, "s,assignment,expected_cost,std_error,is_tie,is_canonical");
    for (const auto& res : results) {
        const int n = t.n;
        for (std::size_t code = 0; code < res.costs.size(); ++code) {
            std::vector<int> digits(n);
            std::size_t c = code;
            for (int i = n - 1; i >= 0; --i) {
                digits[i] = static_cast<int>(c % 6);
                c /= 6;
            }
            csv.row(res.s, assignment_string(digits), res.costs[code], res.std_errors[code],
                    static_cast<int>(res.is_tie(digits)), static_cast<int>(digits == res.canonical));
        }
    }
    CsvWriter opt(out / ("optimum_" + csv_name), "s,canonical_assignment,best_cost,best_std_error,n_ties");
    for (const auto& res : results)
        opt.row(res.s, assignment_string(res.canonical), res.best_cost, res.best_std_error,
                static_cast<std::int64_t>(res.ties.size()));
}

void run_topology_table(const ScenarioConfig& cfg, const fs::path& out) {
    auto rows = optimization_vs_topology(CostSpec{cfg.s}, cfg.rho, cfg.p, cfg.ratios, cfg.draws,
                                         *cfg.seed, cfg.threads);
    CsvWriter csv(out / "topology_table.csv",
                  "topology_id,edges,entropy_degree,entropy_pagerank,hhi,cost_full_diversity,"
                  "se_full_diversity,cost_full_diversification,se_full_diversification,"
                  "cost_optimal,se_optimal,optimal_assignment");
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        csv.row(static_cast<std::int64_t>(i + 1), r.topology.edge_count(), r.entropy_degree,
                r.entropy_pagerank, r.hhi, r.cost_full_diversity, r.se_full_diversity,
                r.cost_full_diversification, r.se_full_diversification, r.cost_optimal,
                r.se_optimal, assignment_string(r.optimal_assignment));
    }
}

void write_manifest(const ScenarioConfig& cfg, const fs::path& out, double wall_seconds) {
    std::ofstream m(out / "manifest.txt");
    m << "library_version = " << kLibraryVersion << "\n";
    m << "experiment = " << cfg.experiment << "\n";
    m << "topology = " << cfg.topology << "\n";
    m << "edges = " << cfg.edges_file << "\n";
    m << "n_banks = " << cfg.n_banks << "\n";
    m << "capital_to_assets = " << format_double(cfg.ratios.capital_to_assets) << "\n";
    m << "external_to_capital = " << format_double(cfg.ratios.external_to_capital) << "\n";
    m << "ib_asset_to_capital = " << format_double(cfg.ratios.ib_asset_to_capital) << "\n";
    m << "ib_liability_to_capital = " << format_double(cfg.ratios.ib_liability_to_capital) << "\n";
    m << "unit_loan = " << format_double(cfg.ratios.unit_loan) << "\n";
    m << "family = " << cfg.family << "\n";
    m << "v = " << format_double(cfg.dof) << "\n";
    m << "rho = " << format_double(cfg.rho) << "\n";
    m << "p = " << format_double(cfg.p) << "\n";
    m << "s = " << format_double(cfg.s) << "\n";
    m << "s_list = ";
    for (std::size_t i = 0; i < cfg.s_list.size(); ++i)
        m << (i ? "," : "") << format_double(cfg.s_list[i]);
    m << "\n";
    m << "draws = " << cfg.draws << "\n";
    m << "n_portfolios = " << cfg.n_portfolios << "\n";
    m << "k = " << cfg.k_assets << "\n";
    m << "n_min = " << cfg.n_min << "\n";
    m << "n_max = " << cfg.n_max << "\n";
    m << "seed = " << *cfg.seed << "\n";
    m << "threads = " << cfg.threads << "\n";
    m << "wall_seconds = " << format_double(wall_seconds) << "\n";
}

}  // namespace

void write_returns_csv(const std::string& path, const ReturnSample& sample) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    for (int k = 0; k < sample.k; ++k) out << (k ? "," : "") << "asset_" << (k + 1);
    out << "\n";
    for (int i = 0; i < sample.n_draws; ++i) {
        auto row = sample.row(i);
        for (int k = 0; k < sample.k; ++k) out << (k ? "," : "") << format_double(row[k]);
        out << "\n";
    }
}

int run(const ScenarioConfig& cfg) {
    auto diags = validate(cfg);
    if (!diags.empty()) {
        for (const auto& d : diags) std::fprintf(stderr, "config error: %s\n", d.c_str());
        return 1;
    }
    fs::path out(cfg.out_dir);
    fs::create_directories(out);
    // Stage results so a failed run leaves no partial artifacts behind.
    fs::path stage = out / ".sysrisk-stage";
    fs::remove_all(stage);
    fs::create_directories(stage);
    auto t0 = std::chrono::steady_clock::now();

    try {
        if (cfg.experiment == "fig1") run_fig1(cfg, stage);
        else if (cfg.experiment == "fig2") run_fig2(cfg, stage);
        else if (cfg.experiment == "dg") run_dg(cfg, stage);
        else if (cfg.experiment == "contagion") run_contagion(cfg, stage);
        else if (cfg.experiment == "infection") run_infection(cfg, stage);
        else if (cfg.experiment == "decompose") run_decompose(cfg, stage);
        else if (cfg.experiment == "optimize") run_optimize(cfg, stage, {cfg.s}, "optimize.csv");
        else if (cfg.experiment == "sweep-s") run_optimize(cfg, stage, cfg.s_list, "sweep_s.csv");
        else if (cfg.experiment == "topology-table") run_topology_table(cfg, stage);
    } catch (const std::exception& e) {
        fs::remove_all(stage);
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }

    double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(cfg, stage, wall);
    for (const auto& entry : fs::directory_iterator(stage))
        fs::rename(entry.path(), out / entry.path().filename());
    fs::remove_all(stage);
    return 0;
}

}  // namespace sysrisk
