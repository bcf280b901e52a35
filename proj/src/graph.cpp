#include "sysrisk/graph.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace sysrisk {

int Topology::degree(int i) const {
    int k = 0;
    for (int j = 0; j < n; ++j) k += adj[static_cast<std::size_t>(i) * n + j];
    return k;
}

int Topology::edge_count() const {
    int e = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) e += edge(i, j);
    return e;
}

std::vector<int> Topology::neighbors(int i) const {
    std::vector<int> out;
    for (int j = 0; j < n; ++j)
        if (edge(i, j)) out.push_back(j);
    return out;
}

std::vector<int> Topology::degrees() const {
    std::vector<int> out(n);
    for (int i = 0; i < n; ++i) out[i] = degree(i);
    return out;
}

Topology build_topology(int n_banks, const std::vector<std::pair<int, int>>& edges) {
    if (n_banks <= 0) throw std::invalid_argument("build_topology: n_banks must be positive");
    Topology t;
    t.n = n_banks;
    t.adj.assign(static_cast<std::size_t>(n_banks) * n_banks, 0);
    for (const auto& [a, b] : edges) {
        if (a < 1 || a > n_banks || b < 1 || b > n_banks)
            throw std::out_of_range("build_topology: node index out of range");
        if (a == b) throw std::invalid_argument("build_topology: self-loop not allowed");
        int i = a - 1, j = b - 1;
        if (t.edge(i, j)) throw std::invalid_argument("build_topology: duplicate edge");
        t.adj[static_cast<std::size_t>(i) * n_banks + j] = 1;
        t.adj[static_cast<std::size_t>(j) * n_banks + i] = 1;
    }
    return t;
}

bool is_connected(const Topology& t) {
    if (t.n == 0) return false;
    std::vector<char> seen(t.n, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (int j = 0; j < t.n; ++j) {
            if (t.edge(v, j) && !seen[j]) {
                seen[j] = 1;
                ++count;
                stack.push_back(j);
            }
        }
    }
    return count == t.n;
}

CentralityScores pagerank(const Topology& t, double alpha, double beta) {
    if (alpha < 0.0 || alpha >= 1.0) throw std::invalid_argument("pagerank: alpha must be in [0,1)");
    const int n = t.n;
    std::vector<int> deg = t.degrees();
    for (int i = 0; i < n; ++i)
        if (deg[i] == 0) throw std::invalid_argument("pagerank: isolated node (zero out-degree)");

    // y = alpha * A * D^-1 * y + beta  =>  (I - alpha * A * D^-1) y = beta
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (t.edge(i, j)) m(i, j) -= alpha / deg[j];
    Eigen::VectorXd rhs = Eigen::VectorXd::Constant(n, beta);
    Eigen::VectorXd y = m.partialPivLu().solve(rhs);

    CentralityScores out;
    out.pagerank.assign(y.data(), y.data() + n);
    out.degree = deg;
    out.alpha = alpha;
    out.beta = beta;
    return out;
}

static FragilityMeasures fragility_from_shares(std::vector<double> shares) {
    FragilityMeasures out;
    double entropy = 0.0, hhi = 0.0;
    for (double p : shares) {
        if (p > 0.0) entropy -= p * std::log(p);
        hhi += p * p;
    }
    out.entropy = entropy;
    out.hhi = hhi;
    out.link_shares = std::move(shares);
    return out;
}

FragilityMeasures fragility(const Topology& t, Weighting weighting) {
    if (weighting == Weighting::Degree) {
        int total = 2 * t.edge_count();
        if (total == 0) throw std::invalid_argument("fragility: degree weighting requires at least one edge");
        std::vector<double> shares(t.n);
        for (int i = 0; i < t.n; ++i) shares[i] = static_cast<double>(t.degree(i)) / total;
        return fragility_from_shares(std::move(shares));
    }
    if (!is_connected(t)) throw std::invalid_argument("fragility: pagerank weighting requires a connected graph");
    CentralityScores c = pagerank(t);
    double total = std::accumulate(c.pagerank.begin(), c.pagerank.end(), 0.0);
    std::vector<double> shares(t.n);
    for (int i = 0; i < t.n; ++i) shares[i] = c.pagerank[i] / total;
    return fragility_from_shares(std::move(shares));
}

std::vector<int> cut_points(const Topology& t) {
    const int n = t.n;
    std::vector<int> disc(n, -1), low(n, 0);
    std::vector<char> is_cut(n, 0);
    int timer = 0;

    std::function<void(int, int)> dfs = [&](int v, int parent) {
        disc[v] = low[v] = timer++;
        int children = 0;
        for (int u = 0; u < n; ++u) {
            if (!t.edge(v, u)) continue;
            if (u == parent) continue;
            if (disc[u] >= 0) {
                low[v] = std::min(low[v], disc[u]);
            } else {
                ++children;
                dfs(u, v);
                low[v] = std::min(low[v], low[u]);
                if (parent >= 0 && low[u] >= disc[v]) is_cut[v] = 1;
            }
        }
        if (parent < 0 && children > 1) is_cut[v] = 1;
    };

    for (int v = 0; v < n; ++v)
        if (disc[v] < 0) dfs(v, -1);

    std::vector<int> out;
    for (int v = 0; v < n; ++v)
        if (is_cut[v]) out.push_back(v);
    return out;
}

namespace {

// Edge bit layout for graphs on <= 7 nodes: bit index of pair (i<j).
int pair_bit(int n, int i, int j) {
    // i < j
    return i * n - i * (i + 1) / 2 + (j - i - 1);
}

std::uint64_t edge_bits(const Topology& t) {
    std::uint64_t bits = 0;
    for (int i = 0; i < t.n; ++i)
        for (int j = i + 1; j < t.n; ++j)
            if (t.edge(i, j)) bits |= std::uint64_t{1} << pair_bit(t.n, i, j);
    return bits;
}

Topology topology_from_bits(int n, std::uint64_t bits) {
    Topology t;
    t.n = n;
    t.adj.assign(static_cast<std::size_t>(n) * n, 0);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (bits & (std::uint64_t{1} << pair_bit(n, i, j))) {
                t.adj[static_cast<std::size_t>(i) * n + j] = 1;
                t.adj[static_cast<std::size_t>(j) * n + i] = 1;
            }
    return t;
}

std::uint64_t permute_bits(int n, std::uint64_t bits, const std::vector<int>& perm) {
    std::uint64_t out = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            if (!(bits & (std::uint64_t{1} << pair_bit(n, i, j)))) continue;
            int a = perm[i], b = perm[j];
            if (a > b) std::swap(a, b);
            out |= std::uint64_t{1} << pair_bit(n, a, b);
        }
    return out;
}

std::uint64_t canonical_bits(int n, std::uint64_t bits, const std::vector<std::vector<int>>& perms) {
    std::uint64_t best = ~std::uint64_t{0};
    for (const auto& perm : perms) best = std::min(best, permute_bits(n, bits, perm));
    return best;
}

std::vector<std::vector<int>> all_permutations(int n) {
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<std::vector<int>> perms;
    do {
        perms.push_back(perm);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return perms;
}

}  // namespace

std::vector<Topology> enumerate_connected_topologies(int n) {
    if (n < 1 || n > 7) throw std::invalid_argument("enumerate_connected_topologies: n must be in [1,7]");
    const int n_pairs = n * (n - 1) / 2;
    const auto perms = all_permutations(n);
    std::set<std::uint64_t> canon;
    for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << n_pairs); ++bits) {
        Topology t = topology_from_bits(n, bits);
        if (!is_connected(t)) continue;
        canon.insert(canonical_bits(n, bits, perms));
    }
    std::vector<Topology> out;
    out.reserve(canon.size());
    for (std::uint64_t bits : canon) out.push_back(topology_from_bits(n, bits));
    return out;
}

bool isomorphic(const Topology& a, const Topology& b) {
    if (a.n != b.n) return false;
    if (a.n > 7) throw std::invalid_argument("isomorphic: n must be <= 7");
    auto da = a.degrees();
    auto db = b.degrees();
    std::sort(da.begin(), da.end());
    std::sort(db.begin(), db.end());
    if (da != db) return false;
    const auto perms = all_permutations(a.n);
    return canonical_bits(a.n, edge_bits(a), perms) == canonical_bits(b.n, edge_bits(b), perms);
}

const std::vector<NamedTopology>& reference_topologies() {
    // Reconstructed edge sets for the eight 5-bank reference structures.
    // Structures are named after their degree sequence; see
    // data/topologies/README.md for the reconstruction notes.
    static const std::vector<NamedTopology> topologies = [] {
        using E = std::vector<std::pair<int, int>>;
        std::vector<NamedTopology> v;
        v.push_back({"a", "3-2-1-1-1", build_topology(5, E{{1, 2}, {1, 3}, {1, 4}, {2, 5}})});
        v.push_back({"b", "2-2-2-1-1", build_topology(5, E{{1, 2}, {1, 3}, {2, 4}, {3, 5}})});
        v.push_back({"c", "3-2-2-2-1", build_topology(5, E{{1, 2}, {1, 3}, {1, 4}, {2, 3}, {4, 5}})});
        v.push_back({"d", "4-1-1-1-1", build_topology(5, E{{1, 2}, {1, 3}, {1, 4}, {1, 5}})});
        v.push_back({"e", "4-2-2-1-1", build_topology(5, E{{1, 2}, {1, 3}, {1, 4}, {1, 5}, {2, 3}})});
        v.push_back({"f", "4-3-2-2-1", build_topology(5, E{{1, 2}, {1, 3}, {1, 4}, {1, 5}, {2, 3}, {2, 4}})});
        v.push_back({"g", "4-3-3-2-2", build_topology(5, E{{1, 2}, {1, 3}, {1, 4}, {1, 5}, {2, 3}, {2, 4}, {3, 5}})});
        v.push_back({"h", "4-3-3-3-3", build_topology(5, E{{1, 2}, {1, 3}, {1, 4}, {1, 5}, {2, 3}, {2, 5}, {3, 4}, {4, 5}})});
        return v;
    }();
    return topologies;
}

std::map<std::string, Topology> named_topologies() {
    std::map<std::string, Topology> out;
    for (const auto& nt : reference_topologies()) {
        out[nt.letter] = nt.topology;
        out["(" + nt.letter + ")"] = nt.topology;
        out[nt.name] = nt.topology;
    }
    // Short distinct-degrees aliases, where unique among the eight.
    out["2-1"] = out.at("b");
    out["4-1"] = out.at("d");
    return out;
}

std::string to_edge_list(const Topology& t) {
    std::ostringstream os;
    os << t.n << "\n";
    for (int i = 0; i < t.n; ++i)
        for (int j = i + 1; j < t.n; ++j)
            if (t.edge(i, j)) os << (i + 1) << " " << (j + 1) << "\n";
    return os.str();
}

Topology topology_from_edge_list(std::istream& in) {
    int n = 0;
    if (!(in >> n)) throw std::runtime_error("edge list: missing node count");
    std::vector<std::pair<int, int>> edges;
    int a, b;
    while (in >> a >> b) edges.emplace_back(a, b);
    return build_topology(n, edges);
}

Topology topology_from_edge_list_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("edge list: cannot open " + path);
    return topology_from_edge_list(in);
}

}  // namespace sysrisk
