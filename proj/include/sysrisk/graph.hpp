#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace sysrisk {

/// Undirected simple graph on a fixed set of banks. Adjacency is symmetric
/// with a zero diagonal; every edge is a bidirectional lending relationship.
struct Topology {
    int n = 0;
    std::vector<std::uint8_t> adj;  // row-major n*n, entries in {0,1}

    bool edge(int i, int j) const { return adj[static_cast<std::size_t>(i) * n + j] != 0; }
    int degree(int i) const;
    int edge_count() const;
    std::vector<int> neighbors(int i) const;
    std::vector<int> degrees() const;
};

/// Builds a topology from 1-indexed unordered node pairs. Rejects
/// out-of-range indices, self-loops and duplicate edges.
Topology build_topology(int n_banks, const std::vector<std::pair<int, int>>& edges);

bool is_connected(const Topology& t);

struct CentralityScores {
    std::vector<double> pagerank;
    std::vector<int> degree;
    double alpha = 0.0;
    double beta = 0.0;
};

/// PageRank by direct linear solve: y = alpha * A * D^-1 * y + beta.
/// Every node must have degree >= 1 and 0 <= alpha < 1.
CentralityScores pagerank(const Topology& t, double alpha = 0.85, double beta = 1.0);

enum class Weighting { Degree, PageRank };

struct FragilityMeasures {
    double entropy = 0.0;  // nats
    double hhi = 0.0;
    std::vector<double> link_shares;
};

/// Link-share entropy and Herfindahl-Hirschman index. Degree weighting
/// uses p_j = deg(j) / (2 * #edges); PageRank weighting uses normalized
/// PageRank scores.
FragilityMeasures fragility(const Topology& t, Weighting weighting);

/// Articulation points of a connected graph, 0-indexed.
std::vector<int> cut_points(const Topology& t);

/// One canonical representative per isomorphism class of connected graphs
/// on n nodes. n <= 7.
std::vector<Topology> enumerate_connected_topologies(int n);

struct NamedTopology {
    std::string letter;  // "a" .. "h"
    std::string name;    // degree-sequence name, e.g. "4-1-1-1-1"
    Topology topology;
};

/// The eight 5-bank reference structures, in letter order. Exact edge sets
/// are a documented reconstruction (see data/topologies/README).
const std::vector<NamedTopology>& reference_topologies();

/// Reference structures keyed by letter ("b", "(b)"), full degree-sequence
/// name and, where unambiguous, the short distinct-degrees name ("2-1").
std::map<std::string, Topology> named_topologies();

/// Plain-text edge list: first line N, then one "i j" pair per line,
/// 1-indexed.
std::string to_edge_list(const Topology& t);
Topology topology_from_edge_list(std::istream& in);
Topology topology_from_edge_list_file(const std::string& path);

/// True if the two graphs are isomorphic (n <= 7 each).
bool isomorphic(const Topology& a, const Topology& b);

}  // namespace sysrisk
