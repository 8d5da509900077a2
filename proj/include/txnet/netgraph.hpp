#ifndef TXNET_NETGRAPH_HPP
#define TXNET_NETGRAPH_HPP

#include "txnet/assoc.hpp"
#include "txnet/diffexpr.hpp"
#include "txnet/netinfer.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace txnet {

enum class NodeKind { Gene, Clinical };
enum class DeDirection { Up, Down, NotApplicable };
enum class EdgeKind { GeneGene, GeneClinical };

const char* node_kind_name(NodeKind kind) noexcept;
const char* de_direction_name(DeDirection direction) noexcept;
const char* edge_kind_name(EdgeKind kind) noexcept;

struct Node {
    std::string id;
    NodeKind kind = NodeKind::Gene;
    DeDirection direction = DeDirection::NotApplicable;

    friend bool operator==(const Node&, const Node&) = default;
};

struct Edge {
    std::size_t u = 0; // u < v, indices into nodes()
    std::size_t v = 0;
    double weight = 0;
    int sign = 0;
    EdgeKind kind = EdgeKind::GeneGene;

    friend bool operator==(const Edge&, const Edge&) = default;
};

/**
 * Simple undirected graph over gene and clinical nodes. Nodes are kept sorted
 * by id and edges by endpoint index, so two networks with the same content
 * compare and serialize identically.
 */
class Network {
public:
    Network() = default;
    Network(std::vector<Node> nodes, std::vector<Edge> edges);

    const std::vector<Node>& nodes() const { return nodes_; }
    const std::vector<Edge>& edges() const { return edges_; }
    std::optional<std::size_t> node_index(std::string_view id) const;
    /// Neighbor lists, sorted, one per node.
    const std::vector<std::vector<std::size_t>>& adjacency() const { return adjacency_; }

    friend bool operator==(const Network& a, const Network& b) { return a.nodes_ == b.nodes_ && a.edges_ == b.edges_; }

private:
    std::vector<Node> nodes_;
    std::vector<Edge> edges_;
    std::vector<std::vector<std::size_t>> adjacency_;
    std::unordered_map<std::string, std::size_t> lookup_;
};

/**
 * Union of gene-gene and gene-clinical edges. Repeated edges are merged when
 * they agree in sign and kind and rejected otherwise; nodes enter only through
 * an edge. Gene direction comes from the sign of log2_fc in the DE table.
 */
Network assemble(const std::vector<GeneEdge>& gene_edges, const std::vector<ClinicalEdge>& clinical_edges,
                 const std::vector<DEResult>& de_table);

using Partition = std::vector<int>; // module label per node, contiguous from 0

struct LouvainOptions {
    double gamma = 1.0;
    std::uint64_t seed = 0;
    bool verify_moves = false; // recompute Q around every move and throw unless it strictly increases
};

struct LouvainStats {
    std::size_t moves = 0;
    std::size_t levels = 0;
    double min_delta_q = 0; // smallest accepted gain
};

/**
 * Louvain optimization of the Reichardt-Bornholdt modularity on the
 * unweighted graph: greedy local moves (ties to the lowest community id) and
 * aggregation, repeated until nothing moves. The node visit order is a seeded
 * shuffle of the id-sorted nodes.
 */
Partition cluster_modules(const Network& net, const LouvainOptions& options, LouvainStats* stats = nullptr);

/// Q = sum_c (e_c / m - gamma (d_c / 2m)^2) on the unweighted graph.
double modularity_score(const Network& net, const Partition& partition, double gamma = 1.0);

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b);

struct ModuleSummary {
    int module_id = 0;
    std::size_t size = 0;
    std::size_t n_genes = 0;
    std::vector<std::string> clinical_members;
    double frac_upregulated = 0;   // NaN when no gene has a direction
    double frac_downregulated = 0;
    std::vector<std::string> genes;
};

/// Sorted by size descending, then module id.
std::vector<ModuleSummary> summarize_modules(const Network& net, const Partition& partition);

nlohmann::json modules_json(const std::vector<ModuleSummary>& modules);

std::string format_edgelist(const Network& net);
Network parse_edgelist(std::string_view text, const std::string& source = "");
std::string format_graphml(const Network& net, const Partition* partition = nullptr);
std::string format_modules_tsv(const Network& net, const Partition& partition);

} // namespace txnet

#endif
