#include "txnet/netgraph.hpp"

#include "txnet/error.hpp"
#include "txnet/textio.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <stdexcept>

namespace txnet {

const char* node_kind_name(NodeKind kind) noexcept {
    return kind == NodeKind::Gene ? "gene" : "clinical";
}

const char* de_direction_name(DeDirection direction) noexcept {
    switch (direction) {
    case DeDirection::Up: return "up";
    case DeDirection::Down: return "down";
    case DeDirection::NotApplicable: break;
    }
    return "n/a";
}

const char* edge_kind_name(EdgeKind kind) noexcept {
    return kind == EdgeKind::GeneGene ? "gene-gene" : "gene-clinical";
}

Network::Network(std::vector<Node> nodes, std::vector<Edge> edges) {
    std::vector<std::size_t> order(nodes.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return nodes[a].id < nodes[b].id; });
    std::vector<std::size_t> new_index(nodes.size());
    nodes_.reserve(nodes.size());
    for (std::size_t k = 0; k < order.size(); ++k) {
        new_index[order[k]] = k;
        nodes_.push_back(std::move(nodes[order[k]]));
        if (!lookup_.emplace(nodes_.back().id, k).second) {
            throw Error(Errc::InvalidArgument, "duplicate node id " + nodes_.back().id);
        }
    }
    for (auto& e : edges) {
        if (e.u >= nodes_.size() || e.v >= nodes_.size()) {
            throw Error(Errc::InvalidArgument, "edge endpoint out of range");
        }
        std::size_t u = new_index[e.u];
        std::size_t v = new_index[e.v];
        if (u == v) {
            throw Error(Errc::InvalidArgument, "self-loop on " + nodes_[u].id);
        }
        if (u > v) {
            std::swap(u, v);
        }
        const bool gg = nodes_[u].kind == NodeKind::Gene && nodes_[v].kind == NodeKind::Gene;
        const bool cc = nodes_[u].kind == NodeKind::Clinical && nodes_[v].kind == NodeKind::Clinical;
        if (cc || (gg != (e.kind == EdgeKind::GeneGene))) {
            throw Error(Errc::InvalidArgument, "edge kind does not match node kinds: " + nodes_[u].id + " - " + nodes_[v].id);
        }
        e.u = u;
        e.v = v;
    }
    std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) { return std::tie(a.u, a.v) < std::tie(b.u, b.v); });
    for (std::size_t k = 1; k < edges.size(); ++k) {
        if (edges[k].u == edges[k - 1].u && edges[k].v == edges[k - 1].v) {
            throw Error(Errc::InvalidArgument, "parallel edge " + nodes_[edges[k].u].id + " - " + nodes_[edges[k].v].id);
        }
    }
    edges_ = std::move(edges);
    adjacency_.assign(nodes_.size(), {});
    for (const auto& e : edges_) {
        adjacency_[e.u].push_back(e.v);
        adjacency_[e.v].push_back(e.u);
    }
    for (auto& a : adjacency_) {
        std::sort(a.begin(), a.end());
    }
}

std::optional<std::size_t> Network::node_index(std::string_view id) const {
    const auto it = lookup_.find(std::string(id));
    if (it == lookup_.end()) {
        return std::nullopt;
    }
    return it->second;
}

Network assemble(const std::vector<GeneEdge>& gene_edges, const std::vector<ClinicalEdge>& clinical_edges,
                 const std::vector<DEResult>& de_table) {
    std::map<std::string, DeDirection> direction;
    for (const auto& r : de_table) {
        if (r.status == DeStatus::Tested && r.log2_fc != 0 && std::isfinite(r.log2_fc)) {
            direction[r.gene_id] = r.log2_fc > 0 ? DeDirection::Up : DeDirection::Down;
        }
    }
    std::vector<Node> nodes;
    std::map<std::string, std::size_t> index;
    const auto node = [&](const std::string& id, NodeKind kind) {
        const auto it = index.find(id);
        if (it != index.end()) {
            if (nodes[it->second].kind != kind) {
                throw Error(Errc::ContradictoryEdge, "node " + id + " used both as gene and clinical variable");
            }
            return it->second;
        }
        DeDirection dir = DeDirection::NotApplicable;
        if (kind == NodeKind::Gene) {
            const auto d = direction.find(id);
            if (d != direction.end()) {
                dir = d->second;
            }
        }
        nodes.push_back({id, kind, dir});
        index.emplace(id, nodes.size() - 1);
        return nodes.size() - 1;
    };
    std::map<std::pair<std::string, std::string>, Edge> merged;
    const auto add = [&](const std::string& a, NodeKind ka, const std::string& b, NodeKind kb, double weight, int sign,
                         EdgeKind kind) {
        if (a == b) {
            throw Error(Errc::InvalidArgument, "self-loop on " + a);
        }
        const std::size_t u = node(a, ka);
        const std::size_t v = node(b, kb);
        const auto key = a < b ? std::make_pair(a, b) : std::make_pair(b, a);
        const auto [it, inserted] = merged.emplace(key, Edge{u, v, weight, sign, kind});
        if (!inserted && (it->second.sign != sign || it->second.kind != kind)) {
            throw Error(Errc::ContradictoryEdge, "contradictory edges between " + key.first + " and " + key.second);
        }
    };
    for (const auto& e : gene_edges) {
        add(e.source, NodeKind::Gene, e.target, NodeKind::Gene, e.partial_corr, e.sign, EdgeKind::GeneGene);
    }
    for (const auto& e : clinical_edges) {
        add(e.gene_id, NodeKind::Gene, e.clinical_var, NodeKind::Clinical, e.slope, e.sign, EdgeKind::GeneClinical);
    }
    std::vector<Edge> edges;
    edges.reserve(merged.size());
    for (const auto& [key, e] : merged) {
        edges.push_back(e);
    }
    return Network(std::move(nodes), std::move(edges));
}

namespace {

// Weighted graph for one Louvain level. Self-loop weight holds edges folded
// inside an aggregated node.
struct LevelGraph {
    std::vector<std::vector<std::pair<std::size_t, double>>> adj;
    std::vector<double> self;
    std::vector<double> degree;
    double two_m = 0;
};

LevelGraph base_graph(const Network& net) {
    LevelGraph g;
    const std::size_t n = net.nodes().size();
    g.adj.assign(n, {});
    g.self.assign(n, 0.0);
    g.degree.assign(n, 0.0);
    for (const auto& e : net.edges()) {
        g.adj[e.u].emplace_back(e.v, 1.0);
        g.adj[e.v].emplace_back(e.u, 1.0);
        g.degree[e.u] += 1;
        g.degree[e.v] += 1;
    }
    g.two_m = 2.0 * static_cast<double>(net.edges().size());
    return g;
}

double level_modularity(const LevelGraph& g, const std::vector<std::size_t>& comm, double gamma) {
    const std::size_t n = g.adj.size();
    std::vector<double> in(n, 0.0), tot(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        tot[comm[i]] += g.degree[i];
        in[comm[i]] += 2 * g.self[i];
        for (const auto& [j, w] : g.adj[i]) {
            if (comm[j] == comm[i]) {
                in[comm[i]] += w; // each internal edge is seen from both ends
            }
        }
    }
    double q = 0;
    for (std::size_t c = 0; c < n; ++c) {
        q += in[c] / g.two_m - gamma * (tot[c] / g.two_m) * (tot[c] / g.two_m);
    }
    return q;
}

// One round of local moves. Gains are scaled by 2m^2 so that the unweighted
// gamma = 1 case is evaluated in exact integer arithmetic.
bool local_moves(const LevelGraph& g, std::vector<std::size_t>& comm, double gamma, std::mt19937_64& rng,
                 const LouvainOptions& options, LouvainStats& stats) {
    const std::size_t n = g.adj.size();
    std::vector<double> tot(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        tot[comm[i]] += g.degree[i];
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);

    std::vector<double> link(n, 0.0);
    std::vector<std::size_t> touched;
    bool any = false;
    bool improved = true;
    while (improved) {
        improved = false;
        for (const std::size_t i : order) {
            const std::size_t current = comm[i];
            touched.clear();
            for (const auto& [j, w] : g.adj[i]) {
                const std::size_t c = comm[j];
                if (link[c] == 0 && std::find(touched.begin(), touched.end(), c) == touched.end()) {
                    touched.push_back(c);
                }
                link[c] += w;
            }
            const double k = g.degree[i];
            tot[current] -= k;
            const auto gain = [&](std::size_t c) { return g.two_m * link[c] - gamma * k * tot[c]; };
            const double stay = gain(current);
            std::size_t best = current;
            double best_gain = stay;
            std::sort(touched.begin(), touched.end());
            for (const std::size_t c : touched) {
                if (c == current) {
                    continue;
                }
                const double gc = gain(c);
                if (gc > best_gain || (best != current && gc == best_gain && c < best)) {
                    best = c;
                    best_gain = gc;
                }
            }
            if (best != current && best_gain > stay) {
                const double delta = (best_gain - stay) / (g.two_m * g.two_m / 2);
                double q_before = 0;
                if (options.verify_moves) {
                    q_before = level_modularity(g, comm, gamma);
                }
                comm[i] = best;
                tot[best] += k;
                if (options.verify_moves && !(level_modularity(g, comm, gamma) > q_before)) {
                    throw std::logic_error("Louvain accepted a move that does not increase modularity");
                }
                if (stats.moves == 0 || delta < stats.min_delta_q) {
                    stats.min_delta_q = delta;
                }
                ++stats.moves;
                improved = true;
                any = true;
            } else {
                tot[current] += k;
            }
            for (const auto& [j, w] : g.adj[i]) {
                link[comm[j]] = 0;
            }
            for (const std::size_t c : touched) {
                link[c] = 0;
            }
        }
    }
    return any;
}

// Relabels communities 0..k-1 by ascending old id and builds the quotient graph.
LevelGraph aggregate(const LevelGraph& g, std::vector<std::size_t>& comm) {
    const std::size_t n = g.adj.size();
    std::vector<std::size_t> relabel(n, n);
    std::size_t k = 0;
    {
        std::vector<bool> used(n, false);
        for (std::size_t i = 0; i < n; ++i) {
            used[comm[i]] = true;
        }
        for (std::size_t c = 0; c < n; ++c) {
            if (used[c]) {
                relabel[c] = k++;
            }
        }
    }
    for (auto& c : comm) {
        c = relabel[c];
    }
    LevelGraph out;
    out.adj.assign(k, {});
    out.self.assign(k, 0.0);
    out.degree.assign(k, 0.0);
    out.two_m = g.two_m;
    std::vector<std::map<std::size_t, double>> between(k);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t ci = comm[i];
        out.self[ci] += g.self[i];
        out.degree[ci] += g.degree[i];
        for (const auto& [j, w] : g.adj[i]) {
            const std::size_t cj = comm[j];
            if (ci == cj) {
                out.self[ci] += w / 2; // seen from both ends
            } else {
                between[ci][cj] += w;
            }
        }
    }
    for (std::size_t c = 0; c < k; ++c) {
        out.adj[c].assign(between[c].begin(), between[c].end());
    }
    return out;
}

} // namespace

Partition cluster_modules(const Network& net, const LouvainOptions& options, LouvainStats* stats) {
    const std::size_t n = net.nodes().size();
    if (n == 0 || net.edges().empty()) {
        throw Error(Errc::EmptyGraph, "cannot cluster an empty graph");
    }
    LouvainStats local;
    std::mt19937_64 rng(options.seed);
    LevelGraph g = base_graph(net);
    std::vector<std::size_t> membership(n);
    std::iota(membership.begin(), membership.end(), 0);
    while (true) {
        std::vector<std::size_t> comm(g.adj.size());
        std::iota(comm.begin(), comm.end(), 0);
        if (!local_moves(g, comm, options.gamma, rng, options, local)) {
            break;
        }
        ++local.levels;
        const std::size_t before = g.adj.size();
        g = aggregate(g, comm);
        for (auto& m : membership) {
            m = comm[m];
        }
        if (g.adj.size() == before) {
            break;
        }
    }
    // contiguous labels in order of first appearance over id-sorted nodes
    Partition out(n);
    std::map<std::size_t, int> label;
    for (std::size_t i = 0; i < n; ++i) {
        const auto [it, inserted] = label.emplace(membership[i], static_cast<int>(label.size()));
        out[i] = it->second;
    }
    if (stats != nullptr) {
        *stats = local;
    }
    return out;
}

double modularity_score(const Network& net, const Partition& partition, double gamma) {
    const std::size_t n = net.nodes().size();
    if (partition.size() != n) {
        throw Error(Errc::InvalidArgument, "partition size does not match node count");
    }
    const double m = static_cast<double>(net.edges().size());
    if (m == 0) {
        return 0.0;
    }
    std::map<int, double> internal, degree;
    for (const auto& e : net.edges()) {
        if (partition[e.u] == partition[e.v]) {
            internal[partition[e.u]] += 1;
        }
        degree[partition[e.u]] += 1;
        degree[partition[e.v]] += 1;
    }
    double q = 0;
    for (const auto& [c, d] : degree) {
        const auto it = internal.find(c);
        const double e_c = it == internal.end() ? 0.0 : it->second;
        q += e_c / m - gamma * (d / (2 * m)) * (d / (2 * m));
    }
    return q;
}

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) {
        throw Error(Errc::InvalidArgument, "partitions differ in length");
    }
    const auto choose2 = [](double x) { return x * (x - 1) / 2; };
    std::map<std::pair<int, int>, double> joint;
    std::map<int, double> ra, rb;
    for (std::size_t i = 0; i < a.size(); ++i) {
        joint[{a[i], b[i]}] += 1;
        ra[a[i]] += 1;
        rb[b[i]] += 1;
    }
    double index = 0, sa = 0, sb = 0;
    for (const auto& [k, v] : joint) {
        index += choose2(v);
    }
    for (const auto& [k, v] : ra) {
        sa += choose2(v);
    }
    for (const auto& [k, v] : rb) {
        sb += choose2(v);
    }
    const double expected = sa * sb / choose2(static_cast<double>(a.size()));
    const double max_index = (sa + sb) / 2;
    if (max_index == expected) {
        return index == expected ? 1.0 : 0.0;
    }
    return (index - expected) / (max_index - expected);
}

std::vector<ModuleSummary> summarize_modules(const Network& net, const Partition& partition) {
    if (partition.size() != net.nodes().size()) {
        throw Error(Errc::InvalidArgument, "partition size does not match node count");
    }
    std::map<int, ModuleSummary> by_id;
    std::map<int, std::pair<std::size_t, std::size_t>> up_down;
    for (std::size_t i = 0; i < partition.size(); ++i) {
        auto& s = by_id[partition[i]];
        s.module_id = partition[i];
        ++s.size;
        const auto& node = net.nodes()[i];
        if (node.kind == NodeKind::Clinical) {
            s.clinical_members.push_back(node.id);
            continue;
        }
        ++s.n_genes;
        s.genes.push_back(node.id);
        if (node.direction == DeDirection::Up) {
            ++up_down[s.module_id].first;
        } else if (node.direction == DeDirection::Down) {
            ++up_down[s.module_id].second;
        }
    }
    std::vector<ModuleSummary> out;
    for (auto& [id, s] : by_id) {
        const auto [up, down] = up_down[id];
        const double directed = static_cast<double>(up + down);
        s.frac_upregulated = directed > 0 ? static_cast<double>(up) / directed : std::nan("");
        s.frac_downregulated = directed > 0 ? static_cast<double>(down) / directed : std::nan("");
        out.push_back(std::move(s));
    }
    std::stable_sort(out.begin(), out.end(), [](const ModuleSummary& a, const ModuleSummary& b) {
        return a.size != b.size ? a.size > b.size : a.module_id < b.module_id;
    });
    return out;
}

nlohmann::json modules_json(const std::vector<ModuleSummary>& modules) {
    nlohmann::json out = nlohmann::json::array();
    const auto number = [](double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); };
    for (const auto& m : modules) {
        out.push_back({{"module_id", m.module_id},
                       {"size", m.size},
                       {"n_genes", m.n_genes},
                       {"clinical_members", m.clinical_members},
                       {"frac_upregulated", number(m.frac_upregulated)},
                       {"frac_downregulated", number(m.frac_downregulated)},
                       {"genes", m.genes}});
    }
    return out;
}

std::string format_edgelist(const Network& net) {
    std::string out = "#txnet-network\n";
    for (const auto& n : net.nodes()) {
        out += std::string("node\t") + n.id + '\t' + node_kind_name(n.kind) + '\t' + de_direction_name(n.direction) + '\n';
    }
    for (const auto& e : net.edges()) {
        out += "edge\t" + net.nodes()[e.u].id + '\t' + net.nodes()[e.v].id + '\t' + textio::format_double(e.weight) + '\t' +
               std::to_string(e.sign) + '\t' + edge_kind_name(e.kind) + '\n';
    }
    return out;
}

Network parse_edgelist(std::string_view text, const std::string& source) {
    using PK = ParseError::Kind;
    std::vector<Node> nodes;
    std::map<std::string, std::size_t> index;
    std::vector<Edge> edges;
    std::size_t start = 0;
    std::size_t line_no = 0;
    bool header = false;
    while (start < text.size()) {
        auto pos = text.find('\n', start);
        if (pos == std::string_view::npos) {
            pos = text.size();
        }
        const auto line = text.substr(start, pos - start);
        start = pos + 1;
        ++line_no;
        if (line_no == 1) {
            if (line != "#txnet-network") {
                throw ParseError(PK::BadHeader, source, line_no, "expected #txnet-network");
            }
            header = true;
            continue;
        }
        if (line.empty()) {
            continue;
        }
        const auto f = textio::split_tabs(line);
        if (f[0] == "node" && f.size() == 4) {
            Node n;
            n.id = std::string(f[1]);
            if (f[2] == "gene") {
                n.kind = NodeKind::Gene;
            } else if (f[2] == "clinical") {
                n.kind = NodeKind::Clinical;
            } else {
                throw ParseError(PK::BadValue, source, line_no, "node kind");
            }
            if (f[3] == "up") {
                n.direction = DeDirection::Up;
            } else if (f[3] == "down") {
                n.direction = DeDirection::Down;
            } else if (f[3] == "n/a") {
                n.direction = DeDirection::NotApplicable;
            } else {
                throw ParseError(PK::BadValue, source, line_no, "direction");
            }
            if (!index.emplace(n.id, nodes.size()).second) {
                throw ParseError(PK::DuplicateKey, source, line_no, n.id);
            }
            nodes.push_back(std::move(n));
        } else if (f[0] == "edge" && f.size() == 6) {
            const auto u = index.find(std::string(f[1]));
            const auto v = index.find(std::string(f[2]));
            const auto w = textio::parse_double(f[3]);
            const auto s = textio::parse_int(f[4]);
            if (u == index.end() || v == index.end() || !w || !s || (f[5] != "gene-gene" && f[5] != "gene-clinical")) {
                throw ParseError(PK::BadValue, source, line_no, "malformed edge");
            }
            edges.push_back({u->second, v->second, *w, static_cast<int>(*s),
                             f[5] == "gene-gene" ? EdgeKind::GeneGene : EdgeKind::GeneClinical});
        } else {
            throw ParseError(PK::RaggedRow, source, line_no, "unknown record");
        }
    }
    if (!header) {
        throw ParseError(PK::EmptyFile, source, 0, "empty network file");
    }
    return Network(std::move(nodes), std::move(edges));
}

namespace {

std::string xml_escape(std::string_view s) {
    std::string out;
    for (const char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        case '\'': out += "&apos;"; break;
        default: out += c;
        }
    }
    return out;
}

} // namespace

std::string format_graphml(const Network& net, const Partition* partition) {
    std::string out =
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\" "
        "xmlns:xsi=\"http://www.w3.org/2001/XMLSchema-instance\" "
        "xsi:schemaLocation=\"http://graphml.graphdrawing.org/xmlns "
        "http://graphml.graphdrawing.org/xmlns/1.0/graphml.xsd\">\n"
        "  <key id=\"d0\" for=\"node\" attr.name=\"kind\" attr.type=\"string\"/>\n"
        "  <key id=\"d1\" for=\"node\" attr.name=\"de_direction\" attr.type=\"string\"/>\n"
        "  <key id=\"d2\" for=\"node\" attr.name=\"module\" attr.type=\"int\"/>\n"
        "  <key id=\"d3\" for=\"edge\" attr.name=\"weight\" attr.type=\"double\"/>\n"
        "  <key id=\"d4\" for=\"edge\" attr.name=\"sign\" attr.type=\"int\"/>\n"
        "  <key id=\"d5\" for=\"edge\" attr.name=\"kind\" attr.type=\"string\"/>\n"
        "  <graph id=\"G\" edgedefault=\"undirected\">\n";
    for (std::size_t i = 0; i < net.nodes().size(); ++i) {
        const auto& n = net.nodes()[i];
        out += "    <node id=\"" + xml_escape(n.id) + "\">";
        out += std::string("<data key=\"d0\">") + node_kind_name(n.kind) + "</data>";
        out += std::string("<data key=\"d1\">") + xml_escape(de_direction_name(n.direction)) + "</data>";
        if (partition != nullptr) {
            out += "<data key=\"d2\">" + std::to_string((*partition)[i]) + "</data>";
        }
        out += "</node>\n";
    }
    for (const auto& e : net.edges()) {
        out += "    <edge source=\"" + xml_escape(net.nodes()[e.u].id) + "\" target=\"" + xml_escape(net.nodes()[e.v].id) + "\">";
        out += "<data key=\"d3\">" + textio::format_double(e.weight) + "</data>";
        out += "<data key=\"d4\">" + std::to_string(e.sign) + "</data>";
        out += std::string("<data key=\"d5\">") + edge_kind_name(e.kind) + "</data>";
        out += "</edge>\n";
    }
    out += "  </graph>\n</graphml>\n";
    return out;
}

std::string format_modules_tsv(const Network& net, const Partition& partition) {
    std::string out = "node\tkind\tmodule_id\n";
    for (std::size_t i = 0; i < net.nodes().size(); ++i) {
        out += net.nodes()[i].id + '\t' + node_kind_name(net.nodes()[i].kind) + '\t' + std::to_string(partition[i]) + '\n';
    }
    return out;
}

} // namespace txnet
