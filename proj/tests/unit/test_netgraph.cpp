#include "txnet/error.hpp"
#include "txnet/netgraph.hpp"

#include <doctest.h>

#include <map>
#include <numeric>
#include <random>
#include <set>

using namespace txnet;

namespace {

std::string nid(int i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "N%03d", i);
    return buf;
}

Network gene_graph(int n, const std::vector<std::pair<int, int>>& pairs) {
    std::set<int> used;
    for (auto [a, b] : pairs) {
        used.insert(a);
        used.insert(b);
    }
    std::vector<Node> nodes;
    for (int i : used) {
        nodes.push_back({nid(i), NodeKind::Gene, DeDirection::NotApplicable});
    }
    std::vector<Edge> edges;
    Network tmp(nodes, {});
    for (auto [a, b] : pairs) {
        edges.push_back({*tmp.node_index(nid(a)), *tmp.node_index(nid(b)), 0.3, 1, EdgeKind::GeneGene});
    }
    (void)n;
    return Network(nodes, edges);
}

std::vector<std::pair<int, int>> clique(int first, int size) {
    std::vector<std::pair<int, int>> out;
    for (int i = first; i < first + size; ++i) {
        for (int j = i + 1; j < first + size; ++j) {
            out.emplace_back(i, j);
        }
    }
    return out;
}

// Contingency-table formula written out directly.
double ari_oracle(const std::vector<int>& a, const std::vector<int>& b) {
    std::map<std::pair<int, int>, double> nij;
    std::map<int, double> ai, bj;
    for (std::size_t k = 0; k < a.size(); ++k) {
        nij[{a[k], b[k]}] += 1;
        ai[a[k]] += 1;
        bj[b[k]] += 1;
    }
    const auto c2 = [](double x) { return x * (x - 1) / 2; };
    double sij = 0, sa = 0, sb = 0;
    for (auto& [k, v] : nij) {
        sij += c2(v);
    }
    for (auto& [k, v] : ai) {
        sa += c2(v);
    }
    for (auto& [k, v] : bj) {
        sb += c2(v);
    }
    const double expected = sa * sb / c2(static_cast<double>(a.size()));
    return (sij - expected) / (0.5 * (sa + sb) - expected);
}

std::pair<Network, std::vector<int>> sbm(int blocks, int per_block, double p_in, double p_out, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0, 1);
    const int n = blocks * per_block;
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (u(rng) < (i / per_block == j / per_block ? p_in : p_out)) {
                pairs.emplace_back(i, j);
            }
        }
    }
    auto net = gene_graph(n, pairs);
    std::vector<int> truth;
    for (const auto& node : net.nodes()) {
        truth.push_back(std::stoi(node.id.substr(1)) / per_block);
    }
    return {net, truth};
}

} // namespace

TEST_SUITE("netgraph") {

TEST_CASE("modularity by hand") {
    const auto tri = gene_graph(3, {{0, 1}, {1, 2}, {0, 2}});
    CHECK(std::abs(modularity_score(tri, {0, 1, 2}) + 1.0 / 3.0) <= 1e-12);
    CHECK(modularity_score(tri, {0, 0, 0}) == 0);
    auto pairs = clique(0, 4);
    const auto b = clique(4, 4);
    pairs.insert(pairs.end(), b.begin(), b.end());
    const auto k4 = gene_graph(8, pairs);
    CHECK(modularity_score(k4, {0, 0, 0, 0, 1, 1, 1, 1}) == 0.5);
}

TEST_CASE("louvain on small graphs") {
    SUBCASE("two K4") {
        auto pairs = clique(0, 4);
        const auto b = clique(4, 4);
        pairs.insert(pairs.end(), b.begin(), b.end());
        const auto net = gene_graph(8, pairs);
        const auto part = cluster_modules(net, {1.0, 3, true});
        CHECK(part == Partition{0, 0, 0, 0, 1, 1, 1, 1});
        CHECK(modularity_score(net, part) == 0.5);
    }
    SUBCASE("K6 stays whole") {
        const auto net = gene_graph(6, clique(0, 6));
        const auto part = cluster_modules(net, {1.0, 4, true});
        CHECK(part == Partition(6, 0));
        CHECK(std::abs(modularity_score(net, part)) < 1e-15);
    }
    SUBCASE("empty graph") {
        try {
            cluster_modules(Network{}, {});
            FAIL("expected EmptyGraph");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::EmptyGraph);
        }
    }
}

TEST_CASE("louvain on a planted block model") {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const auto [net, truth] = sbm(4, 40, 0.3, 0.01, seed);
        LouvainStats st;
        const auto part = cluster_modules(net, {1.0, seed, true}, &st);
        CHECK(adjusted_rand_index(part, truth) >= 0.9);
        CHECK(st.min_delta_q > 0);
        CHECK(modularity_score(net, part) >= modularity_score(net, [&] {
            Partition s(net.nodes().size());
            std::iota(s.begin(), s.end(), 0);
            return s;
        }()));
        // contiguous labels from 0
        const int k = *std::max_element(part.begin(), part.end());
        std::set<int> labels(part.begin(), part.end());
        CHECK(static_cast<int>(labels.size()) == k + 1);
        CHECK(*labels.begin() == 0);
    }
}

TEST_CASE("clustering is invariant to edge input order") {
    const auto [net, truth] = sbm(3, 20, 0.4, 0.02, 9);
    std::vector<Edge> rev(net.edges().rbegin(), net.edges().rend());
    std::vector<Node> nodes(net.nodes().rbegin(), net.nodes().rend());
    // rebuild with indices remapped to the reversed node order
    const std::size_t n = nodes.size();
    for (auto& e : rev) {
        e.u = n - 1 - e.u;
        e.v = n - 1 - e.v;
    }
    const Network other(nodes, rev);
    CHECK(other == net);
    CHECK(cluster_modules(other, {1.0, 5}) == cluster_modules(net, {1.0, 5}));
}

TEST_CASE("adjusted rand index") {
    std::mt19937_64 rng(2);
    std::uniform_int_distribution<int> d(0, 4);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<int> a(60), b(60);
        for (int i = 0; i < 60; ++i) {
            a[i] = d(rng);
            b[i] = rep % 2 ? d(rng) : (a[i] + (i % 7 == 0)) % 5;
        }
        CHECK(adjusted_rand_index(a, b) == doctest::Approx(ari_oracle(a, b)).epsilon(1e-12));
    }
    CHECK(adjusted_rand_index({0, 0, 1, 1}, {5, 5, 2, 2}) == 1.0);
}

TEST_CASE("assemble") {
    std::vector<DEResult> de(3);
    de[0].gene_id = "A";
    de[0].log2_fc = 1.2;
    de[1].gene_id = "B";
    de[1].log2_fc = -0.7;
    de[2].gene_id = "C";
    de[2].log2_fc = -2;
    const std::vector<GeneEdge> ge{{"A", "B", 0.2, 1}, {"B", "A", 0.2, 1}, {"B", "C", -0.1, -1}};
    SUBCASE("gene only") {
        const auto net = assemble(ge, {}, de);
        CHECK(net.nodes().size() == 3);
        CHECK(net.edges().size() == 2);
        CHECK(net.nodes()[0].direction == DeDirection::Up);
        CHECK(net.nodes()[1].direction == DeDirection::Down);
    }
    SUBCASE("clinical edge keeps its sign") {
        const std::vector<ClinicalEdge> ce{{"C", "bmi", -0.5, 0.001, 0.01, -1}};
        const auto net = assemble(ge, ce, de);
        const auto i = net.node_index("bmi");
        REQUIRE(i);
        CHECK(net.nodes()[*i].kind == NodeKind::Clinical);
        int found = 0;
        for (const auto& e : net.edges()) {
            if (e.kind == EdgeKind::GeneClinical) {
                CHECK(e.sign == -1);
                ++found;
            }
        }
        CHECK(found == 1);
    }
    SUBCASE("contradictory duplicate") {
        const std::vector<GeneEdge> bad{{"A", "B", 0.2, 1}, {"A", "B", -0.2, -1}};
        try {
            assemble(bad, {}, de);
            FAIL("expected ContradictoryEdge");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::ContradictoryEdge);
        }
    }
    SUBCASE("planted edge count is preserved") {
        std::vector<GeneEdge> many;
        for (int i = 0; i < 10; ++i) {
            for (int j = i + 1; j < 10; j += 3) {
                many.push_back({nid(i), nid(j), 0.1, 1});
            }
        }
        CHECK(assemble(many, {}, {}).edges().size() == many.size());
    }
}

TEST_CASE("module summaries") {
    std::vector<Node> nodes;
    for (int i = 0; i < 10; ++i) {
        nodes.push_back({nid(i), NodeKind::Gene, i == 0 ? DeDirection::Down : DeDirection::Up});
    }
    nodes.push_back({"bmi", NodeKind::Clinical, DeDirection::NotApplicable});
    nodes.push_back({"Z1", NodeKind::Gene, DeDirection::Down});
    nodes.push_back({"Z2", NodeKind::Gene, DeDirection::Down});
    Network probe(nodes, {});
    std::vector<Edge> edges;
    for (int i = 1; i < 10; ++i) {
        edges.push_back({*probe.node_index(nid(0)), *probe.node_index(nid(i)), 0.1, 1, EdgeKind::GeneGene});
    }
    edges.push_back({*probe.node_index(nid(3)), *probe.node_index("bmi"), 0.1, -1, EdgeKind::GeneClinical});
    edges.push_back({*probe.node_index("Z1"), *probe.node_index("Z2"), 0.1, 1, EdgeKind::GeneGene});
    const Network net(probe.nodes(), edges);
    Partition part(net.nodes().size(), 0);
    part[*net.node_index("Z1")] = 1;
    part[*net.node_index("Z2")] = 1;
    const auto mods = summarize_modules(net, part);
    REQUIRE(mods.size() == 2);
    CHECK(mods[0].size == 11);
    CHECK(mods[0].n_genes == 10);
    CHECK(mods[0].frac_upregulated == doctest::Approx(0.9));
    CHECK(mods[0].clinical_members == std::vector<std::string>{"bmi"});
    CHECK(mods[1].clinical_members.empty());
    CHECK(mods[1].frac_downregulated == 1.0);
    const auto js = modules_json(mods);
    CHECK(js[0]["size"] >= js[1]["size"]);
}

TEST_CASE("exports") {
    const std::vector<GeneEdge> ge{{"A", "B", 0.25, 1}, {"B", "C", -0.125, -1}};
    const std::vector<ClinicalEdge> ce{{"C", "bmi", -0.5, 0.001, 0.01, -1}};
    const auto net = assemble(ge, ce, {});
    const auto text = format_edgelist(net);
    CHECK(parse_edgelist(text) == net);
    CHECK(format_edgelist(parse_edgelist(text)) == text);
    const Partition part{0, 0, 1, 1};
    const auto gml = format_graphml(net, &part);
    CHECK(gml.rfind("<?xml", 0) == 0);
    CHECK(gml.find("http://graphml.graphdrawing.org/xmlns") != std::string::npos);
    CHECK(gml == format_graphml(net, &part));
    const auto tsv = format_modules_tsv(net, part);
    CHECK(tsv.rfind("node\tkind\tmodule_id\n", 0) == 0);
}

}
