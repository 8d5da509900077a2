#include "helpers.hpp"

#include "txnet/error.hpp"
#include "txnet/simulate.hpp"

#include <doctest.h>

using namespace txnet;

TEST_SUITE("simulate") {

TEST_CASE("derived streams") {
    auto a = sim::stream(5, 1);
    auto b = sim::stream(5, 1);
    auto c = sim::stream(5, 2);
    auto d = sim::stream(6, 1);
    const auto x = a();
    CHECK(x == b());
    CHECK(x != c());
    CHECK(x != d());
}

TEST_CASE("planted precision is diagonally dominant with the requested pattern") {
    std::mt19937_64 rng(1);
    sim::PrecisionOptions o;
    for (auto pattern : {sim::PrecisionPattern::Chain, sim::PrecisionPattern::Block, sim::PrecisionPattern::Random}) {
        const auto theta = sim::planted_precision(30, pattern, o, rng);
        CHECK(theta.isApprox(theta.transpose(), 0));
        for (Eigen::Index i = 0; i < 30; ++i) {
            const double off = theta.row(i).cwiseAbs().sum() - theta(i, i);
            CHECK(off <= 0.9 * theta(i, i) + 1e-12);
            CHECK(theta(i, i) >= 1);
        }
        CHECK(Eigen::LLT<Eigen::MatrixXd>(theta).info() == Eigen::Success);
    }
    const auto chain = sim::planted_precision(6, sim::PrecisionPattern::Chain, o, rng);
    for (Eigen::Index i = 0; i < 6; ++i) {
        for (Eigen::Index j = i + 1; j < 6; ++j) {
            CHECK((chain(i, j) != 0) == (j == i + 1));
        }
    }
}

TEST_CASE("chain partial correlations are reproduced in large samples") {
    sim::PrecisionOptions o;
    o.edge_min = o.edge_max = 0.4;
    const auto s = sim::simulate_fc_from_precision(8, sim::PrecisionPattern::Chain, 20000, 2, o);
    REQUIRE(s.edges.size() == 7);
    const Eigen::MatrixXd x = s.fc.values.rowwise() - s.fc.values.colwise().mean();
    const Eigen::MatrixXd cov = x.transpose() * x / static_cast<double>(x.rows() - 1);
    const Eigen::MatrixXd prec = cov.inverse();
    for (const auto& e : s.edges) {
        const int i = std::stoi(e.source.substr(1));
        const int j = std::stoi(e.target.substr(1));
        const double rho = -prec(i - 1, j - 1) / std::sqrt(prec(i - 1, i - 1) * prec(j - 1, j - 1));
        CHECK(rho == doctest::Approx(e.partial_corr).epsilon(0.05));
    }
}

TEST_CASE("poisson limit moments") {
    sim::ScenarioSpec s;
    s.seed = 4;
    s.n_subjects = 200;
    s.n_genes = 50;
    s.dispersion = 0;
    s.subject_sd = 0;
    s.lib_min = s.lib_max = 2e5;
    const auto d = sim::simulate_counts(s);
    double ratio = 0;
    int used = 0;
    for (Eigen::Index g = 0; g < d.counts.n_genes(); ++g) {
        const Eigen::ArrayXd y = d.counts.counts().row(g).cast<double>().transpose().array();
        const double mean = y.mean();
        if (mean < 20) {
            continue;
        }
        const double var = (y - mean).square().sum() / static_cast<double>(y.size() - 1);
        ratio += var / mean;
        ++used;
    }
    REQUIRE(used > 10);
    CHECK(ratio / used == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("scenario text") {
    const auto spec = sim::parse_scenario("seed=9\nn_subjects=30\nmodule_pattern=block\nmodule_genes=20\nde_count=25\n"
                                          "# comment\nde_list=G00040:3,G00041:0.5\nclinical_links=G00002:ldl:0.7\n");
    CHECK(spec.seed == 9);
    CHECK(spec.n_subjects == 30);
    CHECK(spec.module_pattern == sim::PrecisionPattern::Block);
    REQUIRE(spec.de_list.size() == 2);
    CHECK(spec.de_list[1].fold == 0.5);
    REQUIRE(spec.clinical_links.size() == 1);
    CHECK(spec.clinical_links[0].variable == "ldl");
    CHECK(sim::format_scenario(sim::parse_scenario(sim::format_scenario(spec))) == sim::format_scenario(spec));
    CHECK_THROWS_AS(sim::parse_scenario("n_subjects=3\n"), Error);
    CHECK_THROWS_AS(sim::parse_scenario("seed=1\nbogus=2\n"), Error);
}

TEST_CASE("infeasible scenarios") {
    sim::ScenarioSpec s;
    s.module_genes = 10;
    try {
        sim::simulate_counts(s);
        FAIL("expected InfeasibleScenario");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::InfeasibleScenario);
    }
    s = {};
    s.contaminated_samples = 1000;
    CHECK_THROWS_AS(sim::simulate_counts(s), Error);
}

TEST_CASE("simulation is reproducible and truth round-trips") {
    sim::ScenarioSpec s;
    s.seed = 12;
    s.n_subjects = 20;
    s.n_genes = 120;
    s.de_count = 30;
    s.module_pattern = sim::PrecisionPattern::Block;
    s.module_genes = 20;
    s.precision.block_size = 10;
    s.clinical_partners = 3;
    s.contaminated_samples = 1;
    s.outlier_samples = 1;
    const auto a = sim::simulate_counts(s);
    const auto b = sim::simulate_counts(s);
    CHECK(a.counts.counts() == b.counts.counts());
    CHECK(a.counts.gene_ids().back() == "HBB");
    CHECK(a.injections.size() == 2);
    CHECK(a.links.size() == 3);
    for (const auto& l : a.links) {
        CHECK(a.genes[static_cast<std::size_t>(std::stoi(l.gene_id.substr(1)) - 1)].module == 0);
    }

    const auto dir = testing::scratch("simulate_truth");
    sim::write_simulation(a, s, dir);
    const auto t = sim::load_truth(dir);
    REQUIRE(t.genes.size() == a.genes.size());
    for (std::size_t i = 0; i < t.genes.size(); ++i) {
        CHECK(t.genes[i].gene_id == a.genes[i].gene_id);
        CHECK(t.genes[i].log2_fold == a.genes[i].log2_fold);
        CHECK(t.genes[i].is_de == a.genes[i].is_de);
        CHECK(t.genes[i].module == a.genes[i].module);
    }
    REQUIRE(t.edges.size() == a.edges.size());
    for (std::size_t i = 0; i < t.edges.size(); ++i) {
        CHECK(t.edges[i].partial_corr == a.edges[i].partial_corr);
    }
    CHECK(t.links.size() == a.links.size());
    CHECK(t.injections.size() == a.injections.size());
    const auto counts = load_counts(dir / "counts.tsv");
    CHECK(counts.counts() == a.counts.counts());
    CHECK(sim::format_scenario(sim::load_scenario(dir / "scenario.txt")) == sim::format_scenario(s));
}

TEST_CASE("dense oracle solves a known case") {
    // lambda above every correlation: the optimum is the inverse diagonal
    Eigen::MatrixXd S = Eigen::MatrixXd::Identity(3, 3);
    S(0, 2) = S(2, 0) = 0.2;
    const auto t = sim::oracle_glasso(S, 0.25);
    CHECK((t - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-8);
}

}
