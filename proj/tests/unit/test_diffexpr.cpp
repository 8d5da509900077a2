#include "helpers.hpp"

#include "txnet/diffexpr.hpp"
#include "txnet/error.hpp"
#include "txnet/simulate.hpp"

#include <doctest.h>

#include <cmath>

using namespace txnet;

namespace {

sim::SimulatedData small_dataset(std::uint64_t seed) {
    sim::ScenarioSpec s;
    s.seed = seed;
    s.n_subjects = 12;
    s.n_genes = 300;
    s.de_count = 30;
    s.de_fold = 4;
    return sim::simulate_counts(s);
}

SampleMeta two_timepoint_meta(int subjects, bool drop_last_second) {
    std::vector<SampleInfo> rows;
    for (int s = 0; s < subjects; ++s) {
        for (int t = 1; t <= 2; ++t) {
            if (drop_last_second && s == subjects - 1 && t == 2) {
                continue;
            }
            rows.push_back({"S" + std::to_string(s) + "_" + std::to_string(t), "P" + std::to_string(s), t, "C1", Sex::Male,
                            50, "plate1"});
        }
    }
    return SampleMeta(rows);
}

} // namespace

TEST_SUITE("diffexpr") {

TEST_CASE("paired log fold change") {
    const auto meta = two_timepoint_meta(2, true);
    CountArray a(2, 3);
    a << 10, 20, 7,
         4, 4, 4;
    const CountMatrix m({"A", "B"}, {"S0_1", "S0_2", "S1_1"}, a);
    const std::vector<double> eff(3, 1e6);
    const std::vector<std::string> genes{"A", "B"};
    const auto fc = paired_logfc(m, eff, meta, genes, Contrast{1, 2});
    REQUIRE(fc.subject_ids == std::vector<std::string>{"P0"});
    CHECK(fc.values(0, 0) == doctest::Approx(std::log2(20.5 / 10.5)).epsilon(1e-14));
    CHECK(fc.values(0, 0) == doctest::Approx(0.9651).epsilon(1e-4));
    CHECK(fc.values(0, 1) == 0);
    CHECK_THROWS_AS(paired_logfc(m, eff, meta, std::vector<std::string>{}, Contrast{1, 2}), Error);
}

TEST_CASE("contrast with fewer than three pairs") {
    const auto meta = two_timepoint_meta(3, true);
    CountArray a(2, 5);
    a.setConstant(10);
    const CountMatrix m({"A", "B"}, {"S0_1", "S0_2", "S1_1", "S1_2", "S2_1"}, a);
    try {
        de_contrast(m, meta, Contrast{1, 2});
        FAIL("expected TooFewPairs");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::TooFewPairs);
    }
}

TEST_CASE("de contrast invariants") {
    const auto data = small_dataset(31);
    const auto r = de_contrast(data.counts, data.meta, Contrast{1, 2});
    CHECK(r.subjects.size() == 12);
    std::vector<const DEResult*> tested;
    for (const auto& g : r.genes) {
        if (g.status == DeStatus::Tested) {
            tested.push_back(&g);
            CHECK(g.lr_stat >= 0);
            CHECK(g.fdr >= g.p_value);
            CHECK(g.passes_fc_filter == (std::abs(g.log2_fc) > std::log2(1.3) && g.fdr < 0.05));
        }
    }
    REQUIRE(tested.size() > 200);
    for (const auto* a : tested) {
        for (const auto* b : tested) {
            if (a->p_value < b->p_value) {
                CHECK(a->fdr <= b->fdr);
            }
        }
    }
    int hits = 0;
    for (int i = 0; i < 30; ++i) {
        hits += r.genes[static_cast<std::size_t>(i)].passes_fc_filter ? 1 : 0;
    }
    CHECK(hits >= 20);
}

TEST_CASE("fold-change flag uses a strict threshold") {
    std::vector<DEResult> t(2);
    t[0].gene_id = "A";
    t[0].log2_fc = 0.30;
    t[0].fdr = 0.001;
    t[0].passes_fc_filter = std::abs(t[0].log2_fc) > std::log2(1.3);
    CHECK_FALSE(t[0].passes_fc_filter);
    CHECK(std::log2(1.3) == doctest::Approx(0.3785).epsilon(1e-4));
}

TEST_CASE("identical inputs give bit-identical tables") {
    const auto data = small_dataset(32);
    const auto a = format_de_table(de_contrast(data.counts, data.meta, Contrast{1, 2}).genes);
    DeOptions threaded;
    threaded.threads = 3;
    const auto b = format_de_table(de_contrast(data.counts, data.meta, Contrast{1, 2}, threaded).genes);
    CHECK(a == b);
}

TEST_CASE("de table round trip") {
    const auto data = small_dataset(33);
    const auto t = de_contrast(data.counts, data.meta, Contrast{1, 2}).genes;
    const auto text = format_de_table(t);
    CHECK(format_de_table(parse_de_table(text)) == text);
}

TEST_CASE("zero-fraction removal is reported") {
    auto data = small_dataset(34);
    CountArray a = data.counts.counts();
    a.row(5).head(a.cols() / 2).setZero();
    const CountMatrix m(data.counts.gene_ids(), data.counts.sample_ids(), a);
    const auto r = de_contrast(m, data.meta, Contrast{1, 2});
    CHECK(r.genes[5].status == DeStatus::RemovedZeroFrac);
    CHECK(std::string(de_status_name(r.genes[5].status)) == "removed_zero_frac");
}

}
