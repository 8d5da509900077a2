#include "helpers.hpp"

#include "txnet/error.hpp"
#include "txnet/pipeline.hpp"
#include "txnet/simulate.hpp"

#include <doctest.h>

#include <json.hpp>

#include <map>

using namespace txnet;
namespace fs = std::filesystem;

namespace {

fs::path dataset() {
    static const fs::path dir = [] {
        const auto d = testing::scratch("pipeline_data");
        sim::ScenarioSpec s;
        s.seed = 77;
        s.n_subjects = 30;
        s.n_genes = 300;
        s.de_count = 40;
        s.de_fold = 3;
        s.module_pattern = sim::PrecisionPattern::Block;
        s.module_genes = 20;
        s.precision.block_size = 10;
        s.fc_sd = 1.5;
        s.clinical_partners = 3;
        s.contaminated_samples = 1;
        sim::write_simulation(sim::simulate_counts(s), s, d);
        return d;
    }();
    return dir;
}

PipelineConfig config(const fs::path& out) {
    PipelineConfig c;
    c.counts = dataset() / "counts.tsv";
    c.meta = dataset() / "meta.tsv";
    c.clinical = dataset() / "clinical.tsv";
    c.truth = dataset();
    c.out = out;
    c.seed = 5;
    c.ric.reps = 5;
    return c;
}

std::map<std::string, std::string> tree(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (e.is_regular_file()) {
            out[fs::relative(e.path(), root).generic_string()] = testing::read_text(e.path());
        }
    }
    return out;
}

Errc code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error raised");
    return Errc::InvalidArgument;
}

} // namespace

TEST_SUITE("pipeline") {

TEST_CASE("identical runs give identical trees") {
    const auto a = testing::scratch("pipeline_a");
    const auto b = testing::scratch("pipeline_b");
    run_pipeline(config(a));
    auto cb = config(b);
    cb.threads = 2;
    run_pipeline(cb);
    const auto ta = tree(a);
    const auto tb = tree(b);
    CHECK(ta == tb);
    CHECK(ta.count("manifest.json") == 1);
    CHECK(ta.count("timings.json") == 0);
    CHECK(ta.count("network_1-2.graphml") == 1);
    const auto summary = nlohmann::json::parse(ta.at("summary_1-2.json"));
    CHECK(summary.contains("recovery"));

    SUBCASE("deleting the run directory and re-running reproduces it") {
        fs::remove_all(a);
        run_pipeline(config(a));
        CHECK(tree(a) == ta);
    }
}

TEST_CASE("lambda override is recorded") {
    const auto out = testing::scratch("pipeline_override");
    auto c = config(out);
    c.lambda = 0.4;
    c.seed.reset();
    run_qc_stage(c);
    run_de_stage(c, {1, 2});
    run_fc_stage(c, {1, 2});
    const auto r = run_glasso_stage(c, {1, 2});
    const auto info = nlohmann::json::parse(testing::read_text(out / "glasso_1-2.json"));
    CHECK(info["lambda_source"] == "override");
    CHECK(info["lambda"] == 0.4);
    CHECK(r.stamp["parameters"].dump().find("0.4") != std::string::npos);
}

TEST_CASE("glasso needs a seed without an override") {
    const auto out = testing::scratch("pipeline_seed");
    auto c = config(out);
    c.seed.reset();
    run_qc_stage(c);
    run_de_stage(c, {1, 2});
    run_fc_stage(c, {1, 2});
    CHECK(code_of([&] { run_glasso_stage(c, {1, 2}); }) == Errc::InvalidArgument);
}

TEST_CASE("upstream validation") {
    const auto out = testing::scratch("pipeline_validation");
    const auto c = config(out);
    CHECK(code_of([&] { run_de_stage(c, {1, 2}); }) == Errc::MissingArtifact);
    run_qc_stage(c);
    run_de_stage(c, {1, 2});
    run_fc_stage(c, {1, 2});

    SUBCASE("edited artifact") {
        const auto before = testing::read_text(out / "de_1-2.tsv");
        testing::write_text(out / "qc/counts.tsv", testing::read_text(out / "qc/counts.tsv") + "\n");
        CHECK(code_of([&] { run_de_stage(c, {1, 2}); }) == Errc::DigestMismatch);
        CHECK(testing::read_text(out / "de_1-2.tsv") == before);
    }
    SUBCASE("stale upstream stage") {
        testing::write_text(out / "de_1-2.tsv", testing::read_text(out / "de_1-2.tsv") + "\n");
        CHECK(code_of([&] { run_glasso_stage(c, {1, 2}); }) == Errc::DigestMismatch);
    }
    SUBCASE("deleted artifact") {
        fs::remove(out / "fc_1-2.tsv");
        CHECK(code_of([&] { run_glasso_stage(c, {1, 2}); }) == Errc::MissingArtifact);
    }
}

TEST_CASE("normalization table round trip") {
    const std::vector<NormRow> rows{{"S1", 1000, 0.95, 950}, {"S2", 2000, 1.0526315789473684, 2105.2631578947367}};
    const auto text = format_norm_table(rows);
    CHECK(format_norm_table(parse_norm_table(text)) == text);
}

TEST_CASE("timings are opt-in") {
    const auto out = testing::scratch("pipeline_timings");
    auto c = config(out);
    c.timings = true;
    run_pipeline(c);
    CHECK(fs::exists(out / "timings.json"));
}

}
