#ifndef TXNET_PIPELINE_HPP
#define TXNET_PIPELINE_HPP

#include "txnet/assoc.hpp"
#include "txnet/contrast.hpp"
#include "txnet/diffexpr.hpp"
#include "txnet/netgraph.hpp"
#include "txnet/netinfer.hpp"
#include "txnet/qc.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace txnet {

/**
 * Everything a run depends on. Stage functions read their inputs from the
 * run directory (written by upstream stages) and record a stamp with
 * parameters and SHA-256 digests under stages/.
 */
struct PipelineConfig {
    std::filesystem::path counts;
    std::filesystem::path meta;
    std::filesystem::path clinical;
    std::optional<std::filesystem::path> exclude_samples;
    std::optional<std::filesystem::path> truth; // simulation truth directory
    std::filesystem::path out;

    std::vector<Contrast> contrasts{Contrast{1, 2}};
    QcOptions qc;
    DeOptions de;
    std::optional<double> lambda; // overrides the permutation-null choice
    RicOptions ric;
    GlassoOptions glasso;
    ScanOptions scan;
    double gamma = 1.0;
    std::optional<std::uint64_t> seed;
    int threads = 1;
    bool timings = false;
};

struct StageReport {
    std::string stage;
    nlohmann::json stamp;
    double seconds = 0;
};

StageReport run_qc_stage(const PipelineConfig& config);
StageReport run_de_stage(const PipelineConfig& config, Contrast contrast);
StageReport run_fc_stage(const PipelineConfig& config, Contrast contrast);
StageReport run_glasso_stage(const PipelineConfig& config, Contrast contrast);
StageReport run_associate_stage(const PipelineConfig& config, Contrast contrast);
StageReport run_cluster_stage(const PipelineConfig& config, Contrast contrast);

/// qc, then de -> fc -> glasso -> associate -> cluster per contrast; writes manifest.json.
std::vector<StageReport> run_pipeline(const PipelineConfig& config);

/// Rebuilds manifest.json from the stage stamps present in the run directory.
void write_manifest(const std::filesystem::path& out);

struct NormRow {
    std::string sample_id;
    std::int64_t lib_size = 0;
    double norm_factor = 1;
    double effective_lib_size = 0;
};

std::string format_norm_table(const std::vector<NormRow>& rows);
std::vector<NormRow> parse_norm_table(std::string_view text, const std::string& source = "");

} // namespace txnet

#endif
