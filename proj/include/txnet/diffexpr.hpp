#ifndef TXNET_DIFFEXPR_HPP
#define TXNET_DIFFEXPR_HPP

#include "txnet/contrast.hpp"
#include "txnet/data.hpp"
#include "txnet/dispersion.hpp"
#include "txnet/tmm.hpp"

#include <span>
#include <string>
#include <vector>

namespace txnet {

enum class DeStatus { Tested, RemovedZeroFrac, RemovedInestimable };

const char* de_status_name(DeStatus status) noexcept;

struct DEResult {
    std::string gene_id;
    double log2_fc = 0;       // condition coefficient / ln 2
    double mean_log_cpm = 0;  // mean over the contrast's samples of log2 CPM (prior count 0.5)
    double lr_stat = 0;
    double p_value = 1;
    double fdr = 1;
    double dispersion = 0;
    DeStatus status = DeStatus::Tested;
    bool passes_fc_filter = false;
};

struct DeOptions {
    double alpha = 0.05;
    double fc_threshold = 1.3;
    double max_zero_frac = 0.25;
    double prior_count = 0.5;
    DispersionMode dispersion_mode = DispersionMode::Tagwise;
    DispersionOptions dispersion;
    TmmOptions tmm;
    int threads = 1;
};

/// Subjects seen at both timepoints of a contrast, sorted by subject id.
struct PairedSamples {
    std::vector<std::string> subjects;
    std::vector<Index> first;  // column of the earlier timepoint, per subject
    std::vector<Index> second; // column of the later timepoint, per subject
};

PairedSamples paired_samples(const CountMatrix& m, const SampleMeta& meta, Contrast contrast);

struct DeContrastResult {
    Contrast contrast;
    std::vector<DEResult> genes;          // input gene order
    std::vector<std::string> subjects;
    CountMatrix counts;                   // contrast samples (first timepoints, then second) x genes kept by the zero filter
    TmmFactors tmm;                       // over `counts`
    DispersionEstimate dispersion;
};

/**
 * Paired differential expression for one contrast: zero-fraction filter,
 * TMM, Cox-Reid dispersion, per-gene NB fits with subject effects, LRT on the
 * condition coefficient, BH within the contrast and the fold-change flag.
 */
DeContrastResult de_contrast(const CountMatrix& m, const SampleMeta& meta, Contrast contrast,
                             const DeOptions& options = {});

/// Genes flagged by the fold-change filter, in table order.
std::vector<std::string> fc_filtered_genes(const std::vector<DEResult>& table);

/**
 * Per-subject log2(CPM_second / CPM_first) for the requested genes, where CPM
 * uses the given effective library sizes (library size x normalization factor)
 * and the prior count. Subjects lacking either timepoint are left out.
 */
FoldChangeMatrix paired_logfc(const CountMatrix& m, std::span<const double> effective_lib_sizes,
                              const SampleMeta& meta, std::span<const std::string> genes, Contrast contrast,
                              double prior = 0.5);

std::string format_de_table(const std::vector<DEResult>& table);
std::vector<DEResult> parse_de_table(std::string_view text, const std::string& source = "");

} // namespace txnet

#endif
