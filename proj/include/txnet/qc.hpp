#ifndef TXNET_QC_HPP
#define TXNET_QC_HPP

#include "txnet/data.hpp"

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace txnet {

inline constexpr double kDefaultPriorCount = 0.5;

/**
 * Counts per million with a prior count:
 * 1e6 * (count + prior) / (lib_size * factor), one column per sample.
 */
Eigen::MatrixXd cpm(const CountMatrix& m, std::span<const double> factors, double prior = kDefaultPriorCount);

/// Same as above with all normalization factors equal to 1.
Eigen::MatrixXd cpm(const CountMatrix& m, double prior = kDefaultPriorCount);

struct ContaminationFlag {
    std::string sample_id;
    double fraction = 0;
};

struct PcaFlag {
    std::string sample_id;
    double pc1 = 0;
    double pc2 = 0;
};

/// Samples whose marker-gene share of the library exceeds `max_fraction`.
std::vector<ContaminationFlag> contamination_filter(const CountMatrix& m, std::string_view marker_gene,
                                                   double max_fraction = 0.20);

struct PcaOutlierResult {
    Eigen::MatrixXd scores; // samples x 2
    Eigen::Vector2d singular_values = Eigen::Vector2d::Zero();
    std::vector<PcaFlag> flagged;
};

/**
 * PCA on log2(count + 1) of the centered sample x gene matrix. A sample is
 * flagged when its score on PC1 or PC2 lies more than `k_mads` scaled MADs
 * from the median score. Each component's sign is fixed so that its largest
 * magnitude loading is positive.
 */
PcaOutlierResult pca_outliers(const CountMatrix& m, double k_mads = 6.0);

/// Keep-mask over genes: true iff the fraction of zero counts is <= max_zero_frac.
std::vector<bool> zero_fraction_filter(const CountMatrix& m, double max_zero_frac = 0.25);

struct QcOptions {
    std::optional<std::string> marker_gene = std::string("HBB");
    double max_marker_fraction = 0.20;
    bool pca_filter = true;
    double k_mads = 6.0;
    std::vector<std::string> exclude_batches;
    std::vector<std::string> exclude_samples;
};

struct QcReport {
    std::vector<PcaFlag> flagged_pca_outliers;
    std::vector<ContaminationFlag> flagged_contaminated;
    std::vector<std::string> excluded_batches;
    std::vector<std::string> excluded_listed; // samples named on an explicit exclude list
    std::vector<std::string> retained_samples;
    std::vector<std::string> retained_genes;
};

/**
 * Runs every sample filter on the unfiltered matrix and intersects the
 * retained sets, so the outcome does not depend on filter order.
 */
QcReport run_qc(const CountMatrix& m, const SampleMeta& meta, const QcOptions& options);

/// Materializes the matrix described by a report.
CountMatrix apply_qc(const CountMatrix& m, const QcReport& report);

} // namespace txnet

#endif
