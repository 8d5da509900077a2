#include "txnet/qc.hpp"

#include "txnet/error.hpp"
#include "txnet/stats.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace txnet {

Eigen::MatrixXd cpm(const CountMatrix& m, std::span<const double> factors, double prior) {
    if (static_cast<Index>(factors.size()) != m.n_samples()) {
        throw Error(Errc::InvalidArgument, "normalization factor count does not match samples");
    }
    if (!(prior >= 0)) {
        throw Error(Errc::InvalidArgument, "prior count must be non-negative");
    }
    Eigen::MatrixXd out(m.n_genes(), m.n_samples());
    for (Index j = 0; j < m.n_samples(); ++j) {
        const double eff = static_cast<double>(m.lib_sizes()(j)) * factors[static_cast<std::size_t>(j)];
        if (!(eff > 0) || !std::isfinite(eff)) {
            throw Error(Errc::ZeroLibrarySize, "zero effective library size for sample " + m.sample_ids()[static_cast<std::size_t>(j)]);
        }
        for (Index i = 0; i < m.n_genes(); ++i) {
            out(i, j) = 1e6 * (static_cast<double>(m.counts()(i, j)) + prior) / eff;
        }
    }
    return out;
}

Eigen::MatrixXd cpm(const CountMatrix& m, double prior) {
    std::vector<double> ones(static_cast<std::size_t>(m.n_samples()), 1.0);
    return cpm(m, ones, prior);
}

std::vector<ContaminationFlag> contamination_filter(const CountMatrix& m, std::string_view marker_gene,
                                                   double max_fraction) {
    if (!(max_fraction > 0 && max_fraction < 1)) {
        throw Error(Errc::InvalidArgument, "max_fraction must lie in (0, 1)");
    }
    const auto row = m.gene_index(marker_gene);
    if (!row) {
        throw Error(Errc::MarkerAbsent, "marker gene " + std::string(marker_gene) + " not in count matrix");
    }
    std::vector<ContaminationFlag> flags;
    for (Index j = 0; j < m.n_samples(); ++j) {
        const auto lib = m.lib_sizes()(j);
        if (lib == 0) {
            continue;
        }
        const double share = static_cast<double>(m.counts()(*row, j)) / static_cast<double>(lib);
        if (share > max_fraction) {
            flags.push_back({m.sample_ids()[static_cast<std::size_t>(j)], share});
        }
    }
    return flags;
}

PcaOutlierResult pca_outliers(const CountMatrix& m, double k_mads) {
    const Index n = m.n_samples();
    if (n < 3) {
        throw Error(Errc::TooFewSamples, "PCA outlier detection needs at least 3 samples");
    }
    Eigen::MatrixXd x = m.counts().cast<double>().transpose().unaryExpr([](double c) { return std::log2(c + 1.0); });
    const Eigen::RowVectorXd mean = x.colwise().mean();
    x.rowwise() -= mean;

    PcaOutlierResult result;
    result.scores = Eigen::MatrixXd::Zero(n, 2);
    const double scale = std::max(1.0, x.norm());
    if (x.cols() == 0 || x.norm() <= 1e-10 * scale) {
        return result;
    }

    Eigen::BDCSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    std::vector<bool> informative(2, false);
    for (Index c = 0; c < std::min<Index>(2, sv.size()); ++c) {
        if (sv(c) <= 1e-10 * scale) {
            continue; // degenerate component, nothing to flag
        }
        Index arg = 0;
        svd.matrixV().col(c).cwiseAbs().maxCoeff(&arg);
        const double sign = svd.matrixV()(arg, c) < 0 ? -1.0 : 1.0;
        result.scores.col(c) = sign * svd.matrixU().col(c) * sv(c);
        result.singular_values(c) = sv(c);
        informative[static_cast<std::size_t>(c)] = true;
    }

    std::vector<bool> flag(static_cast<std::size_t>(n), false);
    for (Index c = 0; c < 2; ++c) {
        if (!informative[static_cast<std::size_t>(c)]) {
            continue;
        }
        std::vector<double> col(result.scores.col(c).data(), result.scores.col(c).data() + n);
        const double med = stats::median(col);
        const double spread = stats::mad(col);
        const double floor = 1e-8 * sv(c);
        for (Index j = 0; j < n; ++j) {
            const double dev = std::abs(col[static_cast<std::size_t>(j)] - med);
            if (dev > k_mads * spread && dev > floor) {
                flag[static_cast<std::size_t>(j)] = true;
            }
        }
    }
    for (Index j = 0; j < n; ++j) {
        if (flag[static_cast<std::size_t>(j)]) {
            result.flagged.push_back({m.sample_ids()[static_cast<std::size_t>(j)], result.scores(j, 0), result.scores(j, 1)});
        }
    }
    return result;
}

std::vector<bool> zero_fraction_filter(const CountMatrix& m, double max_zero_frac) {
    if (!(max_zero_frac >= 0 && max_zero_frac <= 1)) {
        throw Error(Errc::InvalidArgument, "max_zero_frac must lie in [0, 1]");
    }
    std::vector<bool> keep(static_cast<std::size_t>(m.n_genes()));
    const Index n = m.n_samples();
    for (Index i = 0; i < m.n_genes(); ++i) {
        const Index zeros = (m.counts().row(i).array() == 0).count();
        // zeros / n <= max_zero_frac, compared without dividing
        keep[static_cast<std::size_t>(i)] = static_cast<double>(zeros) <= max_zero_frac * static_cast<double>(n);
    }
    return keep;
}

QcReport run_qc(const CountMatrix& m, const SampleMeta& meta, const QcOptions& options) {
    meta.check_covers(m);
    QcReport report;
    std::unordered_set<std::string> dropped;

    if (options.marker_gene) {
        report.flagged_contaminated = contamination_filter(m, *options.marker_gene, options.max_marker_fraction);
        for (const auto& f : report.flagged_contaminated) {
            dropped.insert(f.sample_id);
        }
    }
    if (options.pca_filter) {
        report.flagged_pca_outliers = pca_outliers(m, options.k_mads).flagged;
        for (const auto& f : report.flagged_pca_outliers) {
            dropped.insert(f.sample_id);
        }
    }
    std::unordered_set<std::string> bad_batches(options.exclude_batches.begin(), options.exclude_batches.end());
    report.excluded_batches = options.exclude_batches;
    std::sort(report.excluded_batches.begin(), report.excluded_batches.end());
    report.excluded_batches.erase(std::unique(report.excluded_batches.begin(), report.excluded_batches.end()),
                                  report.excluded_batches.end());
    std::unordered_set<std::string> listed(options.exclude_samples.begin(), options.exclude_samples.end());

    for (const auto& s : m.sample_ids()) {
        if (listed.count(s) != 0) {
            report.excluded_listed.push_back(s);
            dropped.insert(s);
        }
        if (bad_batches.count(meta.find(s)->batch) != 0) {
            dropped.insert(s);
        }
    }
    for (const auto& s : m.sample_ids()) {
        if (dropped.count(s) == 0) {
            report.retained_samples.push_back(s);
        }
    }
    report.retained_genes = m.gene_ids();
    return report;
}

CountMatrix apply_qc(const CountMatrix& m, const QcReport& report) {
    std::vector<Index> cols;
    cols.reserve(report.retained_samples.size());
    for (const auto& s : report.retained_samples) {
        const auto j = m.sample_index(s);
        if (!j) {
            throw Error(Errc::InvalidArgument, "QC report names unknown sample " + s);
        }
        cols.push_back(*j);
    }
    std::vector<Index> rows;
    rows.reserve(report.retained_genes.size());
    for (const auto& g : report.retained_genes) {
        const auto i = m.gene_index(g);
        if (!i) {
            throw Error(Errc::InvalidArgument, "QC report names unknown gene " + g);
        }
        rows.push_back(*i);
    }
    return m.select_samples(cols).select_genes(rows);
}

} // namespace txnet
