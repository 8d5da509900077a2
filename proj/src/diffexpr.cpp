#include "txnet/diffexpr.hpp"

#include "txnet/error.hpp"
#include "txnet/nbglm.hpp"
#include "txnet/parallel.hpp"
#include "txnet/qc.hpp"
#include "txnet/stats.hpp"
#include "txnet/textio.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace txnet {

const char* de_status_name(DeStatus status) noexcept {
    switch (status) {
    case DeStatus::Tested: return "tested";
    case DeStatus::RemovedZeroFrac: return "removed_zero_frac";
    case DeStatus::RemovedInestimable: return "removed_inestimable";
    }
    return "unknown";
}

PairedSamples paired_samples(const CountMatrix& m, const SampleMeta& meta, Contrast contrast) {
    struct Pair {
        std::string subject;
        Index first = -1;
        Index second = -1;
    };
    std::vector<Pair> found;
    std::unordered_map<std::string, std::size_t> slot;
    for (Index j = 0; j < m.n_samples(); ++j) {
        const auto* info = meta.find(m.sample_ids()[static_cast<std::size_t>(j)]);
        if (info == nullptr) {
            throw Error(Errc::InvalidArgument, "sample " + m.sample_ids()[static_cast<std::size_t>(j)] + " has no metadata row");
        }
        if (info->cid != contrast.from && info->cid != contrast.to) {
            continue;
        }
        auto [it, inserted] = slot.emplace(info->subject_id, found.size());
        if (inserted) {
            found.push_back({info->subject_id});
        }
        auto& p = found[it->second];
        (info->cid == contrast.from ? p.first : p.second) = j;
    }
    std::sort(found.begin(), found.end(), [](const Pair& a, const Pair& b) { return a.subject < b.subject; });
    PairedSamples out;
    for (const auto& p : found) {
        if (p.first >= 0 && p.second >= 0) {
            out.subjects.push_back(p.subject);
            out.first.push_back(p.first);
            out.second.push_back(p.second);
        }
    }
    return out;
}

DeContrastResult de_contrast(const CountMatrix& m, const SampleMeta& meta, Contrast contrast, const DeOptions& options) {
    if (!(options.fc_threshold >= 1) || !(options.alpha > 0 && options.alpha < 1)) {
        throw Error(Errc::InvalidArgument, "alpha must lie in (0,1) and the fold-change threshold be >= 1");
    }
    const auto pairs = paired_samples(m, meta, contrast);
    const std::size_t n_pairs = pairs.subjects.size();
    if (n_pairs < 3) {
        throw Error(Errc::TooFewPairs, "contrast " + contrast.label() + " has fewer than 3 paired subjects");
    }
    std::vector<Index> columns(pairs.first);
    columns.insert(columns.end(), pairs.second.begin(), pairs.second.end());
    const CountMatrix paired = m.select_samples(columns);

    const auto keep = zero_fraction_filter(paired, options.max_zero_frac);
    std::vector<Index> kept_rows;
    for (Index i = 0; i < paired.n_genes(); ++i) {
        if (keep[static_cast<std::size_t>(i)]) {
            kept_rows.push_back(i);
        }
    }

    DeContrastResult result;
    result.contrast = contrast;
    result.subjects = pairs.subjects;
    result.genes.resize(static_cast<std::size_t>(m.n_genes()));
    for (Index i = 0; i < m.n_genes(); ++i) {
        auto& r = result.genes[static_cast<std::size_t>(i)];
        r.gene_id = m.gene_ids()[static_cast<std::size_t>(i)];
        r.status = keep[static_cast<std::size_t>(i)] ? DeStatus::Tested : DeStatus::RemovedZeroFrac;
        r.log2_fc = r.mean_log_cpm = r.lr_stat = r.p_value = r.fdr = r.dispersion = std::nan("");
    }
    result.counts = paired.select_genes(kept_rows);
    if (kept_rows.empty()) {
        return result;
    }
    const CountMatrix& filtered = result.counts;
    result.tmm = tmm_factors(filtered, options.tmm);

    const Index n_samples = filtered.n_samples();
    std::vector<double> offsets(static_cast<std::size_t>(n_samples));
    for (Index j = 0; j < n_samples; ++j) {
        offsets[static_cast<std::size_t>(j)] =
            std::log(static_cast<double>(filtered.lib_sizes()(j)) * result.tmm.factors[static_cast<std::size_t>(j)]);
    }
    const std::span<const double> off_a(offsets.data(), n_pairs);
    const std::span<const double> off_b(offsets.data() + n_pairs, n_pairs);

    const std::size_t n_kept = kept_rows.size();
    std::vector<nb::PairedGene> models;
    models.reserve(n_kept);
    {
        std::vector<double> ya(n_pairs), yb(n_pairs);
        for (std::size_t g = 0; g < n_kept; ++g) {
            for (std::size_t s = 0; s < n_pairs; ++s) {
                ya[s] = static_cast<double>(filtered.counts()(static_cast<Index>(g), static_cast<Index>(s)));
                yb[s] = static_cast<double>(filtered.counts()(static_cast<Index>(g), static_cast<Index>(n_pairs + s)));
            }
            models.emplace_back(ya, yb, off_a, off_b);
        }
    }

    auto disp_options = options.dispersion;
    disp_options.threads = options.threads;
    result.dispersion = estimate_dispersion(
        n_kept, static_cast<double>(n_pairs - 1), [&](std::size_t g, double phi) { return models[g].apl(phi); },
        disp_options);

    const Eigen::MatrixXd log_cpm =
        cpm(filtered, result.tmm.factors, options.prior_count).array().log().matrix() / std::log(2.0);

    parallel_for(n_kept, options.threads, [&](std::size_t g) {
        auto& r = result.genes[static_cast<std::size_t>(kept_rows[g])];
        const double phi = options.dispersion_mode == DispersionMode::Common ? result.dispersion.common
                                                                             : result.dispersion.tagwise[g];
        r.dispersion = phi;
        r.mean_log_cpm = log_cpm.row(static_cast<Index>(g)).mean();
        const auto fit = models[g].fit_full(phi);
        if (fit.status != nb::FitStatus::Converged) {
            r.status = DeStatus::RemovedInestimable;
            return;
        }
        const double dev_reduced = models[g].reduced_deviance(phi);
        nb::LrtResult test;
        try {
            test = nb::lrt_from_deviances(fit.deviance, dev_reduced, 1.0);
        } catch (const Error&) {
            r.status = DeStatus::RemovedInestimable;
            return;
        }
        r.log2_fc = fit.log_fc / std::log(2.0);
        r.lr_stat = test.lr_stat;
        r.p_value = test.p_value;
    });

    std::vector<std::size_t> tested;
    std::vector<double> p;
    for (std::size_t i = 0; i < result.genes.size(); ++i) {
        if (result.genes[i].status == DeStatus::Tested) {
            tested.push_back(i);
            p.push_back(result.genes[i].p_value);
        }
    }
    const auto q = stats::bh_adjust(p);
    const double log2_threshold = std::log2(options.fc_threshold);
    for (std::size_t k = 0; k < tested.size(); ++k) {
        auto& r = result.genes[tested[k]];
        r.fdr = q[k];
        r.passes_fc_filter = std::abs(r.log2_fc) > log2_threshold && r.fdr < options.alpha;
    }
    return result;
}

std::vector<std::string> fc_filtered_genes(const std::vector<DEResult>& table) {
    std::vector<std::string> out;
    for (const auto& r : table) {
        if (r.passes_fc_filter) {
            out.push_back(r.gene_id);
        }
    }
    return out;
}

FoldChangeMatrix paired_logfc(const CountMatrix& m, std::span<const double> effective_lib_sizes,
                              const SampleMeta& meta, std::span<const std::string> genes, Contrast contrast,
                              double prior) {
    if (genes.empty()) {
        throw Error(Errc::EmptyGeneSubset, "no genes requested for the fold-change matrix");
    }
    if (static_cast<Index>(effective_lib_sizes.size()) != m.n_samples()) {
        throw Error(Errc::InvalidArgument, "effective library sizes do not match samples");
    }
    std::vector<Index> rows;
    for (const auto& g : genes) {
        const auto i = m.gene_index(g);
        if (!i) {
            throw Error(Errc::InvalidArgument, "gene " + g + " not in count matrix");
        }
        rows.push_back(*i);
    }
    const auto pairs = paired_samples(m, meta, contrast);
    FoldChangeMatrix fc;
    fc.contrast = contrast;
    fc.subject_ids = pairs.subjects;
    fc.gene_ids.assign(genes.begin(), genes.end());
    fc.values.resize(static_cast<Index>(pairs.subjects.size()), static_cast<Index>(rows.size()));
    for (std::size_t s = 0; s < pairs.subjects.size(); ++s) {
        const Index ja = pairs.first[s];
        const Index jb = pairs.second[s];
        const double la = effective_lib_sizes[static_cast<std::size_t>(ja)];
        const double lb = effective_lib_sizes[static_cast<std::size_t>(jb)];
        if (!(la > 0) || !(lb > 0)) {
            throw Error(Errc::ZeroLibrarySize, "zero effective library size in contrast " + contrast.label());
        }
        for (std::size_t k = 0; k < rows.size(); ++k) {
            const double ca = 1e6 * (static_cast<double>(m.counts()(rows[k], ja)) + prior) / la;
            const double cb = 1e6 * (static_cast<double>(m.counts()(rows[k], jb)) + prior) / lb;
            fc.values(static_cast<Index>(s), static_cast<Index>(k)) = std::log2(cb) - std::log2(ca);
        }
    }
    return fc;
}

std::string format_de_table(const std::vector<DEResult>& table) {
    using textio::format_double;
    std::string out = "gene_id\tlog2_fc\tmean_log_cpm\tlr_stat\tp_value\tfdr\tstatus\tpasses_fc_filter\n";
    for (const auto& r : table) {
        out += r.gene_id + '\t' + format_double(r.log2_fc) + '\t' + format_double(r.mean_log_cpm) + '\t' +
               format_double(r.lr_stat) + '\t' + format_double(r.p_value) + '\t' + format_double(r.fdr) + '\t' +
               de_status_name(r.status) + '\t' + (r.passes_fc_filter ? "true" : "false") + '\n';
    }
    return out;
}

std::vector<DEResult> parse_de_table(std::string_view text, const std::string& source) {
    using PK = ParseError::Kind;
    std::vector<DEResult> out;
    std::size_t start = 0;
    std::size_t line_no = 0;
    while (start < text.size()) {
        auto pos = text.find('\n', start);
        if (pos == std::string_view::npos) {
            pos = text.size();
        }
        const auto line = text.substr(start, pos - start);
        start = pos + 1;
        ++line_no;
        if (line_no == 1 || line.empty()) {
            continue;
        }
        const auto f = textio::split_tabs(line);
        if (f.size() != 8) {
            throw ParseError(PK::RaggedRow, source, line_no, "expected 8 fields");
        }
        DEResult r;
        r.gene_id = std::string(f[0]);
        const auto num = [&](std::size_t k) {
            const auto v = textio::parse_double(f[k]);
            if (!v) {
                throw ParseError(PK::BadValue, source, line_no, std::string(f[k]));
            }
            return *v;
        };
        r.log2_fc = num(1);
        r.mean_log_cpm = num(2);
        r.lr_stat = num(3);
        r.p_value = num(4);
        r.fdr = num(5);
        if (f[6] == "tested") {
            r.status = DeStatus::Tested;
        } else if (f[6] == "removed_zero_frac") {
            r.status = DeStatus::RemovedZeroFrac;
        } else if (f[6] == "removed_inestimable") {
            r.status = DeStatus::RemovedInestimable;
        } else {
            throw ParseError(PK::BadValue, source, line_no, "status " + std::string(f[6]));
        }
        r.passes_fc_filter = f[7] == "true";
        out.push_back(std::move(r));
    }
    return out;
}

} // namespace txnet
