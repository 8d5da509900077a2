#include "txnet/tmm.hpp"

#include "txnet/error.hpp"
#include "txnet/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace txnet {

namespace {

// Average ranks (1-based) with ties sharing the mean of their positions.
std::vector<double> average_ranks(const std::vector<double>& x) {
    const std::size_t n = x.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && x[order[j + 1]] == x[order[i]]) {
            ++j;
        }
        const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) {
            ranks[order[k]] = r;
        }
        i = j + 1;
    }
    return ranks;
}

} // namespace

double tmm_pair_factor(std::span<const std::int64_t> obs, std::int64_t obs_lib, std::span<const std::int64_t> ref,
                       std::int64_t ref_lib, const TmmOptions& options) {
    const double n_obs = static_cast<double>(obs_lib);
    const double n_ref = static_cast<double>(ref_lib);
    std::vector<double> log_ratio;
    std::vector<double> abundance;
    std::vector<double> variance;
    for (std::size_t g = 0; g < obs.size(); ++g) {
        if (obs[g] <= 0 || ref[g] <= 0) {
            continue;
        }
        const double yo = static_cast<double>(obs[g]);
        const double yr = static_cast<double>(ref[g]);
        const double po = yo / n_obs;
        const double pr = yr / n_ref;
        log_ratio.push_back(std::log2(po / pr));
        abundance.push_back((std::log2(po) + std::log2(pr)) / 2.0);
        variance.push_back((n_obs - yo) / n_obs / yo + (n_ref - yr) / n_ref / yr);
    }
    if (log_ratio.empty()) {
        throw Error(Errc::NoSharedGenes, "sample shares no positive gene with the TMM reference");
    }
    double max_abs = 0;
    for (double v : log_ratio) {
        max_abs = std::max(max_abs, std::abs(v));
    }
    if (max_abs < 1e-6) {
        return 1.0;
    }

    const double n = static_cast<double>(log_ratio.size());
    const double lo_m = std::floor(n * options.trim_m) + 1;
    const double hi_m = n + 1 - lo_m;
    const double lo_a = std::floor(n * options.trim_a) + 1;
    const double hi_a = n + 1 - lo_a;
    const auto rank_m = average_ranks(log_ratio);
    const auto rank_a = average_ranks(abundance);

    double num = 0;
    double den = 0;
    for (std::size_t g = 0; g < log_ratio.size(); ++g) {
        const bool keep = rank_m[g] >= lo_m && rank_m[g] <= hi_m && rank_a[g] >= lo_a && rank_a[g] <= hi_a;
        if (!keep) {
            continue;
        }
        const double w = options.precision_weights ? 1.0 / variance[g] : 1.0;
        num += w * log_ratio[g];
        den += w;
    }
    const double f = den > 0 ? num / den : 0.0;
    return std::exp2(std::isfinite(f) ? f : 0.0);
}

TmmFactors tmm_factors(const CountMatrix& m, const TmmOptions& options) {
    const Index n = m.n_samples();
    if (n < 2) {
        throw Error(Errc::TooFewSamples, "TMM needs at least 2 samples");
    }
    for (Index j = 0; j < n; ++j) {
        if (m.lib_sizes()(j) <= 0) {
            throw Error(Errc::ZeroLibrarySize, "empty library for sample " + m.sample_ids()[static_cast<std::size_t>(j)]);
        }
    }

    std::vector<double> upper_quartile(static_cast<std::size_t>(n));
    for (Index j = 0; j < n; ++j) {
        std::vector<double> col(static_cast<std::size_t>(m.n_genes()));
        const double lib = static_cast<double>(m.lib_sizes()(j));
        for (Index i = 0; i < m.n_genes(); ++i) {
            col[static_cast<std::size_t>(i)] = static_cast<double>(m.counts()(i, j)) / lib;
        }
        upper_quartile[static_cast<std::size_t>(j)] = stats::quantile(std::move(col), 0.75);
    }
    const double mean_uq = std::accumulate(upper_quartile.begin(), upper_quartile.end(), 0.0) / static_cast<double>(n);
    Index reference = 0;
    for (Index j = 1; j < n; ++j) {
        if (std::abs(upper_quartile[static_cast<std::size_t>(j)] - mean_uq) <
            std::abs(upper_quartile[static_cast<std::size_t>(reference)] - mean_uq)) {
            reference = j;
        }
    }

    // Columns are contiguous in the column-major count array.
    const auto column = [&](Index j) {
        return std::span<const std::int64_t>(m.counts().col(j).data(), static_cast<std::size_t>(m.n_genes()));
    };
    TmmFactors out;
    out.reference = reference;
    out.reference_sample = m.sample_ids()[static_cast<std::size_t>(reference)];
    out.factors.resize(static_cast<std::size_t>(n));
    double log_sum = 0;
    for (Index j = 0; j < n; ++j) {
        const double f = tmm_pair_factor(column(j), m.lib_sizes()(j), column(reference), m.lib_sizes()(reference), options);
        out.factors[static_cast<std::size_t>(j)] = f;
        log_sum += std::log(f);
    }
    const double geo = std::exp(log_sum / static_cast<double>(n));
    for (auto& f : out.factors) {
        f /= geo;
    }
    return out;
}

} // namespace txnet
