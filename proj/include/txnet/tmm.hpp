#ifndef TXNET_TMM_HPP
#define TXNET_TMM_HPP

#include "txnet/data.hpp"

#include <string>
#include <vector>

namespace txnet {

struct TmmOptions {
    double trim_m = 0.30; // fraction trimmed from each end of the log-ratio distribution
    double trim_a = 0.05; // fraction trimmed from each end of the abundance distribution
    bool precision_weights = true;
};

/// Trimmed-mean-of-M-values normalization factors, rescaled to geometric mean 1.
struct TmmFactors {
    std::vector<double> factors;
    Index reference = 0;
    std::string reference_sample;
};

/**
 * The reference sample is the one whose upper-quartile proportion is closest
 * to the mean upper-quartile proportion. Every other sample is compared with
 * it over genes positive in both, trimmed on log-ratio M and abundance A, and
 * averaged with inverse asymptotic-variance weights.
 */
TmmFactors tmm_factors(const CountMatrix& m, const TmmOptions& options = {});

/// Raw (unscaled) TMM factor of one sample against a reference column.
double tmm_pair_factor(std::span<const std::int64_t> obs, std::int64_t obs_lib, std::span<const std::int64_t> ref,
                       std::int64_t ref_lib, const TmmOptions& options = {});

} // namespace txnet

#endif
