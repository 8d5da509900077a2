#include "txnet/dispersion.hpp"

#include "txnet/error.hpp"
#include "txnet/nbglm.hpp"
#include "txnet/parallel.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace txnet {

namespace {

// Index of the largest entry and a parabolic refinement of its position on an
// equally spaced grid, returned as a fractional grid coordinate.
double refine_argmax(const std::vector<double>& f) {
    const std::size_t k = static_cast<std::size_t>(std::max_element(f.begin(), f.end()) - f.begin());
    if (k == 0 || k + 1 == f.size()) {
        return static_cast<double>(k);
    }
    const double curvature = f[k - 1] - 2 * f[k] + f[k + 1];
    if (!(curvature < 0)) {
        return static_cast<double>(k);
    }
    const double shift = std::clamp(0.5 * (f[k - 1] - f[k + 1]) / curvature, -1.0, 1.0);
    return static_cast<double>(k) + shift;
}

} // namespace

DispersionEstimate estimate_dispersion(std::size_t n_genes, double residual_df,
                                       const std::function<double(std::size_t, double)>& apl,
                                       const DispersionOptions& options) {
    if (!(residual_df >= 1)) {
        throw Error(Errc::NoResidualDf, "dispersion estimation needs at least one residual degree of freedom");
    }
    if (!(options.lower > 0 && options.upper > options.lower) || options.grid_points < 3) {
        throw Error(Errc::InvalidArgument, "invalid dispersion search range");
    }
    const auto k_points = static_cast<std::size_t>(options.grid_points);
    const double x_lo = std::log(options.lower);
    const double x_hi = std::log(options.upper);
    const double h = (x_hi - x_lo) / static_cast<double>(k_points - 1);
    std::vector<double> grid(k_points);
    for (std::size_t k = 0; k < k_points; ++k) {
        grid[k] = x_lo + h * static_cast<double>(k);
    }

    std::vector<std::vector<double>> table(n_genes, std::vector<double>(k_points));
    std::vector<std::uint8_t> informative(n_genes, 1);
    parallel_for(n_genes, options.threads, [&](std::size_t g) {
        for (std::size_t k = 0; k < k_points; ++k) {
            table[g][k] = apl(g, std::exp(grid[k]));
            if (!std::isfinite(table[g][k])) {
                informative[g] = 0;
            }
        }
    });

    std::vector<double> mean(k_points, 0.0);
    std::size_t used = 0;
    for (std::size_t g = 0; g < n_genes; ++g) {
        if (!informative[g]) {
            continue;
        }
        ++used;
        for (std::size_t k = 0; k < k_points; ++k) {
            mean[k] += table[g][k];
        }
    }

    DispersionEstimate out;
    out.residual_df = residual_df;
    if (used == 0) {
        out.common = options.lower;
        out.genewise.assign(n_genes, options.lower);
        out.tagwise.assign(n_genes, options.lower);
        return out;
    }
    for (auto& v : mean) {
        v /= static_cast<double>(used);
    }

    // Common dispersion: bracket on the grid, then Brent on the exact summed APL.
    const std::size_t best = static_cast<std::size_t>(std::max_element(mean.begin(), mean.end()) - mean.begin());
    const double lo = grid[best == 0 ? 0 : best - 1];
    const double hi = grid[std::min(best + 1, k_points - 1)];
    const auto negative_total = [&](double x) {
        const double phi = std::exp(x);
        std::vector<double> parts(n_genes, 0.0);
        parallel_for(n_genes, options.threads, [&](std::size_t g) {
            if (informative[g]) {
                parts[g] = apl(g, phi);
            }
        });
        double total = 0;
        for (double v : parts) {
            total += v;
        }
        return -total;
    };
    std::uintmax_t max_iter = 100;
    const auto [x_best, f_best] = boost::math::tools::brent_find_minima(negative_total, lo, hi, 40, max_iter);
    out.common = std::exp(x_best);
    (void)f_best;

    // Gene-wise and shrunk estimates on the grid.
    const double prior_weight = options.prior_df / residual_df;
    out.genewise.resize(n_genes);
    out.tagwise.resize(n_genes);
    std::vector<double> combined(k_points);
    for (std::size_t g = 0; g < n_genes; ++g) {
        if (!informative[g]) {
            out.genewise[g] = out.common;
            out.tagwise[g] = out.common;
            continue;
        }
        out.genewise[g] = std::exp(x_lo + h * refine_argmax(table[g]));
        for (std::size_t k = 0; k < k_points; ++k) {
            combined[k] = table[g][k] + prior_weight * mean[k];
        }
        out.tagwise[g] = std::exp(x_lo + h * refine_argmax(combined));
    }
    return out;
}

DispersionEstimate estimate_dispersion(const CountMatrix& m, const Eigen::MatrixXd& design,
                                       const Eigen::VectorXd& offsets, const DispersionOptions& options) {
    if (design.rows() != m.n_samples() || offsets.size() != m.n_samples()) {
        throw Error(Errc::InvalidArgument, "design/offsets do not match the sample count");
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() < design.cols()) {
        throw Error(Errc::RankDeficient, "design matrix is not of full column rank");
    }
    const double residual_df = static_cast<double>(design.rows() - design.cols());
    const Eigen::MatrixXd y = m.counts().cast<double>();
    const auto apl = [&](std::size_t g, double phi) {
        const Eigen::VectorXd row = y.row(static_cast<Eigen::Index>(g)).transpose();
        const std::span<const double> yv(row.data(), static_cast<std::size_t>(row.size()));
        const auto fit = nb::fit_nb_glm(yv, design, offsets, phi);
        return nb::cox_reid_apl(yv, design, fit, phi);
    };
    return estimate_dispersion(static_cast<std::size_t>(m.n_genes()), residual_df, apl, options);
}

} // namespace txnet
