#ifndef TXNET_DISPERSION_HPP
#define TXNET_DISPERSION_HPP

#include "txnet/data.hpp"

#include <Eigen/Dense>

#include <functional>
#include <span>
#include <vector>

namespace txnet {

enum class DispersionMode { Common, Tagwise };

struct DispersionOptions {
    double lower = 1e-6;
    double upper = 10.0;
    int grid_points = 41;    // on log(phi), used for the tagwise interpolation
    double prior_df = 10.0;  // weight of the common likelihood in the tagwise shrinkage
    int threads = 1;
};

struct DispersionEstimate {
    double common = 0;
    std::vector<double> genewise; // unshrunk maximizers
    std::vector<double> tagwise;  // shrunk toward the common value
    double residual_df = 0;
};

/**
 * Cox-Reid adjusted profile likelihood dispersion estimation over any gene
 * model. `apl(g, phi)` must return the gene's APL at dispersion phi, or -inf
 * when the gene carries no information (such genes are ignored).
 *
 * common: maximizes the summed APL over log(phi) in [lower, upper].
 * tagwise: maximizes APL_g + (prior_df / residual_df) * mean APL on the grid,
 * refined by parabolic interpolation.
 */
DispersionEstimate estimate_dispersion(std::size_t n_genes, double residual_df,
                                       const std::function<double(std::size_t, double)>& apl,
                                       const DispersionOptions& options = {});

/// Dense-design front end: one GLM per gene with offsets = log effective library sizes.
DispersionEstimate estimate_dispersion(const CountMatrix& m, const Eigen::MatrixXd& design,
                                       const Eigen::VectorXd& offsets, const DispersionOptions& options = {});

} // namespace txnet

#endif
