#ifndef TXNET_NETINFER_HPP
#define TXNET_NETINFER_HPP

#include "txnet/contrast.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace txnet {

/// Correlation matrix of fold-change columns, after dropping constant columns.
struct SampleCorrelation {
    std::vector<std::string> gene_ids;
    Eigen::MatrixXd S;
    std::vector<std::string> dropped; // zero-variance genes
};

/// Fold-change columns centered and scaled to unit sample variance (constant columns removed).
struct StandardizedData {
    std::vector<std::string> gene_ids;
    Eigen::MatrixXd z; // subjects x kept genes
    std::vector<std::string> dropped;
};

StandardizedData standardize_columns(const FoldChangeMatrix& fc);
SampleCorrelation standardize(const FoldChangeMatrix& fc);
Eigen::MatrixXd correlation_of_standardized(const Eigen::MatrixXd& z);

struct GlassoOptions {
    double tol = 1e-6;        // mean absolute change of the working covariance per sweep
    int max_iter = 200;       // outer sweeps
    double gap_tol = 1e-4;    // duality gap required at return
    double inner_tol = 1e-10; // largest coefficient change in the inner lasso
    int inner_max_iter = 10000;
    bool throw_on_nonconvergence = true;
};

struct PrecisionEstimate {
    std::vector<std::string> gene_ids;
    double lambda = 0;
    Eigen::MatrixXd theta;        // precision matrix, symmetric positive definite
    Eigen::MatrixXd covariance;   // working covariance W at return
    Eigen::MatrixXd partial_corr; // -theta_ij / sqrt(theta_ii theta_jj), unit diagonal
    std::vector<std::pair<Eigen::Index, Eigen::Index>> support; // i < j with theta_ij != 0
    double duality_gap = 0;
    double objective = 0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> dual_trace; // log det W after each sweep; non-decreasing
};

/**
 * Graphical lasso: maximizes log det(Theta) - tr(S Theta) - lambda * sum_{i!=j} |Theta_ij|
 * with an unpenalized diagonal, by block coordinate ascent on the dual (one
 * lasso per column, solved by coordinate descent). Positive definiteness of
 * Theta is certified by Cholesky and the duality gap is reported.
 */
PrecisionEstimate glasso(const Eigen::MatrixXd& S, double lambda, const GlassoOptions& options = {});
PrecisionEstimate glasso(const SampleCorrelation& s, double lambda, const GlassoOptions& options = {});

/// Penalized log-likelihood at Theta; -inf when Theta is not positive definite.
double glasso_objective(const Eigen::MatrixXd& S, const Eigen::MatrixXd& theta, double lambda);

enum class RicStatistic { Quantile, Mean };

struct RicOptions {
    int reps = 20;
    RicStatistic statistic = RicStatistic::Quantile;
    double quantile = 1.0; // 1.0 takes the largest null maximum over the repetitions
};

struct RicResult {
    double lambda = 0;
    std::vector<double> null_maxima; // per repetition
};

/**
 * Permutation-null penalty: each repetition shuffles every column's rows
 * independently, destroying cross-column dependence, and records the largest
 * absolute off-diagonal correlation. The penalty summarizes those maxima.
 */
RicResult ric_lambda(const Eigen::MatrixXd& standardized, std::uint64_t seed, const RicOptions& options = {});

struct GeneEdge {
    std::string source;
    std::string target;
    double partial_corr = 0;
    int sign = 0;
};

std::vector<GeneEdge> gene_edges(const PrecisionEstimate& estimate);

std::string format_gene_edges(const std::vector<GeneEdge>& edges);
std::vector<GeneEdge> parse_gene_edges(std::string_view text, const std::string& source = "");

} // namespace txnet

#endif
