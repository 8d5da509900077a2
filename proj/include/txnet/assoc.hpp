#ifndef TXNET_ASSOC_HPP
#define TXNET_ASSOC_HPP

#include "txnet/contrast.hpp"
#include "txnet/data.hpp"

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

namespace txnet {

enum class LmmTest { Wald, Lrt };
enum class ClinicalChange { Difference, Percent };

/**
 * Linear model y = X b + u_group + e with a random intercept per group,
 * u ~ N(0, tau^2), e ~ N(0, sigma^2). Fits profile the variance ratio
 * gamma = tau^2 / sigma^2; every evaluation works from per-group sums.
 */
class RandomInterceptModel {
public:
    RandomInterceptModel(const Eigen::VectorXd& y, const Eigen::MatrixXd& X, std::span<const int> groups);

    /// Profiled -2 log restricted likelihood, constants dropped.
    double reml_criterion(double gamma) const;
    /// Profiled -2 log likelihood, constants dropped.
    double ml_criterion(double gamma) const;

    struct Gls {
        Eigen::VectorXd beta;
        Eigen::MatrixXd xtvx; // X' V^-1 X with V = I + gamma Z Z'
        double quad = 0;      // r' V^-1 r
        double log_det_v = 0;
    };
    Gls gls(double gamma) const;

    Eigen::Index n() const { return n_; }
    Eigen::Index p() const { return p_; }
    int n_groups() const { return static_cast<int>(group_n_.size()); }

private:
    Eigen::Index n_ = 0;
    Eigen::Index p_ = 0;
    Eigen::MatrixXd xtx_;
    Eigen::VectorXd xty_;
    double yty_ = 0;
    std::vector<double> group_n_;
    std::vector<Eigen::VectorXd> group_x_;
    std::vector<double> group_y_;
};

struct LmmOptions {
    double gamma_lower = 1e-6;
    double gamma_upper = 1e3;
    int grid_points = 21;
    double tol = 1e-10; // golden-section tolerance on log(gamma)
    bool reml = true;
};

struct LmmFit {
    Eigen::VectorXd beta;
    Eigen::MatrixXd beta_cov;
    double sigma2 = 0;
    double tau2 = 0;
    double gamma = 0;
    double criterion = 0; // -2 log (restricted) likelihood at gamma, constants dropped
    Eigen::Index n = 0;
    int n_groups = 0;
    bool ols = false; // fewer than two groups: ordinary least squares
};

/**
 * Profiled REML fit: a 21-point log grid over [gamma_lower, gamma_upper]
 * brackets the minimum, golden-section refines it, and gamma = 0 is taken
 * when the boundary is at least as good. GLS estimates at the optimum.
 */
LmmFit fit_lmm(const Eigen::VectorXd& y, const Eigen::MatrixXd& X, std::span<const int> groups,
               const LmmOptions& options = {});

struct CoefficientTest {
    double estimate = 0;
    double se = 0;
    double statistic = 0;
    double p_value = 1;
    double df = 0;
};

/// Wald t test on one coefficient with n - p degrees of freedom.
CoefficientTest wald_test(const LmmFit& fit, Eigen::Index coefficient);

/// Likelihood ratio test (ML fits) for dropping one coefficient.
CoefficientTest lrt_test(const Eigen::VectorXd& y, const Eigen::MatrixXd& X, std::span<const int> groups,
                         Eigen::Index coefficient, const LmmOptions& options = {});

struct AssociationResult {
    std::string gene_id;
    std::string clinical_var;
    double slope = 0; // effect of the gene's fold change on the clinical change
    double se = 0;
    double p_value = 1;
    double fdr = 1;
    int sign = 0;
    int n_subjects = 0;
    double center_variance = 0;
    double residual_variance = 0;
};

struct ClinicalEdge {
    std::string gene_id;
    std::string clinical_var;
    double slope = 0;
    double p_value = 1;
    double fdr = 1;
    int sign = 0;
};

struct ScanOptions {
    double alpha = 0.05;
    std::vector<std::string> variables; // empty: every variable in the clinical table
    ClinicalChange change = ClinicalChange::Difference;
    LmmTest test = LmmTest::Wald;
    LmmOptions lmm;
    int threads = 1;
};

struct ScanResult {
    std::vector<AssociationResult> results; // variable-major, gene order within a variable
    std::vector<ClinicalEdge> edges;
    std::vector<std::pair<std::string, std::string>> skipped; // (variable, gene) with constant fold change
};

/**
 * One mixed model per (gene, clinical variable): clinical change as the
 * response; the gene's fold change, sex and age as fixed effects; center as
 * a random intercept. BH adjustment per variable; an edge is emitted when
 * fdr < alpha, carrying the slope's sign.
 */
ScanResult clinical_scan(const FoldChangeMatrix& fc, const ClinicalTable& clinical, const SampleMeta& meta,
                         const ScanOptions& options = {});

std::string format_clinical_edges(const std::vector<ClinicalEdge>& edges);
std::vector<ClinicalEdge> parse_clinical_edges(std::string_view text, const std::string& source = "");
std::string format_associations(const std::vector<AssociationResult>& results);

} // namespace txnet

#endif
