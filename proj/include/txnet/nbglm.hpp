#ifndef TXNET_NBGLM_HPP
#define TXNET_NBGLM_HPP

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace txnet::nb {

// Negative binomial with mean mu and variance mu + phi * mu^2. phi == 0 is the
// Poisson limit.

double unit_deviance(double y, double mu, double phi);
double log_density(double y, double mu, double phi);

double deviance(std::span<const double> y, const Eigen::VectorXd& mu, double phi);
double log_likelihood(std::span<const double> y, const Eigen::VectorXd& mu, double phi);

struct GlmControl {
    int max_iter = 50;
    double tol = 1e-8; // on |dev - dev_old| / (|dev| + 0.1)
    double step_tol = 1e-9; // and the largest change of a fitted log mean below this
    int max_halvings = 30;
};

enum class FitStatus { Converged, MaxIterations, Inestimable };

struct GlmFit {
    Eigen::VectorXd coefficients;
    Eigen::VectorXd mu;
    double deviance = 0;
    int iterations = 0;
    FitStatus status = FitStatus::Converged;
    std::vector<double> deviance_trace; // one entry per accepted step, starting with the initial fit
};

/**
 * Log-link NB GLM by iteratively reweighted least squares with step halving.
 * mu = exp(design * beta + offset). Non-finite working weights or an
 * all-zero response give status Inestimable rather than an exception.
 */
GlmFit fit_nb_glm(std::span<const double> y, const Eigen::MatrixXd& design, const Eigen::VectorXd& offsets,
                  double phi, const GlmControl& control = {});

/// Cox-Reid adjusted profile log-likelihood at a converged fit.
double cox_reid_apl(std::span<const double> y, const Eigen::MatrixXd& design, const GlmFit& fit, double phi);

struct LrtResult {
    double lr_stat = 0;
    double df = 0;
    double p_value = 1;
};

/**
 * Likelihood ratio test between nested fits sharing one dispersion. Throws
 * NotNested when the reduced design's column space is not contained in the
 * full design's. Negative statistics down to -1e-8 are clamped to 0.
 */
LrtResult lrt(const Eigen::MatrixXd& full_design, const GlmFit& full, const Eigen::MatrixXd& reduced_design,
              const GlmFit& reduced);

/// Chi-square LRT from two deviances; clamps tiny negative differences.
LrtResult lrt_from_deviances(double deviance_full, double deviance_reduced, double df);

/**
 * One gene under the paired design: subject s contributes a sample at the
 * first timepoint (y_a, offset o_a) and one at the second (y_b, offset o_b).
 * log mu_a = alpha_s + o_a, log mu_b = alpha_s + beta + o_b.
 *
 * This is the same model as an intercept + subject indicators + condition
 * design; the structure lets each Fisher scoring step cost O(subjects).
 * Subjects with zero counts at both timepoints have alpha_s = -inf at the
 * MLE, contribute zero deviance and carry no information on beta, so they
 * are left out of the fit.
 */
class PairedGene {
public:
    PairedGene(std::span<const double> y_a, std::span<const double> y_b, std::span<const double> o_a,
               std::span<const double> o_b);

    struct Fit {
        double log_fc = 0; // beta, natural log scale
        Eigen::VectorXd subject_effects;
        double deviance = 0;
        double log_det_information = 0; // log det of the Fisher information at the fit
        double log_likelihood = 0;
        int iterations = 0;
        FitStatus status = FitStatus::Converged;
        std::vector<double> deviance_trace;
    };

    Fit fit_full(double phi, const GlmControl& control = {}) const;
    /// Subject effects only (beta fixed at 0); returns the deviance.
    double reduced_deviance(double phi) const;
    /// Cox-Reid adjusted profile log-likelihood; -inf when the gene is inestimable.
    double apl(double phi) const;

    bool estimable() const { return estimable_; }
    std::size_t n_active() const { return ya_.size(); }

private:
    std::vector<double> ya_, yb_, oa_, ob_;
    bool estimable_ = true;
};

} // namespace txnet::nb

#endif
