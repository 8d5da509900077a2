#include "txnet/nbglm.hpp"

#include "txnet/error.hpp"
#include "txnet/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace txnet::nb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// sum_{k=0}^{y-1} log(1 + k * phi), i.e. lgamma(y + 1/phi) - lgamma(1/phi) - y log(1/phi).
double sum_log1p_steps(double y, double phi) {
    if (y < 2) {
        return 0.0;
    }
    if (y <= 32) {
        double s = 0;
        for (int k = 1; k < static_cast<int>(y); ++k) {
            s += std::log1p(k * phi);
        }
        return s;
    }
    if (y * phi < 1e-3) {
        // power series in phi; the fourth term is below 1e-12 relative here
        const double s1 = y * (y - 1) / 2;
        const double s2 = (y - 1) * y * (2 * y - 1) / 6;
        const double s3 = s1 * s1;
        return phi * s1 - phi * phi * s2 / 2 + phi * phi * phi * s3 / 3;
    }
    const double r = 1.0 / phi;
    return std::lgamma(y + r) - std::lgamma(r) - y * std::log(r);
}

bool better_or_equal(double candidate, double current) {
    return std::isfinite(candidate) && candidate <= current * (1 + 1e-14) + 1e-14;
}

bool converged(double dev, double dev_old, double tol) {
    return std::abs(dev - dev_old) / (std::abs(dev) + 0.1) < tol;
}

} // namespace

double unit_deviance(double y, double mu, double phi) {
    if (phi == 0) {
        if (y == 0) {
            return 2 * mu;
        }
        return 2 * (y * std::log(y / mu) - (y - mu));
    }
    if (y == 0) {
        return 2 / phi * std::log1p(phi * mu);
    }
    return 2 * (y * std::log(y / mu) - (y + 1 / phi) * (std::log1p(phi * y) - std::log1p(phi * mu)));
}

double log_density(double y, double mu, double phi) {
    if (mu == 0) {
        return y == 0 ? 0.0 : -kInf;
    }
    if (phi == 0) {
        return y * std::log(mu) - mu - std::lgamma(y + 1);
    }
    return sum_log1p_steps(y, phi) - std::lgamma(y + 1) + y * std::log(mu) - (y + 1 / phi) * std::log1p(phi * mu);
}

double deviance(std::span<const double> y, const Eigen::VectorXd& mu, double phi) {
    double d = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        d += unit_deviance(y[i], mu(static_cast<Eigen::Index>(i)), phi);
    }
    return d;
}

double log_likelihood(std::span<const double> y, const Eigen::VectorXd& mu, double phi) {
    double l = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        l += log_density(y[i], mu(static_cast<Eigen::Index>(i)), phi);
    }
    return l;
}

// ---------------------------------------------------------------------------
// Generic IRLS

GlmFit fit_nb_glm(std::span<const double> y, const Eigen::MatrixXd& design, const Eigen::VectorXd& offsets,
                  double phi, const GlmControl& control) {
    const Eigen::Index n = design.rows();
    const Eigen::Index p = design.cols();
    if (static_cast<Eigen::Index>(y.size()) != n || offsets.size() != n) {
        throw Error(Errc::InvalidArgument, "response, design and offsets disagree in length");
    }
    if (!(phi >= 0)) {
        throw Error(Errc::InvalidArgument, "dispersion must be non-negative");
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() < p) {
        throw Error(Errc::RankDeficient, "design matrix is not of full column rank");
    }

    GlmFit fit;
    fit.coefficients = Eigen::VectorXd::Constant(p, std::nan(""));
    fit.mu = Eigen::VectorXd::Zero(n);
    if (std::all_of(y.begin(), y.end(), [](double v) { return v == 0; })) {
        fit.status = FitStatus::Inestimable;
        return fit;
    }

    const Eigen::Map<const Eigen::VectorXd> yv(y.data(), n);
    Eigen::VectorXd mu = (yv.array() + 0.1).matrix();
    Eigen::VectorXd eta = mu.array().log().matrix();
    Eigen::VectorXd beta_old;
    double dev_old = kInf;

    const auto evaluate = [&](const Eigen::VectorXd& beta, Eigen::VectorXd& eta_out, Eigen::VectorXd& mu_out) {
        eta_out = design * beta + offsets;
        mu_out = eta_out.array().exp().matrix();
        if (!mu_out.allFinite()) {
            return kInf;
        }
        return deviance(y, mu_out, phi);
    };

    for (int iter = 1; iter <= control.max_iter; ++iter) {
        const Eigen::ArrayXd w = mu.array() / (1 + phi * mu.array());
        const Eigen::VectorXd z = (eta - offsets).array() + (yv - mu).array() / mu.array();
        if (!w.allFinite() || !z.allFinite()) {
            fit.status = FitStatus::Inestimable;
            return fit;
        }
        const Eigen::MatrixXd xtwx = design.transpose() * w.matrix().asDiagonal() * design;
        const Eigen::VectorXd xtwz = design.transpose() * (w * z.array()).matrix();
        Eigen::VectorXd beta = xtwx.ldlt().solve(xtwz);
        if (!beta.allFinite()) {
            fit.status = FitStatus::Inestimable;
            return fit;
        }
        Eigen::VectorXd eta_new;
        Eigen::VectorXd mu_new;
        double dev = evaluate(beta, eta_new, mu_new);
        if (beta_old.size() == p) {
            int halvings = 0;
            while (!better_or_equal(dev, dev_old) && halvings < control.max_halvings) {
                beta = (beta + beta_old) / 2;
                dev = evaluate(beta, eta_new, mu_new);
                ++halvings;
            }
            if (!better_or_equal(dev, dev_old)) {
                // no descent direction left; keep the previous accepted step
                fit.iterations = iter;
                break;
            }
        } else if (!std::isfinite(dev)) {
            fit.status = FitStatus::Inestimable;
            return fit;
        }
        fit.deviance_trace.push_back(dev);
        // coefficients of all-zero groups drift toward -inf forever, so the step is measured on
        // the linear predictor of positive observations only
        double step = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (yv(i) > 0) {
                step = std::max(step, std::abs(eta_new(i) - eta(i)));
            }
        }
        const bool done = beta_old.size() == p && converged(dev, dev_old, control.tol) && step < control.step_tol;
        beta_old = beta;
        dev_old = dev;
        eta = eta_new;
        mu = mu_new;
        fit.iterations = iter;
        if (done) {
            break;
        }
        if (iter == control.max_iter) {
            fit.status = FitStatus::MaxIterations;
        }
    }
    fit.coefficients = beta_old;
    fit.mu = mu;
    fit.deviance = dev_old;
    const Eigen::ArrayXd w = mu.array() / (1 + phi * mu.array());
    if (!w.allFinite()) {
        fit.status = FitStatus::Inestimable;
    }
    return fit;
}

double cox_reid_apl(std::span<const double> y, const Eigen::MatrixXd& design, const GlmFit& fit, double phi) {
    if (fit.status == FitStatus::Inestimable) {
        return -kInf;
    }
    const Eigen::ArrayXd w = fit.mu.array() / (1 + phi * fit.mu.array());
    const Eigen::MatrixXd info = design.transpose() * w.matrix().asDiagonal() * design;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    const double log_det = ldlt.vectorD().array().log().sum();
    return log_likelihood(y, fit.mu, phi) - 0.5 * log_det;
}

LrtResult lrt_from_deviances(double deviance_full, double deviance_reduced, double df) {
    LrtResult out;
    out.df = df;
    double stat = deviance_reduced - deviance_full;
    if (stat < 0) {
        if (stat < -1e-8 * std::max(1.0, std::abs(deviance_reduced))) {
            throw Error(Errc::NonConvergence, "reduced model fits better than the full model");
        }
        stat = 0;
    }
    out.lr_stat = stat;
    out.p_value = df > 0 ? stats::chi2_upper_tail(stat, df) : 1.0;
    return out;
}

LrtResult lrt(const Eigen::MatrixXd& full_design, const GlmFit& full, const Eigen::MatrixXd& reduced_design,
              const GlmFit& reduced) {
    if (full_design.rows() != reduced_design.rows()) {
        throw Error(Errc::NotNested, "designs have different numbers of observations");
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_full(full_design);
    if (reduced_design.cols() > 0) {
        const Eigen::MatrixXd proj = full_design * qr_full.solve(reduced_design);
        const double resid = (proj - reduced_design).norm();
        if (resid > 1e-8 * std::max(1.0, reduced_design.norm())) {
            throw Error(Errc::NotNested, "reduced design is not nested in the full design");
        }
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_red(reduced_design);
    const double df = static_cast<double>(qr_full.rank() - (reduced_design.cols() > 0 ? qr_red.rank() : 0));
    return lrt_from_deviances(full.deviance, reduced.deviance, df);
}

// ---------------------------------------------------------------------------
// Paired design

PairedGene::PairedGene(std::span<const double> y_a, std::span<const double> y_b, std::span<const double> o_a,
                       std::span<const double> o_b) {
    if (y_a.size() != y_b.size() || o_a.size() != y_a.size() || o_b.size() != y_a.size()) {
        throw Error(Errc::InvalidArgument, "paired inputs disagree in length");
    }
    double sum_a = 0;
    double sum_b = 0;
    for (std::size_t s = 0; s < y_a.size(); ++s) {
        sum_a += y_a[s];
        sum_b += y_b[s];
        if (y_a[s] + y_b[s] > 0) {
            ya_.push_back(y_a[s]);
            yb_.push_back(y_b[s]);
            oa_.push_back(o_a[s]);
            ob_.push_back(o_b[s]);
        }
    }
    estimable_ = sum_a > 0 && sum_b > 0;
}

PairedGene::Fit PairedGene::fit_full(double phi, const GlmControl& control) const {
    Fit fit;
    const std::size_t n = ya_.size();
    if (!estimable_) {
        fit.status = FitStatus::Inestimable;
        fit.log_fc = std::nan("");
        return fit;
    }
    double sa = 0, sb = 0, ea = 0, eb = 0;
    for (std::size_t s = 0; s < n; ++s) {
        sa += ya_[s];
        sb += yb_[s];
        ea += std::exp(oa_[s]);
        eb += std::exp(ob_[s]);
    }
    double beta = std::log(sb / eb) - std::log(sa / ea);
    Eigen::VectorXd alpha(static_cast<Eigen::Index>(n));
    for (std::size_t s = 0; s < n; ++s) {
        alpha(static_cast<Eigen::Index>(s)) = std::log((ya_[s] + yb_[s]) / (std::exp(oa_[s]) + std::exp(ob_[s] + beta)));
    }

    const auto dev_at = [&](const Eigen::VectorXd& a, double b) {
        double d = 0;
        for (std::size_t s = 0; s < n; ++s) {
            const double ma = std::exp(a(static_cast<Eigen::Index>(s)) + oa_[s]);
            const double mb = std::exp(a(static_cast<Eigen::Index>(s)) + b + ob_[s]);
            d += unit_deviance(ya_[s], ma, phi) + unit_deviance(yb_[s], mb, phi);
        }
        return std::isfinite(d) ? d : kInf;
    };

    double dev = dev_at(alpha, beta);
    fit.deviance_trace.push_back(dev);
    Eigen::VectorXd d_s(static_cast<Eigen::Index>(n));
    Eigen::VectorXd c_s(static_cast<Eigen::Index>(n));
    Eigen::VectorXd u_s(static_cast<Eigen::Index>(n));
    double schur = 0;

    const auto information = [&](const Eigen::VectorXd& a, double b, double& u_beta) {
        double d_beta = 0;
        u_beta = 0;
        for (std::size_t s = 0; s < n; ++s) {
            const auto i = static_cast<Eigen::Index>(s);
            const double ma = std::exp(a(i) + oa_[s]);
            const double mb = std::exp(a(i) + b + ob_[s]);
            const double wa = ma / (1 + phi * ma);
            const double wb = mb / (1 + phi * mb);
            const double ua = (ya_[s] - ma) / (1 + phi * ma);
            const double ub = (yb_[s] - mb) / (1 + phi * mb);
            d_s(i) = wa + wb;
            c_s(i) = wb;
            u_s(i) = ua + ub;
            u_beta += ub;
            d_beta += wb;
        }
        return d_beta - (c_s.array().square() / d_s.array()).sum();
    };

    fit.status = FitStatus::MaxIterations;
    for (int iter = 1; iter <= control.max_iter; ++iter) {
        double u_beta = 0;
        schur = information(alpha, beta, u_beta);
        if (!(schur > 0) || !d_s.allFinite() || !u_s.allFinite()) {
            fit.status = FitStatus::Inestimable;
            fit.log_fc = std::nan("");
            return fit;
        }
        const double step_beta = (u_beta - (c_s.array() * u_s.array() / d_s.array()).sum()) / schur;
        const Eigen::VectorXd step_alpha = ((u_s.array() - c_s.array() * step_beta) / d_s.array()).matrix();

        double t = 1;
        Eigen::VectorXd a_new = alpha + step_alpha;
        double b_new = beta + step_beta;
        double dev_new = dev_at(a_new, b_new);
        int halvings = 0;
        while (!better_or_equal(dev_new, dev) && halvings < control.max_halvings) {
            t /= 2;
            a_new = alpha + t * step_alpha;
            b_new = beta + t * step_beta;
            dev_new = dev_at(a_new, b_new);
            ++halvings;
        }
        fit.iterations = iter;
        if (!better_or_equal(dev_new, dev)) {
            fit.status = FitStatus::Converged;
            break;
        }
        const bool done = converged(dev_new, dev, control.tol) && std::abs(t * step_beta) < control.step_tol;
        alpha = a_new;
        beta = b_new;
        dev = dev_new;
        fit.deviance_trace.push_back(dev);
        if (done) {
            fit.status = FitStatus::Converged;
            break;
        }
    }

    double u_beta = 0;
    schur = information(alpha, beta, u_beta);
    fit.log_fc = beta;
    fit.subject_effects = alpha;
    fit.deviance = dev;
    fit.log_det_information = d_s.array().log().sum() + std::log(schur);
    double ll = 0;
    for (std::size_t s = 0; s < n; ++s) {
        const auto i = static_cast<Eigen::Index>(s);
        ll += log_density(ya_[s], std::exp(alpha(i) + oa_[s]), phi) + log_density(yb_[s], std::exp(alpha(i) + beta + ob_[s]), phi);
    }
    fit.log_likelihood = ll;
    if (!std::isfinite(fit.log_fc) || !std::isfinite(fit.log_det_information)) {
        fit.status = FitStatus::Inestimable;
    }
    return fit;
}

double PairedGene::reduced_deviance(double phi) const {
    double dev = 0;
    for (std::size_t s = 0; s < ya_.size(); ++s) {
        const double total = ya_[s] + yb_[s];
        const double ea = std::exp(oa_[s]);
        const double eb = std::exp(ob_[s]);
        double alpha = std::log(total / (ea + eb));
        if (phi > 0 && oa_[s] != ob_[s]) {
            // score in alpha is strictly decreasing; Newton from the Poisson solution
            for (int it = 0; it < 100; ++it) {
                const double ma = std::exp(alpha + oa_[s]);
                const double mb = std::exp(alpha + ob_[s]);
                const double score = (ya_[s] - ma) / (1 + phi * ma) + (yb_[s] - mb) / (1 + phi * mb);
                const double slope = ma * (1 + phi * ya_[s]) / ((1 + phi * ma) * (1 + phi * ma)) +
                                     mb * (1 + phi * yb_[s]) / ((1 + phi * mb) * (1 + phi * mb));
                const double step = std::clamp(score / slope, -5.0, 5.0);
                alpha += step;
                if (std::abs(step) < 1e-13) {
                    break;
                }
            }
        }
        dev += unit_deviance(ya_[s], std::exp(alpha + oa_[s]), phi) + unit_deviance(yb_[s], std::exp(alpha + ob_[s]), phi);
    }
    return dev;
}

double PairedGene::apl(double phi) const {
    // the likelihood is flat at the optimum, so the deviance rule alone suffices here
    GlmControl control;
    control.step_tol = kInf;
    const auto fit = fit_full(phi, control);
    if (fit.status == FitStatus::Inestimable) {
        return -kInf;
    }
    return fit.log_likelihood - 0.5 * fit.log_det_information;
}

} // namespace txnet::nb
