#include "txnet/assoc.hpp"

#include "txnet/error.hpp"
#include "txnet/parallel.hpp"
#include "txnet/stats.hpp"
#include "txnet/textio.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace txnet {

RandomInterceptModel::RandomInterceptModel(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                                           std::span<const int> groups)
    : n_(X.rows()), p_(X.cols()) {
    if (y.size() != n_ || static_cast<Eigen::Index>(groups.size()) != n_) {
        throw Error(Errc::InvalidArgument, "response, design and groups disagree in length");
    }
    xtx_ = X.transpose() * X;
    xty_ = X.transpose() * y;
    yty_ = y.squaredNorm();
    int n_groups = 0;
    for (int g : groups) {
        if (g < 0) {
            throw Error(Errc::InvalidArgument, "negative group index");
        }
        n_groups = std::max(n_groups, g + 1);
    }
    group_n_.assign(static_cast<std::size_t>(n_groups), 0.0);
    group_x_.assign(static_cast<std::size_t>(n_groups), Eigen::VectorXd::Zero(p_));
    group_y_.assign(static_cast<std::size_t>(n_groups), 0.0);
    for (Eigen::Index i = 0; i < n_; ++i) {
        const auto g = static_cast<std::size_t>(groups[static_cast<std::size_t>(i)]);
        group_n_[g] += 1;
        group_x_[g] += X.row(i).transpose();
        group_y_[g] += y(i);
    }
    // drop empty group slots
    std::vector<double> gn;
    std::vector<Eigen::VectorXd> gx;
    std::vector<double> gy;
    for (std::size_t g = 0; g < group_n_.size(); ++g) {
        if (group_n_[g] > 0) {
            gn.push_back(group_n_[g]);
            gx.push_back(group_x_[g]);
            gy.push_back(group_y_[g]);
        }
    }
    group_n_ = std::move(gn);
    group_x_ = std::move(gx);
    group_y_ = std::move(gy);
}

RandomInterceptModel::Gls RandomInterceptModel::gls(double gamma) const {
    Gls out;
    out.xtvx = xtx_;
    Eigen::VectorXd xtvy = xty_;
    double ytvy = yty_;
    out.log_det_v = 0;
    for (std::size_t g = 0; g < group_n_.size(); ++g) {
        const double c = gamma / (1 + gamma * group_n_[g]);
        out.xtvx.noalias() -= c * group_x_[g] * group_x_[g].transpose();
        xtvy -= c * group_y_[g] * group_x_[g];
        ytvy -= c * group_y_[g] * group_y_[g];
        out.log_det_v += std::log1p(gamma * group_n_[g]);
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(out.xtvx);
    out.beta = ldlt.solve(xtvy);
    out.quad = std::max(ytvy - xtvy.dot(out.beta), 0.0);
    return out;
}

double RandomInterceptModel::reml_criterion(double gamma) const {
    const auto g = gls(gamma);
    const double df = static_cast<double>(n_ - p_);
    const double sigma2 = g.quad / df;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(g.xtvx);
    const double log_det_a = ldlt.vectorD().array().log().sum();
    return df * std::log(sigma2) + g.log_det_v + log_det_a;
}

double RandomInterceptModel::ml_criterion(double gamma) const {
    const auto g = gls(gamma);
    const double n = static_cast<double>(n_);
    return n * std::log(g.quad / n) + g.log_det_v;
}

namespace {

void check_design(const Eigen::VectorXd& y, const Eigen::MatrixXd& X) {
    if (X.rows() < X.cols() + 2) {
        throw Error(Errc::TooFewCases, "mixed model needs at least p + 2 complete cases");
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    if (qr.rank() < X.cols()) {
        throw Error(Errc::RankDeficient, "fixed-effect design is rank deficient");
    }
    if (!y.allFinite() || !X.allFinite()) {
        throw Error(Errc::InvalidArgument, "non-finite values in mixed model data");
    }
}

double optimize_gamma(const std::function<double(double)>& criterion, const LmmOptions& options, double& best_value) {
    const double lo = std::log(options.gamma_lower);
    const double hi = std::log(options.gamma_upper);
    const int k = std::max(options.grid_points, 3);
    const double h = (hi - lo) / (k - 1);
    std::vector<double> values(static_cast<std::size_t>(k));
    int best = 0;
    for (int i = 0; i < k; ++i) {
        values[static_cast<std::size_t>(i)] = criterion(std::exp(lo + h * i));
        if (values[static_cast<std::size_t>(i)] < values[static_cast<std::size_t>(best)]) {
            best = i;
        }
    }
    double a = lo + h * std::max(best - 1, 0);
    double b = lo + h * std::min(best + 1, k - 1);
    const double ratio = (std::sqrt(5.0) - 1) / 2;
    double c = b - ratio * (b - a);
    double d = a + ratio * (b - a);
    double fc = criterion(std::exp(c));
    double fd = criterion(std::exp(d));
    while (b - a > options.tol) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = criterion(std::exp(c));
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = criterion(std::exp(d));
        }
    }
    double x = (a + b) / 2;
    double fx = criterion(std::exp(x));
    // never return anything worse than the best grid point
    if (values[static_cast<std::size_t>(best)] < fx) {
        x = lo + h * best;
        fx = values[static_cast<std::size_t>(best)];
    }
    best_value = fx;
    return std::exp(x);
}

LmmFit finish_fit(const RandomInterceptModel& model, double gamma, double criterion, bool reml) {
    LmmFit fit;
    const auto g = model.gls(gamma);
    const double df = static_cast<double>(reml ? model.n() - model.p() : model.n());
    fit.beta = g.beta;
    fit.gamma = gamma;
    fit.sigma2 = g.quad / df;
    fit.tau2 = gamma * fit.sigma2;
    fit.beta_cov = fit.sigma2 * g.xtvx.ldlt().solve(Eigen::MatrixXd::Identity(model.p(), model.p()));
    fit.beta_cov = 0.5 * (fit.beta_cov + fit.beta_cov.transpose());
    fit.criterion = criterion;
    fit.n = model.n();
    fit.n_groups = model.n_groups();
    return fit;
}

LmmFit fit_model(const RandomInterceptModel& model, const LmmOptions& options) {
    const auto criterion = [&](double gamma) {
        return options.reml ? model.reml_criterion(gamma) : model.ml_criterion(gamma);
    };
    const double at_zero = criterion(0.0);
    if (model.n_groups() < 2) {
        auto fit = finish_fit(model, 0.0, at_zero, options.reml);
        fit.ols = true;
        return fit;
    }
    double best = 0;
    const double gamma = optimize_gamma(criterion, options, best);
    if (at_zero <= best) {
        return finish_fit(model, 0.0, at_zero, options.reml);
    }
    return finish_fit(model, gamma, best, options.reml);
}

} // namespace

LmmFit fit_lmm(const Eigen::VectorXd& y, const Eigen::MatrixXd& X, std::span<const int> groups,
               const LmmOptions& options) {
    check_design(y, X);
    const RandomInterceptModel model(y, X, groups);
    return fit_model(model, options);
}

CoefficientTest wald_test(const LmmFit& fit, Eigen::Index coefficient) {
    CoefficientTest t;
    t.estimate = fit.beta(coefficient);
    t.se = std::sqrt(std::max(fit.beta_cov(coefficient, coefficient), 0.0));
    t.df = static_cast<double>(fit.n - fit.beta.size());
    t.statistic = t.se > 0 ? t.estimate / t.se : 0.0;
    t.p_value = t.se > 0 ? stats::t_two_sided(t.statistic, t.df) : 1.0;
    return t;
}

CoefficientTest lrt_test(const Eigen::VectorXd& y, const Eigen::MatrixXd& X, std::span<const int> groups,
                         Eigen::Index coefficient, const LmmOptions& options) {
    check_design(y, X);
    LmmOptions ml = options;
    ml.reml = false;
    const RandomInterceptModel full_model(y, X, groups);
    const auto full = fit_model(full_model, ml);
    Eigen::MatrixXd reduced(X.rows(), X.cols() - 1);
    for (Eigen::Index j = 0, k = 0; j < X.cols(); ++j) {
        if (j != coefficient) {
            reduced.col(k++) = X.col(j);
        }
    }
    const RandomInterceptModel reduced_model(y, reduced, groups);
    const auto red = fit_model(reduced_model, ml);
    CoefficientTest t;
    t.estimate = full.beta(coefficient);
    t.se = std::sqrt(std::max(full.beta_cov(coefficient, coefficient), 0.0));
    t.df = 1;
    t.statistic = std::max(red.criterion - full.criterion, 0.0);
    t.p_value = stats::chi2_upper_tail(t.statistic, 1.0);
    return t;
}

ScanResult clinical_scan(const FoldChangeMatrix& fc, const ClinicalTable& clinical, const SampleMeta& meta,
                         const ScanOptions& options) {
    const Contrast contrast = fc.contrast;
    std::vector<std::string> variables = options.variables.empty() ? clinical.variables() : options.variables;
    ScanResult out;

    // subject-level covariates, taken from the contrast's first timepoint
    struct Subject {
        std::size_t row = 0;
        double sex = 0;
        double age = 0;
        int center = 0;
    };
    std::map<std::string, int> center_codes;
    std::vector<Subject> subjects;
    for (std::size_t s = 0; s < fc.subject_ids.size(); ++s) {
        const auto* info = meta.find(fc.subject_ids[s], contrast.from);
        if (info == nullptr) {
            continue;
        }
        center_codes.emplace(info->center, 0);
        subjects.push_back({s, info->sex == Sex::Male ? 1.0 : 0.0, info->age, 0});
    }
    {
        int code = 0;
        for (auto& [name, c] : center_codes) {
            c = code++;
        }
        for (auto& subj : subjects) {
            subj.center = center_codes.at(meta.find(fc.subject_ids[subj.row], contrast.from)->center);
        }
    }

    for (const auto& var : variables) {
        const auto vi = clinical.variable_index(var);
        if (!vi) {
            throw Error(Errc::MissingVariable, "clinical variable " + var + " not in clinical table");
        }
        std::vector<const Subject*> complete;
        std::vector<double> response;
        for (const auto& subj : subjects) {
            const auto& id = fc.subject_ids[subj.row];
            const double a = clinical.value(id, contrast.from, *vi);
            const double b = clinical.value(id, contrast.to, *vi);
            double delta = b - a;
            if (options.change == ClinicalChange::Percent) {
                delta = a != 0 ? 100.0 * (b - a) / a : std::nan("");
            }
            if (std::isfinite(delta)) {
                complete.push_back(&subj);
                response.push_back(delta);
            }
        }
        if (complete.empty()) {
            throw Error(Errc::MissingVariable, "clinical variable " + var + " has no complete change for contrast " + contrast.label());
        }
        const auto n = static_cast<Eigen::Index>(complete.size());
        const Eigen::Map<const Eigen::VectorXd> y(response.data(), n);
        std::vector<int> groups(complete.size());
        Eigen::VectorXd sex(n), age(n);
        for (std::size_t k = 0; k < complete.size(); ++k) {
            groups[k] = complete[k]->center;
            sex(static_cast<Eigen::Index>(k)) = complete[k]->sex;
            age(static_cast<Eigen::Index>(k)) = complete[k]->age;
        }
        // covariates that do not vary among the complete cases are left out
        std::vector<Eigen::VectorXd> covariates;
        if (sex.maxCoeff() > sex.minCoeff()) {
            covariates.push_back(sex);
        }
        if (age.maxCoeff() > age.minCoeff()) {
            covariates.push_back(age);
        }
        const auto p = static_cast<Eigen::Index>(2 + covariates.size());

        const std::size_t n_genes = fc.gene_ids.size();
        std::vector<AssociationResult> per_gene(n_genes);
        std::vector<std::uint8_t> tested(n_genes, 0);
        parallel_for(n_genes, options.threads, [&](std::size_t g) {
            Eigen::MatrixXd X(n, p);
            X.col(0).setOnes();
            for (std::size_t k = 0; k < complete.size(); ++k) {
                X(static_cast<Eigen::Index>(k), 1) = fc.values(static_cast<Eigen::Index>(complete[k]->row), static_cast<Eigen::Index>(g));
            }
            for (std::size_t c = 0; c < covariates.size(); ++c) {
                X.col(static_cast<Eigen::Index>(2 + c)) = covariates[c];
            }
            if (X.col(1).maxCoeff() == X.col(1).minCoeff()) {
                return;
            }
            auto& r = per_gene[g];
            r.gene_id = fc.gene_ids[g];
            r.clinical_var = var;
            r.n_subjects = static_cast<int>(n);
            LmmFit fit;
            CoefficientTest test;
            try {
                fit = fit_lmm(y, X, groups, options.lmm);
                test = options.test == LmmTest::Wald ? wald_test(fit, 1) : lrt_test(y, X, groups, 1, options.lmm);
            } catch (const Error& e) {
                if (e.code() == Errc::RankDeficient || e.code() == Errc::TooFewCases) {
                    return;
                }
                throw;
            }
            r.slope = fit.beta(1);
            r.se = test.se;
            r.p_value = test.p_value;
            r.sign = r.slope > 0 ? 1 : (r.slope < 0 ? -1 : 0);
            r.center_variance = fit.tau2;
            r.residual_variance = fit.sigma2;
            tested[g] = 1;
        });

        std::vector<double> p_values;
        std::vector<std::size_t> index;
        for (std::size_t g = 0; g < n_genes; ++g) {
            if (tested[g]) {
                p_values.push_back(per_gene[g].p_value);
                index.push_back(g);
            } else {
                out.skipped.emplace_back(var, fc.gene_ids[g]);
            }
        }
        const auto q = stats::bh_adjust(p_values);
        for (std::size_t k = 0; k < index.size(); ++k) {
            auto& r = per_gene[index[k]];
            r.fdr = q[k];
            if (r.fdr < options.alpha) {
                out.edges.push_back({r.gene_id, r.clinical_var, r.slope, r.p_value, r.fdr, r.sign});
            }
            out.results.push_back(r);
        }
    }
    return out;
}

std::string format_clinical_edges(const std::vector<ClinicalEdge>& edges) {
    using textio::format_double;
    std::string out = "gene_id\tclinical_var\tslope\tp_value\tfdr\tsign\n";
    for (const auto& e : edges) {
        out += e.gene_id + '\t' + e.clinical_var + '\t' + format_double(e.slope) + '\t' + format_double(e.p_value) + '\t' +
               format_double(e.fdr) + '\t' + std::to_string(e.sign) + '\n';
    }
    return out;
}

std::vector<ClinicalEdge> parse_clinical_edges(std::string_view text, const std::string& source) {
    using PK = ParseError::Kind;
    std::vector<ClinicalEdge> out;
    std::size_t start = 0;
    std::size_t line_no = 0;
    while (start < text.size()) {
        auto pos = text.find('\n', start);
        if (pos == std::string_view::npos) {
            pos = text.size();
        }
        const auto line = text.substr(start, pos - start);
        start = pos + 1;
        if (++line_no == 1 || line.empty()) {
            continue;
        }
        const auto f = textio::split_tabs(line);
        if (f.size() != 6) {
            throw ParseError(PK::RaggedRow, source, line_no, "expected 6 fields");
        }
        const auto slope = textio::parse_double(f[2]);
        const auto p = textio::parse_double(f[3]);
        const auto q = textio::parse_double(f[4]);
        const auto sign = textio::parse_int(f[5]);
        if (!slope || !p || !q || !sign) {
            throw ParseError(PK::BadValue, source, line_no, "malformed clinical edge");
        }
        out.push_back({std::string(f[0]), std::string(f[1]), *slope, *p, *q, static_cast<int>(*sign)});
    }
    return out;
}

std::string format_associations(const std::vector<AssociationResult>& results) {
    using textio::format_double;
    std::string out = "gene_id\tclinical_var\tslope\tse\tp_value\tfdr\tsign\tn_subjects\tcenter_variance\tresidual_variance\n";
    for (const auto& r : results) {
        out += r.gene_id + '\t' + r.clinical_var + '\t' + format_double(r.slope) + '\t' + format_double(r.se) + '\t' +
               format_double(r.p_value) + '\t' + format_double(r.fdr) + '\t' + std::to_string(r.sign) + '\t' +
               std::to_string(r.n_subjects) + '\t' + format_double(r.center_variance) + '\t' +
               format_double(r.residual_variance) + '\n';
    }
    return out;
}

} // namespace txnet
