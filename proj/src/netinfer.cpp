#include "txnet/netinfer.hpp"

#include "txnet/error.hpp"
#include "txnet/stats.hpp"
#include "txnet/textio.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <numeric>
#include <random>

namespace txnet {

namespace {

double soft_threshold(double x, double t) {
    if (x > t) {
        return x - t;
    }
    if (x < -t) {
        return x + t;
    }
    return 0.0;
}

double log_det_pd(const Eigen::MatrixXd& a, bool& ok) {
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    ok = llt.info() == Eigen::Success;
    if (!ok) {
        return -INFINITY;
    }
    return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

} // namespace

StandardizedData standardize_columns(const FoldChangeMatrix& fc) {
    const Eigen::Index n = fc.values.rows();
    if (n < 3) {
        throw Error(Errc::TooFewSamples, "standardization needs at least 3 subjects");
    }
    StandardizedData out;
    std::vector<Eigen::Index> kept;
    std::vector<double> means, sds;
    for (Eigen::Index j = 0; j < fc.values.cols(); ++j) {
        const auto col = fc.values.col(j);
        const double mean = col.mean();
        const double var = (col.array() - mean).square().sum() / static_cast<double>(n - 1);
        if (!(var > 1e-24 * std::max(1.0, mean * mean))) {
            out.dropped.push_back(fc.gene_ids[static_cast<std::size_t>(j)]);
            continue;
        }
        kept.push_back(j);
        means.push_back(mean);
        sds.push_back(std::sqrt(var));
    }
    out.z.resize(n, static_cast<Eigen::Index>(kept.size()));
    for (std::size_t k = 0; k < kept.size(); ++k) {
        out.z.col(static_cast<Eigen::Index>(k)) = (fc.values.col(kept[k]).array() - means[k]) / sds[k];
        out.gene_ids.push_back(fc.gene_ids[static_cast<std::size_t>(kept[k])]);
    }
    return out;
}

Eigen::MatrixXd correlation_of_standardized(const Eigen::MatrixXd& z) {
    Eigen::MatrixXd s = (z.transpose() * z) / static_cast<double>(z.rows() - 1);
    for (Eigen::Index i = 0; i < s.rows(); ++i) {
        for (Eigen::Index j = 0; j < i; ++j) {
            const double v = std::clamp(0.5 * (s(i, j) + s(j, i)), -1.0, 1.0);
            s(i, j) = v;
            s(j, i) = v;
        }
        s(i, i) = 1.0;
    }
    return s;
}

SampleCorrelation standardize(const FoldChangeMatrix& fc) {
    auto data = standardize_columns(fc);
    SampleCorrelation out;
    out.S = correlation_of_standardized(data.z);
    out.gene_ids = std::move(data.gene_ids);
    out.dropped = std::move(data.dropped);
    return out;
}

double glasso_objective(const Eigen::MatrixXd& S, const Eigen::MatrixXd& theta, double lambda) {
    bool ok = false;
    const double log_det = log_det_pd(theta, ok);
    if (!ok) {
        return -INFINITY;
    }
    double penalty = theta.cwiseAbs().sum() - theta.diagonal().cwiseAbs().sum();
    return log_det - (S.cwiseProduct(theta)).sum() - lambda * penalty;
}

PrecisionEstimate glasso(const Eigen::MatrixXd& S, double lambda, const GlassoOptions& options) {
    const Eigen::Index p = S.rows();
    if (S.cols() != p || p == 0) {
        throw Error(Errc::InvalidArgument, "glasso needs a non-empty square matrix");
    }
    if (!(lambda >= 0)) {
        throw Error(Errc::InvalidArgument, "glasso penalty must be non-negative");
    }

    PrecisionEstimate est;
    est.lambda = lambda;
    Eigen::MatrixXd W = S;
    // beta.col(j) holds the lasso coefficients of column j over the other p-1 indices.
    Eigen::MatrixXd beta = Eigen::MatrixXd::Zero(std::max<Eigen::Index>(p - 1, 1), p);

    const auto build_theta = [&]() {
        Eigen::MatrixXd raw = Eigen::MatrixXd::Zero(p, p);
        for (Eigen::Index j = 0; j < p; ++j) {
            double quad = 0;
            for (Eigen::Index k = 0, i = 0; i < p; ++i) {
                if (i == j) {
                    continue;
                }
                quad += W(i, j) * beta(k, j);
                ++k;
            }
            const double tjj = 1.0 / (W(j, j) - quad);
            raw(j, j) = tjj;
            for (Eigen::Index k = 0, i = 0; i < p; ++i) {
                if (i == j) {
                    continue;
                }
                raw(i, j) = -beta(k, j) * tjj;
                ++k;
            }
        }
        Eigen::MatrixXd theta = raw;
        for (Eigen::Index i = 0; i < p; ++i) {
            for (Eigen::Index j = 0; j < i; ++j) {
                const double v = (raw(i, j) == 0.0 || raw(j, i) == 0.0) ? 0.0 : 0.5 * (raw(i, j) + raw(j, i));
                theta(i, j) = v;
                theta(j, i) = v;
            }
        }
        return theta;
    };

    const auto duality_gap = [&](const Eigen::MatrixXd& theta, double primal) {
        // Dual point: S + U with |U_ij| <= lambda off the diagonal and U_ii = 0.
        Eigen::MatrixXd u = (W - S).cwiseMax(-lambda).cwiseMin(lambda);
        u.diagonal().setZero();
        bool ok = false;
        double log_det_w = log_det_pd(S + u, ok);
        if (!ok) {
            Eigen::MatrixXd alt = (theta.inverse() - S).cwiseMax(-lambda).cwiseMin(lambda);
            alt.diagonal().setZero();
            log_det_w = log_det_pd(S + alt, ok);
            if (!ok) {
                return std::numeric_limits<double>::infinity();
            }
        }
        const double dual = -log_det_w - static_cast<double>(p);
        return std::max(0.0, dual - primal);
    };

    std::vector<Eigen::Index> others(static_cast<std::size_t>(std::max<Eigen::Index>(p - 1, 0)));
    Eigen::MatrixXd w11;
    Eigen::VectorXd s12, v;
    for (int iter = 1; iter <= options.max_iter && p > 1; ++iter) {
        double total_change = 0;
        for (Eigen::Index j = 0; j < p; ++j) {
            for (Eigen::Index k = 0, i = 0; i < p; ++i) {
                if (i != j) {
                    others[static_cast<std::size_t>(k++)] = i;
                }
            }
            const Eigen::Index q = p - 1;
            w11.resize(q, q);
            s12.resize(q);
            for (Eigen::Index a = 0; a < q; ++a) {
                s12(a) = S(others[static_cast<std::size_t>(a)], j);
                for (Eigen::Index b = 0; b < q; ++b) {
                    w11(a, b) = W(others[static_cast<std::size_t>(a)], others[static_cast<std::size_t>(b)]);
                }
            }
            auto b = beta.col(j);
            v = w11 * b;
            for (int inner = 0; inner < options.inner_max_iter; ++inner) {
                double max_change = 0;
                for (Eigen::Index k = 0; k < q; ++k) {
                    const double partial = s12(k) - (v(k) - w11(k, k) * b(k));
                    const double updated = soft_threshold(partial, lambda) / w11(k, k);
                    const double delta = updated - b(k);
                    if (delta != 0.0) {
                        v += delta * w11.col(k);
                        b(k) = updated;
                        max_change = std::max(max_change, std::abs(delta));
                    }
                }
                if (max_change < options.inner_tol) {
                    break;
                }
            }
            v = w11 * b;
            for (Eigen::Index k = 0; k < q; ++k) {
                const Eigen::Index i = others[static_cast<std::size_t>(k)];
                total_change += std::abs(v(k) - W(i, j));
                W(i, j) = v(k);
                W(j, i) = v(k);
            }
        }
        bool ok = false;
        est.dual_trace.push_back(log_det_pd(W, ok));
        est.iterations = iter;
        const double mean_change = total_change / static_cast<double>(p * (p - 1));
        if (mean_change < options.tol) {
            const Eigen::MatrixXd theta = build_theta();
            const double primal = glasso_objective(S, theta, lambda);
            const double gap = duality_gap(theta, primal);
            if (gap <= options.gap_tol) {
                est.converged = true;
                break;
            }
        }
    }
    if (p == 1) {
        est.converged = true;
    }

    est.theta = build_theta();
    est.covariance = W;
    est.objective = glasso_objective(S, est.theta, lambda);
    if (!std::isfinite(est.objective)) {
        throw Error(Errc::NonConvergence, "glasso precision estimate is not positive definite");
    }
    est.duality_gap = duality_gap(est.theta, est.objective);
    if (!est.converged && options.throw_on_nonconvergence) {
        throw Error(Errc::NonConvergence, "glasso did not converge in " + std::to_string(options.max_iter) +
                                              " sweeps (duality gap " + textio::format_double(est.duality_gap) + ")");
    }

    const Eigen::VectorXd root = est.theta.diagonal().array().sqrt();
    est.partial_corr = Eigen::MatrixXd::Identity(p, p);
    for (Eigen::Index i = 0; i < p; ++i) {
        for (Eigen::Index j = i + 1; j < p; ++j) {
            const double rho = -est.theta(i, j) / (root(i) * root(j));
            est.partial_corr(i, j) = rho;
            est.partial_corr(j, i) = rho;
            if (est.theta(i, j) != 0.0) {
                est.support.emplace_back(i, j);
            }
        }
    }
    return est;
}

PrecisionEstimate glasso(const SampleCorrelation& s, double lambda, const GlassoOptions& options) {
    if (!(lambda > 0)) {
        throw Error(Errc::InvalidArgument, "glasso penalty must be positive");
    }
    auto est = glasso(s.S, lambda, options);
    est.gene_ids = s.gene_ids;
    return est;
}

RicResult ric_lambda(const Eigen::MatrixXd& standardized, std::uint64_t seed, const RicOptions& options) {
    const Eigen::Index n = standardized.rows();
    const Eigen::Index p = standardized.cols();
    if (n < 3) {
        throw Error(Errc::TooFewSamples, "RIC needs at least 3 rows");
    }
    if (options.reps < 1 || !(options.quantile > 0 && options.quantile <= 1)) {
        throw Error(Errc::InvalidArgument, "RIC needs reps >= 1 and a quantile in (0, 1]");
    }
    RicResult out;
    Eigen::MatrixXd permuted(n, p);
    std::vector<Eigen::Index> rows(static_cast<std::size_t>(n));
    for (int rep = 0; rep < options.reps; ++rep) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(rep), 0x52494330u};
        std::mt19937_64 rng(seq);
        for (Eigen::Index j = 0; j < p; ++j) {
            std::iota(rows.begin(), rows.end(), Eigen::Index{0});
            std::shuffle(rows.begin(), rows.end(), rng);
            for (Eigen::Index i = 0; i < n; ++i) {
                permuted(i, j) = standardized(rows[static_cast<std::size_t>(i)], j);
            }
        }
        // Centering and scale are permutation invariant, so this is a correlation matrix.
        const Eigen::MatrixXd c = (permuted.transpose() * permuted) / static_cast<double>(n - 1);
        double max_abs = 0;
        for (Eigen::Index i = 0; i < p; ++i) {
            for (Eigen::Index j = 0; j < i; ++j) {
                max_abs = std::max(max_abs, std::abs(c(i, j)));
            }
        }
        out.null_maxima.push_back(std::min(max_abs, 1.0));
    }
    if (options.statistic == RicStatistic::Mean) {
        out.lambda = std::accumulate(out.null_maxima.begin(), out.null_maxima.end(), 0.0) /
                     static_cast<double>(out.null_maxima.size());
    } else {
        out.lambda = stats::quantile(out.null_maxima, options.quantile);
    }
    return out;
}

std::vector<GeneEdge> gene_edges(const PrecisionEstimate& estimate) {
    std::vector<GeneEdge> edges;
    edges.reserve(estimate.support.size());
    for (const auto& [i, j] : estimate.support) {
        const double rho = estimate.partial_corr(i, j);
        GeneEdge e;
        e.source = estimate.gene_ids.empty() ? std::to_string(i) : estimate.gene_ids[static_cast<std::size_t>(i)];
        e.target = estimate.gene_ids.empty() ? std::to_string(j) : estimate.gene_ids[static_cast<std::size_t>(j)];
        e.partial_corr = rho;
        e.sign = rho > 0 ? 1 : (rho < 0 ? -1 : 0);
        edges.push_back(std::move(e));
    }
    return edges;
}

std::string format_gene_edges(const std::vector<GeneEdge>& edges) {
    std::string out = "source\ttarget\tpartial_corr\tsign\n";
    for (const auto& e : edges) {
        out += e.source + '\t' + e.target + '\t' + textio::format_double(e.partial_corr) + '\t' + std::to_string(e.sign) + '\n';
    }
    return out;
}

std::vector<GeneEdge> parse_gene_edges(std::string_view text, const std::string& source) {
    using PK = ParseError::Kind;
    std::vector<GeneEdge> out;
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
        const auto rho = f.size() == 4 ? textio::parse_double(f[2]) : std::nullopt;
        const auto sign = f.size() == 4 ? textio::parse_int(f[3]) : std::nullopt;
        if (!rho || !sign) {
            throw ParseError(PK::BadValue, source, line_no, "malformed gene edge");
        }
        out.push_back({std::string(f[0]), std::string(f[1]), *rho, static_cast<int>(*sign)});
    }
    return out;
}

} // namespace txnet
