#include "txnet/assoc.hpp"
#include "txnet/data.hpp"
#include "txnet/diffexpr.hpp"
#include "txnet/error.hpp"
#include "txnet/netgraph.hpp"
#include "txnet/netinfer.hpp"
#include "txnet/pipeline.hpp"
#include "txnet/simulate.hpp"
#include "txnet/stats.hpp"
#include "txnet/tmm.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>
#include <string>
#include <vector>

namespace py = pybind11;
using namespace txnet;

namespace {

CountMatrix to_counts(const CountArray& counts, std::vector<std::string> genes, std::vector<std::string> samples) {
    if (genes.empty()) {
        for (Index i = 0; i < counts.rows(); ++i) {
            genes.push_back("g" + std::to_string(i + 1));
        }
    }
    if (samples.empty()) {
        for (Index j = 0; j < counts.cols(); ++j) {
            samples.push_back("s" + std::to_string(j + 1));
        }
    }
    return CountMatrix(std::move(genes), std::move(samples), counts);
}

py::dict de_row(const DEResult& r) {
    py::dict d;
    d["gene_id"] = r.gene_id;
    d["log2_fc"] = r.log2_fc;
    d["mean_log_cpm"] = r.mean_log_cpm;
    d["lr_stat"] = r.lr_stat;
    d["p_value"] = r.p_value;
    d["fdr"] = r.fdr;
    d["dispersion"] = r.dispersion;
    d["status"] = de_status_name(r.status);
    d["passes_fc_filter"] = r.passes_fc_filter;
    return d;
}

} // namespace

PYBIND11_MODULE(_txnet, m) {
    m.doc() = "Paired transcriptome differential expression and network analysis";
    m.attr("__version__") = TXNET_VERSION;

    static py::exception<Error> error(m, "TxnetError", PyExc_ValueError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) {
                std::rethrow_exception(p);
            }
        } catch (const Error& e) {
            py::set_error(error, (std::string(errc_name(e.code())) + ": " + e.what()).c_str());
        }
    });

    m.def("bh_adjust", [](const std::vector<double>& p) { return stats::bh_adjust(p); }, py::arg("p"),
          "Benjamini-Hochberg adjusted p-values in input order.");

    m.def(
        "tmm_factors",
        [](const CountArray& counts, double trim_m, double trim_a, bool precision_weights) {
            TmmOptions o;
            o.trim_m = trim_m;
            o.trim_a = trim_a;
            o.precision_weights = precision_weights;
            return tmm_factors(to_counts(counts, {}, {}), o).factors;
        },
        py::arg("counts"), py::arg("trim_m") = 0.30, py::arg("trim_a") = 0.05, py::arg("precision_weights") = true,
        "TMM normalization factors of a genes x samples integer count array; geometric mean one.");

    m.def(
        "de_contrast",
        [](const std::filesystem::path& counts, const std::filesystem::path& meta, const std::string& contrast,
           int threads) {
            DeOptions o;
            o.threads = threads;
            const auto res = de_contrast(load_counts(counts), load_meta(meta), Contrast::parse(contrast), o);
            py::list rows;
            for (const auto& r : res.genes) {
                rows.append(de_row(r));
            }
            return rows;
        },
        py::arg("counts"), py::arg("meta"), py::arg("contrast") = "1-2", py::arg("threads") = 1,
        "Paired negative-binomial differential expression for one contrast; one dict per gene.");

    m.def(
        "glasso",
        [](const Eigen::MatrixXd& S, double lambda, double tol, int max_iter) {
            GlassoOptions o;
            o.tol = tol;
            o.max_iter = max_iter;
            const auto est = glasso(S, lambda, o);
            py::dict d;
            d["theta"] = est.theta;
            d["covariance"] = est.covariance;
            d["partial_corr"] = est.partial_corr;
            d["duality_gap"] = est.duality_gap;
            d["objective"] = est.objective;
            d["iterations"] = est.iterations;
            d["converged"] = est.converged;
            d["dual_trace"] = est.dual_trace;
            return d;
        },
        py::arg("S"), py::arg("lam"), py::arg("tol") = 1e-6, py::arg("max_iter") = 200,
        "Graphical lasso on a correlation matrix with an off-diagonal L1 penalty.");

    m.def(
        "ric_lambda",
        [](const Eigen::MatrixXd& z, std::uint64_t seed, int reps) {
            RicOptions o;
            o.reps = reps;
            const auto r = ric_lambda(z, seed, o);
            return py::make_tuple(r.lambda, r.null_maxima);
        },
        py::arg("z"), py::arg("seed"), py::arg("reps") = 20,
        "Permutation-null penalty for standardized subjects x genes data; returns (lambda, null maxima).");

    m.def(
        "fit_lmm",
        [](const Eigen::VectorXd& y, const Eigen::MatrixXd& X, const std::vector<int>& groups, bool reml) {
            LmmOptions o;
            o.reml = reml;
            const auto fit = fit_lmm(y, X, groups, o);
            py::dict d;
            d["beta"] = fit.beta;
            d["beta_cov"] = fit.beta_cov;
            d["sigma2"] = fit.sigma2;
            d["tau2"] = fit.tau2;
            d["gamma"] = fit.gamma;
            d["criterion"] = fit.criterion;
            d["ols"] = fit.ols;
            return d;
        },
        py::arg("y"), py::arg("X"), py::arg("groups"), py::arg("reml") = true,
        "Random-intercept linear mixed model fitted by profiled (RE)ML.");

    m.def(
        "cluster_edges",
        [](const std::vector<std::pair<std::string, std::string>>& edges, double gamma, std::uint64_t seed) {
            std::vector<GeneEdge> ge;
            for (const auto& [a, b] : edges) {
                ge.push_back({a, b, 1.0, 1});
            }
            const auto net = assemble(ge, {}, {});
            LouvainOptions o;
            o.gamma = gamma;
            o.seed = seed;
            const auto part = cluster_modules(net, o);
            py::dict labels;
            for (std::size_t i = 0; i < net.nodes().size(); ++i) {
                labels[py::str(net.nodes()[i].id)] = part[i];
            }
            return py::make_tuple(labels, modularity_score(net, part, gamma));
        },
        py::arg("edges"), py::arg("gamma") = 1.0, py::arg("seed") = 0,
        "Louvain modules of an undirected graph given as (u, v) pairs; returns (labels, modularity).");

    m.def("adjusted_rand_index", &adjusted_rand_index, py::arg("a"), py::arg("b"));

    m.def(
        "simulate",
        [](const std::string& scenario, std::uint64_t seed, const std::filesystem::path& out) {
            const auto spec = sim::parse_scenario(scenario + "\nseed=" + std::to_string(seed) + "\n");
            const auto data = sim::simulate_counts(spec);
            sim::write_simulation(data, spec, out);
            return py::make_tuple(data.counts.n_genes(), data.counts.n_samples());
        },
        py::arg("scenario"), py::arg("seed"), py::arg("out"),
        "Writes a synthetic dataset with planted truth from key=value scenario text; returns (genes, samples).");

    m.def(
        "run_pipeline",
        [](const std::filesystem::path& counts, const std::filesystem::path& meta, const std::filesystem::path& clinical,
           const std::filesystem::path& out, std::uint64_t seed, const std::vector<std::string>& contrasts,
           std::optional<double> lambda, int threads) {
            PipelineConfig c;
            c.counts = counts;
            c.meta = meta;
            c.clinical = clinical;
            c.out = out;
            c.seed = seed;
            c.lambda = lambda;
            c.threads = threads;
            c.de.threads = threads;
            c.scan.threads = threads;
            c.contrasts.clear();
            for (const auto& s : contrasts) {
                c.contrasts.push_back(Contrast::parse(s));
            }
            std::vector<std::string> stages;
            {
                py::gil_scoped_release release;
                for (const auto& r : run_pipeline(c)) {
                    stages.push_back(r.stage);
                }
            }
            return stages;
        },
        py::arg("counts"), py::arg("meta"), py::arg("clinical"), py::arg("out"), py::arg("seed"),
        py::arg("contrasts") = std::vector<std::string>{"1-2"}, py::arg("lam") = py::none(), py::arg("threads") = 1,
        "Runs every stage into `out`; returns the stage names in execution order.");
}
