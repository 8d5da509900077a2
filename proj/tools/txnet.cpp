// txnet command-line driver: one subcommand per pipeline stage plus
// `pipeline` (all stages) and `simulate` (synthetic datasets with truth).

#include "txnet/error.hpp"
#include "txnet/pipeline.hpp"
#include "txnet/simulate.hpp"
#include "txnet/textio.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

using namespace txnet;

namespace {

struct Args {
    PipelineConfig config;
    std::vector<std::string> contrasts{"1-2"};
    std::string marker = "HBB";
    bool no_marker = false;
    bool no_pca = false;
    std::vector<std::string> exclude_batches;
    std::string exclude_samples;
    std::string dispersion = "tagwise";
    double lambda = 0;
    std::string ric_statistic = "quantile";
    std::string lmm_test = "wald";
    std::string clinical_change = "difference";
    std::vector<std::string> variables;
    std::string truth;
    std::string scenario;
    std::uint64_t seed = 0;
};

std::string config_file;

void config_opt(CLI::App* sub) {
    sub->add_option("--config", config_file, "key=value file pre-populating flags (flags win)")->check(CLI::ExistingFile);
}

void common(CLI::App* sub, Args& a) {
    config_opt(sub);
    sub->add_option("--out", a.config.out, "Run directory")->required();
    sub->add_option("--threads", a.config.threads, "Worker threads")->check(CLI::Range(1, 1024));
}

void contrast_opt(CLI::App* sub, Args& a) {
    sub->add_option("--contrast", a.contrasts, "Contrast(s): 1-2, 1-3, 2-3")->check(CLI::IsMember({"1-2", "1-3", "2-3"}));
}

void seed_opt(CLI::App* sub, Args& a, bool required) {
    auto* o = sub->add_option("--seed", a.seed, "Master seed");
    if (required) {
        o->required();
    }
}

void qc_opts(CLI::App* sub, Args& a) {
    sub->add_option("--counts", a.config.counts, "Gene x sample count table")->required()->check(CLI::ExistingFile);
    sub->add_option("--meta", a.config.meta, "Sample metadata table")->required()->check(CLI::ExistingFile);
    sub->add_option("--marker-gene", a.marker, "Contamination marker gene");
    sub->add_flag("--no-marker-filter", a.no_marker, "Disable the marker-share filter");
    sub->add_option("--max-marker-fraction", a.config.qc.max_marker_fraction, "Largest tolerated marker share")
        ->check(CLI::Range(0.0, 1.0));
    sub->add_flag("--no-pca-filter", a.no_pca, "Disable the PCA outlier filter");
    sub->add_option("--k-mads", a.config.qc.k_mads, "PCA outlier threshold in MADs")->check(CLI::PositiveNumber);
    sub->add_option("--exclude-batch", a.exclude_batches, "Batch (plate) to exclude; repeatable");
    sub->add_option("--exclude-samples", a.exclude_samples, "File listing samples to exclude")->check(CLI::ExistingFile);
}

void de_opts(CLI::App* sub, Args& a) {
    sub->add_option("--alpha", a.config.de.alpha, "FDR level")->check(CLI::Range(1e-12, 0.999999));
    sub->add_option("--fc-threshold", a.config.de.fc_threshold, "Fold-change threshold (linear)")->check(CLI::Range(1.0, 1e6));
    sub->add_option("--max-zero-frac", a.config.de.max_zero_frac, "Largest tolerated share of zero counts")
        ->check(CLI::Range(0.0, 1.0));
    sub->add_option("--prior-count", a.config.de.prior_count, "CPM prior count")->check(CLI::Range(0.0, 1e6));
    sub->add_option("--dispersion", a.dispersion, "common | tagwise")->check(CLI::IsMember({"common", "tagwise"}));
}

void glasso_opts(CLI::App* sub, Args& a) {
    sub->add_option("--lambda", a.lambda, "Penalty; overrides the permutation-null choice")->check(CLI::PositiveNumber);
    sub->add_option("--ric-reps", a.config.ric.reps, "Permutation repetitions")->check(CLI::Range(1, 100000));
    sub->add_option("--ric-statistic", a.ric_statistic, "quantile | mean")->check(CLI::IsMember({"quantile", "mean"}));
    sub->add_option("--ric-quantile", a.config.ric.quantile, "Quantile of the null maxima")->check(CLI::Range(0.0, 1.0));
    sub->add_option("--glasso-tol", a.config.glasso.tol, "Outer convergence tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--glasso-max-iter", a.config.glasso.max_iter, "Outer sweeps")->check(CLI::Range(1, 100000));
}

void assoc_opts(CLI::App* sub, Args& a) {
    sub->add_option("--clinical", a.config.clinical, "Clinical table")->required()->check(CLI::ExistingFile);
    sub->add_option("--assoc-alpha", a.config.scan.alpha, "FDR level for clinical edges")->check(CLI::Range(1e-12, 0.999999));
    sub->add_option("--lmm-test", a.lmm_test, "wald | lrt")->check(CLI::IsMember({"wald", "lrt"}));
    sub->add_option("--clinical-change", a.clinical_change, "difference | percent")
        ->check(CLI::IsMember({"difference", "percent"}));
    sub->add_option("--variables", a.variables, "Clinical variables to scan (default: all)");
}

void cluster_opts(CLI::App* sub, Args& a) {
    sub->add_option("--gamma", a.config.gamma, "Resolution parameter")->check(CLI::PositiveNumber);
    sub->add_option("--truth", a.truth, "Simulation truth directory")->check(CLI::ExistingDirectory);
}

void resolve(Args& a, const CLI::App* sub) {
    auto& c = a.config;
    c.contrasts.clear();
    for (const auto& s : a.contrasts) {
        c.contrasts.push_back(Contrast::parse(s));
    }
    c.qc.marker_gene = a.no_marker ? std::nullopt : std::optional<std::string>(a.marker);
    c.qc.pca_filter = !a.no_pca;
    c.qc.exclude_batches = a.exclude_batches;
    if (!a.exclude_samples.empty()) {
        c.exclude_samples = a.exclude_samples;
    }
    c.de.dispersion_mode = a.dispersion == "common" ? DispersionMode::Common : DispersionMode::Tagwise;
    c.de.threads = c.threads;
    c.scan.threads = c.threads;
    if (sub->get_option_no_throw("--lambda") != nullptr && sub->count("--lambda") > 0) {
        c.lambda = a.lambda;
    }
    c.ric.statistic = a.ric_statistic == "mean" ? RicStatistic::Mean : RicStatistic::Quantile;
    c.scan.test = a.lmm_test == "lrt" ? LmmTest::Lrt : LmmTest::Wald;
    c.scan.change = a.clinical_change == "percent" ? ClinicalChange::Percent : ClinicalChange::Difference;
    c.scan.variables = a.variables;
    if (!a.truth.empty()) {
        c.truth = a.truth;
    }
    if (sub->get_option_no_throw("--seed") != nullptr && sub->count("--seed") > 0) {
        c.seed = a.seed;
    }
}

void report(const std::vector<StageReport>& stages) {
    for (const auto& s : stages) {
        std::string counts;
        for (const auto& [k, v] : s.stamp["counts"].items()) {
            counts += " " + k + "=" + v.dump();
        }
        std::cerr << s.stage << ":" << counts << "\n";
    }
}

bool given(const std::vector<std::string>& args, const std::string& flag) {
    return std::any_of(args.begin(), args.end(),
                       [&](const std::string& s) { return s == flag || s.rfind(flag + "=", 0) == 0; });
}

// Splices the entries of `--config FILE` in after the subcommand name, skipping keys set on the command line.
std::vector<std::string> expand_config(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    std::string path;
    for (std::size_t i = 1; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            path = args[i + 1];
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
            break;
        }
        if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
            break;
        }
    }
    if (path.empty() || args.size() < 2) {
        return args;
    }
    std::vector<std::string> extra;
    for (const auto& item : CLI::ConfigINI().from_file(path)) {
        if (item.name == "++" || item.name == "--") {
            continue;
        }
        const std::string flag = "--" + item.name;
        if (given(args, flag)) {
            continue;
        }
        if (item.inputs.size() == 1 && (item.inputs[0] == "true" || item.inputs[0] == "false")) {
            if (item.inputs[0] == "true") {
                extra.push_back(flag);
            }
            continue;
        }
        for (const auto& v : item.inputs) {
            extra.push_back(flag);
            extra.push_back(v);
        }
    }
    args.insert(args.begin() + 2, extra.begin(), extra.end());
    return args;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Paired transcriptome differential expression and network analysis"};
    app.set_version_flag("--version", TXNET_VERSION);
    app.require_subcommand(1);
    Args a;

    auto* qc = app.add_subcommand("qc", "Sample QC: marker share, PCA outliers, batch and list exclusion");
    common(qc, a);
    qc_opts(qc, a);

    auto* de = app.add_subcommand("de", "Paired negative-binomial differential expression per contrast");
    common(de, a);
    contrast_opt(de, a);
    de_opts(de, a);

    auto* fc = app.add_subcommand("fc", "Per-subject log2 fold changes of the filtered DE genes");
    common(fc, a);
    contrast_opt(fc, a);
    fc->add_option("--prior-count", a.config.de.prior_count, "CPM prior count")->check(CLI::Range(0.0, 1e6));

    auto* gl = app.add_subcommand("glasso", "Graphical lasso on the fold-change correlation");
    common(gl, a);
    contrast_opt(gl, a);
    seed_opt(gl, a, false);
    glasso_opts(gl, a);

    auto* as = app.add_subcommand("associate", "Mixed models linking fold changes to clinical changes");
    common(as, a);
    contrast_opt(as, a);
    assoc_opts(as, a);

    auto* cl = app.add_subcommand("cluster", "Assemble the network, find modules and export");
    common(cl, a);
    contrast_opt(cl, a);
    seed_opt(cl, a, true);
    cluster_opts(cl, a);

    auto* pl = app.add_subcommand("pipeline", "Run every stage");
    common(pl, a);
    contrast_opt(pl, a);
    seed_opt(pl, a, true);
    qc_opts(pl, a);
    de_opts(pl, a);
    glasso_opts(pl, a);
    assoc_opts(pl, a);
    cluster_opts(pl, a);
    bool timings = false;
    pl->add_flag("--timings", timings, "Write wall-clock seconds per stage to timings.json");

    auto* sm = app.add_subcommand("simulate", "Write a synthetic dataset with planted truth");
    config_opt(sm);
    sm->add_option("--out", a.config.out, "Output directory")->required();
    sm->add_option("--scenario", a.scenario, "Scenario key=value file")->check(CLI::ExistingFile);
    seed_opt(sm, a, true);

    std::vector<std::string> args;
    try {
        args = expand_config(argc, argv);
    } catch (const CLI::Error& e) {
        return app.exit(e);
    }
    std::vector<char*> cargs;
    for (auto& s : args) {
        cargs.push_back(s.data());
    }
    CLI11_PARSE(app, static_cast<int>(cargs.size()), cargs.data());

    try {
        const CLI::App* sub = app.get_subcommands().front();
        resolve(a, sub);
        a.config.timings = timings;
        const auto each = [&](auto stage) {
            std::vector<StageReport> out;
            for (const auto& c : a.config.contrasts) {
                out.push_back(stage(a.config, c));
            }
            write_manifest(a.config.out);
            report(out);
        };
        if (sub == qc) {
            report({run_qc_stage(a.config)});
            write_manifest(a.config.out);
        } else if (sub == de) {
            each(run_de_stage);
        } else if (sub == fc) {
            each(run_fc_stage);
        } else if (sub == gl) {
            each(run_glasso_stage);
        } else if (sub == as) {
            each(run_associate_stage);
        } else if (sub == cl) {
            each(run_cluster_stage);
        } else if (sub == pl) {
            report(run_pipeline(a.config));
        } else if (sub == sm) {
            // the flag's seed is appended last so it wins over the file's
            std::string text;
            if (!a.scenario.empty()) {
                for (const auto& line : textio::read_lines(a.scenario)) {
                    text += line + "\n";
                }
            }
            text += "seed=" + std::to_string(a.seed) + "\n";
            const auto spec = sim::parse_scenario(text, a.scenario);
            const auto data = sim::simulate_counts(spec);
            sim::write_simulation(data, spec, a.config.out);
            std::cerr << "simulate: samples=" << data.counts.n_samples() << " genes=" << data.counts.n_genes()
                      << " planted_edges=" << data.edges.size() << " clinical_links=" << data.links.size() << "\n";
        }
    } catch (const ParseError& e) {
        std::cerr << "error: " << parse_error_name(e.kind()) << ": " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << errc_name(e.code()) << ": " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
