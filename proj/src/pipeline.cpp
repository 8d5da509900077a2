#include "txnet/pipeline.hpp"

#include "txnet/digest.hpp"
#include "txnet/error.hpp"
#include "txnet/parallel.hpp"
#include "txnet/simulate.hpp"
#include "txnet/textio.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>

namespace txnet {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(Errc::MissingArtifact, "missing artifact " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json number(double x) {
    return std::isfinite(x) ? json(x) : json(nullptr);
}

fs::path stamp_path(const fs::path& out, const std::string& key) {
    return out / "stages" / (key + ".json");
}

std::string stage_key(const std::string& stage, Contrast c) {
    return stage + "_" + c.label();
}

// Writes outputs, records their digests and writes the stamp last, so an
// interrupted stage never leaves a stamp that vouches for partial outputs.
class StageWriter {
public:
    StageWriter(const PipelineConfig& config, std::string key) : config_(config), key_(std::move(key)) {
        stamp_["stage"] = key_;
        stamp_["inputs"] = json::object();
        stamp_["outputs"] = json::object();
        stamp_["parameters"] = json::object();
        stamp_["counts"] = json::object();
    }

    void external_input(const std::string& name, const fs::path& path) {
        stamp_["inputs"][name] = {{"file", path.filename().string()}, {"sha256", sha256_file(path)}};
    }

    /// Run-directory artifact produced by `upstream`; checked against that stage's stamp.
    std::string upstream_input(const std::string& upstream, const std::string& file) {
        const auto sp = stamp_path(config_.out, upstream);
        if (!fs::exists(sp)) {
            throw Error(Errc::MissingArtifact, "stage " + upstream + " has not been run in " + config_.out.string());
        }
        const json up = json::parse(read_file(sp));
        if (!up["outputs"].contains(file)) {
            throw Error(Errc::MissingArtifact, "stage " + upstream + " did not record " + file);
        }
        const auto path = config_.out / file;
        if (!fs::exists(path)) {
            throw Error(Errc::MissingArtifact, "missing artifact " + path.string());
        }
        const std::string contents = read_file(path);
        const std::string digest = sha256_hex(contents);
        if (digest != up["outputs"][file].get<std::string>()) {
            throw Error(Errc::DigestMismatch, path.string() + " changed after stage " + upstream + " wrote it");
        }
        // the upstream stage must itself be current with its own run-directory inputs
        for (const auto& [name, entry] : up["inputs"].items()) {
            if (entry.contains("artifact")) {
                const auto ip = config_.out / entry["artifact"].get<std::string>();
                if (!fs::exists(ip) || sha256_file(ip) != entry["sha256"].get<std::string>()) {
                    throw Error(Errc::DigestMismatch, "stage " + upstream + " is stale: " + ip.string() + " changed");
                }
            }
        }
        stamp_["inputs"][file] = {{"artifact", file}, {"sha256", digest}};
        return contents;
    }

    void output(const std::string& file, const std::string& contents) {
        textio::write_file_atomic(config_.out / file, contents);
        stamp_["outputs"][file] = sha256_hex(contents);
    }

    json& parameters() { return stamp_["parameters"]; }
    json& counts() { return stamp_["counts"]; }

    StageReport finish(std::chrono::steady_clock::time_point start) {
        textio::write_file_atomic(stamp_path(config_.out, key_), stamp_.dump(2) + "\n");
        StageReport report{key_, stamp_, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()};
        return report;
    }

private:
    const PipelineConfig& config_;
    std::string key_;
    json stamp_;
};

json de_parameters(const DeOptions& o) {
    return {{"alpha", o.alpha},
            {"fc_threshold", o.fc_threshold},
            {"max_zero_frac", o.max_zero_frac},
            {"prior_count", o.prior_count},
            {"dispersion", o.dispersion_mode == DispersionMode::Common ? "common" : "tagwise"},
            {"dispersion_grid", {o.dispersion.lower, o.dispersion.upper, o.dispersion.grid_points}},
            {"prior_df", o.dispersion.prior_df},
            {"trim_m", o.tmm.trim_m},
            {"trim_a", o.tmm.trim_a}};
}

std::uint64_t require_seed(const PipelineConfig& config, const char* stage) {
    if (!config.seed) {
        throw Error(Errc::InvalidArgument, std::string("--seed is required for the ") + stage + " stage");
    }
    return *config.seed;
}

CountMatrix load_qc_counts(StageWriter& w) {
    return parse_counts(w.upstream_input("qc", "qc/counts.tsv"), "qc/counts.tsv");
}

SampleMeta load_qc_meta(StageWriter& w) {
    return parse_meta(w.upstream_input("qc", "qc/meta.tsv"), "qc/meta.tsv");
}

} // namespace

std::string format_norm_table(const std::vector<NormRow>& rows) {
    using textio::format_double;
    std::string out = "sample_id\tlib_size\tnorm_factor\teffective_lib_size\n";
    for (const auto& r : rows) {
        out += r.sample_id + '\t' + std::to_string(r.lib_size) + '\t' + format_double(r.norm_factor) + '\t' +
               format_double(r.effective_lib_size) + '\n';
    }
    return out;
}

std::vector<NormRow> parse_norm_table(std::string_view text, const std::string& source) {
    std::vector<NormRow> out;
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
        if (f.size() != 4) {
            throw ParseError(ParseError::Kind::RaggedRow, source, line_no, "expected 4 fields");
        }
        const auto lib = textio::parse_int(f[1]);
        const auto factor = textio::parse_double(f[2]);
        const auto eff = textio::parse_double(f[3]);
        if (!lib || !factor || !eff) {
            throw ParseError(ParseError::Kind::BadValue, source, line_no, "malformed normalization row");
        }
        out.push_back({std::string(f[0]), *lib, *factor, *eff});
    }
    return out;
}

StageReport run_qc_stage(const PipelineConfig& config) {
    const auto start = std::chrono::steady_clock::now();
    StageWriter w(config, "qc");
    w.external_input("counts", config.counts);
    w.external_input("meta", config.meta);
    const CountMatrix counts = load_counts(config.counts);
    const SampleMeta meta = load_meta(config.meta);
    QcOptions options = config.qc;
    if (config.exclude_samples) {
        w.external_input("exclude_samples", *config.exclude_samples);
        const auto ids = load_id_list(*config.exclude_samples);
        options.exclude_samples.insert(options.exclude_samples.end(), ids.begin(), ids.end());
    }
    const QcReport report = run_qc(counts, meta, options);
    const CountMatrix filtered = apply_qc(counts, report);
    std::vector<SampleInfo> kept;
    for (const auto& s : report.retained_samples) {
        kept.push_back(*meta.find(s));
    }

    json r;
    r["flagged_pca_outliers"] = json::array();
    for (const auto& f : report.flagged_pca_outliers) {
        r["flagged_pca_outliers"].push_back({{"sample_id", f.sample_id}, {"pc1", f.pc1}, {"pc2", f.pc2}});
    }
    r["flagged_contaminated"] = json::array();
    for (const auto& f : report.flagged_contaminated) {
        r["flagged_contaminated"].push_back({{"sample_id", f.sample_id}, {"fraction", f.fraction}});
    }
    r["excluded_batches"] = report.excluded_batches;
    r["excluded_listed"] = report.excluded_listed;
    r["retained_samples"] = report.retained_samples;
    r["n_retained_genes"] = report.retained_genes.size();

    w.output("qc/report.json", r.dump(2) + "\n");
    w.output("qc/counts.tsv", format_counts(filtered));
    w.output("qc/meta.tsv", format_meta(SampleMeta(std::move(kept))));
    w.parameters() = {{"marker_gene", options.marker_gene ? json(*options.marker_gene) : json(nullptr)},
                      {"max_marker_fraction", options.max_marker_fraction},
                      {"pca_filter", options.pca_filter},
                      {"k_mads", options.k_mads},
                      {"exclude_batches", options.exclude_batches}};
    w.counts() = {{"input_samples", counts.n_samples()},
                  {"input_genes", counts.n_genes()},
                  {"retained_samples", filtered.n_samples()},
                  {"retained_genes", filtered.n_genes()}};
    return w.finish(start);
}

StageReport run_de_stage(const PipelineConfig& config, Contrast contrast) {
    const auto start = std::chrono::steady_clock::now();
    const auto c = contrast.label();
    StageWriter w(config, stage_key("de", contrast));
    const CountMatrix counts = load_qc_counts(w);
    const SampleMeta meta = load_qc_meta(w);
    DeOptions options = config.de;
    options.threads = std::max(options.threads, 1);
    const auto result = de_contrast(counts, meta, contrast, options);

    std::vector<NormRow> norm;
    for (Index j = 0; j < result.counts.n_samples(); ++j) {
        const double f = result.tmm.factors.empty() ? 1.0 : result.tmm.factors[static_cast<std::size_t>(j)];
        const auto lib = result.counts.lib_sizes()(j);
        norm.push_back({result.counts.sample_ids()[static_cast<std::size_t>(j)], lib, f, static_cast<double>(lib) * f});
    }
    w.output("de_" + c + ".tsv", format_de_table(result.genes));
    w.output("norm_" + c + ".tsv", format_norm_table(norm));
    std::size_t tested = 0, significant = 0, passing = 0;
    for (const auto& r : result.genes) {
        tested += r.status == DeStatus::Tested;
        significant += r.status == DeStatus::Tested && r.fdr < options.alpha;
        passing += r.passes_fc_filter;
    }
    w.parameters() = de_parameters(options);
    w.parameters()["contrast"] = c;
    w.counts() = {{"paired_subjects", result.subjects.size()},
                  {"genes", result.genes.size()},
                  {"tested", tested},
                  {"fdr_significant", significant},
                  {"passing_fc_filter", passing},
                  {"common_dispersion", number(result.dispersion.common)},
                  {"tmm_reference", result.tmm.reference_sample}};
    return w.finish(start);
}

StageReport run_fc_stage(const PipelineConfig& config, Contrast contrast) {
    const auto start = std::chrono::steady_clock::now();
    const auto c = contrast.label();
    StageWriter w(config, stage_key("fc", contrast));
    const CountMatrix counts = load_qc_counts(w);
    const SampleMeta meta = load_qc_meta(w);
    const auto table = parse_de_table(w.upstream_input(stage_key("de", contrast), "de_" + c + ".tsv"), "de_" + c + ".tsv");
    const auto norm = parse_norm_table(w.upstream_input(stage_key("de", contrast), "norm_" + c + ".tsv"), "norm_" + c + ".tsv");
    std::vector<Index> columns;
    std::vector<double> eff;
    for (const auto& r : norm) {
        const auto j = counts.sample_index(r.sample_id);
        if (!j) {
            throw Error(Errc::DigestMismatch, "normalization table names sample " + r.sample_id + " absent from qc/counts.tsv");
        }
        columns.push_back(*j);
        eff.push_back(r.effective_lib_size);
    }
    const CountMatrix paired = counts.select_samples(columns);
    const auto genes = fc_filtered_genes(table);
    const auto fc = paired_logfc(paired, eff, meta, genes, contrast, config.de.prior_count);
    w.output("fc_" + c + ".tsv", format_fold_changes(fc));
    w.parameters() = {{"contrast", c}, {"prior_count", config.de.prior_count}};
    w.counts() = {{"subjects", fc.subject_ids.size()}, {"genes", fc.gene_ids.size()}};
    return w.finish(start);
}

StageReport run_glasso_stage(const PipelineConfig& config, Contrast contrast) {
    const auto start = std::chrono::steady_clock::now();
    const auto c = contrast.label();
    StageWriter w(config, stage_key("glasso", contrast));
    const auto fc = parse_fold_changes(w.upstream_input(stage_key("fc", contrast), "fc_" + c + ".tsv"), contrast,
                                       "fc_" + c + ".tsv");
    const auto z = standardize_columns(fc);
    json info;
    double lambda = 0;
    if (config.lambda) {
        if (!(*config.lambda > 0)) {
            throw Error(Errc::InvalidArgument, "--lambda must be positive");
        }
        lambda = *config.lambda;
        info["lambda_source"] = "override";
    } else {
        const auto seed = require_seed(config, "glasso");
        const auto ric = ric_lambda(z.z, seed, config.ric);
        lambda = ric.lambda;
        info["lambda_source"] = "ric";
        info["ric_reps"] = config.ric.reps;
        info["ric_statistic"] = config.ric.statistic == RicStatistic::Mean ? "mean" : "quantile";
        info["ric_quantile"] = config.ric.quantile;
        info["ric_null_maxima"] = ric.null_maxima;
        info["seed"] = seed;
    }
    SampleCorrelation s;
    s.gene_ids = z.gene_ids;
    s.S = correlation_of_standardized(z.z);
    s.dropped = z.dropped;
    const auto est = glasso(s, lambda, config.glasso);
    const auto edges = gene_edges(est);
    info["lambda"] = lambda;
    info["duality_gap"] = est.duality_gap;
    info["objective"] = est.objective;
    info["iterations"] = est.iterations;
    info["converged"] = est.converged;
    info["genes"] = est.gene_ids.size();
    info["dropped_constant_genes"] = z.dropped;
    info["edges"] = edges.size();
    w.output("edges_genes_" + c + ".tsv", format_gene_edges(edges));
    w.output("glasso_" + c + ".json", info.dump(2) + "\n");
    w.parameters() = {{"contrast", c},
                      {"lambda", lambda},
                      {"lambda_source", info["lambda_source"]},
                      {"tol", config.glasso.tol},
                      {"max_iter", config.glasso.max_iter},
                      {"gap_tol", config.glasso.gap_tol}};
    if (!config.lambda) {
        w.parameters()["seed"] = *config.seed;
        w.parameters()["ric_reps"] = config.ric.reps;
    }
    w.counts() = {{"genes", est.gene_ids.size()}, {"edges", edges.size()}};
    return w.finish(start);
}

StageReport run_associate_stage(const PipelineConfig& config, Contrast contrast) {
    const auto start = std::chrono::steady_clock::now();
    const auto c = contrast.label();
    StageWriter w(config, stage_key("associate", contrast));
    const auto fc = parse_fold_changes(w.upstream_input(stage_key("fc", contrast), "fc_" + c + ".tsv"), contrast,
                                       "fc_" + c + ".tsv");
    const SampleMeta meta = load_qc_meta(w);
    w.external_input("clinical", config.clinical);
    const ClinicalTable clinical = load_clinical(config.clinical);
    ScanOptions options = config.scan;
    options.threads = std::max(config.threads, 1);
    const auto scan = clinical_scan(fc, clinical, meta, options);
    w.output("edges_clinical_" + c + ".tsv", format_clinical_edges(scan.edges));
    w.output("associations_" + c + ".tsv", format_associations(scan.results));
    std::vector<std::string> vars = options.variables.empty() ? clinical.variables() : options.variables;
    w.parameters() = {{"contrast", c},
                      {"alpha", options.alpha},
                      {"variables", vars},
                      {"change", options.change == ClinicalChange::Percent ? "percent" : "difference"},
                      {"test", options.test == LmmTest::Lrt ? "lrt" : "wald"}};
    w.counts() = {{"models", scan.results.size()}, {"edges", scan.edges.size()}, {"skipped", scan.skipped.size()}};
    return w.finish(start);
}

namespace {

json recovery_metrics(const fs::path& truth_dir, const Network& net, const Partition& partition,
                      const std::vector<DEResult>& table, const std::vector<GeneEdge>& gene_edge_list,
                      const json& qc_report) {
    const auto truth = sim::load_truth(truth_dir);
    json out;

    std::set<std::string> planted_de;
    for (const auto& g : truth.genes) {
        if (g.is_de) {
            planted_de.insert(g.gene_id);
        }
    }
    std::size_t called = 0, called_true = 0;
    for (const auto& r : table) {
        if (r.passes_fc_filter) {
            ++called;
            called_true += planted_de.count(r.gene_id);
        }
    }
    out["de"] = {{"planted", planted_de.size()},
                 {"called", called},
                 {"true_calls", called_true},
                 {"recall", number(planted_de.empty() ? std::nan("") : double(called_true) / double(planted_de.size()))},
                 {"precision", number(called == 0 ? std::nan("") : double(called_true) / double(called))}};

    const auto key = [](std::string a, std::string b) { return a < b ? a + "\t" + b : b + "\t" + a; };
    std::map<std::string, double> planted_edges;
    for (const auto& e : truth.edges) {
        planted_edges[key(e.source, e.target)] = e.partial_corr;
    }
    std::size_t tp = 0, sign_ok = 0;
    for (const auto& e : gene_edge_list) {
        const auto it = planted_edges.find(key(e.source, e.target));
        if (it != planted_edges.end()) {
            ++tp;
            sign_ok += (it->second > 0) == (e.sign > 0);
        }
    }
    const double precision = gene_edge_list.empty() ? std::nan("") : double(tp) / double(gene_edge_list.size());
    const double recall = planted_edges.empty() ? std::nan("") : double(tp) / double(planted_edges.size());
    out["gene_edges"] = {{"planted", planted_edges.size()},
                         {"inferred", gene_edge_list.size()},
                         {"true_positives", tp},
                         {"sign_agreement", sign_ok},
                         {"precision", number(precision)},
                         {"recall", number(recall)},
                         {"f1", number(precision + recall > 0 ? 2 * precision * recall / (precision + recall) : std::nan(""))}};

    std::map<std::string, std::vector<std::string>> partners;
    for (const auto& l : truth.links) {
        partners[l.variable].push_back(l.gene_id);
    }
    out["clinical"] = json::object();
    for (const auto& [var, genes] : partners) {
        json v;
        const auto idx = net.node_index(var);
        std::size_t in_module = 0, linked = 0;
        if (idx) {
            const int module = partition[*idx];
            v["module_id"] = module;
            for (const auto& g : genes) {
                const auto gi = net.node_index(g);
                in_module += gi && partition[*gi] == module;
            }
            for (const auto& e : net.edges()) {
                if (e.kind == EdgeKind::GeneClinical && (e.u == *idx || e.v == *idx)) {
                    const auto& other = net.nodes()[e.u == *idx ? e.v : e.u].id;
                    linked += std::find(genes.begin(), genes.end(), other) != genes.end();
                }
            }
        } else {
            v["module_id"] = nullptr;
        }
        v["planted_partners"] = genes.size();
        v["partners_in_module"] = in_module;
        v["partner_fraction_in_module"] = double(in_module) / double(genes.size());
        v["partner_edges_recovered"] = linked;
        out["clinical"][var] = v;
    }

    std::set<std::string> flagged;
    for (const auto& f : qc_report["flagged_pca_outliers"]) {
        flagged.insert(f["sample_id"].get<std::string>());
    }
    for (const auto& f : qc_report["flagged_contaminated"]) {
        flagged.insert(f["sample_id"].get<std::string>());
    }
    std::size_t caught = 0;
    for (const auto& s : truth.injections) {
        caught += flagged.count(s.sample_id);
    }
    out["qc"] = {{"injected", truth.injections.size()}, {"flagged", flagged.size()}, {"injected_flagged", caught}};
    return out;
}

} // namespace

StageReport run_cluster_stage(const PipelineConfig& config, Contrast contrast) {
    const auto start = std::chrono::steady_clock::now();
    const auto c = contrast.label();
    StageWriter w(config, stage_key("cluster", contrast));
    const auto seed = require_seed(config, "cluster");
    const auto table = parse_de_table(w.upstream_input(stage_key("de", contrast), "de_" + c + ".tsv"), "de_" + c + ".tsv");
    const auto gene_edge_list = parse_gene_edges(
        w.upstream_input(stage_key("glasso", contrast), "edges_genes_" + c + ".tsv"), "edges_genes_" + c + ".tsv");
    const json glasso_info = json::parse(w.upstream_input(stage_key("glasso", contrast), "glasso_" + c + ".json"));
    const auto clinical_edges = parse_clinical_edges(
        w.upstream_input(stage_key("associate", contrast), "edges_clinical_" + c + ".tsv"), "edges_clinical_" + c + ".tsv");

    const Network net = assemble(gene_edge_list, clinical_edges, table);
    LouvainOptions lo;
    lo.gamma = config.gamma;
    lo.seed = seed;
    LouvainStats stats;
    const Partition partition = cluster_modules(net, lo, &stats);
    const auto modules = summarize_modules(net, partition);

    json summary;
    summary["contrast"] = c;
    summary["nodes"] = net.nodes().size();
    summary["edges"] = net.edges().size();
    summary["gene_edges"] = std::count_if(net.edges().begin(), net.edges().end(),
                                          [](const Edge& e) { return e.kind == EdgeKind::GeneGene; });
    summary["clinical_edges"] = std::count_if(net.edges().begin(), net.edges().end(),
                                              [](const Edge& e) { return e.kind == EdgeKind::GeneClinical; });
    summary["modularity"] = modularity_score(net, partition, config.gamma);
    summary["gamma"] = config.gamma;
    summary["seed"] = seed;
    summary["lambda"] = glasso_info["lambda"];
    summary["lambda_source"] = glasso_info["lambda_source"];
    summary["duality_gap"] = glasso_info["duality_gap"];
    summary["louvain_moves"] = stats.moves;
    summary["module_sizes"] = json::array();
    for (const auto& m : modules) {
        summary["module_sizes"].push_back(m.size);
    }
    summary["modules"] = modules_json(modules);
    if (config.truth) {
        const json qc_report = json::parse(w.upstream_input("qc", "qc/report.json"));
        for (const auto& file : {"truth_genes.tsv", "truth_edges.tsv", "truth_clinical.tsv", "truth_samples.tsv"}) {
            w.external_input(file, *config.truth / file);
        }
        summary["recovery"] = recovery_metrics(*config.truth, net, partition, table, gene_edge_list, qc_report);
    }

    w.output("modules_" + c + ".tsv", format_modules_tsv(net, partition));
    w.output("network_" + c + ".graphml", format_graphml(net, &partition));
    w.output("network_" + c + ".tsv", format_edgelist(net));
    w.output("summary_" + c + ".json", summary.dump(2) + "\n");
    w.parameters() = {{"contrast", c}, {"gamma", config.gamma}, {"seed", seed}};
    w.counts() = {{"nodes", net.nodes().size()}, {"edges", net.edges().size()}, {"modules", modules.size()}};
    return w.finish(start);
}

void write_manifest(const fs::path& out) {
    json manifest;
    manifest["tool"] = "txnet";
    manifest["version"] = TXNET_VERSION;
    manifest["stages"] = json::object();
    const auto dir = out / "stages";
    if (fs::exists(dir)) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(dir)) {
            if (entry.path().extension() == ".json") {
                files.push_back(entry.path());
            }
        }
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
            manifest["stages"][f.stem().string()] = json::parse(read_file(f));
        }
    }
    textio::write_file_atomic(out / "manifest.json", manifest.dump(2) + "\n");
}

std::vector<StageReport> run_pipeline(const PipelineConfig& config) {
    require_seed(config, "pipeline");
    std::vector<StageReport> reports;
    reports.push_back(run_qc_stage(config));
    const std::size_t nc = config.contrasts.size();
    const int threads = std::max(config.threads, 1);
    // contrasts in parallel when there are threads to spare, per-gene threads inside otherwise
    const int outer = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(threads), nc));
    PipelineConfig inner = config;
    inner.threads = std::max(threads / std::max(outer, 1), 1);
    inner.de.threads = inner.threads;
    std::vector<std::vector<StageReport>> per_contrast(nc);
    parallel_for(nc, outer, [&](std::size_t k) {
        const Contrast c = config.contrasts[k];
        auto& r = per_contrast[k];
        r.push_back(run_de_stage(inner, c));
        r.push_back(run_fc_stage(inner, c));
        r.push_back(run_glasso_stage(inner, c));
        r.push_back(run_associate_stage(inner, c));
        r.push_back(run_cluster_stage(inner, c));
    });
    for (auto& r : per_contrast) {
        reports.insert(reports.end(), r.begin(), r.end());
    }
    write_manifest(config.out);
    if (config.timings) {
        json t = json::object();
        for (const auto& r : reports) {
            t[r.stage] = r.seconds;
        }
        textio::write_file_atomic(config.out / "timings.json", t.dump(2) + "\n");
    }
    return reports;
}

} // namespace txnet
