#include "txnet/simulate.hpp"

#include "txnet/error.hpp"
#include "txnet/textio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>

namespace txnet::sim {

namespace {

enum Component : std::uint64_t {
    kLibrary = 1,
    kExpression,
    kSubject,
    kDirection,
    kPrecision,
    kLatent,
    kCounts,
    kClinical,
    kInjection,
    kDesign,
    kFcSample,
};

std::string numbered(const char* prefix, int width, int k) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%0*d", prefix, width, k);
    return buf;
}

std::int64_t draw_nb(double mu, double phi, std::mt19937_64& rng) {
    if (mu <= 0) {
        return 0;
    }
    double rate = mu;
    if (phi > 0) {
        std::gamma_distribution<double> gamma(1.0 / phi, phi * mu);
        rate = gamma(rng);
    }
    std::poisson_distribution<std::int64_t> poisson(rate);
    return poisson(rng);
}

Eigen::MatrixXd covariance_factor(const Eigen::MatrixXd& theta) {
    const Eigen::Index p = theta.rows();
    Eigen::LLT<Eigen::MatrixXd> llt(theta);
    if (llt.info() != Eigen::Success) {
        throw std::logic_error("planted precision matrix is not positive definite");
    }
    Eigen::MatrixXd sigma = llt.solve(Eigen::MatrixXd::Identity(p, p));
    sigma = 0.5 * (sigma + sigma.transpose());
    return Eigen::LLT<Eigen::MatrixXd>(sigma).matrixL();
}

} // namespace

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t component) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(component), static_cast<std::uint32_t>(component >> 32), 0x7f4a7c15u};
    return std::mt19937_64(seq);
}

const char* pattern_name(PrecisionPattern pattern) noexcept {
    switch (pattern) {
    case PrecisionPattern::Chain: return "chain";
    case PrecisionPattern::Block: return "block";
    case PrecisionPattern::Random: return "random";
    case PrecisionPattern::None: break;
    }
    return "none";
}

PrecisionPattern parse_pattern(std::string_view text) {
    if (text == "none") return PrecisionPattern::None;
    if (text == "chain") return PrecisionPattern::Chain;
    if (text == "block") return PrecisionPattern::Block;
    if (text == "random") return PrecisionPattern::Random;
    throw Error(Errc::InvalidArgument, "unknown precision pattern " + std::string(text));
}

Eigen::MatrixXd planted_precision(Eigen::Index p, PrecisionPattern pattern, const PrecisionOptions& options,
                                  std::mt19937_64& rng) {
    if (options.edge_min < 0 || options.edge_max < options.edge_min) {
        throw Error(Errc::InfeasibleScenario, "edge magnitude range is empty");
    }
    std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    switch (pattern) {
    case PrecisionPattern::None:
        break;
    case PrecisionPattern::Chain:
        for (Eigen::Index i = 0; i + 1 < p; ++i) {
            pairs.emplace_back(i, i + 1);
        }
        break;
    case PrecisionPattern::Block: {
        const Eigen::Index b = std::max(options.block_size, 2);
        for (Eigen::Index start = 0; start < p; start += b) {
            const Eigen::Index end = std::min(p, start + b);
            const Eigen::Index size = end - start;
            for (Eigen::Index i = start; i + 1 < end; ++i) {
                pairs.emplace_back(i, i + 1);
            }
            if (size >= 3) {
                pairs.emplace_back(start, end - 1);
            }
            for (Eigen::Index i = start; i < end; ++i) {
                for (Eigen::Index j = i + 2; j < end; ++j) {
                    if (i == start && j == end - 1) {
                        continue;
                    }
                    if (unit(rng) < options.chord_probability) {
                        pairs.emplace_back(i, j);
                    }
                }
            }
        }
        break;
    }
    case PrecisionPattern::Random: {
        const double prob = p > 1 ? std::min(1.0, options.random_degree / static_cast<double>(p - 1)) : 0.0;
        for (Eigen::Index i = 0; i < p; ++i) {
            for (Eigen::Index j = i + 1; j < p; ++j) {
                if (unit(rng) < prob) {
                    pairs.emplace_back(i, j);
                }
            }
        }
        break;
    }
    }
    std::sort(pairs.begin(), pairs.end());
    Eigen::MatrixXd theta = Eigen::MatrixXd::Zero(p, p);
    std::uniform_real_distribution<double> magnitude(options.edge_min, options.edge_max);
    for (const auto& [i, j] : pairs) {
        const double m = options.edge_min == options.edge_max ? options.edge_min : magnitude(rng);
        const bool positive = unit(rng) < options.positive_fraction;
        theta(i, j) = theta(j, i) = positive ? -m : m;
    }
    for (Eigen::Index i = 0; i < p; ++i) {
        theta(i, i) = std::max(1.0, theta.row(i).cwiseAbs().sum() / 0.9);
    }
    return theta;
}

std::vector<TruthEdge> precision_edges(const Eigen::MatrixXd& theta, const std::vector<std::string>& ids) {
    std::vector<TruthEdge> out;
    for (Eigen::Index i = 0; i < theta.rows(); ++i) {
        for (Eigen::Index j = i + 1; j < theta.cols(); ++j) {
            if (theta(i, j) != 0) {
                out.push_back({ids[static_cast<std::size_t>(i)], ids[static_cast<std::size_t>(j)],
                               -theta(i, j) / std::sqrt(theta(i, i) * theta(j, j))});
            }
        }
    }
    return out;
}

PrecisionSample simulate_fc_from_precision(Eigen::Index p, PrecisionPattern pattern, Eigen::Index n, std::uint64_t seed,
                                           const PrecisionOptions& options) {
    PrecisionSample out;
    auto prec_rng = stream(seed, kPrecision);
    out.theta = planted_precision(p, pattern, options, prec_rng);
    const Eigen::MatrixXd L = covariance_factor(out.theta);
    auto rng = stream(seed, kFcSample);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd z(n, p);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < p; ++j) {
            z(i, j) = normal(rng);
        }
    }
    out.fc.values = z * L.transpose();
    for (Eigen::Index i = 0; i < n; ++i) {
        out.fc.subject_ids.push_back(numbered("P", 4, static_cast<int>(i + 1)));
    }
    for (Eigen::Index j = 0; j < p; ++j) {
        out.fc.gene_ids.push_back(numbered("G", 4, static_cast<int>(j + 1)));
    }
    out.fc.contrast = Contrast{1, 2};
    out.edges = precision_edges(out.theta, out.fc.gene_ids);
    return out;
}

Eigen::MatrixXd oracle_glasso(const Eigen::MatrixXd& S, double lambda, int max_iter) {
    const Eigen::Index p = S.rows();
    const auto smooth = [&](const Eigen::MatrixXd& theta, double& value) {
        Eigen::LLT<Eigen::MatrixXd> llt(theta);
        if (llt.info() != Eigen::Success || (llt.matrixL().toDenseMatrix().diagonal().array() <= 0).any()) {
            return false;
        }
        const double log_det = 2 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
        value = -log_det + (S.cwiseProduct(theta)).sum();
        return true;
    };
    const auto penalty = [&](const Eigen::MatrixXd& theta) {
        return lambda * (theta.cwiseAbs().sum() - theta.diagonal().cwiseAbs().sum());
    };
    const auto prox = [&](const Eigen::MatrixXd& x, double t) {
        Eigen::MatrixXd out = x;
        for (Eigen::Index i = 0; i < p; ++i) {
            for (Eigen::Index j = 0; j < p; ++j) {
                if (i != j) {
                    const double v = x(i, j);
                    out(i, j) = std::copysign(std::max(std::abs(v) - t * lambda, 0.0), v);
                }
            }
        }
        return out;
    };

    Eigen::MatrixXd theta = S.diagonal().cwiseInverse().asDiagonal();
    double f = 0;
    smooth(theta, f);
    double t = 1.0;
    for (int iter = 0; iter < max_iter; ++iter) {
        Eigen::MatrixXd inv = theta.llt().solve(Eigen::MatrixXd::Identity(p, p));
        const Eigen::MatrixXd grad = S - 0.5 * (inv + inv.transpose());
        Eigen::MatrixXd next;
        double f_next = 0;
        while (true) {
            next = prox(theta - t * grad, t);
            const Eigen::MatrixXd step = next - theta;
            if (smooth(next, f_next) &&
                f_next <= f + grad.cwiseProduct(step).sum() + step.squaredNorm() / (2 * t)) {
                break;
            }
            t /= 2;
        }
        // fixed-point residual of the proximal map; far tighter than an objective-change rule
        const double residual = (next - theta).cwiseAbs().maxCoeff() / t;
        const double change = std::abs((f_next + penalty(next)) - (f + penalty(theta)));
        theta = next;
        f = f_next;
        if (residual < 1e-11 && change < 1e-10) {
            break;
        }
        t = std::min(t * 1.5, 1e3);
    }
    return theta;
}

namespace {

std::vector<DeGene> parse_de_list(std::string_view text) {
    std::vector<DeGene> out;
    std::size_t start = 0;
    while (start < text.size()) {
        auto comma = text.find(',', start);
        if (comma == std::string_view::npos) {
            comma = text.size();
        }
        const auto item = text.substr(start, comma - start);
        start = comma + 1;
        if (item.empty()) {
            continue;
        }
        const auto colon = item.find(':');
        const auto fold = colon == std::string_view::npos ? std::nullopt : textio::parse_double(item.substr(colon + 1));
        if (!fold) {
            throw Error(Errc::InvalidArgument, "de_list entries are gene:fold");
        }
        out.push_back({std::string(item.substr(0, colon)), *fold});
    }
    return out;
}

std::vector<ClinicalLink> parse_links(std::string_view text) {
    std::vector<ClinicalLink> out;
    std::size_t start = 0;
    while (start < text.size()) {
        auto comma = text.find(',', start);
        if (comma == std::string_view::npos) {
            comma = text.size();
        }
        const auto item = text.substr(start, comma - start);
        start = comma + 1;
        if (item.empty()) {
            continue;
        }
        const auto a = item.find(':');
        const auto b = a == std::string_view::npos ? a : item.find(':', a + 1);
        const auto slope = b == std::string_view::npos ? std::nullopt : textio::parse_double(item.substr(b + 1));
        if (!slope) {
            throw Error(Errc::InvalidArgument, "clinical_links entries are gene:variable:slope");
        }
        out.push_back({std::string(item.substr(0, a)), std::string(item.substr(a + 1, b - a - 1)), *slope});
    }
    return out;
}

struct Field {
    std::function<void(std::string_view)> set;
    std::function<std::string()> get;
};

std::vector<std::pair<std::string, Field>> scenario_fields(ScenarioSpec& s) {
    using textio::format_double;
    const auto number = [](double& target) {
        return Field{[&target](std::string_view v) {
                         const auto x = textio::parse_double(v);
                         if (!x || !std::isfinite(*x)) {
                             throw Error(Errc::InvalidArgument, "not a number: " + std::string(v));
                         }
                         target = *x;
                     },
                     [&target] { return format_double(target); }};
    };
    const auto integer = [](int& target) {
        return Field{[&target](std::string_view v) {
                         const auto x = textio::parse_int(v);
                         if (!x) {
                             throw Error(Errc::InvalidArgument, "not an integer: " + std::string(v));
                         }
                         target = static_cast<int>(*x);
                     },
                     [&target] { return std::to_string(target); }};
    };
    std::vector<std::pair<std::string, Field>> f;
    f.emplace_back("seed", Field{[&s](std::string_view v) {
                                     const auto x = textio::parse_int(v);
                                     if (!x || *x < 0) {
                                         throw Error(Errc::InvalidArgument, "seed must be a non-negative integer");
                                     }
                                     s.seed = static_cast<std::uint64_t>(*x);
                                 },
                                 [&s] { return std::to_string(s.seed); }});
    f.emplace_back("n_subjects", integer(s.n_subjects));
    f.emplace_back("n_genes", integer(s.n_genes));
    f.emplace_back("n_centers", integer(s.n_centers));
    f.emplace_back("timepoints", integer(s.timepoints));
    f.emplace_back("lib_min", number(s.lib_min));
    f.emplace_back("lib_max", number(s.lib_max));
    f.emplace_back("dispersion", number(s.dispersion));
    f.emplace_back("subject_sd", number(s.subject_sd));
    f.emplace_back("expression_meanlog", number(s.expression_meanlog));
    f.emplace_back("expression_sdlog", number(s.expression_sdlog));
    f.emplace_back("de_count", integer(s.de_count));
    f.emplace_back("de_fold", number(s.de_fold));
    f.emplace_back("de_up_fraction", number(s.de_up_fraction));
    f.emplace_back("de_list", Field{[&s](std::string_view v) { s.de_list = parse_de_list(v); },
                                    [&s] {
                                        std::string out;
                                        for (const auto& d : s.de_list) {
                                            out += (out.empty() ? "" : ",") + d.gene_id + ':' + format_double(d.fold);
                                        }
                                        return out;
                                    }});
    f.emplace_back("module_pattern", Field{[&s](std::string_view v) { s.module_pattern = parse_pattern(v); },
                                           [&s] { return std::string(pattern_name(s.module_pattern)); }});
    f.emplace_back("module_genes", integer(s.module_genes));
    f.emplace_back("fc_sd", number(s.fc_sd));
    f.emplace_back("edge_min", number(s.precision.edge_min));
    f.emplace_back("edge_max", number(s.precision.edge_max));
    f.emplace_back("positive_fraction", number(s.precision.positive_fraction));
    f.emplace_back("block_size", integer(s.precision.block_size));
    f.emplace_back("chord_probability", number(s.precision.chord_probability));
    f.emplace_back("random_degree", number(s.precision.random_degree));
    f.emplace_back("clinical_var", Field{[&s](std::string_view v) { s.clinical_var = std::string(v); },
                                         [&s] { return s.clinical_var; }});
    f.emplace_back("clinical_partners", integer(s.clinical_partners));
    f.emplace_back("clinical_slope", number(s.clinical_slope));
    f.emplace_back("clinical_links", Field{[&s](std::string_view v) { s.clinical_links = parse_links(v); },
                                           [&s] {
                                               std::string out;
                                               for (const auto& l : s.clinical_links) {
                                                   out += (out.empty() ? "" : ",") + l.gene_id + ':' + l.variable + ':' +
                                                          format_double(l.slope);
                                               }
                                               return out;
                                           }});
    f.emplace_back("clinical_noise", number(s.clinical_noise));
    f.emplace_back("center_sd", number(s.center_sd));
    f.emplace_back("contaminated_samples", integer(s.contaminated_samples));
    f.emplace_back("contamination_fraction", number(s.contamination_fraction));
    f.emplace_back("outlier_samples", integer(s.outlier_samples));
    f.emplace_back("outlier_sdlog", number(s.outlier_sdlog));
    return f;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

} // namespace

ScenarioSpec parse_scenario(std::string_view text, const std::string& source) {
    using PK = ParseError::Kind;
    ScenarioSpec spec;
    auto fields = scenario_fields(spec);
    bool has_seed = false;
    std::size_t start = 0;
    std::size_t line_no = 0;
    while (start < text.size()) {
        auto pos = text.find('\n', start);
        if (pos == std::string_view::npos) {
            pos = text.size();
        }
        auto line = trim(text.substr(start, pos - start));
        start = pos + 1;
        ++line_no;
        if (line.empty() || line.front() == '#') {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ParseError(PK::BadValue, source, line_no, "expected key=value");
        }
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        const auto it = std::find_if(fields.begin(), fields.end(), [&](const auto& f) { return f.first == key; });
        if (it == fields.end()) {
            throw ParseError(PK::BadValue, source, line_no, "unknown key " + std::string(key));
        }
        try {
            it->second.set(value);
        } catch (const Error& e) {
            throw ParseError(PK::BadValue, source, line_no, e.what());
        }
        has_seed = has_seed || key == "seed";
    }
    if (!has_seed) {
        throw ParseError(PK::MissingColumn, source, 0, "scenario needs a seed");
    }
    return spec;
}

ScenarioSpec load_scenario(const std::filesystem::path& path) {
    std::string text;
    for (const auto& line : textio::read_lines(path)) {
        text += line;
        text += '\n';
    }
    return parse_scenario(text, path.string());
}

std::string format_scenario(const ScenarioSpec& spec) {
    ScenarioSpec copy = spec;
    std::string out;
    for (const auto& [key, field] : scenario_fields(copy)) {
        out += key + '=' + field.get() + '\n';
    }
    return out;
}

SimulatedData simulate_counts(const ScenarioSpec& spec) {
    const auto infeasible = [](const std::string& what) { throw Error(Errc::InfeasibleScenario, what); };
    if (spec.n_subjects < 1 || spec.n_genes < 2 || spec.n_centers < 1) {
        infeasible("need at least one subject, one center and two genes");
    }
    if (spec.timepoints < 2 || spec.timepoints > 3) {
        infeasible("timepoints must be 2 or 3");
    }
    if (!(spec.lib_min > 0) || spec.lib_max < spec.lib_min || spec.dispersion < 0) {
        infeasible("library size range or dispersion out of range");
    }
    if (spec.de_count < 0 || spec.de_count > spec.n_genes - 1 || !(spec.de_fold > 0)) {
        infeasible("planted DE count or fold out of range");
    }
    if (spec.module_genes < 0 || spec.module_genes > spec.de_count) {
        infeasible("module genes must be a subset of the planted DE genes");
    }
    if (spec.module_genes > 0 && spec.module_pattern == PrecisionPattern::None) {
        infeasible("module genes need a precision pattern");
    }
    const int first_block = spec.module_pattern == PrecisionPattern::Block
                                ? std::min(spec.precision.block_size, spec.module_genes)
                                : spec.module_genes;
    if (spec.clinical_partners < 0 || spec.clinical_partners > first_block) {
        infeasible("clinical partners exceed the first module block");
    }
    const auto& variables = default_clinical_variables();
    if (spec.clinical_partners > 0 &&
        std::find(variables.begin(), variables.end(), spec.clinical_var) == variables.end()) {
        infeasible("unknown clinical variable " + spec.clinical_var);
    }
    const int total_samples = spec.n_subjects * spec.timepoints;
    if (spec.contaminated_samples < 0 || spec.outlier_samples < 0 ||
        spec.contaminated_samples + spec.outlier_samples > total_samples) {
        infeasible("more injected samples than samples");
    }
    if (!(spec.contamination_fraction > 0 && spec.contamination_fraction < 1)) {
        infeasible("contamination fraction must lie in (0, 1)");
    }

    SimulatedData out;
    const int G = spec.n_genes;
    const int S = spec.n_subjects;
    const int T = spec.timepoints;
    std::vector<std::string> gene_ids;
    for (int g = 0; g < G - 1; ++g) {
        gene_ids.push_back(numbered("G", 5, g + 1));
    }
    gene_ids.push_back("HBB");
    std::map<std::string, int> gene_index;
    for (int g = 0; g < G; ++g) {
        gene_index[gene_ids[static_cast<std::size_t>(g)]] = g;
    }

    // planted folds (log2), DE genes from the start of the list
    std::vector<double> log2_fold(static_cast<std::size_t>(G), 0.0);
    {
        auto rng = stream(spec.seed, kDirection);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (int g = 0; g < spec.de_count; ++g) {
            const bool up = unit(rng) < spec.de_up_fraction;
            log2_fold[static_cast<std::size_t>(g)] = (up ? 1 : -1) * std::log2(spec.de_fold);
        }
    }
    std::vector<bool> is_de(static_cast<std::size_t>(G), false);
    for (int g = 0; g < spec.de_count; ++g) {
        is_de[static_cast<std::size_t>(g)] = true;
    }
    for (const auto& d : spec.de_list) {
        const auto it = gene_index.find(d.gene_id);
        if (it == gene_index.end() || !(d.fold > 0)) {
            infeasible("planted fold on unknown gene or non-positive fold: " + d.gene_id);
        }
        log2_fold[static_cast<std::size_t>(it->second)] = std::log2(d.fold);
        is_de[static_cast<std::size_t>(it->second)] = d.fold != 1.0;
    }

    // latent correlated fold changes for the module genes
    const int M = spec.module_genes;
    Eigen::MatrixXd theta;
    Eigen::MatrixXd latent_factor;
    if (M > 0) {
        auto rng = stream(spec.seed, kPrecision);
        theta = planted_precision(M, spec.module_pattern, spec.precision, rng);
        latent_factor = covariance_factor(theta);
        std::vector<std::string> ids(gene_ids.begin(), gene_ids.begin() + M);
        out.edges = precision_edges(theta, ids);
    }
    // latent[t - 2] is subjects x module genes in log2 units
    std::vector<Eigen::MatrixXd> latent;
    {
        auto rng = stream(spec.seed, kLatent);
        std::normal_distribution<double> normal(0.0, 1.0);
        for (int t = 2; t <= T; ++t) {
            Eigen::MatrixXd z(S, M);
            for (int s = 0; s < S; ++s) {
                for (int j = 0; j < M; ++j) {
                    z(s, j) = normal(rng);
                }
            }
            latent.push_back(M > 0 ? Eigen::MatrixXd(spec.fc_sd * z * latent_factor.transpose()) : z);
        }
    }

    std::vector<ClinicalLink> links;
    for (int k = 0; k < spec.clinical_partners; ++k) {
        links.push_back({gene_ids[static_cast<std::size_t>(k)], spec.clinical_var, spec.clinical_slope});
    }
    for (const auto& l : spec.clinical_links) {
        const auto it = gene_index.find(l.gene_id);
        if (it == gene_index.end() || it->second >= M) {
            infeasible("clinical link on a gene without a latent fold change: " + l.gene_id);
        }
        if (std::find(variables.begin(), variables.end(), l.variable) == variables.end()) {
            infeasible("unknown clinical variable " + l.variable);
        }
        links.push_back(l);
    }
    out.links = links;

    // design
    std::vector<SampleInfo> samples;
    {
        auto rng = stream(spec.seed, kDesign);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::uniform_int_distribution<int> age(25, 60);
        for (int s = 0; s < S; ++s) {
            const std::string subject = numbered("P", 4, s + 1);
            const Sex sex = unit(rng) < 0.5 ? Sex::Female : Sex::Male;
            const double a = age(rng);
            const std::string center = "C" + std::to_string(s % spec.n_centers + 1);
            for (int t = 1; t <= T; ++t) {
                const int k = static_cast<int>(samples.size());
                samples.push_back({subject + "_" + std::to_string(t), subject, t, center, sex, a,
                                   "plate" + std::to_string(k / 96 + 1)});
            }
        }
    }
    const int N = static_cast<int>(samples.size());

    // relative abundances
    std::vector<double> share(static_cast<std::size_t>(G));
    {
        auto rng = stream(spec.seed, kExpression);
        std::normal_distribution<double> normal(spec.expression_meanlog, spec.expression_sdlog);
        for (auto& v : share) {
            v = std::exp(normal(rng));
        }
        std::vector<double> sorted = share;
        std::nth_element(sorted.begin(), sorted.begin() + G / 2, sorted.end());
        share.back() = sorted[static_cast<std::size_t>(G / 2)]; // marker gene at median abundance
        const double total = std::accumulate(share.begin(), share.end(), 0.0);
        for (auto& v : share) {
            v /= total;
        }
    }
    std::vector<double> lib(static_cast<std::size_t>(N));
    {
        auto rng = stream(spec.seed, kLibrary);
        std::uniform_real_distribution<double> unit(spec.lib_min, spec.lib_max);
        for (auto& l : lib) {
            l = spec.lib_max > spec.lib_min ? unit(rng) : spec.lib_min;
        }
    }
    Eigen::MatrixXd subject_effect(G, S);
    {
        auto rng = stream(spec.seed, kSubject);
        std::normal_distribution<double> normal(0.0, 1.0);
        for (int s = 0; s < S; ++s) {
            for (int g = 0; g < G; ++g) {
                subject_effect(g, s) = spec.subject_sd * normal(rng);
            }
        }
    }

    // injections
    std::vector<int> injection(static_cast<std::size_t>(N), 0); // 1 contaminated, 2 outlier
    {
        auto rng = stream(spec.seed, kInjection);
        std::vector<int> order(static_cast<std::size_t>(N));
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        for (int k = 0; k < spec.contaminated_samples; ++k) {
            injection[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])] = 1;
        }
        for (int k = 0; k < spec.outlier_samples; ++k) {
            injection[static_cast<std::size_t>(order[static_cast<std::size_t>(spec.contaminated_samples + k)])] = 2;
        }
    }

    CountArray counts(G, N);
    {
        auto rng = stream(spec.seed, kCounts);
        std::normal_distribution<double> normal(0.0, 1.0);
        const double ln2 = std::log(2.0);
        for (int j = 0; j < N; ++j) {
            const auto& info = samples[static_cast<std::size_t>(j)];
            const int s = j / T;
            const int t = info.cid;
            for (int g = 0; g < G; ++g) {
                double eta = subject_effect(g, s);
                if (t >= 2) {
                    eta += ln2 * log2_fold[static_cast<std::size_t>(g)];
                    if (g < M) {
                        eta += ln2 * latent[static_cast<std::size_t>(t - 2)](s, g);
                    }
                }
                if (injection[static_cast<std::size_t>(j)] == 2) {
                    eta += spec.outlier_sdlog * normal(rng);
                }
                const double mu = lib[static_cast<std::size_t>(j)] * share[static_cast<std::size_t>(g)] * std::exp(eta);
                counts(g, j) = draw_nb(mu, spec.dispersion, rng);
            }
            if (injection[static_cast<std::size_t>(j)] == 1) {
                const double rest = static_cast<double>(counts.col(j).sum() - counts(G - 1, j));
                counts(G - 1, j) = static_cast<std::int64_t>(
                    std::ceil(spec.contamination_fraction / (1 - spec.contamination_fraction) * rest)) + 1;
            }
        }
    }

    // clinical table
    std::vector<ClinicalTable::Row> rows;
    {
        auto rng = stream(spec.seed, kClinical);
        std::normal_distribution<double> normal(0.0, 1.0);
        struct Var {
            double mean, sd, change;
        };
        const std::map<std::string, Var> base{{"bmi", {33, 4, -3}},         {"homa_ir", {3, 0.8, -0.5}},
                                              {"total_chol", {5, 0.8, -0.3}}, {"ldl", {3.2, 0.7, -0.2}},
                                              {"hdl", {1.2, 0.25, 0.05}},      {"waist", {105, 10, -8}}};
        const std::size_t V = variables.size();
        Eigen::MatrixXd center_effect(static_cast<Eigen::Index>(V), spec.n_centers);
        for (std::size_t v = 0; v < V; ++v) {
            for (int c = 0; c < spec.n_centers; ++c) {
                center_effect(static_cast<Eigen::Index>(v), c) = spec.center_sd * normal(rng);
            }
        }
        for (int s = 0; s < S; ++s) {
            const std::string subject = numbered("P", 4, s + 1);
            const int center = s % spec.n_centers;
            std::vector<double> baseline(V);
            for (std::size_t v = 0; v < V; ++v) {
                const auto& b = base.at(variables[v]);
                baseline[v] = std::max(b.mean + b.sd * normal(rng), b.mean / 3);
            }
            rows.push_back({subject, 1, baseline});
            for (int t = 2; t <= T; ++t) {
                std::vector<double> values(V);
                for (std::size_t v = 0; v < V; ++v) {
                    const auto& b = base.at(variables[v]);
                    double change = b.change + center_effect(static_cast<Eigen::Index>(v), center) + spec.clinical_noise * normal(rng);
                    for (const auto& l : links) {
                        if (l.variable == variables[v]) {
                            change += l.slope * latent[static_cast<std::size_t>(t - 2)](s, gene_index.at(l.gene_id));
                        }
                    }
                    values[v] = std::max(baseline[v] + change, b.mean / 3);
                }
                rows.push_back({subject, t, values});
            }
        }
    }

    out.counts = CountMatrix(gene_ids, [&] {
        std::vector<std::string> ids;
        for (const auto& s : samples) {
            ids.push_back(s.sample_id);
        }
        return ids;
    }(), std::move(counts));
    for (int j = 0; j < N; ++j) {
        if (injection[static_cast<std::size_t>(j)] != 0) {
            out.injections.push_back({samples[static_cast<std::size_t>(j)].sample_id,
                                      injection[static_cast<std::size_t>(j)] == 1 ? "contaminated" : "outlier"});
        }
    }
    out.meta = SampleMeta(std::move(samples));
    out.clinical = ClinicalTable(variables, std::move(rows));
    for (int g = 0; g < G; ++g) {
        int module = -1;
        if (g < M) {
            module = spec.module_pattern == PrecisionPattern::Block ? g / std::max(spec.precision.block_size, 2) : 0;
        }
        out.genes.push_back({gene_ids[static_cast<std::size_t>(g)], log2_fold[static_cast<std::size_t>(g)],
                             static_cast<bool>(is_de[static_cast<std::size_t>(g)]), module});
    }
    return out;
}

void write_simulation(const SimulatedData& data, const ScenarioSpec& spec, const std::filesystem::path& dir) {
    using textio::format_double;
    using textio::write_file_atomic;
    write_file_atomic(dir / "counts.tsv", format_counts(data.counts));
    write_file_atomic(dir / "meta.tsv", format_meta(data.meta));
    write_file_atomic(dir / "clinical.tsv", format_clinical(data.clinical));
    write_file_atomic(dir / "scenario.txt", format_scenario(spec));
    std::string genes = "gene_id\tlog2_fold\tis_de\tmodule\n";
    for (const auto& g : data.genes) {
        genes += g.gene_id + '\t' + format_double(g.log2_fold) + '\t' + (g.is_de ? "true" : "false") + '\t' +
                 std::to_string(g.module) + '\n';
    }
    write_file_atomic(dir / "truth_genes.tsv", genes);
    std::string edges = "source\ttarget\tpartial_corr\n";
    for (const auto& e : data.edges) {
        edges += e.source + '\t' + e.target + '\t' + format_double(e.partial_corr) + '\n';
    }
    write_file_atomic(dir / "truth_edges.tsv", edges);
    std::string links = "gene_id\tclinical_var\tslope\n";
    for (const auto& l : data.links) {
        links += l.gene_id + '\t' + l.variable + '\t' + format_double(l.slope) + '\n';
    }
    write_file_atomic(dir / "truth_clinical.tsv", links);
    std::string injections = "sample_id\tinjection\n";
    for (const auto& s : data.injections) {
        injections += s.sample_id + '\t' + s.injection + '\n';
    }
    write_file_atomic(dir / "truth_samples.tsv", injections);
}

namespace {

std::vector<std::vector<std::string>> read_table(const std::filesystem::path& path, std::size_t columns) {
    if (!std::filesystem::exists(path)) {
        throw Error(Errc::MissingArtifact, "missing truth table " + path.string());
    }
    const auto lines = textio::read_lines(path);
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) {
            continue;
        }
        const auto f = textio::split_tabs(lines[i]);
        if (f.size() != columns) {
            throw ParseError(ParseError::Kind::RaggedRow, path.string(), i + 1, "unexpected field count");
        }
        rows.emplace_back(f.begin(), f.end());
    }
    return rows;
}

double number_at(const std::vector<std::string>& row, std::size_t k, const std::filesystem::path& path) {
    const auto v = textio::parse_double(row[k]);
    if (!v) {
        throw ParseError(ParseError::Kind::BadValue, path.string(), 0, row[k]);
    }
    return *v;
}

} // namespace

Truth load_truth(const std::filesystem::path& dir) {
    Truth t;
    const auto gp = dir / "truth_genes.tsv";
    for (const auto& r : read_table(gp, 4)) {
        t.genes.push_back({r[0], number_at(r, 1, gp), r[2] == "true", static_cast<int>(number_at(r, 3, gp))});
    }
    const auto ep = dir / "truth_edges.tsv";
    for (const auto& r : read_table(ep, 3)) {
        t.edges.push_back({r[0], r[1], number_at(r, 2, ep)});
    }
    const auto cp = dir / "truth_clinical.tsv";
    for (const auto& r : read_table(cp, 3)) {
        t.links.push_back({r[0], r[1], number_at(r, 2, cp)});
    }
    for (const auto& r : read_table(dir / "truth_samples.tsv", 2)) {
        t.injections.push_back({r[0], r[1]});
    }
    return t;
}

} // namespace txnet::sim
