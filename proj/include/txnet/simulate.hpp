#ifndef TXNET_SIMULATE_HPP
#define TXNET_SIMULATE_HPP

#include "txnet/contrast.hpp"
#include "txnet/data.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace txnet::sim {

/// Independent generator for one named component of a simulation, derived from the master seed.
std::mt19937_64 stream(std::uint64_t seed, std::uint64_t component);

enum class PrecisionPattern { None, Chain, Block, Random };

const char* pattern_name(PrecisionPattern pattern) noexcept;
PrecisionPattern parse_pattern(std::string_view text);

struct PrecisionOptions {
    double edge_min = 0.2;          // partial-correlation magnitude range before diagonal rescaling
    double edge_max = 0.35;
    double positive_fraction = 1.0; // share of edges with positive partial correlation
    int block_size = 15;
    double chord_probability = 0.15; // extra within-block edges on top of the ring
    double random_degree = 2.0;      // expected degree for the random pattern
};

/**
 * Sparse precision matrix with unit-scale diagonal. Off-diagonal entries are
 * -sign * magnitude; each diagonal is raised when needed so that the
 * off-diagonal absolute row sum is at most 0.9 of it.
 */
Eigen::MatrixXd planted_precision(Eigen::Index p, PrecisionPattern pattern, const PrecisionOptions& options,
                                  std::mt19937_64& rng);

struct TruthEdge {
    std::string source;
    std::string target;
    double partial_corr = 0;
};

std::vector<TruthEdge> precision_edges(const Eigen::MatrixXd& theta, const std::vector<std::string>& ids);

struct PrecisionSample {
    FoldChangeMatrix fc;
    Eigen::MatrixXd theta;
    std::vector<TruthEdge> edges;
};

/// n rows from N(0, theta^-1), drawn through the Cholesky factor of the covariance.
PrecisionSample simulate_fc_from_precision(Eigen::Index p, PrecisionPattern pattern, Eigen::Index n, std::uint64_t seed,
                                           const PrecisionOptions& options = {});

/**
 * Dense reference solver for the graphical lasso objective, proximal gradient
 * with backtracking; intended for p <= 8.
 */
Eigen::MatrixXd oracle_glasso(const Eigen::MatrixXd& S, double lambda, int max_iter = 200000);

struct DeGene {
    std::string gene_id;
    double fold = 1; // expected ratio of the later timepoints to the first
};

struct ClinicalLink {
    std::string gene_id;
    std::string variable;
    double slope = 0; // clinical change per unit latent log2 fold change
};

struct ScenarioSpec {
    std::uint64_t seed = 1;
    int n_subjects = 50;
    int n_genes = 2000;
    int n_centers = 6;
    int timepoints = 2;
    double lib_min = 1e6;
    double lib_max = 3e6;
    double dispersion = 0.1;
    double subject_sd = 0.3;     // per subject-gene baseline log-scale effect
    double expression_sdlog = 1.5;
    double expression_meanlog = 0.0;

    int de_count = 0;            // genes with a planted fold, taken from the start of the gene list
    double de_fold = 2.0;
    double de_up_fraction = 0.5;
    std::vector<DeGene> de_list; // explicit planted folds, applied after de_count

    PrecisionPattern module_pattern = PrecisionPattern::None;
    int module_genes = 0;        // the first module_genes planted-DE genes carry correlated fold changes
    double fc_sd = 0.6;          // scale of the latent per-subject log2 fold change
    PrecisionOptions precision;

    std::string clinical_var = "bmi"; // variable with planted partners
    int clinical_partners = 0;        // taken from the first module block
    double clinical_slope = -1.0;
    std::vector<ClinicalLink> clinical_links;
    double clinical_noise = 0.5;
    double center_sd = 0.5;

    int contaminated_samples = 0;
    double contamination_fraction = 0.3;
    int outlier_samples = 0;
    double outlier_sdlog = 4.0;
};

ScenarioSpec parse_scenario(std::string_view text, const std::string& source = "");
ScenarioSpec load_scenario(const std::filesystem::path& path);
std::string format_scenario(const ScenarioSpec& spec);

struct TruthGene {
    std::string gene_id;
    double log2_fold = 0;
    bool is_de = false;
    int module = -1; // block of the planted precision pattern, -1 outside it
};

struct TruthSample {
    std::string sample_id;
    std::string injection; // contaminated | outlier
};

struct SimulatedData {
    CountMatrix counts;
    SampleMeta meta;
    ClinicalTable clinical;
    std::vector<TruthGene> genes;
    std::vector<TruthEdge> edges;
    std::vector<ClinicalLink> links;
    std::vector<TruthSample> injections;
};

SimulatedData simulate_counts(const ScenarioSpec& spec);

/// counts.tsv, meta.tsv, clinical.tsv, scenario.txt and the truth_*.tsv tables.
void write_simulation(const SimulatedData& data, const ScenarioSpec& spec, const std::filesystem::path& dir);

struct Truth {
    std::vector<TruthGene> genes;
    std::vector<TruthEdge> edges;
    std::vector<ClinicalLink> links;
    std::vector<TruthSample> injections;
};

Truth load_truth(const std::filesystem::path& dir);

} // namespace txnet::sim

#endif
