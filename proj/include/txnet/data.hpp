#ifndef TXNET_DATA_HPP
#define TXNET_DATA_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace txnet {

using Index = Eigen::Index;
using CountArray = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;
using LibSizes = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;

/**
 * Integer gene x sample count table.
 *
 * Gene and sample identifiers are unique and keep their input order; library
 * sizes are always the exact column sums of the stored counts.
 */
class CountMatrix {
public:
    CountMatrix() = default;
    CountMatrix(std::vector<std::string> gene_ids, std::vector<std::string> sample_ids, CountArray counts);

    Index n_genes() const { return counts_.rows(); }
    Index n_samples() const { return counts_.cols(); }

    const std::vector<std::string>& gene_ids() const { return gene_ids_; }
    const std::vector<std::string>& sample_ids() const { return sample_ids_; }
    const CountArray& counts() const { return counts_; }
    const LibSizes& lib_sizes() const { return lib_sizes_; }

    std::optional<Index> gene_index(std::string_view id) const;
    std::optional<Index> sample_index(std::string_view id) const;

    /// Column subset in the given order; library sizes are recomputed.
    CountMatrix select_samples(std::span<const Index> columns) const;
    /// Row subset in the given order; library sizes are recomputed.
    CountMatrix select_genes(std::span<const Index> rows) const;

private:
    std::vector<std::string> gene_ids_;
    std::vector<std::string> sample_ids_;
    CountArray counts_;
    LibSizes lib_sizes_;
    std::unordered_map<std::string, Index> gene_lookup_;
    std::unordered_map<std::string, Index> sample_lookup_;
};

CountMatrix load_counts(const std::filesystem::path& path);
CountMatrix parse_counts(std::string_view text, const std::string& source = "");
std::string format_counts(const CountMatrix& m);
void write_counts(const CountMatrix& m, const std::filesystem::path& path);

enum class Sex { Male, Female };

struct SampleInfo {
    std::string sample_id;
    std::string subject_id;
    int cid = 1; // clinical investigation day, 1..3
    std::string center;
    Sex sex = Sex::Female;
    double age = 0;
    std::string batch;
};

class SampleMeta {
public:
    SampleMeta() = default;
    explicit SampleMeta(std::vector<SampleInfo> rows);

    const std::vector<SampleInfo>& rows() const { return rows_; }
    std::size_t size() const { return rows_.size(); }
    const SampleInfo* find(std::string_view sample_id) const;
    const SampleInfo* find(std::string_view subject_id, int cid) const;

    /// Throws unless every sample of `m` has exactly one row here.
    void check_covers(const CountMatrix& m) const;

private:
    std::vector<SampleInfo> rows_;
    std::unordered_map<std::string, std::size_t> by_sample_;
    std::unordered_map<std::string, std::size_t> by_subject_cid_;
};

SampleMeta load_meta(const std::filesystem::path& path);
SampleMeta parse_meta(std::string_view text, const std::string& source = "");
std::string format_meta(const SampleMeta& meta);

/// Per-subject, per-timepoint clinical measurements. Missing values are NaN.
class ClinicalTable {
public:
    struct Row {
        std::string subject_id;
        int cid = 1;
        std::vector<double> values;
    };

    ClinicalTable() = default;
    ClinicalTable(std::vector<std::string> variables, std::vector<Row> rows);

    const std::vector<std::string>& variables() const { return variables_; }
    const std::vector<Row>& rows() const { return rows_; }
    std::optional<std::size_t> variable_index(std::string_view name) const;
    /// NaN when the subject/timepoint or the value is absent.
    double value(std::string_view subject_id, int cid, std::size_t variable) const;

private:
    std::vector<std::string> variables_;
    std::vector<Row> rows_;
    std::unordered_map<std::string, std::size_t> by_key_;
};

inline const std::vector<std::string>& default_clinical_variables() {
    static const std::vector<std::string> names{"bmi", "homa_ir", "total_chol", "ldl", "hdl", "waist"};
    return names;
}

ClinicalTable load_clinical(const std::filesystem::path& path);
ClinicalTable parse_clinical(std::string_view text, const std::string& source = "");
std::string format_clinical(const ClinicalTable& table);

/// One identifier per line; blank lines and '#' comments ignored.
std::vector<std::string> load_id_list(const std::filesystem::path& path);

} // namespace txnet

#endif
