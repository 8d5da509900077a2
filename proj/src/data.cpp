#include "txnet/data.hpp"

#include "txnet/error.hpp"
#include "txnet/textio.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace txnet {

namespace {

using textio::split_tabs;
using PK = ParseError::Kind;

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        auto pos = text.find('\n', start);
        if (pos == std::string_view::npos) {
            pos = text.size();
        }
        auto line = text.substr(start, pos - start);
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        lines.push_back(line);
        start = pos + 1;
    }
    // A trailing blank line is tolerated; interior blank lines are not.
    while (!lines.empty() && lines.back().empty()) {
        lines.pop_back();
    }
    return lines;
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(Errc::Io, "cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string key_of(std::string_view subject, int cid) {
    std::string key(subject);
    key += '\x1f';
    key += std::to_string(cid);
    return key;
}

std::vector<std::string_view> require_columns(std::string_view header, const std::vector<std::string>& expected,
                                              const std::string& source) {
    auto cols = split_tabs(header);
    if (cols.size() < expected.size()) {
        throw ParseError(PK::MissingColumn, source, 1, expected[cols.size()]);
    }
    for (std::size_t i = 0; i < expected.size(); ++i) {
        if (cols[i] != expected[i]) {
            throw ParseError(PK::BadHeader, source, 1, "expected '" + expected[i] + "' got '" + std::string(cols[i]) + "'");
        }
    }
    return cols;
}

int parse_cid(std::string_view field, const std::string& source, std::size_t line) {
    const auto cid = textio::parse_int(field);
    if (!cid || *cid < 1 || *cid > 3) {
        throw ParseError(PK::BadValue, source, line, "cid '" + std::string(field) + "'");
    }
    return static_cast<int>(*cid);
}

} // namespace

// ---------------------------------------------------------------------------
// CountMatrix

CountMatrix::CountMatrix(std::vector<std::string> gene_ids, std::vector<std::string> sample_ids, CountArray counts)
    : gene_ids_(std::move(gene_ids)), sample_ids_(std::move(sample_ids)), counts_(std::move(counts)) {
    if (static_cast<Index>(gene_ids_.size()) != counts_.rows() ||
        static_cast<Index>(sample_ids_.size()) != counts_.cols()) {
        throw Error(Errc::InvalidArgument, "count matrix dimensions do not match identifiers");
    }
    for (Index i = 0; i < static_cast<Index>(gene_ids_.size()); ++i) {
        if (!gene_lookup_.emplace(gene_ids_[i], i).second) {
            throw ParseError(PK::DuplicateGeneId, "", 0, gene_ids_[i]);
        }
    }
    for (Index j = 0; j < static_cast<Index>(sample_ids_.size()); ++j) {
        if (!sample_lookup_.emplace(sample_ids_[j], j).second) {
            throw ParseError(PK::DuplicateSampleId, "", 0, sample_ids_[j]);
        }
    }
    if (counts_.size() > 0 && counts_.minCoeff() < 0) {
        throw Error(Errc::InvalidArgument, "negative count");
    }
    lib_sizes_ = counts_.colwise().sum().transpose();
}

std::optional<Index> CountMatrix::gene_index(std::string_view id) const {
    auto it = gene_lookup_.find(std::string(id));
    if (it == gene_lookup_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::optional<Index> CountMatrix::sample_index(std::string_view id) const {
    auto it = sample_lookup_.find(std::string(id));
    if (it == sample_lookup_.end()) {
        return std::nullopt;
    }
    return it->second;
}

CountMatrix CountMatrix::select_samples(std::span<const Index> columns) const {
    CountArray sub(n_genes(), static_cast<Index>(columns.size()));
    std::vector<std::string> ids;
    ids.reserve(columns.size());
    for (std::size_t k = 0; k < columns.size(); ++k) {
        sub.col(static_cast<Index>(k)) = counts_.col(columns[k]);
        ids.push_back(sample_ids_[columns[k]]);
    }
    return CountMatrix(gene_ids_, std::move(ids), std::move(sub));
}

CountMatrix CountMatrix::select_genes(std::span<const Index> rows) const {
    CountArray sub(static_cast<Index>(rows.size()), n_samples());
    std::vector<std::string> ids;
    ids.reserve(rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k) {
        sub.row(static_cast<Index>(k)) = counts_.row(rows[k]);
        ids.push_back(gene_ids_[rows[k]]);
    }
    return CountMatrix(std::move(ids), sample_ids_, std::move(sub));
}

CountMatrix parse_counts(std::string_view text, const std::string& source) {
    const auto lines = split_lines(text);
    if (lines.empty()) {
        throw ParseError(PK::EmptyFile, source, 0, "no header");
    }
    const auto header = split_tabs(lines[0]);
    if (header.empty() || header[0] != "gene_id") {
        throw ParseError(PK::BadHeader, source, 1, "first column must be gene_id");
    }
    std::vector<std::string> samples;
    std::unordered_set<std::string> seen_samples;
    for (std::size_t j = 1; j < header.size(); ++j) {
        std::string id(header[j]);
        if (id.empty()) {
            throw ParseError(PK::BadHeader, source, 1, "empty sample id");
        }
        if (!seen_samples.insert(id).second) {
            throw ParseError(PK::DuplicateSampleId, source, 1, id);
        }
        samples.push_back(std::move(id));
    }
    if (samples.empty()) {
        throw ParseError(PK::BadHeader, source, 1, "no sample columns");
    }
    if (lines.size() < 2) {
        throw ParseError(PK::EmptyFile, source, 1, "no gene rows");
    }

    const Index n_samples = static_cast<Index>(samples.size());
    const Index n_genes = static_cast<Index>(lines.size() - 1);
    CountArray counts(n_genes, n_samples);
    std::vector<std::string> genes;
    genes.reserve(lines.size() - 1);
    std::unordered_set<std::string> seen_genes;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        const std::size_t line_no = li + 1;
        const auto fields = split_tabs(lines[li]);
        if (static_cast<Index>(fields.size()) != n_samples + 1) {
            throw ParseError(PK::RaggedRow, source, line_no,
                             "expected " + std::to_string(n_samples + 1) + " fields, got " +
                                 std::to_string(fields.size()));
        }
        std::string gene(fields[0]);
        if (gene.empty()) {
            throw ParseError(PK::BadValue, source, line_no, "empty gene id");
        }
        if (!seen_genes.insert(gene).second) {
            throw ParseError(PK::DuplicateGeneId, source, line_no, gene);
        }
        const Index row = static_cast<Index>(li - 1);
        for (Index j = 0; j < n_samples; ++j) {
            const auto cell = fields[static_cast<std::size_t>(j) + 1];
            const auto value = textio::parse_int(cell);
            if (!value) {
                throw ParseError(PK::NonIntegerCount, source, line_no, "row " + std::to_string(line_no) + ": '" + std::string(cell) + "'");
            }
            if (*value < 0) {
                throw ParseError(PK::NegativeCount, source, line_no, "row " + std::to_string(line_no));
            }
            counts(row, j) = *value;
        }
        genes.push_back(std::move(gene));
    }
    return CountMatrix(std::move(genes), std::move(samples), std::move(counts));
}

CountMatrix load_counts(const std::filesystem::path& path) {
    return parse_counts(slurp(path), path.string());
}

std::string format_counts(const CountMatrix& m) {
    std::string out = "gene_id";
    for (const auto& s : m.sample_ids()) {
        out += '\t';
        out += s;
    }
    out += '\n';
    for (Index i = 0; i < m.n_genes(); ++i) {
        out += m.gene_ids()[static_cast<std::size_t>(i)];
        for (Index j = 0; j < m.n_samples(); ++j) {
            out += '\t';
            out += std::to_string(m.counts()(i, j));
        }
        out += '\n';
    }
    return out;
}

void write_counts(const CountMatrix& m, const std::filesystem::path& path) {
    textio::write_file_atomic(path, format_counts(m));
}

// ---------------------------------------------------------------------------
// SampleMeta

SampleMeta::SampleMeta(std::vector<SampleInfo> rows) : rows_(std::move(rows)) {
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        const auto& r = rows_[i];
        if (r.cid < 1 || r.cid > 3) {
            throw Error(Errc::InvalidArgument, "cid out of range for sample " + r.sample_id);
        }
        if (!by_sample_.emplace(r.sample_id, i).second) {
            throw ParseError(PK::DuplicateSampleId, "", 0, r.sample_id);
        }
        if (!by_subject_cid_.emplace(key_of(r.subject_id, r.cid), i).second) {
            throw ParseError(PK::DuplicateKey, "", 0, r.subject_id + "/cid" + std::to_string(r.cid));
        }
    }
}

const SampleInfo* SampleMeta::find(std::string_view sample_id) const {
    auto it = by_sample_.find(std::string(sample_id));
    return it == by_sample_.end() ? nullptr : &rows_[it->second];
}

const SampleInfo* SampleMeta::find(std::string_view subject_id, int cid) const {
    auto it = by_subject_cid_.find(key_of(subject_id, cid));
    return it == by_subject_cid_.end() ? nullptr : &rows_[it->second];
}

void SampleMeta::check_covers(const CountMatrix& m) const {
    for (const auto& s : m.sample_ids()) {
        if (find(s) == nullptr) {
            throw Error(Errc::InvalidArgument, "sample " + s + " has no metadata row");
        }
    }
}

SampleMeta parse_meta(std::string_view text, const std::string& source) {
    const auto lines = split_lines(text);
    if (lines.empty()) {
        throw ParseError(PK::EmptyFile, source, 0, "no header");
    }
    static const std::vector<std::string> columns{"sample_id", "subject_id", "cid", "center", "sex", "age", "batch"};
    require_columns(lines[0], columns, source);
    std::vector<SampleInfo> rows;
    std::unordered_set<std::string> seen;
    std::unordered_set<std::string> seen_keys;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        const std::size_t line_no = li + 1;
        const auto f = split_tabs(lines[li]);
        if (f.size() != columns.size()) {
            throw ParseError(PK::RaggedRow, source, line_no, "expected 7 fields");
        }
        SampleInfo row;
        row.sample_id = std::string(f[0]);
        row.subject_id = std::string(f[1]);
        row.cid = parse_cid(f[2], source, line_no);
        row.center = std::string(f[3]);
        if (f[4] == "M") {
            row.sex = Sex::Male;
        } else if (f[4] == "F") {
            row.sex = Sex::Female;
        } else {
            throw ParseError(PK::BadValue, source, line_no, "sex '" + std::string(f[4]) + "'");
        }
        const auto age = textio::parse_double(f[5]);
        if (!age || !std::isfinite(*age)) {
            throw ParseError(PK::BadValue, source, line_no, "age '" + std::string(f[5]) + "'");
        }
        row.age = *age;
        row.batch = std::string(f[6]);
        if (!seen.insert(row.sample_id).second) {
            throw ParseError(PK::DuplicateSampleId, source, line_no, row.sample_id);
        }
        if (!seen_keys.insert(key_of(row.subject_id, row.cid)).second) {
            throw ParseError(PK::DuplicateKey, source, line_no, row.subject_id + "/cid" + std::to_string(row.cid));
        }
        rows.push_back(std::move(row));
    }
    return SampleMeta(std::move(rows));
}

SampleMeta load_meta(const std::filesystem::path& path) {
    return parse_meta(slurp(path), path.string());
}

std::string format_meta(const SampleMeta& meta) {
    std::string out = "sample_id\tsubject_id\tcid\tcenter\tsex\tage\tbatch\n";
    for (const auto& r : meta.rows()) {
        out += r.sample_id + '\t' + r.subject_id + '\t' + std::to_string(r.cid) + '\t' + r.center + '\t' +
               (r.sex == Sex::Male ? "M" : "F") + '\t' + textio::format_double(r.age) + '\t' + r.batch + '\n';
    }
    return out;
}

// ---------------------------------------------------------------------------
// ClinicalTable

ClinicalTable::ClinicalTable(std::vector<std::string> variables, std::vector<Row> rows)
    : variables_(std::move(variables)), rows_(std::move(rows)) {
    const auto bmi = variable_index("bmi");
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        const auto& r = rows_[i];
        if (r.values.size() != variables_.size()) {
            throw Error(Errc::InvalidArgument, "clinical row width mismatch for " + r.subject_id);
        }
        for (double v : r.values) {
            if (std::isinf(v)) {
                throw Error(Errc::InvalidArgument, "non-finite clinical value for " + r.subject_id);
            }
        }
        if (bmi && !std::isnan(r.values[*bmi]) && r.values[*bmi] <= 0) {
            throw Error(Errc::InvalidArgument, "bmi must be positive for " + r.subject_id);
        }
        if (!by_key_.emplace(key_of(r.subject_id, r.cid), i).second) {
            throw ParseError(PK::DuplicateKey, "", 0, r.subject_id + "/cid" + std::to_string(r.cid));
        }
    }
}

std::optional<std::size_t> ClinicalTable::variable_index(std::string_view name) const {
    for (std::size_t i = 0; i < variables_.size(); ++i) {
        if (variables_[i] == name) {
            return i;
        }
    }
    return std::nullopt;
}

double ClinicalTable::value(std::string_view subject_id, int cid, std::size_t variable) const {
    auto it = by_key_.find(key_of(subject_id, cid));
    if (it == by_key_.end()) {
        return std::nan("");
    }
    return rows_[it->second].values.at(variable);
}

ClinicalTable parse_clinical(std::string_view text, const std::string& source) {
    const auto lines = split_lines(text);
    if (lines.empty()) {
        throw ParseError(PK::EmptyFile, source, 0, "no header");
    }
    const auto header = require_columns(lines[0], {"subject_id", "cid"}, source);
    std::vector<std::string> variables;
    for (std::size_t j = 2; j < header.size(); ++j) {
        variables.emplace_back(header[j]);
    }
    std::vector<ClinicalTable::Row> rows;
    std::unordered_set<std::string> seen;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        const std::size_t line_no = li + 1;
        const auto f = split_tabs(lines[li]);
        if (f.size() != header.size()) {
            throw ParseError(PK::RaggedRow, source, line_no, "expected " + std::to_string(header.size()) + " fields");
        }
        ClinicalTable::Row row;
        row.subject_id = std::string(f[0]);
        row.cid = parse_cid(f[1], source, line_no);
        for (std::size_t j = 2; j < f.size(); ++j) {
            const auto v = textio::parse_double(f[j]);
            if (!v || std::isinf(*v) || (std::isnan(*v) && f[j] != "NA")) {
                throw ParseError(PK::BadValue, source, line_no, variables[j - 2] + " '" + std::string(f[j]) + "'");
            }
            if (variables[j - 2] == "bmi" && !std::isnan(*v) && *v <= 0) {
                throw ParseError(PK::BadValue, source, line_no, "bmi must be positive");
            }
            row.values.push_back(*v);
        }
        if (!seen.insert(key_of(row.subject_id, row.cid)).second) {
            throw ParseError(PK::DuplicateKey, source, line_no, row.subject_id + "/cid" + std::to_string(row.cid));
        }
        rows.push_back(std::move(row));
    }
    return ClinicalTable(std::move(variables), std::move(rows));
}

ClinicalTable load_clinical(const std::filesystem::path& path) {
    return parse_clinical(slurp(path), path.string());
}

std::string format_clinical(const ClinicalTable& table) {
    std::string out = "subject_id\tcid";
    for (const auto& v : table.variables()) {
        out += '\t' + v;
    }
    out += '\n';
    for (const auto& r : table.rows()) {
        out += r.subject_id + '\t' + std::to_string(r.cid);
        for (double v : r.values) {
            out += '\t' + textio::format_double(v);
        }
        out += '\n';
    }
    return out;
}

std::vector<std::string> load_id_list(const std::filesystem::path& path) {
    std::vector<std::string> ids;
    for (auto& line : textio::read_lines(path)) {
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') {
            continue;
        }
        const auto last = line.find_last_not_of(" \t");
        ids.push_back(line.substr(first, last - first + 1));
    }
    return ids;
}

} // namespace txnet
