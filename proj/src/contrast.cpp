#include "txnet/contrast.hpp"

#include "txnet/error.hpp"
#include "txnet/textio.hpp"

#include <fstream>
#include <sstream>
#include <unordered_set>

namespace txnet {

Contrast Contrast::parse(std::string_view text) {
    if (text.size() != 3 || text[1] != '-' || text[0] < '1' || text[0] > '3' || text[2] < '1' || text[2] > '3' ||
        text[0] >= text[2]) {
        throw Error(Errc::InvalidArgument, "contrast must be one of 1-2, 1-3, 2-3; got '" + std::string(text) + "'");
    }
    return Contrast{text[0] - '0', text[2] - '0'};
}

std::string format_fold_changes(const FoldChangeMatrix& fc) {
    std::string out = "subject_id";
    for (const auto& g : fc.gene_ids) {
        out += '\t' + g;
    }
    out += '\n';
    for (std::size_t s = 0; s < fc.subject_ids.size(); ++s) {
        out += fc.subject_ids[s];
        for (Eigen::Index g = 0; g < fc.values.cols(); ++g) {
            out += '\t' + textio::format_double(fc.values(static_cast<Eigen::Index>(s), g));
        }
        out += '\n';
    }
    return out;
}

FoldChangeMatrix parse_fold_changes(std::string_view text, Contrast contrast, const std::string& source) {
    using PK = ParseError::Kind;
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
        if (!line.empty()) {
            lines.push_back(line);
        }
        start = pos + 1;
    }
    if (lines.empty()) {
        throw ParseError(PK::EmptyFile, source, 0, "no header");
    }
    const auto header = textio::split_tabs(lines[0]);
    if (header[0] != "subject_id") {
        throw ParseError(PK::BadHeader, source, 1, "first column must be subject_id");
    }
    FoldChangeMatrix fc;
    fc.contrast = contrast;
    std::unordered_set<std::string> seen;
    for (std::size_t j = 1; j < header.size(); ++j) {
        if (!seen.emplace(header[j]).second) {
            throw ParseError(PK::DuplicateGeneId, source, 1, std::string(header[j]));
        }
        fc.gene_ids.emplace_back(header[j]);
    }
    fc.values.resize(static_cast<Eigen::Index>(lines.size() - 1), static_cast<Eigen::Index>(fc.gene_ids.size()));
    for (std::size_t li = 1; li < lines.size(); ++li) {
        const auto f = textio::split_tabs(lines[li]);
        if (f.size() != header.size()) {
            throw ParseError(PK::RaggedRow, source, li + 1, "expected " + std::to_string(header.size()) + " fields");
        }
        fc.subject_ids.emplace_back(f[0]);
        for (std::size_t j = 1; j < f.size(); ++j) {
            const auto v = textio::parse_double(f[j]);
            if (!v) {
                throw ParseError(PK::BadValue, source, li + 1, std::string(f[j]));
            }
            fc.values(static_cast<Eigen::Index>(li - 1), static_cast<Eigen::Index>(j - 1)) = *v;
        }
    }
    return fc;
}

FoldChangeMatrix load_fold_changes(const std::filesystem::path& path, Contrast contrast) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(Errc::Io, "cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_fold_changes(ss.str(), contrast, path.string());
}

} // namespace txnet
