#ifndef TXNET_CONTRAST_HPP
#define TXNET_CONTRAST_HPP

#include <Eigen/Dense>

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace txnet {

/// Pair of timepoints compared, e.g. "1-2" for CID1 vs CID2.
struct Contrast {
    int from = 1;
    int to = 2;

    std::string label() const { return std::to_string(from) + "-" + std::to_string(to); }
    static Contrast parse(std::string_view text);

    friend bool operator==(const Contrast&, const Contrast&) = default;
};

/**
 * Per-subject paired log2 fold changes, subjects x genes. Only subjects
 * observed at both timepoints of the contrast appear.
 */
struct FoldChangeMatrix {
    std::vector<std::string> subject_ids;
    std::vector<std::string> gene_ids;
    Eigen::MatrixXd values;
    Contrast contrast;
};

std::string format_fold_changes(const FoldChangeMatrix& fc);
FoldChangeMatrix parse_fold_changes(std::string_view text, Contrast contrast, const std::string& source = "");
FoldChangeMatrix load_fold_changes(const std::filesystem::path& path, Contrast contrast);

} // namespace txnet

#endif
