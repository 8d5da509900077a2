#ifndef TXNET_TEST_HELPERS_HPP
#define TXNET_TEST_HELPERS_HPP

#include "txnet/data.hpp"

#include <filesystem>
#include <fstream>
#include <string>

namespace testing {

inline std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::path(TXNET_TEST_TMP) / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream(path, std::ios::binary) << text;
}

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

inline txnet::CountMatrix matrix(const txnet::CountArray& counts) {
    std::vector<std::string> genes, samples;
    for (Eigen::Index i = 0; i < counts.rows(); ++i) {
        genes.push_back("g" + std::to_string(i + 1));
    }
    for (Eigen::Index j = 0; j < counts.cols(); ++j) {
        samples.push_back("s" + std::to_string(j + 1));
    }
    return txnet::CountMatrix(genes, samples, counts);
}

} // namespace testing

#endif
