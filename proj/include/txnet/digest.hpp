#ifndef TXNET_DIGEST_HPP
#define TXNET_DIGEST_HPP

#include <filesystem>
#include <string>
#include <string_view>

namespace txnet {

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

} // namespace txnet

#endif
