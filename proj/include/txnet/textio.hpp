#ifndef TXNET_TEXTIO_HPP
#define TXNET_TEXTIO_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

// Small helpers shared by every reader/writer: tab splitting, shortest
// round-trip number formatting, and atomic file replacement.

namespace txnet::textio {

std::vector<std::string_view> split_tabs(std::string_view line);

/// Reads a whole file and splits it into lines with any trailing '\r' removed.
std::vector<std::string> read_lines(const std::filesystem::path& path);

/// Shortest representation that parses back to the identical double.
std::string format_double(double value);

std::optional<double> parse_double(std::string_view text);
std::optional<std::int64_t> parse_int(std::string_view text);

/// Writes to a sibling temporary file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

} // namespace txnet::textio

#endif
