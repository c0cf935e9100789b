#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace genefilter::textio {

// Shortest decimal form that parses back to the identical double.
std::string format_double(double value);

// Strict parse of a whole field; nullopt on empty, partial or non-finite input.
std::optional<double> parse_double(std::string_view text);

std::vector<std::string_view> split(std::string_view line, char delimiter);

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

} // namespace genefilter::textio
