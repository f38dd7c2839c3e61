#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace kgi::csv {

// RFC 4180 quoting: fields containing a comma, quote or newline are quoted.
std::string escape(std::string_view field);
std::string join(const std::vector<std::string>& fields);

// Parses one record; throws ParseError on an unterminated quote.
std::vector<std::string> split(std::string_view line);

// Header row first. Blank lines are skipped.
std::vector<std::vector<std::string>> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::vector<std::vector<std::string>>& rows);

// Shortest decimal that reads back to the same double ("inf"/"-inf"/"nan"
// for non-finite values).
std::string format_double(double v);
// 12 significant digits, the precision used by report tables.
std::string format_double12(double v);
double parse_double(std::string_view s);

}  // namespace kgi::csv
