#pragma once

#include <string>
#include <vector>

namespace stockpick::csv {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

/// Reads a comma-separated file. Verifies the header matches `expected_header`
/// exactly and that every row has the same field count as the header.
/// Throws Error "EmptyFile" / "MalformedRow".
Table read_file(const std::string& path, const std::vector<std::string>& expected_header);

std::vector<std::string> split_line(const std::string& line);

/// Strict full-field numeric parses; throw Error "MalformedRow" on failure.
double parse_double(const std::string& field, const std::string& context);
long long parse_int(const std::string& field, const std::string& context);

/// Shortest decimal representation that round-trips the double bit-exactly.
std::string format_double(double value);

/// Writes content to `path` atomically (temp file in the same directory, then
/// rename).
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace stockpick::csv
