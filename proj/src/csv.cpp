#include "stockpick/csv.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "stockpick/errors.hpp"

namespace stockpick::csv {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
        std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

Table read_file(const std::string& path, const std::vector<std::string>& expected_header) {
    std::ifstream in(path);
    if (!in) throw Error::data("EmptyFile", "cannot open '" + path + "'");

    Table table;
    std::string line;
    bool saw_header = false;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_line(line);
        if (!saw_header) {
            if (fields != expected_header) {
                std::string want;
                for (const auto& h : expected_header) {
                    if (!want.empty()) want += ',';
                    want += h;
                }
                throw Error::data("MalformedRow",
                                  path + ": expected header '" + want + "', got '" + line + "'");
            }
            table.header = fields;
            saw_header = true;
            continue;
        }
        if (fields.size() != expected_header.size()) {
            throw Error::data("MalformedRow", path + ":" + std::to_string(line_no) +
                                                  ": wrong field count in '" + line + "'");
        }
        table.rows.push_back(std::move(fields));
    }
    if (!saw_header || table.rows.empty()) {
        throw Error::data("EmptyFile", path + ": no data rows");
    }
    return table;
}

double parse_double(const std::string& field, const std::string& context) {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
        throw Error::data("MalformedRow", context + ": bad number '" + field + "'");
    }
    return value;
}

long long parse_int(const std::string& field, const std::string& context) {
    long long value = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
        throw Error::data("MalformedRow", context + ": bad integer '" + field + "'");
    }
    return value;
}

std::string format_double(double value) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    (void)ec;
    return std::string(buf, ptr);
}

void write_file_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error::data("WriteFailed", "cannot open '" + tmp.string() + "'");
        out << content;
        if (!out) throw Error::data("WriteFailed", "short write to '" + tmp.string() + "'");
    }
    fs::rename(tmp, target);
}

}  // namespace stockpick::csv
