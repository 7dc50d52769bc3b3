#pragma once

#include "kornlab/types.hpp"

#include <cstdio>
#include <string>
#include <vector>

namespace kornlab {

/// Shortest-round-trip style float formatting at 17 significant digits.
inline std::string format_real(Real v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// RFC-4180 CSV accumulator: header row, CRLF line endings, minimal quoting.
/// Files are written atomically (temp file + rename).
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    void add_row(std::vector<std::string> row);
    const std::vector<std::vector<std::string>>& rows() const { return rows_; }
    std::string to_string() const;
    void write(const std::string& path) const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

void write_file_atomic(const std::string& path, const std::string& content);

} // namespace kornlab
