#include "kornlab/csv.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace kornlab {

namespace {

std::string escape(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += "\"";
    return out;
}

} // namespace

void CsvTable::add_row(std::vector<std::string> row) {
    if (row.size() != header_.size())
        throw error("CsvTable: row width " + std::to_string(row.size()) + " != header width " +
                    std::to_string(header_.size()));
    rows_.push_back(std::move(row));
}

std::string CsvTable::to_string() const {
    std::string out;
    auto emit = [&out](const std::vector<std::string>& row) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += escape(row[i]);
        }
        out += "\r\n";
    };
    emit(header_);
    for (const auto& row : rows_) emit(row);
    return out;
}

void CsvTable::write(const std::string& path) const { write_file_atomic(path, to_string()); }

void write_file_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw error("cannot open '" + tmp.string() + "' for writing");
        os.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!os) throw error("short write to '" + tmp.string() + "'");
    }
    fs::rename(tmp, target);
}

} // namespace kornlab
