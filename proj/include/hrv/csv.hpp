#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace hrv {

/// Parsed CSV contents: header row plus string cells.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column_index(const std::string& name) const;  // throws Error("data") if absent
    bool has_column(const std::string& name) const;
};

/// Reads an RFC-4180-ish CSV (quoted fields, escaped quotes, LF or CRLF).
CsvTable read_csv(const std::filesystem::path& path);

/// Writes rows with minimal quoting. Creates parent directories.
void write_csv(const std::filesystem::path& path,
               const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

}  // namespace hrv
