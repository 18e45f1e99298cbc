#pragma once

#include <string>
#include <variant>
#include <vector>

namespace sgp {

using CsvCell = std::variant<double, long, std::string>;

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<CsvCell>> rows;
};

// Header row then one record per line, fixed column order, doubles with 17
// significant digits, LF line endings. Throws std::runtime_error naming the
// path on I/O failure.
void emit_csv(const CsvTable& table, const std::string& path);

std::string format_cell(const CsvCell& cell);

// Minimal reader for the files emit_csv writes (no quoting/escaping).
CsvTable read_csv(const std::string& path);

}  // namespace sgp
