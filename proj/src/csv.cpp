#include "sgp/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sgp {

std::string format_cell(const CsvCell& cell) {
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>) {
                char buf[40];
                std::snprintf(buf, sizeof(buf), "%.17g", v);
                return buf;
            } else if constexpr (std::is_same_v<T, long>) {
                return std::to_string(v);
            } else {
                return v;
            }
        },
        cell);
}

void emit_csv(const CsvTable& table, const std::string& path) {
    std::ofstream out(path, std::ios::binary);  // binary keeps LF endings
    if (!out) throw std::runtime_error("emit_csv: cannot open " + path);
    for (std::size_t i = 0; i < table.header.size(); ++i) {
        if (i) out << ',';
        out << table.header[i];
    }
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            out << format_cell(row[i]);
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("emit_csv: write failed for " + path);
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_csv: cannot open " + path);
    CsvTable table;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (line.empty()) continue;
        if (line.back() == ',') fields.push_back("");
        if (first) {
            table.header = fields;
            first = false;
            continue;
        }
        std::vector<CsvCell> row;
        row.reserve(fields.size());
        for (const auto& f : fields) {
            double d = 0.0;
            auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), d);
            if (ec == std::errc() && p == f.data() + f.size())
                row.emplace_back(d);
            else
                row.emplace_back(f);
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

}  // namespace sgp
