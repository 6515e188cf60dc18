#include "cvaod/csv.hpp"

#include "cvaod/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace cvaod {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) {
        const auto first = cell.find_first_not_of(" \t\r");
        const auto last = cell.find_last_not_of(" \t\r");
        cells.push_back(first == std::string::npos ? std::string() : cell.substr(first, last - first + 1));
    }
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    const char* begin = s.data();
    const char* end = begin + s.size();
    if (*begin == '+') ++begin;
    auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc() && ptr == end;
}

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    throw DomainError("CSV has no column '" + name + "'");
}

double CsvTable::number(std::size_t row, const std::string& name) const {
    const auto& cell = rows.at(row).at(column(name));
    double v = 0.0;
    if (!parse_double(cell, v)) throw DomainError("CSV cell '" + cell + "' in column " + name + " is not a number");
    return v;
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open " + path.string());
    CsvTable table;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        auto cells = split_line(line);
        if (first) {
            first = false;
            bool numeric = true;
            double dummy = 0.0;
            for (const auto& c : cells) numeric = numeric && parse_double(c, dummy);
            if (!numeric) {
                table.header = std::move(cells);
                continue;
            }
        }
        table.rows.push_back(std::move(cells));
    }
    return table;
}

Matrix read_series_csv(const std::filesystem::path& path) {
    const CsvTable table = read_csv(path);
    if (table.rows.empty()) throw DomainError(path.string() + " contains no observations");
    const std::size_t s = table.rows.front().size();
    if (!table.header.empty() && table.header.size() != s)
        throw DomainError(path.string() + ": header and data widths differ");
    Matrix data(static_cast<Index>(table.rows.size()), static_cast<Index>(s));
    for (std::size_t t = 0; t < table.rows.size(); ++t) {
        const auto& row = table.rows[t];
        if (row.size() != s)
            throw DomainError(path.string() + ": row " + std::to_string(t + 1) + " has " +
                              std::to_string(row.size()) + " columns, expected " + std::to_string(s));
        for (std::size_t k = 0; k < s; ++k) {
            double v = 0.0;
            if (!parse_double(row[k], v) || !std::isfinite(v))
                throw DomainError(path.string() + ": non-numeric value '" + row[k] + "'");
            data(static_cast<Index>(t), static_cast<Index>(k)) = v;
        }
    }
    return data;
}

std::string format_number(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) return "nan";
    return std::string(buf, ptr);
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m, const std::vector<std::string>& header) {
    if (static_cast<Index>(header.size()) != m.cols()) throw DomainError("CSV header width must match matrix columns");
    std::ofstream out(path);
    if (!out) throw DomainError("cannot write " + path.string());
    for (std::size_t k = 0; k < header.size(); ++k) out << (k ? "," : "") << header[k];
    out << '\n';
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index k = 0; k < m.cols(); ++k) out << (k ? "," : "") << format_number(m(i, k));
        out << '\n';
    }
}

}  // namespace cvaod
