#pragma once

#include "cvaod/model.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace cvaod {

/// A parsed CSV file: optional header plus string cells.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Index of a header column; throws DomainError when absent.
    std::size_t column(const std::string& name) const;
    double number(std::size_t row, const std::string& name) const;
};

/// Reads a comma-separated file. The first row is a header iff any of its
/// cells fails to parse as a number.
CsvTable read_csv(const std::filesystem::path& path);

/// Reads a T x s numeric series (header optional, one row per observation).
Matrix read_series_csv(const std::filesystem::path& path);

/// Writes a numeric matrix with the given header, one row per matrix row.
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m, const std::vector<std::string>& header);

/// Formats a double so that it parses back to the same value.
std::string format_number(double v);

}  // namespace cvaod
