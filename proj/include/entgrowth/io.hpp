#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace entgrowth {

// printf-style %.<significant>g; NaN prints as "nan".
std::string format_number(double v, int significant = 10);

// Writes through a temporary sibling file and renames it into place, so a
// failed run never leaves a truncated artifact behind.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);

std::string read_text(const std::filesystem::path& path);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    // Throws IoError naming the file when the column is missing.
    std::size_t column(const std::string& name) const;
    std::vector<double> numbers(const std::string& name) const;
    std::string source;
};

// Plain comma-separated values, no quoting; every row must match the header width.
CsvTable read_csv(const std::filesystem::path& path);

// Parses JSON, reporting syntax errors with file:line.
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace entgrowth
