#include "entgrowth/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "entgrowth/errors.hpp"

namespace entgrowth {

std::string format_number(double v, int significant) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", significant, v);
    return buf;
}

void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path tmp = path;
    tmp += ".partial";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) {
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw IoError("write failed: " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError("cannot move " + tmp.string() + " into place");
    }
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

nlohmann::json read_json(const std::filesystem::path& path) {
    const std::string text = read_text(path);
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        const auto upto = std::min<std::size_t>(e.byte, text.size());
        const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
        throw ConfigError(path.string() + ":" + std::to_string(line) + ": " + e.what());
    }
}

namespace {

std::vector<std::string> split_commas(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw IoError(source + ": missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
}

std::vector<double> CsvTable::numbers(const std::string& name) const {
    const std::size_t c = column(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const std::string& cell = rows[r][c];
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(cell, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != cell.size())
            throw IoError(source + ":" + std::to_string(r + 2) + ": column '" + name + "' is not a number: '" + cell +
                          "'");
        out.push_back(v);
    }
    return out;
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::istringstream in(read_text(path));
    CsvTable t;
    t.source = path.string();
    std::string line;
    if (!std::getline(in, line)) throw IoError(t.source + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    t.header = split_commas(line);
    long lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto cells = split_commas(line);
        if (cells.size() != t.header.size())
            throw IoError(t.source + ":" + std::to_string(lineno) + ": expected " + std::to_string(t.header.size()) +
                          " fields, got " + std::to_string(cells.size()));
        t.rows.push_back(std::move(cells));
    }
    return t;
}

}  // namespace entgrowth
