#include "orca/io.hpp"

#include "orca/error.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace orca::io {

std::string version() { return "0.3.1"; }

std::size_t Table::column_index(const std::string& name) const {
    for (std::size_t k = 0; k < columns.size(); ++k)
        if (columns[k] == name) return k;
    throw ConfigError("table has no column '" + name + "'");
}

std::vector<double> Table::column(const std::string& name) const { return column(column_index(name)); }

std::vector<double> Table::column(std::size_t k) const {
    if (k >= columns.size()) throw ConfigError("column index out of range");
    std::vector<double> v;
    v.reserve(rows.size());
    for (const auto& r : rows) v.push_back(r[k]);
    return v;
}

void Table::add_row(std::vector<double> row) {
    if (row.size() != columns.size()) throw DomainError("row width does not match the header");
    rows.push_back(std::move(row));
}

std::string to_csv(const Table& t) {
    std::string out;
    for (std::size_t k = 0; k < t.columns.size(); ++k) {
        if (k) out += ',';
        out += t.columns[k];
    }
    out += '\n';
    char buf[32];
    for (const auto& r : t.rows) {
        for (std::size_t k = 0; k < r.size(); ++k) {
            if (k) out += ',';
            std::snprintf(buf, sizeof buf, "%.17g", r[k]);
            out += buf;
        }
        out += '\n';
    }
    return out;
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(',', start);
        cells.push_back(trim(line.substr(start, pos == std::string_view::npos ? line.npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return cells;
}

double parse_number(std::string_view s, std::size_t line_no) {
    std::string tmp(s);
    if (tmp == "nan" || tmp == "inf" || tmp == "-inf") return std::stod(tmp);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
        throw ConfigError("csv line " + std::to_string(line_no) + ": '" + tmp + "' is not a number");
    return v;
}

} // namespace

Table parse_csv(std::string_view text) {
    Table t;
    std::size_t line_no = 0;
    bool header = true;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        line = trim(line);
        if (line.empty() || line.front() == '#') continue;
        const auto cells = split(line);
        if (header) {
            for (auto c : cells) t.columns.emplace_back(c);
            header = false;
            continue;
        }
        if (cells.size() != t.columns.size())
            throw ConfigError("csv line " + std::to_string(line_no) + ": expected " + std::to_string(t.columns.size()) +
                              " cells");
        std::vector<double> row;
        for (auto c : cells) row.push_back(parse_number(c, line_no));
        t.rows.push_back(std::move(row));
    }
    if (header) throw ConfigError("csv input has no header row");
    return t;
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_csv(const std::filesystem::path& path, const Table& t) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    out << to_csv(t);
}

Table read_csv(const std::filesystem::path& path) { return parse_csv(read_text(path)); }

std::uint64_t fnv1a(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string config_hash(const nlohmann::json& config) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(config.dump())));
    return buf;
}

nlohmann::json provenance(const nlohmann::json& config) {
    return {{"config_hash", config_hash(config)}, {"version", version()}};
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    out << j.dump(2) << '\n';
}

} // namespace orca::io
