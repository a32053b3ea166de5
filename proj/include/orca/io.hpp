#pragma once

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace orca::io {

std::string version();

// Numeric table with a single header row. Cells are written with 17
// significant digits, so a write/read cycle is exact.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    std::size_t column_index(const std::string& name) const;  // ConfigError if absent
    std::vector<double> column(const std::string& name) const;
    std::vector<double> column(std::size_t k) const;
    void add_row(std::vector<double> row);  // DomainError on width mismatch
};

std::string to_csv(const Table& t);
Table parse_csv(std::string_view text);  // ConfigError on malformed input
void write_csv(const std::filesystem::path& path, const Table& t);
Table read_csv(const std::filesystem::path& path);

std::uint64_t fnv1a(std::string_view data);
// 16 hex digits of FNV-1a over the compact dump of the config document.
std::string config_hash(const nlohmann::json& config);

// {"config_hash": ..., "version": ...}
nlohmann::json provenance(const nlohmann::json& config);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);
std::string read_text(const std::filesystem::path& path);

} // namespace orca::io
