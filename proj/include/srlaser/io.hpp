#pragma once

// Plain-text config, CSV datasets and checksums.

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "srlaser/model.hpp"

namespace srl {

class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& what)
        : std::runtime_error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

/// `key = value` lines; `#` starts a comment. Later keys override earlier ones.
class Config {
public:
    static Config parse(const std::string& text, const std::string& origin = "<string>");
    static Config load(const std::filesystem::path& path);

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    std::int64_t get_int(const std::string& key) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;

    /// Comma-separated values, or `start:stop:count` for count evenly spaced points.
    std::vector<double> get_list(const std::string& key) const;
    std::vector<double> get_list(const std::string& key, std::vector<double> fallback) const;

    void set(const std::string& key, const std::string& value);

    /// Keys never read through a getter.
    std::vector<std::string> unused_keys() const;
    const std::map<std::string, std::string>& entries() const { return values_; }

private:
    std::map<std::string, std::string> values_;
    mutable std::map<std::string, bool> used_;
};

/// Reads the physical parameters (either input style) and derives them.
/// Scans over p_d pass the value to use when `p_d` itself is absent.
ParamInput param_input(const Config& cfg, std::optional<double> p_d_fallback = {});
SystemParams params_from_config(const Config& cfg, std::optional<double> p_d_fallback = {});

/// Shortest round-trip decimal form ("nan", "inf", "-inf" for non-finite values).
std::string format_double(double x);
double parse_double(const std::string& s);

/// Column-major numeric table with `#`-prefixed `key = value` metadata.
struct CsvTable {
    std::vector<std::pair<std::string, std::string>> meta;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> data; // one vector per column

    std::size_t rows() const { return data.empty() ? 0 : data.front().size(); }
    void add_column(std::string name, std::vector<double> values);
    const std::vector<double>& column(const std::string& name) const;
};

void write_csv(const std::filesystem::path& path, const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& path);

/// Metadata lines echoing every input and derived parameter.
std::vector<std::pair<std::string, std::string>> param_metadata(const SystemParams& p);

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

} // namespace srl
