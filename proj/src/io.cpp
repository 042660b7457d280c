#include "srlaser/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <openssl/evp.h>

namespace srl {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) out.push_back(trim(cur));
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

} // namespace

Config Config::parse(const std::string& text, const std::string& origin) {
    Config c;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("", origin + ":" + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(std::string_view(t).substr(0, eq));
        if (key.empty()) throw ConfigError("", origin + ":" + std::to_string(lineno) + ": empty key");
        c.set(key, trim(std::string_view(t).substr(eq + 1)));
    }
    return c;
}

Config Config::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path.string());
}

void Config::set(const std::string& key, const std::string& value) {
    values_[key] = value;
    used_.try_emplace(key, false);
}

bool Config::has(const std::string& key) const { return values_.contains(key); }

std::string Config::get_string(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError(key, "missing");
    used_[key] = true;
    return it->second;
}

double Config::get_double(const std::string& key) const {
    const std::string v = get_string(key);
    try {
        return parse_double(v);
    } catch (const std::invalid_argument&) {
        throw ConfigError(key, "not a number: '" + v + "'");
    }
}

double Config::get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

std::int64_t Config::get_int(const std::string& key) const {
    const double v = get_double(key);
    if (!(std::abs(v) < 9.0e15) || v != std::floor(v)) throw ConfigError(key, "not an integer");
    return static_cast<std::int64_t>(v);
}

std::int64_t Config::get_int(const std::string& key, std::int64_t fallback) const {
    return has(key) ? get_int(key) : fallback;
}

std::vector<double> Config::get_list(const std::string& key) const {
    const std::string v = get_string(key);
    std::vector<double> out;
    try {
        if (v.find(':') != std::string::npos) {
            const auto parts = split(v, ':');
            if (parts.size() != 3) throw ConfigError(key, "range must be start:stop:count");
            const double a = parse_double(parts[0]), b = parse_double(parts[1]);
            const double nd = parse_double(parts[2]);
            if (!(nd >= 1.0) || nd != std::floor(nd)) throw ConfigError(key, "range count must be a positive integer");
            const auto n = static_cast<std::size_t>(nd);
            for (std::size_t k = 0; k < n; ++k)
                out.push_back(n == 1 ? a : a + (b - a) * static_cast<double>(k) / static_cast<double>(n - 1));
            if (n > 1) out.back() = b;
        } else {
            for (const auto& s : split(v, ',')) out.push_back(parse_double(s));
        }
    } catch (const std::invalid_argument&) {
        throw ConfigError(key, "not a number list: '" + v + "'");
    }
    if (out.empty()) throw ConfigError(key, "empty list");
    return out;
}

std::vector<double> Config::get_list(const std::string& key, std::vector<double> fallback) const {
    return has(key) ? get_list(key) : std::move(fallback);
}

std::vector<std::string> Config::unused_keys() const {
    std::vector<std::string> out;
    for (const auto& [k, used] : used_)
        if (!used) out.push_back(k);
    return out;
}

ParamInput param_input(const Config& cfg, std::optional<double> p_d_fallback) {
    ParamInput in;
    if (cfg.has("N")) in.N = cfg.get_int("N");
    if (cfg.has("p_d"))
        in.p_d = cfg.get_double("p_d");
    else if (p_d_fallback)
        in.p_d = *p_d_fallback;
    if (cfg.has("Omega")) in.Omega = cfg.get_double("Omega");
    if (cfg.has("kappa")) in.kappa = cfg.get_double("kappa");
    if (cfg.has("V")) in.V = cfg.get_double("V");
    if (cfg.has("bad_cavity_ratio")) in.bad_cavity_ratio = cfg.get_double("bad_cavity_ratio");
    if (!in.Omega && !in.V) in.V = 1.0;
    if (in.V && !in.kappa && !in.bad_cavity_ratio) in.bad_cavity_ratio = 10.0;
    in.gamma_plus = cfg.get_double("gamma_plus", 0.0);
    in.gamma_minus = cfg.get_double("gamma_minus", 0.0);
    in.gamma_z = cfg.get_double("gamma_z", 0.0);
    return in;
}

SystemParams params_from_config(const Config& cfg, std::optional<double> p_d_fallback) {
    return from_input(param_input(cfg, p_d_fallback));
}

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    std::array<char, 32> buf{};
    const auto r = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    return std::string(buf.data(), r.ptr);
}

double parse_double(const std::string& s) {
    const std::string t = trim(s);
    double v = 0.0;
    const char* b = t.data();
    const char* e = t.data() + t.size();
    if (!t.empty() && *b == '+') ++b;
    const auto r = std::from_chars(b, e, v);
    if (t.empty() || r.ec != std::errc() || r.ptr != e) throw std::invalid_argument("not a number: '" + t + "'");
    return v;
}

void CsvTable::add_column(std::string name, std::vector<double> values) {
    if (!data.empty() && values.size() != rows()) throw std::invalid_argument("column length mismatch: " + name);
    columns.push_back(std::move(name));
    data.push_back(std::move(values));
}

const std::vector<double>& CsvTable::column(const std::string& name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw std::out_of_range("no column '" + name + "'");
    return data[static_cast<std::size_t>(it - columns.begin())];
}

void write_csv(const std::filesystem::path& path, const CsvTable& t) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    for (const auto& [k, v] : t.meta) out << "# " << k << " = " << v << '\n';
    for (std::size_t c = 0; c < t.columns.size(); ++c) out << (c ? "," : "") << t.columns[c];
    out << '\n';
    const std::size_t n = t.rows();
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < t.columns.size(); ++c) out << (c ? "," : "") << format_double(t.data[c][r]);
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    CsvTable t;
    std::string line;
    bool header = false;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (line[0] == '#') {
            const std::string body = trim(std::string_view(line).substr(1));
            const auto eq = body.find(" = ");
            if (eq == std::string::npos)
                t.meta.emplace_back(body, "");
            else
                t.meta.emplace_back(body.substr(0, eq), body.substr(eq + 3));
            continue;
        }
        const auto cells = split(line, ',');
        if (!header) {
            t.columns = cells;
            t.data.assign(cells.size(), {});
            header = true;
            continue;
        }
        if (cells.size() != t.columns.size())
            throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": wrong number of fields");
        for (std::size_t c = 0; c < cells.size(); ++c) t.data[c].push_back(parse_double(cells[c]));
    }
    if (!header) throw std::runtime_error(path.string() + ": no header row");
    return t;
}

std::vector<std::pair<std::string, std::string>> param_metadata(const SystemParams& p) {
    return {
        {"N", std::to_string(p.N)},
        {"p_d", format_double(p.p_d)},
        {"Omega", format_double(p.Omega)},
        {"kappa", format_double(p.kappa)},
        {"gamma_plus", format_double(p.gamma_plus)},
        {"gamma_minus", format_double(p.gamma_minus)},
        {"gamma_z", format_double(p.gamma_z)},
        {"V", format_double(p.V)},
        {"Gamma", format_double(p.Gamma)},
        {"p_ud", format_double(p.p_ud)},
        {"N_d", std::to_string(p.N_d)},
        {"N_ud", std::to_string(p.N_ud)},
        {"bad_cavity_ratio", format_double(p.bad_cavity_ratio)},
        {"reference_rate", format_double(p.reference_rate)},
    };
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
        EVP_MD_CTX_free(ctx);
        throw std::runtime_error("sha256 init failed");
    }
    std::array<char, 1 << 16> buf{};
    while (in) {
        in.read(buf.data(), buf.size());
        if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, md.data(), &len);
    EVP_MD_CTX_free(ctx);
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int k = 0; k < len; ++k) {
        out += hex[md[k] >> 4];
        out += hex[md[k] & 15];
    }
    return out;
}

} // namespace srl
