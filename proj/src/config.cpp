#include "fraclab/config.hpp"

#include <fstream>
#include <sstream>

namespace fraclab {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

} // namespace

Config Config::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_string(buf.str());
}

Config Config::parse_string(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t hash = line.find_first_of("#;");
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config line " + std::to_string(lineno) +
                                  ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
        cfg.sections_[section][key] = val;
    }
    return cfg;
}

bool Config::has(const std::string& section, const std::string& key) const {
    auto it = sections_.find(section);
    return it != sections_.end() && it->second.count(key) > 0;
}

std::string Config::get(const std::string& section, const std::string& key,
                        const std::string& fallback) const {
    auto it = sections_.find(section);
    if (it == sections_.end()) return fallback;
    auto jt = it->second.find(key);
    return jt == it->second.end() ? fallback : jt->second;
}

double Config::get_num(const std::string& section, const std::string& key,
                       double fallback) const {
    if (!has(section, key)) return fallback;
    try {
        return std::stod(get(section, key));
    } catch (...) {
        throw ConfigError("config: " + section + "." + key + " is not a number");
    }
}

int Config::get_int(const std::string& section, const std::string& key,
                    int fallback) const {
    return static_cast<int>(get_num(section, key, fallback));
}

std::uint64_t Config::get_u64(const std::string& section, const std::string& key,
                              std::uint64_t fallback) const {
    if (!has(section, key)) return fallback;
    try {
        return std::stoull(get(section, key));
    } catch (...) {
        throw ConfigError("config: " + section + "." + key + " is not an integer");
    }
}

std::vector<double> Config::get_list(const std::string& section, const std::string& key,
                                     const std::vector<double>& fallback) const {
    if (!has(section, key)) return fallback;
    std::string raw = get(section, key);
    for (auto& c : raw)
        if (c == ',') c = ' ';
    std::istringstream in(raw);
    std::vector<double> out;
    double v;
    while (in >> v) out.push_back(v);
    if (out.empty())
        throw ConfigError("config: " + section + "." + key + " is an empty list");
    return out;
}

std::vector<std::string> Config::get_words(const std::string& section,
                                           const std::string& key) const {
    std::string raw = get(section, key);
    for (auto& c : raw)
        if (c == ',') c = ' ';
    std::istringstream in(raw);
    std::vector<std::string> out;
    std::string w;
    while (in >> w) out.push_back(w);
    return out;
}

} // namespace fraclab
