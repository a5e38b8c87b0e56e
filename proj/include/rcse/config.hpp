#pragma once

#include "rcse/error.hpp"

#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <string>

namespace rcse {

// Flat `key=value` text config. '#' comments and blank lines are skipped;
// whitespace around keys and values is trimmed; later keys override earlier
// ones.
using KeyValueMap = std::map<std::string, std::string>;

namespace detail {

inline std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

} // namespace detail

inline KeyValueMap parse_key_values(std::istream& in) {
    KeyValueMap out;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = detail::trim(line);
        if (t.empty() || t.front() == '#') continue;
        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ParseError("expected key=value, got '" + t + "'", lineno);
        std::string key = detail::trim(t.substr(0, eq));
        std::string value = detail::trim(t.substr(eq + 1));
        if (key.empty()) throw ParseError("empty key", lineno);
        out[key] = value;
    }
    return out;
}

inline KeyValueMap parse_key_values_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    try {
        return parse_key_values(in);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

inline uint64_t config_u64(const KeyValueMap& kv, const std::string& key, uint64_t fallback) {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    try {
        size_t pos = 0;
        uint64_t v = std::stoull(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("trailing junk");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "' wants an unsigned integer, got '" +
                          it->second + "'");
    }
}

inline double config_double(const KeyValueMap& kv, const std::string& key, double fallback) {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    try {
        size_t pos = 0;
        double v = std::stod(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("trailing junk");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "' wants a number, got '" + it->second + "'");
    }
}

inline bool config_bool(const KeyValueMap& kv, const std::string& key, bool fallback) {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    if (it->second == "true" || it->second == "1" || it->second == "yes") return true;
    if (it->second == "false" || it->second == "0" || it->second == "no") return false;
    throw ConfigError("config key '" + key + "' wants true/false, got '" + it->second + "'");
}

inline std::string config_string(const KeyValueMap& kv, const std::string& key,
                                 const std::string& fallback) {
    auto it = kv.find(key);
    return it == kv.end() ? fallback : it->second;
}

} // namespace rcse
