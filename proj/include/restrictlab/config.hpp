#pragma once

#include <fstream>
#include <map>
#include <string>

#include "restrictlab/common.hpp"

namespace restrictlab::config {

/// Flat "key = value" file with bracketed section headers:
///
///   [count]
///   N = 4,8,16
///   b = 5
///
/// Unknown sections and keys are kept verbatim; interpretation belongs to
/// the consumer. '#' and ';' start comments.
using ConfigMap = std::map<std::string, std::map<std::string, std::string>>;

inline std::string strip(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline ConfigMap parse_config(std::istream& in) {
    ConfigMap out;
    std::string line, section;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t hash = line.find_first_of("#;");
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = strip(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            require(line.back() == ']', "config.section",
                    "unterminated section header at line " + std::to_string(lineno));
            section = strip(line.substr(1, line.size() - 2));
            out[section];
            continue;
        }
        std::size_t eq = line.find('=');
        require(eq != std::string::npos, "config.key_value",
                "expected key = value at line " + std::to_string(lineno));
        std::string key = strip(line.substr(0, eq));
        std::string value = strip(line.substr(eq + 1));
        require(!key.empty(), "config.key_value",
                "empty key at line " + std::to_string(lineno));
        out[section][key] = value;
    }
    return out;
}

inline ConfigMap load_config(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), "config.io", "cannot open config file " + path);
    return parse_config(in);
}

} // namespace restrictlab::config
