#pragma once

#include <map>
#include <string>
#include <vector>

namespace modest {

// Minimal INI reader: [section] headers, key = value lines, '#' or ';'
// comments. Section and key order is preserved for strict validation.
struct IniFile {
    struct Entry {
        std::string section, key, value;
    };
    std::vector<Entry> entries;

    bool has(const std::string& section, const std::string& key) const;
    std::string get(const std::string& section, const std::string& key,
                    const std::string& fallback) const;
};

IniFile parse_ini_file(const std::string& path);
IniFile parse_ini_text(const std::string& text);

double parse_double(const std::string& text, const std::string& what);
long parse_long(const std::string& text, const std::string& what);
bool parse_bool(const std::string& text, const std::string& what);
std::vector<double> parse_double_list(const std::string& text, const std::string& what);
// "lo..hi"
std::pair<double, double> parse_range(const std::string& text, const std::string& what);

}  // namespace modest
