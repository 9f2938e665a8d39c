#include "modest/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "modest/errors.hpp"

namespace modest {
namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

}  // namespace

bool IniFile::has(const std::string& section, const std::string& key) const {
    for (const Entry& e : entries)
        if (e.section == section && e.key == key) return true;
    return false;
}

std::string IniFile::get(const std::string& section, const std::string& key,
                         const std::string& fallback) const {
    for (const Entry& e : entries)
        if (e.section == section && e.key == key) return e.value;
    return fallback;
}

IniFile parse_ini_text(const std::string& text) {
    IniFile ini;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t comment = line.find_first_of("#;");
        if (comment != std::string::npos) line = line.substr(0, comment);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("line " + std::to_string(lineno) + ": malformed section");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        IniFile::Entry e;
        e.section = section;
        e.key = trim(line.substr(0, eq));
        e.value = trim(line.substr(eq + 1));
        if (e.key.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        ini.entries.push_back(std::move(e));
    }
    return ini;
}

IniFile parse_ini_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_ini_text(buf.str());
}

double parse_double(const std::string& text, const std::string& what) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(text, &pos);
        if (trim(text.substr(pos)).empty()) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError(what + ": not a number: '" + text + "'");
}

long parse_long(const std::string& text, const std::string& what) {
    try {
        std::size_t pos = 0;
        const long v = std::stol(text, &pos);
        if (trim(text.substr(pos)).empty()) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError(what + ": not an integer: '" + text + "'");
}

bool parse_bool(const std::string& text, const std::string& what) {
    std::string t = trim(text);
    std::transform(t.begin(), t.end(), t.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (t == "true" || t == "yes" || t == "1" || t == "on") return true;
    if (t == "false" || t == "no" || t == "0" || t == "off") return false;
    throw ConfigError(what + ": not a boolean: '" + text + "'");
}

std::vector<double> parse_double_list(const std::string& text, const std::string& what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(parse_double(trim(cell), what));
    if (out.empty()) throw ConfigError(what + ": empty list");
    return out;
}

std::pair<double, double> parse_range(const std::string& text, const std::string& what) {
    const std::size_t dots = text.find("..");
    if (dots == std::string::npos)
        throw ConfigError(what + ": expected 'lo..hi', got '" + text + "'");
    const double lo = parse_double(trim(text.substr(0, dots)), what);
    const double hi = parse_double(trim(text.substr(dots + 2)), what);
    if (lo > hi) throw ConfigError(what + ": lo > hi in '" + text + "'");
    return {lo, hi};
}

}  // namespace modest
