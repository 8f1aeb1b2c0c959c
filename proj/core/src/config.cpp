#include "qsmooth/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "qsmooth/io.hpp"

namespace qsmooth {

namespace {
std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}
}  // namespace

Config Config::parse(const std::string& text) {
    Config c;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config line " + std::to_string(lineno) +
                                  ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw ConfigError("config line " + std::to_string(lineno) +
                                  ": empty section name");
            c.sections_[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": empty key");
        if (section.empty())
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": key outside any [section]");
        c.sections_[section][key] = value;
    }
    return c;
}

Config Config::load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse(ss.str());
}

std::string Config::serialize() const {
    std::string out;
    for (const auto& [sec, kv] : sections_) {
        out += "[" + sec + "]\n";
        for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
        out += "\n";
    }
    return out;
}

bool Config::has(const std::string& s, const std::string& k) const {
    auto it = sections_.find(s);
    return it != sections_.end() && it->second.count(k) > 0;
}

std::string Config::get(const std::string& s, const std::string& k) const {
    auto it = sections_.find(s);
    if (it == sections_.end() || !it->second.count(k))
        throw ConfigError("missing config field [" + s + "] " + k);
    return it->second.at(k);
}

std::string Config::get_or(const std::string& s, const std::string& k,
                           const std::string& fb) const {
    return has(s, k) ? get(s, k) : fb;
}

double Config::get_double(const std::string& s, const std::string& k) const {
    const std::string v = get(s, k);
    char* end = nullptr;
    const double d = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0')
        throw ConfigError("config field [" + s + "] " + k +
                          ": not a number: '" + v + "'");
    return d;
}

double Config::get_double_or(const std::string& s, const std::string& k,
                             double fb) const {
    return has(s, k) ? get_double(s, k) : fb;
}

std::int64_t Config::get_int(const std::string& s, const std::string& k) const {
    const double d = get_double(s, k);
    const auto i = std::int64_t(d);
    if (double(i) != d)
        throw ConfigError("config field [" + s + "] " + k + ": not an integer");
    return i;
}

std::int64_t Config::get_int_or(const std::string& s, const std::string& k,
                                std::int64_t fb) const {
    return has(s, k) ? get_int(s, k) : fb;
}

bool Config::get_bool_or(const std::string& s, const std::string& k,
                         bool fb) const {
    if (!has(s, k)) return fb;
    const std::string v = get(s, k);
    if (v == "on" || v == "true" || v == "1" || v == "yes") return true;
    if (v == "off" || v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("config field [" + s + "] " + k + ": not a boolean: '" +
                      v + "'");
}

std::vector<double> Config::get_list(const std::string& s,
                                     const std::string& k) const {
    const std::string v = get(s, k);
    std::vector<double> out;
    std::istringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        char* end = nullptr;
        const double d = std::strtod(item.c_str(), &end);
        if (end == item.c_str() || *end != '\0')
            throw ConfigError("config field [" + s + "] " + k +
                              ": bad list entry '" + item + "'");
        out.push_back(d);
    }
    if (out.empty())
        throw ConfigError("config field [" + s + "] " + k + ": empty list");
    return out;
}

std::vector<double> Config::get_list_or(const std::string& s,
                                        const std::string& k,
                                        const std::vector<double>& fb) const {
    return has(s, k) ? get_list(s, k) : fb;
}

void Config::set(const std::string& s, const std::string& k,
                 const std::string& v) {
    sections_[s][k] = v;
}

void Config::set_double(const std::string& s, const std::string& k, double v) {
    set(s, k, format_double(v));
}

void Config::set_list(const std::string& s, const std::string& k,
                      const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += format_double(v[i]);
    }
    set(s, k, out);
}

}  // namespace qsmooth
