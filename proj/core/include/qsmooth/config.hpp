#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qsmooth/errors.hpp"

namespace qsmooth {

// Flat structured text config: [section] headers, key = value lines, '#'
// comments. Parsing keeps no formatting; serialize() emits the canonical
// sorted form, so serialize(parse(serialize(x))) == serialize(x).
class Config {
  public:
    static Config parse(const std::string& text);
    static Config load(const std::string& path);
    std::string serialize() const;

    bool has(const std::string& section, const std::string& key) const;
    std::string get(const std::string& section, const std::string& key) const;
    std::string get_or(const std::string& section, const std::string& key,
                       const std::string& fallback) const;
    double get_double(const std::string& section, const std::string& key) const;
    double get_double_or(const std::string& section, const std::string& key,
                         double fallback) const;
    std::int64_t get_int(const std::string& section, const std::string& key) const;
    std::int64_t get_int_or(const std::string& section, const std::string& key,
                            std::int64_t fallback) const;
    bool get_bool_or(const std::string& section, const std::string& key,
                     bool fallback) const;
    std::vector<double> get_list(const std::string& section,
                                 const std::string& key) const;
    std::vector<double> get_list_or(const std::string& section,
                                    const std::string& key,
                                    const std::vector<double>& fallback) const;

    void set(const std::string& section, const std::string& key,
             const std::string& value);
    void set_double(const std::string& section, const std::string& key, double v);
    void set_list(const std::string& section, const std::string& key,
                  const std::vector<double>& v);

    const std::map<std::string, std::map<std::string, std::string>>& sections()
        const {
        return sections_;
    }

  private:
    std::map<std::string, std::map<std::string, std::string>> sections_;
};

}  // namespace qsmooth
