#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace sampsize {

// Minimal TOML subset: [section] headers, `key = value` lines, '#' comments.
// Values are strings ("..."), booleans, integers, floats and one-line arrays
// of those. Every error carries the offending line number.
using ConfigScalar = std::variant<bool, std::int64_t, double, std::string>;

struct ConfigValue {
    std::variant<ConfigScalar, std::vector<ConfigScalar>> value;
    int line = 0;
};

class ConfigDocument {
public:
    static ConfigDocument parse(std::istream& in);
    static ConfigDocument parse_file(const std::filesystem::path& path);

    // Keys outside any section live in section "".
    bool has(const std::string& section, const std::string& key) const;
    const ConfigValue& at(const std::string& section, const std::string& key) const;

    std::string get_string(const std::string& section, const std::string& key) const;
    bool get_bool(const std::string& section, const std::string& key) const;
    std::int64_t get_int(const std::string& section, const std::string& key) const;
    double get_double(const std::string& section, const std::string& key) const;
    std::vector<std::int64_t> get_int_list(const std::string& section, const std::string& key) const;
    std::vector<std::string> get_string_list(const std::string& section, const std::string& key) const;

    // Rejects sections and keys the schema does not list.
    void check_schema(const std::map<std::string, std::set<std::string>>& schema) const;

private:
    std::map<std::string, std::map<std::string, ConfigValue>> sections_;
    std::map<std::string, int> section_lines_;
};

}  // namespace sampsize
