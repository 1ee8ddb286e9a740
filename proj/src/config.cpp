#include "sampsize/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>

#include "sampsize/error.hpp"

namespace sampsize {

namespace {

bool is_bare_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_' || c == '-';
}

class LineParser {
public:
    LineParser(std::string_view text, int line) : text_(text), line_(line) {}

    void skip_space() {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
    }

    bool at_end() {
        skip_space();
        return pos_ >= text_.size() || text_[pos_] == '#';
    }

    char peek() {
        skip_space();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    void expect(char c) {
        if (peek() != c) fail(std::string("expected '") + c + "'");
        ++pos_;
    }

    std::string bare_word(const char* what) {
        skip_space();
        const std::size_t start = pos_;
        while (pos_ < text_.size() && is_bare_char(text_[pos_])) ++pos_;
        if (pos_ == start) fail(std::string("expected ") + what);
        return std::string(text_.substr(start, pos_ - start));
    }

    ConfigScalar scalar() {
        const char c = peek();
        if (c == '"') return quoted();
        std::size_t start = pos_;
        while (pos_ < text_.size() && text_[pos_] != ',' && text_[pos_] != ']' && text_[pos_] != '#' &&
               text_[pos_] != ' ' && text_[pos_] != '\t') {
            ++pos_;
        }
        std::string token(text_.substr(start, pos_ - start));
        if (token.empty()) fail("missing value");
        if (token == "true") return true;
        if (token == "false") return false;
        std::string digits;
        for (char ch : token) {
            if (ch != '_') digits.push_back(ch);
        }
        if (digits.empty()) fail("cannot parse value '" + token + "'");
        const char* first = digits.data();
        const char* last = digits.data() + digits.size();
        if (*first == '+') ++first;
        if (digits.find_first_of(".eE") == std::string::npos) {
            std::int64_t v = 0;
            const auto res = std::from_chars(first, last, v);
            if (res.ec == std::errc() && res.ptr == last) return v;
            if (res.ec == std::errc::result_out_of_range) fail("integer out of range: " + token);
        } else {
            double v = 0.0;
            const auto res = std::from_chars(first, last, v);
            if (res.ec == std::errc() && res.ptr == last && std::isfinite(v)) return v;
        }
        fail("cannot parse value '" + token + "' (strings need double quotes)");
    }

    ConfigValue value() {
        ConfigValue out;
        out.line = line_;
        if (peek() == '[') {
            ++pos_;
            std::vector<ConfigScalar> items;
            while (peek() != ']') {
                if (peek() == '\0' || peek() == '#') fail("unterminated array (arrays must fit on one line)");
                items.push_back(scalar());
                if (peek() == ',') {
                    ++pos_;
                } else if (peek() != ']') {
                    fail("expected ',' or ']' in array");
                }
            }
            ++pos_;
            out.value = std::move(items);
        } else {
            out.value = scalar();
        }
        if (!at_end()) fail("unexpected text after value");
        return out;
    }

    [[noreturn]] void fail(const std::string& what) const { throw ConfigError(what, line_); }

private:
    std::string quoted() {
        ++pos_;
        std::string out;
        while (pos_ < text_.size() && text_[pos_] != '"') {
            char c = text_[pos_++];
            if (c == '\\') {
                if (pos_ >= text_.size()) break;
                const char e = text_[pos_++];
                switch (e) {
                    case 'n': c = '\n'; break;
                    case 't': c = '\t'; break;
                    case '"': c = '"'; break;
                    case '\\': c = '\\'; break;
                    default: fail(std::string("unknown escape \\") + e);
                }
            }
            out.push_back(c);
        }
        if (pos_ >= text_.size()) fail("unterminated string");
        ++pos_;
        return out;
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    int line_;
};

const char* type_name(const ConfigScalar& s) {
    switch (s.index()) {
        case 0: return "boolean";
        case 1: return "integer";
        case 2: return "float";
        default: return "string";
    }
}

std::string where(const std::string& section, const std::string& key) {
    return section.empty() ? key : section + "." + key;
}

const ConfigScalar& scalar_of(const ConfigValue& v, const std::string& name) {
    if (const auto* s = std::get_if<ConfigScalar>(&v.value)) return *s;
    throw ConfigError(name + ": expected a single value, got an array", v.line);
}

const std::vector<ConfigScalar>& array_of(const ConfigValue& v, const std::string& name) {
    if (const auto* a = std::get_if<std::vector<ConfigScalar>>(&v.value)) return *a;
    throw ConfigError(name + ": expected an array", v.line);
}

std::int64_t as_int(const ConfigScalar& s, const std::string& name, int line) {
    if (const auto* i = std::get_if<std::int64_t>(&s)) return *i;
    throw ConfigError(name + ": expected integer, got " + type_name(s), line);
}

std::string as_string(const ConfigScalar& s, const std::string& name, int line) {
    if (const auto* str = std::get_if<std::string>(&s)) return *str;
    throw ConfigError(name + ": expected string, got " + type_name(s), line);
}

}  // namespace

ConfigDocument ConfigDocument::parse(std::istream& in) {
    ConfigDocument doc;
    std::string section;
    doc.sections_[section];
    std::string text;
    int line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (!text.empty() && text.back() == '\r') text.pop_back();
        LineParser p(text, line);
        if (p.at_end()) continue;
        if (p.peek() == '[') {
            p.expect('[');
            section = p.bare_word("section name");
            p.expect(']');
            if (!p.at_end()) p.fail("unexpected text after section header");
            if (doc.section_lines_.count(section)) {
                p.fail("section [" + section + "] repeated (first at line " +
                       std::to_string(doc.section_lines_[section]) + ")");
            }
            doc.section_lines_[section] = line;
            doc.sections_[section];
            continue;
        }
        const std::string key = p.bare_word("key");
        p.expect('=');
        ConfigValue v = p.value();
        auto& entries = doc.sections_[section];
        if (const auto it = entries.find(key); it != entries.end()) {
            p.fail("key '" + where(section, key) + "' repeated (first at line " + std::to_string(it->second.line) +
                   ")");
        }
        entries.emplace(key, std::move(v));
    }
    if (in.bad()) throw IoError("read error while parsing config");
    return doc;
}

ConfigDocument ConfigDocument::parse_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path.string());
    return parse(in);
}

bool ConfigDocument::has(const std::string& section, const std::string& key) const {
    const auto it = sections_.find(section);
    return it != sections_.end() && it->second.count(key) > 0;
}

const ConfigValue& ConfigDocument::at(const std::string& section, const std::string& key) const {
    const auto it = sections_.find(section);
    if (it != sections_.end()) {
        const auto jt = it->second.find(key);
        if (jt != it->second.end()) return jt->second;
    }
    const auto sl = section_lines_.find(section);
    throw ConfigError("missing required key '" + where(section, key) + "'",
                      sl == section_lines_.end() ? 0 : sl->second);
}

std::string ConfigDocument::get_string(const std::string& section, const std::string& key) const {
    const auto& v = at(section, key);
    return as_string(scalar_of(v, where(section, key)), where(section, key), v.line);
}

bool ConfigDocument::get_bool(const std::string& section, const std::string& key) const {
    const auto& v = at(section, key);
    const auto& s = scalar_of(v, where(section, key));
    if (const auto* b = std::get_if<bool>(&s)) return *b;
    throw ConfigError(where(section, key) + ": expected boolean, got " + type_name(s), v.line);
}

std::int64_t ConfigDocument::get_int(const std::string& section, const std::string& key) const {
    const auto& v = at(section, key);
    return as_int(scalar_of(v, where(section, key)), where(section, key), v.line);
}

double ConfigDocument::get_double(const std::string& section, const std::string& key) const {
    const auto& v = at(section, key);
    const auto& s = scalar_of(v, where(section, key));
    if (const auto* d = std::get_if<double>(&s)) return *d;
    if (const auto* i = std::get_if<std::int64_t>(&s)) return static_cast<double>(*i);
    throw ConfigError(where(section, key) + ": expected number, got " + type_name(s), v.line);
}

std::vector<std::int64_t> ConfigDocument::get_int_list(const std::string& section, const std::string& key) const {
    const auto& v = at(section, key);
    std::vector<std::int64_t> out;
    for (const auto& s : array_of(v, where(section, key))) out.push_back(as_int(s, where(section, key), v.line));
    return out;
}

std::vector<std::string> ConfigDocument::get_string_list(const std::string& section, const std::string& key) const {
    const auto& v = at(section, key);
    std::vector<std::string> out;
    for (const auto& s : array_of(v, where(section, key))) out.push_back(as_string(s, where(section, key), v.line));
    return out;
}

void ConfigDocument::check_schema(const std::map<std::string, std::set<std::string>>& schema) const {
    for (const auto& [section, entries] : sections_) {
        const auto allowed = schema.find(section);
        if (allowed == schema.end()) {
            const auto sl = section_lines_.find(section);
            throw ConfigError("unknown section [" + section + "]", sl == section_lines_.end() ? 0 : sl->second);
        }
        for (const auto& [key, value] : entries) {
            if (!allowed->second.count(key)) throw ConfigError("unknown key '" + where(section, key) + "'", value.line);
        }
    }
}

}  // namespace sampsize
