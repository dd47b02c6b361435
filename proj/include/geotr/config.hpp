/// @file config.hpp
/// @brief Sectioned key-value scenario files.
///
/// Grammar (one construct per line, `#` starts a comment outside strings):
///   section  := "[" name "]"
///   entry    := key "=" value
///   value    := number | string | bool | array
///   string   := '"' chars '"'            (escapes: \" \\ \n \t)
///   bool     := "true" | "false"
///   array    := "[" (value ("," value)* ","?)? "]"   (may nest, single line)
/// Keys before the first section header belong to the section "".
#pragma once

#include "geotr/core.hpp"

#include <cctype>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

namespace geotr::config {

struct Value;
using Array = std::vector<Value>;

struct Value {
  std::variant<double, std::string, bool, Array> v;

  bool is_number() const { return std::holds_alternative<double>(v); }
  bool is_string() const { return std::holds_alternative<std::string>(v); }
  bool is_bool() const { return std::holds_alternative<bool>(v); }
  bool is_array() const { return std::holds_alternative<Array>(v); }
};

class Section {
 public:
  explicit Section(std::string name = {}) : name_(std::move(name)) {}

  const std::string& name() const { return name_; }
  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  void set(const std::string& key, Value v) { entries_[key] = std::move(v); }
  const std::map<std::string, Value>& entries() const { return entries_; }

  const Value& at(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) throw ConfigError(where(key) + " is required");
    return it->second;
  }

  double number(const std::string& key) const {
    const Value& v = at(key);
    if (!v.is_number()) throw ConfigError(where(key) + " must be a number");
    return std::get<double>(v.v);
  }
  double number(const std::string& key, double fallback) const { return has(key) ? number(key) : fallback; }

  int integer(const std::string& key) const {
    double d = number(key);
    if (d != static_cast<double>(static_cast<long>(d))) throw ConfigError(where(key) + " must be an integer");
    return static_cast<int>(d);
  }
  int integer(const std::string& key, int fallback) const { return has(key) ? integer(key) : fallback; }

  std::string string(const std::string& key) const {
    const Value& v = at(key);
    if (!v.is_string()) throw ConfigError(where(key) + " must be a string");
    return std::get<std::string>(v.v);
  }
  std::string string(const std::string& key, const std::string& fallback) const {
    return has(key) ? string(key) : fallback;
  }

  bool boolean(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const Value& v = at(key);
    if (!v.is_bool()) throw ConfigError(where(key) + " must be true or false");
    return std::get<bool>(v.v);
  }

  std::vector<double> numbers(const std::string& key) const {
    const Value& v = at(key);
    if (!v.is_array()) throw ConfigError(where(key) + " must be an array of numbers");
    std::vector<double> out;
    for (const auto& e : std::get<Array>(v.v)) {
      if (!e.is_number()) throw ConfigError(where(key) + " must be an array of numbers");
      out.push_back(std::get<double>(e.v));
    }
    return out;
  }
  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) const {
    return has(key) ? numbers(key) : fallback;
  }

  std::vector<std::string> strings(const std::string& key) const {
    const Value& v = at(key);
    if (v.is_string()) return {std::get<std::string>(v.v)};
    if (!v.is_array()) throw ConfigError(where(key) + " must be an array of strings");
    std::vector<std::string> out;
    for (const auto& e : std::get<Array>(v.v)) {
      if (!e.is_string()) throw ConfigError(where(key) + " must be an array of strings");
      out.push_back(std::get<std::string>(e.v));
    }
    return out;
  }

  Vec vec(const std::string& key) const {
    auto xs = numbers(key);
    if (xs.empty() || xs.size() > 3) throw ConfigError(where(key) + " must have 1 to 3 entries");
    Vec v(static_cast<int>(xs.size()));
    for (std::size_t i = 0; i < xs.size(); ++i) v[static_cast<int>(i)] = xs[i];
    return v;
  }

 private:
  std::string where(const std::string& key) const {
    return name_.empty() ? "key '" + key + "'" : "key '" + name_ + "." + key + "'";
  }

  std::string name_;
  std::map<std::string, Value> entries_;
};

class Document {
 public:
  bool has(const std::string& section) const { return sections_.count(section) != 0; }

  const Section& section(const std::string& name) const {
    auto it = sections_.find(name);
    if (it == sections_.end()) throw ConfigError("section [" + name + "] is required");
    return it->second;
  }
  /// The named section, or an empty one.
  const Section& section_or_empty(const std::string& name) const {
    static const Section empty;
    auto it = sections_.find(name);
    return it == sections_.end() ? empty : it->second;
  }

  Section& ensure(const std::string& name) {
    auto it = sections_.find(name);
    if (it == sections_.end()) it = sections_.emplace(name, Section(name)).first;
    return it->second;
  }

  const std::map<std::string, Section>& sections() const { return sections_; }

 private:
  std::map<std::string, Section> sections_;
};

namespace detail {

class LineParser {
 public:
  /// `offset` is the column of `s` within its line.
  LineParser(std::string_view s, int line, std::size_t offset = 0) : s_(s), line_(line), offset_(offset) {}

  Value value() {
    skip_ws();
    if (pos_ >= s_.size()) fail("missing value");
    char c = s_[pos_];
    if (c == '"') return Value{string()};
    if (c == '[') return Value{array()};
    if (s_.compare(pos_, 4, "true") == 0) {
      pos_ += 4;
      return Value{true};
    }
    if (s_.compare(pos_, 5, "false") == 0) {
      pos_ += 5;
      return Value{false};
    }
    return Value{number()};
  }

  void expect_end() {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] != '#') fail("unexpected trailing characters");
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError("line " + std::to_string(line_) + ", column " + std::to_string(offset_ + pos_ + 1) + ": " + msg);
  }

  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\r')) ++pos_;
  }

  std::string string() {
    ++pos_;
    std::string out;
    while (pos_ < s_.size() && s_[pos_] != '"') {
      char c = s_[pos_++];
      if (c == '\\') {
        if (pos_ >= s_.size()) fail("unterminated escape");
        char e = s_[pos_++];
        switch (e) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          default: fail(std::string("unknown escape \\") + e);
        }
      } else {
        out += c;
      }
    }
    if (pos_ >= s_.size()) fail("unterminated string");
    ++pos_;
    return out;
  }

  Array array() {
    ++pos_;
    Array out;
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == ']') {
      ++pos_;
      return out;
    }
    while (true) {
      out.push_back(value());
      skip_ws();
      if (pos_ >= s_.size()) fail("unterminated array");
      if (s_[pos_] == ',') {
        ++pos_;
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == ']') {
          ++pos_;
          return out;
        }
        continue;
      }
      if (s_[pos_] == ']') {
        ++pos_;
        return out;
      }
      fail("expected ',' or ']' in array");
    }
  }

  double number() {
    std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.' ||
                                s_[pos_] == '-' || s_[pos_] == '+' || s_[pos_] == '_'))
      ++pos_;
    std::string tok(s_.substr(start, pos_ - start));
    std::erase(tok, '_');
    if (tok.empty()) fail("expected a value");
    double v = 0.0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size()) {
      pos_ = start;
      fail("invalid number '" + tok + "'");
    }
    return v;
  }

  std::string_view s_;
  int line_;
  std::size_t offset_;
  std::size_t pos_ = 0;
};

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline bool valid_name(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.')) return false;
  return true;
}

}  // namespace detail

inline Document parse(std::string_view text) {
  Document doc;
  std::string current;
  doc.ensure(current);
  int lineno = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++lineno;
    std::string_view t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    if (t.front() == '[') {
      auto close = t.find(']');
      if (close == std::string_view::npos) throw ConfigError("line " + std::to_string(lineno) + ": unterminated section header");
      auto name = detail::trim(t.substr(1, close - 1));
      auto rest = detail::trim(t.substr(close + 1));
      if (!detail::valid_name(name)) throw ConfigError("line " + std::to_string(lineno) + ": invalid section name");
      if (!rest.empty() && rest.front() != '#')
        throw ConfigError("line " + std::to_string(lineno) + ": unexpected text after section header");
      current = std::string(name);
      if (doc.has(current) && !doc.section(current).entries().empty())
        throw ConfigError("line " + std::to_string(lineno) + ": duplicate section [" + current + "]");
      doc.ensure(current);
      continue;
    }
    auto eq = t.find('=');
    if (eq == std::string_view::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    auto key = detail::trim(t.substr(0, eq));
    if (!detail::valid_name(key)) throw ConfigError("line " + std::to_string(lineno) + ": invalid key");
    detail::LineParser p(t.substr(eq + 1), lineno, static_cast<std::size_t>(t.data() - line.data()) + eq + 1);
    Value v = p.value();
    p.expect_end();
    Section& sec = doc.ensure(current);
    if (sec.has(std::string(key)))
      throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + std::string(key) + "'");
    sec.set(std::string(key), std::move(v));
    if (end == text.size()) break;
  }
  return doc;
}

inline Document parse_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open config file: " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

}  // namespace geotr::config
