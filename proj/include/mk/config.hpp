// config.hpp: flat TOML-style key/value experiment configuration.
//
// Supported syntax: `key = value` lines, [section] headers (keys inside get a
// "section." prefix), '#' comments, quoted strings, booleans, integers,
// floats, and flat numeric arrays like [0.4, 0.2, 0.1].
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "mk/errors.hpp"

namespace mk {

class Config {
 public:
  using Value = std::variant<bool, std::int64_t, double, std::string,
                             std::vector<double>>;

  static Config parse_file(const std::filesystem::path& path);
  static Config parse_string(const std::string& text);

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  double number(const std::string& key) const;
  double number(const std::string& key, double fallback) const;
  std::int64_t integer(const std::string& key) const;
  std::int64_t integer(const std::string& key, std::int64_t fallback) const;
  bool boolean(const std::string& key, bool fallback) const;
  std::string str(const std::string& key) const;
  std::string str(const std::string& key, const std::string& fallback) const;
  // Accepts both a scalar number and an array value.
  std::vector<double> number_list(const std::string& key) const;
  std::vector<double> number_list(const std::string& key,
                                  std::vector<double> fallback) const;

  std::vector<std::string> keys() const;
  const Value& value(const std::string& key) const { return at(key); }
  void set(const std::string& key, Value value) { values_[key] = std::move(value); }

 private:
  const Value& at(const std::string& key) const;
  std::map<std::string, Value> values_;
};

}  // namespace mk
