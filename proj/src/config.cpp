#include "mk/config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace mk {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Strips a '#' comment that is not inside a quoted string.
std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

bool looks_integer(const std::string& t) {
  std::size_t i = (t[0] == '+' || t[0] == '-') ? 1 : 0;
  if (i == t.size()) return false;
  for (; i < t.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(t[i]))) return false;
  return true;
}

double to_number(const std::string& t, int line_no) {
  try {
    std::size_t used = 0;
    const double v = std::stod(t, &used);
    if (used != t.size()) throw std::invalid_argument(t);
    return v;
  } catch (const std::exception&) {
    throw DomainError("config line " + std::to_string(line_no) +
                      ": bad number '" + t + "'");
  }
}

Config::Value parse_value(const std::string& raw, int line_no) {
  const std::string t = trim(raw);
  if (t.empty())
    throw DomainError("config line " + std::to_string(line_no) +
                      ": missing value");
  if (t.front() == '"') {
    if (t.size() < 2 || t.back() != '"')
      throw DomainError("config line " + std::to_string(line_no) +
                        ": unterminated string");
    return t.substr(1, t.size() - 2);
  }
  if (t == "true") return true;
  if (t == "false") return false;
  if (t.front() == '[') {
    if (t.back() != ']')
      throw DomainError("config line " + std::to_string(line_no) +
                        ": unterminated array");
    std::vector<double> out;
    std::stringstream ss(t.substr(1, t.size() - 2));
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) continue;
      out.push_back(to_number(item, line_no));
    }
    return out;
  }
  if (looks_integer(t)) return static_cast<std::int64_t>(std::stoll(t));
  return to_number(t, line_no);
}

}  // namespace

Config Config::parse_string(const std::string& text) {
  Config cfg;
  std::stringstream in(text);
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw DomainError("config line " + std::to_string(line_no) +
                          ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty())
        throw DomainError("config line " + std::to_string(line_no) +
                          ": empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw DomainError("config line " + std::to_string(line_no) +
                        ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    if (key.empty())
      throw DomainError("config line " + std::to_string(line_no) +
                        ": empty key");
    if (!section.empty()) key = section + "." + key;
    cfg.values_[key] = parse_value(line.substr(eq + 1), line_no);
  }
  return cfg;
}

Config Config::parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str());
}

const Config::Value& Config::at(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw DomainError("missing config key '" + key + "'");
  return it->second;
}

double Config::number(const std::string& key) const {
  const Value& v = at(key);
  if (const auto* d = std::get_if<double>(&v)) return *d;
  if (const auto* i = std::get_if<std::int64_t>(&v))
    return static_cast<double>(*i);
  throw DomainError("config key '" + key + "' is not a number");
}

double Config::number(const std::string& key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

std::int64_t Config::integer(const std::string& key) const {
  const Value& v = at(key);
  if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
  throw DomainError("config key '" + key + "' is not an integer");
}

std::int64_t Config::integer(const std::string& key,
                             std::int64_t fallback) const {
  return has(key) ? integer(key) : fallback;
}

bool Config::boolean(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const Value& v = at(key);
  if (const auto* b = std::get_if<bool>(&v)) return *b;
  throw DomainError("config key '" + key + "' is not a boolean");
}

std::string Config::str(const std::string& key) const {
  const Value& v = at(key);
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  throw DomainError("config key '" + key + "' is not a string");
}

std::string Config::str(const std::string& key,
                        const std::string& fallback) const {
  return has(key) ? str(key) : fallback;
}

std::vector<double> Config::number_list(const std::string& key) const {
  const Value& v = at(key);
  if (const auto* a = std::get_if<std::vector<double>>(&v)) return *a;
  if (std::holds_alternative<double>(v) ||
      std::holds_alternative<std::int64_t>(v))
    return {number(key)};
  throw DomainError("config key '" + key + "' is not a numeric list");
}

std::vector<double> Config::number_list(const std::string& key,
                                        std::vector<double> fallback) const {
  return has(key) ? number_list(key) : fallback;
}

std::vector<std::string> Config::keys() const {
  std::vector<std::string> out;
  out.reserve(values_.size());
  for (const auto& [k, v] : values_) out.push_back(k);
  return out;
}

}  // namespace mk
