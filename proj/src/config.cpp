#include "monosf/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "monosf/error.hpp"

namespace monosf {

namespace {

std::string trim(const std::string& s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

}  // namespace

std::vector<double> parse_double_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw ConfigError("empty element in list for " + what);
    size_t pos = 0;
    double v;
    try {
      v = std::stod(item, &pos);
    } catch (const std::exception&) {
      throw ConfigError("cannot parse number '" + item + "' in " + what);
    }
    if (pos != item.size()) throw ConfigError("trailing junk in number '" + item + "' in " + what);
    out.push_back(v);
  }
  return out;
}

KeyValueFile KeyValueFile::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_text(buf.str(), path);
}

KeyValueFile KeyValueFile::parse_text(const std::string& text, const std::string& origin) {
  KeyValueFile kv;
  kv.origin_ = origin;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key=value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
    if (kv.values_.count(key))
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
    kv.values_[key] = value;
  }
  return kv;
}

bool KeyValueFile::has(const std::string& key) const { return values_.count(key) > 0; }

std::string KeyValueFile::raw(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end())
    throw ConfigError(origin_ + ": missing required key '" + key + "'");
  consumed_.insert(key);
  return it->second;
}

std::string KeyValueFile::get_string(const std::string& key) const { return raw(key); }

std::string KeyValueFile::get_string(const std::string& key, const std::string& fallback) const {
  return has(key) ? raw(key) : fallback;
}

double KeyValueFile::get_double(const std::string& key) const {
  std::string v = raw(key);
  try {
    size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError(origin_ + ": key '" + key + "' is not a number: " + v);
  }
}

double KeyValueFile::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

int KeyValueFile::get_int(const std::string& key) const {
  double d = get_double(key);
  int i = int(d);
  if (double(i) != d) throw ConfigError(origin_ + ": key '" + key + "' is not an integer");
  return i;
}

int KeyValueFile::get_int(const std::string& key, int fallback) const {
  return has(key) ? get_int(key) : fallback;
}

uint64_t KeyValueFile::get_u64(const std::string& key, uint64_t fallback) const {
  if (!has(key)) return fallback;
  std::string v = raw(key);
  try {
    return std::stoull(v);
  } catch (const std::exception&) {
    throw ConfigError(origin_ + ": key '" + key + "' is not an unsigned integer: " + v);
  }
}

bool KeyValueFile::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  std::string v = raw(key);
  std::transform(v.begin(), v.end(), v.begin(), ::tolower);
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError(origin_ + ": key '" + key + "' is not a boolean: " + v);
}

Vec3 KeyValueFile::get_vec3(const std::string& key) const {
  std::vector<double> v = parse_double_list(raw(key), "key '" + key + "'");
  if (v.size() != 3)
    throw ConfigError(origin_ + ": key '" + key + "' needs exactly 3 comma-separated numbers");
  return {v[0], v[1], v[2]};
}

std::vector<double> KeyValueFile::get_doubles(const std::string& key) const {
  return parse_double_list(raw(key), "key '" + key + "'");
}

std::vector<std::string> KeyValueFile::keys_with_prefix(const std::string& prefix) const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values_)
    if (k.rfind(prefix, 0) == 0) out.push_back(k);
  return out;
}

void KeyValueFile::set(const std::string& key, const std::string& value) {
  values_[key] = value;
}

void KeyValueFile::require_all_consumed() const {
  std::vector<std::string> unknown;
  for (const auto& [k, v] : values_)
    if (!consumed_.count(k)) unknown.push_back(k);
  if (!unknown.empty()) {
    std::string joined;
    for (const std::string& k : unknown) joined += (joined.empty() ? "" : ", ") + k;
    throw ConfigError(origin_ + ": unknown keys: " + joined);
  }
}

}  // namespace monosf
