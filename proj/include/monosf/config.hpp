#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "monosf/geometry.hpp"

namespace monosf {

// key=value text with '#' comments. Key reads are tracked so callers can
// reject unknown keys after extracting everything they understand.
class KeyValueFile {
 public:
  static KeyValueFile parse_file(const std::string& path);
  static KeyValueFile parse_text(const std::string& text, const std::string& origin);

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key) const;
  int get_int(const std::string& key, int fallback) const;
  uint64_t get_u64(const std::string& key, uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  Vec3 get_vec3(const std::string& key) const;

  // Comma-separated doubles.
  std::vector<double> get_doubles(const std::string& key) const;

  std::vector<std::string> keys_with_prefix(const std::string& prefix) const;

  // Inserts or overrides (used for CLI "--set key=value" overrides).
  void set(const std::string& key, const std::string& value);

  // Throws ConfigError naming any key that was never read.
  void require_all_consumed() const;

  const std::string& origin() const { return origin_; }

 private:
  std::string raw(const std::string& key) const;

  std::string origin_;
  std::map<std::string, std::string> values_;
  mutable std::set<std::string> consumed_;
};

std::vector<double> parse_double_list(const std::string& text, const std::string& what);

}  // namespace monosf
