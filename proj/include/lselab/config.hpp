#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lselab/potential.hpp"

namespace lselab {

/// Flat `key = value` text with optional `[section]` headers. Lines without
/// an equals sign use their first token as the key (`pair 0 1 0.4`). Repeated
/// keys are kept in order. `#` starts a comment.
class ConfigFile {
 public:
  static ConfigFile parse_string(const std::string& text);
  static ConfigFile parse_file(const std::string& path);

  bool has_section(const std::string& section) const;
  std::optional<std::string> get(const std::string& section, const std::string& key) const;
  std::vector<std::string> get_all(const std::string& section, const std::string& key) const;

  double get_double(const std::string& section, const std::string& key, double fallback) const;
  int get_int(const std::string& section, const std::string& key, int fallback) const;
  std::uint64_t get_u64(const std::string& section, const std::string& key,
                        std::uint64_t fallback) const;
  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) const;

 private:
  // section -> ordered (key, value) pairs
  std::map<std::string, std::vector<std::pair<std::string, std::string>>> data_;
};

/// Interaction family from a config section: `dim`, `range`, `diag`,
/// `pair i j c` lines, `epsilon`, `W = cos_sum amplitude`.
InteractionFamily family_from_config(const ConfigFile& cfg, const std::string& section);

/// Built-in families used by the default experiment suite.
InteractionFamily builtin_family(const std::string& name);

}  // namespace lselab
