#include "lselab/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace lselab {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

ConfigFile ConfigFile::parse_string(const std::string& text) {
  ConfigFile cfg;
  std::istringstream in(text);
  std::string line, section;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      auto close = line.find(']');
      if (close == std::string::npos) throw std::runtime_error("malformed section header: " + line);
      section = trim(line.substr(1, close - 1));
      cfg.data_[section];
      continue;
    }
    std::string key, value;
    auto eq = line.find('=');
    if (eq != std::string::npos) {
      key = trim(line.substr(0, eq));
      value = trim(line.substr(eq + 1));
    } else {
      auto sp = line.find_first_of(" \t");
      if (sp == std::string::npos) {
        key = line;
      } else {
        key = line.substr(0, sp);
        value = trim(line.substr(sp + 1));
      }
    }
    if (key.empty()) throw std::runtime_error("malformed config line: " + line);
    cfg.data_[section].emplace_back(key, value);
  }
  return cfg;
}

ConfigFile ConfigFile::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str());
}

bool ConfigFile::has_section(const std::string& section) const { return data_.count(section) > 0; }

std::optional<std::string> ConfigFile::get(const std::string& section,
                                           const std::string& key) const {
  auto it = data_.find(section);
  if (it == data_.end()) return std::nullopt;
  std::optional<std::string> found;
  for (const auto& [k, v] : it->second)
    if (k == key) found = v;  // last occurrence wins
  return found;
}

std::vector<std::string> ConfigFile::get_all(const std::string& section,
                                             const std::string& key) const {
  std::vector<std::string> out;
  auto it = data_.find(section);
  if (it == data_.end()) return out;
  for (const auto& [k, v] : it->second)
    if (k == key) out.push_back(v);
  return out;
}

double ConfigFile::get_double(const std::string& section, const std::string& key,
                              double fallback) const {
  auto v = get(section, key);
  return v ? std::stod(*v) : fallback;
}

int ConfigFile::get_int(const std::string& section, const std::string& key, int fallback) const {
  auto v = get(section, key);
  return v ? std::stoi(*v) : fallback;
}

std::uint64_t ConfigFile::get_u64(const std::string& section, const std::string& key,
                                  std::uint64_t fallback) const {
  auto v = get(section, key);
  return v ? std::stoull(*v) : fallback;
}

std::string ConfigFile::get_string(const std::string& section, const std::string& key,
                                   const std::string& fallback) const {
  auto v = get(section, key);
  return v ? *v : fallback;
}

InteractionFamily family_from_config(const ConfigFile& cfg, const std::string& section) {
  int d = cfg.get_int(section, "dim", 1);
  int R = cfg.get_int(section, "range", 1);
  InteractionFamily fam(d, R);
  fam.set_diagonal(cfg.get_double(section, "diag", 1.0));
  for (const auto& line : cfg.get_all(section, "pair")) {
    std::istringstream ss(line);
    std::vector<double> nums;
    double v;
    while (ss >> v) nums.push_back(v);
    if (nums.size() != static_cast<size_t>(2 * d + 1))
      throw std::runtime_error("pair line needs two sites and a coefficient: " + line);
    Site a(static_cast<size_t>(d)), b(static_cast<size_t>(d));
    for (int i = 0; i < d; ++i) {
      a[static_cast<size_t>(i)] = static_cast<int>(nums[static_cast<size_t>(i)]);
      b[static_cast<size_t>(i)] = static_cast<int>(nums[static_cast<size_t>(d + i)]);
    }
    fam.set_pair(a, b, nums.back());
  }
  fam.set_epsilon(cfg.get_double(section, "epsilon", 0.0));
  for (const auto& line : cfg.get_all(section, "W")) {
    std::istringstream ss(line);
    std::string name;
    double amp = 0;
    ss >> name >> amp;
    if (name == "cos_sum")
      fam.add_perturbation(cos_sum_perturbation(d, amp));
    else
      throw std::runtime_error("unknown perturbation: " + name);
  }
  return fam;
}

InteractionFamily builtin_family(const std::string& name) {
  if (name == "single_site") {
    InteractionFamily fam(1, 1);
    fam.set_diagonal(1.0);
    return fam;
  }
  if (name == "chain") {
    // Tridiagonal coefficient matrix diag 1, off-diagonal 0.2; the unordered
    // pair carries both symmetric entries.
    InteractionFamily fam(1, 1);
    fam.set_diagonal(1.0);
    fam.set_pair({0}, {1}, 0.4);
    return fam;
  }
  if (name == "product_chain") {
    InteractionFamily fam(1, 1);
    fam.set_diagonal(1.0);
    return fam;
  }
  if (name == "near_critical_chain") {
    // Coefficient matrix diag 1, off-diagonal 0.45; still positive definite
    // but with slow correlation decay.
    InteractionFamily fam(1, 1);
    fam.set_diagonal(1.0);
    fam.set_pair({0}, {1}, 0.9);
    return fam;
  }
  if (name == "perturbed_chain") {
    InteractionFamily fam(1, 1);
    fam.set_diagonal(1.0);
    fam.set_epsilon(0.1);
    fam.add_perturbation(cos_sum_perturbation(1, 1.0));
    return fam;
  }
  throw std::runtime_error("unknown family: " + name);
}

}  // namespace lselab
