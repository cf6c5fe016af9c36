#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "hoist/driver.hpp"

namespace hoist {

namespace {

std::string trim(const std::string& s) {
  auto a = s.find_first_not_of(" \t\r\n");
  auto b = s.find_last_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  return s.substr(a, b - a + 1);
}

}  // namespace

Config Config::parse_string(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::runtime_error("config line " + std::to_string(lineno) + ": bad section");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty()) throw std::runtime_error("config line " + std::to_string(lineno) + ": empty key");
    cfg.kv_[{section, key}] = val;
    cfg.used_[{section, key}] = false;
  }
  return cfg;
}

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str());
}

bool Config::has(const std::string& section, const std::string& key) const {
  return kv_.count({section, key}) > 0;
}

std::string Config::get(const std::string& section, const std::string& key,
                        const std::string& fallback) const {
  auto it = kv_.find({section, key});
  if (it == kv_.end()) return fallback;
  used_[{section, key}] = true;
  return it->second;
}

double Config::get(const std::string& section, const std::string& key,
                   double fallback) const {
  auto it = kv_.find({section, key});
  if (it == kv_.end()) return fallback;
  used_[{section, key}] = true;
  try {
    return std::stod(it->second);
  } catch (...) {
    throw std::runtime_error("config [" + section + "] " + key + ": not a number");
  }
}

int Config::get(const std::string& section, const std::string& key, int fallback) const {
  auto it = kv_.find({section, key});
  if (it == kv_.end()) return fallback;
  used_[{section, key}] = true;
  try {
    return std::stoi(it->second);
  } catch (...) {
    throw std::runtime_error("config [" + section + "] " + key + ": not an integer");
  }
}

bool Config::get(const std::string& section, const std::string& key, bool fallback) const {
  auto it = kv_.find({section, key});
  if (it == kv_.end()) return fallback;
  used_[{section, key}] = true;
  std::string v = it->second;
  std::transform(v.begin(), v.end(), v.begin(), ::tolower);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw std::runtime_error("config [" + section + "] " + key + ": not a boolean");
}

void Config::check_consumed() const {
  std::string unknown;
  for (auto& [k, used] : used_)
    if (!used) unknown += " [" + k.first + "] " + k.second;
  if (!unknown.empty())
    throw std::runtime_error("unknown config keys (typo?):" + unknown);
}

}  // namespace hoist
