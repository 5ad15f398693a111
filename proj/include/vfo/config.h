#ifndef VFO_CONFIG_H_
#define VFO_CONFIG_H_

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace vfo {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Flat key=value configuration. Files hold one entry per line; blank lines
// and lines starting with '#' are ignored.
class ConfigMap {
 public:
  ConfigMap() = default;
  ConfigMap(std::initializer_list<std::pair<const std::string, std::string>> init)
      : values_(init) {}

  static ConfigMap parse(const std::string& text);
  static ConfigMap read(const std::filesystem::path& path);
  // Parses "key=value".
  void set_entry(const std::string& entry);
  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
  // Entries of `other` override ours.
  void merge(const ConfigMap& other);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<int> get_int_list(const std::string& key, std::vector<int> fallback) const;
  std::vector<double> get_double_list(const std::string& key,
                                      std::vector<double> fallback) const;

  // Sub-map of keys starting with "<prefix>." with the prefix removed.
  ConfigMap with_prefix(const std::string& prefix) const;
  const std::map<std::string, std::string>& values() const { return values_; }
  std::string serialize() const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace vfo

#endif  // VFO_CONFIG_H_
