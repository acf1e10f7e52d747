#pragma once

#include <initializer_list>
#include <string>
#include <vector>

#include "json.hpp"
#include "strv/kernel.hpp"

namespace strv {

using Json = nlohmann::json;

/// Accumulates validation problems so that all of them can be reported at
/// once. throw_if_any() raises a single ConfigError listing every entry.
class ConfigErrors {
 public:
  void add(std::string message) { errors_.push_back(std::move(message)); }
  bool empty() const { return errors_.empty(); }
  const std::vector<std::string>& list() const { return errors_; }
  void throw_if_any(const std::string& context) const;

 private:
  std::vector<std::string> errors_;
};

/// Reports keys of `obj` that are not in `allowed`.
void check_keys(const Json& obj, std::initializer_list<const char*> allowed, const std::string& where,
                ConfigErrors& errors);

/// Object form:
///   {"clock_mhz": 50, "scrub": true, "scrub_divider": 1, "sram_rows": 8192,
///    "mul_extra_cycles": 0, "div_extra_cycles": 0}
/// Every key is optional; missing keys keep their defaults.
SystemConfig system_config_from_json(const Json& obj, ConfigErrors& errors);
Json to_json(const SystemConfig& config);

}  // namespace strv
