#include "strv/config_json.hpp"

#include <algorithm>
#include <cstring>

namespace strv {

void ConfigErrors::throw_if_any(const std::string& context) const {
  if (errors_.empty()) return;
  std::string msg = context + ": " + std::to_string(errors_.size()) + " error(s)";
  for (const std::string& e : errors_) msg += "\n  - " + e;
  throw ConfigError(msg);
}

void check_keys(const Json& obj, std::initializer_list<const char*> allowed, const std::string& where,
                ConfigErrors& errors) {
  if (!obj.is_object()) {
    errors.add(where + ": expected an object");
    return;
  }
  for (const auto& [key, value] : obj.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* k) { return key == k; });
    if (!known) errors.add(where + ": unknown key '" + key + "'");
  }
}

namespace {

template <class T>
void read_unsigned(const Json& obj, const char* key, T& out, ConfigErrors& errors) {
  if (!obj.contains(key)) return;
  const Json& v = obj.at(key);
  if (!v.is_number_unsigned()) {
    errors.add(std::string("system.") + key + ": expected a non-negative integer");
    return;
  }
  out = v.get<T>();
}

}  // namespace

SystemConfig system_config_from_json(const Json& obj, ConfigErrors& errors) {
  SystemConfig c;
  check_keys(obj, {"clock_mhz", "scrub", "scrub_divider", "sram_rows", "mul_extra_cycles", "div_extra_cycles"},
             "system", errors);
  if (!obj.is_object()) return c;
  if (obj.contains("clock_mhz")) {
    if (obj["clock_mhz"].is_number()) c.clock_mhz = obj["clock_mhz"].get<double>();
    else errors.add("system.clock_mhz: expected a number");
  }
  if (obj.contains("scrub")) {
    if (obj["scrub"].is_boolean()) c.scrub_enabled = obj["scrub"].get<bool>();
    else errors.add("system.scrub: expected true or false");
  }
  read_unsigned(obj, "scrub_divider", c.scrub_divider, errors);
  read_unsigned(obj, "sram_rows", c.sram_rows, errors);
  read_unsigned(obj, "mul_extra_cycles", c.timing.mul_extra_cycles, errors);
  read_unsigned(obj, "div_extra_cycles", c.timing.div_extra_cycles, errors);
  try {
    c.validate();
  } catch (const ConfigError& e) {
    errors.add(std::string("system: ") + e.what());
  }
  return c;
}

Json to_json(const SystemConfig& c) {
  return Json{{"clock_mhz", c.clock_mhz},
              {"scrub", c.scrub_enabled},
              {"scrub_divider", c.scrub_divider},
              {"sram_rows", c.sram_rows},
              {"mul_extra_cycles", c.timing.mul_extra_cycles},
              {"div_extra_cycles", c.timing.div_extra_cycles}};
}

}  // namespace strv
