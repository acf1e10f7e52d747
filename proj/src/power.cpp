#include "strv/power.hpp"

#include <cmath>
#include <fstream>

#include "strv/errors.hpp"

namespace strv::power {

const char* to_string(Scenario s) {
  switch (s) {
    case Scenario::Dhrystone: return "dhrystone";
    case Scenario::RegisterCentered: return "register";
    case Scenario::SramCentered: return "sram";
  }
  return "?";
}

Scenario scenario_from_string(std::string_view name) {
  for (Scenario s : {Scenario::Dhrystone, Scenario::RegisterCentered, Scenario::SramCentered})
    if (name == to_string(s)) return s;
  throw ConfigError("unknown power scenario '" + std::string(name) + "' (dhrystone, register, sram)");
}

double PowerModel::system_slope(Scenario s) const {
  const auto& sl = slope_uw_per_mhz[static_cast<int>(s)];
  return sl[0] + sl[1] + sl[2];
}

PowerModel calibrate(std::vector<CalibrationRow> rows, double calibration_mhz, double leakage_uw,
                     double scrub_quoted_uw_per_mhz) {
  if (!(calibration_mhz > 0) || !std::isfinite(calibration_mhz))
    throw ConfigError("power calibration: calibration_mhz must be positive");
  if (!(leakage_uw >= 0) || !std::isfinite(leakage_uw)) throw ConfigError("power calibration: bad leakage");
  auto find = [&](Scenario s, bool scrub) -> const CalibrationRow& {
    for (const CalibrationRow& r : rows)
      if (r.scenario == s && r.scrub == scrub) return r;
    throw ConfigError(std::string("power calibration: no row for ") + to_string(s) +
                      (scrub ? " with refresh" : " without refresh"));
  };

  PowerModel m;
  m.calibration_mhz = calibration_mhz;
  m.leakage_uw = leakage_uw;
  m.scrub_quoted_uw_per_mhz = scrub_quoted_uw_per_mhz;

  const CalibrationRow& ref = find(Scenario::Dhrystone, false);
  const double ref_sum = ref.domain_mw[0] + ref.domain_mw[1] + ref.domain_mw[2];
  if (!(ref_sum > 0)) throw ConfigError("power calibration: dhrystone row has no power");
  for (std::size_t d = 0; d < kDomainCount; ++d) m.leakage_share[d] = ref.domain_mw[d] / ref_sum;

  double adder = 0;
  for (Scenario s : {Scenario::Dhrystone, Scenario::RegisterCentered, Scenario::SramCentered}) {
    const CalibrationRow& off = find(s, false);
    const CalibrationRow& on = find(s, true);
    // Domains are scaled so that they add up to the measured total, which is
    // given with more care than the rounded domain columns.
    const double sum = off.domain_mw[0] + off.domain_mw[1] + off.domain_mw[2];
    for (std::size_t d = 0; d < kDomainCount; ++d) {
      const double mw = off.domain_mw[d] * off.total_mw / sum;
      const double slope = (mw * 1000 - leakage_uw * m.leakage_share[d]) / calibration_mhz;
      if (!(slope > 0)) throw ConfigError("power calibration: non-positive slope for " + std::string(to_string(s)));
      m.slope_uw_per_mhz[static_cast<int>(s)][d] = slope;
    }
    adder += (on.total_mw - off.total_mw) * 1000 / calibration_mhz;
  }
  m.scrub_uw_per_mhz = adder / kScenarioCount;
  if (!(m.scrub_uw_per_mhz > 0)) throw ConfigError("power calibration: refresh rows must cost more power");
  m.calibration = std::move(rows);
  return m;
}

PowerModel default_model() {
  using S = Scenario;
  return calibrate(
      {
          {S::Dhrystone, true, {7.33, 10.26, 2.49}, 20.08},
          {S::RegisterCentered, true, {8.55, 10.68, 2.55}, 21.77},
          {S::SramCentered, true, {7.61, 10.44, 2.45}, 20.51},
          {S::Dhrystone, false, {7.33, 5.12, 2.49}, 14.94},
          {S::RegisterCentered, false, {8.54, 5.54, 2.55}, 16.63},
          {S::SramCentered, false, {7.61, 5.30, 2.46}, 15.37},
      },
      50, 110, 88);
}

PowerModel power_model_from_json(const Json& doc) {
  ConfigErrors errors;
  check_keys(doc, {"schema", "calibration_mhz", "leakage_uw", "scrub_quoted_uw_per_mhz", "rows"}, "power", errors);
  if (!doc.is_object()) errors.throw_if_any("power model");
  if (doc.value("schema", std::string()) != "strv-power/1") errors.add("schema: expected \"strv-power/1\"");
  auto number = [&](const Json& obj, const char* key, const std::string& where) -> double {
    if (!obj.contains(key) || !obj[key].is_number()) {
      errors.add(where + "." + key + ": expected a number");
      return 0;
    }
    return obj[key].get<double>();
  };
  const double mhz = number(doc, "calibration_mhz", "power");
  const double leak = number(doc, "leakage_uw", "power");
  const double quoted = doc.contains("scrub_quoted_uw_per_mhz") ? number(doc, "scrub_quoted_uw_per_mhz", "power") : 88;
  std::vector<CalibrationRow> rows;
  if (!doc.contains("rows") || !doc["rows"].is_array()) {
    errors.add("rows: expected an array");
  } else {
    for (std::size_t i = 0; i < doc["rows"].size(); ++i) {
      const Json& r = doc["rows"][i];
      const std::string where = "rows[" + std::to_string(i) + "]";
      check_keys(r, {"scenario", "scrub", "core", "sram", "peripherals", "total"}, where, errors);
      if (!r.is_object()) continue;
      CalibrationRow row;
      try {
        row.scenario = scenario_from_string(r.value("scenario", std::string()));
      } catch (const ConfigError& e) {
        errors.add(where + ": " + e.what());
      }
      if (r.contains("scrub") && r["scrub"].is_boolean()) row.scrub = r["scrub"].get<bool>();
      else errors.add(where + ".scrub: expected true or false");
      row.domain_mw = {number(r, "core", where), number(r, "sram", where), number(r, "peripherals", where)};
      row.total_mw = number(r, "total", where);
      rows.push_back(row);
    }
  }
  errors.throw_if_any("power model");
  return calibrate(std::move(rows), mhz, leak, quoted);
}

PowerModel load_power_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open power model '" + path.string() + "'");
  try {
    return power_model_from_json(Json::parse(in));
  } catch (const Json::parse_error& e) {
    throw ConfigError("power model '" + path.string() + "' is not valid JSON: " + e.what());
  }
}

Json to_json(const PowerModel& m) {
  Json rows = Json::array();
  for (const CalibrationRow& r : m.calibration)
    rows.push_back(Json{{"scenario", to_string(r.scenario)},
                        {"scrub", r.scrub},
                        {"core", r.domain_mw[0]},
                        {"sram", r.domain_mw[1]},
                        {"peripherals", r.domain_mw[2]},
                        {"total", r.total_mw}});
  return Json{{"schema", "strv-power/1"},
              {"calibration_mhz", m.calibration_mhz},
              {"leakage_uw", m.leakage_uw},
              {"scrub_quoted_uw_per_mhz", m.scrub_quoted_uw_per_mhz},
              {"rows", rows}};
}

PowerEstimate estimate_power(const PowerModel& m, double f, Scenario s, bool scrub) {
  if (!(f >= 0) || !std::isfinite(f)) throw ConfigError("frequency must be a finite value >= 0 MHz");
  PowerEstimate e;
  for (std::size_t d = 0; d < kDomainCount; ++d) {
    double uw = m.leakage_uw * m.leakage_share[d] + m.slope_uw_per_mhz[static_cast<int>(s)][d] * f;
    if (scrub && d == static_cast<std::size_t>(Domain::Sram)) uw += m.scrub_uw_per_mhz * f;
    e.domain_mw[d] = uw / 1000;
    e.total_mw += e.domain_mw[d];
  }
  return e;
}

ActivityCycles classify(const PipelineStats& stats, std::uint64_t cycles) {
  const std::uint64_t sram = std::min(stats.dmem_cycles, cycles);
  return {cycles - sram, sram};
}

double estimate_energy_mj(const PowerModel& m, const ActivityCycles& a, double f, bool scrub) {
  if (!(f > 0) || !std::isfinite(f)) throw ConfigError("frequency must be positive");
  const double reg = estimate_power(m, f, Scenario::RegisterCentered, scrub).total_mw;
  const double sram = estimate_power(m, f, Scenario::SramCentered, scrub).total_mw;
  // mW * s = mJ; one cycle lasts 1 / (f * 1e6) s.
  return (reg * static_cast<double>(a.register_cycles) + sram * static_cast<double>(a.sram_cycles)) / (f * 1e6);
}

}  // namespace strv::power
