#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "strv/config_json.hpp"
#include "strv/pipeline.hpp"
#include "strv/tmr.hpp"

namespace strv::power {

enum class Scenario : std::uint8_t { Dhrystone, RegisterCentered, SramCentered };
inline constexpr std::size_t kScenarioCount = 3;
const char* to_string(Scenario s);
/// "dhrystone", "register", "sram". Throws ConfigError otherwise.
Scenario scenario_from_string(std::string_view name);

/// One measured row: per-domain power in mW at the calibration frequency.
struct CalibrationRow {
  Scenario scenario = Scenario::Dhrystone;
  bool scrub = true;
  std::array<double, kDomainCount> domain_mw{};  // core, sram, peripherals
  double total_mw = 0;

  bool operator==(const CalibrationRow&) const = default;
};

/// P_domain(f) = leakage_uw * leakage_share[d] + slope[scenario][d] * f,
/// plus scrub_uw_per_mhz * f on the SRAM domain when the scrubber runs.
struct PowerModel {
  double calibration_mhz = 50;
  double leakage_uw = 110;
  // The measured leakage is a system figure. It is spread over the domains in
  // proportion to the Dhrystone row without refresh, only so that per-domain
  // figures add up to the total.
  std::array<double, kDomainCount> leakage_share{};
  std::array<std::array<double, kDomainCount>, kScenarioCount> slope_uw_per_mhz{};
  double scrub_uw_per_mhz = 0;          // from the table row differences
  double scrub_quoted_uw_per_mhz = 88;  // the prose figure, kept for reference
  std::vector<CalibrationRow> calibration;

  /// Sum of the domain slopes, scrubber excluded.
  double system_slope(Scenario s) const;

  bool operator==(const PowerModel&) const = default;
};

/// Derives slopes, leakage split and scrubber adder from the measured rows.
/// Needs a row with and without refresh for every scenario.
PowerModel calibrate(std::vector<CalibrationRow> rows, double calibration_mhz, double leakage_uw,
                     double scrub_quoted_uw_per_mhz);

/// The six rows measured at 50 MHz, 1.2 V, 25 C.
PowerModel default_model();

/// `strv-power/1`:
///   {"schema": "strv-power/1", "calibration_mhz": 50, "leakage_uw": 110,
///    "scrub_quoted_uw_per_mhz": 88,
///    "rows": [{"scenario": "dhrystone", "scrub": true,
///              "core": 7.33, "sram": 10.26, "peripherals": 2.49, "total": 20.08}, ...]}
PowerModel power_model_from_json(const Json& doc);
PowerModel load_power_model(const std::filesystem::path& path);
Json to_json(const PowerModel& model);

struct PowerEstimate {
  std::array<double, kDomainCount> domain_mw{};
  double total_mw = 0;
};

/// Throws ConfigError for a negative or non-finite frequency.
PowerEstimate estimate_power(const PowerModel& model, double freq_mhz, Scenario scenario, bool scrub);

/// Cycles split by what the bridge was doing: a DMEM access makes a cycle
/// SRAM-centered, anything else counts as register-centered.
struct ActivityCycles {
  std::uint64_t register_cycles = 0;
  std::uint64_t sram_cycles = 0;
};
ActivityCycles classify(const PipelineStats& stats, std::uint64_t cycles);

/// Energy in mJ over a run at `freq_mhz` (> 0).
double estimate_energy_mj(const PowerModel& model, const ActivityCycles& activity, double freq_mhz, bool scrub);

}  // namespace strv::power
