#include <cmath>

#include "doctest.h"
#include "strv/kernel.hpp"
#include "strv/power.hpp"
#include "support/programs.hpp"

using namespace strv;
using namespace strv::power;

namespace {

struct Row {
  Scenario s;
  bool scrub;
  double core, sram, periph, total;
};

// Measured at 50 MHz.
const Row kTable[] = {
    {Scenario::Dhrystone, true, 7.33, 10.26, 2.49, 20.08},
    {Scenario::RegisterCentered, true, 8.55, 10.68, 2.55, 21.77},
    {Scenario::SramCentered, true, 7.61, 10.44, 2.45, 20.51},
    {Scenario::Dhrystone, false, 7.33, 5.12, 2.49, 14.94},
    {Scenario::RegisterCentered, false, 8.54, 5.54, 2.55, 16.63},
    {Scenario::SramCentered, false, 7.61, 5.30, 2.46, 15.37},
};

double rel(double a, double b) { return std::fabs(a - b) / std::fabs(b); }

}  // namespace

TEST_CASE("all six measured rows are reproduced at 50 MHz") {
  const PowerModel m = default_model();
  for (const Row& r : kTable) {
    CAPTURE(to_string(r.s));
    CAPTURE(r.scrub);
    const PowerEstimate e = estimate_power(m, 50, r.s, r.scrub);
    CHECK(rel(e.total_mw, r.total) < 0.01);
    CHECK(std::fabs(e.total_mw - r.total) < 0.006);  // within the rounding of the table
    CHECK(std::fabs(e.domain_mw[0] - r.core) < 0.0151);
    CHECK(std::fabs(e.domain_mw[1] - r.sram) < 0.0151);
    CHECK(std::fabs(e.domain_mw[2] - r.periph) < 0.0151);
  }
}

TEST_CASE("leakage, slopes and scrubber adder") {
  const PowerModel m = default_model();
  for (Scenario s : {Scenario::Dhrystone, Scenario::RegisterCentered, Scenario::SramCentered}) {
    CHECK(estimate_power(m, 0, s, false).total_mw == doctest::Approx(0.110).epsilon(1e-12));
    CHECK(estimate_power(m, 0, s, true).total_mw == doctest::Approx(0.110).epsilon(1e-12));
    for (double sl : m.slope_uw_per_mhz[static_cast<int>(s)]) CHECK(sl > 0);
  }
  // (14.94 mW - 0.110 mW) / 50 MHz
  CHECK(m.system_slope(Scenario::Dhrystone) == doctest::Approx(296.6).epsilon(1e-9));
  CHECK(m.system_slope(Scenario::Dhrystone) >= 268);
  CHECK(m.system_slope(Scenario::Dhrystone) <= 300);
  CHECK(m.scrub_uw_per_mhz == doctest::Approx(102.8).epsilon(1e-9));
  CHECK(m.scrub_quoted_uw_per_mhz == 88);

  const double delta = estimate_power(m, 50, Scenario::Dhrystone, true).domain_mw[1] -
                       estimate_power(m, 50, Scenario::Dhrystone, false).domain_mw[1];
  CHECK(rel(delta, 10.26 - 5.12) < 0.01);
  for (double f : {1.0, 13.0, 50.0, 80.0}) {
    for (Scenario s : {Scenario::Dhrystone, Scenario::RegisterCentered, Scenario::SramCentered}) {
      const PowerEstimate on = estimate_power(m, f, s, true), off = estimate_power(m, f, s, false);
      CHECK(on.total_mw - off.total_mw == doctest::Approx(m.scrub_uw_per_mhz * f / 1000));
      CHECK(on.domain_mw[0] == off.domain_mw[0]);
      CHECK(on.domain_mw[2] == off.domain_mw[2]);
    }
  }
}

TEST_CASE("power is linear in frequency") {
  const PowerModel m = default_model();
  const double leak = m.leakage_uw / 1000;
  for (double f : {0.5, 3.0, 25.0, 50.0, 100.0})
    for (Scenario s : {Scenario::Dhrystone, Scenario::RegisterCentered, Scenario::SramCentered})
      for (bool scrub : {false, true}) {
        const double p1 = estimate_power(m, f, s, scrub).total_mw - leak;
        const double p2 = estimate_power(m, 2 * f, s, scrub).total_mw - leak;
        CHECK(p2 == doctest::Approx(2 * p1).epsilon(1e-12));
      }
  CHECK_THROWS_AS(estimate_power(m, -1, Scenario::Dhrystone, false), ConfigError);
  CHECK_THROWS_AS(estimate_power(m, NAN, Scenario::Dhrystone, false), ConfigError);
  CHECK_THROWS_AS(scenario_from_string("idle"), ConfigError);
  CHECK(scenario_from_string("register") == Scenario::RegisterCentered);
}

TEST_CASE("energy over activity classes") {
  const PowerModel m = default_model();
  const ActivityCycles a{1000, 400};
  const double e = estimate_energy_mj(m, a, 50, true);
  CHECK(estimate_energy_mj(m, {2000, 800}, 50, true) == doctest::Approx(2 * e));
  CHECK(estimate_energy_mj(m, {0, 0}, 50, true) == 0);
  const double all_reg = estimate_energy_mj(m, {1400, 0}, 50, true);
  const double all_sram = estimate_energy_mj(m, {0, 1400}, 50, true);
  CHECK(e <= std::max(all_reg, all_sram));
  CHECK(e >= std::min(all_reg, all_sram));
  // 1000 cycles at 50 MHz are 20 us.
  CHECK(estimate_energy_mj(m, {1000, 0}, 50, false) ==
        doctest::Approx(estimate_power(m, 50, Scenario::RegisterCentered, false).total_mw * 20e-6));
  CHECK_THROWS_AS(estimate_energy_mj(m, a, 0, true), ConfigError);

  System s;
  s.load_image(parse_image(progs::campaign_program()));
  const RunResult r = s.run(10000);
  REQUIRE(r.status == RunStatus::Halted);
  const ActivityCycles c = classify(s.stats(), r.cycles);
  CHECK(c.register_cycles + c.sram_cycles == r.cycles);
  CHECK(c.sram_cycles == s.stats().dmem_cycles);
  CHECK(c.sram_cycles > 0);
}

TEST_CASE("shipped calibration file matches the built-in model") {
  const PowerModel file = load_power_model(std::filesystem::path(STRV_SOURCE_DIR) / "data/power_calibration.json");
  CHECK(file == default_model());
  CHECK(power_model_from_json(to_json(file)) == file);

  Json bad = to_json(file);
  bad["rows"].erase(bad["rows"].begin() + 4);
  CHECK_THROWS_AS(power_model_from_json(bad), ConfigError);
  bad = to_json(file);
  bad["rows"][0]["scenario"] = "idle";
  bad["extra"] = 1;
  try {
    power_model_from_json(bad);
    FAIL("accepted");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("idle") != std::string::npos);
    CHECK(std::string(e.what()).find("extra") != std::string::npos);
  }
  CHECK_THROWS_AS(load_power_model("/nonexistent/power.json"), ConfigError);
}
