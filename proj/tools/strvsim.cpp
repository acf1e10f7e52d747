// strvsim: run programs, fault campaigns and power estimates from the shell.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "strv/config_json.hpp"
#include "strv/kernel.hpp"
#include "strv/power.hpp"
#include "strv/seu.hpp"

using namespace strv;

namespace {

enum Exit : int { kOk = 0, kConfig = 2, kSimFault = 3, kTimeout = 4, kCheckFailed = 5 };

struct Flip {
  std::uint64_t cycle = 0;
  seu::Injection injection;
};

std::ofstream open_out(const std::string& path, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  return out;
}

void write_json(const std::string& path, const Json& doc) {
  if (path == "-") {
    std::cout << doc.dump(2) << "\n";
    return;
  }
  open_out(path) << doc.dump(2) << "\n";
}

// CYCLE:TARGET[:REPLICA[:BIT[:COUNT]]], TARGET a cell name or row=N;
// phase "edge" with a trailing @edge.
Flip parse_flip(const std::string& text, const System& s) {
  std::string spec = text;
  bool edge = false;
  if (const auto at = spec.rfind("@edge"); at != std::string::npos && at + 5 == spec.size()) {
    edge = true;
    spec.resize(at);
  }
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
  if (parts.size() < 2 || parts.size() > 5) throw ConfigError("--flip '" + text + "': expected CYCLE:TARGET[:REPLICA[:BIT[:COUNT]]]");
  auto num = [&](const std::string& v) -> std::uint64_t {
    try {
      std::size_t used = 0;
      const std::uint64_t n = std::stoull(v, &used, 0);
      if (used == v.size()) return n;
    } catch (const std::exception&) {
    }
    throw ConfigError("--flip '" + text + "': '" + v + "' is not a number");
  };
  Flip f;
  f.cycle = num(parts[0]);
  seu::Injection& inj = f.injection;
  inj.cycle = f.cycle;
  if (parts[1].rfind("row=", 0) == 0) {
    inj.sram_row = true;
    inj.domain = Domain::Sram;
    inj.element = static_cast<std::uint32_t>(num(parts[1].substr(4)));
    if (inj.element >= s.sram().rows()) throw ConfigError("--flip '" + text + "': row out of range");
  } else {
    if (!s.bank().contains(parts[1])) throw ConfigError("--flip '" + text + "': no sequential element named '" + parts[1] + "'");
    const CellRef ref = s.bank().find(parts[1]);
    inj.element = ref.index;
    inj.domain = s.bank().cell(ref).domain;
    inj.phase = edge ? seu::Phase::EdgeAligned : seu::Phase::MidCycle;
  }
  if (parts.size() > 2) inj.replica = static_cast<std::uint8_t>(num(parts[2]));
  if (parts.size() > 3) inj.bit = static_cast<std::uint8_t>(num(parts[3]));
  if (parts.size() > 4) inj.count = static_cast<std::uint8_t>(num(parts[4]));
  const unsigned width = inj.sram_row ? 32 : s.bank().cell(CellRef{inj.element}).width;
  if (inj.replica > 2 || inj.bit >= width || inj.count < 1 || inj.count > 2)
    throw ConfigError("--flip '" + text + "': replica 0..2, bit below " + std::to_string(width) + ", count 1 or 2");
  return f;
}

Json counters_json(const std::array<std::uint32_t, kDomainCount>& c) {
  return Json{{"core", c[0]}, {"sram", c[1]}, {"peripherals", c[2]}};
}

// ---------------------------------------------------------------------------

struct RunOptions {
  std::string image;
  std::string base = "0";
  std::uint64_t max_cycles = 100'000'000;
  bool limit_ok = false;
  bool scrub_off = false;
  std::uint32_t scrub_divider = 1;
  std::uint32_t sram_rows = memmap::kSramRows;
  double clock_mhz = 50;
  unsigned mul_extra = TimingConfig{}.mul_extra_cycles;
  unsigned div_extra = TimingConfig{}.div_extra_cycles;
  std::string stimulus;
  std::string tx_out;
  std::string report;
  std::string counters_csv;
  std::uint64_t sample = 1000;
  std::vector<std::string> flips;
  bool quiet = false;
};

int cmd_run(const RunOptions& o) {
  SystemConfig cfg;
  cfg.clock_mhz = o.clock_mhz;
  cfg.scrub_enabled = !o.scrub_off;
  cfg.scrub_divider = o.scrub_divider;
  cfg.sram_rows = o.sram_rows;
  cfg.timing.mul_extra_cycles = o.mul_extra;
  cfg.timing.div_extra_cycles = o.div_extra;
  cfg.validate();

  System s(cfg);
  s.load_image(load_image_file(o.image, static_cast<std::uint32_t>(std::stoul(o.base, nullptr, 0))));
  if (!o.stimulus.empty()) {
    std::ifstream in(o.stimulus);
    if (!in) throw ConfigError("cannot open stimulus '" + o.stimulus + "'");
    s.set_stimulus(std::make_shared<const std::vector<StimulusEvent>>(parse_stimulus(in)));
  }
  std::vector<Flip> flips;
  for (const std::string& f : o.flips) flips.push_back(parse_flip(f, s));
  std::stable_sort(flips.begin(), flips.end(), [](const Flip& a, const Flip& b) { return a.cycle < b.cycle; });

  std::ofstream timeline;
  if (!o.counters_csv.empty()) {
    if (o.sample == 0) throw ConfigError("--sample must be positive");
    timeline = open_out(o.counters_csv);
    timeline << "cycle,core,sram,peripherals\n";
  }
  auto sample = [&] {
    const auto c = s.counters();
    timeline << s.cycle() << ',' << c[0] << ',' << c[1] << ',' << c[2] << '\n';
  };

  // Same loop as System::run, with faults and sampling between cycles.
  RunResult r;
  std::size_t next = 0;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    while (!s.done()) {
      if (timeline.is_open() && s.cycle() % o.sample == 0) sample();
      if (s.cycle() >= o.max_cycles) {
        r.status = o.limit_ok ? RunStatus::CycleLimit : RunStatus::Timeout;
        if (!o.limit_ok) r.message = "cycle limit of " + std::to_string(o.max_cycles) + " reached before the program halted";
        break;
      }
      while (next < flips.size() && flips[next].cycle == s.cycle()) seu::apply_fault(s, flips[next++].injection);
      s.step();
    }
  } catch (const SimFault& f) {
    r.status = RunStatus::Fault;
    r.fault = f.kind();
    r.fault_address = f.address();
    r.message = f.what();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (timeline.is_open()) sample();
  r.cycles = s.cycle();
  r.retired = s.stats().retired;

  const auto& tx = s.peripherals().tx_output();
  if (!o.tx_out.empty()) open_out(o.tx_out, true).write(reinterpret_cast<const char*>(tx.data()), tx.size());
  else std::cout.write(reinterpret_cast<const char*>(tx.data()), static_cast<std::streamsize>(tx.size())).flush();

  const power::PowerModel model = power::default_model();
  const power::ActivityCycles act = power::classify(s.stats(), r.cycles);
  const double energy = r.cycles ? power::estimate_energy_mj(model, act, cfg.clock_mhz, cfg.scrub_enabled) : 0.0;
  const auto counters = s.counters();

  if (!o.quiet) {
    std::fprintf(stderr, "status     %s%s%s\n", to_string(r.status), r.message.empty() ? "" : ": ", r.message.c_str());
    std::fprintf(stderr, "cycles     %llu\nretired    %llu\n", static_cast<unsigned long long>(r.cycles),
                 static_cast<unsigned long long>(r.retired));
    if (r.retired) std::fprintf(stderr, "CPI        %.4f\n", static_cast<double>(r.cycles) / static_cast<double>(r.retired));
    std::fprintf(stderr, "counters   core %u, sram %u, peripherals %u\n", counters[0], counters[1], counters[2]);
    std::fprintf(stderr, "energy     %.6g mJ at %g MHz (%llu SRAM-centered cycles), scrub %s\n", energy, cfg.clock_mhz,
                 static_cast<unsigned long long>(act.sram_cycles), cfg.scrub_enabled ? "on" : "off");
    std::fprintf(stderr, "host time  %.3f s\n", secs);
  }

  if (!o.report.empty()) {
    const ArchView a = s.architecture();
    const PipelineStats& st = s.stats();
    std::string tx_hex;
    for (std::uint8_t b : tx) {
      char buf[3];
      std::snprintf(buf, sizeof buf, "%02x", b);
      tx_hex += buf;
    }
    write_json(o.report,
               Json{{"schema", "strv-run-report/1"},
                    {"image", o.image},
                    {"system", to_json(cfg)},
                    {"status", to_string(r.status)},
                    {"message", r.message},
                    {"fault", r.fault ? Json(to_string(*r.fault)) : Json()},
                    {"fault_address", r.fault ? Json(r.fault_address) : Json()},
                    {"cycles", r.cycles},
                    {"retired", r.retired},
                    {"pc", a.pc},
                    {"regs", a.regs},
                    {"counters", counters_json(counters)},
                    {"tx_hex", tx_hex},
                    {"stats",
                     {{"dmem_cycles", st.dmem_cycles},
                      {"branch_bubbles", st.branch_bubbles},
                      {"straddle_cycles", st.straddle_cycles},
                      {"exec_wait_cycles", st.exec_wait_cycles},
                      {"idle_cycles", st.idle_cycles}}},
                    {"energy_mj", energy}});
  }

  switch (r.status) {
    case RunStatus::Halted:
    case RunStatus::CycleLimit: return kOk;
    case RunStatus::Fault: return kSimFault;
    case RunStatus::Timeout: return kTimeout;
  }
  return kOk;
}

// ---------------------------------------------------------------------------

struct CampaignOptions {
  std::string config;
  std::string out = "report.json";
  std::string csv_dir;
  unsigned jobs = 1;
  bool check = false;
  bool quiet = false;
};

bool single_upsets_only(const seu::RunRecord& r) {
  return std::all_of(r.injections.begin(), r.injections.end(),
                     [](const seu::InjectionRecord& i) { return i.injection.count == 1; });
}

int cmd_campaign(const CampaignOptions& o) {
  const seu::CampaignConfig cfg = seu::load_campaign_file(o.config);
  const seu::Campaign campaign(cfg);
  if (!o.quiet)
    std::fprintf(stderr, "%zu runs of %llu cycles\n", campaign.run_count(),
                 static_cast<unsigned long long>(campaign.run_cycles()));
  std::size_t last_pct = 0;
  const auto t0 = std::chrono::steady_clock::now();
  const seu::CampaignReport rep = campaign.run(o.jobs, [&](std::size_t done, std::size_t total) {
    const std::size_t pct = total ? done * 100 / total : 100;
    if (!o.quiet && pct / 10 != last_pct / 10) std::fprintf(stderr, "  %zu%%\n", pct);
    last_pct = pct;
  });
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_json(o.out, seu::to_json(rep));

  if (!o.csv_dir.empty()) {
    std::filesystem::create_directories(o.csv_dir);
    for (const char* key : {"mid", "edge", "sram"}) {
      std::ofstream f = open_out((std::filesystem::path(o.csv_dir) / (std::string("latency_") + key + ".csv")).string());
      f << "latency_cycles,count\n";
      if (auto it = rep.summary.latency.find(key); it != rep.summary.latency.end())
        for (const auto& [lat, n] : it->second.histogram) f << lat << ',' << n << '\n';
    }
    std::ofstream f = open_out((std::filesystem::path(o.csv_dir) / "runs.csv").string());
    f << "experiment,index,status,divergence,injections,corrected,uncorrectable,core,sram,peripherals\n";
    for (const seu::RunRecord& r : rep.runs) {
      std::size_t corrected = 0, unc = 0;
      for (const auto& i : r.injections) {
        corrected += i.corrected;
        unc += i.uncorrectable;
      }
      f << rep.experiment_names.at(r.experiment) << ',' << r.index << ',' << to_string(r.status) << ','
        << (r.divergence ? (*r.divergence ? "1" : "0") : "") << ',' << r.injections.size() << ',' << corrected << ','
        << unc << ',' << r.counters[0] << ',' << r.counters[1] << ',' << r.counters[2] << '\n';
    }
  }

  const seu::Summary& s = rep.summary;
  const bool crosscheck = seu::counter_crosscheck(rep);
  std::printf("runs %llu, injections %llu: detected %llu, corrected %llu, uncorrectable %llu, unresolved %llu\n",
              static_cast<unsigned long long>(s.runs), static_cast<unsigned long long>(s.injections),
              static_cast<unsigned long long>(s.detected), static_cast<unsigned long long>(s.corrected),
              static_cast<unsigned long long>(s.uncorrectable), static_cast<unsigned long long>(s.unresolved));
  std::printf("divergent runs %llu, simulation faults %llu, counter crosscheck %s\n",
              static_cast<unsigned long long>(s.divergent_runs), static_cast<unsigned long long>(s.sim_faults),
              crosscheck ? "ok" : "FAILED");
  for (const auto& [k, l] : s.latency)
    std::printf("latency %-4s n=%llu max=%llu\n", k.c_str(), static_cast<unsigned long long>(l.count),
                static_cast<unsigned long long>(l.max));
  if (!o.quiet) std::fprintf(stderr, "%.2f s\n", secs);

  if (o.check) {
    bool ok = crosscheck;
    // Runs not recorded were folded into the summary; with single upsets only
    // every injection must have been corrected.
    for (const seu::RunRecord& r : rep.runs)
      if (single_upsets_only(r) && (r.divergence.value_or(false) || r.status == RunStatus::Fault)) ok = false;
    const bool all_single = std::all_of(cfg.experiments.begin(), cfg.experiments.end(), [](const seu::Experiment& e) {
      return e.count == 1 &&
             std::all_of(e.faults.begin(), e.faults.end(), [](const seu::FaultSpec& f) { return f.count == 1; });
    });
    if (all_single && (s.corrected != s.injections || s.divergent_runs != 0 || s.sim_faults != 0)) ok = false;
    std::printf("check %s\n", ok ? "passed" : "FAILED");
    if (!ok) return kCheckFailed;
  }
  return kOk;
}

// ---------------------------------------------------------------------------

struct PowerOptions {
  std::string scenario = "dhrystone";
  double from = 1, to = 50, step = 1;
  std::string scrub = "both";
  std::string model;
  std::string csv;
  std::string run_report;
};

int cmd_power(const PowerOptions& o) {
  const power::PowerModel m = o.model.empty() ? power::default_model() : power::load_power_model(o.model);
  std::vector<power::Scenario> scenarios;
  if (o.scenario == "all") scenarios = {power::Scenario::Dhrystone, power::Scenario::RegisterCentered, power::Scenario::SramCentered};
  else scenarios = {power::scenario_from_string(o.scenario)};
  std::vector<bool> scrubs;
  if (o.scrub == "on") scrubs = {true};
  else if (o.scrub == "off") scrubs = {false};
  else if (o.scrub == "both") scrubs = {true, false};
  else throw ConfigError("--scrub must be on, off or both");
  if (!(o.step > 0) || o.from < 0 || o.to < o.from) throw ConfigError("frequency range needs 0 <= from <= to and step > 0");

  std::ofstream file;
  if (!o.csv.empty()) file = open_out(o.csv);
  std::ostream& out = o.csv.empty() ? std::cout : file;
  out << "scenario,scrub,freq_mhz,core_mw,sram_mw,peripherals_mw,total_mw\n";
  const std::size_t n = static_cast<std::size_t>(std::floor((o.to - o.from) / o.step + 1e-9)) + 1;
  char line[160];
  for (power::Scenario sc : scenarios)
    for (bool scrub : scrubs)
      for (std::size_t i = 0; i < n; ++i) {
        const double f = o.from + static_cast<double>(i) * o.step;
        const power::PowerEstimate e = power::estimate_power(m, f, sc, scrub);
        std::snprintf(line, sizeof line, "%s,%s,%g,%.4f,%.4f,%.4f,%.4f\n", power::to_string(sc), scrub ? "on" : "off",
                      f, e.domain_mw[0], e.domain_mw[1], e.domain_mw[2], e.total_mw);
        out << line;
      }
  out.flush();

  std::FILE* info = o.csv.empty() ? stderr : stdout;
  std::fprintf(info, "leakage %.3f mW; scrubber %.1f uW/MHz (quoted %.0f)\n", m.leakage_uw / 1000, m.scrub_uw_per_mhz,
               m.scrub_quoted_uw_per_mhz);
  for (power::Scenario sc : scenarios)
    std::fprintf(info, "%-9s slope %.1f uW/MHz, 50 MHz: %.2f mW (scrub on), %.2f mW (scrub off)\n", power::to_string(sc),
                 m.system_slope(sc), power::estimate_power(m, 50, sc, true).total_mw,
                 power::estimate_power(m, 50, sc, false).total_mw);

  if (!o.run_report.empty()) {
    std::ifstream in(o.run_report);
    if (!in) throw ConfigError("cannot open run report '" + o.run_report + "'");
    Json r;
    try {
      r = Json::parse(in);
      if (r.at("schema") != "strv-run-report/1") throw ConfigError("not a strv-run-report/1 document");
      const std::uint64_t cycles = r.at("cycles").get<std::uint64_t>();
      const std::uint64_t dmem = r.at("stats").at("dmem_cycles").get<std::uint64_t>();
      const double mhz = r.at("system").at("clock_mhz").get<double>();
      const bool scrub = r.at("system").at("scrub").get<bool>();
      const double mj = power::estimate_energy_mj(m, {cycles - dmem, dmem}, mhz, scrub);
      std::fprintf(info, "run: %llu cycles (%llu SRAM-centered) at %g MHz, scrub %s: %.6g mJ, mean %.3f mW\n",
                   static_cast<unsigned long long>(cycles), static_cast<unsigned long long>(dmem), mhz,
                   scrub ? "on" : "off", mj, cycles ? mj / (static_cast<double>(cycles) / (mhz * 1e6)) : 0.0);
    } catch (const Json::exception& e) {
      throw ConfigError("malformed run report: " + std::string(e.what()));
    }
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"strvsim: TMR RV32IMC system simulator"};
  app.require_subcommand(1);

  RunOptions ro;
  CLI::App* run = app.add_subcommand("run", "Run a program image");
  run->add_option("image", ro.image, "Raw binary or ELF image")->required();
  run->add_option("--base", ro.base, "Load address of a raw binary");
  run->add_option("--max-cycles", ro.max_cycles, "Stop after this many cycles (exit 4 unless --limit-ok)");
  run->add_flag("--limit-ok", ro.limit_ok, "Reaching --max-cycles is a normal end");
  run->add_flag("--scrub-off", ro.scrub_off, "Disable the SRAM scrubber");
  run->add_option("--scrub-divider", ro.scrub_divider, "Scrubber visits one row every N cycles");
  run->add_option("--sram-rows", ro.sram_rows, "SRAM size in 32-bit rows");
  run->add_option("--clock", ro.clock_mhz, "Clock in MHz, for energy");
  run->add_option("--mul-extra", ro.mul_extra, "Extra cycles of MUL*");
  run->add_option("--div-extra", ro.div_extra, "Extra cycles of DIV*/REM*");
  run->add_option("--stimulus", ro.stimulus, "Host stimulus file");
  run->add_option("--tx-out", ro.tx_out, "Write UART output here instead of stdout");
  run->add_option("--report", ro.report, "Write a strv-run-report/1 JSON file ('-' for stdout)");
  run->add_option("--counters-csv", ro.counters_csv, "SEU counter timeline");
  run->add_option("--sample", ro.sample, "Timeline sampling interval in cycles");
  run->add_option("--flip", ro.flips, "Upset CYCLE:CELL|row=N[:REPLICA[:BIT[:COUNT]]][@edge]");
  run->add_flag("-q,--quiet", ro.quiet, "No summary");

  CampaignOptions co;
  CLI::App* camp = app.add_subcommand("campaign", "Run a fault campaign");
  camp->add_option("config", co.config, "strv-campaign/1 JSON file")->required();
  camp->add_option("-o,--out", co.out, "Report file ('-' for stdout)");
  camp->add_option("--csv-dir", co.csv_dir, "Write latency histograms and per-run rows as CSV");
  camp->add_option("-j,--jobs", co.jobs, "Worker threads");
  camp->add_flag("--check", co.check, "Exit 5 unless counters agree and single upsets are all corrected");
  camp->add_flag("-q,--quiet", co.quiet, "No progress output");

  PowerOptions po;
  CLI::App* pw = app.add_subcommand("power", "Power versus frequency table");
  pw->add_option("--scenario", po.scenario, "dhrystone, register, sram or all");
  pw->add_option("--from", po.from, "First frequency in MHz");
  pw->add_option("--to", po.to, "Last frequency in MHz");
  pw->add_option("--step", po.step, "Frequency step in MHz");
  pw->add_option("--scrub", po.scrub, "on, off or both");
  pw->add_option("--model", po.model, "strv-power/1 calibration file");
  pw->add_option("--csv", po.csv, "Write the table here instead of stdout");
  pw->add_option("--energy", po.run_report, "Estimate the energy of a strv-run-report/1 run");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*run) return cmd_run(ro);
    if (*camp) return cmd_campaign(co);
    if (*pw) return cmd_power(po);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "strvsim: %s\n", e.what());
    return kConfig;
  } catch (const SimFault& e) {
    std::fprintf(stderr, "strvsim: simulation fault: %s\n", e.what());
    return kSimFault;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "strvsim: %s\n", e.what());
    return kConfig;
  }
  return kOk;
}
