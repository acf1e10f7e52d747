#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "strv/config_json.hpp"
#include "strv/kernel.hpp"

namespace strv::seu {

/// When a flip lands relative to the clock edge.
///   MidCycle: after the edge update, before the next vote. Latency 1.
///   EdgeAligned: while the replicas capture at the edge, so the corrupted
///   value is latched. Latency 2.
enum class Phase : std::uint8_t { MidCycle, EdgeAligned };
const char* to_string(Phase p);

/// Explicit target: a named sequential element, or an SRAM row.
struct CellTarget {
  std::string cell;
  unsigned replica = 0;
  unsigned bit = 0;
};
struct RowTarget {
  std::uint32_t row = 0;
  unsigned replica = 0;
  unsigned bit = 0;
};
/// Uniform over the storage bits of a domain (and the replica).
struct RandomTarget {
  Domain domain = Domain::Core;
};

struct FaultSpec {
  std::uint64_t at_cycle = 0;
  Phase phase = Phase::MidCycle;  // ignored for SRAM rows
  std::variant<CellTarget, RowTarget, RandomTarget> target;
  /// 1: a single upset. 2: the same bit in a second replica of the same
  /// instance group (replica + 1 mod 3), defeating the voter.
  unsigned count = 1;
};

/// A fault bound to a concrete storage bit.
struct Injection {
  std::uint64_t cycle = 0;
  std::optional<Phase> phase;  // empty for SRAM rows
  Domain domain = Domain::Core;
  bool sram_row = false;
  std::uint32_t element = 0;  // cell index or SRAM row
  std::uint8_t replica = 0;
  std::uint8_t bit = 0;
  std::uint8_t count = 1;

  bool operator==(const Injection&) const = default;
};

enum class PhaseChoice : std::uint8_t { Mid, Edge, Any };

struct Experiment {
  enum class Kind : std::uint8_t { Targeted, Random, Poisson, Sweep };
  Kind kind = Kind::Targeted;
  std::string name;
  // Targeted: every fault goes into one run.
  std::vector<FaultSpec> faults;
  // Random: `runs` runs with one upset (or double upset) each.
  // Poisson: `runs` runs with arrivals at `rate` per cycle per domain.
  std::uint64_t runs = 1;
  Domain domain = Domain::Core;
  unsigned count = 1;
  PhaseChoice phase = PhaseChoice::Mid;
  std::array<double, kDomainCount> rate{};
  // Random and sweep injection window, inclusive. Empty: the whole run.
  std::optional<std::pair<std::uint64_t, std::uint64_t>> cycles;
  // Sweep: every bit of every replica of every cell in `domains`, at every
  // `stride`-th cycle of the window, one run each.
  std::vector<Domain> domains;
  std::vector<std::string> cells;  // optional filter
  std::uint64_t stride = 1;
};

enum class RecordLevel : std::uint8_t { All, Anomalies, None };

struct CampaignConfig {
  std::string program_label;
  LoadedImage image;
  SystemConfig system;
  std::shared_ptr<const std::vector<StimulusEvent>> stimulus;
  std::optional<std::uint64_t> seed;
  /// Cycles every run lasts. Default: until the golden run halts.
  std::optional<std::uint64_t> run_cycles;
  std::uint64_t max_cycles = 10'000'000;  // golden timeout
  bool golden = true;                     // compare outcomes against the golden run
  RecordLevel records = RecordLevel::All;
  std::vector<Experiment> experiments;
};

/// Parses the `strv-campaign/1` schema; paths are relative to `base_dir`.
/// Throws ConfigError listing every problem found.
CampaignConfig parse_campaign(const Json& doc, const std::filesystem::path& base_dir);
CampaignConfig load_campaign_file(const std::filesystem::path& path);

struct InjectionRecord {
  Injection injection;
  bool detected = false;       // a discrepancy event on the target followed
  bool corrected = false;      // replicas agree again on the intended value
  std::optional<std::uint64_t> latency;  // cycles from injection to agreement
  bool uncorrectable = false;  // the voted value itself changed

  bool operator==(const InjectionRecord&) const = default;
};

struct RunRecord {
  std::uint32_t experiment = 0;
  std::uint64_t index = 0;
  std::vector<InjectionRecord> injections;
  RunStatus status = RunStatus::Halted;
  std::optional<std::string> sim_fault;
  std::array<std::uint32_t, kDomainCount> counters{};  // memory-mapped SEU counters at the end
  DomainCounts counted_events{};  // distinct counted discrepancy events seen
  std::optional<bool> divergence;  // empty when golden comparison is off

  bool operator==(const RunRecord&) const = default;
};

struct LatencyStats {
  std::uint64_t count = 0;
  std::uint64_t max = 0;
  std::map<std::uint64_t, std::uint64_t> histogram;

  bool operator==(const LatencyStats&) const = default;
};

struct Summary {
  std::uint64_t runs = 0;
  std::uint64_t injections = 0;
  std::uint64_t detected = 0;
  std::uint64_t corrected = 0;
  std::uint64_t uncorrectable = 0;
  std::uint64_t unresolved = 0;  // neither corrected nor uncorrectable by the end
  std::uint64_t divergent_runs = 0;
  std::uint64_t sim_faults = 0;
  std::uint64_t crosscheck_failures = 0;
  // Keyed "mid", "edge", "sram".
  std::map<std::string, LatencyStats> latency;

  bool operator==(const Summary&) const = default;
};

struct GoldenInfo {
  RunStatus status = RunStatus::Halted;
  std::uint64_t halt_cycle = 0;  // 0 when it did not halt within the run
  std::uint64_t retired = 0;
  std::array<std::uint32_t, kDomainCount> counters{};
  bool reads_counters = false;

  bool operator==(const GoldenInfo&) const = default;
};

struct CampaignReport {
  std::string program_label;
  std::optional<std::uint64_t> seed;
  std::uint64_t run_cycles = 0;
  SystemConfig system;
  GoldenInfo golden;
  std::vector<std::string> experiment_names;
  std::vector<std::string> cell_names;  // for rendering cell targets
  std::vector<RunRecord> runs;          // as selected by the record level
  Summary summary;

  bool operator==(const CampaignReport&) const = default;
};

/// True iff every domain's counter equals the number of distinct counted
/// discrepancy events in that domain, for every recorded run, and no
/// mismatch was found in runs that were not recorded.
bool counter_crosscheck(const CampaignReport& report);
bool counter_crosscheck(const RunRecord& run);

/// Applies a fault to a system before its next step. MidCycle and SRAM
/// flips land immediately; EdgeAligned flips are queued for the next edge.
void apply_fault(System& system, const Injection& injection);

/// Golden run, checkpoints and run planning. Immutable once built; execute()
/// may be called from several threads.
class Campaign {
 public:
  explicit Campaign(CampaignConfig config);

  std::size_t run_count() const { return plans_.size(); }
  std::uint64_t run_cycles() const { return run_end_; }
  const GoldenInfo& golden() const { return golden_info_; }
  const CampaignConfig& config() const { return config_; }

  RunRecord execute(std::size_t run) const;

  /// Runs everything; records come out in plan order whatever `jobs` is.
  CampaignReport run(unsigned jobs = 1, const std::function<void(std::size_t, std::size_t)>& progress = {}) const;

 private:
  struct Plan {
    std::uint32_t experiment;
    std::uint64_t index;
    std::vector<Injection> injections;
  };

  void plan(ConfigErrors& errors);
  std::uint64_t arch_hash(const System& s) const;
  const System& checkpoint_at_or_before(std::uint64_t cycle) const;

  CampaignConfig config_;
  System prototype_;
  std::uint64_t run_end_ = 0;
  std::uint64_t horizon_ = 0;
  std::uint64_t interval_ = 1;
  std::vector<System> checkpoints_;  // golden state at k * interval_
  std::unique_ptr<System> golden_final_;
  std::vector<std::uint64_t> golden_hash_;  // indexed by cycle
  GoldenInfo golden_info_;
  std::vector<Plan> plans_;
};

CampaignReport run_campaign(const CampaignConfig& config, unsigned jobs = 1);

/// `strv-campaign-report/1`. Keys are sorted; output is byte-stable.
Json to_json(const CampaignReport& report);
CampaignReport report_from_json(const Json& doc);

}  // namespace strv::seu
