#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "strv/events.hpp"
#include "strv/image.hpp"
#include "strv/isa.hpp"
#include "strv/memory.hpp"
#include "strv/peripherals.hpp"
#include "strv/pipeline.hpp"
#include "strv/scrubber.hpp"
#include "strv/timing.hpp"
#include "strv/tmr.hpp"

namespace strv {

struct SystemConfig {
  double clock_mhz = 50.0;
  bool scrub_enabled = true;
  std::uint32_t scrub_divider = 1;
  std::uint32_t sram_rows = memmap::kSramRows;
  TimingConfig timing;
  bool trace_retirements = false;

  /// Throws ConfigError.
  void validate() const;
  bool operator==(const SystemConfig&) const = default;
};

enum class RunStatus : std::uint8_t { Halted, Fault, Timeout, CycleLimit };
const char* to_string(RunStatus s);

struct RunResult {
  RunStatus status = RunStatus::Halted;
  std::uint64_t cycles = 0;
  std::uint64_t retired = 0;
  std::optional<FaultKind> fault;
  std::uint32_t fault_address = 0;
  std::string message;
};

/// Architectural view: what software can observe apart from memory.
struct ArchView {
  std::uint32_t pc = 0;
  std::array<std::uint32_t, 32> regs{};
  bool halted = false;
  bool operator==(const ArchView&) const = default;
};

/// The whole chip: pipeline, register file, SRAM, scrubber, peripherals and
/// SEU counters. Copyable by value; a copy is an independent instance.
///
/// One cycle runs in this order: host stimulus, voting of every cell (with
/// discrepancy events), pipeline (core SRAM access first), peripherals,
/// scrubber, counter aggregation, clock edge. Faults are applied by the
/// caller between cycles, i.e. right after the previous edge.
class System {
 public:
  explicit System(SystemConfig config = {});

  const SystemConfig& config() const { return config_; }

  /// Places every segment in SRAM (all replicas) and resets the core to the
  /// image entry. Throws ConfigError when a segment does not fit.
  void load_image(const LoadedImage& image);
  void load_bytes(std::span<const std::uint8_t> bytes, std::uint32_t base = 0);
  void set_stimulus(std::shared_ptr<const std::vector<StimulusEvent>> events) {
    peripherals_.set_stimulus(std::move(events));
  }

  /// One clock cycle. Throws SimFault.
  void step();
  /// Steps until the core halted and drained, a fault, or `max_cycles` total.
  /// `limit_is_timeout` selects how reaching the limit is reported.
  RunResult run(std::uint64_t max_cycles, bool limit_is_timeout = true);
  bool done() const { return pipeline_.drained(bank_); }

  std::uint64_t cycle() const { return cycle_; }

  // Fault hooks. Cell and SRAM flips take effect immediately; edge upsets
  // are applied to the replicas as they latch at the end of the next step().
  void flip_cell(CellRef cell, unsigned replica, unsigned bit);
  void queue_edge_upset(CellRef cell, unsigned replica, unsigned bit);
  void flip_sram(std::uint32_t row, unsigned replica, unsigned bit);
  /// Per queued edge upset of the last step: did it change the voted value?
  const std::vector<bool>& last_edge_vote_changed() const { return edge_changed_; }
  std::vector<CellRef> last_edge_cells() const;

  const std::vector<Event>& cycle_events() const { return events_; }
  /// Every event of every following step is appended to `sink` (nullptr stops).
  void set_event_sink(std::vector<Event>* sink) { sink_ = sink; }

  CellBank& bank() { return bank_; }
  const CellBank& bank() const { return bank_; }
  SramArray& sram() { return sram_; }
  const SramArray& sram() const { return sram_; }
  Peripherals& peripherals() { return peripherals_; }
  const Peripherals& peripherals() const { return peripherals_; }
  const Pipeline& pipeline() const { return pipeline_; }
  const ScrubberUnit& scrubber() const { return scrubber_; }
  const PipelineStats& stats() const { return stats_; }
  std::uint32_t counter(Domain d) const { return peripherals_.counter(bank_, d); }
  std::array<std::uint32_t, kDomainCount> counters() const;

  ArchView architecture() const;
  std::uint32_t read_sram_word(std::uint32_t address) const { return sram_.voted(address / 4).value; }

  /// Same protected state (all cell replicas except the SEU counters, SRAM
  /// replicas and episode flags, host-side peripheral state). Once two
  /// systems match, their futures match except for counter values.
  bool equivalent_state(const System& other) const;
  /// Same software-visible outcome: architecture, voted SRAM, UART output and
  /// GPIO registers.
  bool same_outcome(const System& other) const;

  std::vector<std::uint8_t> snapshot() const;
  /// Throws ConfigError for a malformed or incompatible snapshot.
  static System restore(std::span<const std::uint8_t> bytes);

 private:
  friend class CoreBus;
  SystemConfig config_;
  CellBank bank_;
  SramArray sram_;
  Pipeline pipeline_;
  Peripherals peripherals_;
  ScrubberUnit scrubber_;
  std::uint64_t cycle_ = 0;
  PipelineStats stats_;
  std::vector<EdgeUpset> pending_edge_;
  std::vector<bool> edge_changed_;
  std::vector<CellRef> edge_cells_;
  std::vector<Event> events_;
  std::vector<CellDiscrepancy> discrepancies_;
  std::vector<Event>* sink_ = nullptr;
  std::optional<CoreRowWrite> core_write_;
  std::vector<bool> counter_mask_;
};

/// Retired-instruction and cycle totals of a program run on the pipelined
/// model. Throws SimFault on faults and on exceeding `max_cycles` (Timeout).
struct ProgramTiming {
  std::uint64_t retired = 0;
  std::uint64_t cycles = 0;
  PipelineStats stats;
};
ProgramTiming cycles_for_program(const LoadedImage& image, std::uint64_t max_cycles, const SystemConfig& config = {});

/// Instruction-at-a-time reference path over the same SRAM model.
struct FunctionalResult {
  isa::ArchState arch;
  SramArray sram;
  RunStatus status = RunStatus::Halted;
  std::optional<FaultKind> fault;
};
FunctionalResult run_functional(const LoadedImage& image, std::uint64_t max_instructions,
                                const SystemConfig& config = {});

}  // namespace strv
