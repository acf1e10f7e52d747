#pragma once

#include <array>
#include <cstdint>
#include <optional>

#include "strv/errors.hpp"
#include "strv/isa.hpp"
#include "strv/memory.hpp"
#include "strv/timing.hpp"
#include "strv/tmr.hpp"

namespace strv {

/// Host-side bookkeeping of where the cycles went. Not part of the protected
/// machine state.
struct PipelineStats {
  std::uint64_t retired = 0;
  std::uint64_t dmem_cycles = 0;      // DMEM owned the bridge, fetch stalled
  std::uint64_t branch_bubbles = 0;   // taken branch or jump skipped a fetch
  std::uint64_t straddle_cycles = 0;  // first half of a word-straddling fetch
  std::uint64_t exec_wait_cycles = 0;
  std::uint64_t idle_cycles = 0;      // after the halt drained

  bool operator==(const PipelineStats&) const = default;
};

struct CycleActivity {
  bool dmem = false;
  std::optional<std::uint32_t> retired_pc;
  // Raised by the instruction in execute. Older instructions still complete
  // in this cycle.
  std::optional<SimFault> fault;
};

/// Three-stage pipeline: fetch, decode/execute, writeback. All latches and the
/// register file are TMR cells; the bridge gives DMEM strict priority over
/// instruction fetch.
class Pipeline {
 public:
  Pipeline(CellBank& bank, std::uint32_t reset_pc);

  /// Evaluates one clock cycle and stages the next state. A fault of the
  /// executing instruction is reported in the result, not thrown.
  CycleActivity advance(CellBank& bank, Bus& bus, const TimingConfig& timing, PipelineStats& stats);

  bool halted(const CellBank& bank) const { return bank.read(halted_) != 0; }
  /// Halted and the halting instruction has left writeback.
  bool drained(const CellBank& bank) const { return halted(bank) && !bank.read(xw_valid) && !bank.read(fx_valid); }

  std::uint32_t reg(const CellBank& bank, unsigned index) const { return index == 0 ? 0 : bank.read(regs[index]); }
  std::uint32_t pc_value(const CellBank& bank) const { return bank.read(pc); }
  std::uint64_t cycle_csr(const CellBank& bank) const {
    return bank.read(cycle_lo) | (static_cast<std::uint64_t>(bank.read(cycle_hi)) << 32);
  }

  CellRef pc, fx_valid, fx_fault, fx_pc, fx_instr, fh_valid, fh_half, xw_valid, xw_rd, xw_value, xw_pc, ex_wait, halted_,
      cycle_lo, cycle_hi;
  std::array<CellRef, 32> regs{};  // regs[0] is not a storage element

 private:
  void fetch_into(CellBank& bank, Bus& bus, std::uint32_t p, PipelineStats& stats);
  std::uint32_t operand(const CellBank& bank, unsigned r) const;
};

}  // namespace strv
