#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "strv/events.hpp"
#include "strv/memory.hpp"
#include "strv/tmr.hpp"

namespace strv {

enum class ScrubPhase : std::uint8_t { Read = 0, WriteBack = 1 };

struct ScrubberState {
  std::uint32_t row_pointer = 0;
  ScrubPhase phase = ScrubPhase::Read;
  std::uint32_t pending_voted_word = 0;
  bool enabled = true;

  bool operator==(const ScrubberState&) const = default;
};

/// The core's SRAM write in the current cycle, as seen by the scrub port.
struct CoreRowWrite {
  std::uint32_t row = 0;
  std::uint8_t byte_enables = 0xF;
};

struct ScrubOutcome {
  ScrubberState state;
  std::optional<Event> event;  // cycle field left at 0
};

/// One step of the self-refresh FSM. Read: a clean row advances the pointer,
/// a mismatching one is voted and held for write-back. WriteBack: a core write
/// to the same row cancels the scrub write; a full-word core write also ends
/// the row, a partial one makes the FSM re-read it.
ScrubOutcome scrub_cycle(ScrubberState s, SramArray& sram, std::optional<CoreRowWrite> core_write);

/// Worst-case cycles from a single upset to clean replicas, with `other_dirty`
/// other rows needing write-back during the pass and one scrub step every
/// `divider` cycles.
std::uint64_t worst_case_correction_cycles(std::uint32_t rows, std::uint32_t other_dirty = 0,
                                           std::uint32_t divider = 1);

unsigned bits_for_rows(std::uint32_t rows);

/// Scrubber registers held as TMR cells of the SRAM domain.
class ScrubberUnit {
 public:
  ScrubberUnit(CellBank& bank, std::uint32_t rows, bool enabled, std::uint32_t divider);

  /// Runs after the core's access of the same cycle.
  std::optional<Event> step(CellBank& bank, SramArray& sram, std::optional<CoreRowWrite> core_write);

  ScrubberState state(const CellBank& bank) const;
  bool enabled() const { return enabled_; }
  std::uint32_t divider() const { return divider_; }

  CellRef row_pointer, phase, pending;
  std::optional<CellRef> divider_count;

 private:
  bool enabled_;
  std::uint32_t divider_;
};

}  // namespace strv
