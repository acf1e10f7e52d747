#pragma once

#include <array>
#include <cstdint>
#include <span>

#include "strv/tmr.hpp"

namespace strv {

enum class EventKind : std::uint8_t {
  CellDiscrepancy,       // a sequential-element voter saw disagreeing replicas
  SramCoreDiscrepancy,   // the core-port SRAM voter saw disagreeing replicas
  SramScrubDiscrepancy,  // the scrubber read a mismatching row
  ScrubWriteBack,        // the scrubber wrote a voted word back
  ScrubSkip,             // write-back cancelled by a core write to the same row
  Retire,                // instruction left writeback (only when tracing)
};

const char* to_string(EventKind kind);

struct Event {
  std::uint64_t cycle = 0;
  EventKind kind = EventKind::CellDiscrepancy;
  Domain domain = Domain::Core;
  std::uint32_t element = 0;  // cell index, SRAM row, or retired pc
  bool counted = false;       // contributes one increment to the domain's SEU counter

  bool operator==(const Event&) const = default;
};

using DomainCounts = std::array<std::uint64_t, kDomainCount>;

}  // namespace strv
