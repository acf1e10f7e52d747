#include "strv/scrubber.hpp"

namespace strv {

namespace {
std::uint32_t next_row(std::uint32_t row, std::uint32_t rows) { return row + 1 == rows ? 0 : row + 1; }
}  // namespace

ScrubOutcome scrub_cycle(ScrubberState s, SramArray& sram, std::optional<CoreRowWrite> core_write) {
  ScrubOutcome out{s, std::nullopt};
  if (!s.enabled) return out;
  const std::uint32_t rows = sram.rows();
  const std::uint32_t row = s.row_pointer % rows;
  ScrubberState& n = out.state;

  if (s.phase == ScrubPhase::Read) {
    const auto r = sram.scrub_port_read(row);
    const VoteResult v = majority_vote(r[0], r[1], r[2]);
    if (!v.discrepancy) {
      n.row_pointer = next_row(row, rows);
      return out;
    }
    n.row_pointer = row;
    n.phase = ScrubPhase::WriteBack;
    n.pending_voted_word = v.value;
    out.event = Event{0, EventKind::SramScrubDiscrepancy, Domain::Sram, row, sram.note_detection(row)};
    return out;
  }

  n.phase = ScrubPhase::Read;
  if (core_write && core_write->row == row) {
    if ((core_write->byte_enables & 0xF) == 0xF) n.row_pointer = next_row(row, rows);
    else n.row_pointer = row;
    out.event = Event{0, EventKind::ScrubSkip, Domain::Sram, row, false};
    return out;
  }
  sram.scrub_port_write(row, s.pending_voted_word);
  n.row_pointer = next_row(row, rows);
  out.event = Event{0, EventKind::ScrubWriteBack, Domain::Sram, row, false};
  return out;
}

std::uint64_t worst_case_correction_cycles(std::uint32_t rows, std::uint32_t other_dirty, std::uint32_t divider) {
  if (rows == 0) throw ContractViolation("worst-case bound needs at least one row");
  if (divider == 0) throw ContractViolation("scrub divider must be at least 1");
  return (static_cast<std::uint64_t>(rows) + other_dirty + 1) * divider;
}

unsigned bits_for_rows(std::uint32_t rows) {
  unsigned b = 1;
  while (b < 32 && (1ull << b) < rows) ++b;
  return b;
}

ScrubberUnit::ScrubberUnit(CellBank& bank, std::uint32_t rows, bool enabled, std::uint32_t divider)
    : enabled_(enabled), divider_(divider) {
  if (divider == 0) throw ConfigError("scrub_divider must be at least 1");
  row_pointer = bank.add("scrub.row_pointer", Domain::Sram, bits_for_rows(rows));
  phase = bank.add("scrub.phase", Domain::Sram, 1);
  pending = bank.add("scrub.pending", Domain::Sram, 32);
  if (divider > 1) divider_count = bank.add("scrub.divider", Domain::Sram, bits_for_rows(divider));
}

ScrubberState ScrubberUnit::state(const CellBank& bank) const {
  return {bank.read(row_pointer), static_cast<ScrubPhase>(bank.read(phase)), bank.read(pending), enabled_};
}

std::optional<Event> ScrubberUnit::step(CellBank& bank, SramArray& sram, std::optional<CoreRowWrite> core_write) {
  if (!enabled_) return std::nullopt;
  if (divider_count) {
    const std::uint32_t d = bank.read(*divider_count);
    if (d + 1 < divider_) {
      bank.write(*divider_count, d + 1);
      return std::nullopt;
    }
    bank.write(*divider_count, 0);
  }
  const ScrubOutcome o = scrub_cycle(state(bank), sram, core_write);
  const ScrubberState before = state(bank);
  if (o.state.row_pointer != before.row_pointer) bank.write(row_pointer, o.state.row_pointer);
  if (o.state.phase != before.phase) bank.write(phase, static_cast<std::uint32_t>(o.state.phase));
  if (o.state.pending_voted_word != before.pending_voted_word) bank.write(pending, o.state.pending_voted_word);
  return o.event;
}

}  // namespace strv
