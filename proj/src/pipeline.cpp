#include "strv/pipeline.hpp"

#include <cstdio>
#include <string>

namespace strv {

Pipeline::Pipeline(CellBank& bank, std::uint32_t reset_pc) {
  pc = bank.add("core.pc", Domain::Core, 32, reset_pc);
  fx_valid = bank.add("core.fx.valid", Domain::Core, 1);
  fx_fault = bank.add("core.fx.fault", Domain::Core, 1);  // fx.instr holds the bus address
  fx_pc = bank.add("core.fx.pc", Domain::Core, 32);
  fx_instr = bank.add("core.fx.instr", Domain::Core, 32);
  fh_valid = bank.add("core.fetch.half_valid", Domain::Core, 1);
  fh_half = bank.add("core.fetch.half", Domain::Core, 16);
  xw_valid = bank.add("core.xw.valid", Domain::Core, 1);
  xw_rd = bank.add("core.xw.rd", Domain::Core, 5);
  xw_value = bank.add("core.xw.value", Domain::Core, 32);
  xw_pc = bank.add("core.xw.pc", Domain::Core, 32);
  ex_wait = bank.add("core.ex.wait", Domain::Core, 8);
  halted_ = bank.add("core.halted", Domain::Core, 1);
  cycle_lo = bank.add("core.cycle.lo", Domain::Core, 32);
  cycle_hi = bank.add("core.cycle.hi", Domain::Core, 32);
  for (unsigned i = 1; i < 32; ++i) regs[i] = bank.add("core.x" + std::to_string(i), Domain::Core, 32);
}

std::uint32_t Pipeline::operand(const CellBank& bank, unsigned r) const {
  if (r == 0) return 0;
  // The writeback stage commits at the coming edge; forward its value.
  if (bank.read(xw_valid) && bank.read(xw_rd) == r) return bank.read(xw_value);
  return bank.read(regs[r]);
}

CycleActivity Pipeline::advance(CellBank& bank, Bus& bus, const TimingConfig& timing, PipelineStats& stats) {
  CycleActivity act;
  const std::uint64_t cyc = cycle_csr(bank);
  bank.write(cycle_lo, static_cast<std::uint32_t>(cyc + 1));
  bank.write(cycle_hi, static_cast<std::uint32_t>((cyc + 1) >> 32));

  // Writeback.
  if (bank.read(xw_valid)) {
    const std::uint32_t rd = bank.read(xw_rd);
    if (rd != 0) bank.write(regs[rd], bank.read(xw_value));
    bank.write(xw_valid, 0);
    ++stats.retired;
    act.retired_pc = bank.read(xw_pc);
  }

  // Decode / execute.
  bool fx_free = !bank.read(fx_valid);
  bool redirect = false;
  bool halting = false;
  if (bank.read(fx_valid)) try {
    const std::uint32_t ipc = bank.read(fx_pc);
    if (bank.read(fx_fault)) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "instruction fetch of unmapped address 0x%08x", bank.read(fx_instr));
      throw SimFault(FaultKind::BusFault, bank.read(fx_instr), buf);
    }
    const isa::Instruction in = isa::decode(bank.read(fx_instr));
    const unsigned extra = execute_extra_cycles(in.op, timing);
    const std::uint32_t wait = bank.read(ex_wait);
    if (extra > 0 && wait == 0) {
      bank.write(ex_wait, extra);
      ++stats.exec_wait_cycles;
    } else if (wait > 1) {
      bank.write(ex_wait, wait - 1);
      ++stats.exec_wait_cycles;
    } else {
      if (wait == 1) bank.write(ex_wait, 0);
      const isa::Effect e =
          isa::execute(in, ipc, operand(bank, in.rs1), operand(bank, in.rs2), isa::CsrValues{cyc});
      std::uint32_t rd = e.write ? e.write->rd : 0;
      std::uint32_t value = e.write ? e.write->value : 0;
      if (e.mem) {
        act.dmem = true;
        ++stats.dmem_cycles;
        if (e.mem->kind == AccessKind::Load) {
          value = perform_load(bus, *e.mem);
          rd = e.load_rd;
        } else {
          perform_store(bus, *e.mem);
        }
      }
      bank.write(xw_valid, 1);
      bank.write(xw_rd, rd);
      bank.write(xw_value, rd ? value : 0);
      bank.write(xw_pc, ipc);
      fx_free = true;
      if (e.halt) {
        halting = true;
        bank.write(halted_, 1);
        bank.write(pc, e.next_pc);
        bank.write(fh_valid, 0);
      } else if (e.redirect) {
        redirect = true;
        ++stats.branch_bubbles;
        bank.write(pc, e.next_pc);
        bank.write(fh_valid, 0);
      }
    }
  } catch (const SimFault& f) {
    act.fault = f;
    return act;
  }

  // Fetch.
  const bool fetch = fx_free && !halting && !halted(bank) && !act.dmem && !redirect;
  if (!fetch) {
    if (fx_free) bank.write(fx_valid, 0);
    if (halted(bank) && !bank.read(xw_valid) && !act.retired_pc) ++stats.idle_cycles;
    return act;
  }
  const std::uint32_t p = bank.read(pc);
  try {
    fetch_into(bank, bus, p, stats);
  } catch (const SimFault& f) {
    // Reported when the instruction reaches execute, like any other fault.
    bank.write(fx_valid, 1);
    bank.write(fx_fault, 1);
    bank.write(fx_instr, f.address());
    bank.write(fx_pc, p);
    bank.write(fh_valid, 0);
  }
  return act;
}

void Pipeline::fetch_into(CellBank& bank, Bus& bus, std::uint32_t p, PipelineStats& stats) {
  bank.write(fx_fault, 0);
  if (bank.read(fh_valid)) {
    const std::uint32_t hi = bus.read_word((p & ~3u) + 4, AccessKind::InstrFetch) & 0xFFFFu;
    bank.write(fx_instr, bank.read(fh_half) | (hi << 16));
    bank.write(fx_pc, p);
    bank.write(fx_valid, 1);
    bank.write(fh_valid, 0);
    bank.write(pc, p + 4);
    return;
  }
  const std::uint32_t word = bus.read_word(p & ~3u, AccessKind::InstrFetch);
  std::uint32_t window = (p & 2u) ? word >> 16 : word;
  const unsigned len = isa::instruction_length(window & 0xFFFFu);
  if ((p & 2u) && len == 4) {
    bank.write(fh_half, window & 0xFFFFu);
    bank.write(fh_valid, 1);
    bank.write(fx_valid, 0);
    ++stats.straddle_cycles;
    return;
  }
  if (len == 2) window &= 0xFFFFu;
  bank.write(fx_instr, window);
  bank.write(fx_pc, p);
  bank.write(fx_valid, 1);
  bank.write(pc, p + len);
}

}  // namespace strv
