#pragma once

#include <cstdint>

#include "strv/isa.hpp"

namespace strv {

/// Free parameters of the pipeline timing model. The defaults give the
/// baseline 3-stage behavior: single-cycle execute for every operation.
struct TimingConfig {
  unsigned mul_extra_cycles = 0;  // additional execute cycles for MUL/MULH*
  unsigned div_extra_cycles = 0;  // additional execute cycles for DIV/REM*

  bool operator==(const TimingConfig&) const = default;
};

/// A 32-bit instruction at a halfword-aligned pc spans two SRAM rows and
/// needs two fetch cycles.
inline bool straddles_word(const isa::Instruction& in, std::uint32_t pc) {
  return in.length == 4 && (pc & 2u) != 0;
}

inline unsigned execute_extra_cycles(isa::Mnemonic op, const TimingConfig& t) {
  using isa::Mnemonic;
  if (op >= Mnemonic::Mul && op <= Mnemonic::Mulhu) return t.mul_extra_cycles;
  if (op >= Mnemonic::Div && op <= Mnemonic::Remu) return t.div_extra_cycles;
  return 0;
}

/// Cycles an instruction occupies in the pipeline, excluding the fixed
/// two-cycle fill/drain of a whole program:
///   1 + DMEM stall (load/store) + taken-branch bubble + straddled fetch
///     + multi-cycle execute.
inline unsigned instruction_cost(const isa::Instruction& in, std::uint32_t pc, const isa::Effect& effect,
                                 const TimingConfig& t) {
  return 1u + (effect.mem ? 1u : 0u) + (effect.redirect ? 1u : 0u) + (straddles_word(in, pc) ? 1u : 0u) +
         execute_extra_cycles(in.op, t);
}

}  // namespace strv
