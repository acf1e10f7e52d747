#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include "strv/memory.hpp"
#include "strv/tmr.hpp"

namespace strv {
struct TimingConfig;
}

namespace strv::isa {

// Encoded mnemonics. Compressed forms keep their own mnemonic; `Instruction::op`
// carries the 32-bit operation they expand to.
enum class Mnemonic : std::uint8_t {
  Lui, Auipc, Jal, Jalr,
  Beq, Bne, Blt, Bge, Bltu, Bgeu,
  Lb, Lh, Lw, Lbu, Lhu, Sb, Sh, Sw,
  Addi, Slti, Sltiu, Xori, Ori, Andi, Slli, Srli, Srai,
  Add, Sub, Sll, Slt, Sltu, Xor, Srl, Sra, Or, And,
  Fence, Ecall, Ebreak, Csrrs, Csrrc, Csrrsi, Csrrci,
  Mul, Mulh, Mulhsu, Mulhu, Div, Divu, Rem, Remu,
  // C extension
  CAddi4spn, CLw, CSw, CNop, CAddi, CJal, CLi, CAddi16sp, CLui, CSrli, CSrai, CAndi,
  CSub, CXor, COr, CAnd, CJ, CBeqz, CBnez, CSlli, CLwsp, CJr, CMv, CEbreak, CJalr, CAdd, CSwsp,
};

const char* to_string(Mnemonic m);

inline constexpr std::uint16_t kCsrCycle = 0xC00;
inline constexpr std::uint16_t kCsrCycleH = 0xC80;

struct Instruction {
  Mnemonic mnemonic = Mnemonic::Addi;  // as encoded
  Mnemonic op = Mnemonic::Addi;        // executed operation (32-bit equivalent)
  std::uint8_t rd = 0;
  std::uint8_t rs1 = 0;
  std::uint8_t rs2 = 0;
  std::int32_t imm = 0;  // CSR number for CSR reads
  std::uint32_t raw = 0;
  std::uint8_t length = 4;

  bool compressed() const { return length == 2; }
  bool operator==(const Instruction&) const = default;
};

/// Length in bytes of the instruction whose low halfword is `low16`.
constexpr unsigned instruction_length(std::uint32_t low16) { return (low16 & 3u) == 3u ? 4u : 2u; }

/// Decodes the instruction at the start of `window` (little-endian, the next
/// 4 bytes at pc). Throws SimFault(IllegalInstruction) for encodings outside
/// RV32IMC user-level computation.
Instruction decode(std::uint32_t window);

std::string disassemble(const Instruction& in);

bool is_load(Mnemonic op);
bool is_store(Mnemonic op);
bool is_mul_div(Mnemonic op);
bool is_control_transfer(Mnemonic op);

struct RegWrite {
  std::uint8_t rd = 0;
  std::uint32_t value = 0;
};

/// Architectural effect of one instruction given its operand values.
struct Effect {
  std::uint32_t next_pc = 0;
  bool redirect = false;  // next_pc is not the fall-through address
  std::optional<RegWrite> write;
  std::optional<MemRequest> mem;
  std::uint8_t load_rd = 0;
  bool halt = false;
};

struct CsrValues {
  std::uint64_t cycle = 0;
};

/// Pure effect function shared by the functional and pipelined paths.
/// Misaligned data addresses throw SimFault(AlignmentFault).
Effect execute(const Instruction& in, std::uint32_t pc, std::uint32_t rs1_value, std::uint32_t rs2_value,
               const CsrValues& csr = {});

/// Architectural state. Register 0 is kept but always reads as zero.
struct ArchState {
  std::uint32_t pc = 0;
  std::array<TmrCell, 32> regs;
  std::uint64_t cycle = 0;
  std::uint64_t retired = 0;
  bool halted = false;

  ArchState();
  std::uint32_t reg(unsigned index) const { return index == 0 ? 0u : regs[index].value(); }
  void set_reg(unsigned index, std::uint32_t value);
  /// Compares pc and voted register values.
  bool same_architecture(const ArchState& other) const;
};

/// Applies the effect of `in` to `state`. Loads and stores are returned for
/// the caller to service; a load's register write is completed by
/// complete_load().
std::optional<MemRequest> execute(ArchState& state, const Instruction& in);
void complete_load(ArchState& state, const Instruction& in, std::uint32_t value);

/// Fetch, decode, execute and retire exactly one instruction against `bus`.
/// The cycle count advances by the pipeline's per-instruction cost.
void step_instruction(ArchState& state, Bus& bus, const TimingConfig& timing);

}  // namespace strv::isa
