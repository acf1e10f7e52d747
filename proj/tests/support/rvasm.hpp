#pragma once
// Minimal RV32IMC encoder for building test programs. Field layouts follow
// the RISC-V unprivileged ISA manual; nothing here is shared with the
// simulator's decoder.

#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace rvasm {

using u32 = std::uint32_t;
using u16 = std::uint16_t;

inline u32 r_type(u32 f7, u32 rs2, u32 rs1, u32 f3, u32 rd, u32 op) {
  return (f7 << 25) | (rs2 << 20) | (rs1 << 15) | (f3 << 12) | (rd << 7) | op;
}
inline u32 i_type(std::int32_t imm, u32 rs1, u32 f3, u32 rd, u32 op) {
  return ((static_cast<u32>(imm) & 0xFFF) << 20) | (rs1 << 15) | (f3 << 12) | (rd << 7) | op;
}
inline u32 s_type(std::int32_t imm, u32 rs2, u32 rs1, u32 f3, u32 op) {
  const u32 i = static_cast<u32>(imm);
  return (((i >> 5) & 0x7F) << 25) | (rs2 << 20) | (rs1 << 15) | (f3 << 12) | ((i & 0x1F) << 7) | op;
}
inline u32 b_type(std::int32_t imm, u32 rs2, u32 rs1, u32 f3) {
  const u32 i = static_cast<u32>(imm);
  return (((i >> 12) & 1) << 31) | (((i >> 5) & 0x3F) << 25) | (rs2 << 20) | (rs1 << 15) | (f3 << 12) |
         (((i >> 1) & 0xF) << 8) | (((i >> 11) & 1) << 7) | 0x63;
}
inline u32 u_type(u32 imm20, u32 rd, u32 op) { return (imm20 << 12) | (rd << 7) | op; }
inline u32 j_type(std::int32_t imm, u32 rd) {
  const u32 i = static_cast<u32>(imm);
  return (((i >> 20) & 1) << 31) | (((i >> 1) & 0x3FF) << 21) | (((i >> 11) & 1) << 20) | (((i >> 12) & 0xFF) << 12) |
         (rd << 7) | 0x6F;
}

// RV32I
inline u32 lui(u32 rd, u32 imm20) { return u_type(imm20 & 0xFFFFF, rd, 0x37); }
inline u32 auipc(u32 rd, u32 imm20) { return u_type(imm20 & 0xFFFFF, rd, 0x17); }
inline u32 jal(u32 rd, std::int32_t off) { return j_type(off, rd); }
inline u32 jalr(u32 rd, u32 rs1, std::int32_t imm) { return i_type(imm, rs1, 0, rd, 0x67); }
inline u32 beq(u32 a, u32 b, std::int32_t off) { return b_type(off, b, a, 0); }
inline u32 bne(u32 a, u32 b, std::int32_t off) { return b_type(off, b, a, 1); }
inline u32 blt(u32 a, u32 b, std::int32_t off) { return b_type(off, b, a, 4); }
inline u32 bge(u32 a, u32 b, std::int32_t off) { return b_type(off, b, a, 5); }
inline u32 bltu(u32 a, u32 b, std::int32_t off) { return b_type(off, b, a, 6); }
inline u32 bgeu(u32 a, u32 b, std::int32_t off) { return b_type(off, b, a, 7); }
inline u32 lb(u32 rd, u32 rs1, std::int32_t imm) { return i_type(imm, rs1, 0, rd, 0x03); }
inline u32 lh(u32 rd, u32 rs1, std::int32_t imm) { return i_type(imm, rs1, 1, rd, 0x03); }
inline u32 lw(u32 rd, u32 rs1, std::int32_t imm) { return i_type(imm, rs1, 2, rd, 0x03); }
inline u32 lbu(u32 rd, u32 rs1, std::int32_t imm) { return i_type(imm, rs1, 4, rd, 0x03); }
inline u32 lhu(u32 rd, u32 rs1, std::int32_t imm) { return i_type(imm, rs1, 5, rd, 0x03); }
inline u32 sb(u32 rs2, u32 rs1, std::int32_t imm) { return s_type(imm, rs2, rs1, 0, 0x23); }
inline u32 sh(u32 rs2, u32 rs1, std::int32_t imm) { return s_type(imm, rs2, rs1, 1, 0x23); }
inline u32 sw(u32 rs2, u32 rs1, std::int32_t imm) { return s_type(imm, rs2, rs1, 2, 0x23); }
inline u32 addi(u32 rd, u32 rs1, std::int32_t imm) { return i_type(imm, rs1, 0, rd, 0x13); }
inline u32 slti(u32 rd, u32 rs1, std::int32_t imm) { return i_type(imm, rs1, 2, rd, 0x13); }
inline u32 sltiu(u32 rd, u32 rs1, std::int32_t imm) { return i_type(imm, rs1, 3, rd, 0x13); }
inline u32 xori(u32 rd, u32 rs1, std::int32_t imm) { return i_type(imm, rs1, 4, rd, 0x13); }
inline u32 ori(u32 rd, u32 rs1, std::int32_t imm) { return i_type(imm, rs1, 6, rd, 0x13); }
inline u32 andi(u32 rd, u32 rs1, std::int32_t imm) { return i_type(imm, rs1, 7, rd, 0x13); }
inline u32 slli(u32 rd, u32 rs1, u32 sh) { return r_type(0, sh, rs1, 1, rd, 0x13); }
inline u32 srli(u32 rd, u32 rs1, u32 sh) { return r_type(0, sh, rs1, 5, rd, 0x13); }
inline u32 srai(u32 rd, u32 rs1, u32 sh) { return r_type(0x20, sh, rs1, 5, rd, 0x13); }
inline u32 add(u32 rd, u32 a, u32 b) { return r_type(0, b, a, 0, rd, 0x33); }
inline u32 sub(u32 rd, u32 a, u32 b) { return r_type(0x20, b, a, 0, rd, 0x33); }
inline u32 sll(u32 rd, u32 a, u32 b) { return r_type(0, b, a, 1, rd, 0x33); }
inline u32 slt(u32 rd, u32 a, u32 b) { return r_type(0, b, a, 2, rd, 0x33); }
inline u32 sltu(u32 rd, u32 a, u32 b) { return r_type(0, b, a, 3, rd, 0x33); }
inline u32 xor_(u32 rd, u32 a, u32 b) { return r_type(0, b, a, 4, rd, 0x33); }
inline u32 srl(u32 rd, u32 a, u32 b) { return r_type(0, b, a, 5, rd, 0x33); }
inline u32 sra(u32 rd, u32 a, u32 b) { return r_type(0x20, b, a, 5, rd, 0x33); }
inline u32 or_(u32 rd, u32 a, u32 b) { return r_type(0, b, a, 6, rd, 0x33); }
inline u32 and_(u32 rd, u32 a, u32 b) { return r_type(0, b, a, 7, rd, 0x33); }
inline u32 fence() { return 0x0FF0000F; }
inline u32 ecall() { return 0x00000073; }
inline u32 ebreak() { return 0x00100073; }
inline u32 csrr(u32 rd, u32 csr) { return (csr << 20) | (2u << 12) | (rd << 7) | 0x73; }
// M
inline u32 mul(u32 rd, u32 a, u32 b) { return r_type(1, b, a, 0, rd, 0x33); }
inline u32 mulh(u32 rd, u32 a, u32 b) { return r_type(1, b, a, 1, rd, 0x33); }
inline u32 mulhsu(u32 rd, u32 a, u32 b) { return r_type(1, b, a, 2, rd, 0x33); }
inline u32 mulhu(u32 rd, u32 a, u32 b) { return r_type(1, b, a, 3, rd, 0x33); }
inline u32 div(u32 rd, u32 a, u32 b) { return r_type(1, b, a, 4, rd, 0x33); }
inline u32 divu(u32 rd, u32 a, u32 b) { return r_type(1, b, a, 5, rd, 0x33); }
inline u32 rem(u32 rd, u32 a, u32 b) { return r_type(1, b, a, 6, rd, 0x33); }
inline u32 remu(u32 rd, u32 a, u32 b) { return r_type(1, b, a, 7, rd, 0x33); }

// C extension. Primed registers (x8..x15) are passed as full numbers.
inline u32 cp(u32 r) {
  if (r < 8 || r > 15) throw std::invalid_argument("compressed register must be x8..x15");
  return r - 8;
}
inline u16 c16(u32 v) { return static_cast<u16>(v); }
inline u16 c_nop() { return 0x0001; }
inline u16 c_ebreak() { return 0x9002; }
inline u16 c_addi(u32 rd, std::int32_t imm) {
  const u32 i = static_cast<u32>(imm);
  return c16((0u << 13) | (((i >> 5) & 1) << 12) | (rd << 7) | ((i & 0x1F) << 2) | 1);
}
inline u16 c_li(u32 rd, std::int32_t imm) {
  const u32 i = static_cast<u32>(imm);
  return c16((2u << 13) | (((i >> 5) & 1) << 12) | (rd << 7) | ((i & 0x1F) << 2) | 1);
}
inline u16 c_lui(u32 rd, std::int32_t imm6) {  // rd = sext(imm6) << 12
  const u32 i = static_cast<u32>(imm6);
  return c16((3u << 13) | (((i >> 5) & 1) << 12) | (rd << 7) | ((i & 0x1F) << 2) | 1);
}
inline u16 c_addi16sp(std::int32_t imm) {  // multiple of 16
  const u32 i = static_cast<u32>(imm);
  return c16((3u << 13) | (((i >> 9) & 1) << 12) | (2u << 7) | (((i >> 4) & 1) << 6) | (((i >> 6) & 1) << 5) |
             (((i >> 7) & 3) << 3) | (((i >> 5) & 1) << 2) | 1);
}
inline u16 c_addi4spn(u32 rd, u32 imm) {  // multiple of 4, nonzero
  return c16((0u << 13) | (((imm >> 4) & 3) << 11) | (((imm >> 6) & 0xF) << 7) | (((imm >> 2) & 1) << 6) |
             (((imm >> 3) & 1) << 5) | (cp(rd) << 2) | 0);
}
inline u16 c_lw(u32 rd, u32 rs1, u32 off) {
  return c16((2u << 13) | (((off >> 3) & 7) << 10) | (cp(rs1) << 7) | (((off >> 2) & 1) << 6) |
             (((off >> 6) & 1) << 5) | (cp(rd) << 2) | 0);
}
inline u16 c_sw(u32 rs2, u32 rs1, u32 off) {
  return c16((6u << 13) | (((off >> 3) & 7) << 10) | (cp(rs1) << 7) | (((off >> 2) & 1) << 6) |
             (((off >> 6) & 1) << 5) | (cp(rs2) << 2) | 0);
}
inline u16 c_srli(u32 rd, u32 sh) { return c16((4u << 13) | (0u << 10) | (cp(rd) << 7) | ((sh & 0x1F) << 2) | 1); }
inline u16 c_srai(u32 rd, u32 sh) { return c16((4u << 13) | (1u << 10) | (cp(rd) << 7) | ((sh & 0x1F) << 2) | 1); }
inline u16 c_andi(u32 rd, std::int32_t imm) {
  const u32 i = static_cast<u32>(imm);
  return c16((4u << 13) | (((i >> 5) & 1) << 12) | (2u << 10) | (cp(rd) << 7) | ((i & 0x1F) << 2) | 1);
}
inline u16 c_arith(u32 f2, u32 rd, u32 rs2) {
  return c16((4u << 13) | (0u << 12) | (3u << 10) | (cp(rd) << 7) | (f2 << 5) | (cp(rs2) << 2) | 1);
}
inline u16 c_sub(u32 rd, u32 rs2) { return c_arith(0, rd, rs2); }
inline u16 c_xor(u32 rd, u32 rs2) { return c_arith(1, rd, rs2); }
inline u16 c_or(u32 rd, u32 rs2) { return c_arith(2, rd, rs2); }
inline u16 c_and(u32 rd, u32 rs2) { return c_arith(3, rd, rs2); }
inline u16 c_j_like(u32 f3, std::int32_t off) {
  const u32 i = static_cast<u32>(off);
  return c16((f3 << 13) | (((i >> 11) & 1) << 12) | (((i >> 4) & 1) << 11) | (((i >> 8) & 3) << 9) |
             (((i >> 10) & 1) << 8) | (((i >> 6) & 1) << 7) | (((i >> 7) & 1) << 6) | (((i >> 1) & 7) << 3) |
             (((i >> 5) & 1) << 2) | 1);
}
inline u16 c_j(std::int32_t off) { return c_j_like(5, off); }
inline u16 c_jal(std::int32_t off) { return c_j_like(1, off); }
inline u16 c_b(u32 f3, u32 rs1, std::int32_t off) {
  const u32 i = static_cast<u32>(off);
  return c16((f3 << 13) | (((i >> 8) & 1) << 12) | (((i >> 3) & 3) << 10) | (cp(rs1) << 7) | (((i >> 6) & 3) << 5) |
             (((i >> 1) & 3) << 3) | (((i >> 5) & 1) << 2) | 1);
}
inline u16 c_beqz(u32 rs1, std::int32_t off) { return c_b(6, rs1, off); }
inline u16 c_bnez(u32 rs1, std::int32_t off) { return c_b(7, rs1, off); }
inline u16 c_slli(u32 rd, u32 sh) { return c16((0u << 13) | (rd << 7) | ((sh & 0x1F) << 2) | 2); }
inline u16 c_lwsp(u32 rd, u32 off) {
  return c16((2u << 13) | (((off >> 5) & 1) << 12) | (rd << 7) | (((off >> 2) & 7) << 4) | (((off >> 6) & 3) << 2) | 2);
}
inline u16 c_swsp(u32 rs2, u32 off) {
  return c16((6u << 13) | (((off >> 2) & 0xF) << 9) | (((off >> 6) & 3) << 7) | (rs2 << 2) | 2);
}
inline u16 c_jr(u32 rs1) { return c16((4u << 13) | (0u << 12) | (rs1 << 7) | 2); }
inline u16 c_mv(u32 rd, u32 rs2) { return c16((4u << 13) | (0u << 12) | (rd << 7) | (rs2 << 2) | 2); }
inline u16 c_jalr(u32 rs1) { return c16((4u << 13) | (1u << 12) | (rs1 << 7) | 2); }
inline u16 c_add(u32 rd, u32 rs2) { return c16((4u << 13) | (1u << 12) | (rd << 7) | (rs2 << 2) | 2); }

/// Little-endian code buffer with forward/backward labels for branches and
/// jumps.
class Program {
 public:
  std::uint32_t here() const { return static_cast<std::uint32_t>(bytes_.size()) + base_; }
  explicit Program(std::uint32_t base = 0) : base_(base) {}

  Program& w(u32 insn) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(insn >> (8 * i)));
    return *this;
  }
  Program& h(u16 insn) {
    bytes_.push_back(static_cast<std::uint8_t>(insn));
    bytes_.push_back(static_cast<std::uint8_t>(insn >> 8));
    return *this;
  }
  Program& word(u32 v) { return w(v); }
  void align(unsigned n) {
    while (bytes_.size() % n) bytes_.push_back(0);
  }

  void label(const std::string& name) { labels_[name] = here(); }
  std::uint32_t address_of(const std::string& name) const { return labels_.at(name); }

  /// Emits a 32-bit instruction whose pc-relative offset to `target` is
  /// patched in by `encode(offset)` at finish().
  template <class F>
  Program& wl(const std::string& target, F encode) {
    fixups_.push_back({bytes_.size(), here(), target, 4, [encode](std::int32_t off) { return encode(off); }});
    return w(0);
  }
  template <class F>
  Program& hl(const std::string& target, F encode) {
    fixups_.push_back({bytes_.size(), here(), target, 2, [encode](std::int32_t off) { return u32(encode(off)); }});
    return h(0);
  }

  /// Loads a 32-bit constant into rd (lui + addi).
  Program& li(u32 rd, u32 value) {
    const u32 lo = value & 0xFFF;
    const u32 hi = (value + (lo & 0x800 ? 0x1000 : 0)) >> 12;
    if (hi) w(lui(rd, hi));
    const std::int32_t slo = static_cast<std::int32_t>(lo << 20) >> 20;
    if (!hi || slo) w(addi(rd, hi ? rd : 0, slo));
    return *this;
  }

  std::vector<std::uint8_t> finish() {
    for (const auto& f : fixups_) {
      const auto it = labels_.find(f.target);
      if (it == labels_.end()) throw std::runtime_error("undefined label " + f.target);
      const u32 insn = f.encode(static_cast<std::int32_t>(it->second - f.pc));
      for (unsigned i = 0; i < f.size; ++i) bytes_[f.offset + i] = static_cast<std::uint8_t>(insn >> (8 * i));
    }
    fixups_.clear();
    return bytes_;
  }

  std::size_t size() const { return bytes_.size(); }

 private:
  struct Fixup {
    std::size_t offset;
    std::uint32_t pc;
    std::string target;
    unsigned size;
    std::function<u32(std::int32_t)> encode;
  };
  std::uint32_t base_;
  std::vector<std::uint8_t> bytes_;
  std::map<std::string, std::uint32_t> labels_;
  std::vector<Fixup> fixups_;
};

}  // namespace rvasm
