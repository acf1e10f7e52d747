#include "strv/isa.hpp"

#include <cstdio>

#include "strv/timing.hpp"

namespace strv::isa {
namespace {

constexpr std::uint32_t bits(std::uint32_t x, unsigned hi, unsigned lo) {
  return (x >> lo) & ((hi - lo == 31) ? 0xFFFFFFFFu : ((1u << (hi - lo + 1)) - 1u));
}
constexpr std::uint32_t bit(std::uint32_t x, unsigned b) { return (x >> b) & 1u; }

constexpr std::int32_t sext(std::uint32_t value, unsigned width) {
  const std::uint32_t m = 1u << (width - 1);
  return static_cast<std::int32_t>((value ^ m) - m);
}

constexpr std::int32_t imm_i(std::uint32_t w) { return sext(bits(w, 31, 20), 12); }
constexpr std::int32_t imm_s(std::uint32_t w) { return sext((bits(w, 31, 25) << 5) | bits(w, 11, 7), 12); }
constexpr std::int32_t imm_b(std::uint32_t w) {
  return sext((bit(w, 31) << 12) | (bit(w, 7) << 11) | (bits(w, 30, 25) << 5) | (bits(w, 11, 8) << 1), 13);
}
constexpr std::int32_t imm_u(std::uint32_t w) { return static_cast<std::int32_t>(w & 0xFFFFF000u); }
constexpr std::int32_t imm_j(std::uint32_t w) {
  return sext((bit(w, 31) << 20) | (bits(w, 19, 12) << 12) | (bit(w, 20) << 11) | (bits(w, 30, 21) << 1), 21);
}

[[noreturn]] void illegal(std::uint32_t raw, const char* why) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "illegal instruction 0x%08x (%s)", raw, why);
  throw SimFault(FaultKind::IllegalInstruction, raw, buf);
}

Instruction make(Mnemonic m, unsigned rd, unsigned rs1, unsigned rs2, std::int32_t imm, std::uint32_t raw,
                 Mnemonic op, unsigned length) {
  Instruction in;
  in.mnemonic = m;
  in.op = op;
  in.rd = static_cast<std::uint8_t>(rd);
  in.rs1 = static_cast<std::uint8_t>(rs1);
  in.rs2 = static_cast<std::uint8_t>(rs2);
  in.imm = imm;
  in.raw = raw;
  in.length = static_cast<std::uint8_t>(length);
  return in;
}

Instruction full(Mnemonic m, unsigned rd, unsigned rs1, unsigned rs2, std::int32_t imm, std::uint32_t raw) {
  return make(m, rd, rs1, rs2, imm, raw, m, 4);
}

Instruction compact(Mnemonic m, Mnemonic op, unsigned rd, unsigned rs1, unsigned rs2, std::int32_t imm,
                    std::uint32_t raw) {
  return make(m, rd, rs1, rs2, imm, raw, op, 2);
}

Instruction decode32(std::uint32_t w) {
  const unsigned rd = bits(w, 11, 7);
  const unsigned rs1 = bits(w, 19, 15);
  const unsigned rs2 = bits(w, 24, 20);
  const unsigned f3 = bits(w, 14, 12);
  const unsigned f7 = bits(w, 31, 25);

  switch (bits(w, 6, 0)) {
    case 0x37: return full(Mnemonic::Lui, rd, 0, 0, imm_u(w), w);
    case 0x17: return full(Mnemonic::Auipc, rd, 0, 0, imm_u(w), w);
    case 0x6F: return full(Mnemonic::Jal, rd, 0, 0, imm_j(w), w);
    case 0x67:
      if (f3 != 0) illegal(w, "jalr funct3");
      return full(Mnemonic::Jalr, rd, rs1, 0, imm_i(w), w);
    case 0x63: {
      static constexpr Mnemonic kBranch[8] = {Mnemonic::Beq, Mnemonic::Bne, Mnemonic::Addi, Mnemonic::Addi,
                                              Mnemonic::Blt, Mnemonic::Bge, Mnemonic::Bltu, Mnemonic::Bgeu};
      if (f3 == 2 || f3 == 3) illegal(w, "branch funct3");
      return full(kBranch[f3], 0, rs1, rs2, imm_b(w), w);
    }
    case 0x03: {
      static constexpr Mnemonic kLoad[8] = {Mnemonic::Lb, Mnemonic::Lh, Mnemonic::Lw, Mnemonic::Addi,
                                            Mnemonic::Lbu, Mnemonic::Lhu, Mnemonic::Addi, Mnemonic::Addi};
      if (f3 == 3 || f3 > 5) illegal(w, "load funct3");
      return full(kLoad[f3], rd, rs1, 0, imm_i(w), w);
    }
    case 0x23: {
      static constexpr Mnemonic kStore[3] = {Mnemonic::Sb, Mnemonic::Sh, Mnemonic::Sw};
      if (f3 > 2) illegal(w, "store funct3");
      return full(kStore[f3], 0, rs1, rs2, imm_s(w), w);
    }
    case 0x13:
      switch (f3) {
        case 0: return full(Mnemonic::Addi, rd, rs1, 0, imm_i(w), w);
        case 2: return full(Mnemonic::Slti, rd, rs1, 0, imm_i(w), w);
        case 3: return full(Mnemonic::Sltiu, rd, rs1, 0, imm_i(w), w);
        case 4: return full(Mnemonic::Xori, rd, rs1, 0, imm_i(w), w);
        case 6: return full(Mnemonic::Ori, rd, rs1, 0, imm_i(w), w);
        case 7: return full(Mnemonic::Andi, rd, rs1, 0, imm_i(w), w);
        case 1:
          if (f7 != 0) illegal(w, "slli funct7");
          return full(Mnemonic::Slli, rd, rs1, 0, static_cast<std::int32_t>(rs2), w);
        case 5:
          if (f7 == 0x00) return full(Mnemonic::Srli, rd, rs1, 0, static_cast<std::int32_t>(rs2), w);
          if (f7 == 0x20) return full(Mnemonic::Srai, rd, rs1, 0, static_cast<std::int32_t>(rs2), w);
          illegal(w, "shift funct7");
      }
      break;
    case 0x33:
      if (f7 == 0x00) {
        static constexpr Mnemonic kOp[8] = {Mnemonic::Add, Mnemonic::Sll, Mnemonic::Slt, Mnemonic::Sltu,
                                            Mnemonic::Xor, Mnemonic::Srl, Mnemonic::Or,  Mnemonic::And};
        return full(kOp[f3], rd, rs1, rs2, 0, w);
      }
      if (f7 == 0x20 && (f3 == 0 || f3 == 5))
        return full(f3 == 0 ? Mnemonic::Sub : Mnemonic::Sra, rd, rs1, rs2, 0, w);
      if (f7 == 0x01) {
        static constexpr Mnemonic kM[8] = {Mnemonic::Mul, Mnemonic::Mulh, Mnemonic::Mulhsu, Mnemonic::Mulhu,
                                           Mnemonic::Div, Mnemonic::Divu, Mnemonic::Rem,    Mnemonic::Remu};
        return full(kM[f3], rd, rs1, rs2, 0, w);
      }
      illegal(w, "op funct7");
    case 0x0F:
      if (f3 == 0 || f3 == 1) return full(Mnemonic::Fence, 0, 0, 0, 0, w);
      illegal(w, "misc-mem funct3");
    case 0x73: {
      if (w == 0x00000073) return full(Mnemonic::Ecall, 0, 0, 0, 0, w);
      if (w == 0x00100073) return full(Mnemonic::Ebreak, 0, 0, 0, 0, w);
      const std::uint32_t csr = bits(w, 31, 20);
      if (csr != kCsrCycle && csr != kCsrCycleH) illegal(w, "unsupported csr");
      // Only side-effect-free reads of the cycle counter are implemented.
      if (rs1 != 0) illegal(w, "csr write");
      switch (f3) {
        case 2: return full(Mnemonic::Csrrs, rd, 0, 0, static_cast<std::int32_t>(csr), w);
        case 3: return full(Mnemonic::Csrrc, rd, 0, 0, static_cast<std::int32_t>(csr), w);
        case 6: return full(Mnemonic::Csrrsi, rd, 0, 0, static_cast<std::int32_t>(csr), w);
        case 7: return full(Mnemonic::Csrrci, rd, 0, 0, static_cast<std::int32_t>(csr), w);
        default: illegal(w, "csr write");
      }
    }
    default: break;
  }
  illegal(w, "opcode");
}

Instruction decode16(std::uint32_t h) {
  const unsigned f3 = bits(h, 15, 13);
  const unsigned rd_full = bits(h, 11, 7);
  const unsigned rs2_full = bits(h, 6, 2);
  const unsigned rd_p = bits(h, 4, 2) + 8;
  const unsigned rs1_p = bits(h, 9, 7) + 8;
  const std::int32_t ci_imm = sext((bit(h, 12) << 5) | bits(h, 6, 2), 6);

  switch (h & 3u) {
    case 0:
      switch (f3) {
        case 0: {
          const std::uint32_t nzuimm =
              (bits(h, 12, 11) << 4) | (bits(h, 10, 7) << 6) | (bit(h, 6) << 2) | (bit(h, 5) << 3);
          if (nzuimm == 0) illegal(h, "c.addi4spn zero immediate");
          return compact(Mnemonic::CAddi4spn, Mnemonic::Addi, rd_p, 2, 0, static_cast<std::int32_t>(nzuimm), h);
        }
        case 2:
        case 6: {
          const std::uint32_t uimm = (bits(h, 12, 10) << 3) | (bit(h, 6) << 2) | (bit(h, 5) << 6);
          if (f3 == 2) return compact(Mnemonic::CLw, Mnemonic::Lw, rd_p, rs1_p, 0, static_cast<std::int32_t>(uimm), h);
          return compact(Mnemonic::CSw, Mnemonic::Sw, 0, rs1_p, rd_p, static_cast<std::int32_t>(uimm), h);
        }
        default: illegal(h, "quadrant 0 funct3");
      }
    case 1:
      switch (f3) {
        case 0:
          if (rd_full == 0) return compact(Mnemonic::CNop, Mnemonic::Addi, 0, 0, 0, ci_imm, h);
          return compact(Mnemonic::CAddi, Mnemonic::Addi, rd_full, rd_full, 0, ci_imm, h);
        case 1:
        case 5: {
          const std::uint32_t off = (bit(h, 12) << 11) | (bit(h, 11) << 4) | (bits(h, 10, 9) << 8) |
                                    (bit(h, 8) << 10) | (bit(h, 7) << 6) | (bit(h, 6) << 7) |
                                    (bits(h, 5, 3) << 1) | (bit(h, 2) << 5);
          if (f3 == 1) return compact(Mnemonic::CJal, Mnemonic::Jal, 1, 0, 0, sext(off, 12), h);
          return compact(Mnemonic::CJ, Mnemonic::Jal, 0, 0, 0, sext(off, 12), h);
        }
        case 2: return compact(Mnemonic::CLi, Mnemonic::Addi, rd_full, 0, 0, ci_imm, h);
        case 3:
          if (rd_full == 2) {
            const std::uint32_t nz = (bit(h, 12) << 9) | (bit(h, 6) << 4) | (bit(h, 5) << 6) |
                                     (bits(h, 4, 3) << 7) | (bit(h, 2) << 5);
            if (nz == 0) illegal(h, "c.addi16sp zero immediate");
            return compact(Mnemonic::CAddi16sp, Mnemonic::Addi, 2, 2, 0, sext(nz, 10), h);
          } else {
            const std::uint32_t nz = (bit(h, 12) << 17) | (bits(h, 6, 2) << 12);
            if (nz == 0) illegal(h, "c.lui zero immediate");
            return compact(Mnemonic::CLui, Mnemonic::Lui, rd_full, 0, 0, sext(nz, 18), h);
          }
        case 4: {
          const unsigned shamt = bits(h, 6, 2);
          switch (bits(h, 11, 10)) {
            case 0:
              if (bit(h, 12)) illegal(h, "c.srli shamt[5]");
              return compact(Mnemonic::CSrli, Mnemonic::Srli, rs1_p, rs1_p, 0, static_cast<std::int32_t>(shamt), h);
            case 1:
              if (bit(h, 12)) illegal(h, "c.srai shamt[5]");
              return compact(Mnemonic::CSrai, Mnemonic::Srai, rs1_p, rs1_p, 0, static_cast<std::int32_t>(shamt), h);
            case 2: return compact(Mnemonic::CAndi, Mnemonic::Andi, rs1_p, rs1_p, 0, ci_imm, h);
            default: {
              if (bit(h, 12)) illegal(h, "rv64 c.subw/c.addw");
              static constexpr Mnemonic kC[4] = {Mnemonic::CSub, Mnemonic::CXor, Mnemonic::COr, Mnemonic::CAnd};
              static constexpr Mnemonic kOp[4] = {Mnemonic::Sub, Mnemonic::Xor, Mnemonic::Or, Mnemonic::And};
              const unsigned k = bits(h, 6, 5);
              return compact(kC[k], kOp[k], rs1_p, rs1_p, rd_p, 0, h);
            }
          }
        }
        default: {  // 6, 7
          const std::uint32_t off = (bit(h, 12) << 8) | (bits(h, 11, 10) << 3) | (bits(h, 6, 5) << 6) |
                                    (bits(h, 4, 3) << 1) | (bit(h, 2) << 5);
          if (f3 == 6) return compact(Mnemonic::CBeqz, Mnemonic::Beq, 0, rs1_p, 0, sext(off, 9), h);
          return compact(Mnemonic::CBnez, Mnemonic::Bne, 0, rs1_p, 0, sext(off, 9), h);
        }
      }
    case 2:
      switch (f3) {
        case 0:
          if (bit(h, 12)) illegal(h, "c.slli shamt[5]");
          return compact(Mnemonic::CSlli, Mnemonic::Slli, rd_full, rd_full, 0, static_cast<std::int32_t>(rs2_full), h);
        case 2: {
          if (rd_full == 0) illegal(h, "c.lwsp rd=0");
          const std::uint32_t uimm = (bit(h, 12) << 5) | (bits(h, 6, 4) << 2) | (bits(h, 3, 2) << 6);
          return compact(Mnemonic::CLwsp, Mnemonic::Lw, rd_full, 2, 0, static_cast<std::int32_t>(uimm), h);
        }
        case 4:
          if (!bit(h, 12)) {
            if (rs2_full == 0) {
              if (rd_full == 0) illegal(h, "c.jr rs1=0");
              return compact(Mnemonic::CJr, Mnemonic::Jalr, 0, rd_full, 0, 0, h);
            }
            return compact(Mnemonic::CMv, Mnemonic::Add, rd_full, 0, rs2_full, 0, h);
          }
          if (rs2_full == 0) {
            if (rd_full == 0) return compact(Mnemonic::CEbreak, Mnemonic::Ebreak, 0, 0, 0, 0, h);
            return compact(Mnemonic::CJalr, Mnemonic::Jalr, 1, rd_full, 0, 0, h);
          }
          return compact(Mnemonic::CAdd, Mnemonic::Add, rd_full, rd_full, rs2_full, 0, h);
        case 6: {
          const std::uint32_t uimm = (bits(h, 12, 9) << 2) | (bits(h, 8, 7) << 6);
          return compact(Mnemonic::CSwsp, Mnemonic::Sw, 0, 2, rs2_full, static_cast<std::int32_t>(uimm), h);
        }
        default: illegal(h, "quadrant 2 funct3");
      }
    default: break;
  }
  illegal(h, "compressed");
}

}  // namespace

const char* to_string(Mnemonic m) {
  static constexpr const char* kNames[] = {
      "lui", "auipc", "jal", "jalr", "beq", "bne", "blt", "bge", "bltu", "bgeu",
      "lb", "lh", "lw", "lbu", "lhu", "sb", "sh", "sw",
      "addi", "slti", "sltiu", "xori", "ori", "andi", "slli", "srli", "srai",
      "add", "sub", "sll", "slt", "sltu", "xor", "srl", "sra", "or", "and",
      "fence", "ecall", "ebreak", "csrrs", "csrrc", "csrrsi", "csrrci",
      "mul", "mulh", "mulhsu", "mulhu", "div", "divu", "rem", "remu",
      "c.addi4spn", "c.lw", "c.sw", "c.nop", "c.addi", "c.jal", "c.li", "c.addi16sp", "c.lui",
      "c.srli", "c.srai", "c.andi", "c.sub", "c.xor", "c.or", "c.and", "c.j", "c.beqz", "c.bnez",
      "c.slli", "c.lwsp", "c.jr", "c.mv", "c.ebreak", "c.jalr", "c.add", "c.swsp",
  };
  return kNames[static_cast<std::size_t>(m)];
}

Instruction decode(std::uint32_t window) {
  if (instruction_length(window & 0xFFFFu) == 2) {
    const std::uint32_t h = window & 0xFFFFu;
    if (h == 0) illegal(h, "all-zero halfword");
    return decode16(h);
  }
  return decode32(window);
}

std::string disassemble(const Instruction& in) {
  char buf[80];
  const char* name = to_string(in.mnemonic);
  const unsigned rd = in.rd, rs1 = in.rs1, rs2 = in.rs2;
  const int imm = in.imm;
  if (in.compressed()) {
    switch (in.mnemonic) {
      case Mnemonic::CNop: case Mnemonic::CEbreak: return name;
      case Mnemonic::CAddi16sp: std::snprintf(buf, sizeof buf, "%s %d", name, imm); break;
      case Mnemonic::CLui:
        std::snprintf(buf, sizeof buf, "%s x%u, 0x%x", name, rd, static_cast<unsigned>(imm) >> 12);
        break;
      case Mnemonic::CLw: case Mnemonic::CLwsp:
        std::snprintf(buf, sizeof buf, "%s x%u, %d(x%u)", name, rd, imm, rs1);
        break;
      case Mnemonic::CSw: case Mnemonic::CSwsp:
        std::snprintf(buf, sizeof buf, "%s x%u, %d(x%u)", name, rs2, imm, rs1);
        break;
      case Mnemonic::CMv: case Mnemonic::CAdd: case Mnemonic::CSub: case Mnemonic::CXor: case Mnemonic::COr:
      case Mnemonic::CAnd:
        std::snprintf(buf, sizeof buf, "%s x%u, x%u", name, rd, rs2);
        break;
      case Mnemonic::CJ: case Mnemonic::CJal: std::snprintf(buf, sizeof buf, "%s %d", name, imm); break;
      case Mnemonic::CBeqz: case Mnemonic::CBnez: std::snprintf(buf, sizeof buf, "%s x%u, %d", name, rs1, imm); break;
      case Mnemonic::CJr: case Mnemonic::CJalr: std::snprintf(buf, sizeof buf, "%s x%u", name, rs1); break;
      default: std::snprintf(buf, sizeof buf, "%s x%u, %d", name, rd, imm); break;
    }
    return buf;
  }
  const Mnemonic op = in.op;
  if (op == Mnemonic::Fence || op == Mnemonic::Ecall || op == Mnemonic::Ebreak) return name;
  if (op == Mnemonic::Lui || op == Mnemonic::Auipc)
    std::snprintf(buf, sizeof buf, "%s x%u, 0x%x", name, rd, static_cast<unsigned>(imm) >> 12);
  else if (op == Mnemonic::Jal)
    std::snprintf(buf, sizeof buf, "%s x%u, %d", name, rd, imm);
  else if (op == Mnemonic::Jalr || is_load(op))
    std::snprintf(buf, sizeof buf, "%s x%u, %d(x%u)", name, rd, imm, rs1);
  else if (is_store(op))
    std::snprintf(buf, sizeof buf, "%s x%u, %d(x%u)", name, rs2, imm, rs1);
  else if (op >= Mnemonic::Beq && op <= Mnemonic::Bgeu)
    std::snprintf(buf, sizeof buf, "%s x%u, x%u, %d", name, rs1, rs2, imm);
  else if (op >= Mnemonic::Csrrs && op <= Mnemonic::Csrrci)
    std::snprintf(buf, sizeof buf, "%s x%u, 0x%x, x%u", name, rd, static_cast<unsigned>(imm), rs1);
  else if (op >= Mnemonic::Addi && op <= Mnemonic::Srai)
    std::snprintf(buf, sizeof buf, "%s x%u, x%u, %d", name, rd, rs1, imm);
  else
    std::snprintf(buf, sizeof buf, "%s x%u, x%u, x%u", name, rd, rs1, rs2);
  return buf;
}

bool is_load(Mnemonic op) {
  return op == Mnemonic::Lb || op == Mnemonic::Lh || op == Mnemonic::Lw || op == Mnemonic::Lbu ||
         op == Mnemonic::Lhu;
}

bool is_store(Mnemonic op) { return op == Mnemonic::Sb || op == Mnemonic::Sh || op == Mnemonic::Sw; }

bool is_mul_div(Mnemonic op) { return op >= Mnemonic::Mul && op <= Mnemonic::Remu; }

bool is_control_transfer(Mnemonic op) { return op >= Mnemonic::Jal && op <= Mnemonic::Bgeu; }

namespace {

std::uint32_t mulh_signed(std::uint32_t a, std::uint32_t b) {
  const auto p = static_cast<std::int64_t>(static_cast<std::int32_t>(a)) * static_cast<std::int32_t>(b);
  return static_cast<std::uint32_t>(static_cast<std::uint64_t>(p) >> 32);
}

std::uint32_t mulh_signed_unsigned(std::uint32_t a, std::uint32_t b) {
  const auto p = static_cast<std::int64_t>(static_cast<std::int32_t>(a)) * static_cast<std::int64_t>(b);
  return static_cast<std::uint32_t>(static_cast<std::uint64_t>(p) >> 32);
}

std::uint32_t alu(Mnemonic op, std::uint32_t a, std::uint32_t b) {
  const auto sa = static_cast<std::int32_t>(a);
  const auto sb = static_cast<std::int32_t>(b);
  switch (op) {
    case Mnemonic::Add: case Mnemonic::Addi: return a + b;
    case Mnemonic::Sub: return a - b;
    case Mnemonic::Sll: case Mnemonic::Slli: return a << (b & 31);
    case Mnemonic::Srl: case Mnemonic::Srli: return a >> (b & 31);
    case Mnemonic::Sra: case Mnemonic::Srai: return static_cast<std::uint32_t>(sa >> (b & 31));
    case Mnemonic::Slt: case Mnemonic::Slti: return sa < sb ? 1 : 0;
    case Mnemonic::Sltu: case Mnemonic::Sltiu: return a < b ? 1 : 0;
    case Mnemonic::Xor: case Mnemonic::Xori: return a ^ b;
    case Mnemonic::Or: case Mnemonic::Ori: return a | b;
    case Mnemonic::And: case Mnemonic::Andi: return a & b;
    case Mnemonic::Mul: return a * b;
    case Mnemonic::Mulh: return mulh_signed(a, b);
    case Mnemonic::Mulhsu: return mulh_signed_unsigned(a, b);
    case Mnemonic::Mulhu: return static_cast<std::uint32_t>((static_cast<std::uint64_t>(a) * b) >> 32);
    case Mnemonic::Div:
      if (b == 0) return 0xFFFFFFFFu;
      if (a == 0x80000000u && b == 0xFFFFFFFFu) return a;
      return static_cast<std::uint32_t>(sa / sb);
    case Mnemonic::Divu: return b == 0 ? 0xFFFFFFFFu : a / b;
    case Mnemonic::Rem:
      if (b == 0) return a;
      if (a == 0x80000000u && b == 0xFFFFFFFFu) return 0;
      return static_cast<std::uint32_t>(sa % sb);
    case Mnemonic::Remu: return b == 0 ? a : a % b;
    default: return 0;
  }
}

bool branch_taken(Mnemonic op, std::uint32_t a, std::uint32_t b) {
  const auto sa = static_cast<std::int32_t>(a);
  const auto sb = static_cast<std::int32_t>(b);
  switch (op) {
    case Mnemonic::Beq: return a == b;
    case Mnemonic::Bne: return a != b;
    case Mnemonic::Blt: return sa < sb;
    case Mnemonic::Bge: return sa >= sb;
    case Mnemonic::Bltu: return a < b;
    case Mnemonic::Bgeu: return a >= b;
    default: return false;
  }
}

std::uint8_t access_width(Mnemonic op) {
  switch (op) {
    case Mnemonic::Lb: case Mnemonic::Lbu: case Mnemonic::Sb: return 1;
    case Mnemonic::Lh: case Mnemonic::Lhu: case Mnemonic::Sh: return 2;
    default: return 4;
  }
}

}  // namespace

Effect execute(const Instruction& in, std::uint32_t pc, std::uint32_t a, std::uint32_t b, const CsrValues& csr) {
  Effect e;
  const auto imm = static_cast<std::uint32_t>(in.imm);
  e.next_pc = pc + in.length;
  auto wr = [&](std::uint32_t v) {
    if (in.rd != 0) e.write = RegWrite{in.rd, v};
  };

  switch (in.op) {
    case Mnemonic::Lui: wr(imm); break;
    case Mnemonic::Auipc: wr(pc + imm); break;
    case Mnemonic::Jal:
      wr(pc + in.length);
      e.next_pc = pc + imm;
      e.redirect = true;
      break;
    case Mnemonic::Jalr:
      wr(pc + in.length);
      e.next_pc = (a + imm) & ~1u;
      e.redirect = true;
      break;
    case Mnemonic::Beq: case Mnemonic::Bne: case Mnemonic::Blt:
    case Mnemonic::Bge: case Mnemonic::Bltu: case Mnemonic::Bgeu:
      if (branch_taken(in.op, a, b)) {
        e.next_pc = pc + imm;
        e.redirect = true;
      }
      break;
    case Mnemonic::Lb: case Mnemonic::Lh: case Mnemonic::Lw: case Mnemonic::Lbu: case Mnemonic::Lhu:
    case Mnemonic::Sb: case Mnemonic::Sh: case Mnemonic::Sw: {
      MemRequest r;
      r.kind = is_store(in.op) ? AccessKind::Store : AccessKind::Load;
      r.address = a + imm;
      r.width = access_width(in.op);
      r.sign_extend = in.op == Mnemonic::Lb || in.op == Mnemonic::Lh;
      r.data = b;
      if (r.address % r.width != 0) {
        char buf[80];
        std::snprintf(buf, sizeof buf, "misaligned %u-byte access to 0x%08x at pc 0x%08x", r.width, r.address, pc);
        throw SimFault(FaultKind::AlignmentFault, r.address, buf);
      }
      if (r.kind == AccessKind::Load) e.load_rd = in.rd;
      e.mem = r;
      break;
    }
    case Mnemonic::Addi: case Mnemonic::Slti: case Mnemonic::Sltiu: case Mnemonic::Xori: case Mnemonic::Ori:
    case Mnemonic::Andi: case Mnemonic::Slli: case Mnemonic::Srli: case Mnemonic::Srai:
      wr(alu(in.op, a, imm));
      break;
    case Mnemonic::Fence: break;
    case Mnemonic::Ebreak: e.halt = true; break;
    case Mnemonic::Ecall:
      throw SimFault(FaultKind::IllegalInstruction, pc, "ecall has no trap handler in this core");
    case Mnemonic::Csrrs: case Mnemonic::Csrrc: case Mnemonic::Csrrsi: case Mnemonic::Csrrci:
      wr(in.imm == kCsrCycle ? static_cast<std::uint32_t>(csr.cycle) : static_cast<std::uint32_t>(csr.cycle >> 32));
      break;
    default:
      wr(alu(in.op, a, b));
      break;
  }
  return e;
}

ArchState::ArchState() {
  for (unsigned i = 0; i < 32; ++i) regs[i] = TmrCell(32, i, Domain::Core);
}

void ArchState::set_reg(unsigned index, std::uint32_t value) {
  if (index != 0) regs[index] = tmr_write(regs[index], value);
}

bool ArchState::same_architecture(const ArchState& other) const {
  if (pc != other.pc) return false;
  for (unsigned i = 1; i < 32; ++i)
    if (reg(i) != other.reg(i)) return false;
  return true;
}

std::optional<MemRequest> execute(ArchState& state, const Instruction& in) {
  const Effect e = execute(in, state.pc, state.reg(in.rs1), state.reg(in.rs2), CsrValues{state.cycle});
  if (e.write) state.set_reg(e.write->rd, e.write->value);
  state.pc = e.next_pc;
  if (e.halt) state.halted = true;
  return e.mem;
}

void complete_load(ArchState& state, const Instruction& in, std::uint32_t value) { state.set_reg(in.rd, value); }

void step_instruction(ArchState& state, Bus& bus, const TimingConfig& timing) {
  if (state.halted) return;
  const std::uint32_t pc = state.pc;
  std::uint32_t window;
  if (pc & 2u) {
    const std::uint32_t lo = bus.read_word(pc & ~3u, AccessKind::InstrFetch) >> 16;
    if (instruction_length(lo) == 4)
      window = lo | (bus.read_word((pc & ~3u) + 4, AccessKind::InstrFetch) << 16);
    else
      window = lo;
  } else {
    window = bus.read_word(pc, AccessKind::InstrFetch);
  }
  const Instruction in = decode(window);

  // The pipelined core executes this instruction at the cycle after its fetch
  // completes; CSR reads observe that cycle.
  const std::uint64_t exec_cycle = state.cycle + 1 + (straddles_word(in, pc) ? 1 : 0);
  const Effect e = execute(in, pc, state.reg(in.rs1), state.reg(in.rs2), CsrValues{exec_cycle});

  // Feedback refresh of every register the instruction does not write.
  for (auto& r : state.regs) r = feedback_refresh(r).first;

  if (e.write) state.set_reg(e.write->rd, e.write->value);
  if (e.mem) {
    if (e.mem->kind == AccessKind::Load)
      complete_load(state, in, perform_load(bus, *e.mem));
    else
      perform_store(bus, *e.mem);
  }
  state.pc = e.next_pc;
  if (e.halt) state.halted = true;
  state.cycle += instruction_cost(in, pc, e, timing);
  ++state.retired;
}

}  // namespace strv::isa
