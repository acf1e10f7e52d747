#pragma once
// Reference RV32IMC interpreter used as a test oracle. Deliberately naive:
// byte-addressed memory, compressed instructions rewritten to their 32-bit
// encodings, one big switch on the raw word.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace ref {

struct Machine {
  std::uint32_t pc = 0;
  std::array<std::uint32_t, 32> x{};
  std::vector<std::uint8_t> mem;
  bool halted = false;
  bool faulted = false;
  std::string fault;
  std::uint64_t retired = 0;

  explicit Machine(std::size_t bytes = 32768) : mem(bytes, 0) {}

  void load(const std::vector<std::uint8_t>& image, std::uint32_t base = 0) {
    for (std::size_t i = 0; i < image.size(); ++i) mem.at(base + i) = image[i];
  }

  bool in_range(std::uint32_t a, unsigned n) const { return static_cast<std::uint64_t>(a) + n <= mem.size(); }

  std::uint32_t rd_mem(std::uint32_t a, unsigned n) {
    std::uint32_t v = 0;
    for (unsigned i = 0; i < n; ++i) v |= static_cast<std::uint32_t>(mem[a + i]) << (8 * i);
    return v;
  }
  void wr_mem(std::uint32_t a, unsigned n, std::uint32_t v) {
    for (unsigned i = 0; i < n; ++i) mem[a + i] = static_cast<std::uint8_t>(v >> (8 * i));
  }

  void stop(const std::string& why) {
    faulted = true;
    fault = why;
  }

  static std::uint32_t f(std::uint32_t v, int hi, int lo) { return (v >> lo) & ((1u << (hi - lo + 1)) - 1u); }
  static std::int32_t sx(std::uint32_t v, int bits) {
    const std::uint32_t m = 1u << (bits - 1);
    return static_cast<std::int32_t>((v ^ m) - m);
  }

  // Rewrites a 16-bit instruction as its 32-bit equivalent; 0 if illegal.
  static std::uint32_t expand(std::uint32_t c) {
    const std::uint32_t op = c & 3, f3 = f(c, 15, 13);
    const std::uint32_t rdp = f(c, 4, 2) + 8, rs1p = f(c, 9, 7) + 8, rd = f(c, 11, 7), rs2 = f(c, 6, 2);
    auto I = [](std::int32_t imm, std::uint32_t rs1, std::uint32_t fn3, std::uint32_t r, std::uint32_t opc) {
      return ((static_cast<std::uint32_t>(imm) & 0xFFF) << 20) | (rs1 << 15) | (fn3 << 12) | (r << 7) | opc;
    };
    auto R = [](std::uint32_t f7, std::uint32_t b, std::uint32_t a, std::uint32_t fn3, std::uint32_t r) {
      return (f7 << 25) | (b << 20) | (a << 15) | (fn3 << 12) | (r << 7) | 0x33;
    };
    auto S = [](std::int32_t imm, std::uint32_t b, std::uint32_t a) {
      const auto i = static_cast<std::uint32_t>(imm);
      return (f(i, 11, 5) << 25) | (b << 20) | (a << 15) | (2u << 12) | (f(i, 4, 0) << 7) | 0x23;
    };
    auto B = [](std::int32_t imm, std::uint32_t a, std::uint32_t fn3) {
      const auto i = static_cast<std::uint32_t>(imm);
      return (f(i, 12, 12) << 31) | (f(i, 10, 5) << 25) | (a << 15) | (fn3 << 12) | (f(i, 4, 1) << 8) |
             (f(i, 11, 11) << 7) | 0x63;
    };
    auto J = [](std::int32_t imm, std::uint32_t r) {
      const auto i = static_cast<std::uint32_t>(imm);
      return (f(i, 20, 20) << 31) | (f(i, 10, 1) << 21) | (f(i, 11, 11) << 20) | (f(i, 19, 12) << 12) | (r << 7) | 0x6F;
    };
    const std::int32_t imm6 = sx((f(c, 12, 12) << 5) | f(c, 6, 2), 6);
    const std::int32_t jimm = sx((f(c, 12, 12) << 11) | (f(c, 8, 8) << 10) | (f(c, 10, 9) << 8) | (f(c, 6, 6) << 7) |
                                     (f(c, 7, 7) << 6) | (f(c, 2, 2) << 5) | (f(c, 11, 11) << 4) | (f(c, 5, 3) << 1),
                                 12);
    const std::int32_t bimm =
        sx((f(c, 12, 12) << 8) | (f(c, 6, 5) << 6) | (f(c, 2, 2) << 5) | (f(c, 11, 10) << 3) | (f(c, 4, 3) << 1), 9);
    const std::uint32_t lwoff = (f(c, 5, 5) << 6) | (f(c, 12, 10) << 3) | (f(c, 6, 6) << 2);

    if (op == 0) {
      if (f3 == 0) {
        const std::uint32_t nz = (f(c, 10, 7) << 6) | (f(c, 12, 11) << 4) | (f(c, 5, 5) << 3) | (f(c, 6, 6) << 2);
        return nz ? I(static_cast<std::int32_t>(nz), 2, 0, rdp, 0x13) : 0;
      }
      if (f3 == 2) return I(static_cast<std::int32_t>(lwoff), rs1p, 2, rdp, 0x03);
      if (f3 == 6) return S(static_cast<std::int32_t>(lwoff), rdp, rs1p);
      return 0;
    }
    if (op == 1) {
      switch (f3) {
        case 0: return I(imm6, rd, 0, rd, 0x13);
        case 1: return J(jimm, 1);
        case 2: return I(imm6, 0, 0, rd, 0x13);
        case 3:
          if (rd == 2) {
            const std::int32_t i16 = sx((f(c, 12, 12) << 9) | (f(c, 4, 3) << 7) | (f(c, 5, 5) << 6) |
                                            (f(c, 2, 2) << 5) | (f(c, 6, 6) << 4),
                                        10);
            return i16 ? I(i16, 2, 0, 2, 0x13) : 0;
          }
          if (imm6 == 0) return 0;
          return (static_cast<std::uint32_t>(imm6) << 12) | (rd << 7) | 0x37;
        case 4: {
          const std::uint32_t sub = f(c, 11, 10);
          if (sub == 0 || sub == 1) {
            if (f(c, 12, 12)) return 0;
            return ((sub ? 0x20u : 0u) << 25) | (f(c, 6, 2) << 20) | (rs1p << 15) | (5u << 12) | (rs1p << 7) | 0x13;
          }
          if (sub == 2) return I(imm6, rs1p, 7, rs1p, 0x13);
          if (f(c, 12, 12)) return 0;
          switch (f(c, 6, 5)) {
            case 0: return R(0x20, rdp, rs1p, 0, rs1p);
            case 1: return R(0, rdp, rs1p, 4, rs1p);
            case 2: return R(0, rdp, rs1p, 6, rs1p);
            default: return R(0, rdp, rs1p, 7, rs1p);
          }
        }
        case 5: return J(jimm, 0);
        case 6: return B(bimm, rs1p, 0);
        default: return B(bimm, rs1p, 1);
      }
    }
    if (op == 2) {
      switch (f3) {
        case 0:
          if (f(c, 12, 12)) return 0;
          return (f(c, 6, 2) << 20) | (rd << 15) | (1u << 12) | (rd << 7) | 0x13;
        case 2: {
          if (rd == 0) return 0;
          const std::uint32_t off = (f(c, 3, 2) << 6) | (f(c, 12, 12) << 5) | (f(c, 6, 4) << 2);
          return I(static_cast<std::int32_t>(off), 2, 2, rd, 0x03);
        }
        case 4:
          if (!f(c, 12, 12)) {
            if (rs2 == 0) return rd ? I(0, rd, 0, 0, 0x67) : 0;
            return R(0, rs2, 0, 0, rd);
          }
          if (rs2 == 0) return rd ? I(0, rd, 0, 1, 0x67) : 0x00100073;
          return R(0, rs2, rd, 0, rd);
        case 6: {
          const std::uint32_t off = (f(c, 8, 7) << 6) | (f(c, 12, 9) << 2);
          return S(static_cast<std::int32_t>(off), rs2, 2);
        }
        default: return 0;
      }
    }
    return 0;
  }

  void step() {
    if (halted || faulted) return;
    if (!in_range(pc, 2)) return stop("fetch out of range");
    std::uint32_t w = rd_mem(pc, 2);
    unsigned len = 2;
    if ((w & 3) == 3) {
      if (!in_range(pc, 4)) return stop("fetch out of range");
      w = rd_mem(pc, 4);
      len = 4;
    } else {
      w = expand(w);
      if (w == 0) return stop("illegal compressed");
    }
    std::uint32_t next = pc + len;
    const std::uint32_t opc = w & 0x7F, rd = f(w, 11, 7), a = x[f(w, 19, 15)], b = x[f(w, 24, 20)];
    const std::uint32_t fn3 = f(w, 14, 12), fn7 = f(w, 31, 25);
    const std::int32_t immI = sx(f(w, 31, 20), 12);
    const std::int32_t immS = sx((f(w, 31, 25) << 5) | f(w, 11, 7), 12);
    const std::int32_t immB = sx((f(w, 31, 31) << 12) | (f(w, 7, 7) << 11) | (f(w, 30, 25) << 5) | (f(w, 11, 8) << 1), 13);
    const std::int32_t immJ =
        sx((f(w, 31, 31) << 20) | (f(w, 19, 12) << 12) | (f(w, 20, 20) << 11) | (f(w, 30, 21) << 1), 21);
    std::uint32_t result = 0;
    bool writes = true;
    const auto sa = static_cast<std::int32_t>(a), sb = static_cast<std::int32_t>(b);

    switch (opc) {
      case 0x37: result = w & 0xFFFFF000u; break;
      case 0x17: result = pc + (w & 0xFFFFF000u); break;
      case 0x6F: result = pc + len; next = pc + static_cast<std::uint32_t>(immJ); break;
      case 0x67:
        if (fn3 != 0) return stop("illegal jalr");
        result = pc + len;
        next = (a + static_cast<std::uint32_t>(immI)) & ~1u;
        break;
      case 0x63: {
        writes = false;
        bool t;
        switch (fn3) {
          case 0: t = a == b; break;
          case 1: t = a != b; break;
          case 4: t = sa < sb; break;
          case 5: t = sa >= sb; break;
          case 6: t = a < b; break;
          case 7: t = a >= b; break;
          default: return stop("illegal branch");
        }
        if (t) next = pc + static_cast<std::uint32_t>(immB);
        break;
      }
      case 0x03: {
        const std::uint32_t addr = a + static_cast<std::uint32_t>(immI);
        unsigned n = fn3 == 0 || fn3 == 4 ? 1 : fn3 == 1 || fn3 == 5 ? 2 : fn3 == 2 ? 4 : 0;
        if (!n) return stop("illegal load");
        if (addr % n) return stop("misaligned load");
        if (!in_range(addr, n)) return stop("load out of range");
        const std::uint32_t v = rd_mem(addr, n);
        result = fn3 == 0 ? static_cast<std::uint32_t>(sx(v, 8)) : fn3 == 1 ? static_cast<std::uint32_t>(sx(v, 16)) : v;
        break;
      }
      case 0x23: {
        writes = false;
        const std::uint32_t addr = a + static_cast<std::uint32_t>(immS);
        unsigned n = fn3 == 0 ? 1 : fn3 == 1 ? 2 : fn3 == 2 ? 4 : 0;
        if (!n) return stop("illegal store");
        if (addr % n) return stop("misaligned store");
        if (!in_range(addr, n)) return stop("store out of range");
        wr_mem(addr, n, b);
        break;
      }
      case 0x13: {
        const auto ui = static_cast<std::uint32_t>(immI);
        const std::uint32_t sh = f(w, 24, 20);
        switch (fn3) {
          case 0: result = a + ui; break;
          case 2: result = sa < immI; break;
          case 3: result = a < ui; break;
          case 4: result = a ^ ui; break;
          case 6: result = a | ui; break;
          case 7: result = a & ui; break;
          case 1:
            if (fn7 != 0) return stop("illegal slli");
            result = a << sh;
            break;
          default:
            if (fn7 == 0) result = a >> sh;
            else if (fn7 == 0x20) result = static_cast<std::uint32_t>(sa >> sh);
            else return stop("illegal shift");
        }
        break;
      }
      case 0x33:
        if (fn7 == 1) {
          const std::int64_t A = sa, B = sb;
          const std::uint64_t UA = a, UB = b;
          switch (fn3) {
            case 0: result = a * b; break;
            case 1: result = static_cast<std::uint32_t>(static_cast<std::uint64_t>(A * B) >> 32); break;
            case 2: result = static_cast<std::uint32_t>(static_cast<std::uint64_t>(A * static_cast<std::int64_t>(UB)) >> 32); break;
            case 3: result = static_cast<std::uint32_t>((UA * UB) >> 32); break;
            case 4:
              result = b == 0 ? 0xFFFFFFFFu
                       : (a == 0x80000000u && b == 0xFFFFFFFFu) ? a
                                                                : static_cast<std::uint32_t>(sa / sb);
              break;
            case 5: result = b == 0 ? 0xFFFFFFFFu : a / b; break;
            case 6:
              result = b == 0 ? a : (a == 0x80000000u && b == 0xFFFFFFFFu) ? 0 : static_cast<std::uint32_t>(sa % sb);
              break;
            default: result = b == 0 ? a : a % b; break;
          }
        } else if (fn7 == 0 || fn7 == 0x20) {
          const bool alt = fn7 == 0x20;
          if (alt && fn3 != 0 && fn3 != 5) return stop("illegal op");
          switch (fn3) {
            case 0: result = alt ? a - b : a + b; break;
            case 1: result = a << (b & 31); break;
            case 2: result = sa < sb; break;
            case 3: result = a < b; break;
            case 4: result = a ^ b; break;
            case 5: result = alt ? static_cast<std::uint32_t>(sa >> (b & 31)) : a >> (b & 31); break;
            case 6: result = a | b; break;
            default: result = a & b; break;
          }
        } else {
          return stop("illegal op");
        }
        break;
      case 0x0F: writes = false; break;
      case 0x73:
        if (w == 0x00100073) {
          halted = true;
          writes = false;
          break;
        }
        return stop("unsupported system instruction");
      default: return stop("illegal opcode");
    }
    if (writes && rd != 0) x[rd] = result;
    pc = next;
    ++retired;
  }

  void run(std::uint64_t max_steps) {
    for (std::uint64_t i = 0; i < max_steps && !halted && !faulted; ++i) step();
  }
};

}  // namespace ref
