#pragma once
// Random RV32IMC program generator for differential testing. Programs only
// branch forward, except for counted loops on x31, so they always terminate.
// x2 and x8 hold data base addresses (0x4000, 0x5000) and are never written.

#include <random>
#include <string>
#include <vector>

#include "support/rvasm.hpp"

namespace randprog {

using namespace rvasm;

class Generator {
 public:
  explicit Generator(std::uint64_t seed) : rng_(seed) {}

  std::vector<std::uint8_t> program() {
    Program p;
    p.li(2, 0x4000);
    p.li(8, 0x5000);
    for (u32 r : {1u, 3u, 5u, 9u, 12u, 15u, 20u, 27u, 30u})
      if (chance(60)) p.li(r, interesting());
    block(p, "t", range(10, 90), true);
    if (chance(50)) p.w(ebreak()); else p.h(c_ebreak());
    return p.finish();
  }

 private:
  std::mt19937_64 rng_;
  unsigned labels_ = 0;

  u32 range(u32 lo, u32 hi) { return lo + static_cast<u32>(rng_() % (hi - lo + 1)); }
  bool chance(unsigned percent) { return rng_() % 100 < percent; }
  u32 any_reg() { return range(0, 31); }
  u32 dest() {
    for (;;) {
      const u32 r = range(0, 30);
      if (r != 2 && r != 8) return r;
    }
  }
  u32 nonzero_dest() {
    const u32 r = dest();
    return r ? r : 1;
  }
  u32 dest_c() { return range(9, 15); }  // compressed destination, never x8
  u32 interesting() {
    static const u32 k[] = {0, 1, 2, 0x7FFFFFFF, 0x80000000, 0xFFFFFFFF, 0xFFFFFFFE, 31, 32, 0x8000, 0xFFFF};
    return chance(40) ? k[rng_() % std::size(k)] : static_cast<u32>(rng_());
  }
  std::int32_t imm12() { return static_cast<std::int32_t>(range(0, 4095)) - 2048; }

  // A block of `n` slots with a label before each one and one at the end.
  void block(Program& p, const std::string& prefix, u32 n, bool allow_loops) {
    for (u32 i = 0; i < n; ++i) {
      p.label(prefix + std::to_string(i));
      const std::string target = prefix + std::to_string(range(i + 1, std::min(n, i + 8)));
      slot(p, target, allow_loops);
    }
    p.label(prefix + std::to_string(n));
  }

  void slot(Program& p, const std::string& target, bool allow_loops) {
    const u32 kind = range(0, 99);
    if (kind < 22) return alu_reg(p);
    if (kind < 36) return alu_imm(p);
    if (kind < 40) {
      const u32 hi = static_cast<u32>(rng_()) & 0xFFFFF;
      p.w(chance(50) ? lui(dest(), hi) : auipc(dest(), hi));
      return;
    }
    if (kind < 50) return load(p);
    if (kind < 58) return store(p);
    if (kind < 76) return compressed(p);
    if (kind < 92) return jump(p, target);
    if (kind < 96 && allow_loops) return loop(p);
    if (kind < 99) return alu_imm(p);
    // Rare odd cases: fence, or a trap that ends the run.
    if (chance(80)) p.w(fence());
    else if (chance(50)) p.w(ecall());
    else p.w(0xFFFFFFFF);
  }

  void alu_reg(Program& p) {
    using Fn = u32 (*)(u32, u32, u32);
    static const Fn ops[] = {add, sub, sll, slt, sltu, xor_, srl, sra, or_, and_,
                             mul, mulh, mulhsu, mulhu, div, divu, rem, remu};
    p.w(ops[rng_() % std::size(ops)](dest(), any_reg(), any_reg()));
  }

  void alu_imm(Program& p) {
    const u32 rd = dest(), rs = any_reg();
    switch (range(0, 8)) {
      case 0: p.w(addi(rd, rs, imm12())); break;
      case 1: p.w(slti(rd, rs, imm12())); break;
      case 2: p.w(sltiu(rd, rs, imm12())); break;
      case 3: p.w(xori(rd, rs, imm12())); break;
      case 4: p.w(ori(rd, rs, imm12())); break;
      case 5: p.w(andi(rd, rs, imm12())); break;
      case 6: p.w(slli(rd, rs, range(0, 31))); break;
      case 7: p.w(srli(rd, rs, range(0, 31))); break;
      default: p.w(srai(rd, rs, range(0, 31))); break;
    }
  }

  std::int32_t mem_offset(unsigned size) {
    std::int32_t off = imm12();
    if (!chance(2)) off &= ~static_cast<std::int32_t>(size - 1);  // mostly aligned
    return off;
  }

  void load(Program& p) {
    const u32 base = chance(50) ? 2 : 8;
    switch (range(0, 4)) {
      case 0: p.w(lb(dest(), base, mem_offset(1))); break;
      case 1: p.w(lbu(dest(), base, mem_offset(1))); break;
      case 2: p.w(lh(dest(), base, mem_offset(2))); break;
      case 3: p.w(lhu(dest(), base, mem_offset(2))); break;
      default: p.w(lw(dest(), base, mem_offset(4))); break;
    }
  }

  void store(Program& p) {
    const u32 base = chance(50) ? 2 : 8;
    switch (range(0, 2)) {
      case 0: p.w(sb(any_reg(), base, mem_offset(1))); break;
      case 1: p.w(sh(any_reg(), base, mem_offset(2))); break;
      default: p.w(sw(any_reg(), base, mem_offset(4))); break;
    }
  }

  std::int32_t imm6() { return static_cast<std::int32_t>(range(0, 63)) - 32; }

  void compressed(Program& p) {
    switch (range(0, 17)) {
      case 0: p.h(c_li(dest(), imm6())); break;
      case 1: p.h(c_addi(dest(), imm6())); break;
      case 2: {
        std::int32_t v = imm6();
        if (v == 0) v = 1;
        p.h(c_lui(nonzero_dest(), v));
        break;
      }
      case 3: p.h(c_mv(dest(), range(1, 31))); break;
      case 4: p.h(c_add(dest(), range(1, 31))); break;
      case 5: p.h(c_slli(dest(), range(0, 31))); break;
      case 6: p.h(c_srli(dest_c(), range(0, 31))); break;
      case 7: p.h(c_srai(dest_c(), range(0, 31))); break;
      case 8: p.h(c_andi(dest_c(), imm6())); break;
      case 9: p.h(c_sub(dest_c(), range(8, 15))); break;
      case 10: p.h(c_xor(dest_c(), range(8, 15))); break;
      case 11: p.h(c_or(dest_c(), range(8, 15))); break;
      case 12: p.h(c_and(dest_c(), range(8, 15))); break;
      case 13: p.h(c_lwsp(nonzero_dest(), 4 * range(0, 63))); break;
      case 14: p.h(c_swsp(any_reg(), 4 * range(0, 63))); break;
      case 15: p.h(c_lw(dest_c(), 8, 4 * range(0, 31))); break;
      case 16: p.h(c_sw(range(8, 15), 8, 4 * range(0, 31))); break;
      default: p.h(c_addi4spn(dest_c(), 4 * range(1, 255))); break;
    }
  }

  void jump(Program& p, const std::string& target) {
    const u32 a = any_reg(), b = any_reg();
    switch (range(0, 10)) {
      case 0: p.wl(target, [a, b](std::int32_t o) { return beq(a, b, o); }); break;
      case 1: p.wl(target, [a, b](std::int32_t o) { return bne(a, b, o); }); break;
      case 2: p.wl(target, [a, b](std::int32_t o) { return blt(a, b, o); }); break;
      case 3: p.wl(target, [a, b](std::int32_t o) { return bge(a, b, o); }); break;
      case 4: p.wl(target, [a, b](std::int32_t o) { return bltu(a, b, o); }); break;
      case 5: p.wl(target, [a, b](std::int32_t o) { return bgeu(a, b, o); }); break;
      case 6: {
        const u32 rd = dest();
        p.wl(target, [rd](std::int32_t o) { return jal(rd, o); });
        break;
      }
      case 7: {
        // auipc rX, 0; jalr rd, rX, target - auipc (bit 0 set sometimes).
        const u32 rx = nonzero_dest(), rd = dest();
        const std::int32_t odd = chance(30) ? 1 : 0;
        p.w(auipc(rx, 0));
        p.wl(target, [rx, rd, odd](std::int32_t o) { return jalr(rd, rx, o + 4 + odd); });
        break;
      }
      case 8: p.hl(target, [](std::int32_t o) { return c_j(o); }); break;
      case 9: p.hl(target, [](std::int32_t o) { return c_jal(o); }); break;
      default: {
        const u32 r = range(8, 15);
        if (chance(50)) p.hl(target, [r](std::int32_t o) { return c_beqz(r, o); });
        else p.hl(target, [r](std::int32_t o) { return c_bnez(r, o); });
        break;
      }
    }
  }

  // li x31, n; body; addi x31, x31, -1; bne x31, x0, top
  void loop(Program& p) {
    const std::string prefix = "l" + std::to_string(labels_++) + "_";
    p.w(addi(31, 0, static_cast<std::int32_t>(range(1, 4))));
    p.label(prefix + "top");
    block(p, prefix, range(1, 12), false);
    p.w(addi(31, 31, -1));
    p.wl(prefix + "top", [](std::int32_t o) { return bne(31, 0, o); });
  }
};

inline std::vector<std::uint8_t> generate(std::uint64_t seed) { return Generator(seed).program(); }

}  // namespace randprog
