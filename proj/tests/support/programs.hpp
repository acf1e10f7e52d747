#pragma once
// Canned bare-metal programs shared by the unit tests, the acceptance binary
// and the program generator.

#include <cstdint>
#include <string>
#include <vector>

#include "rvasm.hpp"

namespace progs {

using namespace rvasm;
using Bytes = std::vector<std::uint8_t>;

inline constexpr std::uint32_t kUartTx = 0x1000'1000;
inline constexpr std::uint32_t kGpioBase = 0x1000'0000;
inline constexpr std::uint32_t kCounters = 0x1000'2000;

/// x10 = n! computed with a MUL loop.
inline Bytes factorial(unsigned n) {
  Program p;
  p.w(addi(10, 0, 1));
  p.w(addi(11, 0, static_cast<std::int32_t>(n)));
  p.label("loop");
  p.wl("done", [](std::int32_t o) { return beq(11, 0, o); });
  p.w(mul(10, 10, 11));
  p.w(addi(11, 11, -1));
  p.wl("loop", [](std::int32_t o) { return jal(0, o); });
  p.label("done");
  p.w(ebreak());
  return p.finish();
}

/// `count` ADDIs into x1, then halt.
inline Bytes addi_chain(unsigned count) {
  Program p;
  for (unsigned i = 0; i < count; ++i) p.w(addi(1, 1, 1));
  p.w(ebreak());
  return p.finish();
}

/// Countdown loop of n iterations with an empty body.
inline Bytes empty_loop(unsigned n) {
  Program p;
  p.li(5, n);
  p.label("loop");
  p.w(addi(5, 5, -1));
  p.wl("loop", [](std::int32_t o) { return bne(5, 0, o); });
  p.w(ebreak());
  return p.finish();
}

/// Writes `text` to the UART and halts.
inline Bytes hello_uart(const std::string& text = "Hello, STRV!\n") {
  Program p;
  p.li(5, kUartTx);
  for (unsigned char ch : text) {
    p.w(addi(6, 0, ch));
    p.w(sw(6, 5, 0));
  }
  p.w(ebreak());
  return p.finish();
}

/// Echoes `n` UART bytes back to TX, polling the status register.
inline Bytes uart_echo(unsigned n) {
  Program p;
  p.li(5, 0x1000'1000);
  p.w(addi(7, 0, static_cast<std::int32_t>(n)));
  p.label("wait");
  p.w(lw(6, 5, 8));
  p.w(andi(6, 6, 2));
  p.wl("wait", [](std::int32_t o) { return beq(6, 0, o); });
  p.w(lw(6, 5, 4));
  p.w(sw(6, 5, 0));
  p.w(addi(7, 7, -1));
  p.wl("wait", [](std::int32_t o) { return bne(7, 0, o); });
  p.w(ebreak());
  return p.finish();
}

/// The fault-campaign workload: 50 instructions mixing ALU, M-extension,
/// compressed forms, loads/stores, a loop, GPIO and UART output.
inline Bytes campaign_program() {
  Program p;
  p.li(8, 0x200);                        // 1: data pointer (x8)
  p.w(addi(9, 0, 5));                    // 2
  p.w(addi(10, 0, 7));                   // 3
  p.w(mul(11, 9, 10));                   // 4: 35
  p.w(sw(11, 8, 0));                     // 5
  p.h(c_li(12, -3));                     // 6
  p.h(c_add(12, 11));                    // 7: 32
  p.w(sw(12, 8, 4));                     // 8
  p.w(div(13, 11, 9));                   // 9: 7
  p.w(rem(14, 11, 12));                  // 10: 3
  p.h(c_lw(15, 8, 0));                   // 11: 35
  p.w(xor_(16, 15, 13));                 // 12
  p.w(slli(17, 16, 3));                  // 13
  p.w(srai(18, 17, 1));                  // 14
  p.h(c_mv(19, 18));                     // 15
  p.w(addi(20, 0, 4));                   // 16: loop counter
  p.label("loop");
  p.w(add(19, 19, 20));                  // 17
  p.w(sh(19, 8, 8));                     // 18
  p.w(lhu(21, 8, 8));                    // 19
  p.w(sltu(22, 21, 19));                 // 20
  p.w(addi(20, 20, -1));                 // 21
  p.wl("loop", [](std::int32_t o) { return bne(20, 0, o); });  // 22
  p.w(mulhu(23, 19, 11));                // 23
  p.w(lui(24, 0x12345));                 // 24
  p.w(ori(24, 24, 0x678));               // 25
  p.w(sb(24, 8, 12));                    // 26
  p.w(lb(25, 8, 12));                    // 27
  p.w(auipc(26, 0));                     // 28
  p.li(27, kGpioBase);                   // 29
  p.w(addi(28, 0, 0x0F));                // 30
  p.w(sw(28, 27, 0));                    // 31: DIR = pins 0..3 out
  p.w(sw(13, 27, 4));                    // 32: OUT = 7
  p.w(lw(29, 27, 0x104));                // 33: pin 1 level
  p.li(30, kUartTx);                     // 34
  p.w(addi(31, 0, 'O'));                 // 35
  p.w(sw(31, 30, 0));                    // 36
  p.w(addi(31, 0, 'K'));                 // 37
  p.w(sw(31, 30, 0));                    // 38
  p.wl("sub", [](std::int32_t o) { return jal(1, o); });  // 39
  p.w(sw(10, 8, 16));                    // 40
  p.h(c_sw(9, 8, 20));                   // 41
  p.w(lw(7, 8, 16));                     // 42
  p.w(divu(6, 7, 9));                    // 43
  p.w(sub(5, 6, 13));                    // 44
  p.w(and_(4, 5, 11));                   // 45
  p.w(ebreak());                         // 46
  p.label("sub");
  p.w(slt(3, 9, 10));                    // 47
  p.h(c_addi(10, 3));                    // 48
  p.h(c_srli(10, 1));                    // 49
  p.h(c_jr(1));                          // 50
  return p.finish();
}

/// Never halts: sweeps loads and read-modify-write stores over `words`
/// words starting at `data`, mirroring a running sum into x10.
inline Bytes sram_worker(std::uint32_t data = 0x400, unsigned words = 64) {
  Program p;
  p.label("outer");
  p.li(8, data);
  p.w(addi(9, 0, static_cast<std::int32_t>(words)));
  p.label("inner");
  p.w(lw(11, 8, 0));
  p.w(add(10, 10, 11));
  p.w(addi(11, 11, 1));
  p.w(sw(11, 8, 0));
  p.w(addi(8, 8, 4));
  p.w(addi(9, 9, -1));
  p.wl("inner", [](std::int32_t o) { return bne(9, 0, o); });
  p.wl("outer", [](std::int32_t o) { return jal(0, o); });
  return p.finish();
}

/// ALU-only loop that never halts.
inline Bytes alu_forever() {
  Program p;
  p.w(addi(5, 0, 1));
  p.label("loop");
  p.w(add(6, 6, 5));
  p.w(xor_(7, 7, 6));
  p.w(slli(8, 6, 1));
  p.w(mul(9, 8, 7));
  p.wl("loop", [](std::int32_t o) { return jal(0, o); });
  return p.finish();
}

/// Reads the three SEU counters and prints them as raw little-endian words on
/// the UART.
inline Bytes counter_dump() {
  Program p;
  p.li(5, kCounters);
  p.li(6, kUartTx);
  for (int d = 0; d < 3; ++d) {
    p.w(lw(7, 5, 4 * d));
    for (int b = 0; b < 4; ++b) {
      p.w(sw(7, 6, 0));
      p.w(srli(7, 7, 8));
    }
  }
  p.w(ebreak());
  return p.finish();
}

}  // namespace progs
