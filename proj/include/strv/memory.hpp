#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "strv/tmr.hpp"

namespace strv {

// Global memory map. SRAM sits at address 0 so the reset pc points into it.
namespace memmap {
inline constexpr std::uint32_t kSramBase = 0x0000'0000;
inline constexpr std::uint32_t kSramRows = 8192;  // 32 kB of 32-bit rows
inline constexpr std::uint32_t kSramBytes = kSramRows * 4;

inline constexpr std::uint32_t kGpioBase = 0x1000'0000;
inline constexpr std::uint32_t kGpioDir = kGpioBase + 0x0;
inline constexpr std::uint32_t kGpioOut = kGpioBase + 0x4;
inline constexpr std::uint32_t kGpioIn = kGpioBase + 0x8;
inline constexpr std::uint32_t kGpioPinBase = kGpioBase + 0x100;  // one word per pin
inline constexpr std::uint32_t kGpioPins = 27;

inline constexpr std::uint32_t kUartBase = 0x1000'1000;
inline constexpr std::uint32_t kUartTx = kUartBase + 0x0;
inline constexpr std::uint32_t kUartRx = kUartBase + 0x4;
inline constexpr std::uint32_t kUartStatus = kUartBase + 0x8;

inline constexpr std::uint32_t kSeuCounterBase = 0x1000'2000;  // core, sram, peripherals
}  // namespace memmap

enum class AccessKind : std::uint8_t { InstrFetch, Load, Store };

struct MemRequest {
  AccessKind kind = AccessKind::Load;
  std::uint32_t address = 0;
  std::uint8_t width = 4;  // bytes: 1, 2 or 4
  bool sign_extend = false;
  std::uint32_t data = 0;  // stores: value in the low `width` bytes

  std::uint32_t word_address() const { return address & ~3u; }
  std::uint8_t byte_enables() const;
  std::uint32_t lane_data() const;  // store data shifted into its byte lanes
};

/// Extracts and extends a load result from the aligned word that holds it.
std::uint32_t extract_load(const MemRequest& req, std::uint32_t word);

/// Word-granular core-side bus. Addresses are word aligned.
class Bus {
 public:
  virtual ~Bus() = default;
  virtual std::uint32_t read_word(std::uint32_t address, AccessKind kind) = 0;
  virtual void write_word(std::uint32_t address, std::uint32_t data, std::uint8_t byte_enables) = 0;
};

std::uint32_t perform_load(Bus& bus, const MemRequest& req);
void perform_store(Bus& bus, const MemRequest& req);

struct SramRead {
  std::uint32_t value = 0;
  bool discrepancy = false;
  bool newly_counted = false;  // first detection of this row's current upset episode
};

/// Triplicated dual-port SRAM. Port A is the core side (voted), port B the
/// scrubber (raw replicas). A per-row flag records whether the current upset
/// episode of the row has already been counted; the episode ends when a write
/// leaves the row's replicas equal.
class SramArray {
 public:
  explicit SramArray(std::uint32_t rows = memmap::kSramRows);

  std::uint32_t rows() const { return rows_; }
  std::uint32_t bytes() const { return rows_ * 4; }

  SramRead core_read(std::uint32_t row);
  void core_write(std::uint32_t row, std::uint32_t data, std::uint8_t byte_enables);

  std::array<std::uint32_t, 3> scrub_port_read(std::uint32_t row) const;
  void scrub_port_write(std::uint32_t row, std::uint32_t voted_word);

  /// Marks the row's upset as detected; returns true if this is the first
  /// detection since the row was last written.
  bool note_detection(std::uint32_t row);

  VoteResult voted(std::uint32_t row) const;
  bool consistent(std::uint32_t row) const;
  std::uint32_t replica(unsigned r, std::uint32_t row) const { return bank(r)[row]; }
  void flip(unsigned replica, std::uint32_t row, unsigned bit);
  void xor_replicas(std::uint32_t row, const std::array<std::uint32_t, 3>& masks);

  /// Initializes all three replicas identically from little-endian bytes.
  void load(std::span<const std::uint8_t> bytes, std::uint32_t base);
  void clear();

  bool operator==(const SramArray&) const = default;
  const std::vector<std::uint32_t>& raw() const { return data_; }
  std::vector<std::uint32_t>& raw() { return data_; }
  const std::vector<std::uint8_t>& counted_flags() const { return counted_; }
  std::vector<std::uint8_t>& counted_flags() { return counted_; }

 private:
  void check_row(std::uint32_t row) const;
  const std::uint32_t* bank(unsigned r) const { return data_.data() + static_cast<std::size_t>(r) * rows_; }
  std::uint32_t* bank(unsigned r) { return data_.data() + static_cast<std::size_t>(r) * rows_; }

  std::uint32_t rows_;
  std::vector<std::uint32_t> data_;    // replica-major: [r * rows + row]
  std::vector<std::uint8_t> counted_;  // per row
};

/// SRAM-only bus, used by the functional interpreter and tests.
class SramBus : public Bus {
 public:
  explicit SramBus(SramArray& sram) : sram_(sram) {}
  std::uint32_t read_word(std::uint32_t address, AccessKind kind) override;
  void write_word(std::uint32_t address, std::uint32_t data, std::uint8_t byte_enables) override;

 private:
  SramArray& sram_;
};

}  // namespace strv
