#pragma once

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "strv/events.hpp"
#include "strv/tmr.hpp"

namespace strv {

/// Host-side stimulus, applied at the start of the stamped cycle.
struct StimulusEvent {
  enum class Kind : std::uint8_t { UartRx, GpioIn };
  std::uint64_t cycle = 0;
  Kind kind = Kind::UartRx;
  std::uint32_t arg0 = 0;  // byte, or pin index
  std::uint32_t arg1 = 0;  // pin level

  bool operator==(const StimulusEvent&) const = default;
};

/// Parses the line-oriented stimulus format:
///   <cycle> uart_rx <byte>
///   <cycle> gpio <pin> <0|1>
/// '#' starts a comment. Events must be in non-decreasing cycle order.
std::vector<StimulusEvent> parse_stimulus(std::istream& in);

/// Per-domain count of counter-feeding events (the or-gate aggregation).
DomainCounts aggregate_discrepancies(std::span<const Event> events);

std::uint32_t saturating_add(std::uint32_t counter, std::uint64_t increment);

/// Peripheral domain: 27 GPIOs, a byte-level UART, and the three SEU counters.
/// Every register is a TmrCell; the host side (pads, RX queue, TX sink) is not.
class Peripherals {
 public:
  explicit Peripherals(CellBank& bank);

  static bool maps(std::uint32_t address);
  static bool is_counter(std::uint32_t address);

  std::uint32_t core_read(CellBank& bank, std::uint32_t address);
  void core_write(CellBank& bank, std::uint32_t address, std::uint32_t data, std::uint8_t byte_enables);

  /// Applies host stimulus stamped for `cycle`. Runs first in a cycle.
  void begin_cycle(std::uint64_t cycle);
  /// Stages the input synchronizer and the UART RX holding register for the
  /// coming edge. Runs after the core's access.
  void tick(CellBank& bank);

  void add_to_counters(CellBank& bank, const DomainCounts& increments);
  std::uint32_t counter(const CellBank& bank, Domain d) const { return bank.read(counters_[static_cast<int>(d)]); }
  CellRef counter_cell(Domain d) const { return counters_[static_cast<int>(d)]; }

  // Host side.
  void set_stimulus(std::shared_ptr<const std::vector<StimulusEvent>> events);
  void push_rx(std::uint8_t byte) { rx_queue_.push_back(byte); }
  void set_pad(unsigned pin, bool level);
  std::uint32_t pads() const { return pads_; }
  std::uint32_t pin_level(const CellBank& bank, unsigned pin) const;
  const std::vector<std::uint8_t>& tx_output() const { return tx_; }
  std::size_t rx_pending() const { return rx_queue_.size(); }
  bool counters_read() const { return counters_read_; }

  struct HostState {
    std::uint32_t pads = 0;
    std::deque<std::uint8_t> rx_queue;
    std::vector<std::uint8_t> tx;
    std::uint64_t stimulus_cursor = 0;
    bool counters_read = false;
    bool operator==(const HostState&) const = default;
  };
  HostState host_state() const { return {pads_, rx_queue_, tx_, stim_cursor_, counters_read_}; }
  void set_host_state(HostState s);

  bool same_host_state(const Peripherals& other) const;

  CellRef gpio_dir, gpio_out, gpio_in, rx_data, rx_valid, tx_data;

 private:
  CellRef counters_[kDomainCount];
  std::uint32_t pads_ = 0;
  std::deque<std::uint8_t> rx_queue_;
  std::vector<std::uint8_t> tx_;
  std::shared_ptr<const std::vector<StimulusEvent>> stimulus_;
  std::uint64_t stim_cursor_ = 0;
  bool counters_read_ = false;
  bool rx_consumed_ = false;  // the core popped the RX register this cycle
};

}  // namespace strv
