#include "strv/peripherals.hpp"

#include <cstdio>
#include <istream>
#include <limits>
#include <sstream>
#include <string>

#include "strv/memory.hpp"

namespace strv {

const char* to_string(EventKind kind) {
  switch (kind) {
    case EventKind::CellDiscrepancy: return "cell_discrepancy";
    case EventKind::SramCoreDiscrepancy: return "sram_core_discrepancy";
    case EventKind::SramScrubDiscrepancy: return "sram_scrub_discrepancy";
    case EventKind::ScrubWriteBack: return "scrub_write_back";
    case EventKind::ScrubSkip: return "scrub_skip";
    case EventKind::Retire: return "retire";
  }
  return "unknown";
}

namespace {

constexpr std::uint32_t kPinMask = (1u << memmap::kGpioPins) - 1u;
constexpr std::uint32_t kRxEmpty = 0x8000'0000u;

[[noreturn]] void bus_fault(std::uint32_t address, const char* what) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%s at 0x%08x", what, address);
  throw SimFault(FaultKind::BusFault, address, buf);
}

std::uint32_t expand(std::uint8_t be) {
  std::uint32_t m = 0;
  for (unsigned i = 0; i < 4; ++i)
    if (be & (1u << i)) m |= 0xFFu << (8 * i);
  return m;
}

bool pin_window(std::uint32_t address, unsigned& pin) {
  if (address < memmap::kGpioPinBase || address >= memmap::kGpioPinBase + 0x100) return false;
  pin = (address - memmap::kGpioPinBase) / 4;
  return true;
}

}  // namespace

std::vector<StimulusEvent> parse_stimulus(std::istream& in) {
  std::vector<StimulusEvent> out;
  std::string line;
  unsigned lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::uint64_t cycle;
    std::string kind;
    if (!(ls >> cycle)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      throw ConfigError("stimulus line " + std::to_string(lineno) + ": expected a cycle number");
    }
    if (!(ls >> kind)) throw ConfigError("stimulus line " + std::to_string(lineno) + ": missing event kind");
    StimulusEvent ev;
    ev.cycle = cycle;
    long long a = -1, b = -1;
    if (kind == "uart_rx") {
      ev.kind = StimulusEvent::Kind::UartRx;
      if (!(ls >> a) || a < 0 || a > 255)
        throw ConfigError("stimulus line " + std::to_string(lineno) + ": uart_rx needs a byte 0..255");
      ev.arg0 = static_cast<std::uint32_t>(a);
    } else if (kind == "gpio") {
      ev.kind = StimulusEvent::Kind::GpioIn;
      if (!(ls >> a >> b) || a < 0 || a >= static_cast<long long>(memmap::kGpioPins) || (b != 0 && b != 1))
        throw ConfigError("stimulus line " + std::to_string(lineno) + ": gpio needs a pin 0..26 and a level 0|1");
      ev.arg0 = static_cast<std::uint32_t>(a);
      ev.arg1 = static_cast<std::uint32_t>(b);
    } else {
      throw ConfigError("stimulus line " + std::to_string(lineno) + ": unknown event kind '" + kind + "'");
    }
    std::string extra;
    if (ls >> extra) throw ConfigError("stimulus line " + std::to_string(lineno) + ": trailing text");
    if (!out.empty() && out.back().cycle > cycle)
      throw ConfigError("stimulus line " + std::to_string(lineno) + ": cycles must not decrease");
    out.push_back(ev);
  }
  return out;
}

DomainCounts aggregate_discrepancies(std::span<const Event> events) {
  DomainCounts counts{};
  for (const Event& e : events)
    if (e.counted) ++counts[static_cast<std::size_t>(e.domain)];
  return counts;
}

std::uint32_t saturating_add(std::uint32_t counter, std::uint64_t increment) {
  const std::uint64_t sum = static_cast<std::uint64_t>(counter) + increment;
  return sum > std::numeric_limits<std::uint32_t>::max() ? std::numeric_limits<std::uint32_t>::max()
                                                         : static_cast<std::uint32_t>(sum);
}

Peripherals::Peripherals(CellBank& bank) {
  gpio_dir = bank.add("gpio.dir", Domain::Peripherals, memmap::kGpioPins);
  gpio_out = bank.add("gpio.out", Domain::Peripherals, memmap::kGpioPins);
  gpio_in = bank.add("gpio.in", Domain::Peripherals, memmap::kGpioPins);
  rx_data = bank.add("uart.rx_data", Domain::Peripherals, 8);
  rx_valid = bank.add("uart.rx_valid", Domain::Peripherals, 1);
  tx_data = bank.add("uart.tx_data", Domain::Peripherals, 8);
  counters_[0] = bank.add("seu.counter.core", Domain::Peripherals, 32);
  counters_[1] = bank.add("seu.counter.sram", Domain::Peripherals, 32);
  counters_[2] = bank.add("seu.counter.peripherals", Domain::Peripherals, 32);
}

bool Peripherals::maps(std::uint32_t address) {
  return (address >= memmap::kGpioBase && address < memmap::kGpioBase + 0x1000) ||
         (address >= memmap::kUartBase && address < memmap::kUartBase + 0x1000) ||
         (address >= memmap::kSeuCounterBase && address < memmap::kSeuCounterBase + 0x1000);
}

bool Peripherals::is_counter(std::uint32_t address) {
  return address >= memmap::kSeuCounterBase && address < memmap::kSeuCounterBase + 4 * kDomainCount;
}

std::uint32_t Peripherals::core_read(CellBank& bank, std::uint32_t address) {
  unsigned pin;
  switch (address) {
    case memmap::kGpioDir: return bank.read(gpio_dir);
    case memmap::kGpioOut: return bank.read(gpio_out);
    case memmap::kGpioIn: return bank.read(gpio_in);
    case memmap::kUartTx: return bank.read(tx_data);
    case memmap::kUartRx:
      if (!bank.read(rx_valid)) return kRxEmpty;
      rx_consumed_ = true;
      return bank.read(rx_data);
    case memmap::kUartStatus: return 1u | (bank.read(rx_valid) << 1);
    default: break;
  }
  if (pin_window(address, pin)) {
    if (pin >= memmap::kGpioPins) bus_fault(address, "GPIO pin beyond 26");
    return pin_level(bank, pin);
  }
  if (is_counter(address)) {
    counters_read_ = true;
    return bank.read(counters_[(address - memmap::kSeuCounterBase) / 4]);
  }
  bus_fault(address, "read of unmapped peripheral register");
}

void Peripherals::core_write(CellBank& bank, std::uint32_t address, std::uint32_t data, std::uint8_t byte_enables) {
  const std::uint32_t m = expand(byte_enables);
  auto merge = [&](CellRef ref) { bank.write(ref, ((bank.read(ref) & ~m) | (data & m)) & kPinMask); };
  unsigned pin;
  switch (address) {
    case memmap::kGpioDir: merge(gpio_dir); return;
    case memmap::kGpioOut: merge(gpio_out); return;
    case memmap::kUartTx:
      if (byte_enables & 1u) {
        const auto byte = static_cast<std::uint8_t>(data & 0xFFu);
        bank.write(tx_data, byte);
        tx_.push_back(byte);
      }
      return;
    default: break;
  }
  if (pin_window(address, pin)) {
    if (pin >= memmap::kGpioPins) bus_fault(address, "GPIO pin beyond 26");
    if (byte_enables & 1u) {
      const std::uint32_t out = bank.read(gpio_out);
      bank.write(gpio_out, (data & 1u) ? (out | (1u << pin)) : (out & ~(1u << pin)));
    }
    return;
  }
  if (is_counter(address)) bus_fault(address, "write to read-only SEU counter");
  bus_fault(address, "write to unmapped or read-only peripheral register");
}

void Peripherals::begin_cycle(std::uint64_t cycle) {
  rx_consumed_ = false;
  if (!stimulus_) return;
  while (stim_cursor_ < stimulus_->size() && (*stimulus_)[stim_cursor_].cycle <= cycle) {
    const StimulusEvent& ev = (*stimulus_)[stim_cursor_++];
    if (ev.kind == StimulusEvent::Kind::UartRx)
      push_rx(static_cast<std::uint8_t>(ev.arg0));
    else
      set_pad(ev.arg0, ev.arg1 != 0);
  }
}

void Peripherals::tick(CellBank& bank) {
  bank.write(gpio_in, pads_ & kPinMask);
  const bool occupied = bank.read(rx_valid) && !rx_consumed_;
  if (!occupied) {
    if (!rx_queue_.empty()) {
      bank.write(rx_data, rx_queue_.front());
      bank.write(rx_valid, 1);
      rx_queue_.pop_front();
    } else if (rx_consumed_) {
      bank.write(rx_valid, 0);
    }
  }
  rx_consumed_ = false;
}

void Peripherals::add_to_counters(CellBank& bank, const DomainCounts& increments) {
  for (std::size_t d = 0; d < kDomainCount; ++d)
    if (increments[d]) bank.write(counters_[d], saturating_add(bank.read(counters_[d]), increments[d]));
}

void Peripherals::set_stimulus(std::shared_ptr<const std::vector<StimulusEvent>> events) {
  stimulus_ = std::move(events);
  stim_cursor_ = 0;
}

void Peripherals::set_pad(unsigned pin, bool level) {
  if (pin >= memmap::kGpioPins) throw ContractViolation("GPIO pin beyond 26");
  pads_ = level ? (pads_ | (1u << pin)) : (pads_ & ~(1u << pin));
}

std::uint32_t Peripherals::pin_level(const CellBank& bank, unsigned pin) const {
  if (pin >= memmap::kGpioPins) throw ContractViolation("GPIO pin beyond 26");
  const std::uint32_t dir = bank.read(gpio_dir);
  const std::uint32_t src = (dir >> pin) & 1u ? bank.read(gpio_out) : bank.read(gpio_in);
  return (src >> pin) & 1u;
}

void Peripherals::set_host_state(HostState s) {
  pads_ = s.pads;
  rx_queue_ = std::move(s.rx_queue);
  tx_ = std::move(s.tx);
  stim_cursor_ = s.stimulus_cursor;
  counters_read_ = s.counters_read;
}

bool Peripherals::same_host_state(const Peripherals& other) const {
  return pads_ == other.pads_ && rx_queue_ == other.rx_queue_ && tx_ == other.tx_ &&
         stim_cursor_ == other.stim_cursor_;
}

}  // namespace strv
