#include "strv/kernel.hpp"

#include <bit>
#include <cmath>
#include <cstring>

namespace strv {

const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Halted: return "halted";
    case RunStatus::Fault: return "fault";
    case RunStatus::Timeout: return "timeout";
    case RunStatus::CycleLimit: return "cycle_limit";
  }
  return "unknown";
}

void SystemConfig::validate() const {
  if (!(clock_mhz > 0) || !std::isfinite(clock_mhz)) throw ConfigError("clock frequency must be > 0 MHz");
  if (scrub_divider < 1) throw ConfigError("scrub_divider must be at least 1");
  if (sram_rows < 1 || sram_rows > memmap::kSramRows)
    throw ConfigError("sram_rows must be in [1, " + std::to_string(memmap::kSramRows) + "]");
  if (timing.mul_extra_cycles > 200 || timing.div_extra_cycles > 200)
    throw ConfigError("multi-cycle execute latency must be at most 200");
}

/// Routes core accesses through the memory bridge to SRAM or peripherals.
class CoreBus : public Bus {
 public:
  explicit CoreBus(System& s) : s_(s) {}

  std::uint32_t read_word(std::uint32_t address, AccessKind kind) override {
    if (address < s_.sram_.bytes()) {
      const std::uint32_t row = address / 4;
      const SramRead r = s_.sram_.core_read(row);
      if (r.discrepancy)
        s_.events_.push_back({s_.cycle_, EventKind::SramCoreDiscrepancy, Domain::Sram, row, r.newly_counted});
      return r.value;
    }
    if (kind != AccessKind::InstrFetch && Peripherals::maps(address))
      return s_.peripherals_.core_read(s_.bank_, address);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s of unmapped address 0x%08x",
                  kind == AccessKind::InstrFetch ? "instruction fetch" : "load", address);
    throw SimFault(FaultKind::BusFault, address, buf);
  }

  void write_word(std::uint32_t address, std::uint32_t data, std::uint8_t byte_enables) override {
    if (address < s_.sram_.bytes()) {
      s_.sram_.core_write(address / 4, data, byte_enables);
      s_.core_write_ = CoreRowWrite{address / 4, byte_enables};
      return;
    }
    if (Peripherals::maps(address)) {
      s_.peripherals_.core_write(s_.bank_, address, data, byte_enables);
      return;
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "store to unmapped address 0x%08x", address);
    throw SimFault(FaultKind::BusFault, address, buf);
  }

 private:
  System& s_;
};

System::System(SystemConfig config)
    : config_((config.validate(), config)),
      sram_(config.sram_rows),
      pipeline_(bank_, 0),
      peripherals_(bank_),
      scrubber_(bank_, config.sram_rows, config.scrub_enabled, config.scrub_divider) {
  counter_mask_.assign(bank_.size(), false);
  for (std::size_t d = 0; d < kDomainCount; ++d)
    counter_mask_[peripherals_.counter_cell(static_cast<Domain>(d)).index] = true;
}

void System::load_bytes(std::span<const std::uint8_t> bytes, std::uint32_t base) {
  LoadedImage img;
  img.entry = base;
  img.segments.push_back({base, std::vector<std::uint8_t>(bytes.begin(), bytes.end())});
  load_image(img);
}

void System::load_image(const LoadedImage& image) {
  for (const ImageSegment& seg : image.segments) sram_.load(seg.bytes, seg.address);
  if (image.entry & 1u) throw ConfigError("entry point must be halfword aligned");
  if (image.entry >= sram_.bytes()) throw ConfigError("entry point lies outside SRAM");
  bank_.cell(pipeline_.pc) = tmr_write(bank_.cell(pipeline_.pc), image.entry);
}

void System::step() {
  events_.clear();
  core_write_.reset();
  peripherals_.begin_cycle(cycle_);

  discrepancies_.clear();
  bank_.vote_all(discrepancies_);
  for (const CellDiscrepancy& d : discrepancies_)
    events_.push_back({cycle_, EventKind::CellDiscrepancy, d.domain, d.cell.index, true});

  CoreBus bus(*this);
  const CycleActivity act = pipeline_.advance(bank_, bus, config_.timing, stats_);
  if (config_.trace_retirements && act.retired_pc)
    events_.push_back({cycle_, EventKind::Retire, Domain::Core, *act.retired_pc, false});

  peripherals_.tick(bank_);

  if (auto ev = scrubber_.step(bank_, sram_, core_write_)) {
    ev->cycle = cycle_;
    events_.push_back(*ev);
  }

  peripherals_.add_to_counters(bank_, aggregate_discrepancies(events_));

  edge_cells_.clear();
  for (const EdgeUpset& u : pending_edge_) edge_cells_.push_back(u.cell);
  bank_.clock_edge(pending_edge_, &edge_changed_);
  pending_edge_.clear();
  ++cycle_;
  if (sink_) sink_->insert(sink_->end(), events_.begin(), events_.end());
  // The cycle completes (older instructions retire) before the fault stops the run.
  if (act.fault) throw *act.fault;
}

RunResult System::run(std::uint64_t max_cycles, bool limit_is_timeout) {
  RunResult r;
  try {
    while (!done()) {
      if (cycle_ >= max_cycles) {
        r.status = limit_is_timeout ? RunStatus::Timeout : RunStatus::CycleLimit;
        if (limit_is_timeout) {
          r.fault = FaultKind::Timeout;
          r.message = "cycle limit of " + std::to_string(max_cycles) + " reached before the program halted";
        }
        break;
      }
      step();
    }
  } catch (const SimFault& f) {
    r.status = RunStatus::Fault;
    r.fault = f.kind();
    r.fault_address = f.address();
    r.message = f.what();
  }
  r.cycles = cycle_;
  r.retired = stats_.retired;
  return r;
}

void System::flip_cell(CellRef cell, unsigned replica, unsigned bit) {
  if (cell.index >= bank_.size()) throw ContractViolation("cell index out of range");
  bank_.cell(cell) = inject_bit_flip(bank_.cell(cell), replica, bit);
}

void System::queue_edge_upset(CellRef cell, unsigned replica, unsigned bit) {
  if (cell.index >= bank_.size()) throw ContractViolation("cell index out of range");
  if (replica > 2) throw ContractViolation("replica index must be 0, 1 or 2");
  if (bit >= bank_.cell(cell).width) throw ContractViolation("bit index beyond cell width");
  EdgeUpset u{cell, {}};
  u.masks[replica] = 1u << bit;
  pending_edge_.push_back(u);
}

void System::flip_sram(std::uint32_t row, unsigned replica, unsigned bit) { sram_.flip(replica, row, bit); }

std::vector<CellRef> System::last_edge_cells() const { return edge_cells_; }

std::array<std::uint32_t, kDomainCount> System::counters() const {
  return {counter(Domain::Core), counter(Domain::Sram), counter(Domain::Peripherals)};
}

ArchView System::architecture() const {
  ArchView v;
  v.pc = pipeline_.pc_value(bank_);
  for (unsigned i = 1; i < 32; ++i) v.regs[i] = pipeline_.reg(bank_, i);
  v.halted = pipeline_.halted(bank_);
  return v;
}

bool System::equivalent_state(const System& other) const {
  if (cycle_ != other.cycle_ || bank_.size() != other.bank_.size()) return false;
  if (!bank_.same_replicas(other.bank_, &counter_mask_)) return false;
  if (!peripherals_.same_host_state(other.peripherals_)) return false;
  return sram_ == other.sram_;
}

bool System::same_outcome(const System& other) const {
  if (architecture() != other.architecture()) return false;
  if (sram_.rows() != other.sram_.rows()) return false;
  for (std::uint32_t r = 0; r < sram_.rows(); ++r)
    if (sram_.voted(r).value != other.sram_.voted(r).value) return false;
  if (peripherals_.tx_output() != other.peripherals_.tx_output()) return false;
  const Peripherals& p = peripherals_;
  const Peripherals& q = other.peripherals_;
  return bank_.read(p.gpio_dir) == other.bank_.read(q.gpio_dir) &&
         bank_.read(p.gpio_out) == other.bank_.read(q.gpio_out);
}

// Snapshot byte layout (all integers little-endian):
//   "STRVSNAP" u32 version
//   config: f64 clock_mhz, u8 scrub_enabled, u32 scrub_divider, u32 sram_rows,
//           u32 mul_extra, u32 div_extra, u8 trace_retirements
//   u64 cycle
//   u32 cell_count, then per cell three u32 replicas
//   SRAM: 3 * rows u32 (replica-major), rows u8 episode flags
//   host: u32 pads, u32 n + n bytes RX queue, u32 n + n bytes TX output,
//         u64 stimulus cursor, u8 counters_read
//   stats: u64 retired, dmem, branch_bubbles, straddle, exec_wait, idle
namespace {

constexpr char kMagic[8] = {'S', 'T', 'R', 'V', 'S', 'N', 'A', 'P'};
constexpr std::uint32_t kSnapshotVersion = 1;

struct Writer {
  std::vector<std::uint8_t> out;
  void u8(std::uint8_t v) { out.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
};

struct Reader {
  std::span<const std::uint8_t> in;
  std::size_t pos = 0;
  void need(std::size_t n) {
    if (in.size() - pos < n) throw ConfigError("snapshot truncated");
  }
  std::uint8_t u8() {
    need(1);
    return in[pos++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[pos++]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(in[pos++]) << (8 * i);
    return v;
  }
};

}  // namespace

std::vector<std::uint8_t> System::snapshot() const {
  if (!pending_edge_.empty()) throw ContractViolation("snapshot with pending edge upsets");
  Writer w;
  w.out.insert(w.out.end(), std::begin(kMagic), std::end(kMagic));
  w.u32(kSnapshotVersion);
  w.u64(std::bit_cast<std::uint64_t>(config_.clock_mhz));
  w.u8(config_.scrub_enabled);
  w.u32(config_.scrub_divider);
  w.u32(config_.sram_rows);
  w.u32(config_.timing.mul_extra_cycles);
  w.u32(config_.timing.div_extra_cycles);
  w.u8(config_.trace_retirements);
  w.u64(cycle_);
  w.u32(static_cast<std::uint32_t>(bank_.size()));
  for (const TmrCell& c : bank_.cells())
    for (std::uint32_t r : c.replicas) w.u32(r);
  for (std::uint32_t v : sram_.raw()) w.u32(v);
  for (std::uint8_t f : sram_.counted_flags()) w.u8(f);
  const auto host = peripherals_.host_state();
  w.u32(host.pads);
  w.u32(static_cast<std::uint32_t>(host.rx_queue.size()));
  for (auto b : host.rx_queue) w.u8(b);
  w.u32(static_cast<std::uint32_t>(host.tx.size()));
  for (auto b : host.tx) w.u8(b);
  w.u64(host.stimulus_cursor);
  w.u8(host.counters_read);
  for (std::uint64_t v : {stats_.retired, stats_.dmem_cycles, stats_.branch_bubbles, stats_.straddle_cycles,
                          stats_.exec_wait_cycles, stats_.idle_cycles})
    w.u64(v);
  return std::move(w.out);
}

System System::restore(std::span<const std::uint8_t> bytes) {
  Reader r{bytes};
  r.need(sizeof kMagic);
  if (std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) throw ConfigError("not a snapshot (bad magic)");
  r.pos = sizeof kMagic;
  if (const auto v = r.u32(); v != kSnapshotVersion)
    throw ConfigError("unsupported snapshot version " + std::to_string(v));
  SystemConfig cfg;
  cfg.clock_mhz = std::bit_cast<double>(r.u64());
  cfg.scrub_enabled = r.u8() != 0;
  cfg.scrub_divider = r.u32();
  cfg.sram_rows = r.u32();
  cfg.timing.mul_extra_cycles = r.u32();
  cfg.timing.div_extra_cycles = r.u32();
  cfg.trace_retirements = r.u8() != 0;
  System s(cfg);
  s.cycle_ = r.u64();
  if (r.u32() != s.bank_.size()) throw ConfigError("snapshot cell count does not match this build");
  for (std::size_t i = 0; i < s.bank_.size(); ++i) {
    TmrCell& c = s.bank_.cell(CellRef{static_cast<std::uint32_t>(i)});
    for (auto& rep : c.replicas) {
      rep = r.u32();
      if (rep & ~c.mask()) throw ConfigError("snapshot replica exceeds cell width");
    }
  }
  for (auto& v : s.sram_.raw()) v = r.u32();
  for (auto& f : s.sram_.counted_flags()) f = r.u8();
  Peripherals::HostState host;
  host.pads = r.u32();
  for (std::uint32_t n = r.u32(); n > 0; --n) host.rx_queue.push_back(r.u8());
  for (std::uint32_t n = r.u32(); n > 0; --n) host.tx.push_back(r.u8());
  host.stimulus_cursor = r.u64();
  host.counters_read = r.u8() != 0;
  s.peripherals_.set_host_state(std::move(host));
  for (std::uint64_t* v : {&s.stats_.retired, &s.stats_.dmem_cycles, &s.stats_.branch_bubbles,
                           &s.stats_.straddle_cycles, &s.stats_.exec_wait_cycles, &s.stats_.idle_cycles})
    *v = r.u64();
  if (r.pos != bytes.size()) throw ConfigError("trailing bytes after snapshot");
  return s;
}

ProgramTiming cycles_for_program(const LoadedImage& image, std::uint64_t max_cycles, const SystemConfig& config) {
  System s(config);
  s.load_image(image);
  const RunResult r = s.run(max_cycles);
  if (r.status == RunStatus::Fault) throw SimFault(*r.fault, r.fault_address, r.message);
  if (r.status == RunStatus::Timeout) throw SimFault(FaultKind::Timeout, 0, r.message);
  return {r.retired, r.cycles, s.stats()};
}

FunctionalResult run_functional(const LoadedImage& image, std::uint64_t max_instructions, const SystemConfig& config) {
  config.validate();
  FunctionalResult res{isa::ArchState{}, SramArray(config.sram_rows), RunStatus::Halted, std::nullopt};
  for (const ImageSegment& seg : image.segments) res.sram.load(seg.bytes, seg.address);
  res.arch.pc = image.entry;
  SramBus bus(res.sram);
  try {
    while (!res.arch.halted) {
      if (res.arch.retired >= max_instructions) {
        res.status = RunStatus::Timeout;
        res.fault = FaultKind::Timeout;
        break;
      }
      isa::step_instruction(res.arch, bus, config.timing);
    }
  } catch (const SimFault& f) {
    res.status = RunStatus::Fault;
    res.fault = f.kind();
  }
  return res;
}

}  // namespace strv
