#include "strv/memory.hpp"

#include <algorithm>
#include <cstdio>

namespace strv {

std::uint8_t MemRequest::byte_enables() const {
  const unsigned lane = address & 3u;
  const std::uint8_t base = width == 1 ? 0x1 : width == 2 ? 0x3 : 0xF;
  return static_cast<std::uint8_t>(base << lane);
}

std::uint32_t MemRequest::lane_data() const {
  const unsigned shift = (address & 3u) * 8;
  const std::uint32_t m = width == 4 ? 0xFFFFFFFFu : ((1u << (width * 8)) - 1u);
  return (data & m) << shift;
}

std::uint32_t extract_load(const MemRequest& req, std::uint32_t word) {
  const std::uint32_t v = word >> ((req.address & 3u) * 8);
  switch (req.width) {
    case 1: return req.sign_extend ? static_cast<std::uint32_t>(static_cast<std::int8_t>(v)) : (v & 0xFFu);
    case 2: return req.sign_extend ? static_cast<std::uint32_t>(static_cast<std::int16_t>(v)) : (v & 0xFFFFu);
    default: return v;
  }
}

std::uint32_t perform_load(Bus& bus, const MemRequest& req) {
  return extract_load(req, bus.read_word(req.word_address(), AccessKind::Load));
}

void perform_store(Bus& bus, const MemRequest& req) {
  bus.write_word(req.word_address(), req.lane_data(), req.byte_enables());
}

namespace {
std::uint32_t expand_enables(std::uint8_t be) {
  std::uint32_t m = 0;
  for (unsigned i = 0; i < 4; ++i)
    if (be & (1u << i)) m |= 0xFFu << (8 * i);
  return m;
}
}  // namespace

SramArray::SramArray(std::uint32_t rows) : rows_(rows), data_(static_cast<std::size_t>(rows) * 3, 0), counted_(rows, 0) {
  if (rows == 0) throw ContractViolation("SRAM needs at least one row");
}

void SramArray::check_row(std::uint32_t row) const {
  if (row >= rows_) {
    throw ContractViolation("SRAM row " + std::to_string(row) + " out of range [0, " + std::to_string(rows_) + ")");
  }
}

VoteResult SramArray::voted(std::uint32_t row) const {
  check_row(row);
  return majority_vote(bank(0)[row], bank(1)[row], bank(2)[row]);
}

bool SramArray::consistent(std::uint32_t row) const {
  check_row(row);
  return bank(0)[row] == bank(1)[row] && bank(1)[row] == bank(2)[row];
}

SramRead SramArray::core_read(std::uint32_t row) {
  const VoteResult v = voted(row);
  SramRead r{v.value, v.discrepancy, false};
  if (v.discrepancy) r.newly_counted = note_detection(row);
  return r;
}

void SramArray::core_write(std::uint32_t row, std::uint32_t data, std::uint8_t byte_enables) {
  check_row(row);
  const std::uint32_t m = expand_enables(byte_enables);
  for (unsigned r = 0; r < 3; ++r) bank(r)[row] = (bank(r)[row] & ~m) | (data & m);
  // A partial write can leave an upset in the other bytes; the episode only
  // ends once the row is clean.
  if (consistent(row)) counted_[row] = 0;
}

std::array<std::uint32_t, 3> SramArray::scrub_port_read(std::uint32_t row) const {
  check_row(row);
  return {bank(0)[row], bank(1)[row], bank(2)[row]};
}

void SramArray::scrub_port_write(std::uint32_t row, std::uint32_t voted_word) {
  check_row(row);
  for (unsigned r = 0; r < 3; ++r) bank(r)[row] = voted_word;
  counted_[row] = 0;
}

bool SramArray::note_detection(std::uint32_t row) {
  check_row(row);
  if (counted_[row]) return false;
  counted_[row] = 1;
  return true;
}

void SramArray::flip(unsigned replica, std::uint32_t row, unsigned bit) {
  check_row(row);
  if (replica > 2) throw ContractViolation("replica index must be 0, 1 or 2");
  if (bit > 31) throw ContractViolation("bit index beyond 32-bit row");
  bank(replica)[row] ^= 1u << bit;
}

void SramArray::xor_replicas(std::uint32_t row, const std::array<std::uint32_t, 3>& masks) {
  check_row(row);
  for (unsigned r = 0; r < 3; ++r) bank(r)[row] ^= masks[r];
}

void SramArray::load(std::span<const std::uint8_t> image, std::uint32_t base) {
  if (base > bytes() || image.size() > bytes() - base) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "image of %zu bytes at 0x%x does not fit in %u bytes of SRAM", image.size(), base,
                  bytes());
    throw ConfigError(buf);
  }
  for (std::size_t i = 0; i < image.size(); ++i) {
    const std::uint32_t addr = base + static_cast<std::uint32_t>(i);
    const std::uint32_t row = addr / 4;
    const unsigned shift = (addr % 4) * 8;
    for (unsigned r = 0; r < 3; ++r) {
      bank(r)[row] = (bank(r)[row] & ~(0xFFu << shift)) | (static_cast<std::uint32_t>(image[i]) << shift);
    }
  }
}

void SramArray::clear() {
  std::fill(data_.begin(), data_.end(), 0);
  std::fill(counted_.begin(), counted_.end(), 0);
}

std::uint32_t SramBus::read_word(std::uint32_t address, AccessKind kind) {
  if (address >= sram_.bytes()) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s of unmapped address 0x%08x", kind == AccessKind::InstrFetch ? "fetch" : "load",
                  address);
    throw SimFault(FaultKind::BusFault, address, buf);
  }
  return sram_.core_read(address / 4).value;
}

void SramBus::write_word(std::uint32_t address, std::uint32_t data, std::uint8_t byte_enables) {
  if (address >= sram_.bytes()) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "store to unmapped address 0x%08x", address);
    throw SimFault(FaultKind::BusFault, address, buf);
  }
  sram_.core_write(address / 4, data, byte_enables);
}

}  // namespace strv
