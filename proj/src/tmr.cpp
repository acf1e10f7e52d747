#include "strv/tmr.hpp"

#include <algorithm>

namespace strv {

const char* to_string(FaultKind kind) {
  switch (kind) {
    case FaultKind::IllegalInstruction: return "illegal_instruction";
    case FaultKind::AlignmentFault: return "alignment_fault";
    case FaultKind::BusFault: return "bus_fault";
    case FaultKind::Timeout: return "timeout";
  }
  return "unknown";
}

SimFault::SimFault(FaultKind kind, std::uint32_t address, const std::string& what)
    : std::runtime_error(what), kind_(kind), address_(address) {}

const char* to_string(Domain d) {
  switch (d) {
    case Domain::Core: return "core";
    case Domain::Sram: return "sram";
    case Domain::Peripherals: return "peripherals";
  }
  return "unknown";
}

Domain domain_from_string(std::string_view name) {
  if (name == "core") return Domain::Core;
  if (name == "sram") return Domain::Sram;
  if (name == "peripherals") return Domain::Peripherals;
  throw ConfigError("unknown domain '" + std::string(name) + "'");
}

TmrCell::TmrCell(unsigned w, std::uint32_t id, Domain d, std::uint32_t reset)
    : width(static_cast<std::uint8_t>(w)), element_id(id), domain(d) {
  if (w < 1 || w > 32) throw ContractViolation("TmrCell width must be in [1, 32]");
  if ((reset & ~mask()) != 0) throw ContractViolation("TmrCell reset value exceeds width");
  replicas = {reset, reset, reset};
}

TmrCell tmr_write(TmrCell cell, std::uint32_t value) {
  if ((value & ~cell.mask()) != 0) {
    throw ContractViolation("value " + std::to_string(value) + " does not fit in " +
                            std::to_string(cell.width) + " bits");
  }
  cell.replicas = {value, value, value};
  return cell;
}

std::pair<TmrCell, bool> feedback_refresh(TmrCell cell) {
  const VoteResult v = cell.vote();
  cell.replicas = {v.value, v.value, v.value};
  return {cell, v.discrepancy};
}

TmrCell inject_bit_flip(TmrCell cell, unsigned replica, unsigned bit) {
  if (replica > 2) throw ContractViolation("replica index must be 0, 1 or 2");
  if (bit >= cell.width) throw ContractViolation("bit index beyond cell width");
  cell.replicas[replica] ^= 1u << bit;
  return cell;
}

CellRef CellBank::add(std::string name, Domain domain, unsigned width, std::uint32_t reset) {
  if (contains(name)) throw ContractViolation("duplicate cell name " + name);
  const auto id = static_cast<std::uint32_t>(cells_.size());
  cells_.emplace_back(width, id, domain, reset);
  if (names_.use_count() > 1) names_ = std::make_shared<std::vector<std::string>>(*names_);
  names_->push_back(std::move(name));
  next_.push_back(0);
  staged_.push_back(0);
  return CellRef{id};
}

void CellBank::write(CellRef ref, std::uint32_t value) {
  const TmrCell& c = cells_[ref.index];
  if ((value & ~c.mask()) != 0) {
    throw ContractViolation("write of " + std::to_string(value) + " overflows cell " + (*names_)[ref.index]);
  }
  next_[ref.index] = value;
  staged_[ref.index] = 1;
}

void CellBank::vote_all(std::vector<CellDiscrepancy>& out) const {
  for (std::uint32_t i = 0; i < cells_.size(); ++i) {
    if (!cells_[i].consistent()) out.push_back({CellRef{i}, cells_[i].domain});
  }
}

void CellBank::clock_edge(const std::vector<EdgeUpset>& upsets, std::vector<bool>* vote_changed) {
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    TmrCell& c = cells_[i];
    const std::uint32_t v = staged_[i] ? next_[i] : c.value();
    c.replicas = {v, v, v};
    staged_[i] = 0;
  }
  if (vote_changed) vote_changed->assign(upsets.size(), false);
  for (std::size_t k = 0; k < upsets.size(); ++k) {
    TmrCell& c = cells_[upsets[k].cell.index];
    const std::uint32_t before = c.value();
    for (int r = 0; r < 3; ++r) c.replicas[r] ^= upsets[k].masks[r] & c.mask();
    if (vote_changed) (*vote_changed)[k] = c.value() != before;
  }
}

CellRef CellBank::find(std::string_view name) const {
  auto it = std::find(names_->begin(), names_->end(), name);
  if (it == names_->end()) throw ConfigError("no sequential element named '" + std::string(name) + "'");
  return CellRef{static_cast<std::uint32_t>(it - names_->begin())};
}

bool CellBank::contains(std::string_view name) const {
  return std::find(names_->begin(), names_->end(), name) != names_->end();
}

bool CellBank::same_replicas(const CellBank& other, const std::vector<bool>* ignore) const {
  if (cells_.size() != other.cells_.size()) return false;
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    if (ignore && (*ignore)[i]) continue;
    if (cells_[i].replicas != other.cells_[i].replicas) return false;
  }
  return true;
}

}  // namespace strv
