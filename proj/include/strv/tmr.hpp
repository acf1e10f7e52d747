#pragma once

#include <array>
#include <memory>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "strv/errors.hpp"

namespace strv {

/// Protection domains of the chip. The numeric value is also the index of the
/// domain's memory-mapped SEU counter.
enum class Domain : std::uint8_t { Core = 0, Sram = 1, Peripherals = 2 };

inline constexpr std::size_t kDomainCount = 3;

const char* to_string(Domain d);
Domain domain_from_string(std::string_view name);

struct VoteResult {
  std::uint32_t value = 0;
  bool discrepancy = false;

  bool operator==(const VoteResult&) const = default;
};

/// Bitwise 2-of-3 majority with a discrepancy output.
constexpr VoteResult majority_vote(std::uint32_t a, std::uint32_t b, std::uint32_t c) {
  return {(a & b) | (a & c) | (b & c), !(a == b && b == c)};
}

/// Three replicas of one sequential element (one instance group).
struct TmrCell {
  std::array<std::uint32_t, 3> replicas{};
  std::uint8_t width = 32;
  std::uint32_t element_id = 0;
  Domain domain = Domain::Core;

  TmrCell() = default;
  TmrCell(unsigned width, std::uint32_t element_id, Domain domain, std::uint32_t reset = 0);

  std::uint32_t mask() const { return width == 32 ? 0xFFFFFFFFu : ((1u << width) - 1u); }
  VoteResult vote() const { return majority_vote(replicas[0], replicas[1], replicas[2]); }
  std::uint32_t value() const { return vote().value; }
  bool consistent() const { return replicas[0] == replicas[1] && replicas[1] == replicas[2]; }

  bool operator==(const TmrCell&) const = default;
};

TmrCell tmr_write(TmrCell cell, std::uint32_t value);
std::pair<TmrCell, bool> feedback_refresh(TmrCell cell);
TmrCell inject_bit_flip(TmrCell cell, unsigned replica, unsigned bit);

/// Handle to a cell registered in a CellBank.
struct CellRef {
  std::uint32_t index = 0;
  bool operator==(const CellRef&) const = default;
};

struct CellDiscrepancy {
  CellRef cell;
  Domain domain;
};

/// Upset that lands on a replica while it captures at the clock edge.
struct EdgeUpset {
  CellRef cell;
  std::array<std::uint32_t, 3> masks{};
};

/// Every sequential element of the simulated system lives here. Logic reads
/// the voted value, stages next-state writes, and clock_edge() latches them;
/// cells without a staged write take the feedback path (voted value).
class CellBank {
 public:
  CellRef add(std::string name, Domain domain, unsigned width, std::uint32_t reset = 0);

  std::uint32_t read(CellRef ref) const { return cells_[ref.index].value(); }
  void write(CellRef ref, std::uint32_t value);
  bool staged(CellRef ref) const { return staged_[ref.index] != 0; }

  /// Appends one entry per discrepant voter.
  void vote_all(std::vector<CellDiscrepancy>& out) const;

  /// Latches staged writes, refreshes the rest from their voters, then
  /// applies edge-aligned upsets. For each upset, `vote_changed` receives
  /// whether the upset altered the voted value (a defeated instance group).
  void clock_edge(const std::vector<EdgeUpset>& upsets, std::vector<bool>* vote_changed = nullptr);

  std::size_t size() const { return cells_.size(); }
  const TmrCell& cell(CellRef ref) const { return cells_[ref.index]; }
  TmrCell& cell(CellRef ref) { return cells_[ref.index]; }
  const std::vector<TmrCell>& cells() const { return cells_; }
  const std::string& name(CellRef ref) const { return (*names_)[ref.index]; }
  /// Throws ConfigError when no cell has this name.
  CellRef find(std::string_view name) const;
  bool contains(std::string_view name) const;

  bool same_replicas(const CellBank& other, const std::vector<bool>* ignore = nullptr) const;

 private:
  std::vector<TmrCell> cells_;
  // Names never change after construction; copies of a bank share them.
  std::shared_ptr<std::vector<std::string>> names_ = std::make_shared<std::vector<std::string>>();
  std::vector<std::uint32_t> next_;
  std::vector<std::uint8_t> staged_;
};

}  // namespace strv
