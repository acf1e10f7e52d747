#include "strv/seu.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <random>
#include <thread>

namespace strv::seu {

const char* to_string(Phase p) { return p == Phase::MidCycle ? "mid" : "edge"; }

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return splitmix64(splitmix64(splitmix64(seed) ^ a) ^ b);
}

// Uniform in [0, n). Modulo bias is irrelevant at these sizes and keeps the
// sequence identical across standard libraries.
std::uint64_t below(std::mt19937_64& rng, std::uint64_t n) { return rng() % n; }

double unit_open(std::mt19937_64& rng) { return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53; }

Phase pick_phase(PhaseChoice c, std::mt19937_64& rng) {
  switch (c) {
    case PhaseChoice::Mid: return Phase::MidCycle;
    case PhaseChoice::Edge: return Phase::EdgeAligned;
    case PhaseChoice::Any: return below(rng, 2) ? Phase::EdgeAligned : Phase::MidCycle;
  }
  return Phase::MidCycle;
}

// Storage bits of one domain, for uniform random targeting.
struct BitMap {
  std::vector<std::uint32_t> cells;
  std::vector<std::uint64_t> ends;  // cumulative bit counts
  std::uint64_t sram_bits = 0;      // SRAM array bits follow the cells
  std::uint64_t total() const { return (ends.empty() ? 0 : ends.back()) + sram_bits; }
};

BitMap bit_map(const System& s, Domain d) {
  BitMap m;
  std::uint64_t acc = 0;
  for (std::uint32_t i = 0; i < s.bank().size(); ++i) {
    const TmrCell& c = s.bank().cell(CellRef{i});
    if (c.domain != d) continue;
    acc += c.width;
    m.cells.push_back(i);
    m.ends.push_back(acc);
  }
  if (d == Domain::Sram) m.sram_bits = static_cast<std::uint64_t>(s.sram().rows()) * 32;
  return m;
}

Injection pick_target(const BitMap& m, Domain d, std::mt19937_64& rng) {
  Injection inj;
  inj.domain = d;
  const std::uint64_t cell_bits = m.ends.empty() ? 0 : m.ends.back();
  const std::uint64_t k = below(rng, m.total());
  if (k < cell_bits) {
    const auto it = std::upper_bound(m.ends.begin(), m.ends.end(), k);
    const std::size_t idx = static_cast<std::size_t>(it - m.ends.begin());
    const std::uint64_t start = idx == 0 ? 0 : m.ends[idx - 1];
    inj.element = m.cells[idx];
    inj.bit = static_cast<std::uint8_t>(k - start);
  } else {
    inj.sram_row = true;
    inj.element = static_cast<std::uint32_t>((k - cell_bits) / 32);
    inj.bit = static_cast<std::uint8_t>((k - cell_bits) % 32);
  }
  inj.replica = static_cast<std::uint8_t>(below(rng, 3));
  return inj;
}

std::uint32_t voted_target(const System& s, const Injection& inj) {
  return inj.sram_row ? s.sram().voted(inj.element).value : s.bank().read(CellRef{inj.element});
}

bool target_consistent(const System& s, const Injection& inj) {
  return inj.sram_row ? s.sram().consistent(inj.element) : s.bank().cell(CellRef{inj.element}).consistent();
}

bool matches(const Event& e, const Injection& inj) {
  if (e.element != inj.element) return false;
  if (inj.sram_row) return e.kind == EventKind::SramCoreDiscrepancy || e.kind == EventKind::SramScrubDiscrepancy;
  return e.kind == EventKind::CellDiscrepancy;
}

bool is_discrepancy(EventKind k) {
  return k == EventKind::CellDiscrepancy || k == EventKind::SramCoreDiscrepancy ||
         k == EventKind::SramScrubDiscrepancy;
}

}  // namespace

void apply_fault(System& s, const Injection& inj) {
  for (unsigned k = 0; k < inj.count; ++k) {
    const unsigned replica = (inj.replica + k) % 3;
    if (inj.sram_row) {
      s.flip_sram(inj.element, replica, inj.bit);
    } else if (inj.phase == Phase::EdgeAligned) {
      s.queue_edge_upset(CellRef{inj.element}, replica, inj.bit);
    } else {
      s.flip_cell(CellRef{inj.element}, replica, inj.bit);
    }
  }
}

bool counter_crosscheck(const RunRecord& run) {
  for (std::size_t d = 0; d < kDomainCount; ++d)
    if (run.counters[d] != std::min<std::uint64_t>(run.counted_events[d], 0xFFFFFFFFu)) return false;
  return true;
}

bool counter_crosscheck(const CampaignReport& report) {
  if (report.summary.crosscheck_failures != 0) return false;
  for (std::size_t d = 0; d < kDomainCount; ++d)
    if (report.golden.counters[d] != 0) return false;  // the golden run has no upsets
  return std::all_of(report.runs.begin(), report.runs.end(),
                     [](const RunRecord& r) { return counter_crosscheck(r); });
}

// ---------------------------------------------------------------------------
// Campaign

Campaign::Campaign(CampaignConfig config) : config_(std::move(config)), prototype_(config_.system) {
  ConfigErrors errors;
  config_.system.trace_retirements = false;
  prototype_ = System(config_.system);
  prototype_.load_image(config_.image);
  prototype_.set_stimulus(config_.stimulus);

  // Golden run: first find the run length, then record checkpoints and the
  // per-cycle architectural trace up to the horizon.
  System g = prototype_;
  if (config_.run_cycles) {
    run_end_ = *config_.run_cycles;
    if (run_end_ == 0) errors.add("run_cycles must be positive");
  } else {
    const RunResult r = g.run(config_.max_cycles);
    if (r.status != RunStatus::Halted) {
      errors.add("golden run did not halt (" + std::string(to_string(r.status)) + ": " + r.message +
                 "); set run_cycles");
    }
    run_end_ = r.cycles;
    g = prototype_;
  }
  errors.throw_if_any("campaign");

  // Edge-aligned upsets injected in the last cycle need two more to resolve.
  horizon_ = run_end_ + 2;
  interval_ = std::max<std::uint64_t>(1, (horizon_ + 255) / 256);
  golden_hash_.reserve(horizon_ + 1);
  try {
    while (true) {
      const std::uint64_t c = g.cycle();
      if (c % interval_ == 0) checkpoints_.push_back(g);
      golden_hash_.push_back(arch_hash(g));
      if (c == horizon_) break;
      if (g.done() && golden_info_.halt_cycle == 0) golden_info_.halt_cycle = c;
      g.step();
    }
  } catch (const SimFault& f) {
    throw ConfigError(std::string("golden run faulted at cycle ") + std::to_string(g.cycle()) + ": " + f.what());
  }
  if (g.done() && golden_info_.halt_cycle == 0) golden_info_.halt_cycle = g.cycle();
  // Faulty runs are judged at the horizon, so the golden status is too.
  golden_info_.status = g.done() ? RunStatus::Halted : RunStatus::CycleLimit;
  golden_info_.retired = g.stats().retired;
  golden_info_.counters = g.counters();
  golden_info_.reads_counters = g.peripherals().counters_read();
  golden_final_ = std::make_unique<System>(g);

  plan(errors);
  errors.throw_if_any("campaign");
}

std::uint64_t Campaign::arch_hash(const System& s) const {
  // FNV-1a over the software-visible registers and output state.
  std::uint64_t h = 0xCBF29CE484222325ull;
  auto mix = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xFF;
      h *= 0x100000001B3ull;
    }
  };
  const ArchView a = s.architecture();
  mix(a.pc);
  mix(a.halted);
  for (unsigned i = 1; i < 32; ++i) mix(a.regs[i]);
  const auto& tx = s.peripherals().tx_output();
  mix(tx.size());
  if (!tx.empty()) mix(tx.back());
  mix(s.bank().read(s.peripherals().gpio_dir));
  mix(s.bank().read(s.peripherals().gpio_out));
  return h;
}

const System& Campaign::checkpoint_at_or_before(std::uint64_t cycle) const {
  const std::uint64_t k = std::min<std::uint64_t>(cycle / interval_, checkpoints_.size() - 1);
  return checkpoints_[k];
}

void Campaign::plan(ConfigErrors& errors) {
  const System& s = prototype_;
  const bool need_seed = std::any_of(config_.experiments.begin(), config_.experiments.end(), [](const Experiment& e) {
    if (e.kind == Experiment::Kind::Random || e.kind == Experiment::Kind::Poisson) return true;
    if (e.kind != Experiment::Kind::Targeted) return false;
    return std::any_of(e.faults.begin(), e.faults.end(),
                       [](const FaultSpec& f) { return std::holds_alternative<RandomTarget>(f.target); });
  });
  if (need_seed && !config_.seed) errors.add("a seed is required for random targets and rate models");
  const std::uint64_t seed = config_.seed.value_or(0);

  std::array<BitMap, kDomainCount> maps;
  for (std::size_t d = 0; d < kDomainCount; ++d) maps[d] = bit_map(s, static_cast<Domain>(d));

  auto window = [&](const Experiment& e, const std::string& where) -> std::pair<std::uint64_t, std::uint64_t> {
    if (!e.cycles) return {0, run_end_ - 1};
    auto [lo, hi] = *e.cycles;
    if (lo > hi || hi >= run_end_) {
      errors.add(where + ": cycle window [" + std::to_string(lo) + ", " + std::to_string(hi) +
                 "] must lie within the run (0.." + std::to_string(run_end_ - 1) + ")");
      return {0, 0};
    }
    return {lo, hi};
  };

  for (std::uint32_t ei = 0; ei < config_.experiments.size(); ++ei) {
    const Experiment& e = config_.experiments[ei];
    const std::string where = "experiments[" + std::to_string(ei) + "]";
    std::mt19937_64 rng(stream_seed(seed, ei, 0));
    if (e.count < 1 || e.count > 2) errors.add(where + ": count must be 1 or 2");
    switch (e.kind) {
      case Experiment::Kind::Targeted: {
        Plan p{ei, 0, {}};
        for (std::size_t fi = 0; fi < e.faults.size(); ++fi) {
          const FaultSpec& f = e.faults[fi];
          const std::string fw = where + ".faults[" + std::to_string(fi) + "]";
          Injection inj;
          if (const auto* ct = std::get_if<CellTarget>(&f.target)) {
            if (!s.bank().contains(ct->cell)) {
              errors.add(fw + ": no sequential element named '" + ct->cell + "'");
              continue;
            }
            const CellRef ref = s.bank().find(ct->cell);
            inj.element = ref.index;
            inj.domain = s.bank().cell(ref).domain;
            if (ct->bit >= s.bank().cell(ref).width)
              errors.add(fw + ": bit " + std::to_string(ct->bit) + " beyond the " +
                         std::to_string(s.bank().cell(ref).width) + "-bit cell " + ct->cell);
            inj.replica = static_cast<std::uint8_t>(ct->replica);
            inj.bit = static_cast<std::uint8_t>(ct->bit);
            if (ct->replica > 2) errors.add(fw + ": replica must be 0, 1 or 2");
          } else if (const auto* rt = std::get_if<RowTarget>(&f.target)) {
            if (rt->row >= s.sram().rows())
              errors.add(fw + ": row " + std::to_string(rt->row) + " outside the " + std::to_string(s.sram().rows()) +
                         "-row SRAM");
            if (rt->bit > 31) errors.add(fw + ": bit must be below 32");
            if (rt->replica > 2) errors.add(fw + ": replica must be 0, 1 or 2");
            inj.sram_row = true;
            inj.domain = Domain::Sram;
            inj.element = rt->row;
            inj.replica = static_cast<std::uint8_t>(rt->replica);
            inj.bit = static_cast<std::uint8_t>(rt->bit);
          } else {
            const Domain d = std::get<RandomTarget>(f.target).domain;
            inj = pick_target(maps[static_cast<int>(d)], d, rng);
          }
          if (f.at_cycle >= run_end_)
            errors.add(fw + ": cycle " + std::to_string(f.at_cycle) + " is beyond the run (" +
                       std::to_string(run_end_) + " cycles)");
          if (f.count < 1 || f.count > 2) errors.add(fw + ": count must be 1 or 2");
          inj.cycle = f.at_cycle;
          inj.count = static_cast<std::uint8_t>(f.count);
          if (!inj.sram_row) inj.phase = f.phase;
          p.injections.push_back(inj);
        }
        std::stable_sort(p.injections.begin(), p.injections.end(),
                         [](const Injection& a, const Injection& b) { return a.cycle < b.cycle; });
        plans_.push_back(std::move(p));
        break;
      }
      case Experiment::Kind::Random: {
        const auto [lo, hi] = window(e, where);
        const BitMap& m = maps[static_cast<int>(e.domain)];
        if (m.total() == 0) {
          errors.add(where + ": domain has no storage bits");
          break;
        }
        for (std::uint64_t r = 0; r < e.runs; ++r) {
          Injection inj = pick_target(m, e.domain, rng);
          inj.cycle = lo + below(rng, hi - lo + 1);
          const Phase ph = pick_phase(e.phase, rng);
          if (!inj.sram_row) inj.phase = ph;
          inj.count = static_cast<std::uint8_t>(e.count);
          plans_.push_back({ei, r, {inj}});
        }
        break;
      }
      case Experiment::Kind::Poisson: {
        double expected = 0;
        for (double r : e.rate) {
          if (!(r >= 0) || !std::isfinite(r)) errors.add(where + ": rates must be finite and >= 0");
          expected += r * static_cast<double>(run_end_);
        }
        if (expected > 100000) {
          errors.add(where + ": rate model expects more than 100000 upsets per run");
          break;
        }
        for (std::uint64_t r = 0; r < e.runs; ++r) {
          std::mt19937_64 run_rng(stream_seed(seed, ei, r + 1));
          Plan p{ei, r, {}};
          for (std::size_t d = 0; d < kDomainCount; ++d) {
            const double lambda = e.rate[d];
            if (lambda <= 0 || maps[d].total() == 0) continue;
            double t = 0;
            while (true) {
              t += -std::log(unit_open(run_rng)) / lambda;
              if (t >= static_cast<double>(run_end_)) break;
              Injection inj = pick_target(maps[d], static_cast<Domain>(d), run_rng);
              inj.cycle = static_cast<std::uint64_t>(t);
              const Phase ph = pick_phase(e.phase, run_rng);
              if (!inj.sram_row) inj.phase = ph;
              p.injections.push_back(inj);
            }
          }
          std::stable_sort(p.injections.begin(), p.injections.end(),
                           [](const Injection& a, const Injection& b) { return a.cycle < b.cycle; });
          plans_.push_back(std::move(p));
        }
        break;
      }
      case Experiment::Kind::Sweep: {
        const auto [lo, hi] = window(e, where);
        if (e.stride == 0) {
          errors.add(where + ": stride must be positive");
          break;
        }
        if (e.phase == PhaseChoice::Any) errors.add(where + ": a sweep needs phase 'mid' or 'edge'");
        for (const std::string& name : e.cells)
          if (!s.bank().contains(name)) errors.add(where + ": no sequential element named '" + name + "'");
        std::uint64_t idx = 0;
        for (Domain d : e.domains) {
          for (std::uint32_t ci = 0; ci < s.bank().size(); ++ci) {
            const TmrCell& cell = s.bank().cell(CellRef{ci});
            if (cell.domain != d) continue;
            if (!e.cells.empty() &&
                std::find(e.cells.begin(), e.cells.end(), s.bank().name(CellRef{ci})) == e.cells.end())
              continue;
            for (unsigned bit = 0; bit < cell.width; ++bit)
              for (unsigned rep = 0; rep < 3; ++rep)
                for (std::uint64_t c = lo; c <= hi; c += e.stride) {
                  Injection inj;
                  inj.cycle = c;
                  inj.phase = e.phase == PhaseChoice::Edge ? Phase::EdgeAligned : Phase::MidCycle;
                  inj.domain = d;
                  inj.element = ci;
                  inj.replica = static_cast<std::uint8_t>(rep);
                  inj.bit = static_cast<std::uint8_t>(bit);
                  inj.count = static_cast<std::uint8_t>(e.count);
                  plans_.push_back({ei, idx++, {inj}});
                }
          }
        }
        break;
      }
    }
  }
}

RunRecord Campaign::execute(std::size_t run) const {
  const Plan& p = plans_.at(run);
  RunRecord rec;
  rec.experiment = p.experiment;
  rec.index = p.index;
  const std::size_t n = p.injections.size();
  rec.injections.resize(n);
  for (std::size_t i = 0; i < n; ++i) rec.injections[i].injection = p.injections[i];

  struct Track {
    bool applied = false;
    bool resolved = false;
  };
  std::vector<Track> track(n);
  std::vector<Event> events;
  System s = checkpoint_at_or_before(n ? p.injections.front().cycle : 0);
  s.set_event_sink(&events);

  std::size_t next = 0;
  std::size_t unresolved = 0;
  bool trace_diverged = false;
  bool early = false;
  std::vector<std::uint32_t> before;
  std::vector<std::size_t> edge_batch;

  try {
    while (s.cycle() < horizon_) {
      const std::uint64_t c = s.cycle();
      if (next == n && unresolved == 0 && !golden_info_.reads_counters && c % interval_ == 0 &&
          c / interval_ < checkpoints_.size() && s.equivalent_state(checkpoints_[c / interval_])) {
        early = true;
        break;
      }

      // Apply the faults due now. Votes are sampled before any of them lands
      // so that two upsets in one instance group are judged together.
      const std::size_t batch = next;
      while (next < n && p.injections[next].cycle == c) ++next;
      before.clear();
      for (std::size_t i = batch; i < next; ++i) before.push_back(voted_target(s, p.injections[i]));
      edge_batch.clear();
      for (std::size_t i = batch; i < next; ++i) {
        apply_fault(s, p.injections[i]);
        track[i].applied = true;
        ++unresolved;
        if (p.injections[i].phase == Phase::EdgeAligned) edge_batch.push_back(i);
      }
      for (std::size_t i = batch; i < next; ++i)
        if (p.injections[i].phase != Phase::EdgeAligned)
          rec.injections[i].uncorrectable = voted_target(s, p.injections[i]) != before[i - batch];

      s.step();

      // Edge upsets: compare the latched vote with and without this edge's
      // masks on the same cell.
      for (std::size_t i : edge_batch) {
        const Injection& inj = p.injections[i];
        TmrCell clean = s.bank().cell(CellRef{inj.element});
        for (std::size_t j : edge_batch) {
          const Injection& o = p.injections[j];
          if (o.element != inj.element) continue;
          for (unsigned k = 0; k < o.count; ++k) clean.replicas[(o.replica + k) % 3] ^= 1u << o.bit;
        }
        rec.injections[i].uncorrectable = clean.value() != s.bank().cell(CellRef{inj.element}).value();
      }

      for (std::size_t i = 0; i < next; ++i) {
        if (track[i].resolved || !track[i].applied) continue;
        if (!target_consistent(s, p.injections[i])) continue;
        track[i].resolved = true;
        --unresolved;
        if (!rec.injections[i].uncorrectable) {
          rec.injections[i].corrected = true;
          rec.injections[i].latency = s.cycle() - p.injections[i].cycle;
        }
      }
      if (arch_hash(s) != golden_hash_[s.cycle()]) trace_diverged = true;
    }
  } catch (const SimFault& f) {
    rec.status = RunStatus::Fault;
    rec.sim_fault = f.what();
  }

  if (rec.status != RunStatus::Fault) {
    if (early) {
      rec.status = golden_info_.status;
    } else {
      rec.status = s.done() ? RunStatus::Halted : RunStatus::CycleLimit;
    }
  }
  if (config_.golden) {
    bool diverged = trace_diverged || rec.status == RunStatus::Fault;
    if (!early && !diverged) diverged = !s.same_outcome(*golden_final_) || rec.status != golden_info_.status;
    rec.divergence = diverged;
  }

  rec.counters = s.counters();
  for (const Event& e : events)
    if (e.counted && is_discrepancy(e.kind)) ++rec.counted_events[static_cast<int>(e.domain)];
  for (std::size_t i = 0; i < n; ++i) {
    const Injection& inj = p.injections[i];
    const auto& lat = rec.injections[i].latency;
    rec.injections[i].detected = std::any_of(events.begin(), events.end(), [&](const Event& e) {
      return matches(e, inj) && e.cycle >= inj.cycle && (!lat || e.cycle < inj.cycle + *lat);
    });
  }
  return rec;
}

namespace {

bool anomalous(const RunRecord& r) {
  if (r.status == RunStatus::Fault || r.divergence.value_or(false) || !counter_crosscheck(r)) return true;
  return std::any_of(r.injections.begin(), r.injections.end(),
                     [](const InjectionRecord& i) { return !i.corrected || !i.detected; });
}

void fold(Summary& s, const RunRecord& r) {
  ++s.runs;
  for (const InjectionRecord& i : r.injections) {
    ++s.injections;
    if (i.detected) ++s.detected;
    if (i.uncorrectable) ++s.uncorrectable;
    if (i.corrected) {
      ++s.corrected;
      const std::string key =
          i.injection.sram_row ? "sram" : (i.injection.phase == Phase::EdgeAligned ? "edge" : "mid");
      LatencyStats& l = s.latency[key];
      ++l.count;
      l.max = std::max(l.max, *i.latency);
      ++l.histogram[*i.latency];
    } else if (!i.uncorrectable) {
      ++s.unresolved;
    }
  }
  if (r.divergence.value_or(false)) ++s.divergent_runs;
  if (r.status == RunStatus::Fault) ++s.sim_faults;
  if (!counter_crosscheck(r)) ++s.crosscheck_failures;
}

}  // namespace

CampaignReport Campaign::run(unsigned jobs, const std::function<void(std::size_t, std::size_t)>& progress) const {
  CampaignReport rep;
  rep.program_label = config_.program_label;
  rep.seed = config_.seed;
  rep.run_cycles = run_end_;
  rep.system = config_.system;
  rep.golden = golden_info_;
  for (const Experiment& e : config_.experiments) rep.experiment_names.push_back(e.name);
  for (std::uint32_t i = 0; i < prototype_.bank().size(); ++i) rep.cell_names.push_back(prototype_.bank().name(CellRef{i}));

  jobs = std::max(1u, jobs);
  const std::size_t total = plans_.size();
  const std::size_t chunk = 4096;
  std::vector<RunRecord> buf;
  for (std::size_t base = 0; base < total; base += chunk) {
    const std::size_t len = std::min(chunk, total - base);
    buf.assign(len, RunRecord{});
    if (jobs == 1) {
      for (std::size_t i = 0; i < len; ++i) buf[i] = execute(base + i);
    } else {
      std::atomic<std::size_t> cursor{0};
      std::vector<std::thread> pool;
      for (unsigned t = 0; t < jobs; ++t)
        pool.emplace_back([&] {
          for (std::size_t i; (i = cursor.fetch_add(1)) < len;) buf[i] = execute(base + i);
        });
      for (auto& th : pool) th.join();
    }
    for (RunRecord& r : buf) {
      fold(rep.summary, r);
      if (config_.records == RecordLevel::All || (config_.records == RecordLevel::Anomalies && anomalous(r)))
        rep.runs.push_back(std::move(r));
    }
    if (progress) progress(base + len, total);
  }
  return rep;
}

CampaignReport run_campaign(const CampaignConfig& config, unsigned jobs) { return Campaign(config).run(jobs); }

// ---------------------------------------------------------------------------
// Config parsing

namespace {

PhaseChoice phase_choice(const Json& v, const std::string& where, ConfigErrors& errors, bool allow_any) {
  if (!v.is_string()) {
    errors.add(where + ": phase must be a string");
    return PhaseChoice::Mid;
  }
  const std::string s = v.get<std::string>();
  if (s == "mid") return PhaseChoice::Mid;
  if (s == "edge") return PhaseChoice::Edge;
  if (s == "any" && allow_any) return PhaseChoice::Any;
  errors.add(where + ": unknown phase '" + s + "' (mid, edge" + (allow_any ? ", any)" : ")"));
  return PhaseChoice::Mid;
}

std::optional<Domain> domain_of(const Json& v, const std::string& where, ConfigErrors& errors) {
  if (v.is_string()) {
    try {
      return domain_from_string(v.get<std::string>());
    } catch (const ConfigError&) {
    }
  }
  errors.add(where + ": domain must be one of core, sram, peripherals");
  return std::nullopt;
}

template <class T>
T uint_field(const Json& obj, const char* key, T fallback, const std::string& where, ConfigErrors& errors) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number_unsigned()) {
    errors.add(where + "." + key + ": expected a non-negative integer");
    return fallback;
  }
  return obj[key].get<T>();
}

std::optional<std::pair<std::uint64_t, std::uint64_t>> cycle_window(const Json& obj, const std::string& where,
                                                                     ConfigErrors& errors) {
  if (!obj.contains("cycles")) return std::nullopt;
  const Json& c = obj["cycles"];
  if (c.is_array() && c.size() == 2 && c[0].is_number_unsigned() && c[1].is_number_unsigned())
    return std::pair{c[0].get<std::uint64_t>(), c[1].get<std::uint64_t>()};
  errors.add(where + ".cycles: expected [first, last]");
  return std::nullopt;
}

FaultSpec fault_spec(const Json& f, const std::string& where, ConfigErrors& errors) {
  FaultSpec spec;
  check_keys(f, {"cycle", "phase", "cell", "row", "random", "replica", "bit", "count"}, where, errors);
  if (!f.is_object()) return spec;
  if (!f.contains("cycle")) errors.add(where + ": missing 'cycle'");
  spec.at_cycle = uint_field<std::uint64_t>(f, "cycle", 0, where, errors);
  if (f.contains("phase"))
    spec.phase = phase_choice(f["phase"], where, errors, false) == PhaseChoice::Edge ? Phase::EdgeAligned
                                                                                       : Phase::MidCycle;
  spec.count = uint_field<unsigned>(f, "count", 1, where, errors);
  const int kinds = f.contains("cell") + f.contains("row") + f.contains("random");
  if (kinds != 1) {
    errors.add(where + ": exactly one of 'cell', 'row' or 'random' is required");
    return spec;
  }
  const unsigned replica = uint_field<unsigned>(f, "replica", 0, where, errors);
  const unsigned bit = uint_field<unsigned>(f, "bit", 0, where, errors);
  if (f.contains("cell")) {
    if (!f["cell"].is_string()) errors.add(where + ".cell: expected a cell name");
    else spec.target = CellTarget{f["cell"].get<std::string>(), replica, bit};
  } else if (f.contains("row")) {
    spec.target = RowTarget{uint_field<std::uint32_t>(f, "row", 0, where, errors), replica, bit};
    if (f.contains("phase")) errors.add(where + ": SRAM upsets take no phase");
  } else {
    if (f.contains("replica") || f.contains("bit")) errors.add(where + ": random targets take no replica or bit");
    if (auto d = domain_of(f["random"], where + ".random", errors)) spec.target = RandomTarget{*d};
  }
  return spec;
}

Experiment experiment(const Json& e, const std::string& where, ConfigErrors& errors) {
  Experiment x;
  if (!e.is_object() || !e.contains("kind") || !e["kind"].is_string()) {
    errors.add(where + ": expected an object with a 'kind'");
    return x;
  }
  const std::string kind = e["kind"].get<std::string>();
  if (e.contains("name")) {
    if (e["name"].is_string()) x.name = e["name"].get<std::string>();
    else errors.add(where + ".name: expected a string");
  }
  if (x.name.empty()) x.name = kind + "-" + where.substr(where.find('[') + 1, where.find(']') - where.find('[') - 1);
  if (kind == "targeted") {
    x.kind = Experiment::Kind::Targeted;
    check_keys(e, {"kind", "name", "faults"}, where, errors);
    if (!e.contains("faults") || !e["faults"].is_array() || e["faults"].empty()) {
      errors.add(where + ": 'faults' must be a non-empty array");
      return x;
    }
    for (std::size_t i = 0; i < e["faults"].size(); ++i)
      x.faults.push_back(fault_spec(e["faults"][i], where + ".faults[" + std::to_string(i) + "]", errors));
  } else if (kind == "random") {
    x.kind = Experiment::Kind::Random;
    check_keys(e, {"kind", "name", "domain", "runs", "phase", "cycles", "count"}, where, errors);
    if (auto d = domain_of(e.value("domain", Json()), where + ".domain", errors)) x.domain = *d;
    x.runs = uint_field<std::uint64_t>(e, "runs", 1, where, errors);
    x.count = uint_field<unsigned>(e, "count", 1, where, errors);
    if (e.contains("phase")) x.phase = phase_choice(e["phase"], where, errors, true);
    x.cycles = cycle_window(e, where, errors);
  } else if (kind == "poisson") {
    x.kind = Experiment::Kind::Poisson;
    check_keys(e, {"kind", "name", "rate", "runs", "phase"}, where, errors);
    x.runs = uint_field<std::uint64_t>(e, "runs", 1, where, errors);
    if (e.contains("phase")) x.phase = phase_choice(e["phase"], where, errors, true);
    const Json rate = e.value("rate", Json());
    check_keys(rate, {"core", "sram", "peripherals"}, where + ".rate", errors);
    if (rate.is_object())
      for (const auto& [k, v] : rate.items()) {
        if (!v.is_number()) {
          errors.add(where + ".rate." + k + ": expected upsets per cycle");
          continue;
        }
        try {
          x.rate[static_cast<int>(domain_from_string(k))] = v.get<double>();
        } catch (const ConfigError&) {
        }
      }
  } else if (kind == "sweep") {
    x.kind = Experiment::Kind::Sweep;
    check_keys(e, {"kind", "name", "domains", "cells", "phase", "cycles", "stride", "count"}, where, errors);
    const Json doms = e.value("domains", Json::array({"core", "peripherals"}));
    if (!doms.is_array()) errors.add(where + ".domains: expected an array");
    else
      for (const Json& d : doms)
        if (auto dd = domain_of(d, where + ".domains", errors)) x.domains.push_back(*dd);
    if (e.contains("cells")) {
      if (!e["cells"].is_array()) errors.add(where + ".cells: expected an array of names");
      else
        for (const Json& c : e["cells"])
          if (c.is_string()) x.cells.push_back(c.get<std::string>());
          else errors.add(where + ".cells: expected names");
    }
    if (e.contains("phase")) x.phase = phase_choice(e["phase"], where, errors, false);
    x.cycles = cycle_window(e, where, errors);
    x.stride = uint_field<std::uint64_t>(e, "stride", 1, where, errors);
    x.count = uint_field<unsigned>(e, "count", 1, where, errors);
  } else {
    errors.add(where + ": unknown kind '" + kind + "' (targeted, random, poisson, sweep)");
  }
  return x;
}

}  // namespace

CampaignConfig parse_campaign(const Json& doc, const std::filesystem::path& base_dir) {
  ConfigErrors errors;
  CampaignConfig cfg;
  check_keys(doc, {"schema", "program", "base", "stimulus", "seed", "run_cycles", "max_cycles", "golden", "records",
                   "system", "experiments"},
             "campaign", errors);
  if (!doc.is_object()) errors.throw_if_any("campaign config");
  if (doc.value("schema", std::string()) != "strv-campaign/1")
    errors.add("schema: expected \"strv-campaign/1\"");
  if (doc.contains("system")) cfg.system = system_config_from_json(doc["system"], errors);
  if (doc.contains("seed")) cfg.seed = uint_field<std::uint64_t>(doc, "seed", 0, "campaign", errors);
  if (doc.contains("run_cycles")) cfg.run_cycles = uint_field<std::uint64_t>(doc, "run_cycles", 0, "campaign", errors);
  cfg.max_cycles = uint_field<std::uint64_t>(doc, "max_cycles", cfg.max_cycles, "campaign", errors);
  if (doc.contains("golden")) {
    if (doc["golden"].is_boolean()) cfg.golden = doc["golden"].get<bool>();
    else errors.add("golden: expected true or false");
  }
  if (doc.contains("records")) {
    const std::string r = doc["records"].is_string() ? doc["records"].get<std::string>() : "";
    if (r == "all") cfg.records = RecordLevel::All;
    else if (r == "anomalies") cfg.records = RecordLevel::Anomalies;
    else if (r == "none") cfg.records = RecordLevel::None;
    else errors.add("records: expected all, anomalies or none");
  }
  const std::uint32_t base = uint_field<std::uint32_t>(doc, "base", 0, "campaign", errors);
  if (!doc.contains("program") || !doc["program"].is_string()) {
    errors.add("program: path to a raw binary or ELF image is required");
  } else {
    const std::filesystem::path prog = base_dir / doc["program"].get<std::string>();
    cfg.program_label = doc["program"].get<std::string>();
    try {
      cfg.image = load_image_file(prog, base);
      System probe(cfg.system);
      probe.load_image(cfg.image);
    } catch (const ConfigError& e) {
      errors.add(std::string("program: ") + e.what());
    }
  }
  if (doc.contains("stimulus")) {
    if (!doc["stimulus"].is_string()) {
      errors.add("stimulus: expected a path");
    } else {
      const std::filesystem::path p = base_dir / doc["stimulus"].get<std::string>();
      std::ifstream in(p);
      if (!in) {
        errors.add("stimulus: cannot open '" + p.string() + "'");
      } else {
        try {
          cfg.stimulus = std::make_shared<const std::vector<StimulusEvent>>(parse_stimulus(in));
        } catch (const ConfigError& e) {
          errors.add(std::string("stimulus: ") + e.what());
        }
      }
    }
  }
  if (!doc.contains("experiments") || !doc["experiments"].is_array() || doc["experiments"].empty()) {
    errors.add("experiments: a non-empty array is required");
  } else {
    for (std::size_t i = 0; i < doc["experiments"].size(); ++i)
      cfg.experiments.push_back(experiment(doc["experiments"][i], "experiments[" + std::to_string(i) + "]", errors));
  }
  errors.throw_if_any("campaign config");
  return cfg;
}

CampaignConfig load_campaign_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open campaign config '" + path.string() + "'");
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("campaign config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return parse_campaign(doc, path.parent_path());
}

// ---------------------------------------------------------------------------
// Report serialization

namespace {

const char* status_name(RunStatus s) { return to_string(s); }

RunStatus status_from(const std::string& s) {
  for (RunStatus r : {RunStatus::Halted, RunStatus::Fault, RunStatus::Timeout, RunStatus::CycleLimit})
    if (s == to_string(r)) return r;
  throw ConfigError("unknown run status '" + s + "'");
}

Json counts_json(const std::array<std::uint32_t, kDomainCount>& c) {
  return Json{{"core", c[0]}, {"sram", c[1]}, {"peripherals", c[2]}};
}
Json counts_json(const DomainCounts& c) { return Json{{"core", c[0]}, {"sram", c[1]}, {"peripherals", c[2]}}; }

template <class A>
A counts_from(const Json& j) {
  A a{};
  a[0] = j.at("core").get<typename A::value_type>();
  a[1] = j.at("sram").get<typename A::value_type>();
  a[2] = j.at("peripherals").get<typename A::value_type>();
  return a;
}

Json latency_json(const LatencyStats& l) {
  Json hist = Json::array();
  for (const auto& [lat, n] : l.histogram) hist.push_back(Json::array({lat, n}));
  return Json{{"count", l.count}, {"max", l.max}, {"histogram", hist}};
}

}  // namespace

Json to_json(const CampaignReport& rep) {
  Json runs = Json::array();
  for (const RunRecord& r : rep.runs) {
    Json injections = Json::array();
    for (const InjectionRecord& i : r.injections) {
      const Injection& in = i.injection;
      Json target{{"domain", to_string(in.domain)}, {"replica", in.replica}, {"bit", in.bit}, {"count", in.count}};
      if (in.sram_row) target["row"] = in.element;
      else target["cell"] = rep.cell_names.at(in.element);
      injections.push_back(Json{{"cycle", in.cycle},
                                {"phase", in.phase ? Json(to_string(*in.phase)) : Json()},
                                {"target", target},
                                {"detected", i.detected},
                                {"corrected", i.corrected},
                                {"latency", i.latency ? Json(*i.latency) : Json()},
                                {"uncorrectable", i.uncorrectable}});
    }
    runs.push_back(Json{{"experiment", r.experiment},
                        {"index", r.index},
                        {"status", status_name(r.status)},
                        {"sim_fault", r.sim_fault ? Json(*r.sim_fault) : Json()},
                        {"counters", counts_json(r.counters)},
                        {"counted_events", counts_json(r.counted_events)},
                        {"divergence", r.divergence ? Json(*r.divergence) : Json()},
                        {"injections", injections}});
  }
  Json latency = Json::object();
  for (const auto& [k, l] : rep.summary.latency) latency[k] = latency_json(l);
  const Summary& s = rep.summary;
  Json summary{{"runs", s.runs},
               {"injections", s.injections},
               {"detected", s.detected},
               {"corrected", s.corrected},
               {"uncorrectable", s.uncorrectable},
               {"unresolved", s.unresolved},
               {"divergent_runs", s.divergent_runs},
               {"sim_faults", s.sim_faults},
               {"crosscheck_failures", s.crosscheck_failures},
               {"counter_crosscheck", counter_crosscheck(rep)},
               {"latency", latency}};
  return Json{{"schema", "strv-campaign-report/1"},
              {"program", rep.program_label},
              {"seed", rep.seed ? Json(*rep.seed) : Json()},
              {"run_cycles", rep.run_cycles},
              {"system", to_json(rep.system)},
              {"golden",
               {{"status", status_name(rep.golden.status)},
                {"halt_cycle", rep.golden.halt_cycle},
                {"retired", rep.golden.retired},
                {"counters", counts_json(rep.golden.counters)},
                {"reads_counters", rep.golden.reads_counters}}},
              {"experiments", rep.experiment_names},
              {"cells", rep.cell_names},
              {"runs", runs},
              {"summary", summary}};
}

CampaignReport report_from_json(const Json& doc) {
  try {
    if (doc.at("schema") != "strv-campaign-report/1") throw ConfigError("not a strv-campaign-report/1 document");
    CampaignReport rep;
    rep.program_label = doc.at("program").get<std::string>();
    if (!doc.at("seed").is_null()) rep.seed = doc["seed"].get<std::uint64_t>();
    rep.run_cycles = doc.at("run_cycles").get<std::uint64_t>();
    ConfigErrors errors;
    rep.system = system_config_from_json(doc.at("system"), errors);
    errors.throw_if_any("report system");
    const Json& g = doc.at("golden");
    rep.golden.status = status_from(g.at("status").get<std::string>());
    rep.golden.halt_cycle = g.at("halt_cycle").get<std::uint64_t>();
    rep.golden.retired = g.at("retired").get<std::uint64_t>();
    rep.golden.counters = counts_from<std::array<std::uint32_t, kDomainCount>>(g.at("counters"));
    rep.golden.reads_counters = g.at("reads_counters").get<bool>();
    rep.experiment_names = doc.at("experiments").get<std::vector<std::string>>();
    rep.cell_names = doc.at("cells").get<std::vector<std::string>>();
    for (const Json& r : doc.at("runs")) {
      RunRecord rec;
      rec.experiment = r.at("experiment").get<std::uint32_t>();
      rec.index = r.at("index").get<std::uint64_t>();
      rec.status = status_from(r.at("status").get<std::string>());
      if (!r.at("sim_fault").is_null()) rec.sim_fault = r["sim_fault"].get<std::string>();
      rec.counters = counts_from<std::array<std::uint32_t, kDomainCount>>(r.at("counters"));
      rec.counted_events = counts_from<DomainCounts>(r.at("counted_events"));
      if (!r.at("divergence").is_null()) rec.divergence = r["divergence"].get<bool>();
      for (const Json& i : r.at("injections")) {
        InjectionRecord ir;
        Injection& in = ir.injection;
        in.cycle = i.at("cycle").get<std::uint64_t>();
        if (!i.at("phase").is_null()) in.phase = i["phase"] == "edge" ? Phase::EdgeAligned : Phase::MidCycle;
        const Json& t = i.at("target");
        in.domain = domain_from_string(t.at("domain").get<std::string>());
        in.replica = t.at("replica").get<std::uint8_t>();
        in.bit = t.at("bit").get<std::uint8_t>();
        in.count = t.at("count").get<std::uint8_t>();
        if (t.contains("row")) {
          in.sram_row = true;
          in.element = t["row"].get<std::uint32_t>();
        } else {
          const std::string name = t.at("cell").get<std::string>();
          const auto it = std::find(rep.cell_names.begin(), rep.cell_names.end(), name);
          if (it == rep.cell_names.end()) throw ConfigError("report names unknown cell '" + name + "'");
          in.element = static_cast<std::uint32_t>(it - rep.cell_names.begin());
        }
        ir.detected = i.at("detected").get<bool>();
        ir.corrected = i.at("corrected").get<bool>();
        if (!i.at("latency").is_null()) ir.latency = i["latency"].get<std::uint64_t>();
        ir.uncorrectable = i.at("uncorrectable").get<bool>();
        rec.injections.push_back(ir);
      }
      rep.runs.push_back(std::move(rec));
    }
    const Json& s = doc.at("summary");
    Summary& m = rep.summary;
    m.runs = s.at("runs").get<std::uint64_t>();
    m.injections = s.at("injections").get<std::uint64_t>();
    m.detected = s.at("detected").get<std::uint64_t>();
    m.corrected = s.at("corrected").get<std::uint64_t>();
    m.uncorrectable = s.at("uncorrectable").get<std::uint64_t>();
    m.unresolved = s.at("unresolved").get<std::uint64_t>();
    m.divergent_runs = s.at("divergent_runs").get<std::uint64_t>();
    m.sim_faults = s.at("sim_faults").get<std::uint64_t>();
    m.crosscheck_failures = s.at("crosscheck_failures").get<std::uint64_t>();
    for (const auto& [k, l] : s.at("latency").items()) {
      LatencyStats st;
      st.count = l.at("count").get<std::uint64_t>();
      st.max = l.at("max").get<std::uint64_t>();
      for (const Json& h : l.at("histogram")) st.histogram[h.at(0).get<std::uint64_t>()] = h.at(1).get<std::uint64_t>();
      m.latency[k] = st;
    }
    return rep;
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("malformed campaign report: ") + e.what());
  }
}

}  // namespace strv::seu
