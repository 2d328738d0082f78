#pragma once
// Experiment driver: turns a parsed config into JSONL records.
//
// Determinism contract: every replica owns a substream derived from
// (seed, subcommand, cell index, replica index) and writes its outcome
// into a preallocated slot, so the aggregate is a pure function of the
// config regardless of worker count or scheduling. Reductions always run
// sequentially over replica index after the pool joins. Levels are
// coupled: all h (and all conditioning offsets x) of a cell share the
// replica's field sample and edge uniforms, which makes the level
// monotonicity pathwise and halves the sampling bill.
//
// Cells already present in the output file are skipped, so an
// interrupted run can be resumed by re-invoking it; identity is the
// (experiment, subcommand, event, N, h, mode, kappa, seed, replicas)
// tuple of each record.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "gff2d/analytics.hpp"
#include "gff2d/config.hpp"
#include "gff2d/dirichlet.hpp"
#include "gff2d/errors.hpp"
#include "gff2d/exploration.hpp"
#include "gff2d/geometry.hpp"
#include "gff2d/overlay.hpp"
#include "gff2d/percolation.hpp"
#include "gff2d/records.hpp"
#include "gff2d/rng.hpp"
#include "gff2d/sampler.hpp"
#include "gff2d/stats.hpp"

namespace gff2d {

// ---------------------------------------------------------------------
// Worker pool

// Runs fn(worker_id, index) for every index in [0, n). Work is handed
// out in blocks through an atomic cursor; callers must write results
// into per-index slots so the outcome cannot depend on the schedule.
inline void parallel_for(int workers, std::int64_t n,
                         const std::function<void(int, std::int64_t)>& fn) {
  if (n <= 0) return;
  workers = std::max<std::int64_t>(1, std::min<std::int64_t>(workers, n));
  if (workers == 1) {
    for (std::int64_t i = 0; i < n; ++i) fn(0, i);
    return;
  }
  const std::int64_t block =
      std::max<std::int64_t>(1, std::min<std::int64_t>(64, n / (workers * 4) + 1));
  std::atomic<std::int64_t> cursor{0};
  std::atomic<bool> failed{false};
  auto errors = std::vector<std::exception_ptr>(std::size_t(workers));
  std::vector<std::thread> pool;
  pool.reserve(std::size_t(workers));
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      try {
        for (;;) {
          if (failed.load(std::memory_order_relaxed)) return;
          const std::int64_t lo = cursor.fetch_add(block);
          if (lo >= n) return;
          const std::int64_t hi = std::min(n, lo + block);
          for (std::int64_t i = lo; i < hi; ++i) fn(w, i);
        }
      } catch (...) {
        errors[std::size_t(w)] = std::current_exception();
        failed.store(true, std::memory_order_relaxed);
      }
    });
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// ---------------------------------------------------------------------
// Stream layout

// Base stream of one cell. Replica substreams spawned from it occupy
// ((sub << 49) | (cell << 42)) + 1 + replica before the purpose shift,
// so subcommands, cells and replicas can never collide (replicas and
// cell count stay far below 2^42 and 2^7).
inline RngStream cell_stream(std::uint64_t seed, int subcommand_id,
                             int cell_index) {
  return RngStream::make(seed, (std::uint64_t(subcommand_id) << 52) |
                                   (std::uint64_t(cell_index) << 45));
}

struct SubcommandInfo {
  const char* name;
  int id;
};

inline const std::vector<SubcommandInfo>& subcommand_table() {
  static const std::vector<SubcommandInfo> table = {
      {"one-arm-bulk", 1},    {"one-arm-boundary", 2}, {"gap", 3},
      {"circuit", 4},         {"chem-dist", 5},        {"conditional-arm", 6},
      {"martingale-audit", 7}, {"psi-audit", 8},
  };
  return table;
}

// ---------------------------------------------------------------------
// Small helpers

// Shortest decimal form for embedding parameters in event names.
inline std::string fmt_compact(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

struct RunContext {
  std::string subcommand;
  int subcommand_id = 0;
  std::string experiment;
  std::uint64_t seed = 0;
  int workers = 1;
  double kappa = kDefaultKappa;
  Json provenance;
  RecordWriter* writer = nullptr;
  std::ostream* log = nullptr;
};

inline RecordFields base_record(const RunContext& rc, const std::string& event,
                                std::optional<std::int64_t> N,
                                std::optional<double> h, const char* mode,
                                std::int64_t replicas) {
  RecordFields f;
  f.experiment = rc.experiment;
  f.subcommand = rc.subcommand;
  f.event = event;
  f.N = N;
  f.h = h;
  f.mode = mode;
  f.kappa = rc.kappa;
  f.seed = rc.seed;
  f.replicas = replicas;
  f.config = rc.provenance;
  return f;
}

inline Json identity_probe(const RecordFields& f) {
  Json j;
  j["experiment"] = f.experiment;
  j["subcommand"] = f.subcommand;
  j["event"] = f.event;
  j["N"] = f.N ? Json(*f.N) : Json(nullptr);
  j["h"] = f.h ? Json(*f.h) : Json(nullptr);
  j["mode"] = f.mode;
  j["kappa"] = f.kappa;
  j["seed"] = f.seed;
  j["replicas"] = f.replicas;
  return j;
}

inline bool all_already_written(const RunContext& rc,
                                const std::vector<RecordFields>& probes) {
  for (const RecordFields& f : probes)
    if (!rc.writer->already_written(identity_probe(f))) return false;
  return !probes.empty();
}

class CellTimer {
 public:
  CellTimer(const RunContext& rc, const std::string& what)
      : rc_(rc), what_(what), t0_(std::chrono::steady_clock::now()) {}
  ~CellTimer() {
    const double s = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - t0_)
                         .count();
    char buf[64];
    std::snprintf(buf, sizeof buf, " %.1fs\n", s);
    (*rc_.log) << "[" << rc_.subcommand << "] " << what_ << buf;
    rc_.log->flush();
  }

 private:
  const RunContext& rc_;
  std::string what_;
  std::chrono::steady_clock::time_point t0_;
};

inline std::int64_t require_replicas(Config& cfg) {
  const std::int64_t r = cfg.require_int("replicas");
  if (r < 1) throw ConfigError("config: replicas must be >= 1");
  return r;
}

inline std::vector<std::int64_t> require_box_sizes(Config& cfg) {
  auto ns = cfg.require_int_list("N");
  for (const std::int64_t n : ns)
    if (n < 2 || n > 4096)
      throw ConfigError("config: N must lie in [2, 4096], got " +
                        std::to_string(n));
  if (ns.size() > 100) throw ConfigError("config: too many N cells");
  return ns;
}

// floor(fraction * N) with a nudge so dyadic fractions cannot land a
// hair below the intended integer.
inline int scaled_radius(double fraction, std::int64_t n) {
  return int(std::floor(fraction * double(n) + 1e-9));
}

// ---------------------------------------------------------------------
// Per-worker sampling context shared by the field-driven drivers.

struct FieldWorker {
  FieldSampler sampler;
  Percolator perc;
  std::vector<double> field;
  explicit FieldWorker(const BoxSpec& box) : sampler(box), perc(box) {}
};

using WorkerSlots = std::vector<std::unique_ptr<FieldWorker>>;

inline FieldWorker& worker_ctx(WorkerSlots& slots, const BoxSpec& box, int w) {
  auto& slot = slots[std::size_t(w)];
  if (!slot) slot = std::make_unique<FieldWorker>(box);
  return *slot;
}

// ---------------------------------------------------------------------
// one-arm-bulk: {0 <-> shell of B_{floor(rN)}} per level, both
// adjacencies when coupled, with the pathwise coupling counter.

inline void run_one_arm_bulk(RunContext& rc, Config& cfg) {
  const auto ns = require_box_sizes(cfg);
  const auto hs = cfg.require_real_list("h");
  const double r = cfg.get_real("r", 0.5);
  const RunMode mode = cfg.get_mode("mode", RunMode::coupled);
  const std::int64_t replicas = require_replicas(cfg);
  cfg.reject_unconsumed();
  if (!(r > 0.0 && r <= 0.5))
    throw ConfigError("config: r must lie in (0, 1/2]");
  for (const std::int64_t n : ns)
    if (scaled_radius(r, n) < 1)
      throw ConfigError("config: floor(r N) < 1 at N = " + std::to_string(n));

  const bool want_disc = mode != RunMode::metric;
  const bool want_met = mode != RunMode::discrete;
  const std::string event = "arm_bulk_r" + fmt_compact(r);

  for (std::size_t ni = 0; ni < ns.size(); ++ni) {
    const std::int64_t n = ns[ni];
    const BoxSpec box{int(n)};

    std::vector<RecordFields> probes;
    for (const double h : hs) {
      if (want_disc)
        probes.push_back(base_record(rc, event, n, h, "discrete", replicas));
      if (want_met)
        probes.push_back(base_record(rc, event, n, h, "metric", replicas));
    }
    if (all_already_written(rc, probes)) {
      (*rc.log) << "[" << rc.subcommand << "] N=" << n << " resumed\n";
      continue;
    }

    CellTimer timer(rc, "N=" + std::to_string(n));
    const RngStream base = cell_stream(rc.seed, rc.subcommand_id, int(ni));
    std::vector<std::vector<std::uint8_t>> disc, met;
    if (want_disc)
      disc.assign(hs.size(), std::vector<std::uint8_t>(std::size_t(replicas), 0));
    if (want_met)
      met.assign(hs.size(), std::vector<std::uint8_t>(std::size_t(replicas), 0));

    auto slots = WorkerSlots(std::size_t(rc.workers));
    parallel_for(rc.workers, replicas, [&](int w, std::int64_t i) {
      FieldWorker& ctx = worker_ctx(slots, box, w);
      const RngStream rep = spawn_replica_stream(base, std::uint64_t(i));
      RngStream fs = purpose_stream(rep, StreamPurpose::field);
      const RngStream es = purpose_stream(rep, StreamPurpose::edges);
      ctx.sampler.sample(fs, ctx.field);
      for (std::size_t hi = 0; hi < hs.size(); ++hi) {
        const double h = hs[hi];
        if (want_disc)
          disc[hi][std::size_t(i)] = ctx.perc.one_arm_bulk(
              ctx.field.data(), h, r, PercMode::discrete);
        if (want_met) {
          const OverlayView ov(box, ctx.field.data(), h, rc.kappa, es);
          met[hi][std::size_t(i)] = ctx.perc.one_arm_bulk(
              ctx.field.data(), h, r, PercMode::metric, &ov);
        }
      }
    });

    for (std::size_t hi = 0; hi < hs.size(); ++hi) {
      const double h = hs[hi];
      if (want_disc) {
        RecordFields f = base_record(rc, event, n, h, "discrete", replicas);
        std::int64_t s = 0;
        for (const std::uint8_t v : disc[hi]) s += v;
        f.successes = s;
        f.extra["r"] = r;
        rc.writer->write(record_json(f));
      }
      if (want_met) {
        RecordFields f = base_record(rc, event, n, h, "metric", replicas);
        std::int64_t s = 0;
        for (const std::uint8_t v : met[hi]) s += v;
        f.successes = s;
        f.extra["r"] = r;
        if (mode == RunMode::coupled) {
          std::int64_t bad = 0;
          for (std::int64_t i = 0; i < replicas; ++i)
            bad += met[hi][std::size_t(i)] && !disc[hi][std::size_t(i)];
          f.extra["coupling_violations"] = bad;
        }
        rc.writer->write(record_json(f));
      }
    }
  }
}

// ---------------------------------------------------------------------
// one-arm-boundary: the inner-ring arm {0 <-> ring N} under both
// adjacencies, plus the pinned-ring arm {0 <-> zero ring} in metric
// semantics, with the closed-form value attached whenever h < 0.

inline void run_one_arm_boundary(RunContext& rc, Config& cfg) {
  const auto ns = require_box_sizes(cfg);
  const auto hs = cfg.require_real_list("h");
  const RunMode mode = cfg.get_mode("mode", RunMode::coupled);
  const std::int64_t replicas = require_replicas(cfg);
  cfg.reject_unconsumed();

  const bool want_disc = mode != RunMode::metric;
  const bool want_met = mode != RunMode::discrete;

  for (std::size_t ni = 0; ni < ns.size(); ++ni) {
    const std::int64_t n = ns[ni];
    const BoxSpec box{int(n)};

    std::vector<RecordFields> probes;
    for (const double h : hs) {
      if (want_disc)
        probes.push_back(
            base_record(rc, "arm_boundary_inner", n, h, "discrete", replicas));
      if (want_met) {
        probes.push_back(
            base_record(rc, "arm_boundary_inner", n, h, "metric", replicas));
        if (h <= 0.0)
          probes.push_back(
              base_record(rc, "arm_boundary_zero", n, h, "metric", replicas));
      }
    }
    if (all_already_written(rc, probes)) {
      (*rc.log) << "[" << rc.subcommand << "] N=" << n << " resumed\n";
      continue;
    }

    CellTimer timer(rc, "N=" + std::to_string(n));
    const double g00 = green_origin_variance(box);
    const RngStream base = cell_stream(rc.seed, rc.subcommand_id, int(ni));
    std::vector<std::vector<std::uint8_t>> disc_in, met_in, met_zero;
    if (want_disc)
      disc_in.assign(hs.size(),
                     std::vector<std::uint8_t>(std::size_t(replicas), 0));
    if (want_met) {
      met_in.assign(hs.size(),
                    std::vector<std::uint8_t>(std::size_t(replicas), 0));
      met_zero.assign(hs.size(),
                      std::vector<std::uint8_t>(std::size_t(replicas), 0));
    }

    auto slots = WorkerSlots(std::size_t(rc.workers));
    parallel_for(rc.workers, replicas, [&](int w, std::int64_t i) {
      FieldWorker& ctx = worker_ctx(slots, box, w);
      const RngStream rep = spawn_replica_stream(base, std::uint64_t(i));
      RngStream fs = purpose_stream(rep, StreamPurpose::field);
      const RngStream es = purpose_stream(rep, StreamPurpose::edges);
      ctx.sampler.sample(fs, ctx.field);
      for (std::size_t hi = 0; hi < hs.size(); ++hi) {
        const double h = hs[hi];
        if (want_disc)
          disc_in[hi][std::size_t(i)] = ctx.perc.one_arm_boundary(
              ctx.field.data(), h, PercMode::discrete);
        if (want_met) {
          const OverlayView ov(box, ctx.field.data(), h, rc.kappa, es);
          met_in[hi][std::size_t(i)] = ctx.perc.one_arm_boundary(
              ctx.field.data(), h, PercMode::metric, &ov);
          if (h <= 0.0)
            met_zero[hi][std::size_t(i)] =
                ctx.perc.one_arm_zero_boundary(ctx.field.data(), h, ov);
        }
      }
    });

    for (std::size_t hi = 0; hi < hs.size(); ++hi) {
      const double h = hs[hi];
      if (want_disc) {
        RecordFields f =
            base_record(rc, "arm_boundary_inner", n, h, "discrete", replicas);
        std::int64_t s = 0;
        for (const std::uint8_t v : disc_in[hi]) s += v;
        f.successes = s;
        rc.writer->write(record_json(f));
      }
      if (want_met) {
        RecordFields f =
            base_record(rc, "arm_boundary_inner", n, h, "metric", replicas);
        std::int64_t s = 0;
        for (const std::uint8_t v : met_in[hi]) s += v;
        f.successes = s;
        if (mode == RunMode::coupled) {
          std::int64_t bad = 0;
          for (std::int64_t i = 0; i < replicas; ++i)
            bad += met_in[hi][std::size_t(i)] && !disc_in[hi][std::size_t(i)];
          f.extra["coupling_violations"] = bad;
        }
        rc.writer->write(record_json(f));
        if (h <= 0.0) {
          RecordFields z =
              base_record(rc, "arm_boundary_zero", n, h, "metric", replicas);
          std::int64_t sz = 0;
          for (const std::uint8_t v : met_zero[hi]) sz += v;
          z.successes = sz;
          z.extra["g00"] = g00;
          if (h < 0.0) z.extra["oracle"] = exact_connection_oracle(h, g00);
          rc.writer->write(record_json(z));
        }
      }
    }
  }
}

// ---------------------------------------------------------------------
// gap: coupled bulk arms plus the per-cell difference record. The
// pooled SE treats the two estimates as independent, which overstates
// the variance of the difference on coupled samples; the exact paired
// SE rides along in extra.

inline void run_gap(RunContext& rc, Config& cfg) {
  const auto ns = require_box_sizes(cfg);
  const auto hs = cfg.require_real_list("h");
  const double r = cfg.get_real("r", 0.5);
  const RunMode mode = cfg.get_mode("mode", RunMode::coupled);
  const std::int64_t replicas = require_replicas(cfg);
  cfg.reject_unconsumed();
  if (mode != RunMode::coupled)
    throw ConfigError("config: gap compares adjacencies; mode must be coupled");
  if (!(r > 0.0 && r <= 0.5))
    throw ConfigError("config: r must lie in (0, 1/2]");
  for (const std::int64_t n : ns)
    if (scaled_radius(r, n) < 1)
      throw ConfigError("config: floor(r N) < 1 at N = " + std::to_string(n));

  const std::string arm_event = "gap_arm_r" + fmt_compact(r);
  const std::string gap_event = "gap_r" + fmt_compact(r);

  for (std::size_t ni = 0; ni < ns.size(); ++ni) {
    const std::int64_t n = ns[ni];
    const BoxSpec box{int(n)};

    std::vector<RecordFields> probes;
    for (const double h : hs) {
      probes.push_back(base_record(rc, arm_event, n, h, "discrete", replicas));
      probes.push_back(base_record(rc, arm_event, n, h, "metric", replicas));
      probes.push_back(base_record(rc, gap_event, n, h, "coupled", replicas));
    }
    if (all_already_written(rc, probes)) {
      (*rc.log) << "[" << rc.subcommand << "] N=" << n << " resumed\n";
      continue;
    }

    CellTimer timer(rc, "N=" + std::to_string(n));
    const RngStream base = cell_stream(rc.seed, rc.subcommand_id, int(ni));
    std::vector<std::vector<std::uint8_t>> disc(
        hs.size(), std::vector<std::uint8_t>(std::size_t(replicas), 0));
    std::vector<std::vector<std::uint8_t>> met(
        hs.size(), std::vector<std::uint8_t>(std::size_t(replicas), 0));

    auto slots = WorkerSlots(std::size_t(rc.workers));
    parallel_for(rc.workers, replicas, [&](int w, std::int64_t i) {
      FieldWorker& ctx = worker_ctx(slots, box, w);
      const RngStream rep = spawn_replica_stream(base, std::uint64_t(i));
      RngStream fs = purpose_stream(rep, StreamPurpose::field);
      const RngStream es = purpose_stream(rep, StreamPurpose::edges);
      ctx.sampler.sample(fs, ctx.field);
      for (std::size_t hi = 0; hi < hs.size(); ++hi) {
        const double h = hs[hi];
        disc[hi][std::size_t(i)] =
            ctx.perc.one_arm_bulk(ctx.field.data(), h, r, PercMode::discrete);
        const OverlayView ov(box, ctx.field.data(), h, rc.kappa, es);
        met[hi][std::size_t(i)] =
            ctx.perc.one_arm_bulk(ctx.field.data(), h, r, PercMode::metric, &ov);
      }
    });

    for (std::size_t hi = 0; hi < hs.size(); ++hi) {
      const double h = hs[hi];
      std::int64_t sd = 0, sm = 0, opened_gap = 0;
      for (std::int64_t i = 0; i < replicas; ++i) {
        sd += disc[hi][std::size_t(i)];
        sm += met[hi][std::size_t(i)];
        opened_gap += disc[hi][std::size_t(i)] && !met[hi][std::size_t(i)];
      }
      {
        RecordFields f = base_record(rc, arm_event, n, h, "discrete", replicas);
        f.successes = sd;
        f.extra["r"] = r;
        rc.writer->write(record_json(f));
      }
      {
        RecordFields f = base_record(rc, arm_event, n, h, "metric", replicas);
        f.successes = sm;
        f.extra["r"] = r;
        std::int64_t bad = 0;
        for (std::int64_t i = 0; i < replicas; ++i)
          bad += met[hi][std::size_t(i)] && !disc[hi][std::size_t(i)];
        f.extra["coupling_violations"] = bad;
        rc.writer->write(record_json(f));
      }
      {
        const double pd = double(sd) / double(replicas);
        const double pm = double(sm) / double(replicas);
        const double sed = binomial_se(pd, std::uint64_t(replicas));
        const double sem = binomial_se(pm, std::uint64_t(replicas));
        RecordFields f = base_record(rc, gap_event, n, h, "coupled", replicas);
        f.value = pd - pm;
        f.value_se = std::sqrt(sed * sed + sem * sem);
        f.extra["norm_gap"] = (pd - pm) * std::sqrt(std::log(double(n)));
        f.extra["p_disc"] = pd;
        f.extra["p_metric"] = pm;
        f.extra["r"] = r;
        f.extra["s_disc"] = sd;
        f.extra["s_metric"] = sm;
        f.extra["se_paired"] = binomial_se(double(opened_gap) / double(replicas),
                                           std::uint64_t(replicas));
        rc.writer->write(record_json(f));
      }
    }
  }
}

// ---------------------------------------------------------------------
// circuit: open circuit in the annulus of rings (floor(alpha N),
// floor(beta N)], site adjacency only.

inline void run_circuit(RunContext& rc, Config& cfg) {
  const auto ns = require_box_sizes(cfg);
  const auto hs = cfg.require_real_list("h");
  const double alpha = cfg.get_real("alpha", 0.25);
  const double beta = cfg.get_real("beta", 0.5);
  const RunMode mode = cfg.get_mode("mode", RunMode::discrete);
  const std::int64_t replicas = require_replicas(cfg);
  cfg.reject_unconsumed();
  if (mode != RunMode::discrete)
    throw ConfigError(
        "config: circuit events use site adjacency; mode must be discrete");
  for (const std::int64_t n : ns) {
    const int K = scaled_radius(alpha, n), L = scaled_radius(beta, n);
    if (K < 1 || L <= K || L > n)
      throw ConfigError("config: need 1 <= floor(alpha N) < floor(beta N) <= N"
                        " at N = " +
                        std::to_string(n));
  }

  const std::string event =
      "circuit_a" + fmt_compact(alpha) + "_b" + fmt_compact(beta);

  for (std::size_t ni = 0; ni < ns.size(); ++ni) {
    const std::int64_t n = ns[ni];
    const BoxSpec box{int(n)};
    const int K = scaled_radius(alpha, n), L = scaled_radius(beta, n);

    std::vector<RecordFields> probes;
    for (const double h : hs)
      probes.push_back(base_record(rc, event, n, h, "discrete", replicas));
    if (all_already_written(rc, probes)) {
      (*rc.log) << "[" << rc.subcommand << "] N=" << n << " resumed\n";
      continue;
    }

    CellTimer timer(rc, "N=" + std::to_string(n));
    const RngStream base = cell_stream(rc.seed, rc.subcommand_id, int(ni));
    std::vector<std::vector<std::uint8_t>> hit(
        hs.size(), std::vector<std::uint8_t>(std::size_t(replicas), 0));

    auto slots = WorkerSlots(std::size_t(rc.workers));
    parallel_for(rc.workers, replicas, [&](int w, std::int64_t i) {
      FieldWorker& ctx = worker_ctx(slots, box, w);
      const RngStream rep = spawn_replica_stream(base, std::uint64_t(i));
      RngStream fs = purpose_stream(rep, StreamPurpose::field);
      ctx.sampler.sample(fs, ctx.field);
      for (std::size_t hi = 0; hi < hs.size(); ++hi)
        hit[hi][std::size_t(i)] =
            ctx.perc.circuit_in_annulus(ctx.field.data(), hs[hi], K, L);
    });

    for (std::size_t hi = 0; hi < hs.size(); ++hi) {
      RecordFields f = base_record(rc, event, n, hs[hi], "discrete", replicas);
      std::int64_t s = 0;
      for (const std::uint8_t v : hit[hi]) s += v;
      f.successes = s;
      f.extra["K"] = K;
      f.extra["L"] = L;
      f.extra["alpha"] = alpha;
      f.extra["beta"] = beta;
      rc.writer->write(record_json(f));
    }
  }
}

// ---------------------------------------------------------------------
// chem-dist: graph distance inside the level set from the open part of
// B_{floor(alpha N)} to the shell of B_{floor(beta N)}, conditioned on
// that box reaching the farther shell of B_{floor(gamma N)}. Reports
// the 80th-percentile distance in units of N (log N)^{1/4}.

inline void run_chem_dist(RunContext& rc, Config& cfg) {
  const auto ns = require_box_sizes(cfg);
  const auto hs = cfg.require_real_list("h");
  const double alpha = cfg.get_real("alpha", 0.125);
  const double beta = cfg.get_real("beta", 0.25);
  const double gamma = cfg.get_real("gamma", 0.5);
  const RunMode mode = cfg.get_mode("mode", RunMode::discrete);
  const std::int64_t replicas = require_replicas(cfg);
  cfg.reject_unconsumed();
  if (mode == RunMode::coupled)
    throw ConfigError(
        "config: chem-dist runs one adjacency; mode must be discrete or metric");
  for (const std::int64_t n : ns) {
    const int a = scaled_radius(alpha, n), b = scaled_radius(beta, n),
              c = scaled_radius(gamma, n);
    if (a < 0 || b <= a || c <= b || c > n)
      throw ConfigError(
          "config: need 0 <= floor(alpha N) < floor(beta N) < floor(gamma N)"
          " <= N at N = " +
          std::to_string(n));
  }

  const bool metric = mode == RunMode::metric;
  const char* mode_name = metric ? "metric" : "discrete";
  const std::string cond_event =
      "chem_cond_a" + fmt_compact(alpha) + "_g" + fmt_compact(gamma);
  const std::string dist_event =
      "chem_dist_a" + fmt_compact(alpha) + "_b" + fmt_compact(beta);

  for (std::size_t ni = 0; ni < ns.size(); ++ni) {
    const std::int64_t n = ns[ni];
    const BoxSpec box{int(n)};
    const int a = scaled_radius(alpha, n), b = scaled_radius(beta, n),
              c = scaled_radius(gamma, n);

    std::vector<RecordFields> probes;
    for (const double h : hs) {
      probes.push_back(base_record(rc, cond_event, n, h, mode_name, replicas));
      probes.push_back(base_record(rc, dist_event, n, h, mode_name, replicas));
    }
    if (all_already_written(rc, probes)) {
      (*rc.log) << "[" << rc.subcommand << "] N=" << n << " resumed\n";
      continue;
    }

    CellTimer timer(rc, "N=" + std::to_string(n));
    const RngStream base = cell_stream(rc.seed, rc.subcommand_id, int(ni));
    // -2 marks replicas failing the conditioning event
    std::vector<std::vector<std::int64_t>> dist(
        hs.size(), std::vector<std::int64_t>(std::size_t(replicas), -2));

    auto slots = WorkerSlots(std::size_t(rc.workers));
    parallel_for(rc.workers, replicas, [&](int w, std::int64_t i) {
      FieldWorker& ctx = worker_ctx(slots, box, w);
      const RngStream rep = spawn_replica_stream(base, std::uint64_t(i));
      RngStream fs = purpose_stream(rep, StreamPurpose::field);
      const RngStream es = purpose_stream(rep, StreamPurpose::edges);
      ctx.sampler.sample(fs, ctx.field);
      for (std::size_t hi = 0; hi < hs.size(); ++hi) {
        const double h = hs[hi];
        const OverlayView ov(box, ctx.field.data(), h, rc.kappa, es);
        const OverlayView* ovp = metric ? &ov : nullptr;
        const PercMode pm = metric ? PercMode::metric : PercMode::discrete;
        if (!ctx.perc.connects_box_to_shell(ctx.field.data(), h, a, c, pm, ovp))
          continue;
        const std::int64_t d =
            ctx.perc.chemical_distance(ctx.field.data(), h, a, b, pm, ovp);
        if (d < 0)
          throw std::logic_error(
              "chem-dist: conditioned replica with unreachable inner shell");
        dist[hi][std::size_t(i)] = d;
      }
    });

    for (std::size_t hi = 0; hi < hs.size(); ++hi) {
      const double h = hs[hi];
      std::vector<std::int64_t> ds;
      ds.reserve(std::size_t(replicas));
      for (const std::int64_t d : dist[hi])
        if (d >= 0) ds.push_back(d);
      std::sort(ds.begin(), ds.end());
      {
        RecordFields f = base_record(rc, cond_event, n, h, mode_name, replicas);
        f.successes = std::int64_t(ds.size());
        f.extra["a"] = a;
        f.extra["c"] = c;
        rc.writer->write(record_json(f));
      }
      {
        RecordFields f = base_record(rc, dist_event, n, h, mode_name, replicas);
        const double norm =
            double(n) * std::pow(std::log(double(n)), 0.25);
        f.extra["a"] = a;
        f.extra["b"] = b;
        f.extra["conditioned"] = std::int64_t(ds.size());
        f.extra["norm"] = norm;
        if (!ds.empty()) {
          const auto pick = [&](double q) {
            const std::size_t idx = std::size_t(
                std::max<std::int64_t>(0, std::int64_t(std::ceil(
                                              q * double(ds.size()))) -
                                              1));
            return ds[std::min(idx, ds.size() - 1)];
          };
          const std::int64_t p50 = pick(0.5), p80 = pick(0.8);
          std::int64_t above = 0;
          for (const std::int64_t d : ds) above += d > p80;
          f.value = double(p80) / norm;
          f.extra["d_p50"] = p50;
          f.extra["d_p80"] = p80;
          f.extra["d_max"] = ds.back();
          f.extra["freq_exceed"] = double(above) / double(ds.size());
        }
        rc.writer->write(record_json(f));
      }
    }
  }
}

// ---------------------------------------------------------------------
// conditional-arm: bulk arm probability given the origin value pinned
// to h + x sqrt(log N). All (h, x) pairs share the replica's base draw,
// shifted along the normalized Green column.

inline void run_conditional_arm(RunContext& rc, Config& cfg) {
  const auto ns = require_box_sizes(cfg);
  const auto hs = cfg.require_real_list("h");
  const auto xs = cfg.get_real_list("x", {0.0});
  const double r = cfg.get_real("r", 0.5);
  const RunMode mode = cfg.get_mode("mode", RunMode::coupled);
  const std::int64_t replicas = require_replicas(cfg);
  cfg.reject_unconsumed();
  if (!(r > 0.0 && r <= 0.5))
    throw ConfigError("config: r must lie in (0, 1/2]");
  for (const std::int64_t n : ns)
    if (scaled_radius(r, n) < 1)
      throw ConfigError("config: floor(r N) < 1 at N = " + std::to_string(n));

  const bool want_disc = mode != RunMode::metric;
  const bool want_met = mode != RunMode::discrete;
  const std::size_t cells = hs.size() * xs.size();

  for (std::size_t ni = 0; ni < ns.size(); ++ni) {
    const std::int64_t n = ns[ni];
    const BoxSpec box{int(n)};
    const double root_log_n = std::sqrt(std::log(double(n)));

    const auto event_of = [&](double x) {
      return "cond_arm_r" + fmt_compact(r) + "_x" + fmt_compact(x);
    };
    std::vector<RecordFields> probes;
    for (const double h : hs)
      for (const double x : xs) {
        if (want_disc)
          probes.push_back(
              base_record(rc, event_of(x), n, h, "discrete", replicas));
        if (want_met)
          probes.push_back(
              base_record(rc, event_of(x), n, h, "metric", replicas));
      }
    if (all_already_written(rc, probes)) {
      (*rc.log) << "[" << rc.subcommand << "] N=" << n << " resumed\n";
      continue;
    }

    CellTimer timer(rc, "N=" + std::to_string(n));
    const RngStream base = cell_stream(rc.seed, rc.subcommand_id, int(ni));
    std::vector<std::vector<std::uint8_t>> disc, met;
    if (want_disc)
      disc.assign(cells, std::vector<std::uint8_t>(std::size_t(replicas), 0));
    if (want_met)
      met.assign(cells, std::vector<std::uint8_t>(std::size_t(replicas), 0));

    auto slots = WorkerSlots(std::size_t(rc.workers));
    auto shifted = std::vector<std::vector<double>>(std::size_t(rc.workers));
    parallel_for(rc.workers, replicas, [&](int w, std::int64_t i) {
      FieldWorker& ctx = worker_ctx(slots, box, w);
      const std::vector<double>& ratio = ctx.sampler.origin_green_ratio();
      std::vector<double>& fv = shifted[std::size_t(w)];
      const RngStream rep = spawn_replica_stream(base, std::uint64_t(i));
      RngStream fs = purpose_stream(rep, StreamPurpose::field);
      const RngStream es = purpose_stream(rep, StreamPurpose::edges);
      ctx.sampler.sample(fs, ctx.field);
      const double phi0 = ctx.field[std::size_t(SiteIndex(box).origin())];
      fv.resize(ctx.field.size());
      for (std::size_t hi = 0; hi < hs.size(); ++hi)
        for (std::size_t xi = 0; xi < xs.size(); ++xi) {
          const double h = hs[hi];
          const double v = h + xs[xi] * root_log_n;
          const double delta = v - phi0;
          for (std::size_t k = 0; k < fv.size(); ++k)
            fv[k] = ctx.field[k] + delta * ratio[k];
          const std::size_t cell = hi * xs.size() + xi;
          if (want_disc)
            disc[cell][std::size_t(i)] =
                ctx.perc.one_arm_bulk(fv.data(), h, r, PercMode::discrete);
          if (want_met) {
            const OverlayView ov(box, fv.data(), h, rc.kappa, es);
            met[cell][std::size_t(i)] =
                ctx.perc.one_arm_bulk(fv.data(), h, r, PercMode::metric, &ov);
          }
        }
    });

    for (std::size_t hi = 0; hi < hs.size(); ++hi)
      for (std::size_t xi = 0; xi < xs.size(); ++xi) {
        const double h = hs[hi];
        const double x = xs[xi];
        const std::size_t cell = hi * xs.size() + xi;
        const double v = h + x * root_log_n;
        if (want_disc) {
          RecordFields f =
              base_record(rc, event_of(x), n, h, "discrete", replicas);
          std::int64_t s = 0;
          for (const std::uint8_t b : disc[cell]) s += b;
          f.successes = s;
          f.extra["origin_value"] = v;
          f.extra["r"] = r;
          f.extra["x"] = x;
          rc.writer->write(record_json(f));
        }
        if (want_met) {
          RecordFields f =
              base_record(rc, event_of(x), n, h, "metric", replicas);
          std::int64_t s = 0;
          for (const std::uint8_t b : met[cell]) s += b;
          f.successes = s;
          f.extra["origin_value"] = v;
          f.extra["r"] = r;
          f.extra["x"] = x;
          if (mode == RunMode::coupled) {
            std::int64_t bad = 0;
            for (std::int64_t i = 0; i < replicas; ++i)
              bad += met[cell][std::size_t(i)] && !disc[cell][std::size_t(i)];
            f.extra["coupling_violations"] = bad;
          }
          rc.writer->write(record_json(f));
        }
      }
  }
}

// ---------------------------------------------------------------------
// martingale-audit: explores from the origin, evaluates the conditional
// mean of the distant-ring observable along the trace, and aggregates
// per-step increments, between-layer variance against the harmonic-mass
// increment, and the optional-stopping balance.
//
// Replicas whose exploration strays to the observable ring contribute
// only up to the step before contact; truncation at that stopping time
// keeps every aggregated increment mean-zero.

inline void run_martingale_audit(RunContext& rc, Config& cfg) {
  const auto ns = require_box_sizes(cfg);
  const auto hs = cfg.require_real_list("h");
  const std::int64_t replicas = require_replicas(cfg);
  const std::int64_t strata = cfg.get_int("strata", 12);
  const double tol = cfg.get_real("tol", 1e-9);
  const auto radii_cfg = cfg.get_int_list("radii", {});
  const std::int64_t u_radius_cfg = cfg.get_int("u_radius", -1);
  cfg.reject_unconsumed();
  if (strata < 1 || strata > 64)
    throw ConfigError("config: strata must lie in [1, 64]");
  if (!(tol > 0.0)) throw ConfigError("config: tol must be positive");

  for (std::size_t ni = 0; ni < ns.size(); ++ni) {
    const std::int64_t n = ns[ni];
    const BoxSpec box{int(n)};

    std::vector<int> radii;
    if (radii_cfg.empty()) {
      for (const int k : {int(n) / 8, int(n) / 4, 3 * int(n) / 8, int(n) / 2})
        if (k >= 1 && (radii.empty() || k > radii.back())) radii.push_back(k);
    } else {
      for (const std::int64_t k : radii_cfg) radii.push_back(int(k));
    }
    if (radii.empty() ||
        !std::is_sorted(radii.begin(), radii.end(), std::less_equal<int>()))
      throw ConfigError("config: radii must be strictly increasing");
    const int u_radius =
        u_radius_cfg < 0 ? 3 * int(n) / 4 : int(u_radius_cfg);
    if (radii.back() + 2 > u_radius || u_radius > int(n) - 1)
      throw ConfigError(
          "config: need max(radii) + 2 <= u_radius <= N - 1 at N = " +
          std::to_string(n));

    const std::size_t nr = radii.size();
    for (const double h : hs) {
      std::vector<RecordFields> probes;
      for (std::int64_t k = 0; k < strata; ++k)
        probes.push_back(base_record(rc, "mart_inc_" + std::to_string(k), n, h,
                                     "exploration", replicas));
      for (std::size_t j = 0; j + 1 < nr; ++j)
        probes.push_back(base_record(
            rc,
            "mart_layer_" + std::to_string(radii[j]) + "_" +
                std::to_string(radii[j + 1]),
            n, h, "exploration", replicas));
      probes.push_back(base_record(rc, "mart_optional_stopping", n, h,
                                   "exploration", replicas));
      if (all_already_written(rc, probes)) {
        (*rc.log) << "[" << rc.subcommand << "] N=" << n
                  << " h=" << fmt_compact(h) << " resumed\n";
        continue;
      }

      CellTimer timer(rc, "N=" + std::to_string(n) + " h=" + fmt_compact(h));
      const RngStream base = cell_stream(rc.seed, rc.subcommand_id, int(ni));
      const double nan = std::nan("");
      std::vector<double> inc(std::size_t(replicas * strata), nan);
      std::vector<double> layer_m(std::size_t(replicas) * nr, nan);
      std::vector<double> layer_h(std::size_t(replicas) * nr, nan);
      std::vector<double> m_first(std::size_t(replicas), nan);
      std::vector<double> m_stop(std::size_t(replicas), nan);
      std::vector<std::uint8_t> frozen(std::size_t(replicas), 0);

      struct AuditWorker {
        FieldSampler sampler;
        MartingaleEvaluator eval;
        std::vector<double> field;
        AuditWorker(const BoxSpec& b, const std::vector<std::int32_t>& u,
                    double tolerance)
            : sampler(b), eval(b, u, tolerance) {}
      };
      const std::vector<std::int32_t> u_sites =
          boundary_sets(box, u_radius).outer;
      auto workers = std::vector<std::unique_ptr<AuditWorker>>(
          std::size_t(rc.workers));

      const SiteIndex idx(box);
      const std::int32_t origin = idx.origin();
      parallel_for(rc.workers, replicas, [&](int w, std::int64_t i) {
        auto& slot = workers[std::size_t(w)];
        if (!slot)
          slot = std::make_unique<AuditWorker>(box, u_sites, tol);
        AuditWorker& ctx = *slot;
        const RngStream rep = spawn_replica_stream(base, std::uint64_t(i));
        RngStream fs = purpose_stream(rep, StreamPurpose::field);
        ctx.sampler.sample(fs, ctx.field);
        const ExplorationTrace tr =
            explore(box, ctx.field, h, {origin}, radii.back());
        frozen[std::size_t(i)] = tr.frozen;

        // last step before the trace can touch the observable ring
        int max_valid = tr.steps() - 1;
        const int side = box.side(), half = box.half();
        for (int k = 0; k < tr.steps() && k <= max_valid; ++k) {
          const auto scan = [&](const std::vector<std::int32_t>& sites) {
            for (const std::int32_t off : sites) {
              const int ax = std::abs(off % side - half);
              const int ay = std::abs(off / side - half);
              if (std::max(ax, ay) >= u_radius) {
                max_valid = std::min(max_valid, k - 1);
                return;
              }
            }
          };
          scan(tr.layers[std::size_t(k)].open);
          scan(tr.layers[std::size_t(k)].closed);
        }
        if (max_valid < 0) return;

        const auto taus = stopping_times(tr, radii);
        std::set<int> eval_steps;
        const int inc_top = int(std::min<std::int64_t>(strata, max_valid));
        for (int k = 0; k <= inc_top; ++k) eval_steps.insert(k);
        for (std::size_t j = 0; j < nr; ++j)
          if (taus[j] >= 0 && taus[j] <= max_valid)
            eval_steps.insert(int(taus[j]));
        const std::int64_t tau_last = taus[nr - 1];
        const int stop_step = int(std::min<std::int64_t>(
            {tau_last >= 0 ? tau_last : std::int64_t(tr.steps()),
             strata, std::int64_t(max_valid), std::int64_t(tr.steps() - 1)}));
        eval_steps.insert(stop_step);

        ctx.eval.reset();
        std::map<int, MartingaleEvaluator::Value> at;
        for (const int k : eval_steps) at[k] = ctx.eval.evaluate(tr, k, ctx.field);

        m_first[std::size_t(i)] = at.at(0).m_bar;
        m_stop[std::size_t(i)] = at.at(stop_step).m_bar;
        for (int k = 0; k + 1 <= inc_top; ++k)
          inc[std::size_t(i * strata + k)] = at.at(k + 1).m_bar - at.at(k).m_bar;
        for (std::size_t j = 0; j < nr; ++j)
          if (taus[j] >= 0 && taus[j] <= max_valid) {
            layer_m[std::size_t(i) * nr + j] = at.at(int(taus[j])).m_bar;
            layer_h[std::size_t(i) * nr + j] = at.at(int(taus[j])).h_bar;
          }
      });

      for (std::int64_t k = 0; k < strata; ++k) {
        RecordFields f = base_record(rc, "mart_inc_" + std::to_string(k), n, h,
                                     "exploration", replicas);
        double sum = 0.0, sum2 = 0.0;
        std::int64_t m = 0;
        for (std::int64_t i = 0; i < replicas; ++i) {
          const double d = inc[std::size_t(i * strata + k)];
          if (std::isnan(d)) continue;
          sum += d;
          sum2 += d * d;
          ++m;
        }
        f.extra["contributors"] = m;
        if (m >= 2) {
          const double mean = sum / double(m);
          const double var =
              std::max(0.0, (sum2 - double(m) * mean * mean) / double(m - 1));
          f.value = mean;
          f.value_se = std::sqrt(var / double(m));
        }
        rc.writer->write(record_json(f));
      }

      for (std::size_t j = 0; j + 1 < nr; ++j) {
        RecordFields f = base_record(
            rc,
            "mart_layer_" + std::to_string(radii[j]) + "_" +
                std::to_string(radii[j + 1]),
            n, h, "exploration", replicas);
        double dm_sum = 0.0, dm_sum2 = 0.0, dh_sum = 0.0;
        std::int64_t m = 0;
        for (std::int64_t i = 0; i < replicas; ++i) {
          const double ma = layer_m[std::size_t(i) * nr + j];
          const double mb = layer_m[std::size_t(i) * nr + j + 1];
          const double ha = layer_h[std::size_t(i) * nr + j];
          const double hb = layer_h[std::size_t(i) * nr + j + 1];
          if (std::isnan(ma) || std::isnan(mb)) continue;
          const double dm = mb - ma;
          dm_sum += dm;
          dm_sum2 += dm * dm;
          dh_sum += hb - ha;
          ++m;
        }
        f.extra["contributors"] = m;
        if (m >= 2 && dh_sum > 0.0) {
          const double mean = dm_sum / double(m);
          const double var = std::max(
              0.0, (dm_sum2 - double(m) * mean * mean) / double(m - 1));
          const double dh_mean = dh_sum / double(m);
          f.value = var / dh_mean;
          f.extra["var_dm"] = var;
          f.extra["mean_dh"] = dh_mean;
        }
        rc.writer->write(record_json(f));
      }

      {
        RecordFields f = base_record(rc, "mart_optional_stopping", n, h,
                                     "exploration", replicas);
        double sum = 0.0, sum2 = 0.0;
        std::int64_t m = 0, froze = 0;
        for (std::int64_t i = 0; i < replicas; ++i) {
          froze += frozen[std::size_t(i)];
          const double d = m_stop[std::size_t(i)] - m_first[std::size_t(i)];
          if (std::isnan(d)) continue;
          sum += d;
          sum2 += d * d;
          ++m;
        }
        f.extra["contributors"] = m;
        f.extra["frozen"] = froze;
        f.extra["step_cap"] = strata;
        if (m >= 2) {
          const double mean = sum / double(m);
          const double var =
              std::max(0.0, (sum2 - double(m) * mean * mean) / double(m - 1));
          f.value = mean;
          f.value_se = std::sqrt(var / double(m));
        }
        rc.writer->write(record_json(f));
      }
    }
  }
}

// ---------------------------------------------------------------------
// psi-audit: the bridge-corrected walk against the closed form on the
// fixed slope/offset/horizon grid.

inline void run_psi_audit(RunContext& rc, Config& cfg) {
  const std::int64_t replicas = require_replicas(cfg);
  const std::int64_t steps = cfg.get_int("steps", 0);
  cfg.reject_unconsumed();
  if (steps < 0 || steps > 1 << 20)
    throw ConfigError("config: steps must lie in [0, 2^20]");

  struct Point {
    double m, b, T;
  };
  std::vector<Point> grid;
  for (const double m : {-1.0, 0.0, 1.0})
    for (const double b : {0.5, 1.0})
      for (const double T : {1.0, 4.0}) grid.push_back({m, b, T});

  std::vector<RecordFields> probes;
  const auto event_of = [&](const Point& p) {
    return "psi_m" + fmt_compact(p.m) + "_b" + fmt_compact(p.b) + "_T" +
           fmt_compact(p.T);
  };
  for (const Point& p : grid)
    probes.push_back(base_record(rc, event_of(p), std::nullopt, std::nullopt,
                                 "analytic", replicas));
  if (all_already_written(rc, probes)) {
    (*rc.log) << "[" << rc.subcommand << "] resumed\n";
    return;
  }

  CellTimer timer(rc, std::to_string(grid.size()) + " grid points");
  std::vector<McEstimate> est(grid.size());
  parallel_for(rc.workers, std::int64_t(grid.size()),
               [&](int, std::int64_t g) {
                 const Point& p = grid[std::size_t(g)];
                 est[std::size_t(g)] = brownian_line_hitting_mc(
                     PsiParams(p.m, p.b, p.T), int(steps), replicas,
                     cell_stream(rc.seed, rc.subcommand_id, int(g)));
               });

  for (std::size_t g = 0; g < grid.size(); ++g) {
    const Point& p = grid[g];
    RecordFields f = base_record(rc, event_of(p), std::nullopt, std::nullopt,
                                 "analytic", replicas);
    f.successes = std::llround(est[g].value * double(replicas));
    f.extra["T"] = p.T;
    f.extra["b"] = p.b;
    f.extra["m"] = p.m;
    f.extra["psi"] = psi(PsiParams(p.m, p.b, p.T));
    f.extra["steps"] =
        steps > 0 ? steps : std::int64_t(std::ceil(p.T * kBrownianStepsPerUnit));
    rc.writer->write(record_json(f));
  }
}

// ---------------------------------------------------------------------
// Dispatcher

inline int run_simulate(const std::string& name, Config& cfg,
                        std::ostream& log) {
  const SubcommandInfo* info = nullptr;
  for (const auto& s : subcommand_table())
    if (name == s.name) info = &s;
  if (!info) throw ConfigError("unknown subcommand '" + name + "'");

  RunContext rc;
  rc.subcommand = info->name;
  rc.subcommand_id = info->id;
  rc.experiment = cfg.get_string("experiment", info->name);
  rc.seed = cfg.get_uint("seed", 1);
  rc.kappa = cfg.get_real("kappa", kDefaultKappa);
  if (!(rc.kappa > 0.0)) throw ConfigError("config: kappa must be positive");
  rc.workers = int(cfg.get_int("workers", 1));
  if (rc.workers < 1 || rc.workers > 256)
    throw ConfigError("config: workers must lie in [1, 256]");
  const std::string out = cfg.get_string("out", "");
  for (const auto& [key, value] : cfg.provenance()) rc.provenance[key] = value;

  RecordWriter writer(out);
  rc.writer = &writer;
  rc.log = &log;

  const auto t0 = std::chrono::steady_clock::now();
  switch (info->id) {
    case 1: run_one_arm_bulk(rc, cfg); break;
    case 2: run_one_arm_boundary(rc, cfg); break;
    case 3: run_gap(rc, cfg); break;
    case 4: run_circuit(rc, cfg); break;
    case 5: run_chem_dist(rc, cfg); break;
    case 6: run_conditional_arm(rc, cfg); break;
    case 7: run_martingale_audit(rc, cfg); break;
    case 8: run_psi_audit(rc, cfg); break;
    default: throw std::logic_error("unhandled subcommand id");
  }
  const double s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  char buf[64];
  std::snprintf(buf, sizeof buf, "] total %.1fs\n", s);
  log << "[" << rc.subcommand << buf;
  log.flush();
  return 0;
}

}  // namespace gff2d