#pragma once
// Layered exploration of the excursion set from a seed set, and the
// conditional-mean process it induces.
//
// The trace grows in integer steps. Layer 0 splits the seeds into open
// (value >= h) and closed sites; layer k collects the unexplored
// neighbors of the previous open layer, again split by openness. Closed
// sites join the explored set but never expand. The trace freezes when
// an open layer comes up empty, or stops early when the explored set
// reaches a configured shell.
//
// Conditioning the field on the explored values is a Dirichlet problem:
// the conditional mean at u is the discrete-harmonic extension of the
// explored values (zero on the pinning ring) evaluated at u. The
// evaluator below averages that over a fixed probe set U through the
// adjoint route: one conjugate-gradient solve for the expected visit
// counts w = G_Omega 1_U / |U| on Omega = interior \ V_k, after which
//
//   mean over U  = sum_{x in V_k} phi_x * inflow(x),
//   hit mass     = sum_{x in V_k} inflow(x),   inflow(x) = (1/4) sum_{z ~ x,
//                                                          z in Omega} w(z),
//
// because the visit-count kernel on Omega is symmetric. Shrinking Omega
// step by step lets the previous solution warm-start the next solve.

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <vector>

#include "gff2d/dirichlet.hpp"
#include "gff2d/geometry.hpp"

namespace gff2d {

struct ExplorationTrace {
  BoxSpec box;
  double h = 0.0;
  std::vector<std::int32_t> seeds;

  struct Layer {
    std::vector<std::int32_t> open;
    std::vector<std::int32_t> closed;
  };
  std::vector<Layer> layers;             // layer k joins the set at step k
  std::vector<std::int32_t> join_step;   // full grid; -1 = never explored
  bool frozen = false;                   // open frontier emptied
  bool stopped_at_target = false;        // configured shell was reached
  int stop_radius = -1;

  explicit ExplorationTrace(const BoxSpec& b) : box(b) {}
  int steps() const { return int(layers.size()); }
  bool in_set(std::int32_t off, int step) const {
    const std::int32_t j = join_step[std::size_t(off)];
    return j >= 0 && j <= step;
  }
  std::int64_t explored_after(int step) const {
    std::int64_t n = 0;
    for (int k = 0; k <= step; ++k)
      n += std::int64_t(layers[std::size_t(k)].open.size()) +
           std::int64_t(layers[std::size_t(k)].closed.size());
    return n;
  }
};

// Pure function of (field, h, seeds, stop_radius). With stop_radius = -1
// the recursion runs until it freezes; with stop_radius = k it also stops
// at the first step whose layer touches the shell of B_k (ring k+1 minus
// corners), that layer included.
inline ExplorationTrace explore(const BoxSpec& box,
                                const std::vector<double>& field, double h,
                                const std::vector<std::int32_t>& seeds,
                                int stop_radius = -1) {
  if (field.size() != std::size_t(box.total_sites()))
    throw std::invalid_argument("explore: field size mismatch");
  if (seeds.empty()) throw std::invalid_argument("explore: empty seed set");
  if (stop_radius > box.N)
    throw std::invalid_argument("explore: stop radius beyond the box");
  const SiteIndex idx(box);
  const int side = box.side(), half = box.half();
  ExplorationTrace tr(box);
  tr.h = h;
  tr.seeds = seeds;
  tr.stop_radius = stop_radius;
  tr.join_step.assign(std::size_t(box.total_sites()), -1);

  const auto on_stop_shell = [&](std::int32_t off) {
    if (stop_radius < 0) return false;
    const int x = off % side - half, y = off / side - half;
    const int ax = std::abs(x), ay = std::abs(y);
    return std::max(ax, ay) == stop_radius + 1 &&
           !(ax == stop_radius + 1 && ay == stop_radius + 1);
  };

  bool hit = false;
  ExplorationTrace::Layer layer;
  for (const std::int32_t s : seeds) {
    if (idx.ring(s) > box.N)
      throw std::invalid_argument("explore: seed outside B_N");
    if (tr.join_step[std::size_t(s)] == 0) continue;  // duplicate seed
    tr.join_step[std::size_t(s)] = 0;
    (field[std::size_t(s)] >= h ? layer.open : layer.closed).push_back(s);
    hit = hit || on_stop_shell(s);
  }
  tr.layers.push_back(std::move(layer));

  while (!hit) {
    const auto& frontier = tr.layers.back().open;
    if (frontier.empty()) {
      tr.frozen = true;
      break;
    }
    ExplorationTrace::Layer next;
    const std::int32_t step_no = std::int32_t(tr.layers.size());
    for (const std::int32_t u : frontier) {
      const int col = u % side, row = u / side;
      const std::int32_t steps[4] = {1, -1, side, -side};
      const bool ok[4] = {col + 1 < side, col > 0, row + 1 < side, row > 0};
      for (int d = 0; d < 4; ++d) {
        if (!ok[d]) continue;
        const std::int32_t v = u + steps[d];
        if (tr.join_step[std::size_t(v)] >= 0) continue;
        tr.join_step[std::size_t(v)] = step_no;
        (field[std::size_t(v)] >= h ? next.open : next.closed).push_back(v);
        hit = hit || on_stop_shell(v);
      }
    }
    if (next.open.empty() && next.closed.empty()) {
      tr.frozen = true;
      break;
    }
    tr.layers.push_back(std::move(next));
  }
  tr.stopped_at_target = hit;
  return tr;
}

// First step at which the explored set meets the shell of B_k (ring k+1
// minus corners), per requested radius; -1 when it never does.
inline std::vector<std::int64_t> stopping_times(
    const ExplorationTrace& tr, const std::vector<int>& radii) {
  const int side = tr.box.side(), half = tr.box.half();
  std::vector<std::int64_t> first(std::size_t(tr.box.N) + 1, -1);
  for (int k = 0; k < tr.steps(); ++k) {
    const auto scan = [&](const std::vector<std::int32_t>& sites) {
      for (const std::int32_t off : sites) {
        const int ax = std::abs(off % side - half);
        const int ay = std::abs(off / side - half);
        const int rho = std::max(ax, ay);
        if (rho < 1 || (ax == rho && ay == rho)) continue;
        if (first[std::size_t(rho - 1)] < 0) first[std::size_t(rho - 1)] = k;
      }
    };
    scan(tr.layers[std::size_t(k)].open);
    scan(tr.layers[std::size_t(k)].closed);
  }
  std::vector<std::int64_t> out;
  out.reserve(radii.size());
  for (const int r : radii) {
    if (r < 0 || r > tr.box.N)
      throw std::invalid_argument("stopping_times: radius outside [0, N]");
    out.push_back(first[std::size_t(r)]);
  }
  return out;
}

// Subset of I visible to walks launched from the ring at distance N: the
// sites of I that such a walk can hit first. A member either lies on
// that ring itself or has an off-I neighbor flood-reachable from it.
inline std::vector<std::int32_t> harmonic_support(
    const BoxSpec& box, const std::vector<std::int32_t>& i_sites) {
  const SiteIndex idx(box);
  const std::size_t n = std::size_t(box.total_sites());
  std::vector<std::uint8_t> in_i(n, 0);
  for (const std::int32_t off : i_sites) {
    if (idx.ring(off) > box.N)
      throw std::invalid_argument("harmonic_support: site outside B_N");
    in_i[std::size_t(off)] = 1;
  }
  const int side = box.side(), half = box.half();
  std::vector<std::uint8_t> flooded(n, 0);
  std::vector<std::int32_t> stack;
  for (const std::int32_t off : boundary_sets(box, box.N).inner)
    if (!in_i[std::size_t(off)]) {
      flooded[std::size_t(off)] = 1;
      stack.push_back(off);
    }
  while (!stack.empty()) {
    const std::int32_t u = stack.back();
    stack.pop_back();
    const int col = u % side, row = u / side;
    const std::int32_t steps[4] = {1, -1, side, -side};
    const bool ok[4] = {col + 1 < side, col > 0, row + 1 < side, row > 0};
    for (int d = 0; d < 4; ++d) {
      if (!ok[d]) continue;
      const std::int32_t v = u + steps[d];
      const int ax = std::abs(v % side - half), ay = std::abs(v / side - half);
      if (std::max(ax, ay) > box.N) continue;  // walk dies on the ring
      if (in_i[std::size_t(v)] || flooded[std::size_t(v)]) continue;
      flooded[std::size_t(v)] = 1;
      stack.push_back(v);
    }
  }
  std::vector<std::int32_t> out;
  for (const std::int32_t off : i_sites) {
    if (idx.ring(off) == box.N) {
      out.push_back(off);
      continue;
    }
    const int col = off % side, row = off / side;
    const std::int32_t steps[4] = {1, -1, side, -side};
    const bool ok[4] = {col + 1 < side, col > 0, row + 1 < side, row > 0};
    for (int d = 0; d < 4; ++d)
      if (ok[d] && flooded[std::size_t(off + steps[d])]) {
        out.push_back(off);
        break;
      }
  }
  return out;
}

// sup over the invisible part R = I \ D(I) of the chance, from U, of
// first hitting R at one given site, relative to the total chance of
// hitting I at all. Zero when every site of I is visible.
inline double xi_diagnostic(const BoxSpec& box,
                            const std::vector<std::int32_t>& u_sites,
                            const std::vector<std::int32_t>& i_sites,
                            double tol = 1e-9) {
  if (u_sites.empty() || i_sites.empty())
    throw std::invalid_argument("xi_diagnostic: empty U or I");
  const SiteIndex idx(box);
  const std::size_t n = std::size_t(box.total_sites());
  std::vector<std::uint8_t> in_i(n, 0);
  for (const std::int32_t off : i_sites) in_i[std::size_t(off)] = 1;
  for (const std::int32_t u : u_sites) {
    if (idx.ring(u) > box.N)
      throw std::invalid_argument("xi_diagnostic: U outside B_N");
    if (in_i[std::size_t(u)])
      throw std::invalid_argument("xi_diagnostic: U meets I");
  }
  const auto d_sites = harmonic_support(box, i_sites);
  std::vector<std::uint8_t> in_d(n, 0);
  for (const std::int32_t off : d_sites) in_d[std::size_t(off)] = 1;
  std::vector<std::int32_t> r_sites;
  for (const std::int32_t off : i_sites)
    if (!in_d[std::size_t(off)]) r_sites.push_back(off);
  if (r_sites.empty()) return 0.0;

  std::vector<double> rhs(n, 0.0);
  for (const std::int32_t u : u_sites) rhs[std::size_t(u)] = 1.0 / double(u_sites.size());
  const int side = box.side();
  const auto inflow = [&](const StencilProblem& prob,
                          const std::vector<double>& w, std::int32_t off) {
    double acc = 0.0;
    for (const std::int32_t d :
         {std::int32_t(1), std::int32_t(-1), std::int32_t(side), std::int32_t(-side)}) {
      const std::int32_t z = off + d;
      if (z >= 0 && z < std::int32_t(n) && prob.free_mask[std::size_t(z)])
        acc += w[std::size_t(z)];
    }
    return 0.25 * acc;
  };

  StencilProblem hidden(box);
  for (const std::int32_t off : r_sites) hidden.absorb(off);
  std::vector<double> w1(n, 0.0);
  cg_solve(hidden, rhs, w1, tol);
  double peak = 0.0;
  for (const std::int32_t off : r_sites)
    peak = std::max(peak, inflow(hidden, w1, off));

  StencilProblem whole(box);
  for (const std::int32_t off : i_sites) whole.absorb(off);
  std::vector<double> w2(n, 0.0);
  cg_solve(whole, rhs, w2, tol);
  double mass = 0.0;
  for (const std::int32_t off : i_sites) mass += inflow(whole, w2, off);
  return peak / mass;
}

// Conditional mean of the field averaged over a probe set U, given the
// values on the explored set, plus the hit mass of the explored set seen
// from U. One warm-started CG solve per requested step; steps must be
// requested in nondecreasing order within a trace, reset() starts over.
class MartingaleEvaluator {
 public:
  struct Value {
    double m_bar = 0.0;  // mean over U of the conditional mean
    double h_bar = 0.0;  // mean over U of the hit probability of V_k
    int cg_iters = 0;
  };

  MartingaleEvaluator(const BoxSpec& box, std::vector<std::int32_t> u_sites,
                      double tol = 1e-9)
      : box_(box), u_(std::move(u_sites)), tol_(tol), prob_(box) {
    if (u_.empty()) throw std::invalid_argument("MartingaleEvaluator: empty U");
    const SiteIndex idx(box_);
    rhs_.assign(std::size_t(box_.total_sites()), 0.0);
    for (const std::int32_t u : u_) {
      if (idx.ring(u) > box_.N)
        throw std::invalid_argument("MartingaleEvaluator: U outside B_N");
      rhs_[std::size_t(u)] = 1.0 / double(u_.size());
    }
    pristine_mask_ = prob_.free_mask;
    w_.assign(rhs_.size(), 0.0);
  }

  void reset() {
    prob_.free_mask = pristine_mask_;
    std::fill(w_.begin(), w_.end(), 0.0);
    absorbed_upto_ = -1;
  }

  Value evaluate(const ExplorationTrace& tr, int step,
                 const std::vector<double>& field) {
    if (step < 0 || step >= tr.steps())
      throw std::out_of_range("MartingaleEvaluator: step outside the trace");
    if (step < absorbed_upto_)
      throw std::logic_error(
          "MartingaleEvaluator: steps must be nondecreasing; call reset()");
    for (const std::int32_t u : u_)
      if (tr.in_set(u, step))
        throw std::domain_error("MartingaleEvaluator: U meets the explored set");
    for (int k = absorbed_upto_ + 1; k <= step; ++k) {
      const auto& layer = tr.layers[std::size_t(k)];
      for (const std::int32_t off : layer.open) {
        prob_.absorb(off);
        w_[std::size_t(off)] = 0.0;
      }
      for (const std::int32_t off : layer.closed) {
        prob_.absorb(off);
        w_[std::size_t(off)] = 0.0;
      }
    }
    absorbed_upto_ = step;
    Value out;
    out.cg_iters = cg_solve(prob_, rhs_, w_, tol_);
    const int side = box_.side();
    const std::int32_t total = std::int32_t(w_.size());
    for (int k = 0; k <= step; ++k) {
      const auto& layer = tr.layers[std::size_t(k)];
      const auto sweep = [&](const std::vector<std::int32_t>& sites) {
        for (const std::int32_t off : sites) {
          double acc = 0.0;
          for (const std::int32_t d : {std::int32_t(1), std::int32_t(-1),
                                       std::int32_t(side), std::int32_t(-side)}) {
            const std::int32_t z = off + d;
            if (z >= 0 && z < total && prob_.free_mask[std::size_t(z)])
              acc += w_[std::size_t(z)];
          }
          const double inflow = 0.25 * acc;
          out.m_bar += field[std::size_t(off)] * inflow;
          out.h_bar += inflow;
        }
      };
      sweep(layer.open);
      sweep(layer.closed);
    }
    return out;
  }

 private:
  BoxSpec box_;
  std::vector<std::int32_t> u_;
  double tol_;
  StencilProblem prob_;
  std::vector<std::uint8_t> pristine_mask_;
  std::vector<double> rhs_, w_;
  int absorbed_upto_ = -1;
};

// Per-step export rows for offline analysis.
struct TraceRecord {
  int step = 0;
  std::int64_t explored = 0;
  double m_bar = 0.0;
  double h_bar = 0.0;
};

inline std::vector<TraceRecord> trace_records(const ExplorationTrace& tr,
                                              MartingaleEvaluator& eval,
                                              const std::vector<double>& field) {
  eval.reset();
  std::vector<TraceRecord> out;
  out.reserve(std::size_t(tr.steps()));
  std::int64_t explored = 0;
  for (int k = 0; k < tr.steps(); ++k) {
    explored += std::int64_t(tr.layers[std::size_t(k)].open.size()) +
                std::int64_t(tr.layers[std::size_t(k)].closed.size());
    const auto v = eval.evaluate(tr, k, field);
    out.push_back(TraceRecord{k, explored, v.m_bar, v.h_bar});
  }
  return out;
}

}  // namespace gff2d
