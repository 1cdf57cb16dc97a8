#include "nncis/synth.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

namespace nncis {
namespace {

int worker_count(int jobs, std::size_t work) {
  int n = jobs > 0 ? jobs : static_cast<int>(std::max(1U, std::thread::hardware_concurrency()));
  return static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(n), std::max<std::size_t>(1, work)));
}

/// Runs fn(i) for i in [0, count) over a pool of workers.
template <typename Fn>
void parallel_for(std::size_t count, int jobs, Fn&& fn) {
  const int workers = worker_count(jobs, count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mutex;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      try {
        for (std::size_t i = next++; i < count; i = next++) fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = count;
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

RealBox inflate_box(const RealBox& b, double margin) {
  return {(b.lo.array() - margin).matrix(), (b.hi.array() + margin).matrix()};
}

enum class BoxVerdict { Verified, Undetermined, Limit };

struct BoxResult {
  BoxVerdict verdict = BoxVerdict::Undetermined;
  Eigen::VectorXd u;
  bool solved = false;
};

BoxResult verify_box(const Mlp& m, const RealBox& box, const BoxSet& target,
                     const std::vector<OpenBox>& cover, const ControlDomain& u,
                     const SynthOptions& opts) {
  BoxResult res;
  const ReachResult full = reach_boxes(m, box, u);
  if (!target.intersects(full.output)) return res;

  const Eigen::VectorXd mid = (0.5 * (u.lo + u.hi)).cwiseMax(u.lo).cwiseMin(u.hi);
  if (opts.interval_shortcut && target.contains_box(inflate_box(full.output, opts.margin))) {
    res.verdict = BoxVerdict::Verified;
    res.u = mid;
    return res;
  }

  ReturnabilityOptions ro;
  ro.objective = opts.objective;
  ro.margin = opts.margin;
  ro.cover = CoverMode::Runs;
  const ReturnabilityModel rm = build_returnability(m, box, u, target, cover, full.bounds, ro);
  MipConfig cfg = opts.solver;
  if (opts.objective == ReturnObjective::Feasibility) cfg.feasibility_only = true;
  const MipResult sol = mip_solve(rm.model, cfg);
  res.solved = true;
  if (!sol.has_solution()) {
    res.verdict = sol.status == MipStatus::IterationLimit ? BoxVerdict::Limit
                                                           : BoxVerdict::Undetermined;
    return res;
  }
  Eigen::VectorXd uk(m.n_u());
  for (int j = 0; j < m.n_u(); ++j) {
    uk[j] = std::clamp(sol.x[static_cast<std::size_t>(rm.u[static_cast<std::size_t>(j)])], u.lo[j],
                       u.hi[j]);
  }
  // Certificate re-check with plain interval arithmetic.
  if (target.contains_box(reach_boxes(m, box, RealBox::point(uk)).output)) {
    res.verdict = BoxVerdict::Verified;
    res.u = std::move(uk);
  }
  return res;
}

}  // namespace

VerifyOutcome returnable_verification(const Mlp& m, const std::vector<GridBox>& boxes,
                                      const BoxSet& target, const ControlDomain& u,
                                      const SynthOptions& opts) {
  VerifyOutcome out;
  if (boxes.empty()) return out;
  if (target.empty()) {
    out.undetermined = boxes;
    return out;
  }
  const GridSpec& grid = target.grid();
  const auto cover = complement_open_boxes(grid, target, CoverMode::Runs);
  std::vector<BoxResult> results(boxes.size());
  parallel_for(boxes.size(), opts.jobs, [&](std::size_t i) {
    results[i] = verify_box(m, boxes[i].to_real(grid), target, cover, u, opts);
  });
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    if (results[i].solved) ++out.solver_calls;
    if (results[i].verdict == BoxVerdict::Verified) {
      out.verified.push_back({boxes[i], std::move(results[i].u)});
    } else {
      if (results[i].verdict == BoxVerdict::Limit) ++out.limit_hits;
      out.undetermined.push_back(boxes[i]);
    }
  }
  return out;
}

OneStepResult one_step_returnable_q(const Mlp& m, const BoxSet& i_set, const BoxSet& target,
                                    const ControlDomain& u, const SynthOptions& opts) {
  OneStepResult res{BoxSet(i_set.grid()), {}, {}};
  std::vector<GridBox> pending = i_set.boxes();
  while (!pending.empty()) {
    VerifyOutcome v = returnable_verification(m, pending, target, u, opts);
    res.counts.solver_calls += v.solver_calls;
    res.counts.verified += static_cast<std::int64_t>(v.verified.size());
    for (auto& e : v.verified) res.entries.push_back(std::move(e));
    std::vector<GridBox> next;
    for (const auto& b : v.undetermined) {
      if (b.is_basis()) {
        ++res.counts.discarded;
        continue;
      }
      ++res.counts.partitioned;
      auto [l, r] = partition_box(b);
      next.push_back(std::move(l));
      next.push_back(std::move(r));
    }
    std::sort(next.begin(), next.end());
    pending = std::move(next);
  }
  std::sort(res.entries.begin(), res.entries.end(),
            [](const AtlasEntry& a, const AtlasEntry& b) { return a.box < b.box; });
  std::vector<GridBox> kept;
  for (const auto& e : res.entries) kept.push_back(e.box);
  res.subset = BoxSet(i_set.grid(), std::move(kept));
  return res;
}

std::int64_t termination_bound(const BoxSet& safe) { return safe.cell_count() + 1; }

ControlAtlas synthesize_cis(const Mlp& m, const BoxSet& safe, const ControlDomain& u,
                            const SynthOptions& opts) {
  if (static_cast<int>(safe.grid().dim()) != m.n_x() || u.dim() != m.n_u()) {
    throw Error(ErrorCode::DimMismatch, "synthesize_cis: dimensions differ");
  }
  std::vector<BoxSet> history;
  if (opts.keep_history) history.push_back(safe);
  if (safe.empty()) {
    ControlAtlas atlas(safe, {}, u);
    atlas.history = std::move(history);
    return atlas;
  }
  const std::int64_t bound = termination_bound(safe);
  BoxSet current = safe;
  int iteration = 0;
  while (true) {
    ++iteration;
    OneStepResult q = current.empty() ? OneStepResult{current, {}, {}}
                                      : one_step_returnable_q(m, current, current, u, opts);
    if (opts.keep_history) history.push_back(q.subset);
    if (opts.progress) {
      SynthProgress p = q.counts;
      p.iteration = iteration;
      p.cells = q.subset.cell_count();
      opts.progress(p);
    }
    if (q.subset.same_cells(current) || iteration >= bound) {
      ControlAtlas atlas(q.subset, std::move(q.entries), u);
      atlas.iterations = iteration;
      atlas.history = std::move(history);
      return atlas;
    }
    current = std::move(q.subset);
  }
}

CertificateReport certify_atlas(const Mlp& m, const ControlAtlas& atlas) {
  CertificateReport rep;
  const auto& entries = atlas.entries();
  const auto& U = atlas.u_domain();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    ++rep.checked;
    const auto& e = entries[i];
    bool ok = e.u.size() == m.n_u() && U.contains(e.u, 1e-12);
    if (ok) {
      const RealBox out = reach_boxes(m, e.box.to_real(atlas.grid()), RealBox::point(e.u)).output;
      ok = atlas.cis().contains_box(out);
    }
    if (!ok) rep.failed.push_back(i);
  }
  return rep;
}

std::vector<Eigen::VectorXd> cell_centers(const BoxSet& s) {
  std::vector<Eigen::VectorXd> out;
  const auto& grid = s.grid();
  for (auto idx : s.indices()) {
    const auto cell = grid.cell_of(idx);
    Eigen::VectorXd c(static_cast<Eigen::Index>(cell.size()));
    for (std::size_t j = 0; j < cell.size(); ++j) {
      c[static_cast<Eigen::Index>(j)] = 0.5 * (grid.coord(j, cell[j]) + grid.coord(j, cell[j] + 1));
    }
    out.push_back(std::move(c));
  }
  return out;
}

RolloutReport closed_loop_rollouts(const Mlp& m, const ControlAtlas& atlas, int steps) {
  RolloutReport rep;
  for (const auto& x0 : cell_centers(atlas.cis())) {
    ++rep.starts;
    Eigen::VectorXd x = x0;
    bool inside = true;
    for (int k = 0; k < steps && inside; ++k) {
      const AtlasEntry* e = atlas.lookup(x);
      if (!e) {
        inside = false;
        break;
      }
      x = forward(m, x, e->u);
    }
    if (!inside || !atlas.cis().contains_point(x, 1e-9)) ++rep.exits;
  }
  return rep;
}

}  // namespace nncis
