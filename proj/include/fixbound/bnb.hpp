// Copyright (c) fixbound contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Sound branch-and-bound tightening of a converged interval approximation.
//
// The search keeps a set of valid, pairwise non-adjacent intervals whose
// union covers every fixed point of the operator inside the input bound.
// Each round decomposes every active interval into two adjacent disjoint
// halves, refines each half, prunes halves whose refinement proves them
// empty of fixed points, re-joins halves that merge back, and finalizes
// intervals that can shrink no further. The coverage invariant holds after
// every round, so interrupting at any point still yields sound output.
//
// An optional budget K caps the number of active intervals by repeatedly
// replacing the pair of intervals whose hull grows the point-set total the
// least; combined with an outer iteration cap T this bounds the number of
// refinement calls by 2KT + 1.

#pragma once

#include <algorithm>
#include <cassert>
#include <cstdint>
#include <future>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fixbound/errors.hpp"
#include "fixbound/lattice.hpp"
#include "fixbound/powerset.hpp"
#include "fixbound/refine.hpp"

namespace fixbound {

enum class StopMode {
  /// Record fixed points as they surface and keep searching.
  exhaustive,
  /// Stop the whole search at the first verified fixed point.
  first_fixed_point,
};

struct BnbConfig {
  /// Budget K on the number of active intervals; disabled when absent.
  std::optional<std::size_t> budget;
  /// Cap T on outer iterations; unbounded when absent.
  std::optional<std::size_t> outer_cap;
  RefineConfig ir;
  StopMode stop_mode = StopMode::exhaustive;
  /// Split-atom policy for decompose; lowest universe index by default.
  AtomChooser chooser;
  /// Drop finalized singleton intervals whose point is not a fixed point.
  bool discard_nonfixed_singletons = true;
  /// When a decomposition merges straight back, retry with the remaining
  /// split atoms before finalizing as stalled. Off by default.
  bool resplit_on_stall = false;
  /// Refine decomposed halves concurrently. Results are reduced in
  /// canonical interval order either way, so output is identical.
  bool parallel = false;
  /// Assert the search invariants after every outer iteration (validity,
  /// containment in the refined input, pairwise non-adjacency, exact
  /// cardinality accounting, budget accounting).
  bool check_invariants = false;
};

struct SearchState {
  std::vector<PInterval> active;
  std::vector<PInterval> final_bounds;
  /// Final intervals that stalled (their decomposition merged back); a
  /// jump-start with outside knowledge is the way to push past these.
  std::vector<PInterval> stalled;
  /// Verified fixed points discovered via endpoint checks and finalized
  /// singletons.
  std::vector<AtomSet> fixed_points;
  std::size_t outer_iterations = 0;
  std::size_t ir_calls = 0;
  /// True when the search ran until no active interval remained.
  bool completed = false;
};

/// Shrink `bounds` to at most K intervals by repeatedly replacing the pair
/// whose hull minimizes |hull| - |B1| - |B2| (exact big-int arithmetic).
/// Ties pick the pair that is smallest in the canonical interval order. The
/// union of the point sets only ever grows.
inline std::vector<PInterval> budget_enforce(std::vector<PInterval> bounds, std::size_t k) {
  if (k == 0) throw usage_error("budget must be at least 1");
  if (bounds.size() <= k) return bounds;
  const auto lat = lattice_of(bounds.front());
  std::sort(bounds.begin(), bounds.end(), interval_less);
  while (bounds.size() > k) {
    std::size_t best_i = 0, best_j = 1;
    std::optional<BigInt> best_delta;
    for (std::size_t i = 0; i + 1 < bounds.size(); ++i) {
      for (std::size_t j = i + 1; j < bounds.size(); ++j) {
        BigInt delta = lat.interval_cardinality(hull(lat, bounds[i], bounds[j])) -
                       lat.interval_cardinality(bounds[i]) - lat.interval_cardinality(bounds[j]);
        if (!best_delta || delta < *best_delta) {
          best_delta = std::move(delta);
          best_i = i;
          best_j = j;
        }
      }
    }
    PInterval merged = hull(lat, bounds[best_i], bounds[best_j]);
    bounds.erase(bounds.begin() + best_j);
    bounds.erase(bounds.begin() + best_i);
    auto pos = std::lower_bound(bounds.begin(), bounds.end(), merged, interval_less);
    bounds.insert(pos, std::move(merged));
  }
  return bounds;
}

/// Repeatedly union adjacent pairs (the union of an adjacent pair is their
/// hull) until no two intervals are adjacent. Deterministic: scans in
/// canonical order and restarts after each merge.
inline std::vector<PInterval> merge_adjacent(std::vector<PInterval> bounds) {
  std::sort(bounds.begin(), bounds.end(), interval_less);
  bool merged = true;
  while (merged) {
    merged = false;
    for (std::size_t i = 0; !merged && i + 1 < bounds.size(); ++i) {
      for (std::size_t j = i + 1; !merged && j < bounds.size(); ++j) {
        if (!adjacency_check(bounds[i], bounds[j])) continue;
        PInterval joined = hull(lattice_of(bounds[i]), bounds[i], bounds[j]);
        bounds.erase(bounds.begin() + j);
        bounds.erase(bounds.begin() + i);
        auto pos = std::lower_bound(bounds.begin(), bounds.end(), joined, interval_less);
        bounds.insert(pos, std::move(joined));
        merged = true;
      }
    }
  }
  return bounds;
}

namespace detail {

struct BnbContext {
  const PowersetLattice& lat;
  const OperatorSpec<AtomSet>& op;
  const BnbConfig& cfg;
  SearchState& st;
  PInterval root;
  bool stop_all = false;

  /// Record x when it is a genuine fixed point. Returns whether it was one.
  bool note_fixed_point(const AtomSet& x) {
    if (!(op.apply(x) == x)) return false;
    if (std::find(st.fixed_points.begin(), st.fixed_points.end(), x) == st.fixed_points.end()) {
      st.fixed_points.push_back(x);
      std::sort(st.fixed_points.begin(), st.fixed_points.end(), AtomSet::index_less);
    }
    if (cfg.stop_mode == StopMode::first_fixed_point) stop_all = true;
    return true;
  }

  void assert_invariants(const std::vector<PInterval>& active) const {
    for (const auto& b : active) {
      assert(is_valid_interval(lat, b));
      assert(interval_subset(lat, b, root));
    }
    for (const auto& b : st.final_bounds) assert(interval_subset(lat, b, root));
    if (!cfg.budget) {
      for (std::size_t i = 0; i + 1 < active.size(); ++i)
        for (std::size_t j = i + 1; j < active.size(); ++j)
          assert(!adjacency_check(active[i], active[j]));
      // Exact search-space accounting: with disjoint decomposition the live
      // point sets never exceed the refined input.
      BigInt sum = 0;
      for (const auto& b : active) sum += lat.interval_cardinality(b);
      for (const auto& b : st.final_bounds) sum += lat.interval_cardinality(b);
      assert(sum <= lat.interval_cardinality(root));
    } else {
      assert(active.size() <= *cfg.budget);
    }
  }
};

struct ChildResult {
  PhiResult<AtomSet> phi;
};

/// Decompose + refine both halves of one interval. Pure; safe to run
/// concurrently across intervals.
struct IntervalWork {
  PInterval parent;
  bool singleton = false;
  std::pair<PInterval, PInterval> halves;
  ChildResult left, right;
};

inline IntervalWork process_interval(const PowersetLattice& lat, const OperatorSpec<AtomSet>& op,
                                     const BnbConfig& cfg, const AtomChooser& chooser,
                                     const PInterval& b) {
  IntervalWork work;
  work.parent = b;
  auto [b1, b2] = decompose(b, chooser);
  if (b1 == b || b2 == b) {
    work.singleton = true;
    return work;
  }
  work.halves = {b1, b2};
  work.left.phi = phi_check(lat, op, b1, cfg.ir);
  work.right.phi = phi_check(lat, op, b2, cfg.ir);
  return work;
}

}  // namespace detail

/// Run the branch-and-bound search for the fixed points of op inside the
/// caller-asserted sound bound b_input ([bottom, top] always qualifies).
/// The returned state covers every fixed point of op in b_input with
/// final_bounds plus active; with the default disjoint decomposition each
/// fixed point lies in exactly one of them. Caps produce a valid anytime
/// state with completed = false.
inline SearchState bnb_run(const PowersetLattice& lat, const OperatorSpec<AtomSet>& op,
                           const PInterval& b_input, const BnbConfig& cfg = {}) {
  if (!is_valid_interval(lat, b_input)) throw usage_error("bnb_run on an invalid interval");
  if (cfg.budget && *cfg.budget == 0) throw usage_error("budget must be at least 1");

  SearchState st;
  const AtomChooser chooser = cfg.chooser ? cfg.chooser : chooser_lowest_index();

  auto r0 = iterate_refine(lat, op, b_input, cfg.ir);
  ++st.ir_calls;
  if (!r0.sound_so_far()) {
    // The input interval provably contains no fixed point.
    st.completed = true;
    return st;
  }

  detail::BnbContext ctx{lat, op, cfg, st, r0.result, false};
  ctx.note_fixed_point(r0.result.lo);
  if (!(r0.result.lo == r0.result.hi)) ctx.note_fixed_point(r0.result.hi);

  std::vector<PInterval> bounds{r0.result};
  while (!bounds.empty() && !ctx.stop_all) {
    if (cfg.outer_cap && st.outer_iterations >= *cfg.outer_cap) break;
    ++st.outer_iterations;
    std::sort(bounds.begin(), bounds.end(), interval_less);

    // Per-interval work is pure; the reduction below is sequential in
    // canonical order, so parallel and sequential runs are bit-identical.
    std::vector<detail::IntervalWork> work(bounds.size());
    if (cfg.parallel && bounds.size() > 1) {
      std::vector<std::future<detail::IntervalWork>> futures;
      futures.reserve(bounds.size());
      for (const auto& b : bounds)
        futures.push_back(std::async(std::launch::async, [&lat, &op, &cfg, &chooser, b] {
          return detail::process_interval(lat, op, cfg, chooser, b);
        }));
      for (std::size_t i = 0; i < futures.size(); ++i) work[i] = futures[i].get();
    } else {
      for (std::size_t i = 0; i < bounds.size(); ++i)
        work[i] = detail::process_interval(lat, op, cfg, chooser, bounds[i]);
    }

    std::vector<PInterval> new_bounds;
    for (auto& w : work) {
      if (ctx.stop_all) {
        // Unprocessed intervals stay active so coverage is preserved.
        new_bounds.push_back(w.parent);
        continue;
      }
      if (w.singleton) {
        const bool is_fp = ctx.note_fixed_point(w.parent.lo);
        if (is_fp || !cfg.discard_nonfixed_singletons) st.final_bounds.push_back(w.parent);
        continue;
      }

      st.ir_calls += 2;
      std::vector<PInterval> keep;
      for (const auto* child : {&w.left, &w.right})
        if (child->phi.sound_so_far) keep.push_back(child->phi.outcome.result);
      for (const auto& k : keep) {
        ctx.note_fixed_point(k.lo);
        if (!(k.lo == k.hi)) ctx.note_fixed_point(k.hi);
      }
      if (keep.size() == 2 && adjacency_check(keep[0], keep[1])) {
        PInterval joined = hull(lat, keep[0], keep[1]);
        keep.assign(1, std::move(joined));
      }

      if (keep.size() == 1 && keep[0] == w.parent) {
        // Stalled: the decomposition refined to nothing and merged back.
        bool progressed = false;
        if (cfg.resplit_on_stall) {
          for (auto a : (w.parent.hi - w.parent.lo).indices()) {
            auto alt = decompose(w.parent, [a](const PInterval&) { return a; });
            auto l = phi_check(lat, op, alt.first, cfg.ir);
            auto r = phi_check(lat, op, alt.second, cfg.ir);
            st.ir_calls += 2;
            std::vector<PInterval> alt_keep;
            if (l.sound_so_far) alt_keep.push_back(l.outcome.result);
            if (r.sound_so_far) alt_keep.push_back(r.outcome.result);
            if (alt_keep.size() == 2 && adjacency_check(alt_keep[0], alt_keep[1]))
              alt_keep.assign(1, hull(lat, alt_keep[0], alt_keep[1]));
            if (alt_keep.size() == 1 && alt_keep[0] == w.parent) continue;
            for (auto& k : alt_keep) {
              ctx.note_fixed_point(k.lo);
              if (!(k.lo == k.hi)) ctx.note_fixed_point(k.hi);
              new_bounds.push_back(std::move(k));
              if (cfg.budget) new_bounds = budget_enforce(std::move(new_bounds), *cfg.budget);
            }
            progressed = true;
            break;
          }
        }
        if (!progressed) {
          st.final_bounds.push_back(w.parent);
          st.stalled.push_back(w.parent);
        }
        continue;
      }

      for (auto& k : keep) {
        new_bounds.push_back(std::move(k));
        if (cfg.budget) new_bounds = budget_enforce(std::move(new_bounds), *cfg.budget);
      }
    }

    bounds = std::move(new_bounds);
    if (cfg.check_invariants && !ctx.stop_all) ctx.assert_invariants(bounds);
  }

  std::sort(bounds.begin(), bounds.end(), interval_less);
  std::sort(st.final_bounds.begin(), st.final_bounds.end(), interval_less);
  std::sort(st.stalled.begin(), st.stalled.end(), interval_less);
  st.active = std::move(bounds);
  st.completed = st.active.empty() && !ctx.stop_all;
  return st;
}

}  // namespace fixbound
