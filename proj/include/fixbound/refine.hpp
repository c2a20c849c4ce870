// Copyright (c) fixbound contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Monotone-envelope refinement of intervals around the fixed points of a
// (possibly non-monotone) lattice operator f.
//
// Over a valid interval B = [lo, hi] the two envelopes
//
//   lower(x) = inf { f(y) | x <= y <= hi }
//   upper(x) = sup { f(y) | lo <= y <= x }
//
// are monotone, and one refinement step maps B to
//
//   F(B) = [ lfp_B(lower), gfp_B(upper) ]
//
// computed by Kleene iteration of phi_lo(x) = lo join lower(x) upward from
// lo and phi_hi(x) = hi meet upper(x) downward from hi. The empty-range
// convention (inf of nothing = top, sup of nothing = bottom) makes the
// iteration escalate when an iterate escapes B; that is what surfaces
// "no fixed point in here" as an invalid result interval instead of hiding
// it. Every fixed point of f inside B stays inside F(B), and F can only
// shrink valid results, which the branch-and-bound layer uses for pruning.

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>

#include "fixbound/errors.hpp"
#include "fixbound/lattice.hpp"

namespace fixbound {

enum class Monotonicity { monotone, antimonotone, general };

/// A lattice self-map with a trusted monotonicity tag. The tag selects
/// envelope fast paths; apply must be pure.
template <class E>
struct OperatorSpec {
  std::function<E(const E&)> apply;
  Monotonicity mono = Monotonicity::general;
  std::string name;
};

struct RefineConfig {
  static constexpr std::size_t unbounded = std::size_t(-1);

  /// Cap on refinement steps per iterate_refine call.
  std::size_t max_f_steps = unbounded;
  /// Cap on Kleene iterations per endpoint inside one refinement step.
  /// Early-stopped ascents under-approximate the lower endpoint and
  /// early-stopped descents over-approximate the upper one, so capped
  /// results are still sound and crossed endpoints remain conclusive.
  std::size_t max_kleene_steps = unbounded;
  /// Cap on the range size enumerated by envelopes of general operators.
  std::uint64_t enumeration_cap = std::uint64_t(1) << 20;
};

enum class EnvelopeSide { lower, upper };

/// Envelope value at one point. The lower side is the infimum of f over
/// [x, B.hi], the upper side the supremum over [B.lo, x]; an empty range
/// yields top / bottom respectively. Tagged monotone and anti-monotone
/// operators take closed-form fast paths; general operators enumerate the
/// range, which requires the lattice to be enumerable and the range to fit
/// under cfg-style caps.
template <LatticeOps L>
typename L::element_type envelope(const L& lat, const OperatorSpec<typename L::element_type>& op,
                                  const Interval<typename L::element_type>& b,
                                  const typename L::element_type& x, EnvelopeSide side,
                                  std::uint64_t enumeration_cap = std::uint64_t(1) << 20) {
  using E = typename L::element_type;
  const bool lower = side == EnvelopeSide::lower;
  // Range emptiness: [x, hi] for the lower side, [lo, x] for the upper.
  if (lower ? !lat.leq(x, b.hi) : !lat.leq(b.lo, x)) return lower ? lat.top() : lat.bottom();
  switch (op.mono) {
    case Monotonicity::antimonotone:
      // f is constant-extremal on the range: inf at the range top, sup at
      // the range bottom.
      return lower ? op.apply(b.hi) : op.apply(b.lo);
    case Monotonicity::monotone:
      // inf attained at x itself on [x, hi]; sup attained at x on [lo, x].
      return op.apply(x);
    case Monotonicity::general:
      break;
  }
  if constexpr (IntervalEnumerable<L>) {
    const Interval<E> range = lower ? Interval<E>{x, b.hi} : Interval<E>{b.lo, x};
    E acc = lower ? lat.top() : lat.bottom();
    for (const E& y : lat.enumerate_interval(range, enumeration_cap)) {
      const E fy = op.apply(y);
      acc = lower ? lat.meet(acc, fy) : lat.join(acc, fy);
    }
    return acc;
  } else {
    throw unsupported_capability_error(
        "envelope of a general operator needs an enumerable lattice");
  }
}

namespace detail {

/// Kleene ascent of phi(x) = seed join env(x) from seed. Stops at a fixed
/// point or after max_steps, returning the current (under-approximating)
/// iterate.
template <LatticeOps L, class Env>
typename L::element_type kleene_up(const L& lat, const typename L::element_type& seed, Env env,
                                   std::size_t max_steps) {
  auto x = seed;
  for (std::size_t k = 0; k < max_steps; ++k) {
    auto next = lat.join(seed, env(x));
    if (next == x) break;
    x = std::move(next);
  }
  return x;
}

template <LatticeOps L, class Env>
typename L::element_type kleene_down(const L& lat, const typename L::element_type& seed, Env env,
                                     std::size_t max_steps) {
  auto x = seed;
  for (std::size_t k = 0; k < max_steps; ++k) {
    auto next = lat.meet(seed, env(x));
    if (next == x) break;
    x = std::move(next);
  }
  return x;
}

}  // namespace detail

/// One refinement step with independent operators for the two endpoints
/// (the abstraction layer feeds different transformers to each side).
template <LatticeOps L>
Interval<typename L::element_type> refine_step_pair(
    const L& lat, const OperatorSpec<typename L::element_type>& lower_op,
    const OperatorSpec<typename L::element_type>& upper_op,
    const Interval<typename L::element_type>& b, const RefineConfig& cfg = {}) {
  using E = typename L::element_type;
  if (!is_valid_interval(lat, b)) throw usage_error("refine step on an invalid interval");

  E lo;
  if (lower_op.mono == Monotonicity::antimonotone) {
    // The lower envelope is constant f(hi) on non-empty ranges, so the
    // ascent needs a single application: it lands on lo join f(hi) and
    // stays there if that is still below hi, otherwise the empty-range
    // convention drives the next iterate to top.
    E one = lat.join(b.lo, lower_op.apply(b.hi));
    lo = lat.leq(one, b.hi) ? std::move(one) : lat.top();
  } else {
    lo = detail::kleene_up(
        lat, b.lo,
        [&](const E& x) { return envelope(lat, lower_op, b, x, EnvelopeSide::lower, cfg.enumeration_cap); },
        cfg.max_kleene_steps);
  }

  E hi;
  if (upper_op.mono == Monotonicity::antimonotone) {
    E one = lat.meet(b.hi, upper_op.apply(b.lo));
    hi = lat.leq(b.lo, one) ? std::move(one) : lat.bottom();
  } else {
    hi = detail::kleene_down(
        lat, b.hi,
        [&](const E& x) { return envelope(lat, upper_op, b, x, EnvelopeSide::upper, cfg.enumeration_cap); },
        cfg.max_kleene_steps);
  }

  // The result may be invalid; that is evidence, not an error.
  return {std::move(lo), std::move(hi)};
}

/// F(B): one refinement step of a single operator.
template <LatticeOps L>
Interval<typename L::element_type> refine_step(const L& lat,
                                               const OperatorSpec<typename L::element_type>& op,
                                               const Interval<typename L::element_type>& b,
                                               const RefineConfig& cfg = {}) {
  return refine_step_pair(lat, op, op, b, cfg);
}

enum class UnsoundEvidence {
  none,
  /// A refinement step produced a crossed interval.
  invalid,
  /// A refinement step produced a valid interval escaping its input.
  escaped_parent,
};

template <class E>
struct RefineOutcome {
  Interval<E> result;
  /// True when refinement reached a conclusive state: a fixed point of the
  /// (possibly step-capped) refinement, or unsoundness evidence. False only
  /// when the step budget ran out first.
  bool converged = false;
  std::size_t steps_used = 0;
  UnsoundEvidence evidence = UnsoundEvidence::none;

  bool sound_so_far() const { return evidence == UnsoundEvidence::none; }
};

/// Per-step observer; steps are numbered from 1.
template <class E>
using RefineStepCallback = std::function<void(std::size_t, const Interval<E>&)>;

/// IR(B): repeated refinement until a fixed point of the step, unsoundness
/// evidence, or the step cap. Each intermediate result that stays valid and
/// contained is itself a sound bound, so interrupting early is safe.
template <LatticeOps L>
RefineOutcome<typename L::element_type> iterate_refine(
    const L& lat, const OperatorSpec<typename L::element_type>& op,
    const Interval<typename L::element_type>& b, const RefineConfig& cfg = {},
    const RefineStepCallback<typename L::element_type>& on_step = {}) {
  using E = typename L::element_type;
  if (!is_valid_interval(lat, b)) throw usage_error("iterate_refine on an invalid interval");

  RefineOutcome<E> out{b, false, 0, UnsoundEvidence::none};
  while (out.steps_used < cfg.max_f_steps) {
    Interval<E> next = refine_step(lat, op, out.result, cfg);
    ++out.steps_used;
    if (on_step) on_step(out.steps_used, next);
    if (!is_valid_interval(lat, next)) {
      out.result = std::move(next);
      out.evidence = UnsoundEvidence::invalid;
      out.converged = true;
      return out;
    }
    if (!interval_subset(lat, next, out.result)) {
      out.result = std::move(next);
      out.evidence = UnsoundEvidence::escaped_parent;
      out.converged = true;
      return out;
    }
    if (next == out.result) {
      out.converged = true;
      return out;
    }
    out.result = std::move(next);
  }
  return out;
}

template <class E>
struct PhiResult {
  /// False proves the interval contains no fixed point of the operator;
  /// true carries no completeness claim.
  bool sound_so_far;
  RefineOutcome<E> outcome;
};

/// phi(B): IR(B) stayed valid and inside B.
template <LatticeOps L>
PhiResult<typename L::element_type> phi_check(const L& lat,
                                              const OperatorSpec<typename L::element_type>& op,
                                              const Interval<typename L::element_type>& b,
                                              const RefineConfig& cfg = {}) {
  auto outcome = iterate_refine(lat, op, b, cfg);
  return {outcome.sound_so_far(), std::move(outcome)};
}

/// For an anti-monotone f on a finite-height lattice: mu = lfp(f o f) by
/// Kleene ascent from bottom, nu = f(mu). Then f(nu) = mu and [mu, nu]
/// brackets every fixed point of f.
template <LatticeOps L>
std::pair<typename L::element_type, typename L::element_type> oscillating_pair(
    const L& lat, const OperatorSpec<typename L::element_type>& op) {
  if (op.mono != Monotonicity::antimonotone)
    throw usage_error("oscillating_pair requires an anti-monotone operator");
  auto mu = lat.bottom();
  constexpr std::size_t runaway = 1u << 20;
  for (std::size_t k = 0;; ++k) {
    if (k >= runaway)
      throw invariant_error("oscillating_pair did not stabilize; operator '" + op.name +
                            "' is not anti-monotone or the lattice has unbounded height");
    auto next = op.apply(op.apply(mu));
    if (next == mu) break;
    mu = std::move(next);
  }
  auto nu = op.apply(mu);
  return {std::move(mu), std::move(nu)};
}

/// Resume refinement from a caller-supplied tighter interval. The caller
/// asserts that the injected interval still bounds a fixed point; this is
/// not checkable here and is deliberately trusted. Only containment in the
/// current result is enforced.
template <LatticeOps L>
RefineOutcome<typename L::element_type> jump_start(
    const L& lat, const OperatorSpec<typename L::element_type>& op,
    const RefineOutcome<typename L::element_type>& current,
    const Interval<typename L::element_type>& injected, const RefineConfig& cfg = {},
    const RefineStepCallback<typename L::element_type>& on_step = {}) {
  if (!is_valid_interval(lat, injected)) throw usage_error("jump_start with an invalid interval");
  if (!interval_subset(lat, injected, current.result))
    throw usage_error("jump_start interval escapes the current bound");
  return iterate_refine(lat, op, injected, cfg, on_step);
}

}  // namespace fixbound
