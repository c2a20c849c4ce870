// Copyright (c) fixbound contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Exact-rational walkthrough of interval refinement on a continuous
// lattice: the best-response map of two resource-claiming players over
// [0,1] x [0,1], ordered componentwise,
//
//   f(x1, x2) = (1 - x2^2, x1 / 2).
//
// f is non-monotone, but its envelopes over a box have closed forms: the
// supremum of f over [lo, x] is f(x1, lo2) and the infimum over [x, hi] is
// f(x1, hi2). The refinement trace therefore stays in exact rational
// arithmetic. The descending chain of bounds approaches the unique fixed
// point (2*sqrt(2) - 2, sqrt(2) - 1) without reaching it, so the step count
// is capped and non-convergence is reported honestly. Refining a box that
// contains no fixed point drives the lower endpoint past the upper one,
// which is the unsoundness evidence the search layers prune by;
// run_demo exercises one such box as well.

#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "fixbound/errors.hpp"

namespace fixbound::demo {

using Rational = boost::multiprecision::cpp_rational;

/// Point of the unit square, ordered componentwise. Arithmetic is exact.
struct RationalPair {
  Rational x1;
  Rational x2;

  bool operator==(const RationalPair&) const = default;
};

inline bool pair_leq(const RationalPair& a, const RationalPair& b) {
  return a.x1 <= b.x1 && a.x2 <= b.x2;
}

inline RationalPair pair_join(const RationalPair& a, const RationalPair& b) {
  return {a.x1 > b.x1 ? a.x1 : b.x1, a.x2 > b.x2 ? a.x2 : b.x2};
}

inline RationalPair pair_meet(const RationalPair& a, const RationalPair& b) {
  return {a.x1 < b.x1 ? a.x1 : b.x1, a.x2 < b.x2 ? a.x2 : b.x2};
}

inline const RationalPair& unit_bottom() {
  static const RationalPair p{0, 0};
  return p;
}

inline const RationalPair& unit_top() {
  static const RationalPair p{1, 1};
  return p;
}

/// Player 1 claims 1 - x2^2, player 2 claims x1 / 2.
inline RationalPair best_response(const RationalPair& p) {
  if (p.x1 < 0 || p.x1 > 1 || p.x2 < 0 || p.x2 > 1)
    throw usage_error("best_response outside the unit square");
  return {1 - p.x2 * p.x2, p.x1 / 2};
}

struct Bound {
  RationalPair lo;
  RationalPair hi;

  bool operator==(const Bound&) const = default;
  bool valid() const { return pair_leq(lo, hi); }
};

namespace detail {

// Closed-form envelopes over a box, with the empty-range convention that
// pushes escaped iterates to the lattice extremes.
inline RationalPair envelope_lower(const Bound& b, const RationalPair& x) {
  if (!pair_leq(x, b.hi)) return unit_top();
  return best_response({x.x1, b.hi.x2});
}

inline RationalPair envelope_upper(const Bound& b, const RationalPair& x) {
  if (!pair_leq(b.lo, x)) return unit_bottom();
  return best_response({x.x1, b.lo.x2});
}

inline constexpr std::size_t kleene_cap = 256;

}  // namespace detail

/// One refinement step: ascend to the least fixed point of
/// lo join envelope_lower, descend to the greatest fixed point of
/// hi meet envelope_upper. Both inner chains stabilize after a few steps
/// for this map; the cap is a safety net only.
inline Bound refine_step(const Bound& b) {
  if (!b.valid()) throw usage_error("refine step on an invalid bound");
  RationalPair lo = b.lo;
  for (std::size_t k = 0; k < detail::kleene_cap; ++k) {
    RationalPair next = pair_join(b.lo, detail::envelope_lower(b, lo));
    if (next == lo) break;
    lo = std::move(next);
  }
  RationalPair hi = b.hi;
  for (std::size_t k = 0; k < detail::kleene_cap; ++k) {
    RationalPair next = pair_meet(b.hi, detail::envelope_upper(b, hi));
    if (next == hi) break;
    hi = std::move(next);
  }
  return {std::move(lo), std::move(hi)};
}

struct TraceStep {
  std::size_t step = 0;
  Bound bound;
  bool valid = false;
};

struct DemoTrace {
  /// Refinement steps from the full unit square, numbered from 1.
  std::vector<TraceStep> steps;
  /// Whether the chain reached a fixed point of the step within the cap.
  bool converged = false;
  /// Refinement of a box containing no fixed point: the image crosses.
  Bound unsound_box;
  Bound unsound_image;
};

/// Run the refinement from [ (0,0), (1,1) ] for at most max_f_steps steps,
/// then refine the fixed-point-free box [ (0,0), (1/5,1/5) ] once to show
/// the invalid image.
inline DemoTrace run_demo(std::size_t max_f_steps = 2) {
  if (max_f_steps < 2) throw usage_error("run_demo needs at least two steps");
  DemoTrace trace;
  Bound current{unit_bottom(), unit_top()};
  for (std::size_t k = 1; k <= max_f_steps; ++k) {
    Bound next = refine_step(current);
    trace.steps.push_back({k, next, next.valid()});
    if (next == current) {
      trace.converged = true;
      break;
    }
    current = next;
  }

  trace.unsound_box = {{0, 0}, {Rational(1, 5), Rational(1, 5)}};
  trace.unsound_image = refine_step(trace.unsound_box);
  return trace;
}

/// "num/den" rendering used by the trace output.
inline std::string to_string(const Rational& r) {
  return numerator(r).str() + "/" + denominator(r).str();
}

}  // namespace fixbound::demo
