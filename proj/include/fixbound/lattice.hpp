// Copyright (c) fixbound contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Generic lattice contract and intervals over lattice elements.
//
// A lattice type L bundles the order and the algebraic operations for its
// element type. Capabilities beyond the core contract (interval
// cardinality, interval enumeration, height) are modelled as separate
// concepts so that generic code can require exactly what it uses.

#pragma once

#include <concepts>
#include <cstdint>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "fixbound/errors.hpp"

namespace fixbound {

using BigInt = boost::multiprecision::cpp_int;

/// Core lattice contract: partial order plus join/meet/bottom/top.
/// Elements must be equality-comparable values.
template <class L>
concept LatticeOps = requires(const L& lat, const typename L::element_type& x,
                              const typename L::element_type& y) {
  requires std::equality_comparable<typename L::element_type>;
  { lat.leq(x, y) } -> std::convertible_to<bool>;
  { lat.join(x, y) } -> std::same_as<typename L::element_type>;
  { lat.meet(x, y) } -> std::same_as<typename L::element_type>;
  { lat.bottom() } -> std::same_as<typename L::element_type>;
  { lat.top() } -> std::same_as<typename L::element_type>;
};

/// An ordered pair of lattice elements. Invalid pairs (lo not below hi) are
/// representable on purpose: refinement produces them as evidence that a
/// searched region contains no fixed point, so they are flagged by
/// is_valid_interval and never silently normalized.
template <class E>
struct Interval {
  E lo;
  E hi;

  bool operator==(const Interval&) const = default;
};

template <LatticeOps L>
bool is_valid_interval(const L& lat, const typename L::element_type& lo,
                       const typename L::element_type& hi) {
  return lat.leq(lo, hi);
}

template <LatticeOps L>
bool is_valid_interval(const L& lat, const Interval<typename L::element_type>& b) {
  return lat.leq(b.lo, b.hi);
}

/// x lies inside b (assumes b valid; on invalid b this is simply false for
/// every x since no element sits between the crossed endpoints).
template <LatticeOps L>
bool interval_contains(const L& lat, const Interval<typename L::element_type>& b,
                       const typename L::element_type& x) {
  return lat.leq(b.lo, x) && lat.leq(x, b.hi);
}

/// inner as a point set is contained in outer. Both intervals are expected
/// to be valid.
template <LatticeOps L>
bool interval_subset(const L& lat, const Interval<typename L::element_type>& inner,
                     const Interval<typename L::element_type>& outer) {
  return lat.leq(outer.lo, inner.lo) && lat.leq(inner.hi, outer.hi);
}

/// Smallest interval containing both arguments: a join under the precision
/// ordering on endpoint pairs.
template <LatticeOps L>
Interval<typename L::element_type> hull(const L& lat,
                                        const Interval<typename L::element_type>& a,
                                        const Interval<typename L::element_type>& b) {
  return {lat.meet(a.lo, b.lo), lat.join(a.hi, b.hi)};
}

/// Precision order on endpoint pairs: a is at least as precise as b.
/// For valid intervals this coincides with point-set inclusion, but it is
/// defined on arbitrary pairs (including invalid ones).
template <LatticeOps L>
bool precision_leq(const L& lat, const Interval<typename L::element_type>& a,
                   const Interval<typename L::element_type>& b) {
  return lat.leq(b.lo, a.lo) && lat.leq(a.hi, b.hi);
}

/// Optional capability: exact number of elements inside an interval.
template <class L>
concept IntervalCardinality =
    LatticeOps<L> && requires(const L& lat, const Interval<typename L::element_type>& b) {
      { lat.interval_cardinality(b) } -> std::same_as<BigInt>;
    };

/// Optional capability: listing every element of an interval.
template <class L>
concept IntervalEnumerable =
    LatticeOps<L> && requires(const L& lat, const Interval<typename L::element_type>& b,
                              std::uint64_t cap) {
      {
        lat.enumerate_interval(b, cap)
      } -> std::same_as<std::vector<typename L::element_type>>;
    };

/// Optional capability: height of a valid interval (length of the longest
/// chain from lo to hi).
template <class L>
concept HeightAware =
    LatticeOps<L> && requires(const L& lat, const Interval<typename L::element_type>& b) {
      { lat.interval_height(b) } -> std::same_as<std::size_t>;
    };

}  // namespace fixbound
