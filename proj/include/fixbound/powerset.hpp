// Copyright (c) fixbound contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Finite powerset lattice over a universe of named atoms.
//
// AtomSet is the workhorse lattice element of the whole library: ground
// program interpretations, assumption sets and partition-block sets are all
// AtomSet values over different universes. Sets are fixed-width bit vectors;
// the universe is shared, immutable, and identified by object identity.

#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <boost/dynamic_bitset.hpp>

#include "fixbound/errors.hpp"
#include "fixbound/lattice.hpp"

namespace fixbound {

/// Ordered list of distinct atom names; positions are dense 0..n-1.
class AtomUniverse {
public:
  explicit AtomUniverse(std::vector<std::string> names) : m_names(std::move(names)) {
    m_index.reserve(m_names.size());
    for (std::size_t i = 0; i < m_names.size(); ++i) {
      auto [it, inserted] = m_index.emplace(m_names[i], i);
      (void)it;
      if (!inserted) throw usage_error("duplicate atom name '" + m_names[i] + "' in universe");
    }
  }

  static std::shared_ptr<const AtomUniverse> make(std::vector<std::string> names) {
    return std::make_shared<const AtomUniverse>(std::move(names));
  }

  std::size_t size() const { return m_names.size(); }
  const std::string& name(std::size_t i) const { return m_names.at(i); }
  const std::vector<std::string>& names() const { return m_names; }

  std::optional<std::size_t> find(std::string_view name) const {
    auto it = m_index.find(std::string(name));
    if (it == m_index.end()) return std::nullopt;
    return it->second;
  }

  std::size_t index_of(std::string_view name) const {
    auto i = find(name);
    if (!i) throw usage_error("unknown atom '" + std::string(name) + "'");
    return *i;
  }

private:
  std::vector<std::string> m_names;
  std::unordered_map<std::string, std::size_t> m_index;
};

using UniversePtr = std::shared_ptr<const AtomUniverse>;

/// Subset of an AtomUniverse. Value type: all operations are pure.
class AtomSet {
public:
  AtomSet() = default;

  explicit AtomSet(UniversePtr universe)
      : m_universe(std::move(universe)), m_bits(m_universe->size()) {}

  static AtomSet empty(const UniversePtr& u) { return AtomSet(u); }

  static AtomSet full(const UniversePtr& u) {
    AtomSet s(u);
    s.m_bits.set();
    return s;
  }

  static AtomSet of(const UniversePtr& u, std::initializer_list<std::string_view> names) {
    AtomSet s(u);
    for (auto n : names) s.m_bits.set(u->index_of(n));
    return s;
  }

  static AtomSet of_indices(const UniversePtr& u, const std::vector<std::size_t>& indices) {
    AtomSet s(u);
    for (auto i : indices) s.m_bits.set(i);
    return s;
  }

  const UniversePtr& universe() const { return m_universe; }

  bool test(std::size_t i) const { return m_bits.test(i); }
  AtomSet& set(std::size_t i, bool value = true) {
    m_bits.set(i, value);
    return *this;
  }

  std::size_t count() const { return m_bits.count(); }
  bool none() const { return m_bits.none(); }
  bool any() const { return m_bits.any(); }

  bool subset_of(const AtomSet& other) const {
    check_same_universe(other);
    return m_bits.is_subset_of(other.m_bits);
  }

  AtomSet operator|(const AtomSet& o) const { return combined(o, [](auto& a, auto& b) { return a | b; }); }
  AtomSet operator&(const AtomSet& o) const { return combined(o, [](auto& a, auto& b) { return a & b; }); }
  /// Set difference.
  AtomSet operator-(const AtomSet& o) const { return combined(o, [](auto& a, auto& b) { return a - b; }); }

  AtomSet complement() const {
    AtomSet r = *this;
    r.m_bits.flip();
    return r;
  }

  bool operator==(const AtomSet& o) const {
    return m_universe == o.m_universe && m_bits == o.m_bits;
  }

  /// Set positions in ascending order.
  std::vector<std::size_t> indices() const {
    std::vector<std::size_t> out;
    out.reserve(m_bits.count());
    for (auto i = m_bits.find_first(); i != boost::dynamic_bitset<>::npos; i = m_bits.find_next(i))
      out.push_back(i);
    return out;
  }

  /// Member names in universe order.
  std::vector<std::string> names() const {
    std::vector<std::string> out;
    out.reserve(m_bits.count());
    for (auto i : indices()) out.push_back(m_universe->name(i));
    return out;
  }

  std::size_t first() const { return m_bits.find_first(); }
  std::size_t next(std::size_t i) const { return m_bits.find_next(i); }
  static constexpr std::size_t npos = boost::dynamic_bitset<>::npos;

  /// Ascending lexicographic order on the index sequence. Matches the order
  /// of the serialized atom-name lists, used wherever a deterministic total
  /// order on sets is needed.
  static bool index_less(const AtomSet& a, const AtomSet& b) {
    std::size_t i = a.first(), j = b.first();
    while (i != npos && j != npos) {
      if (i != j) return i < j;
      i = a.next(i);
      j = b.next(j);
    }
    return i == npos && j != npos;
  }

  void check_same_universe(const AtomSet& other) const {
    if (m_universe != other.m_universe)
      throw usage_error("operation on atom sets from different universes");
  }

private:
  template <class F>
  AtomSet combined(const AtomSet& o, F f) const {
    check_same_universe(o);
    AtomSet r = *this;
    r.m_bits = f(m_bits, o.m_bits);
    return r;
  }

  UniversePtr m_universe;
  boost::dynamic_bitset<> m_bits;
};

using PInterval = Interval<AtomSet>;

/// Lattice contract for 2^U with subset order. Provides every optional
/// capability: height, exact cardinality and interval enumeration.
struct PowersetLattice {
  using element_type = AtomSet;

  UniversePtr universe;

  explicit PowersetLattice(UniversePtr u) : universe(std::move(u)) {}

  bool leq(const AtomSet& a, const AtomSet& b) const { return a.subset_of(b); }
  AtomSet join(const AtomSet& a, const AtomSet& b) const { return a | b; }
  AtomSet meet(const AtomSet& a, const AtomSet& b) const { return a & b; }
  AtomSet bottom() const { return AtomSet::empty(universe); }
  AtomSet top() const { return AtomSet::full(universe); }

  /// |hi \ lo| for a valid interval.
  std::size_t interval_height(const PInterval& b) const {
    if (!b.lo.subset_of(b.hi)) throw usage_error("height of an invalid interval");
    return (b.hi - b.lo).count();
  }

  /// 2^|hi \ lo| for valid intervals, 0 for invalid ones (their point set is
  /// empty). Exact arbitrary-precision arithmetic.
  BigInt interval_cardinality(const PInterval& b) const {
    if (!b.lo.subset_of(b.hi)) return 0;
    return BigInt(1) << (b.hi - b.lo).count();
  }

  /// All elements of a valid interval in a deterministic order: the free
  /// atoms (hi \ lo) are toggled in binary counting order, lowest universe
  /// index first. An invalid interval enumerates to nothing.
  std::vector<AtomSet> enumerate_interval(const PInterval& b, std::uint64_t cap) const {
    if (!b.lo.subset_of(b.hi)) return {};
    const std::vector<std::size_t> free = (b.hi - b.lo).indices();
    if (free.size() >= 64 || (std::uint64_t(1) << free.size()) > cap)
      throw resource_cap_error("interval enumeration of 2^" + std::to_string(free.size()) +
                               " elements exceeds cap " + std::to_string(cap));
    const std::uint64_t n = std::uint64_t(1) << free.size();
    std::vector<AtomSet> out;
    out.reserve(n);
    for (std::uint64_t mask = 0; mask < n; ++mask) {
      AtomSet s = b.lo;
      for (std::size_t k = 0; k < free.size(); ++k)
        if (mask & (std::uint64_t(1) << k)) s.set(free[k]);
      out.push_back(std::move(s));
    }
    return out;
  }
};

inline PowersetLattice lattice_of(const AtomSet& s) { return PowersetLattice(s.universe()); }
inline PowersetLattice lattice_of(const PInterval& b) { return PowersetLattice(b.lo.universe()); }

inline std::size_t interval_height(const PInterval& b) { return lattice_of(b).interval_height(b); }
inline BigInt interval_cardinality(const PInterval& b) { return lattice_of(b).interval_cardinality(b); }
inline std::vector<AtomSet> enumerate_interval(const PInterval& b, std::uint64_t cap) {
  return lattice_of(b).enumerate_interval(b, cap);
}

/// Policy choosing the split atom for decompose: given a valid interval of
/// non-zero height, returns a universe index from hi \ lo.
using AtomChooser = std::function<std::size_t(const PInterval&)>;

/// Default policy: lowest universe index among the free atoms.
inline AtomChooser chooser_lowest_index() {
  return [](const PInterval& b) { return (b.hi - b.lo).first(); };
}

/// Deterministic pseudo-random policy. The choice depends only on the seed
/// and the interval itself, never on call order, so runs are reproducible
/// even when intervals are processed concurrently.
inline AtomChooser chooser_seeded_random(std::uint64_t seed) {
  return [seed](const PInterval& b) {
    const auto free = (b.hi - b.lo).indices();
    std::uint64_t h = seed ^ 0x9e3779b97f4a7c15ull;
    auto mix = [&h](std::uint64_t v) {
      h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
      h *= 0xff51afd7ed558ccdull;
      h ^= h >> 33;
    };
    for (auto i : b.lo.indices()) mix(i + 1);
    mix(0);
    for (auto i : b.hi.indices()) mix(i + 1);
    return free[h % free.size()];
  };
}

/// Split a valid interval at one free atom a: ([lo, hi\{a}], [lo+{a}, hi]).
/// The parts are disjoint, adjacent, and their union is the input. A
/// singleton interval decomposes into itself twice.
inline std::pair<PInterval, PInterval> decompose(const PInterval& b, const AtomChooser& chooser) {
  const auto lat = lattice_of(b);
  if (!is_valid_interval(lat, b)) throw usage_error("decompose of an invalid interval");
  if (lat.interval_height(b) == 0) return {b, b};
  const std::size_t a = chooser(b);
  if (b.lo.test(a) || !b.hi.test(a))
    throw usage_error("decompose chooser returned an atom outside hi \\ lo");
  PInterval left{b.lo, b.hi};
  left.hi.set(a, false);
  PInterval right{b.lo, b.hi};
  right.lo.set(a, true);
  return {left, right};
}

inline std::pair<PInterval, PInterval> decompose(const PInterval& b) {
  return decompose(b, chooser_lowest_index());
}

/// Two valid intervals are adjacent when their point-set union is itself an
/// interval. Decided exactly through the cardinality identity
///   |hull(B1,B2)| == |B1| + |B2| - |B1 meet B2|
/// where the meet interval is [lo1 join lo2, hi1 meet hi2] (cardinality 0
/// when crossed). Identical intervals count as adjacent.
inline bool adjacency_check(const PInterval& b1, const PInterval& b2) {
  const auto lat = lattice_of(b1);
  b1.lo.check_same_universe(b2.lo);
  if (!is_valid_interval(lat, b1) || !is_valid_interval(lat, b2))
    throw usage_error("adjacency check on an invalid interval");
  const PInterval meet{b1.lo | b2.lo, b1.hi & b2.hi};
  const BigInt united = lat.interval_cardinality(hull(lat, b1, b2));
  return united == lat.interval_cardinality(b1) + lat.interval_cardinality(b2) -
                       lat.interval_cardinality(meet);
}

/// Deterministic total order on intervals: lexicographic on the serialized
/// (lo, hi) index sequences.
inline bool interval_less(const PInterval& a, const PInterval& b) {
  if (a.lo == b.lo) return AtomSet::index_less(a.hi, b.hi);
  return AtomSet::index_less(a.lo, b.lo);
}

}  // namespace fixbound
