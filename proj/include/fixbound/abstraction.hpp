// Copyright (c) fixbound contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Abstraction of the interval refinement through a pair of Galois
// insertions, instantiated with atom partitions of powerset lattices.
//
// A partition of the universe induces two adjunctions into the powerset of
// blocks: the over-approximating alpha_u (blocks touching a set) and the
// under-approximating alpha_l (blocks inside a set); gamma is the union of
// blocks for both. Refining in the block lattice with the best transformers
//   f_flat  = alpha_l . f . gamma      (lower endpoint)
//   f_sharp = alpha_u . f . gamma      (upper endpoint)
// never undershoots the abstraction of the concrete refinement:
// alpha(F(B)) stays below F_sharp(alpha(B)) in the precision order.

#pragma once

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "fixbound/errors.hpp"
#include "fixbound/powerset.hpp"
#include "fixbound/refine.hpp"

namespace fixbound {

/// Disjoint nonempty blocks of atoms covering a universe, in a fixed order.
/// The block powerset is itself an AtomUniverse ("b0", "b1", ...).
struct Partition {
  UniversePtr concrete;
  std::vector<AtomSet> blocks;
  UniversePtr abstract_universe;

  PowersetLattice abstract_lattice() const { return PowersetLattice(abstract_universe); }
  PowersetLattice concrete_lattice() const { return PowersetLattice(concrete); }
};

inline Partition make_partition(const UniversePtr& universe,
                                const std::vector<std::vector<std::string>>& block_names) {
  Partition part;
  part.concrete = universe;
  AtomSet covered(universe);
  std::vector<std::string> abstract_names;
  for (std::size_t k = 0; k < block_names.size(); ++k) {
    AtomSet block(universe);
    for (const auto& name : block_names[k]) block.set(universe->index_of(name));
    if (block.none()) throw usage_error("partition block " + std::to_string(k) + " is empty");
    if ((covered & block).any())
      throw usage_error("partition blocks overlap at block " + std::to_string(k));
    covered = covered | block;
    part.blocks.push_back(std::move(block));
    abstract_names.push_back("b" + std::to_string(k));
  }
  if (!(covered == AtomSet::full(universe)))
    throw usage_error("partition does not cover the universe");
  part.abstract_universe = AtomUniverse::make(std::move(abstract_names));
  return part;
}

/// Partition of singleton blocks: the abstraction is the identity.
inline Partition singleton_partition(const UniversePtr& universe) {
  std::vector<std::vector<std::string>> blocks;
  for (const auto& name : universe->names()) blocks.push_back({name});
  return make_partition(universe, blocks);
}

/// Under-approximation: blocks fully contained in s.
inline AtomSet alpha_lower(const Partition& part, const AtomSet& s) {
  AtomSet out(part.abstract_universe);
  for (std::size_t k = 0; k < part.blocks.size(); ++k)
    if (part.blocks[k].subset_of(s)) out.set(k);
  return out;
}

/// Over-approximation: blocks intersecting s.
inline AtomSet alpha_upper(const Partition& part, const AtomSet& s) {
  AtomSet out(part.abstract_universe);
  for (std::size_t k = 0; k < part.blocks.size(); ++k)
    if ((part.blocks[k] & s).any()) out.set(k);
  return out;
}

/// Concretization: union of the blocks in t. The same map is the right
/// adjoint of alpha_upper and the left adjoint of alpha_lower.
inline AtomSet gamma(const Partition& part, const AtomSet& t) {
  AtomSet out(part.concrete);
  for (std::size_t k = 0; k < part.blocks.size(); ++k)
    if (t.test(k)) out = out | part.blocks[k];
  return out;
}

inline std::pair<AtomSet, AtomSet> alpha_maps(const Partition& part, const AtomSet& s) {
  return {alpha_lower(part, s), alpha_upper(part, s)};
}

/// Abstract a concrete endpoint pair: the lower endpoint through alpha_l,
/// the upper through alpha_u. Defined on arbitrary pairs, valid or not.
inline PInterval alpha_interval(const Partition& part, const PInterval& b) {
  return {alpha_lower(part, b.lo), alpha_upper(part, b.hi)};
}

/// The adjunction maps as first-class values; both concretizations coincide
/// for partitions but are kept separate because they answer to different
/// adjunctions.
struct GaloisPair {
  std::function<AtomSet(const AtomSet&)> alpha_lower;
  std::function<AtomSet(const AtomSet&)> alpha_upper;
  std::function<AtomSet(const AtomSet&)> gamma_lower;
  std::function<AtomSet(const AtomSet&)> gamma_upper;
};

inline GaloisPair galois_pair(const Partition& part) {
  auto p = std::make_shared<const Partition>(part);
  return {[p](const AtomSet& s) { return alpha_lower(*p, s); },
          [p](const AtomSet& s) { return alpha_upper(*p, s); },
          [p](const AtomSet& t) { return gamma(*p, t); },
          [p](const AtomSet& t) { return gamma(*p, t); }};
}

/// Best correct transformers of op through the two adjunctions. The
/// monotonicity tag carries over: both adjoint legs are monotone, so
/// composition preserves the tag.
inline std::pair<OperatorSpec<AtomSet>, OperatorSpec<AtomSet>> best_transformers(
    const Partition& part, const OperatorSpec<AtomSet>& op) {
  auto p = std::make_shared<const Partition>(part);
  OperatorSpec<AtomSet> flat{
      [p, apply = op.apply](const AtomSet& t) { return alpha_lower(*p, apply(gamma(*p, t))); },
      op.mono, op.name + "_flat"};
  OperatorSpec<AtomSet> sharp{
      [p, apply = op.apply](const AtomSet& t) { return alpha_upper(*p, apply(gamma(*p, t))); },
      op.mono, op.name + "_sharp"};
  return {std::move(flat), std::move(sharp)};
}

/// F_sharp: one refinement step in the block lattice, driving the lower
/// endpoint with f_flat and the upper with f_sharp.
inline PInterval abstract_refine_step(const Partition& part, const OperatorSpec<AtomSet>& op,
                                      const PInterval& abstract_bound,
                                      const RefineConfig& cfg = {}) {
  if (abstract_bound.lo.universe() != part.abstract_universe)
    throw usage_error("abstract interval over a foreign universe");
  auto [flat, sharp] = best_transformers(part, op);
  return refine_step_pair(part.abstract_lattice(), flat, sharp, abstract_bound, cfg);
}

struct SoundnessReport {
  PInterval alpha_of_refined;   // alpha(F(B))
  PInterval abstract_refined;   // F_sharp(alpha(B))
  bool precision_ok = false;    // alpha(F(B)) <=_p F_sharp(alpha(B))
  bool corollary_ok = false;    // alpha(F(B)) valid implies F_sharp(alpha(B)) valid
};

/// Compute both routes and check the soundness inequality plus its
/// validity corollary. A violation is an internal-invariant error: the
/// construction is supposed to rule it out.
inline SoundnessReport soundness_check(const Partition& part, const OperatorSpec<AtomSet>& op,
                                       const PInterval& concrete_bound,
                                       const RefineConfig& cfg = {}) {
  const auto concrete_lat = part.concrete_lattice();
  const auto abstract_lat = part.abstract_lattice();
  if (!is_valid_interval(concrete_lat, concrete_bound))
    throw usage_error("soundness_check on an invalid concrete interval");

  SoundnessReport report;
  report.alpha_of_refined =
      alpha_interval(part, refine_step(concrete_lat, op, concrete_bound, cfg));
  report.abstract_refined =
      abstract_refine_step(part, op, alpha_interval(part, concrete_bound), cfg);
  report.precision_ok =
      precision_leq(abstract_lat, report.alpha_of_refined, report.abstract_refined);
  report.corollary_ok = !is_valid_interval(abstract_lat, report.alpha_of_refined) ||
                        is_valid_interval(abstract_lat, report.abstract_refined);
  if (!report.precision_ok || !report.corollary_ok)
    throw invariant_error("abstract refinement undershot the concrete refinement for operator '" +
                          op.name + "'");
  return report;
}

}  // namespace fixbound
