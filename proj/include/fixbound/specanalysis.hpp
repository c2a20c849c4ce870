// Copyright (c) fixbound contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Speculative program analysis over a minimal CFG language with a
// five-point sign domain. Speculations are (location, variable, sign)
// assertions; analyzing under a speculation set sigma strengthens the
// abstract state with sigma, and the operator Phi keeps exactly the
// speculations the resulting analysis cannot refute (or, in proved mode,
// the ones it proves). Stable speculation sets are Phi's fixed points;
// Phi is anti-monotone, so the whole refinement and branch-and-bound stack
// applies to the powerset of speculations unchanged.

#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fixbound/bnb.hpp"
#include "fixbound/errors.hpp"
#include "fixbound/powerset.hpp"
#include "fixbound/refine.hpp"

namespace fixbound::spec {

// ---------------------------------------------------------------------------
// Sign domain
// ---------------------------------------------------------------------------

/// bot < {neg, zero, pos} < top.
enum class Sign : std::uint8_t { bot, neg, zero, pos, top };

inline bool sign_leq(Sign a, Sign b) {
  return a == b || a == Sign::bot || b == Sign::top;
}

inline Sign sign_join(Sign a, Sign b) {
  if (a == b) return a;
  if (a == Sign::bot) return b;
  if (b == Sign::bot) return a;
  return Sign::top;
}

inline Sign sign_meet(Sign a, Sign b) {
  if (a == b) return a;
  if (a == Sign::top) return b;
  if (b == Sign::top) return a;
  return Sign::bot;
}

inline Sign sign_of(long long value) {
  return value < 0 ? Sign::neg : value > 0 ? Sign::pos : Sign::zero;
}

inline Sign sign_negate(Sign s) {
  switch (s) {
    case Sign::neg: return Sign::pos;
    case Sign::pos: return Sign::neg;
    default: return s;
  }
}

inline Sign sign_add(Sign a, Sign b) {
  if (a == Sign::bot || b == Sign::bot) return Sign::bot;
  if (a == Sign::zero) return b;
  if (b == Sign::zero) return a;
  if (a == b && (a == Sign::neg || a == Sign::pos)) return a;
  return Sign::top;
}

inline Sign sign_mul(Sign a, Sign b) {
  if (a == Sign::bot || b == Sign::bot) return Sign::bot;
  if (a == Sign::zero || b == Sign::zero) return Sign::zero;
  if (a == Sign::top || b == Sign::top) return Sign::top;
  return a == b ? Sign::pos : Sign::neg;
}

inline char sign_char(Sign s) {
  switch (s) {
    case Sign::bot: return '_';
    case Sign::neg: return '-';
    case Sign::zero: return '0';
    case Sign::pos: return '+';
    case Sign::top: return 'T';
  }
  return '?';
}

// ---------------------------------------------------------------------------
// Mini program
// ---------------------------------------------------------------------------

enum class GuardKind { lt_zero, eq_zero, gt_zero, ge_zero, ne_zero, le_zero };

/// Refine the sign of a guarded variable along a branch edge. Monotone;
/// over-approximates where the five-point domain cannot express the exact
/// set (top stays top for the non-strict guards).
inline Sign guard_refine(Sign s, GuardKind g) {
  if (s == Sign::bot) return Sign::bot;
  switch (g) {
    case GuardKind::lt_zero: return sign_meet(s, Sign::neg);
    case GuardKind::eq_zero: return sign_meet(s, Sign::zero);
    case GuardKind::gt_zero: return sign_meet(s, Sign::pos);
    case GuardKind::ge_zero: return s == Sign::neg ? Sign::bot : s;
    case GuardKind::le_zero: return s == Sign::pos ? Sign::bot : s;
    case GuardKind::ne_zero: return s == Sign::zero ? Sign::bot : s;
  }
  return s;
}

struct Statement {
  enum class Kind { constant, copy, add, mul, negate } kind = Kind::constant;
  std::size_t target = 0;
  long long value = 0;       // constant
  std::size_t src1 = 0;      // copy / add / mul / negate
  std::size_t src2 = 0;      // add / mul
};

struct Edge {
  std::size_t from = 0;
  std::size_t to = 0;
  std::vector<Statement> statements;
  std::optional<std::pair<std::size_t, GuardKind>> guard;  // tested variable, refinement
};

struct Assumption {
  std::size_t location = 0;
  std::size_t variable = 0;
  Sign sign = Sign::pos;  // one of neg / zero / pos

  bool operator==(const Assumption&) const = default;
};

struct MiniProgram {
  std::vector<std::string> locations;  // entry is locations[0]
  std::vector<std::string> variables;
  std::vector<Edge> edges;
  std::vector<Assumption> assumptions;  // the declared speculation universe

  std::size_t entry() const { return 0; }

  std::size_t location_index(std::string_view name) const {
    for (std::size_t i = 0; i < locations.size(); ++i)
      if (locations[i] == name) return i;
    throw usage_error("unknown location '" + std::string(name) + "'");
  }

  std::size_t variable_index(std::string_view name) const {
    for (std::size_t i = 0; i < variables.size(); ++i)
      if (variables[i] == name) return i;
    throw usage_error("unknown variable '" + std::string(name) + "'");
  }
};

/// Per-location variable signs. A location whose row contains bot for some
/// variable describes an unreachable (contradictory) state.
struct SignState {
  std::vector<std::vector<Sign>> rows;  // [location][variable]

  bool operator==(const SignState&) const = default;

  static SignState bottom(const MiniProgram& p) {
    return {std::vector<std::vector<Sign>>(p.locations.size(),
                                           std::vector<Sign>(p.variables.size(), Sign::bot))};
  }
};

inline bool state_leq(const SignState& a, const SignState& b) {
  for (std::size_t l = 0; l < a.rows.size(); ++l)
    for (std::size_t v = 0; v < a.rows[l].size(); ++v)
      if (!sign_leq(a.rows[l][v], b.rows[l][v])) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

/// Line-oriented format:
///   loc L:
///   v := 3 | v := w | v := w + u | v := w * u | v := -w
///   if v < 0 goto L1 else L2        (also = and >)
///   goto L
///   assume L v +                    (declares one speculation; - 0 + )
/// The first declared location is the entry; it must have no incoming
/// edges. A block without a terminator has no successors.
inline MiniProgram parse_mini_program(std::string_view text) {
  struct RawBlock {
    std::string name;
    std::vector<std::string> lines;
    std::size_t line_no;
  };
  std::vector<RawBlock> blocks;
  std::vector<std::tuple<std::string, std::string, std::string, std::size_t>> assumes;

  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::vector<std::string> tokens;
    for (std::string t; ls >> t;) tokens.push_back(t);
    if (tokens.empty()) continue;
    if (tokens[0] == "loc") {
      if (tokens.size() != 2 || tokens[1].back() != ':')
        throw parse_error("expected 'loc NAME:'", line_no, 1);
      blocks.push_back({tokens[1].substr(0, tokens[1].size() - 1), {}, line_no});
    } else if (tokens[0] == "assume") {
      if (tokens.size() != 4) throw parse_error("expected 'assume LOC VAR SIGN'", line_no, 1);
      assumes.emplace_back(tokens[1], tokens[2], tokens[3], line_no);
    } else {
      if (blocks.empty()) throw parse_error("statement before any 'loc'", line_no, 1);
      std::string joined;
      for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) joined += ' ';
        joined += tokens[i];
      }
      blocks.back().lines.push_back(joined);
    }
  }
  if (blocks.empty()) throw parse_error("program has no locations", 1, 1);

  MiniProgram p;
  for (const auto& b : blocks) {
    if (std::find(p.locations.begin(), p.locations.end(), b.name) != p.locations.end())
      throw parse_error("duplicate location '" + b.name + "'", b.line_no, 1);
    p.locations.push_back(b.name);
  }

  auto variable = [&](const std::string& name) {
    if (name.empty() || !std::isalpha(static_cast<unsigned char>(name[0])))
      throw usage_error("bad variable name '" + name + "'");
    auto it = std::find(p.variables.begin(), p.variables.end(), name);
    if (it != p.variables.end()) return std::size_t(it - p.variables.begin());
    p.variables.push_back(name);
    return p.variables.size() - 1;
  };

  auto is_integer = [](const std::string& s) {
    if (s.empty()) return false;
    std::size_t i = s[0] == '-' ? 1 : 0;
    if (i == s.size()) return false;
    for (; i < s.size(); ++i)
      if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    return true;
  };

  for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
    const auto& b = blocks[bi];
    std::vector<Statement> stmts;
    bool terminated = false;
    for (const auto& raw : b.lines) {
      if (terminated) throw parse_error("statement after block terminator", b.line_no, 1);
      std::istringstream ls(raw);
      std::vector<std::string> t;
      for (std::string w; ls >> w;) t.push_back(w);

      if (t[0] == "goto") {
        if (t.size() != 2) throw parse_error("expected 'goto LOC'", b.line_no, 1);
        p.edges.push_back({bi, p.location_index(t[1]), stmts, std::nullopt});
        terminated = true;
      } else if (t[0] == "if") {
        // if v <cmp> 0 goto L1 else L2
        if (t.size() != 9 || t[3] != "0" || t[4] != "goto" || t[7] != "else")
          throw parse_error("expected 'if VAR CMP 0 goto L1 else L2'", b.line_no, 1);
        const std::size_t v = variable(t[1]);
        GuardKind then_g, else_g;
        if (t[2] == "<") {
          then_g = GuardKind::lt_zero;
          else_g = GuardKind::ge_zero;
        } else if (t[2] == "=") {
          then_g = GuardKind::eq_zero;
          else_g = GuardKind::ne_zero;
        } else if (t[2] == ">") {
          then_g = GuardKind::gt_zero;
          else_g = GuardKind::le_zero;
        } else {
          throw parse_error("comparison must be one of < = >", b.line_no, 1);
        }
        p.edges.push_back({bi, p.location_index(t[5]), stmts, {{v, then_g}}});
        p.edges.push_back({bi, p.location_index(t[8]), stmts, {{v, else_g}}});
        terminated = true;
      } else if (t.size() >= 3 && t[1] == ":=") {
        Statement s;
        s.target = variable(t[0]);
        if (t.size() == 3 && is_integer(t[2])) {
          s.kind = Statement::Kind::constant;
          s.value = std::stoll(t[2]);
        } else if (t.size() == 3 && t[2][0] == '-' && t[2].size() > 1 &&
                   std::isalpha(static_cast<unsigned char>(t[2][1]))) {
          s.kind = Statement::Kind::negate;
          s.src1 = variable(t[2].substr(1));
        } else if (t.size() == 3) {
          s.kind = Statement::Kind::copy;
          s.src1 = variable(t[2]);
        } else if (t.size() == 5 && (t[3] == "+" || t[3] == "*")) {
          s.kind = t[3] == "+" ? Statement::Kind::add : Statement::Kind::mul;
          s.src1 = variable(t[2]);
          s.src2 = variable(t[4]);
        } else {
          throw parse_error("unrecognized assignment '" + raw + "'", b.line_no, 1);
        }
        stmts.push_back(s);
      } else {
        throw parse_error("unrecognized statement '" + raw + "'", b.line_no, 1);
      }
    }
    if (!terminated && !stmts.empty()) {
      // Trailing assignments without a successor would be dead; reject to
      // keep programs unambiguous.
      throw parse_error("block '" + b.name + "' has statements but no terminator", b.line_no, 1);
    }
  }

  for (const auto& e : p.edges)
    if (e.to == p.entry()) throw parse_error("entry location has an incoming edge", 1, 1);

  for (const auto& [loc, var, sign, ln] : assumes) {
    Assumption a;
    a.location = p.location_index(loc);
    a.variable = p.variable_index(var);
    if (sign == "-")
      a.sign = Sign::neg;
    else if (sign == "0")
      a.sign = Sign::zero;
    else if (sign == "+")
      a.sign = Sign::pos;
    else
      throw parse_error("speculation sign must be -, 0 or +", ln, 1);
    if (std::find(p.assumptions.begin(), p.assumptions.end(), a) == p.assumptions.end())
      p.assumptions.push_back(a);
  }
  return p;
}

// ---------------------------------------------------------------------------
// Analysis
// ---------------------------------------------------------------------------

namespace detail {

inline bool row_unreachable(const std::vector<Sign>& row) {
  for (Sign s : row)
    if (s == Sign::bot) return true;
  return false;
}

inline std::vector<Sign> apply_edge(const MiniProgram& p, const Edge& e,
                                    const std::vector<Sign>& src) {
  std::vector<Sign> row = src;
  if (row_unreachable(row)) return std::vector<Sign>(p.variables.size(), Sign::bot);
  for (const auto& s : e.statements) {
    switch (s.kind) {
      case Statement::Kind::constant: row[s.target] = sign_of(s.value); break;
      case Statement::Kind::copy: row[s.target] = row[s.src1]; break;
      case Statement::Kind::add: row[s.target] = sign_add(row[s.src1], row[s.src2]); break;
      case Statement::Kind::mul: row[s.target] = sign_mul(row[s.src1], row[s.src2]); break;
      case Statement::Kind::negate: row[s.target] = sign_negate(row[s.src1]); break;
    }
  }
  if (e.guard) {
    auto& tested = row[e.guard->first];
    tested = guard_refine(tested, e.guard->second);
    if (tested == Sign::bot) return std::vector<Sign>(p.variables.size(), Sign::bot);
  }
  return row;
}

}  // namespace detail

/// One parallel step of the forward transfer function: the entry row is
/// pinned to all-top and every other location joins the flow along its
/// incoming edges. Monotone.
inline SignState transfer(const MiniProgram& p, const SignState& s) {
  SignState out = SignState::bottom(p);
  out.rows[p.entry()].assign(p.variables.size(), Sign::top);
  for (const auto& e : p.edges) {
    if (e.to == p.entry()) continue;
    auto contrib = detail::apply_edge(p, e, s.rows[e.from]);
    auto& row = out.rows[e.to];
    for (std::size_t v = 0; v < row.size(); ++v) row[v] = sign_join(row[v], contrib[v]);
  }
  return out;
}

/// Strengthen a state with a speculation set: pointwise meet of each
/// assumed sign into its (location, variable) cell. Monotone, reductive,
/// idempotent.
inline SignState project(const MiniProgram& p, const AtomSet& sigma, SignState s) {
  if (sigma.universe()->size() != p.assumptions.size())
    throw usage_error("speculation set does not match the program's declared speculations");
  for (std::size_t k = 0; k < p.assumptions.size(); ++k) {
    if (!sigma.test(k)) continue;
    const auto& a = p.assumptions[k];
    auto& cell = s.rows[a.location][a.variable];
    cell = sign_meet(cell, a.sign);
  }
  return s;
}

/// A(sigma): least fixed point of project(sigma) o transfer, by ascending
/// iteration from all-bottom. Deterministic; the iteration order is the
/// parallel step itself.
inline SignState analyze(const MiniProgram& p, const AtomSet& sigma) {
  SignState state = SignState::bottom(p);
  // Height of the state lattice bounds the iteration count; guard anyway.
  const std::size_t runaway = 4 * (p.locations.size() * std::max<std::size_t>(p.variables.size(), 1) + 2);
  for (std::size_t k = 0; k <= runaway; ++k) {
    SignState next = project(p, sigma, transfer(p, state));
    if (next == state) return state;
    state = std::move(next);
  }
  throw invariant_error("sign analysis did not stabilize");
}

enum class OkVerdict { ok_false, ok_true, ok_unknown };

/// Compatibility of one speculation with an abstract state: refuted when
/// the cell holds a different definite sign, proven when the cell entails
/// the asserted sign (bot counts: unreachable code proves anything),
/// unknown on top.
inline OkVerdict ok_verdict(const MiniProgram& p, const SignState& s, const Assumption& a) {
  const Sign cell = s.rows[a.location][a.variable];
  if (sign_leq(cell, a.sign)) return OkVerdict::ok_true;
  if (cell == Sign::top) return OkVerdict::ok_unknown;
  return OkVerdict::ok_false;
}

enum class SafeMode {
  /// Keep speculations the state cannot refute.
  may,
  /// Keep only speculations the state proves.
  proved,
};

/// Safe (may mode) / Safe-forall (proved mode) extraction over the declared
/// speculation universe.
inline AtomSet ok_and_safe(const MiniProgram& p, const UniversePtr& assumption_universe,
                           const SignState& s, SafeMode mode) {
  AtomSet out(assumption_universe);
  for (std::size_t k = 0; k < p.assumptions.size(); ++k) {
    const auto verdict = ok_verdict(p, s, p.assumptions[k]);
    const bool keep = mode == SafeMode::may ? verdict != OkVerdict::ok_false
                                            : verdict == OkVerdict::ok_true;
    if (keep) out.set(k);
  }
  return out;
}

/// Universe of the declared speculations, one atom per assumption, named
/// "loc/var/sign" in declaration order.
inline UniversePtr assumption_universe(const MiniProgram& p) {
  std::vector<std::string> names;
  names.reserve(p.assumptions.size());
  for (const auto& a : p.assumptions)
    names.push_back(p.locations[a.location] + "/" + p.variables[a.variable] + "/" +
                    std::string(1, sign_char(a.sign)));
  return AtomUniverse::make(std::move(names));
}

/// Phi(sigma) = Safe(A(sigma)): analyze under sigma, keep what survives.
/// Anti-monotone over the speculation powerset.
inline OperatorSpec<AtomSet> phi_operator(const MiniProgram& p, const UniversePtr& universe,
                                          SafeMode mode) {
  auto prog = std::make_shared<const MiniProgram>(p);
  return {[prog, universe, mode](const AtomSet& sigma) {
            return ok_and_safe(*prog, universe, analyze(*prog, sigma), mode);
          },
          Monotonicity::antimonotone,
          mode == SafeMode::may ? "Phi_may" : "Phi_proved"};
}

struct StableAssumptionReport {
  UniversePtr universe;
  SearchState search;
  /// Each exact stable speculation set paired with its analysis.
  std::vector<std::pair<AtomSet, SignState>> stable_sets;
};

/// Search for the stable speculation sets of the program via interval
/// refinement + branch-and-bound over [empty, full universe].
inline StableAssumptionReport stable_assumption_sets(const MiniProgram& p, SafeMode mode,
                                                     const BnbConfig& cfg = {}) {
  StableAssumptionReport report;
  report.universe = assumption_universe(p);
  const PowersetLattice lat(report.universe);
  const auto phi = phi_operator(p, report.universe, mode);
  report.search = bnb_run(lat, phi, {lat.bottom(), lat.top()}, cfg);
  for (const auto& sigma : report.search.fixed_points)
    report.stable_sets.emplace_back(sigma, analyze(p, sigma));
  return report;
}

}  // namespace fixbound::spec
