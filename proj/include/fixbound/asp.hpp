// Copyright (c) fixbound contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Ground answer-set-programming stack: a gringo-like input subset, naive
// grounding, the Gelfond-Lifschitz reduct and its operator, a brute-force
// stable-model oracle, well-founded bounds, partial evaluation and
// assumption emission for downstream solvers.

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
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <variant>
#include <vector>

#include "fixbound/errors.hpp"
#include "fixbound/powerset.hpp"
#include "fixbound/refine.hpp"

namespace fixbound::asp {

// ---------------------------------------------------------------------------
// Non-ground representation
// ---------------------------------------------------------------------------

enum class TermKind { integer, symbol, variable, range };

struct Term {
  TermKind kind = TermKind::symbol;
  long long value = 0;  // integer value, or range lower bound
  long long hi = 0;     // range upper bound
  std::string text;     // symbol or variable name
};

struct TermAtom {
  std::string pred;
  std::vector<Term> args;
  std::size_t line = 0;
  std::size_t column = 0;
};

enum class CmpOp { lt, le, gt, ge, eq, ne };

struct BodyLiteral {
  bool negated = false;
  TermAtom atom;
};

struct BodyComparison {
  Term lhs;
  CmpOp op = CmpOp::lt;
  Term rhs;
};

/// One statement: a fact (no body), a rule, or a constraint (no head).
struct RuleAst {
  std::optional<TermAtom> head;
  std::vector<BodyLiteral> literals;
  std::vector<BodyComparison> comparisons;
  std::size_t line = 0;
  std::size_t column = 0;

  bool is_constraint() const { return !head.has_value(); }
  bool is_fact() const { return head && literals.empty() && comparisons.empty(); }
};

struct NonGroundProgram {
  std::vector<RuleAst> rules;
};

// ---------------------------------------------------------------------------
// Ground representation
// ---------------------------------------------------------------------------

struct GroundRule {
  std::size_t head = 0;
  AtomSet pos;
  AtomSet neg;

  bool operator==(const GroundRule&) const = default;
};

/// Atoms with this prefix encode headless constraints and are hidden from
/// user-facing reports.
inline constexpr std::string_view fresh_atom_prefix = "__c";

inline bool is_fresh_name(std::string_view name) {
  return name.substr(0, fresh_atom_prefix.size()) == fresh_atom_prefix;
}

struct GroundProgram {
  UniversePtr universe;
  std::vector<GroundRule> rules;
  /// Constraint-encoding atoms of this universe.
  AtomSet fresh;

  PowersetLattice lattice() const { return PowersetLattice(universe); }
};

// ---------------------------------------------------------------------------
// Lexer / parser
// ---------------------------------------------------------------------------

namespace detail {

enum class Tok { ident, variable, integer, dot, dotdot, comma, lparen, rparen, impl, cmp, not_kw, end };

struct Token {
  Tok kind = Tok::end;
  std::string text;
  long long value = 0;
  CmpOp cmp = CmpOp::lt;
  std::size_t line = 1;
  std::size_t column = 1;
};

class Lexer {
public:
  explicit Lexer(std::string_view text) : m_text(text) { advance(); }

  const Token& peek() const { return m_current; }

  Token next() {
    Token t = m_current;
    advance();
    return t;
  }

private:
  void advance() {
    skip_ws();
    m_current = Token{};
    m_current.line = m_line;
    m_current.column = m_col;
    if (m_pos >= m_text.size()) return;  // Tok::end

    const char c = m_text[m_pos];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t start = m_pos;
      while (m_pos < m_text.size() && std::isdigit(static_cast<unsigned char>(m_text[m_pos]))) bump();
      m_current.kind = Tok::integer;
      m_current.text = std::string(m_text.substr(start, m_pos - start));
      m_current.value = std::stoll(m_current.text);
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = m_pos;
      while (m_pos < m_text.size() &&
             (std::isalnum(static_cast<unsigned char>(m_text[m_pos])) || m_text[m_pos] == '_'))
        bump();
      m_current.text = std::string(m_text.substr(start, m_pos - start));
      if (m_current.text == "not") {
        m_current.kind = Tok::not_kw;
      } else if (std::isupper(static_cast<unsigned char>(c)) || c == '_') {
        m_current.kind = Tok::variable;
      } else {
        m_current.kind = Tok::ident;
      }
      return;
    }
    switch (c) {
      case '.':
        if (m_pos + 1 < m_text.size() && m_text[m_pos + 1] == '.') {
          bump();
          bump();
          m_current.kind = Tok::dotdot;
        } else {
          bump();
          m_current.kind = Tok::dot;
        }
        return;
      case ',': bump(); m_current.kind = Tok::comma; return;
      case '(': bump(); m_current.kind = Tok::lparen; return;
      case ')': bump(); m_current.kind = Tok::rparen; return;
      case ':':
        bump();
        if (m_pos < m_text.size() && m_text[m_pos] == '-') {
          bump();
          m_current.kind = Tok::impl;
          return;
        }
        throw parse_error("expected ':-'", m_current.line, m_current.column);
      case '<':
        bump();
        m_current.kind = Tok::cmp;
        m_current.cmp = take('=') ? CmpOp::le : CmpOp::lt;
        return;
      case '>':
        bump();
        m_current.kind = Tok::cmp;
        m_current.cmp = take('=') ? CmpOp::ge : CmpOp::gt;
        return;
      case '=':
        bump();
        m_current.kind = Tok::cmp;
        m_current.cmp = CmpOp::eq;
        return;
      case '!':
        bump();
        if (take('=')) {
          m_current.kind = Tok::cmp;
          m_current.cmp = CmpOp::ne;
          return;
        }
        throw parse_error("expected '!='", m_current.line, m_current.column);
      default:
        throw parse_error(std::string("unexpected character '") + c + "'", m_line, m_col);
    }
  }

  bool take(char c) {
    if (m_pos < m_text.size() && m_text[m_pos] == c) {
      bump();
      return true;
    }
    return false;
  }

  void skip_ws() {
    while (m_pos < m_text.size()) {
      const char c = m_text[m_pos];
      if (c == '%') {
        while (m_pos < m_text.size() && m_text[m_pos] != '\n') bump();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        bump();
      } else {
        break;
      }
    }
  }

  void bump() {
    if (m_text[m_pos] == '\n') {
      ++m_line;
      m_col = 1;
    } else {
      ++m_col;
    }
    ++m_pos;
  }

  std::string_view m_text;
  std::size_t m_pos = 0;
  std::size_t m_line = 1;
  std::size_t m_col = 1;
  Token m_current;
};

}  // namespace detail

/// Parse the gringo-like subset:
///   rule       := atom ":-" body "." | atom "."
///   constraint := ":-" body "."
///   body       := literal ("," literal)*
///   literal    := ["not"] atom | term cmp term        cmp in < <= > >= = !=
///   atom       := ident ["(" term ("," term)* ")"]
/// Integer ranges lo..hi are allowed in fact arguments only. Every variable
/// of a rule must occur in a positive, non-comparison body literal.
inline NonGroundProgram parse_program(std::string_view text) {
  detail::Lexer lex(text);
  NonGroundProgram program;

  auto parse_term = [&](bool allow_range) -> Term {
    auto t = lex.next();
    Term term;
    switch (t.kind) {
      case detail::Tok::integer:
        term.kind = TermKind::integer;
        term.value = t.value;
        if (lex.peek().kind == detail::Tok::dotdot) {
          if (!allow_range) throw parse_error("integer range only allowed in facts", t.line, t.column);
          lex.next();
          auto hi = lex.next();
          if (hi.kind != detail::Tok::integer)
            throw parse_error("expected integer after '..'", hi.line, hi.column);
          term.kind = TermKind::range;
          term.hi = hi.value;
          if (term.hi < term.value)
            throw parse_error("empty integer range", t.line, t.column);
        }
        return term;
      case detail::Tok::ident:
        term.kind = TermKind::symbol;
        term.text = t.text;
        return term;
      case detail::Tok::variable:
        term.kind = TermKind::variable;
        term.text = t.text;
        return term;
      default:
        throw parse_error("expected a term", t.line, t.column);
    }
  };

  auto parse_atom = [&](bool allow_range) -> TermAtom {
    auto t = lex.next();
    if (t.kind != detail::Tok::ident) throw parse_error("expected an atom", t.line, t.column);
    TermAtom atom;
    atom.pred = t.text;
    atom.line = t.line;
    atom.column = t.column;
    if (lex.peek().kind == detail::Tok::lparen) {
      lex.next();
      while (true) {
        atom.args.push_back(parse_term(allow_range));
        auto sep = lex.next();
        if (sep.kind == detail::Tok::rparen) break;
        if (sep.kind != detail::Tok::comma)
          throw parse_error("expected ',' or ')' in argument list", sep.line, sep.column);
      }
    }
    return atom;
  };

  auto parse_body = [&](RuleAst& rule) {
    while (true) {
      const auto& t = lex.peek();
      if (t.kind == detail::Tok::not_kw) {
        lex.next();
        rule.literals.push_back({true, parse_atom(false)});
      } else if (t.kind == detail::Tok::variable || t.kind == detail::Tok::integer) {
        BodyComparison cmp;
        cmp.lhs = parse_term(false);
        auto opTok = lex.next();
        if (opTok.kind != detail::Tok::cmp)
          throw parse_error("expected a comparison operator", opTok.line, opTok.column);
        cmp.op = opTok.cmp;
        cmp.rhs = parse_term(false);
        rule.comparisons.push_back(std::move(cmp));
      } else {
        TermAtom atom = parse_atom(false);
        if (atom.args.empty() && lex.peek().kind == detail::Tok::cmp) {
          // Bare identifier followed by a comparison: it was a symbol term.
          auto opTok = lex.next();
          BodyComparison cmp;
          cmp.lhs = Term{TermKind::symbol, 0, 0, atom.pred};
          cmp.op = opTok.cmp;
          cmp.rhs = parse_term(false);
          rule.comparisons.push_back(std::move(cmp));
        } else {
          rule.literals.push_back({false, std::move(atom)});
        }
      }
      if (lex.peek().kind == detail::Tok::comma) {
        lex.next();
        continue;
      }
      break;
    }
  };

  while (lex.peek().kind != detail::Tok::end) {
    RuleAst rule;
    rule.line = lex.peek().line;
    rule.column = lex.peek().column;
    if (lex.peek().kind == detail::Tok::impl) {
      lex.next();
      parse_body(rule);
    } else {
      rule.head = parse_atom(/*allow_range=*/true);
      if (lex.peek().kind == detail::Tok::impl) {
        // Ranges never appear in rule heads; re-check now that we know.
        for (const auto& arg : rule.head->args)
          if (arg.kind == TermKind::range)
            throw parse_error("integer range only allowed in facts", rule.head->line,
                              rule.head->column);
        lex.next();
        parse_body(rule);
      }
    }
    auto dot = lex.next();
    if (dot.kind != detail::Tok::dot) throw parse_error("expected '.'", dot.line, dot.column);
    program.rules.push_back(std::move(rule));
  }

  // Safety: every variable must be bound by a positive body literal.
  for (const auto& rule : program.rules) {
    std::set<std::string> bound;
    for (const auto& lit : rule.literals)
      if (!lit.negated)
        for (const auto& arg : lit.atom.args)
          if (arg.kind == TermKind::variable) bound.insert(arg.text);
    auto check = [&](const Term& term) {
      if (term.kind == TermKind::variable && !bound.count(term.text))
        throw parse_error("unsafe variable '" + term.text + "' in rule", rule.line, rule.column);
    };
    if (rule.head)
      for (const auto& arg : rule.head->args) check(arg);
    for (const auto& lit : rule.literals)
      if (lit.negated)
        for (const auto& arg : lit.atom.args) check(arg);
    for (const auto& cmp : rule.comparisons) {
      check(cmp.lhs);
      check(cmp.rhs);
    }
  }
  return program;
}

// ---------------------------------------------------------------------------
// Grounding
// ---------------------------------------------------------------------------

struct GroundingCaps {
  std::uint64_t max_instances = 1'000'000;
};

namespace detail {

/// Ground constant: integer or symbol. Integers order before symbols;
/// integers numerically, symbols lexicographically.
struct Constant {
  bool is_int = true;
  long long value = 0;
  std::string text;

  bool operator==(const Constant&) const = default;
  bool operator<(const Constant& o) const {
    if (is_int != o.is_int) return is_int;
    if (is_int) return value < o.value;
    return text < o.text;
  }

  std::string render() const { return is_int ? std::to_string(value) : text; }
};

inline bool eval_cmp(const Constant& a, CmpOp op, const Constant& b) {
  switch (op) {
    case CmpOp::lt: return a < b;
    case CmpOp::le: return a < b || a == b;
    case CmpOp::gt: return b < a;
    case CmpOp::ge: return b < a || a == b;
    case CmpOp::eq: return a == b;
    case CmpOp::ne: return !(a == b);
  }
  return false;
}

struct NamedRule {
  std::optional<std::string> head;
  std::vector<std::string> pos;
  std::vector<std::string> neg;
};

inline std::string render_ground_atom(const TermAtom& atom,
                                      const std::map<std::string, Constant>& binding) {
  std::string out = atom.pred;
  if (!atom.args.empty()) {
    out += '(';
    for (std::size_t i = 0; i < atom.args.size(); ++i) {
      if (i) out += ',';
      const Term& t = atom.args[i];
      switch (t.kind) {
        case TermKind::integer: out += std::to_string(t.value); break;
        case TermKind::symbol: out += t.text; break;
        case TermKind::variable: out += binding.at(t.text).render(); break;
        case TermKind::range:
          throw invariant_error("range term survived grounding");
      }
    }
    out += ')';
  }
  return out;
}

/// Build a GroundProgram from named rules: the universe lists atoms by
/// first occurrence (head, then positive body, then negative body, in rule
/// order); duplicate rules are dropped.
inline GroundProgram assemble(const std::vector<NamedRule>& named) {
  std::vector<std::string> names;
  std::unordered_map<std::string, std::size_t> index;
  auto intern = [&](const std::string& n) {
    auto [it, inserted] = index.emplace(n, names.size());
    if (inserted) names.push_back(n);
    return it->second;
  };
  struct IndexedRule {
    std::size_t head;
    std::vector<std::size_t> pos, neg;
  };
  std::vector<IndexedRule> indexed;
  indexed.reserve(named.size());
  for (const auto& r : named) {
    IndexedRule ir;
    ir.head = intern(*r.head);
    for (const auto& a : r.pos) ir.pos.push_back(intern(a));
    for (const auto& a : r.neg) ir.neg.push_back(intern(a));
    indexed.push_back(std::move(ir));
  }

  GroundProgram p;
  p.universe = AtomUniverse::make(names);
  p.fresh = AtomSet::empty(p.universe);
  for (std::size_t i = 0; i < names.size(); ++i)
    if (is_fresh_name(names[i])) p.fresh.set(i);

  std::set<std::vector<std::size_t>> seen;  // rule dedup key
  for (const auto& ir : indexed) {
    GroundRule rule{ir.head, AtomSet::empty(p.universe), AtomSet::empty(p.universe)};
    std::vector<std::size_t> key{ir.head, std::size_t(-1)};
    auto pos = ir.pos, neg = ir.neg;
    std::sort(pos.begin(), pos.end());
    std::sort(neg.begin(), neg.end());
    key.insert(key.end(), pos.begin(), pos.end());
    key.push_back(std::size_t(-2));
    key.insert(key.end(), neg.begin(), neg.end());
    if (!seen.insert(std::move(key)).second) continue;
    for (auto a : ir.pos) rule.pos.set(a);
    for (auto a : ir.neg) rule.neg.set(a);
    p.rules.push_back(std::move(rule));
  }
  return p;
}

}  // namespace detail

/// Naive grounding: integer ranges expand, every rule variable is
/// instantiated over all constants occurring in the program, comparison
/// literals are evaluated and unsatisfied instances dropped, and duplicate
/// rules and atoms are merged. Headless constraints become
///   __ck <- body, not __ck
/// with one fresh atom per constraint statement.
inline GroundProgram ground(const NonGroundProgram& program, const GroundingCaps& caps = {}) {
  using detail::Constant;

  // Range facts expand first.
  std::vector<RuleAst> statements;
  for (const auto& rule : program.rules) {
    if (rule.is_fact()) {
      bool has_range = false;
      for (const auto& arg : rule.head->args) has_range |= arg.kind == TermKind::range;
      if (has_range) {
        std::vector<TermAtom> expanded{TermAtom{rule.head->pred, {}, rule.head->line, rule.head->column}};
        for (const auto& arg : rule.head->args) {
          std::vector<TermAtom> next;
          if (arg.kind == TermKind::range) {
            for (long long v = arg.value; v <= arg.hi; ++v)
              for (auto base : expanded) {
                base.args.push_back(Term{TermKind::integer, v, 0, {}});
                next.push_back(std::move(base));
              }
          } else {
            for (auto base : expanded) {
              base.args.push_back(arg);
              next.push_back(std::move(base));
            }
          }
          expanded = std::move(next);
        }
        for (auto& atom : expanded) {
          RuleAst fact;
          fact.head = std::move(atom);
          fact.line = rule.line;
          statements.push_back(std::move(fact));
        }
        continue;
      }
    }
    statements.push_back(rule);
  }

  // Constants occurring anywhere in the program.
  std::set<Constant> constant_set;
  auto note_term = [&](const Term& t) {
    if (t.kind == TermKind::integer) constant_set.insert({true, t.value, {}});
    if (t.kind == TermKind::symbol) constant_set.insert({false, 0, t.text});
  };
  for (const auto& rule : statements) {
    if (rule.head)
      for (const auto& arg : rule.head->args) note_term(arg);
    for (const auto& lit : rule.literals)
      for (const auto& arg : lit.atom.args) note_term(arg);
    for (const auto& cmp : rule.comparisons) {
      note_term(cmp.lhs);
      note_term(cmp.rhs);
    }
  }
  const std::vector<Constant> constants(constant_set.begin(), constant_set.end());

  std::vector<detail::NamedRule> named;
  std::uint64_t instances = 0;
  std::size_t constraint_counter = 0;

  for (const auto& rule : statements) {
    // Variables in first-occurrence order.
    std::vector<std::string> vars;
    auto note_var = [&](const Term& t) {
      if (t.kind == TermKind::variable &&
          std::find(vars.begin(), vars.end(), t.text) == vars.end())
        vars.push_back(t.text);
    };
    if (rule.head)
      for (const auto& arg : rule.head->args) note_var(arg);
    for (const auto& lit : rule.literals)
      for (const auto& arg : lit.atom.args) note_var(arg);
    for (const auto& cmp : rule.comparisons) {
      note_var(cmp.lhs);
      note_var(cmp.rhs);
    }

    const std::optional<std::string> fresh =
        rule.is_constraint()
            ? std::optional<std::string>(std::string(fresh_atom_prefix) +
                                         std::to_string(constraint_counter++))
            : std::nullopt;

    if (!vars.empty() && constants.empty()) continue;  // nothing to instantiate over

    std::vector<std::size_t> odometer(vars.size(), 0);
    while (true) {
      if (++instances > caps.max_instances)
        throw resource_cap_error("grounding exceeded " + std::to_string(caps.max_instances) +
                                 " instances");
      std::map<std::string, Constant> binding;
      for (std::size_t i = 0; i < vars.size(); ++i) binding[vars[i]] = constants[odometer[i]];

      auto resolve = [&](const Term& t) -> Constant {
        switch (t.kind) {
          case TermKind::integer: return {true, t.value, {}};
          case TermKind::symbol: return {false, 0, t.text};
          case TermKind::variable: return binding.at(t.text);
          case TermKind::range: break;
        }
        throw invariant_error("range term in rule body");
      };

      bool satisfied = true;
      for (const auto& cmp : rule.comparisons)
        satisfied = satisfied && detail::eval_cmp(resolve(cmp.lhs), cmp.op, resolve(cmp.rhs));

      if (satisfied) {
        detail::NamedRule out;
        if (fresh) {
          out.head = *fresh;
          out.neg.push_back(*fresh);  // self-blocking constraint encoding
        } else {
          out.head = detail::render_ground_atom(*rule.head, binding);
        }
        for (const auto& lit : rule.literals) {
          auto name = detail::render_ground_atom(lit.atom, binding);
          (lit.negated ? out.neg : out.pos).push_back(std::move(name));
        }
        named.push_back(std::move(out));
      }

      // Advance the odometer.
      std::size_t i = 0;
      for (; i < vars.size(); ++i) {
        if (++odometer[i] < constants.size()) break;
        odometer[i] = 0;
      }
      if (vars.empty() || i == vars.size()) break;
    }
  }

  return detail::assemble(named);
}

inline GroundProgram ground(std::string_view text, const GroundingCaps& caps = {}) {
  return ground(parse_program(text), caps);
}

// ---------------------------------------------------------------------------
// Stable-model semantics
// ---------------------------------------------------------------------------

/// Gelfond-Lifschitz reduct: drop every rule whose negative body meets m,
/// clear the negative bodies of the rest. Always a positive program.
inline GroundProgram gl_reduct(const GroundProgram& p, const AtomSet& m) {
  if (m.universe() != p.universe) throw usage_error("reduct interpretation over a foreign universe");
  GroundProgram out;
  out.universe = p.universe;
  out.fresh = p.fresh;
  for (const auto& rule : p.rules) {
    if ((rule.neg & m).any()) continue;
    out.rules.push_back({rule.head, rule.pos, AtomSet::empty(p.universe)});
  }
  return out;
}

/// Least Herbrand model of a positive program: ascending closure from the
/// empty set.
inline AtomSet minimal_model(const GroundProgram& p) {
  for (const auto& rule : p.rules)
    if (rule.neg.any()) throw usage_error("minimal_model requires a positive program");
  AtomSet model = AtomSet::empty(p.universe);
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& rule : p.rules) {
      if (!model.test(rule.head) && rule.pos.subset_of(model)) {
        model.set(rule.head);
        changed = true;
      }
    }
  }
  return model;
}

namespace detail {

/// minimal_model(gl_reduct(p, m)) without materializing the reduct.
inline AtomSet gl_apply(const GroundProgram& p, const AtomSet& m) {
  AtomSet model = AtomSet::empty(p.universe);
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& rule : p.rules) {
      if (model.test(rule.head)) continue;
      if ((rule.neg & m).any()) continue;
      if (rule.pos.subset_of(model)) {
        model.set(rule.head);
        changed = true;
      }
    }
  }
  return model;
}

}  // namespace detail

/// S_P as an operator: apply(m) = minimal_model(gl_reduct(p, m)). Larger m
/// yields a smaller reduct, so S_P is anti-monotone; its fixed points are
/// exactly the stable models.
inline OperatorSpec<AtomSet> gl_operator(const GroundProgram& p) {
  auto prog = std::make_shared<const GroundProgram>(p);
  return {[prog](const AtomSet& m) { return detail::gl_apply(*prog, m); },
          Monotonicity::antimonotone, "S_P"};
}

inline bool is_stable_model(const GroundProgram& p, const AtomSet& m) {
  if (m.universe() != p.universe) throw usage_error("interpretation over a foreign universe");
  return detail::gl_apply(p, m) == m;
}

/// Exhaustive stable-model oracle over the full powerset of the universe.
/// Deliberately simple; refuses universes whose powerset exceeds the cap.
inline std::vector<AtomSet> brute_force_stable_models(const GroundProgram& p,
                                                      std::uint64_t cap = std::uint64_t(1) << 22) {
  const std::size_t n = p.universe->size();
  if (n >= 63 || (std::uint64_t(1) << n) > cap)
    throw resource_cap_error("stable-model enumeration of 2^" + std::to_string(n) +
                             " interpretations exceeds cap");
  std::vector<AtomSet> models;
  const std::uint64_t end = std::uint64_t(1) << n;
  for (std::uint64_t mask = 0; mask < end; ++mask) {
    AtomSet m(p.universe);
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (std::uint64_t(1) << i)) m.set(i);
    if (is_stable_model(p, m)) models.push_back(std::move(m));
  }
  std::sort(models.begin(), models.end(), AtomSet::index_less);
  return models;
}

/// Oracle variant that skips interpretations ruled out by two elementary
/// facts before enumerating:
///   - a fact's head lies in every stable model;
///   - an atom lies in no stable model if it heads no rule, or if every
///     rule with that head also contains it negatively (self-blocking, the
///     constraint encoding shape).
/// Still exhaustive over all remaining atoms. Agreement with the plain
/// oracle is property-tested.
inline std::vector<AtomSet> brute_force_stable_models_pruned(
    const GroundProgram& p, std::uint64_t cap = std::uint64_t(1) << 22) {
  const std::size_t n = p.universe->size();
  AtomSet forced_true(p.universe);
  AtomSet heads(p.universe);
  AtomSet self_block_only(p.universe);  // candidates; cleared by any non-self-blocking rule
  self_block_only = AtomSet::full(p.universe);
  for (const auto& rule : p.rules) {
    heads.set(rule.head);
    if (rule.pos.none() && rule.neg.none()) forced_true.set(rule.head);
    if (!rule.neg.test(rule.head)) self_block_only.set(rule.head, false);
  }
  const AtomSet forced_false = heads.complement() | (heads & self_block_only);

  const auto free = (AtomSet::full(p.universe) - forced_true - forced_false).indices();
  if (free.size() >= 63 || (std::uint64_t(1) << free.size()) > cap)
    throw resource_cap_error("stable-model enumeration of 2^" + std::to_string(free.size()) +
                             " interpretations exceeds cap");
  (void)n;
  std::vector<AtomSet> models;
  const std::uint64_t end = std::uint64_t(1) << free.size();
  for (std::uint64_t mask = 0; mask < end; ++mask) {
    AtomSet m = forced_true;
    for (std::size_t i = 0; i < free.size(); ++i)
      if (mask & (std::uint64_t(1) << i)) m.set(free[i]);
    if (is_stable_model(p, m)) models.push_back(std::move(m));
  }
  std::sort(models.begin(), models.end(), AtomSet::index_less);
  return models;
}

/// Well-founded bound [mu, S_P(mu)] with mu = lfp(S_P^2): atoms certain in
/// every stable model vs. atoms possible in some. Coincides with converged
/// iterated refinement from [bottom, top].
inline PInterval well_founded_bound(const GroundProgram& p) {
  const auto lat = p.lattice();
  auto [mu, nu] = oscillating_pair(lat, gl_operator(p));
  return {std::move(mu), std::move(nu)};
}

// ---------------------------------------------------------------------------
// Partial evaluation and assumption emission
// ---------------------------------------------------------------------------

namespace detail {

inline GroundProgram partial_eval_names(const GroundProgram& p,
                                        const std::vector<std::string>& lower_names,
                                        const std::vector<std::string>& excluded_names) {
  AtomSet lower(p.universe);
  std::vector<std::string> missing_lower;
  for (const auto& name : lower_names) {
    if (auto i = p.universe->find(name))
      lower.set(*i);
    else
      missing_lower.push_back(name);
  }
  AtomSet excluded(p.universe);
  for (const auto& name : excluded_names)
    if (auto i = p.universe->find(name)) excluded.set(*i);

  std::vector<NamedRule> named;
  // Facts for the lower bound first, in universe order; atoms absent from
  // this program's universe still become facts by name.
  for (auto i : lower.indices()) named.push_back({p.universe->name(i), {}, {}});
  for (const auto& name : missing_lower) named.push_back({name, {}, {}});

  for (const auto& rule : p.rules) {
    if (excluded.test(rule.head)) continue;       // false head: rule can never fire
    if ((rule.pos & excluded).any()) continue;    // body contains a false atom
    if ((rule.neg & lower).any()) continue;       // body negates a true atom
    NamedRule out;
    out.head = p.universe->name(rule.head);
    for (auto i : (rule.pos - lower).indices()) out.pos.push_back(p.universe->name(i));
    for (auto i : (rule.neg - excluded).indices()) out.neg.push_back(p.universe->name(i));
    named.push_back(std::move(out));
  }
  return assemble(named);
}

}  // namespace detail

/// Partially evaluate p under a valid bound [lo, hi]: atoms in lo become
/// facts (and vanish from positive bodies, and refute rules negating them);
/// atoms outside hi delete the rules that head or positively use them and
/// vanish from negative bodies. For bounds produced by the refinement
/// pipeline the stable models inside the bound are preserved exactly; this
/// is validated empirically by the oracle suites.
inline GroundProgram partial_eval(const GroundProgram& p, const PInterval& bound) {
  if (bound.lo.universe() != p.universe)
    throw usage_error("partial_eval bound over a foreign universe");
  if (!bound.lo.subset_of(bound.hi)) throw usage_error("partial_eval on an invalid bound");
  return detail::partial_eval_names(p, bound.lo.names(), bound.hi.complement().names());
}

/// Re-evaluate a cached partial evaluation under a nested bound. The result
/// matches partial_eval(original, bound2) up to rule order.
inline GroundProgram compose_partial_eval(const GroundProgram& cached, const PInterval& cached_bound,
                                          const PInterval& bound2) {
  if (cached_bound.lo.universe() != bound2.lo.universe())
    throw usage_error("composed bounds over different universes");
  if (!bound2.lo.subset_of(bound2.hi)) throw usage_error("compose_partial_eval on an invalid bound");
  const auto lat = lattice_of(bound2);
  if (!interval_subset(lat, bound2, cached_bound))
    throw usage_error("composed bound is not nested in the cached bound");
  return detail::partial_eval_names(cached, bound2.lo.names(), bound2.hi.complement().names());
}

/// Solver assumptions as unit literals: one line per decided atom, the atom
/// name for members of lo and "-name" for atoms outside hi, in universe
/// order. Atoms in `hidden` (constraint encodings) are skipped.
inline std::string emit_assumptions(const PInterval& bound,
                                    const std::optional<AtomSet>& hidden = std::nullopt) {
  if (!bound.lo.subset_of(bound.hi)) throw usage_error("emit_assumptions on an invalid bound");
  const auto& u = bound.lo.universe();
  std::string out;
  for (std::size_t i = 0; i < u->size(); ++i) {
    if (hidden && hidden->test(i)) continue;
    if (bound.lo.test(i)) {
      out += u->name(i);
      out += '\n';
    } else if (!bound.hi.test(i)) {
      out += '-';
      out += u->name(i);
      out += '\n';
    }
  }
  return out;
}

/// Render a ground program in the input grammar. Rules whose head encodes a
/// constraint print as headless constraints again.
inline std::string to_text(const GroundProgram& p) {
  std::ostringstream out;
  for (const auto& rule : p.rules) {
    const bool constraint = p.fresh.test(rule.head) && rule.neg.test(rule.head);
    std::vector<std::string> body;
    for (auto i : rule.pos.indices()) body.push_back(p.universe->name(i));
    for (auto i : rule.neg.indices()) {
      if (constraint && i == rule.head) continue;
      body.push_back("not " + p.universe->name(i));
    }
    if (constraint) {
      out << ":- ";
    } else {
      out << p.universe->name(rule.head);
      if (!body.empty()) out << " :- ";
    }
    for (std::size_t i = 0; i < body.size(); ++i) {
      if (i) out << ", ";
      out << body[i];
    }
    out << ".\n";
  }
  return out.str();
}

/// Decompose policy preferring the atom occurring most often in rule
/// bodies; ties fall back to the lowest universe index.
inline AtomChooser chooser_most_frequent(const GroundProgram& p) {
  auto counts = std::make_shared<std::vector<std::size_t>>(p.universe->size(), 0);
  for (const auto& rule : p.rules) {
    for (auto i : rule.pos.indices()) ++(*counts)[i];
    for (auto i : rule.neg.indices()) ++(*counts)[i];
  }
  return [counts](const PInterval& b) {
    const auto free = (b.hi - b.lo).indices();
    std::size_t best = free.front();
    for (auto i : free)
      if ((*counts)[i] > (*counts)[best]) best = i;
    return best;
  };
}

}  // namespace fixbound::asp
