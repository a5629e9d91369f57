#ifndef PELW_EQUATION_HPP
#define PELW_EQUATION_HPP

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "pelw/error.hpp"
#include "pelw/formula.hpp"

// GCC 11 reports optional<Formula> copies as maybe-uninitialized.
#if defined(__GNUC__) && !defined(__clang__)
#pragma GCC diagnostic push
#pragma GCC diagnostic ignored "-Wmaybe-uninitialized"
#endif

namespace pelw {

namespace detail {

/// Operands of a maximal And (or Or) chain.
inline void flatten(const Formula& f, FormulaKind k, std::vector<Formula>& out) {
  if (f.kind() == k) {
    for (const auto& c : f.children()) flatten(c, k, out);
  } else {
    out.push_back(f);
  }
}

/// Normal form modulo associativity and commutativity of And/Or.
inline std::string ac_key(const Formula& f) {
  if (f.kind() == FormulaKind::And || f.kind() == FormulaKind::Or) {
    std::vector<Formula> ops;
    flatten(f, f.kind(), ops);
    std::vector<std::string> keys;
    for (const auto& o : ops) keys.push_back(ac_key(o));
    std::sort(keys.begin(), keys.end());
    return std::string(f.kind() == FormulaKind::And ? "and(" : "or(") + text::join(keys, ",") + ")";
  }
  std::string head;
  switch (f.kind()) {
    case FormulaKind::Atom: return "atom:" + f.name();
    case FormulaKind::Var: return "var:" + f.name();
    case FormulaKind::Box: head = "box" + f.label().to_string() + std::to_string(f.coord()); break;
    case FormulaKind::Diamond: head = "dia" + f.label().to_string() + std::to_string(f.coord()); break;
    case FormulaKind::Lfp: head = "mu:" + f.name(); break;
    case FormulaKind::Gfp: head = "nu:" + f.name(); break;
    case FormulaKind::Ctx: {
      std::vector<std::string> cs;
      for (const auto& c : f.contexts()) cs.push_back(c.key());
      head = "ctx(" + text::join(f.holes(), ",") + ";" + text::join(cs, ",") + ")";
      break;
    }
    default: break;
  }
  std::vector<std::string> keys;
  for (const auto& c : f.children()) keys.push_back(ac_key(c));
  return head + "(" + text::join(keys, ",") + ")";
}

inline Formula rebuild(FormulaKind k, const std::vector<Formula>& ops) {
  Formula f = ops.at(0);
  for (std::size_t i = 1; i < ops.size(); ++i) f = k == FormulaKind::And ? Formula::conj(f, ops[i]) : Formula::disj(f, ops[i]);
  return f;
}

class EquationMatcher {
 public:
  explicit EquationMatcher(std::string var) : var_(std::move(var)) {}

  bool match(const Formula& p, const Formula& t, std::optional<Formula>& psi) const {
    if (p.kind() == FormulaKind::Var && p.name() == var_) {
      if (psi) return ac_key(*psi) == ac_key(t);
      psi = t;
      return true;
    }
    if (p.kind() == FormulaKind::And || p.kind() == FormulaKind::Or) {
      std::vector<Formula> ps, ts;
      flatten(p, p.kind(), ps);
      if (t.kind() == p.kind())
        flatten(t, t.kind(), ts);
      else
        ts.push_back(t);
      std::vector<bool> used(ts.size(), false);
      return match_ac(p.kind(), ps, ts, used, psi);
    }
    if (p.kind() != t.kind() || p.children().size() != t.children().size()) return false;
    switch (p.kind()) {
      case FormulaKind::Atom: return p.name() == t.name();
      case FormulaKind::Var: return p.name() == t.name();
      case FormulaKind::Box:
      case FormulaKind::Diamond:
        if (p.label() != t.label() || p.coord() != t.coord()) return false;
        break;
      case FormulaKind::Lfp:
      case FormulaKind::Gfp:
        if (p.name() != t.name()) return false;
        if (p.name() == var_) return ac_key(p) == ac_key(t);  // shadowed
        break;
      case FormulaKind::Ctx:
        if (ac_key(p.with_children({Formula::atom("_")})) != ac_key(t.with_children({Formula::atom("_")}))) return false;
        break;
      default: break;
    }
    for (std::size_t i = 0; i < p.children().size(); ++i) {
      auto saved = psi;
      if (!match(p.children()[i], t.children()[i], psi)) {
        psi = saved;
        return false;
      }
    }
    return true;
  }

 private:
  bool is_var(const Formula& f) const { return f.kind() == FormulaKind::Var && f.name() == var_; }

  /// Matches pattern operands to term operands. The bare F operands of the
  /// pattern (placed last) share the remaining term operands equally.
  bool match_ac(FormulaKind k, const std::vector<Formula>& ps, const std::vector<Formula>& ts,
                std::vector<bool>& used, std::optional<Formula>& psi) const {
    std::vector<Formula> ordered;
    for (const auto& p : ps)
      if (!is_var(p)) ordered.push_back(p);
    const std::size_t fixed = ordered.size();
    for (const auto& p : ps)
      if (is_var(p)) ordered.push_back(p);
    return place(k, ordered, 0, fixed, ts, used, psi);
  }

  bool place(FormulaKind k, const std::vector<Formula>& ps, std::size_t i, std::size_t fixed,
             const std::vector<Formula>& ts, std::vector<bool>& used, std::optional<Formula>& psi) const {
    if (i == fixed) return absorb(k, ps.size() - fixed, ts, used, psi);
    for (std::size_t j = 0; j < ts.size(); ++j) {
      if (used[j]) continue;
      auto saved = psi;
      used[j] = true;
      if (match(ps[i], ts[j], psi) && place(k, ps, i + 1, fixed, ts, used, psi)) return true;
      used[j] = false;
      psi = saved;
    }
    return false;
  }

  /// `copies` bare F operands against the unused term operands.
  bool absorb(FormulaKind k, std::size_t copies, const std::vector<Formula>& ts, const std::vector<bool>& used,
              std::optional<Formula>& psi) const {
    std::vector<Formula> rest;
    for (std::size_t j = 0; j < ts.size(); ++j)
      if (!used[j]) rest.push_back(ts[j]);
    if (copies == 0) return rest.empty();
    if (rest.empty() || rest.size() % copies) return false;
    std::vector<std::pair<std::string, Formula>> keyed;
    for (const auto& r : rest) keyed.push_back({ac_key(r), r});
    std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    // Every distinct operand must occur a multiple of `copies` times.
    std::vector<Formula> share;
    for (std::size_t j = 0; j < keyed.size();) {
      std::size_t e = j;
      while (e < keyed.size() && keyed[e].first == keyed[j].first) ++e;
      if ((e - j) % copies) return false;
      for (std::size_t c = 0; c < (e - j) / copies; ++c) share.push_back(keyed[j].second);
      j = e;
    }
    Formula candidate = rebuild(k, share);
    if (psi) return ac_key(*psi) == ac_key(candidate);
    psi = candidate;
    return true;
  }

  std::string var_;
};

}  // namespace detail

/// Finds Ψ with lhs[Ψ/F] equal to rhs up to And/Or associativity and
/// commutativity; throws IllFormedEquation when none exists.
inline Formula check_equation_wellformed(const Formula& lhs, const Formula& rhs, const std::string& var) {
  detail::EquationMatcher m(var);
  std::optional<Formula> psi;
  if (m.match(lhs, rhs, psi)) return psi ? *psi : Formula::var(var);
  throw Error(ErrorKind::IllFormedEquation,
              "no formula substituted for " + var + " turns " + lhs.to_string() + " into " + rhs.to_string());
}

}  // namespace pelw

#if defined(__GNUC__) && !defined(__clang__)
#pragma GCC diagnostic pop
#endif

#endif
