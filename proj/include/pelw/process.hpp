#ifndef PELW_PROCESS_HPP
#define PELW_PROCESS_HPP

#include <algorithm>
#include <cctype>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pelw/error.hpp"
#include "pelw/label.hpp"
#include "pelw/text.hpp"

namespace pelw {

enum class ProcKind { Eps, Const, Hole, Seq, Choice, Par, Restrict };

using NameSet = std::vector<std::string>;  // sorted, duplicate-free

namespace detail {
inline NameSet sorted_unique(NameSet v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}
inline NameSet set_union(const NameSet& a, const NameSet& b) {
  NameSet r;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(r));
  return r;
}
inline NameSet set_minus(const NameSet& a, const NameSet& b) {
  NameSet r;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(r));
  return r;
}
inline bool contains(const NameSet& s, const std::string& x) { return std::binary_search(s.begin(), s.end(), x); }
}  // namespace detail

/// Immutable process term. Terms produced by a `ProcessBuilder` are in
/// canonical form, so structural congruence is equality of `key()`.
class Process {
 public:
  struct Node {
    ProcKind kind = ProcKind::Eps;
    std::string name;               // Const / Hole
    NameSet names;                  // Par sync set or Restrict binders
    std::vector<Process> children;
    std::string key;                // canonical printing
    NameSet free;                   // fn(P) under the building context
    std::size_t size = 1;
    std::size_t depth = 1;
  };

  Process() : Process(eps_node()) {}

  ProcKind kind() const { return n_->kind; }
  const std::string& name() const { return n_->name; }
  const NameSet& names() const { return n_->names; }
  const std::vector<Process>& children() const { return n_->children; }
  const std::string& key() const { return n_->key; }
  const NameSet& free_names() const { return n_->free; }
  std::size_t size() const { return n_->size; }
  std::size_t depth() const { return n_->depth; }
  bool is_eps() const { return n_->kind == ProcKind::Eps; }

  std::string to_string() const { return n_->key; }

  friend bool operator==(const Process& a, const Process& b) { return a.n_ == b.n_ || a.n_->key == b.n_->key; }
  friend bool operator<(const Process& a, const Process& b) { return a.n_->key < b.n_->key; }

  /// Assembles a node verbatim (no congruence rewriting). `free` is the
  /// already-computed fn of the node.
  static Process make(ProcKind kind, std::string name, NameSet names, std::vector<Process> children, NameSet free) {
    auto n = std::make_shared<Node>();
    n->kind = kind;
    n->name = std::move(name);
    n->names = std::move(names);
    n->children = std::move(children);
    n->free = std::move(free);
    for (const auto& c : n->children) {
      n->size += c.size();
      n->depth = std::max(n->depth, c.depth() + 1);
    }
    n->key = print(*n);
    return Process(std::move(n));
  }

 private:
  explicit Process(std::shared_ptr<const Node> n) : n_(std::move(n)) {}

  static std::shared_ptr<const Node> eps_node() {
    static const auto e = [] {
      auto n = std::make_shared<Node>();
      n->key = "eps";
      return std::shared_ptr<const Node>(n);
    }();
    return e;
  }

  static int precedence(ProcKind k) {
    switch (k) {
      case ProcKind::Choice: return 0;
      case ProcKind::Par: return 1;
      case ProcKind::Seq: return 2;
      default: return 3;
    }
  }

  static std::string wrap(const Process& p, int min_prec) {
    return precedence(p.kind()) < min_prec ? "(" + p.key() + ")" : p.key();
  }

  static std::string print(const Node& n) {
    switch (n.kind) {
      case ProcKind::Eps: return "eps";
      case ProcKind::Const: return n.name;
      case ProcKind::Hole: return "[" + n.name + "]";
      case ProcKind::Seq: {
        std::string s;
        for (std::size_t i = 0; i < n.children.size(); ++i) {
          if (i) s += " ; ";
          // Seq is printed right-nested so a Seq child needs parentheses.
          s += wrap(n.children[i], 3);
        }
        return s;
      }
      case ProcKind::Choice: {
        std::string s;
        for (std::size_t i = 0; i < n.children.size(); ++i) {
          if (i) s += " + ";
          s += wrap(n.children[i], 1);
        }
        return s;
      }
      case ProcKind::Par: {
        std::string op = " |{" + text::join(n.names, ",") + "}| ";
        std::string s;
        for (std::size_t i = 0; i < n.children.size(); ++i) {
          if (i) s += op;
          s += wrap(n.children[i], 2);
        }
        return s;
      }
      case ProcKind::Restrict:
        return "new " + text::join(n.names, ",") + " . " + wrap(n.children.at(0), 3);
    }
    return {};
  }

  std::shared_ptr<const Node> n_;
};

/// Free names contributed by process constants. A constant's free names
/// are the actions it (or anything it can become) performs under Δ.
struct NameContext {
  std::map<std::string, NameSet> constant_names;

  const NameSet& of(const std::string& constant) const {
    static const NameSet none;
    auto it = constant_names.find(constant);
    return it == constant_names.end() ? none : it->second;
  }
};

/// Smart constructors producing canonical terms modulo structural
/// congruence: `;` flattened with ε removed; `+` and `|{L}|` flattened,
/// ε-free and sorted; vacuous binders dropped; binders pushed to the
/// smallest scope that covers their dependent operands.
class ProcessBuilder {
 public:
  explicit ProcessBuilder(const NameContext* ctx = nullptr) : ctx_(ctx) {}

  Process eps() const { return Process(); }

  Process constant(const std::string& name) const {
    return Process::make(ProcKind::Const, name, {}, {}, ctx_ ? ctx_->of(name) : NameSet{});
  }

  Process hole(const std::string& var) const { return Process::make(ProcKind::Hole, var, {}, {}, {}); }

  Process seq(const std::vector<Process>& parts) const {
    std::vector<Process> flat;
    for (const auto& p : parts) {
      if (p.is_eps()) continue;
      if (p.kind() == ProcKind::Seq)
        flat.insert(flat.end(), p.children().begin(), p.children().end());
      else
        flat.push_back(p);
    }
    if (flat.empty()) return eps();
    if (flat.size() == 1) return flat.front();
    NameSet fn;
    for (const auto& c : flat) fn = detail::set_union(fn, c.free_names());
    return Process::make(ProcKind::Seq, {}, {}, std::move(flat), std::move(fn));
  }

  Process seq(const Process& a, const Process& b) const { return seq(std::vector<Process>{a, b}); }

  Process choice(const std::vector<Process>& parts) const { return group(ProcKind::Choice, {}, parts, {}); }
  Process choice(const Process& a, const Process& b) const { return choice(std::vector<Process>{a, b}); }

  Process par(NameSet sync, const std::vector<Process>& parts) const {
    return group(ProcKind::Par, detail::sorted_unique(std::move(sync)), parts, {});
  }
  Process par(NameSet sync, const Process& a, const Process& b) const {
    return par(std::move(sync), std::vector<Process>{a, b});
  }

  Process restrict(NameSet binders, const Process& body) const {
    binders = detail::sorted_unique(std::move(binders));
    // (νa)P ≡ P whenever a ∉ fn(P), since P ≡ P ⊗_∅ ε ≡ ... ≡ P ⊗_∅ (νa)ε.
    binders = intersect(binders, body.free_names());
    if (binders.empty() || body.is_eps()) return body;
    switch (body.kind()) {
      case ProcKind::Restrict:
        // Binders of the body are not free in it, so the two sets are disjoint.
        return restrict(detail::set_union(binders, body.names()), body.children()[0]);
      case ProcKind::Choice: return group(body.kind(), body.names(), body.children(), binders);
      case ProcKind::Par: {
        // Names synchronised on by the body stay bound around all of it.
        const NameSet pinned = intersect(binders, body.names());
        if (pinned.empty()) return group(body.kind(), body.names(), body.children(), binders);
        Process inner = group(body.kind(), body.names(), body.children(), detail::set_minus(binders, pinned));
        if (inner.kind() == ProcKind::Restrict)
          return restrict_verbatim(detail::set_union(pinned, inner.names()), inner.children()[0]);
        return restrict_verbatim(pinned, inner);
      }
      default:
        return restrict_verbatim(std::move(binders), body);
    }
  }

  /// Rebuilds an arbitrary term through the smart constructors.
  Process canonicalize(const Process& p) const {
    switch (p.kind()) {
      case ProcKind::Eps: return eps();
      case ProcKind::Const: return constant(p.name());
      case ProcKind::Hole: return hole(p.name());
      case ProcKind::Seq: return seq(canonical_children(p));
      case ProcKind::Choice: return choice(canonical_children(p));
      case ProcKind::Par: return par(p.names(), canonical_children(p));
      case ProcKind::Restrict: return restrict(p.names(), canonicalize(p.children()[0]));
    }
    return p;
  }

  /// Replaces every hole named `var` by `value` and canonicalizes.
  Process substitute(const Process& p, const std::string& var, const Process& value) const {
    switch (p.kind()) {
      case ProcKind::Hole: return p.name() == var ? canonicalize(value) : p;
      case ProcKind::Eps: return eps();
      case ProcKind::Const: return constant(p.name());
      case ProcKind::Seq:
      case ProcKind::Choice:
      case ProcKind::Par: {
        std::vector<Process> cs;
        for (const auto& c : p.children()) cs.push_back(substitute(c, var, value));
        if (p.kind() == ProcKind::Seq) return seq(cs);
        if (p.kind() == ProcKind::Choice) return choice(cs);
        return par(p.names(), cs);
      }
      case ProcKind::Restrict: return restrict(p.names(), substitute(p.children()[0], var, value));
    }
    return p;
  }

  const NameContext* context() const { return ctx_; }

 private:
  static NameSet intersect(const NameSet& a, const NameSet& b) {
    NameSet r;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(r));
    return r;
  }

  std::vector<Process> canonical_children(const Process& p) const {
    std::vector<Process> cs;
    for (const auto& c : p.children()) cs.push_back(canonicalize(c));
    return cs;
  }

  static Process restrict_verbatim(NameSet binders, const Process& body) {
    auto fn = detail::set_minus(body.free_names(), binders);
    return Process::make(ProcKind::Restrict, {}, std::move(binders), {body}, std::move(fn));
  }

  Process group_node(ProcKind kind, const NameSet& sync, std::vector<Process> operands) const {
    if (operands.empty()) return eps();
    if (operands.size() == 1) return operands.front();
    std::sort(operands.begin(), operands.end());
    NameSet fn;
    for (const auto& c : operands) fn = detail::set_union(fn, c.free_names());
    return Process::make(kind, {}, sync, std::move(operands), std::move(fn));
  }

  struct Binder {
    std::string name;
    std::vector<bool> origin;  // operands it was lifted from
    std::vector<bool> deps;    // operands whose free occurrences it binds
  };

  using Scope = std::vector<bool>;
  using Assignment = std::vector<std::pair<std::size_t, Scope>>;  // binder -> scope

  struct GroupData {
    std::vector<Process> ops;
    std::vector<Binder> binders;
    // owner[i][a]: binder of name a free in operand i, or npos when unbound.
    std::vector<std::map<std::string, std::size_t>> owner;
  };

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  static constexpr std::size_t kMaxAssignments = 256;

  bool same_group(const Process& p, ProcKind kind, const NameSet& sync) const {
    return p.kind() == kind && (kind != ProcKind::Par || p.names() == sync);
  }

  void collect(const Process& p, ProcKind kind, const NameSet& sync, std::vector<Process>& ops,
               std::vector<std::pair<std::string, std::pair<std::size_t, std::size_t>>>& lifted) const {
    if (p.is_eps()) return;
    if (same_group(p, kind, sync)) {
      for (const auto& c : p.children()) collect(c, kind, sync, ops, lifted);
      return;
    }
    if (p.kind() == ProcKind::Restrict) {
      if (kind == ProcKind::Par && !intersect(p.names(), sync).empty()) {
        // Binders of synchronised names cannot leave their operand.
        ops.push_back(p);
        return;
      }
      const auto begin = ops.size();
      collect(p.children()[0], kind, sync, ops, lifted);
      for (const auto& n : p.names()) lifted.push_back({n, {begin, ops.size()}});
      return;
    }
    ops.push_back(p);
  }

  static std::size_t count(const Scope& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), true)); }

  /// Flattens the group, lifting every binder, and resolves which binder
  /// owns each free occurrence (the innermost one of that name).
  GroupData analyse(ProcKind kind, const NameSet& sync, const std::vector<Process>& parts, const NameSet& outer) const {
    GroupData g;
    std::vector<std::pair<std::string, std::pair<std::size_t, std::size_t>>> lifted;
    for (const auto& p : parts) collect(p, kind, sync, g.ops, lifted);
    const std::size_t n = g.ops.size();
    for (const auto& [name, range] : lifted) {
      Scope origin(n, false);
      for (auto i = range.first; i < range.second; ++i) origin[i] = true;
      g.binders.push_back({name, origin, Scope(n, false)});
    }
    for (const auto& name : outer) g.binders.push_back({name, Scope(n, true), Scope(n, false)});
    g.owner.resize(n);
    for (std::size_t i = 0; i < n; ++i)
      for (const auto& a : g.ops[i].free_names()) {
        std::size_t best = npos;
        for (std::size_t b = 0; b < g.binders.size(); ++b) {
          const auto& bd = g.binders[b];
          if (bd.name != a || !bd.origin[i]) continue;
          if (best == npos || count(bd.origin) < count(g.binders[best].origin)) best = b;
        }
        g.owner[i][a] = best;
        if (best != npos) g.binders[best].deps[i] = true;
      }
    return g;
  }

  /// Laminar closure: sets connected through overlaps (intersecting but not
  /// nested) all receive the union of their connected component.
  static void close_laminar(std::vector<Scope>& sets) {
    const std::size_t n = sets.empty() ? 0 : sets[0].size();
    auto overlap = [&](const Scope& x, const Scope& y) {
      bool inter = false, x_in_y = true, y_in_x = true;
      for (std::size_t i = 0; i < n; ++i) {
        inter |= x[i] && y[i];
        if (x[i] && !y[i]) x_in_y = false;
        if (y[i] && !x[i]) y_in_x = false;
      }
      return inter && !x_in_y && !y_in_x;
    };
    for (bool changed = true; changed;) {
      changed = false;
      std::vector<std::size_t> comp(sets.size());
      for (std::size_t i = 0; i < comp.size(); ++i) comp[i] = i;
      auto root = [&](std::size_t x) {
        while (comp[x] != x) x = comp[x];
        return x;
      };
      for (std::size_t a = 0; a < sets.size(); ++a)
        for (std::size_t b = a + 1; b < sets.size(); ++b)
          if (overlap(sets[a], sets[b])) {
            comp[root(b)] = root(a);
            changed = true;
          }
      if (!changed) break;
      std::map<std::size_t, Scope> unions;
      for (std::size_t k = 0; k < sets.size(); ++k) {
        auto& u = unions.try_emplace(root(k), Scope(n, false)).first->second;
        for (std::size_t i = 0; i < n; ++i) u[i] = u[i] || sets[k][i];
      }
      for (std::size_t k = 0; k < sets.size(); ++k) sets[k] = unions[root(k)];
    }
  }

  /// Candidate scope assignments for binders `live`: overlapping binders
  /// share the union of their dependents; a binder that would capture an
  /// occurrence it does not own is nested one level down instead. Where
  /// several binders of one name compete, every choice is produced.
  std::vector<Assignment> place(const GroupData& g, const std::vector<std::size_t>& live) const {
    if (live.empty()) return {Assignment{}};
    std::vector<Scope> scopes;
    for (auto b : live) scopes.push_back(g.binders[b].deps);
    close_laminar(scopes);
    std::vector<Scope> maximal;
    for (std::size_t i = 0; i < scopes.size(); ++i) {
      bool inside = false;
      for (std::size_t j = 0; j < scopes.size(); ++j)
        if (scopes[j] != scopes[i] && subset_of(scopes[i], scopes[j])) inside = true;
      if (!inside && std::find(maximal.begin(), maximal.end(), scopes[i]) == maximal.end()) maximal.push_back(scopes[i]);
    }
    std::vector<Assignment> result{Assignment{}};
    for (const auto& m : maximal) {
      std::vector<std::size_t> top_cand, inner;
      for (std::size_t i = 0; i < live.size(); ++i) {
        if (scopes[i] == m)
          top_cand.push_back(live[i]);
        else if (subset_of(scopes[i], m))
          inner.push_back(live[i]);
      }
      // A candidate is excluded when `m` holds a free occurrence of its name
      // owned by nothing nested below it.
      std::map<std::string, std::vector<std::size_t>> by_name;
      for (auto b : top_cand) {
        const auto& bd = g.binders[b];
        bool excluded = false;
        for (std::size_t i = 0; i < m.size() && !excluded; ++i) {
          if (!m[i] || bd.deps[i]) continue;
          auto it = g.owner[i].find(bd.name);
          if (it == g.owner[i].end()) continue;
          if (it->second == npos || std::find(live.begin(), live.end(), it->second) == live.end()) excluded = true;
        }
        if (!excluded) by_name[bd.name].push_back(b);
      }
      if (by_name.empty()) return {};
      std::vector<std::vector<std::size_t>> tops{{}};
      for (const auto& [_, cands] : by_name) {
        std::vector<std::vector<std::size_t>> next;
        for (const auto& t : tops)
          for (auto c : cands) {
            next.push_back(t);
            next.back().push_back(c);
          }
        tops = std::move(next);
      }
      std::vector<Assignment> here;
      for (const auto& top : tops) {
        std::vector<std::size_t> rest = inner;
        for (auto b : top_cand)
          if (std::find(top.begin(), top.end(), b) == top.end()) rest.push_back(b);
        for (auto& sub : place(g, rest)) {
          for (auto b : top) sub.push_back({b, m});
          here.push_back(std::move(sub));
          if (here.size() >= kMaxAssignments) break;
        }
      }
      std::vector<Assignment> combined;
      for (const auto& r : result)
        for (const auto& h : here) {
          if (combined.size() >= kMaxAssignments) break;
          combined.push_back(r);
          combined.back().insert(combined.back().end(), h.begin(), h.end());
        }
      result = std::move(combined);
      if (result.empty()) return {};
    }
    return result;
  }

  /// Every free occurrence must be captured by exactly its owner.
  static bool legal(const GroupData& g, const Assignment& as) {
    for (std::size_t i = 0; i < g.ops.size(); ++i)
      for (const auto& [a, own] : g.owner[i]) {
        std::size_t best = npos, best_size = 0;
        bool tie = false;
        for (const auto& [b, scope] : as) {
          if (g.binders[b].name != a || !scope[i]) continue;
          auto sz = count(scope);
          if (best == npos || sz < best_size) {
            best = b;
            best_size = sz;
            tie = false;
          } else if (sz == best_size) {
            tie = true;
          }
        }
        if (tie || best != own) return false;
      }
    return true;
  }

  /// Canonical form of a `+` or `|{L}|` node with operands `parts`
  /// (canonical) under the extra binders `outer`.
  Process group(ProcKind kind, const NameSet& sync, const std::vector<Process>& parts, const NameSet& outer) const {
    GroupData g = analyse(kind, sync, parts, outer);
    std::vector<std::size_t> live;
    for (std::size_t b = 0; b < g.binders.size(); ++b)
      if (count(g.binders[b].deps)) live.push_back(b);
    const Scope all(g.ops.size(), true);
    if (live.empty()) return group_node(kind, sync, g.ops);
    std::optional<Process> best;
    for (const auto& as : place(g, live)) {
      if (!legal(g, as)) continue;
      std::map<Scope, NameSet> by_scope;
      for (const auto& [b, scope] : as) by_scope[scope].push_back(g.binders[b].name);
      std::vector<std::pair<Scope, NameSet>> scopes;
      for (auto& [s, names] : by_scope) scopes.push_back({s, detail::sorted_unique(names)});
      Process p = render(kind, sync, g.ops, scopes, all);
      if (!best || p.key() < best->key()) best = p;
    }
    if (best) return *best;
    // No consistent placement found: keep the operands as given.
    std::vector<Process> kept;
    for (const auto& p : parts)
      if (!p.is_eps()) kept.push_back(p);
    Process node = group_node(kind, sync, kept);
    auto names = intersect(outer, node.free_names());
    return names.empty() ? node : restrict_verbatim(names, node);
  }

  static bool subset_of(const std::vector<bool>& a, const std::vector<bool>& b) {
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a[i] && !b[i]) return false;
    return true;
  }

  Process render(ProcKind kind, const NameSet& sync, const std::vector<Process>& ops,
                 const std::vector<std::pair<std::vector<bool>, NameSet>>& scopes,
                 const std::vector<bool>& region) const {
    // Binders whose scope is exactly the region wrap the whole node.
    NameSet here;
    std::vector<std::size_t> inner;
    for (std::size_t s = 0; s < scopes.size(); ++s) {
      if (scopes[s].first == region)
        here = detail::set_union(here, scopes[s].second);
      else if (subset_of(scopes[s].first, region))
        inner.push_back(s);
    }
    std::vector<std::size_t> maximal;
    for (auto s : inner) {
      bool covered = false;
      for (auto t : inner)
        if (t != s && subset_of(scopes[s].first, scopes[t].first)) covered = true;
      if (!covered) maximal.push_back(s);
    }
    std::vector<Process> children;
    std::vector<bool> taken(ops.size(), false);
    for (auto s : maximal) {
      const auto& sc = scopes[s].first;
      std::size_t count = 0, last = 0;
      for (std::size_t i = 0; i < ops.size(); ++i)
        if (sc[i]) {
          taken[i] = true;
          ++count;
          last = i;
        }
      if (count == 1) {
        // Single operand: let the operand's own constructor place the binders.
        NameSet names;
        for (auto t : inner)
          if (subset_of(scopes[t].first, sc)) names = detail::set_union(names, scopes[t].second);
        children.push_back(restrict(names, ops[last]));
      } else {
        children.push_back(render(kind, sync, ops, scopes, sc));
      }
    }
    for (std::size_t i = 0; i < ops.size(); ++i)
      if (region[i] && !taken[i]) children.push_back(ops[i]);
    Process node = group_node(kind, sync, std::move(children));
    if (here.empty()) return node;
    return restrict_verbatim(std::move(here), node);
  }

  const NameContext* ctx_;
};

namespace detail {

/// Recursive-descent parser for the process grammar:
///   choice := par ('+' par)*      par := seq ('|{' names '}|' seq)*
///   seq := unary (';' unary)*     unary := 'new' names '.' unary | atom
///   atom := 'eps' | Ident | '[' Ident ']' | '(' choice ')'
/// Produces raw terms; callers canonicalize under their context.
class ProcessParser {
 public:
  ProcessParser(text::Cursor& in, bool allow_holes, const std::set<std::string>* known)
      : in_(in), allow_holes_(allow_holes), known_(known) {}

  Process parse_choice() {
    std::vector<Process> parts{parse_par()};
    while (in_.peek() == '+') {
      in_.expect("+");
      parts.push_back(parse_par());
    }
    if (parts.size() == 1) return parts[0];
    return raw(ProcKind::Choice, {}, std::move(parts));
  }

 private:
  static Process raw(ProcKind kind, NameSet names, std::vector<Process> cs) {
    return Process::make(kind, {}, std::move(names), std::move(cs), {});
  }

  Process parse_par() {
    Process left = parse_seq();
    while (in_.looking_at("|{")) {
      in_.expect("|{");
      NameSet sync;
      if (in_.peek() != '}') {
        do {
          sync.push_back(action_name());
        } while (in_.accept(","));
      }
      in_.expect("}|");
      Process right = parse_seq();
      left = raw(ProcKind::Par, sorted_unique(std::move(sync)), {left, right});
    }
    return left;
  }

  Process parse_seq() {
    std::vector<Process> parts{parse_unary()};
    while (in_.peek() == ';') {
      auto save = in_.pos();
      in_.expect(";");
      // A ';' not followed by a term ends the process (statement separator).
      if (!starts_term()) {
        in_.set_pos(save);
        break;
      }
      parts.push_back(parse_unary());
    }
    if (parts.size() == 1) return parts[0];
    return raw(ProcKind::Seq, {}, std::move(parts));
  }

  /// Decides whether the ';' just consumed continues a sequence. It does not
  /// when nothing follows, or when the text up to the next top-level ';'
  /// holds a rule arrow or a section header (the ';' then separates
  /// declarations).
  bool starts_term() {
    const auto src = in_.source();
    std::size_t i = in_.pos();
    int depth = 0;
    bool any = false;
    for (; i < src.size(); ++i) {
      char c = src[i];
      if (c == '#') {
        while (i < src.size() && src[i] != '\n') ++i;
        continue;
      }
      if (std::isspace(static_cast<unsigned char>(c))) continue;
      if (c == '(') ++depth;
      if (c == ')') {
        if (depth == 0) break;
        --depth;
      }
      if (depth == 0 && c == ';') break;
      if (depth == 0 && (c == '-' || c == ':')) return false;
      any = true;
    }
    return any;
  }

  std::string action_name() {
    auto n = in_.identifier();
    if (n == "eps" || n == "new") in_.fail("'" + n + "' is not an action name");
    return n;
  }

  Process parse_unary() {
    if (in_.accept_keyword("new")) {
      NameSet binders;
      do {
        auto n = action_name();
        if (n == kTau) in_.fail("tau cannot be restricted");
        binders.push_back(n);
      } while (in_.accept(","));
      in_.expect(".");
      Process body = parse_unary();
      return raw(ProcKind::Restrict, sorted_unique(std::move(binders)), {body});
    }
    return parse_atom();
  }

  Process parse_atom() {
    if (in_.accept("(")) {
      Process p = parse_choice();
      in_.expect(")");
      return p;
    }
    if (allow_holes_ && in_.peek() == '[') {
      in_.expect("[");
      auto var = in_.identifier();
      in_.expect("]");
      return Process::make(ProcKind::Hole, var, {}, {}, {});
    }
    if (in_.accept_keyword("eps")) return Process();
    if (!in_.at_identifier()) in_.fail("expected process");
    auto name = in_.identifier();
    if (name == "new" || name == kTau) in_.fail("'" + name + "' is reserved");
    if (known_ && !known_->count(name))
      throw Error(ErrorKind::UnknownConstant, "unknown process constant '" + name + "'");
    return Process::make(ProcKind::Const, name, {}, {}, {});
  }

  text::Cursor& in_;
  bool allow_holes_;
  const std::set<std::string>* known_;
};

}  // namespace detail

/// Parses a process term (raw, not yet canonical). With `known` set, any
/// constant outside it raises UnknownConstant.
inline Process parse_process_raw(std::string_view src, const std::set<std::string>* known = nullptr,
                                 bool allow_holes = false) {
  text::Cursor in(src);
  detail::ProcessParser p(in, allow_holes, known);
  Process out = p.parse_choice();
  if (!in.at_end()) in.fail("unexpected trailing input");
  return out;
}

/// Parses and canonicalizes under `builder`'s naming context.
inline Process parse_process(std::string_view src, const ProcessBuilder& builder = ProcessBuilder{},
                             const std::set<std::string>* known = nullptr) {
  return builder.canonicalize(parse_process_raw(src, known));
}

/// Syntactic free and bound names (constants contribute their context names).
inline NameSet free_names(const Process& p) { return p.free_names(); }

inline NameSet bound_names(const Process& p) {
  NameSet out;
  if (p.kind() == ProcKind::Restrict) out = p.names();
  for (const auto& c : p.children()) out = detail::set_union(out, bound_names(c));
  return out;
}

}  // namespace pelw

#endif
