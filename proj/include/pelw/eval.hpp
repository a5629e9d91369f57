#ifndef PELW_EVAL_HPP
#define PELW_EVAL_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pelw/equation.hpp"
#include "pelw/error.hpp"
#include "pelw/fixpoint.hpp"
#include "pelw/formula.hpp"
#include "pelw/lattice.hpp"
#include "pelw/lts.hpp"
#include "pelw/system.hpp"

namespace pelw {

/// One coordinate of an evaluation domain: a finite LTS and, when known,
/// the system that generated it (needed for context abstraction).
struct Coordinate {
  std::shared_ptr<const System> system;
  std::shared_ptr<const Lts> lts;
};

/// Product of the state sets of n LTSs. Tuples are numbered in
/// lexicographic state-index order, first coordinate most significant.
class Domain {
 public:
  explicit Domain(std::vector<Coordinate> coords) : coords_(std::move(coords)) {
    if (coords_.empty()) throw Error(ErrorKind::EmptyUniverse, "a domain needs at least one coordinate");
    stride_.assign(coords_.size(), 1);
    size_ = 1;
    for (std::size_t i = coords_.size(); i-- > 0;) {
      stride_[i] = size_;
      size_ *= coords_[i].lts->size();
    }
    succ_.resize(coords_.size());
    for (std::size_t i = 0; i < coords_.size(); ++i) {
      const auto& lts = *coords_[i].lts;
      succ_[i].resize(lts.size());
      for (const auto& e : lts.edges) succ_[i][e.from].push_back({e.label, e.to});
    }
  }

  static std::shared_ptr<const Domain> of(std::vector<Coordinate> coords) {
    return std::make_shared<const Domain>(std::move(coords));
  }

  /// Domain over the states reachable from each process of `tuple`.
  static std::shared_ptr<const Domain> reachable(const std::vector<std::shared_ptr<const System>>& systems,
                                                 const std::vector<Process>& tuple, std::size_t cap = 10000) {
    if (systems.size() != tuple.size()) throw Error(ErrorKind::Unsupported, "one system per coordinate is required");
    std::vector<Coordinate> cs;
    for (std::size_t i = 0; i < tuple.size(); ++i)
      cs.push_back({systems[i], std::make_shared<const Lts>(build_lts(*systems[i], tuple[i], cap))});
    return of(std::move(cs));
  }

  std::size_t arity() const { return coords_.size(); }
  std::size_t size() const { return size_; }
  const Coordinate& coord(std::size_t i) const { return coords_.at(i); }
  std::size_t stride(std::size_t i) const { return stride_[i]; }

  std::size_t state(std::size_t tuple, std::size_t i) const { return (tuple / stride_[i]) % coords_[i].lts->size(); }

  std::vector<std::size_t> decode(std::size_t tuple) const {
    std::vector<std::size_t> out(arity());
    for (std::size_t i = 0; i < arity(); ++i) out[i] = state(tuple, i);
    return out;
  }

  std::size_t encode(const std::vector<std::size_t>& states) const {
    std::size_t t = 0;
    for (std::size_t i = 0; i < arity(); ++i) t += states.at(i) * stride_[i];
    return t;
  }

  std::vector<Process> processes(std::size_t tuple) const {
    std::vector<Process> out;
    for (std::size_t i = 0; i < arity(); ++i) out.push_back(coords_[i].lts->states[state(tuple, i)]);
    return out;
  }

  const std::vector<std::pair<Label, std::size_t>>& successors(std::size_t i, std::size_t s) const {
    return succ_[i][s];
  }

 private:
  std::vector<Coordinate> coords_;
  std::vector<std::size_t> stride_;
  std::size_t size_ = 0;
  std::vector<std::vector<std::vector<std::pair<Label, std::size_t>>>> succ_;
};

/// Total map from domain tuples to lattice elements.
class ValFunction {
 public:
  ValFunction() = default;
  ValFunction(std::shared_ptr<const Domain> dom, Lattice lat, IndexTable table)
      : dom_(std::move(dom)), lat_(std::move(lat)), table_(std::move(table)) {
    if (table_.size() != dom_->size()) throw Error(ErrorKind::ForeignElement, "table size does not match the domain");
  }

  static ValFunction constant(std::shared_ptr<const Domain> dom, const Lattice& lat, LatticeElement v) {
    IndexTable t(dom->size(), static_cast<std::uint32_t>(lat.index_of(v)));
    return ValFunction(std::move(dom), lat, std::move(t));
  }

  const std::shared_ptr<const Domain>& domain() const { return dom_; }
  const Lattice& lattice() const { return lat_; }
  const IndexTable& table() const { return table_; }
  std::size_t size() const { return table_.size(); }

  LatticeElement at(std::size_t tuple) const { return lat_.element(table_.at(tuple)); }
  LatticeElement at(const std::vector<std::size_t>& states) const { return at(dom_->encode(states)); }

  /// Pointwise order.
  bool leq(const ValFunction& other) const {
    for (std::size_t t = 0; t < table_.size(); ++t)
      if (!lat_.leq_index(table_[t], other.table_.at(t))) return false;
    return true;
  }

  friend bool operator==(const ValFunction& a, const ValFunction& b) {
    return a.dom_ == b.dom_ && a.lat_.id() == b.lat_.id() && a.table_ == b.table_;
  }

 private:
  std::shared_ptr<const Domain> dom_;
  Lattice lat_;
  IndexTable table_;
};

using Env = std::map<std::string, ValFunction>;

/// Atom interpretation given as a table keyed by process tuples, with a
/// default for unlisted tuples (bottom when absent).
struct AtomTable {
  std::vector<std::pair<std::vector<Process>, std::string>> rows;
  std::optional<std::string> default_value;
};

/// Maps atom names to functions of process tuples.
class AtomInterp {
 public:
  using Fn = std::function<LatticeElement(const std::vector<Process>&)>;

  void set(const std::string& name, Fn fn) { fns_[name] = std::move(fn); }
  void set(const std::string& name, AtomTable table) { tables_[name] = std::move(table); }
  bool has(const std::string& name) const { return fns_.count(name) || tables_.count(name); }

  std::vector<std::string> names() const {
    std::set<std::string> out;
    for (const auto& [n, _] : fns_) out.insert(n);
    for (const auto& [n, _] : tables_) out.insert(n);
    return {out.begin(), out.end()};
  }

  IndexTable tabulate(const std::string& name, const Domain& dom, const Lattice& lat) const {
    IndexTable out(dom.size());
    if (auto it = fns_.find(name); it != fns_.end()) {
      for (std::size_t t = 0; t < dom.size(); ++t)
        out[t] = static_cast<std::uint32_t>(lat.index_of(it->second(dom.processes(t))));
      return out;
    }
    auto it = tables_.find(name);
    if (it == tables_.end()) throw Error(ErrorKind::NotFound, "no interpretation for atom '" + name + "'");
    const auto& tab = it->second;
    std::map<std::vector<std::string>, std::uint32_t> rows;
    for (const auto& [tuple, value] : tab.rows) {
      if (tuple.size() != dom.arity())
        throw Error(ErrorKind::Unsupported, "atom '" + name + "' row has " + std::to_string(tuple.size()) +
                                                " processes, expected " + std::to_string(dom.arity()));
      std::vector<std::string> key;
      for (std::size_t i = 0; i < tuple.size(); ++i) {
        const auto& sys = dom.coord(i).system;
        key.push_back(sys ? sys->canonical(tuple[i]).key() : ProcessBuilder{}.canonicalize(tuple[i]).key());
      }
      rows[key] = static_cast<std::uint32_t>(lat.index_of(lat.element(value)));
    }
    const std::uint32_t fallback = tab.default_value
                                       ? static_cast<std::uint32_t>(lat.index_of(lat.element(*tab.default_value)))
                                       : lat.bot_index();
    for (std::size_t t = 0; t < dom.size(); ++t) {
      std::vector<std::string> key;
      for (const auto& p : dom.processes(t)) key.push_back(p.key());
      auto r = rows.find(key);
      out[t] = r == rows.end() ? fallback : r->second;
    }
    return out;
  }

 private:
  std::map<std::string, Fn> fns_;
  std::map<std::string, AtomTable> tables_;
};

/// Parses `A: { (p0): True; (p1, q0): 2; default: False }  B: {...}`.
/// Tuples list process terms; values are lattice element names.
inline AtomInterp parse_atom_interp(std::string_view src) {
  text::Cursor in(src);
  AtomInterp out;
  auto value = [&] {
    in.skip_space();
    const auto s = in.source();
    std::size_t i = in.pos();
    int depth = 0;
    std::string v;
    for (; i < s.size(); ++i) {
      char c = s[i];
      if (c == '{' || c == '(') ++depth;
      if (c == '}' || c == ')') {
        if (depth == 0) break;
        --depth;
      }
      if (depth == 0 && c == ';') break;
      v += c;
    }
    while (!v.empty() && std::isspace(static_cast<unsigned char>(v.back()))) v.pop_back();
    if (v.empty()) in.fail("expected lattice element");
    in.set_pos(i);
    return v;
  };
  while (!in.at_end()) {
    auto name = in.word();
    in.expect(":");
    in.expect("{");
    AtomTable tab;
    while (!in.accept("}")) {
      if (in.accept_keyword("default")) {
        in.expect(":");
        tab.default_value = value();
      } else {
        in.expect("(");
        std::vector<Process> tuple;
        do {
          detail::ProcessParser p(in, false, nullptr);
          tuple.push_back(p.parse_choice());
        } while (in.accept(","));
        in.expect(")");
        in.expect(":");
        tab.rows.push_back({tuple, value()});
      }
      if (!in.accept(";") && in.peek() != '}') in.fail("expected ';' or '}'");
    }
    out.set(name, std::move(tab));
    in.accept(";");
  }
  return out;
}

/// The lattice of value functions over a domain, elements encoded as
/// mixed-radix indices of their tables.
class FunctionLattice {
 public:
  FunctionLattice(const Lattice& lat, std::size_t entries, std::size_t budget) : lat_(lat), n_(entries) {
    const std::size_t v = lat.size();
    size_ = 1;
    for (std::size_t i = 0; i < n_ && size_ <= budget; ++i) size_ *= v;
    if (size_ > budget || size_ * n_ > budget)
      throw Error(ErrorKind::BudgetExceeded, "function lattice " + std::to_string(v) + "^" + std::to_string(n_) +
                                                 " exceeds the budget of " + std::to_string(budget) + " entries");
  }

  std::size_t size() const { return size_; }

  IndexTable decode(std::size_t x) const {
    IndexTable t(n_);
    for (std::size_t i = n_; i-- > 0;) {
      t[i] = static_cast<std::uint32_t>(x % lat_.size());
      x /= lat_.size();
    }
    return t;
  }

  std::uint32_t encode(const IndexTable& t) const {
    std::size_t x = 0;
    for (std::size_t i = 0; i < n_; ++i) x = x * lat_.size() + t[i];
    return static_cast<std::uint32_t>(x);
  }

  bool leq_index(std::size_t x, std::size_t y) const {
    auto a = decode(x), b = decode(y);
    for (std::size_t i = 0; i < n_; ++i)
      if (!lat_.leq_index(a[i], b[i])) return false;
    return true;
  }
  std::uint32_t meet_index(std::size_t x, std::size_t y) const { return combine(x, y, true); }
  std::uint32_t join_index(std::size_t x, std::size_t y) const { return combine(x, y, false); }
  std::uint32_t bot_index() const { return encode(IndexTable(n_, lat_.bot_index())); }
  std::uint32_t top_index() const { return encode(IndexTable(n_, lat_.top_index())); }

 private:
  std::uint32_t combine(std::size_t x, std::size_t y, bool meet) const {
    auto a = decode(x), b = decode(y);
    for (std::size_t i = 0; i < n_; ++i) a[i] = meet ? lat_.meet_index(a[i], b[i]) : lat_.join_index(a[i], b[i]);
    return encode(a);
  }

  Lattice lat_;
  std::size_t n_;
  std::size_t size_ = 1;
};

struct EvalOptions {
  std::size_t budget = 1'000'000;   // function-lattice entries for general equations
  bool strict_equations = true;     // reject equations without a witness
  std::size_t state_cap = 10000;    // per-coordinate cap for context domains
  bool record_duals = false;        // also solve the dual of every equation
  bool fast_path = true;            // Kleene iteration when the lhs is the bound variable
};

/// Least and greatest solution of one evaluated equation.
struct FixpointRecord {
  std::string formula;
  ValFunction least, greatest;
};

/// Lattice-valued semantics of formulas over a domain.
class Evaluator {
 public:
  Evaluator(Lattice lat, AtomInterp atoms, EvalOptions opt = {})
      : lat_(std::move(lat)), atoms_(std::move(atoms)), opt_(opt) {}

  const Lattice& lattice() const { return lat_; }
  const std::vector<FixpointRecord>& records() const { return records_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  ValFunction eval(const Formula& f, const std::shared_ptr<const Domain>& dom, const Env& env = {}) {
    return ValFunction(dom, lat_, table(f, dom, env));
  }

  /// Per tuple, the values of `s` at the {a}-successors along coordinate i.
  static std::vector<std::vector<LatticeElement>> pre_value_set(const Label& a, std::size_t i, const ValFunction& s) {
    const auto& dom = *s.domain();
    check_coord(dom, i);
    std::vector<std::vector<LatticeElement>> out(dom.size());
    for (std::size_t t = 0; t < dom.size(); ++t) {
      std::set<std::uint32_t> vals;
      for (auto u : successor_tuples(dom, t, a, i)) vals.insert(s.table()[u]);
      for (auto v : vals) out[t].push_back(s.lattice().element(v));
    }
    return out;
  }

 private:
  static void check_coord(const Domain& dom, std::size_t i) {
    if (i < 1 || i > dom.arity())
      throw Error(ErrorKind::Unsupported, "coordinate " + std::to_string(i) + " outside 1.." + std::to_string(dom.arity()));
  }

  static std::vector<std::size_t> successor_tuples(const Domain& dom, std::size_t t, const Label& a, std::size_t i) {
    std::vector<std::size_t> out;
    const std::size_t c = i - 1;
    const std::size_t s = dom.state(t, c);
    for (const auto& [l, to] : dom.successors(c, s))
      if (l == a) out.push_back(t - s * dom.stride(c) + to * dom.stride(c));
    return out;
  }

  IndexTable table(const Formula& f, const std::shared_ptr<const Domain>& dom, const Env& env) {
    const std::size_t n = dom->size();
    switch (f.kind()) {
      case FormulaKind::Atom: return atoms_.tabulate(f.name(), *dom, lat_);
      case FormulaKind::Var: {
        auto it = env.find(f.name());
        if (it == env.end() || it->second.domain() != dom)
          throw Error(ErrorKind::UnboundVariable, "variable " + f.name() + " is not bound here");
        if (it->second.lattice().id() != lat_.id())
          throw Error(ErrorKind::ForeignElement, "variable " + f.name() + " takes values in another lattice");
        return it->second.table();
      }
      case FormulaKind::And:
      case FormulaKind::Or: {
        auto a = table(f.child(0), dom, env);
        auto b = table(f.child(1), dom, env);
        for (std::size_t t = 0; t < n; ++t)
          a[t] = f.kind() == FormulaKind::And ? lat_.meet_index(a[t], b[t]) : lat_.join_index(a[t], b[t]);
        return a;
      }
      case FormulaKind::Box:
      case FormulaKind::Diamond: {
        check_coord(*dom, f.coord());
        auto s = table(f.child(), dom, env);
        const bool box = f.kind() == FormulaKind::Box;
        IndexTable out(n);
        for (std::size_t t = 0; t < n; ++t) {
          std::uint32_t acc = box ? lat_.top_index() : lat_.bot_index();
          for (auto u : successor_tuples(*dom, t, f.label(), f.coord()))
            acc = box ? lat_.meet_index(acc, s[u]) : lat_.join_index(acc, s[u]);
          out[t] = acc;
        }
        return out;
      }
      case FormulaKind::Lfp:
      case FormulaKind::Gfp: {
        const bool least = f.kind() == FormulaKind::Lfp;
        auto result = solve_equation(f, dom, env, least);
        if (opt_.record_duals) {
          auto dual = solve_equation(f, dom, env, !least);
          records_.push_back({f.to_string(), ValFunction(dom, lat_, least ? result : dual),
                              ValFunction(dom, lat_, least ? dual : result)});
        }
        return result;
      }
      case FormulaKind::Ctx: return context(f, dom, env);
    }
    return {};
  }

  IndexTable solve_equation(const Formula& f, const std::shared_ptr<const Domain>& dom, const Env& env, bool least) {
    const std::string& var = f.name();
    const Formula& lhs = f.lhs();
    const Formula& rhs = f.rhs();
    const std::size_t n = dom->size();
    if (opt_.fast_path && lhs.kind() == FormulaKind::Var && lhs.name() == var) {
      // F == rhs: Kleene iteration on the function lattice.
      Env inner = env;
      IndexTable cur(n, least ? lat_.bot_index() : lat_.top_index());
      const std::size_t limit = n * lat_.size() + 2;
      for (std::size_t round = 0; round < limit; ++round) {
        inner.insert_or_assign(var, ValFunction(dom, lat_, cur));
        auto next = table(rhs, dom, inner);
        if (next == cur) return cur;
        cur = std::move(next);
      }
      throw Error(ErrorKind::NotConverged, "Kleene iteration for " + var + " did not stabilise");
    }
    try {
      check_equation_wellformed(lhs, rhs, var);
    } catch (const Error& e) {
      if (opt_.strict_equations) throw;
      warnings_.push_back(e.what());
    }
    FunctionLattice fl(lat_, n, opt_.budget);
    IndexTable fv(fl.size()), gv(fl.size());
    Env inner = env;
    for (std::size_t x = 0; x < fl.size(); ++x) {
      inner.insert_or_assign(var, ValFunction(dom, lat_, fl.decode(x)));
      fv[x] = fl.encode(table(lhs, dom, inner));
      gv[x] = fl.encode(table(rhs, dom, inner));
    }
    auto r = fixpoint::solve(fl, std::span<const std::uint32_t>(fv), std::span<const std::uint32_t>(gv), least);
    return fl.decode(r.value);
  }

  IndexTable context(const Formula& f, const std::shared_ptr<const Domain>& dom, const Env&) {
    if (f.contexts().size() != dom->arity())
      throw Error(ErrorKind::Unsupported, "context abstraction over " + std::to_string(f.contexts().size()) +
                                              " coordinates applied to a domain of arity " +
                                              std::to_string(dom->arity()));
    std::vector<Coordinate> inner;
    std::vector<std::vector<std::size_t>> map(dom->arity());
    for (std::size_t i = 0; i < dom->arity(); ++i) {
      const auto& c = dom->coord(i);
      if (!c.system) throw Error(ErrorKind::Unsupported, "context abstraction needs the generating system");
      const auto& b = c.system->builder();
      std::vector<Process> roots;
      for (const auto& p : c.lts->states) roots.push_back(b.substitute(f.contexts()[i], f.holes()[i], p));
      auto lts = std::make_shared<const Lts>(build_lts(*c.system, roots, opt_.state_cap));
      for (const auto& r : roots) map[i].push_back(*lts->find(c.system->canonical(r)));
      inner.push_back({c.system, lts});
    }
    auto idom = Domain::of(std::move(inner));
    auto body = table(f.child(), idom, Env{});
    IndexTable out(dom->size());
    for (std::size_t t = 0; t < dom->size(); ++t) {
      std::vector<std::size_t> st(dom->arity());
      for (std::size_t i = 0; i < dom->arity(); ++i) st[i] = map[i][dom->state(t, i)];
      out[t] = body[idom->encode(st)];
    }
    return out;
  }

  Lattice lat_;
  AtomInterp atoms_;
  EvalOptions opt_;
  std::vector<FixpointRecord> records_;
  std::vector<std::string> warnings_;
};

/// Value of `f` at the tuple of processes, over the states reachable from it.
inline LatticeElement eval_at(const Formula& f, const AtomInterp& atoms, const Lattice& lat,
                              const std::vector<std::shared_ptr<const System>>& systems,
                              const std::vector<Process>& tuple, EvalOptions opt = {}) {
  auto dom = Domain::reachable(systems, tuple, opt.state_cap);
  Evaluator ev(lat, atoms, opt);
  std::vector<std::size_t> zero(tuple.size(), 0);
  return ev.eval(f, dom).at(zero);
}

}  // namespace pelw

#endif
