#ifndef PELW_SYSTEM_HPP
#define PELW_SYSTEM_HPP

#include <algorithm>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pelw/error.hpp"
#include "pelw/label.hpp"
#include "pelw/process.hpp"
#include "pelw/text.hpp"

namespace pelw {

/// Basic transition rule lhs -action-> rhs.
struct DeltaRule {
  Process lhs;
  std::string action;
  Process rhs;
};

/// Declared constants, alphabet and Δ. Rules are kept as parsed; `System`
/// canonicalizes them once the naming context is known.
struct SystemSpec {
  std::vector<std::string> constants;
  std::vector<std::string> alphabet;
  std::vector<DeltaRule> rules;
  std::optional<Process> init;
  bool declared_constants = false;
  bool declared_alphabet = false;
};

struct Transition {
  Label label;
  Process target;

  friend bool operator==(const Transition& a, const Transition& b) {
    return a.label == b.label && a.target == b.target;
  }
  friend bool operator<(const Transition& a, const Transition& b) {
    if (a.label != b.label) return a.label < b.label;
    return a.target.key() < b.target.key();
  }
};

namespace detail {

inline NameSet raw_free_names(const Process& p, const NameContext& ctx) {
  switch (p.kind()) {
    case ProcKind::Eps:
    case ProcKind::Hole: return {};
    case ProcKind::Const: return ctx.of(p.name());
    case ProcKind::Restrict: return set_minus(raw_free_names(p.children()[0], ctx), p.names());
    default: {
      NameSet out;
      for (const auto& c : p.children()) out = set_union(out, raw_free_names(c, ctx));
      return out;
    }
  }
}

inline void collect_constants(const Process& p, std::set<std::string>& out) {
  if (p.kind() == ProcKind::Const) out.insert(p.name());
  for (const auto& c : p.children()) collect_constants(c, out);
}

/// Least naming context: every constant occurring in a rule's lhs gets the
/// rule's action and the free names of its rhs.
inline NameContext derive_name_context(const std::vector<DeltaRule>& rules) {
  NameContext ctx;
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& r : rules) {
      NameSet add = set_union({r.action}, raw_free_names(r.rhs, ctx));
      std::set<std::string> consts;
      collect_constants(r.lhs, consts);
      for (const auto& c : consts) {
        auto& cur = ctx.constant_names[c];
        auto next = set_union(cur, add);
        if (next != cur) {
          cur = std::move(next);
          changed = true;
        }
      }
    }
  }
  return ctx;
}

inline std::set<std::string> to_set(const NameSet& v) { return {v.begin(), v.end()}; }

}  // namespace detail

/// A compiled system: naming context, canonical Δ indexed by lhs, and the
/// one-step operational semantics.
class System {
 public:
  System() : System(SystemSpec{}) {}

  explicit System(SystemSpec spec) : spec_(std::move(spec)) {
    ctx_ = std::make_shared<NameContext>(detail::derive_name_context(spec_.rules));
    builder_ = ProcessBuilder(ctx_.get());
    for (auto& r : spec_.rules) {
      r.lhs = builder_.canonicalize(r.lhs);
      r.rhs = builder_.canonicalize(r.rhs);
      if (r.lhs.is_eps()) throw Error(ErrorKind::SyntaxError, "rule left-hand side must not be eps");
      if (r.action == kTau) throw Error(ErrorKind::SyntaxError, "tau cannot label a rule");
      by_lhs_[r.lhs.key()].push_back(r);
      if (r.lhs.kind() == ProcKind::Choice || r.lhs.kind() == ProcKind::Par) group_rules_.push_back(r);
    }
    if (spec_.init) spec_.init = builder_.canonicalize(*spec_.init);
  }

  System(const System& o) : System(o.spec_) {}
  System& operator=(const System& o) {
    if (this != &o) *this = System(o.spec_);
    return *this;
  }
  System(System&&) = default;
  System& operator=(System&&) = default;

  const SystemSpec& spec() const { return spec_; }
  const ProcessBuilder& builder() const { return builder_; }
  const NameContext& names() const { return *ctx_; }
  const std::vector<DeltaRule>& rules() const { return spec_.rules; }

  std::set<std::string> constants() const {
    std::set<std::string> out(spec_.constants.begin(), spec_.constants.end());
    for (const auto& r : spec_.rules) {
      detail::collect_constants(r.lhs, out);
      detail::collect_constants(r.rhs, out);
    }
    return out;
  }

  /// Declared alphabet plus every rule action.
  std::vector<std::string> alphabet() const {
    std::set<std::string> out(spec_.alphabet.begin(), spec_.alphabet.end());
    for (const auto& r : spec_.rules) out.insert(r.action);
    return {out.begin(), out.end()};
  }

  Process canonical(const Process& p) const { return builder_.canonicalize(p); }

  /// Parses under this system's context; strict mode rejects undeclared constants.
  Process parse(std::string_view src, bool strict = false) const {
    std::set<std::string> known;
    if (strict) known = constants();
    return builder_.canonicalize(parse_process_raw(src, strict ? &known : nullptr));
  }

  /// All one-step derivatives of a canonical process, excluding the idle step.
  const std::vector<Transition>& step(const Process& p) const {
    auto it = memo_.find(p.key());
    if (it != memo_.end()) return it->second;
    std::vector<Transition> out;
    derive(p, out);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return memo_.emplace(p.key(), std::move(out)).first->second;
  }

 private:
  void whole_match(const std::string& key, std::vector<Transition>& out) const {
    auto it = by_lhs_.find(key);
    if (it == by_lhs_.end()) return;
    for (const auto& r : it->second) out.push_back({Label{r.action}, r.rhs});
  }

  /// Index sets of `ops` whose multiset of keys equals the lhs operands.
  static void match_subsets(const std::vector<Process>& lhs, std::size_t li, const std::vector<Process>& ops,
                            std::vector<bool>& used, std::vector<std::size_t>& cur,
                            std::vector<std::vector<std::size_t>>& out) {
    if (li == lhs.size()) {
      out.push_back(cur);
      return;
    }
    // Equal lhs keys are consumed with increasing operand indices to avoid repeats.
    std::size_t start = 0;
    if (li > 0 && lhs[li - 1].key() == lhs[li].key()) start = cur.back() + 1;
    for (std::size_t i = start; i < ops.size(); ++i) {
      if (used[i] || ops[i].key() != lhs[li].key()) continue;
      used[i] = true;
      cur.push_back(i);
      match_subsets(lhs, li + 1, ops, used, cur, out);
      cur.pop_back();
      used[i] = false;
    }
  }

  struct GroupMove {
    std::vector<std::size_t> members;
    Label label;
    Process rhs;
  };

  std::vector<GroupMove> group_moves(const Process& p) const {
    std::vector<GroupMove> out;
    for (const auto& r : group_rules_) {
      if (r.lhs.kind() != p.kind() || r.lhs.names() != p.names()) continue;
      if (r.lhs.children().size() > p.children().size()) continue;
      std::vector<bool> used(p.children().size(), false);
      std::vector<std::size_t> cur;
      std::vector<std::vector<std::size_t>> sets;
      match_subsets(r.lhs.children(), 0, p.children(), used, cur, sets);
      for (auto& s : sets) out.push_back({std::move(s), Label{r.action}, r.rhs});
    }
    return out;
  }

  void derive(const Process& p, std::vector<Transition>& out) const {
    whole_match(p.key(), out);
    switch (p.kind()) {
      case ProcKind::Eps:
      case ProcKind::Const:
      case ProcKind::Hole: return;
      case ProcKind::Seq: derive_seq(p, out); return;
      case ProcKind::Choice: derive_choice(p, out); return;
      case ProcKind::Par: derive_par(p, out); return;
      case ProcKind::Restrict: {
        const auto hidden = detail::to_set(p.names());
        for (const auto& t : step(p.children()[0]))
          out.push_back({t.label.hide(hidden), builder_.restrict(p.names(), t.target)});
        return;
      }
    }
  }

  void derive_seq(const Process& p, std::vector<Transition>& out) const {
    const auto& cs = p.children();
    auto rest_after = [&](std::size_t j) { return std::vector<Process>(cs.begin() + j, cs.end()); };
    for (const auto& t : step(cs[0])) {
      auto parts = rest_after(1);
      parts.insert(parts.begin(), t.target);
      out.push_back({t.label, builder_.seq(parts)});
    }
    // Longer prefixes (P;Q);R ≡ P;(Q;R) may themselves be rule redexes.
    for (std::size_t j = 2; j < cs.size(); ++j) {
      Process prefix = builder_.seq(std::vector<Process>(cs.begin(), cs.begin() + j));
      std::vector<Transition> heads;
      whole_match(prefix.key(), heads);
      for (const auto& t : heads) {
        auto parts = rest_after(j);
        parts.insert(parts.begin(), t.target);
        out.push_back({t.label, builder_.seq(parts)});
      }
    }
  }

  void derive_choice(const Process& p, std::vector<Transition>& out) const {
    for (const auto& c : p.children())
      for (const auto& t : step(c)) out.push_back(t);
    for (const auto& g : group_moves(p)) out.push_back({g.label, g.rhs});
  }

  void derive_par(const Process& p, std::vector<Transition>& out) const {
    const auto& ops = p.children();
    const auto sync = detail::to_set(p.names());
    const auto groups = group_moves(p);
    std::vector<std::vector<std::size_t>> groups_from(ops.size());
    for (std::size_t g = 0; g < groups.size(); ++g) {
      auto first = *std::min_element(groups[g].members.begin(), groups[g].members.end());
      groups_from[first].push_back(g);
    }
    std::vector<bool> covered(ops.size(), false);
    std::vector<Label> labels;
    std::vector<Process> next;
    bool idled = false;

    auto emit = [&] {
      if (labels.empty()) return;
      const Label shared = labels[0].project(sync);
      for (const auto& l : labels)
        if (l.project(sync) != shared) return;
      if (idled && !shared.empty()) return;
      out.push_back({label_sync_all(labels, sync), builder_.par(p.names(), next)});
    };

    auto rec = [&](auto&& self, std::size_t i) -> void {
      if (i == ops.size()) {
        emit();
        return;
      }
      if (covered[i]) {
        self(self, i + 1);
        return;
      }
      // Idle.
      bool was = idled;
      idled = true;
      next.push_back(ops[i]);
      self(self, i + 1);
      next.pop_back();
      idled = was;
      // Own move.
      for (const auto& t : step(ops[i])) {
        labels.push_back(t.label);
        next.push_back(t.target);
        self(self, i + 1);
        next.pop_back();
        labels.pop_back();
      }
      // Rule redex formed by a group of operands starting here.
      for (auto g : groups_from[i]) {
        const auto& gm = groups[g];
        bool free = std::none_of(gm.members.begin(), gm.members.end(), [&](std::size_t m) { return covered[m]; });
        if (!free) continue;
        for (auto m : gm.members) covered[m] = true;
        labels.push_back(gm.label);
        next.push_back(gm.rhs);
        self(self, i + 1);
        next.pop_back();
        labels.pop_back();
        for (auto m : gm.members) covered[m] = false;
      }
    };
    rec(rec, 0);
  }

  SystemSpec spec_;
  std::shared_ptr<NameContext> ctx_;
  ProcessBuilder builder_;
  std::map<std::string, std::vector<DeltaRule>> by_lhs_;
  std::vector<DeltaRule> group_rules_;
  mutable std::unordered_map<std::string, std::vector<Transition>> memo_;
};

/// Parses `consts: ...; alphabet: ...; rules: L -a-> R; ...; init: P;`.
/// Sections are optional and may appear in any order. A rule whose lhs is
/// a sequence must parenthesise it. With `strict`, undeclared constants
/// and actions are rejected.
inline SystemSpec parse_system_spec(std::string_view src, bool strict = true) {
  text::Cursor in(src);
  SystemSpec spec;
  auto name_list = [&](std::vector<std::string>& out) {
    if (in.peek() == ';' || in.at_end()) return;
    do {
      auto n = in.identifier();
      if (n == kTau || n == "eps" || n == "new") in.fail("'" + n + "' is reserved");
      out.push_back(n);
    } while (in.accept(","));
  };
  struct RawRule {
    Process lhs;
    std::string action;
    Process rhs;
  };
  std::vector<RawRule> raw;
  while (!in.at_end()) {
    auto section = in.identifier();
    in.expect(":");
    if (section == "consts" || section == "constants") {
      spec.declared_constants = true;
      name_list(spec.constants);
      in.accept(";");
    } else if (section == "alphabet" || section == "actions") {
      spec.declared_alphabet = true;
      name_list(spec.alphabet);
      in.accept(";");
    } else if (section == "rules") {
      while (!in.at_end()) {
        // Stop at the next section header.
        auto save = in.pos();
        if (in.at_identifier()) {
          in.identifier();
          bool header = in.looking_at(":");
          in.set_pos(save);
          if (header) break;
        }
        detail::ProcessParser lhs_parser(in, false, nullptr);
        Process lhs = lhs_parser.parse_choice();
        in.expect("-");
        auto action = in.identifier();
        in.expect("->");
        detail::ProcessParser rhs_parser(in, false, nullptr);
        Process rhs = rhs_parser.parse_choice();
        if (!in.at_end()) in.expect(";");
        raw.push_back({lhs, action, rhs});
      }
    } else if (section == "init") {
      detail::ProcessParser p(in, false, nullptr);
      spec.init = p.parse_choice();
      in.accept(";");
    } else {
      in.fail("unknown section '" + section + "'");
    }
  }
  std::set<std::string> known(spec.constants.begin(), spec.constants.end());
  std::set<std::string> actions(spec.alphabet.begin(), spec.alphabet.end());
  auto check = [&](const Process& p) {
    if (!strict || !spec.declared_constants) return;
    std::set<std::string> used;
    detail::collect_constants(p, used);
    for (const auto& c : used)
      if (!known.count(c)) throw Error(ErrorKind::UnknownConstant, "unknown process constant '" + c + "'");
  };
  for (auto& r : raw) {
    check(r.lhs);
    check(r.rhs);
    if (r.action == kTau) throw Error(ErrorKind::SyntaxError, "tau cannot label a rule");
    if (strict && spec.declared_alphabet && !actions.count(r.action))
      throw Error(ErrorKind::NotFound, "action '" + r.action + "' is not in the alphabet");
    spec.rules.push_back({std::move(r.lhs), std::move(r.action), std::move(r.rhs)});
  }
  if (spec.init) check(*spec.init);
  return spec;
}

/// Text form accepted by parse_system_spec.
inline std::string format_system_spec(const SystemSpec& spec) {
  std::string out;
  out += "consts: " + text::join(spec.constants, ", ") + ";\n";
  out += "alphabet: " + text::join(spec.alphabet, ", ") + ";\n";
  out += "rules:\n";
  for (const auto& r : spec.rules) {
    std::string lhs = r.lhs.to_string();
    if (r.lhs.kind() == ProcKind::Seq) lhs = "(" + lhs + ")";
    out += "  " + lhs + " -" + r.action + "-> " + r.rhs.to_string() + ";\n";
  }
  if (spec.init) out += "init: " + spec.init->to_string() + ";\n";
  return out;
}

inline System parse_system(std::string_view src, bool strict = true) { return System(parse_system_spec(src, strict)); }

}  // namespace pelw

#endif
