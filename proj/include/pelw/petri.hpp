#ifndef PELW_PETRI_HPP
#define PELW_PETRI_HPP

#include <algorithm>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "pelw/error.hpp"
#include "pelw/label.hpp"
#include "pelw/lts.hpp"
#include "pelw/process.hpp"
#include "pelw/simulation.hpp"
#include "pelw/system.hpp"
#include "pelw/text.hpp"

namespace pelw {

/// 1-safe marking: the set of marked places.
using Marking = std::set<std::string>;

struct PetriNet {
  std::vector<std::string> places;
  std::vector<std::string> transitions;
  std::vector<std::pair<std::string, std::string>> arcs;  // place->transition or transition->place
  Marking initial;

  bool is_place(const std::string& x) const { return std::find(places.begin(), places.end(), x) != places.end(); }
  bool is_transition(const std::string& x) const {
    return std::find(transitions.begin(), transitions.end(), x) != transitions.end();
  }

  Marking pre(const std::string& t) const {
    Marking out;
    for (const auto& [x, y] : arcs)
      if (y == t) out.insert(x);
    return out;
  }

  Marking post(const std::string& t) const {
    Marking out;
    for (const auto& [x, y] : arcs)
      if (x == t) out.insert(y);
    return out;
  }

  void validate() const {
    std::set<std::string> seen;
    for (const auto& p : places)
      if (!seen.insert(p).second) throw Error(ErrorKind::AlphabetClash, "duplicate place '" + p + "'");
    for (const auto& t : transitions)
      if (!seen.insert(t).second) throw Error(ErrorKind::AlphabetClash, "'" + t + "' is both a place and a transition or repeated");
    for (const auto& [x, y] : arcs)
      if (!((is_place(x) && is_transition(y)) || (is_transition(x) && is_place(y))))
        throw Error(ErrorKind::NotFound, "arc " + x + "->" + y + " must join a place and a transition");
    check_marking(initial);
  }

  void check_marking(const Marking& m) const {
    for (const auto& p : m)
      if (!is_place(p)) throw Error(ErrorKind::NotFound, "marking names unknown place '" + p + "'");
  }
};

/// Parses `places: p1, p2; transitions: t; arcs: p1->t, t->p2; marking: p1;`.
inline PetriNet parse_pn(std::string_view src) {
  text::Cursor in(src);
  PetriNet n;
  auto list = [&](auto&& item) {
    if (in.peek() == ';' || in.at_end()) return;
    do item();
    while (in.accept(","));
  };
  while (!in.at_end()) {
    auto section = in.identifier();
    in.expect(":");
    if (section == "places") {
      list([&] { n.places.push_back(in.identifier()); });
    } else if (section == "transitions") {
      list([&] { n.transitions.push_back(in.identifier()); });
    } else if (section == "arcs") {
      list([&] {
        auto x = in.identifier();
        in.expect("->");
        n.arcs.push_back({x, in.identifier()});
      });
    } else if (section == "marking" || section == "initial") {
      list([&] { n.initial.insert(in.identifier()); });
    } else {
      in.fail("unknown section '" + section + "'");
    }
    in.accept(";");
  }
  n.validate();
  return n;
}

/// Fires one transition. Inputs must be marked; outputs must be unmarked
/// unless they are also inputs.
inline Marking pn_fire(const PetriNet& n, const Marking& m, const std::string& t) {
  if (!n.is_transition(t)) throw Error(ErrorKind::NotFound, "unknown transition '" + t + "'");
  const Marking in = n.pre(t), out = n.post(t);
  for (const auto& p : in)
    if (!m.count(p)) throw Error(ErrorKind::NotEnabled, "transition '" + t + "' needs a token in '" + p + "'");
  Marking next = m;
  for (const auto& p : in) next.erase(p);
  for (const auto& p : out)
    if (!next.insert(p).second) throw Error(ErrorKind::UnsafeFiring, "transition '" + t + "' would put a second token in '" + p + "'");
  return next;
}

/// Every non-empty set of concurrently enabled transitions with pairwise
/// disjoint inputs whose firing keeps the marking 1-safe, with the result.
inline std::vector<std::pair<std::vector<std::string>, Marking>> pn_steps(const PetriNet& n, const Marking& m) {
  std::vector<std::string> enabled;
  for (const auto& t : n.transitions) {
    auto in = n.pre(t);
    if (std::all_of(in.begin(), in.end(), [&](const std::string& p) { return m.count(p) > 0; })) enabled.push_back(t);
  }
  if (enabled.size() > 20) throw Error(ErrorKind::BudgetExceeded, "too many concurrently enabled transitions");
  std::vector<std::pair<std::vector<std::string>, Marking>> out;
  for (std::size_t mask = 1; mask < (std::size_t{1} << enabled.size()); ++mask) {
    std::vector<std::string> set;
    Marking consumed, produced;
    bool ok = true;
    for (std::size_t i = 0; i < enabled.size() && ok; ++i) {
      if (!(mask >> i & 1)) continue;
      set.push_back(enabled[i]);
      for (const auto& p : n.pre(enabled[i])) ok = ok && consumed.insert(p).second;
      for (const auto& p : n.post(enabled[i])) ok = ok && produced.insert(p).second;
    }
    if (!ok) continue;
    Marking next;
    std::set_difference(m.begin(), m.end(), consumed.begin(), consumed.end(), std::inserter(next, next.end()));
    if (std::any_of(produced.begin(), produced.end(), [&](const std::string& p) { return next.count(p) > 0; })) continue;
    next.insert(produced.begin(), produced.end());
    out.push_back({std::move(set), std::move(next)});
  }
  return out;
}

/// Process system for a net: places are constants, transitions are actions,
/// and each transition is the rule (inputs |{}| ...) -t-> (outputs |{}| ...).
class PnEncoding {
 public:
  explicit PnEncoding(PetriNet n) : n_(std::move(n)) {
    n_.validate();
    SystemSpec spec;
    spec.constants = n_.places;
    spec.alphabet = n_.transitions;
    for (const auto& t : n_.transitions) {
      auto in = n_.pre(t);
      if (in.empty()) throw Error(ErrorKind::Unsupported, "source transition '" + t + "' has no input place");
      spec.rules.push_back({places(ProcessBuilder{}, in), t, places(ProcessBuilder{}, n_.post(t))});
    }
    sys_ = System(std::move(spec));
  }

  const PetriNet& net() const { return n_; }
  const System& system() const { return sys_; }

  /// Same net with a different rule set (used for fault injection).
  PnEncoding with_rules(std::vector<DeltaRule> rules) const {
    PnEncoding e = *this;
    SystemSpec spec = sys_.spec();
    spec.rules = std::move(rules);
    e.sys_ = System(std::move(spec));
    return e;
  }

  Process encode(const Marking& m) const {
    n_.check_marking(m);
    return places(sys_.builder(), m);
  }

  Marking decode(const Process& p) const {
    std::vector<Process> ops;
    if (p.kind() == ProcKind::Par && p.names().empty())
      ops = p.children();
    else if (p.kind() == ProcKind::Const)
      ops = {p};
    else if (!p.is_eps())
      throw Error(ErrorKind::Unsupported, "not an encoded marking: " + p.to_string());
    Marking m;
    for (const auto& o : ops) {
      if (o.kind() != ProcKind::Const || !n_.is_place(o.name()))
        throw Error(ErrorKind::Unsupported, "not an encoded marking: " + p.to_string());
      if (!m.insert(o.name()).second) throw Error(ErrorKind::UnsafeFiring, "place '" + o.name() + "' holds two tokens");
    }
    return m;
  }

  /// Breadth-first lockstep check up to `depth` firings: at every reached
  /// marking the process steps, read as (label, decoded marking), must be
  /// exactly the net's safe concurrent steps.
  SimulationReport check(const Marking& start, std::size_t depth) const {
    SimulationReport r;
    std::map<Marking, std::size_t> level{{start, 0}};
    std::deque<std::pair<Marking, Process>> queue{{start, encode(start)}};
    auto fail = [&](std::size_t k, std::string msg) {
      r.holds = false;
      r.divergence = k;
      r.message = "depth " + std::to_string(k) + ": " + msg;
      return r;
    };
    while (!queue.empty()) {
      auto [m, p] = queue.front();
      queue.pop_front();
      const std::size_t k = level[m];
      ++r.states;
      if (k >= depth) continue;
      std::map<Label, Marking> want;
      for (auto& [ts, next] : pn_steps(n_, m)) want.emplace(Label::of(ts), next);
      std::map<Label, Marking> got;
      for (const auto& t : sys_.step(p)) {
        Marking next;
        try {
          next = decode(t.target);
        } catch (const Error& e) {
          return fail(k, std::string("process step ") + t.label.to_string() + " leaves the net: " + e.what());
        }
        if (!got.emplace(t.label, next).second) return fail(k, "two process steps labelled " + t.label.to_string());
      }
      for (const auto& [l, next] : want) {
        auto it = got.find(l);
        if (it == got.end()) return fail(k, "net step " + l.to_string() + " from " + show(m) + " has no process step");
        if (it->second != next) return fail(k, "step " + l.to_string() + " from " + show(m) + " decodes to " + show(it->second));
      }
      for (const auto& [l, next] : got)
        if (!want.count(l)) return fail(k, "process step " + l.to_string() + " from " + show(m) + " is not a net step");
      for (const auto& [l, next] : want)
        if (level.emplace(next, k + 1).second) queue.push_back({next, encode(next)});
      r.steps = std::max(r.steps, k + 1);
    }
    r.message = "simulation holds to depth " + std::to_string(depth) + " over " + std::to_string(r.states) + " markings";
    return r;
  }

  static std::string show(const Marking& m) { return "{" + text::join(std::vector<std::string>(m.begin(), m.end()), ",") + "}"; }

 private:
  static Process places(const ProcessBuilder& b, const Marking& m) {
    std::vector<Process> ops;
    for (const auto& p : m) ops.push_back(b.constant(p));
    if (ops.empty()) return b.eps();
    if (ops.size() == 1) return ops[0];
    return b.par({}, ops);
  }

  PetriNet n_;
  System sys_;
};

/// Reachability graph of the net's safe concurrent steps, expanded to
/// `depth` firings from `m`. Edge labels are the fired transition sets.
struct PnGraph {
  std::vector<Marking> markings;
  std::vector<std::tuple<std::size_t, Label, std::size_t>> edges;
};

inline PnGraph pn_reachability(const PetriNet& n, const Marking& m, std::size_t depth) {
  PnGraph g;
  std::map<Marking, std::size_t> id;
  std::vector<std::size_t> dist;
  std::deque<std::size_t> queue;
  auto discover = [&](const Marking& x, std::size_t d) {
    auto [it, fresh] = id.emplace(x, g.markings.size());
    if (fresh) {
      g.markings.push_back(x);
      dist.push_back(d);
      queue.push_back(it->second);
    }
    return it->second;
  };
  discover(m, 0);
  while (!queue.empty()) {
    auto s = queue.front();
    queue.pop_front();
    if (dist[s] >= depth) continue;
    for (auto& [ts, next] : pn_steps(n, g.markings[s])) g.edges.emplace_back(s, Label::of(ts), discover(next, dist[s] + 1));
  }
  std::sort(g.edges.begin(), g.edges.end());
  return g;
}

inline std::pair<SystemSpec, Process> trans_pn(const PetriNet& n, const Marking& m) {
  PnEncoding enc(n);
  return {enc.system().spec(), enc.encode(m)};
}

inline SimulationReport check_pn_simulation(const PetriNet& n, const Marking& m, std::size_t depth) {
  return PnEncoding(n).check(m, depth);
}

}  // namespace pelw

#endif
