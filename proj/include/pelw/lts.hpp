#ifndef PELW_LTS_HPP
#define PELW_LTS_HPP

#include <algorithm>
#include <cstddef>
#include <deque>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "pelw/error.hpp"
#include "pelw/label.hpp"
#include "pelw/process.hpp"
#include "pelw/system.hpp"

namespace pelw {

struct Edge {
  std::size_t from = 0;
  Label label;
  std::size_t to = 0;

  friend bool operator==(const Edge& a, const Edge& b) {
    return a.from == b.from && a.to == b.to && a.label == b.label;
  }
  friend bool operator<(const Edge& a, const Edge& b) {
    if (a.from != b.from) return a.from < b.from;
    if (a.label != b.label) return a.label < b.label;
    return a.to < b.to;
  }
};

/// Finite labelled transition system over canonical processes. The idle
/// ∅-self-loop of every state is implicit and never stored.
struct Lts {
  std::vector<Process> states;
  std::size_t initial = 0;
  std::vector<Edge> edges;  // sorted by (from, label, to)
  std::size_t cap = 0;

  std::size_t size() const { return states.size(); }

  std::optional<std::size_t> find(const Process& p) const {
    auto it = index_.find(p.key());
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  /// Outgoing edges of `s` as a contiguous range of `edges`.
  std::vector<const Edge*> out(std::size_t s) const {
    std::vector<const Edge*> r;
    auto lo = std::lower_bound(edges.begin(), edges.end(), s, [](const Edge& e, std::size_t v) { return e.from < v; });
    for (; lo != edges.end() && lo->from == s; ++lo) r.push_back(&*lo);
    return r;
  }

  /// Distinct labels appearing on stored edges.
  std::vector<Label> labels() const {
    std::set<Label> ls;
    for (const auto& e : edges) ls.insert(e.label);
    return {ls.begin(), ls.end()};
  }

  std::size_t add_state(const Process& p) {
    auto [it, fresh] = index_.emplace(p.key(), states.size());
    if (fresh) states.push_back(p);
    return it->second;
  }

  void normalize() {
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  }

 private:
  std::unordered_map<std::string, std::size_t> index_;
};

/// Breadth-first closure of `step` from `roots` (the first root is the
/// initial state). States are numbered in discovery order with successors
/// visited in sorted order.
inline Lts build_lts(const System& sys, const std::vector<Process>& roots, std::size_t cap = 10000) {
  if (cap < 1) throw Error(ErrorKind::StateCapExceeded, "state cap must be at least 1");
  if (roots.empty()) throw Error(ErrorKind::Unsupported, "no initial process");
  Lts lts;
  lts.cap = cap;
  std::deque<std::size_t> frontier;
  auto discover = [&](const Process& p) {
    std::size_t before = lts.size();
    std::size_t id = lts.add_state(p);
    if (lts.size() > before) {
      if (lts.size() > cap)
        throw Error(ErrorKind::StateCapExceeded, "reachable states exceed cap " + std::to_string(cap) + " (frontier " +
                                                     std::to_string(frontier.size() + 1) + " unexpanded)");
      frontier.push_back(id);
    }
    return id;
  };
  for (const auto& r : roots) discover(sys.canonical(r));
  lts.initial = 0;
  while (!frontier.empty()) {
    std::size_t s = frontier.front();
    frontier.pop_front();
    for (const auto& t : sys.step(lts.states[s])) lts.edges.push_back({s, t.label, discover(t.target)});
  }
  lts.normalize();
  return lts;
}

inline Lts build_lts(const System& sys, const Process& initial, std::size_t cap = 10000) {
  return build_lts(sys, std::vector<Process>{initial}, cap);
}

/// Breadth-first exploration that expands only states within `depth` steps
/// of the root; states first seen at that depth are kept without edges.
inline Lts build_lts_bounded(const System& sys, const Process& root, std::size_t depth, std::size_t cap = 10000) {
  Lts lts;
  lts.cap = cap;
  std::vector<std::size_t> dist;
  std::deque<std::size_t> frontier;
  auto discover = [&](const Process& p, std::size_t d) {
    std::size_t before = lts.size();
    std::size_t id = lts.add_state(p);
    if (lts.size() > before) {
      if (lts.size() > cap)
        throw Error(ErrorKind::StateCapExceeded, "reachable states exceed cap " + std::to_string(cap));
      dist.push_back(d);
      frontier.push_back(id);
    }
    return id;
  };
  discover(sys.canonical(root), 0);
  while (!frontier.empty()) {
    std::size_t s = frontier.front();
    frontier.pop_front();
    if (dist[s] >= depth) continue;
    for (const auto& t : sys.step(lts.states[s])) lts.edges.push_back({s, t.label, discover(t.target, dist[s] + 1)});
  }
  lts.normalize();
  return lts;
}

/// Explicit LTS over `n` states named s0..s(n-1).
inline Lts lts_from_edges(std::size_t n, std::vector<Edge> edges, std::size_t initial = 0) {
  Lts lts;
  for (std::size_t i = 0; i < n; ++i)
    lts.add_state(Process::make(ProcKind::Const, "s" + std::to_string(i), {}, {}, {}));
  for (const auto& e : edges)
    if (e.from >= n || e.to >= n) throw Error(ErrorKind::NotFound, "edge endpoint out of range");
  lts.edges = std::move(edges);
  lts.initial = initial;
  lts.cap = n;
  lts.normalize();
  return lts;
}

/// Weak transitions: p ⇒A r iff p ε⇒ q →B q' ε⇒ r with A = B minus every τ,
/// where ε⇒ follows steps labelled only by τ. Resulting ∅-self-loops are
/// implicit and dropped.
inline Lts weak_saturate(const Lts& lts) {
  const std::size_t n = lts.size();
  std::vector<std::vector<std::size_t>> tau_succ(n);
  for (const auto& e : lts.edges)
    if (e.label.is_internal()) tau_succ[e.from].push_back(e.to);
  std::vector<std::vector<std::size_t>> closure(n);
  for (std::size_t s = 0; s < n; ++s) {
    std::vector<bool> seen(n, false);
    std::deque<std::size_t> q{s};
    seen[s] = true;
    while (!q.empty()) {
      auto u = q.front();
      q.pop_front();
      closure[s].push_back(u);
      for (auto v : tau_succ[u])
        if (!seen[v]) {
          seen[v] = true;
          q.push_back(v);
        }
    }
    std::sort(closure[s].begin(), closure[s].end());
  }
  Lts out = lts;
  out.edges.clear();
  for (std::size_t p = 0; p < n; ++p) {
    std::set<std::pair<Label, std::size_t>> weak;
    for (auto q : closure[p])
      for (const Edge* e : lts.out(q)) {
        Label a = e->label.without_tau();
        for (auto r : closure[e->to]) weak.insert({a, r});
      }
    for (const auto& [a, r] : weak)
      if (!(a.empty() && r == p)) out.edges.push_back({p, a, r});
  }
  out.normalize();
  return out;
}

}  // namespace pelw

#endif
