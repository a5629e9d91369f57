#ifndef PELW_BISIM_HPP
#define PELW_BISIM_HPP

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "pelw/eval.hpp"
#include "pelw/formula.hpp"
#include "pelw/lattice.hpp"
#include "pelw/lts.hpp"

namespace pelw {

/// Equivalence on LTS states given by block numbers. Blocks are numbered
/// in order of their smallest state.
struct Partition {
  std::vector<std::size_t> block;
  std::size_t count = 0;

  bool same(std::size_t p, std::size_t q) const { return block.at(p) == block.at(q); }

  std::vector<std::vector<std::size_t>> blocks() const {
    std::vector<std::vector<std::size_t>> out(count);
    for (std::size_t s = 0; s < block.size(); ++s) out[block[s]].push_back(s);
    return out;
  }

  static Partition total(std::size_t n) { return {std::vector<std::size_t>(n, 0), n ? 1u : 0u}; }
};

struct BisimResult {
  bool bisimilar = false;
  Partition partition;   // the coarsest bisimulation (or the k-th approximant)
  std::size_t rounds = 0;
};

namespace detail {

using Successors = std::vector<std::vector<std::pair<Label, std::size_t>>>;

inline Successors successors(const Lts& lts, bool idle_loops) {
  Successors out(lts.size());
  for (const auto& e : lts.edges) out[e.from].push_back({e.label, e.to});
  if (idle_loops)
    for (std::size_t s = 0; s < lts.size(); ++s) out[s].push_back({Label{}, s});
  return out;
}

/// One signature-refinement round: states stay together iff they share the
/// current block and the set of (label, successor block) pairs.
inline Partition refine_once(const Successors& succ, const Partition& p) {
  std::map<std::pair<std::size_t, std::set<std::pair<Label, std::size_t>>>, std::size_t> ids;
  Partition out{std::vector<std::size_t>(succ.size()), 0};
  for (std::size_t s = 0; s < succ.size(); ++s) {
    std::set<std::pair<Label, std::size_t>> sig;
    for (const auto& [l, t] : succ[s]) sig.insert({l, p.block[t]});
    auto it = ids.emplace(std::make_pair(p.block[s], std::move(sig)), ids.size()).first;
    out.block[s] = it->second;
  }
  out.count = ids.size();
  return out;
}

/// Refines from the total relation for at most `max_rounds` rounds, or to
/// stability when unbounded.
inline std::pair<Partition, std::size_t> refine(const Successors& succ, std::optional<std::size_t> max_rounds) {
  Partition p = Partition::total(succ.size());
  std::size_t rounds = 0;
  while (!max_rounds || rounds < *max_rounds) {
    Partition next = refine_once(succ, p);
    ++rounds;
    const bool stable = next.count == p.count;
    p = std::move(next);
    if (stable) break;
  }
  return {p, rounds};
}

inline void check_states(const Lts& lts, std::size_t p, std::size_t q) {
  if (p >= lts.size() || q >= lts.size()) throw Error(ErrorKind::NotFound, "state index out of range");
}

}  // namespace detail

/// Coarsest strong bisimulation of the LTS.
inline BisimResult strong_partition(const Lts& lts) {
  auto [p, rounds] = detail::refine(detail::successors(lts, false), std::nullopt);
  return {false, std::move(p), rounds};
}

/// Coarsest weak bisimulation: strong bisimulation of the weak saturation
/// with explicit idle steps, so an empty weak move can be answered by
/// staying put.
inline BisimResult weak_partition(const Lts& lts) {
  auto [p, rounds] = detail::refine(detail::successors(weak_saturate(lts), true), std::nullopt);
  return {false, std::move(p), rounds};
}

inline BisimResult strong_bisimilar(const Lts& lts, std::size_t p, std::size_t q) {
  detail::check_states(lts, p, q);
  auto r = strong_partition(lts);
  r.bisimilar = r.partition.same(p, q);
  return r;
}

inline BisimResult weak_bisimilar(const Lts& lts, std::size_t p, std::size_t q) {
  detail::check_states(lts, p, q);
  auto r = weak_partition(lts);
  r.bisimilar = r.partition.same(p, q);
  return r;
}

/// k-th strong approximant: ~0 is total, ~(k+1) is one matching round over ~k.
inline BisimResult strong_approx(std::size_t k, const Lts& lts, std::size_t p, std::size_t q) {
  detail::check_states(lts, p, q);
  auto [part, rounds] = detail::refine(detail::successors(lts, false), k);
  return {part.same(p, q), std::move(part), rounds};
}

inline BisimResult weak_approx(std::size_t k, const Lts& lts, std::size_t p, std::size_t q) {
  detail::check_states(lts, p, q);
  auto [part, rounds] = detail::refine(detail::successors(weak_saturate(lts), true), k);
  return {part.same(p, q), std::move(part), rounds};
}

/// Smallest k with p and q not related by the k-th approximant, if any.
inline std::optional<std::size_t> distinguishing_depth(const Lts& lts, std::size_t p, std::size_t q, bool weak = false) {
  detail::check_states(lts, p, q);
  auto succ = detail::successors(weak ? weak_saturate(lts) : lts, weak);
  Partition part = Partition::total(lts.size());
  for (std::size_t k = 0;; ++k) {
    if (!part.same(p, q)) return k;
    Partition next = detail::refine_once(succ, part);
    if (next.count == part.count) return std::nullopt;
    part = std::move(next);
  }
}

/// nu F . F == /\_a ([a]_1 <a>_2 F /\ [a]_2 <a>_1 F) over the labels given.
inline Formula bisimulation_formula(const std::vector<Label>& alphabet) {
  const auto f = Formula::var("F");
  std::optional<Formula> body;
  for (const auto& a : alphabet) {
    auto clause = Formula::conj(Formula::box(a, 1, Formula::diamond(a, 2, f)), Formula::box(a, 2, Formula::diamond(a, 1, f)));
    body = body ? Formula::conj(*body, clause) : clause;
  }
  if (!body) {
    // No labels: every pair is bisimilar; any nu-equation whose body is F
    // has greatest solution top.
    body = f;
  }
  return Formula::nu("F", *body);
}

/// Strong bisimilarity decided by evaluating the bisimulation formula over
/// the Bool lattice on the pair domain. The conjunction ranges over
/// `alphabet`, or over every label occurring in the LTS when empty.
inline bool bisim_via_pel(const Lts& lts, std::size_t p, std::size_t q, std::vector<Label> alphabet = {}) {
  detail::check_states(lts, p, q);
  if (alphabet.empty()) alphabet = lts.labels();
  auto shared = std::make_shared<const Lts>(lts);
  auto dom = Domain::of({{nullptr, shared}, {nullptr, shared}});
  auto lat = make_lattice(LatticeSpec::boolean());
  Evaluator ev(lat, AtomInterp{});
  return ev.eval(bisimulation_formula(alphabet), dom).at({p, q}) == lat.top();
}

}  // namespace pelw

#endif
