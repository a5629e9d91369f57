#ifndef PELW_FIXPOINT_HPP
#define PELW_FIXPOINT_HPP

#include <concepts>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pelw/error.hpp"
#include "pelw/lattice.hpp"

namespace pelw {

/// Anything exposing a finite lattice through dense element indices.
/// `Lattice` models it directly; the evaluator models it for function
/// lattices whose elements are encoded tables.
template <class L>
concept FiniteOrder = requires(const L& l, std::size_t i) {
  { l.size() } -> std::convertible_to<std::size_t>;
  { l.leq_index(i, i) } -> std::convertible_to<bool>;
  { l.meet_index(i, i) } -> std::convertible_to<std::size_t>;
  { l.join_index(i, i) } -> std::convertible_to<std::size_t>;
  { l.bot_index() } -> std::convertible_to<std::size_t>;
  { l.top_index() } -> std::convertible_to<std::size_t>;
};

using IndexTable = std::vector<std::uint32_t>;

struct SolveResult {
  std::uint32_t value = 0;
  std::size_t iterations = 0;
};

namespace fixpoint {

template <FiniteOrder Dom, FiniteOrder Cod>
std::vector<std::pair<std::uint32_t, std::uint32_t>> monotonicity_violations(const Dom& dom, const Cod& cod,
                                                                            std::span<const std::uint32_t> f) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
  for (std::uint32_t x = 0; x < dom.size(); ++x)
    for (std::uint32_t y = 0; y < dom.size(); ++y)
      if (x != y && dom.leq_index(x, y) && !cod.leq_index(f[x], f[y])) out.emplace_back(x, y);
  return out;
}

/// Least (or greatest) element of {x | f(x) = u}; the meet (join) of the
/// preimage must itself lie in the preimage.
template <FiniteOrder Dom>
std::uint32_t extreme_preimage(const Dom& dom, std::span<const std::uint32_t> f, std::uint32_t u, bool least) {
  std::optional<std::uint32_t> acc;
  for (std::uint32_t x = 0; x < dom.size(); ++x) {
    if (f[x] != u) continue;
    acc = acc ? static_cast<std::uint32_t>(least ? dom.meet_index(*acc, x) : dom.join_index(*acc, x)) : x;
  }
  if (!acc) throw Error(ErrorKind::EmptyPreimage, "value is not in the range of the map");
  if (f[*acc] != u)
    throw Error(least ? ErrorKind::NoLeastElement : ErrorKind::NoGreatestElement,
                least ? "preimage has no least element" : "preimage has no greatest element");
  return *acc;
}

template <FiniteOrder Dom>
std::vector<std::uint32_t> brute_solutions(const Dom& dom, std::span<const std::uint32_t> f,
                                           std::span<const std::uint32_t> g) {
  std::vector<std::uint32_t> out;
  for (std::uint32_t x = 0; x < dom.size(); ++x)
    if (f[x] == g[x]) out.push_back(x);
  return out;
}

template <FiniteOrder Dom>
void require_range_inclusion(const Dom& dom, std::span<const std::uint32_t> f, std::span<const std::uint32_t> g) {
  std::unordered_map<std::uint32_t, bool> in_range;
  for (std::uint32_t x = 0; x < dom.size(); ++x) in_range[f[x]] = true;
  for (std::uint32_t x = 0; x < dom.size(); ++x)
    if (!in_range.count(g[x]))
      throw Error(ErrorKind::RangeViolation, "g takes a value outside the range of f");
}

/// Least (least=true) or greatest solution of f(x) = g(x). Iterates
/// h = f_min^-1 . g from bottom accumulating joins, or dually f_max^-1 . g
/// from top accumulating meets; at most |dom| rounds.
template <FiniteOrder Dom>
SolveResult solve(const Dom& dom, std::span<const std::uint32_t> f, std::span<const std::uint32_t> g, bool least) {
  require_range_inclusion(dom, f, g);
  std::unordered_map<std::uint32_t, std::uint32_t> preimage_cache;
  auto h = [&](std::uint32_t x) {
    auto y = g[x];
    auto it = preimage_cache.find(y);
    if (it != preimage_cache.end()) return it->second;
    auto p = extreme_preimage(dom, f, y, least);
    preimage_cache.emplace(y, p);
    return p;
  };
  std::uint32_t start = static_cast<std::uint32_t>(least ? dom.bot_index() : dom.top_index());
  std::uint32_t acc = start, cur = start;
  std::size_t rounds = 0;
  while (true) {
    std::uint32_t next = h(cur);
    ++rounds;
    acc = static_cast<std::uint32_t>(least ? dom.join_index(acc, next) : dom.meet_index(acc, next));
    if (next == cur) break;
    if (rounds > dom.size()) throw Error(ErrorKind::NotConverged, "preimage iteration did not stabilise");
    cur = next;
  }
  if (f[acc] != g[acc]) throw Error(ErrorKind::NotConverged, "iteration result does not solve the equation");
  return {acc, rounds};
}

template <FiniteOrder Dom, class Step>
SolveResult kleene(const Dom& dom, Step&& h, bool least) {
  std::uint32_t cur = static_cast<std::uint32_t>(least ? dom.bot_index() : dom.top_index());
  std::size_t rounds = 0;
  while (true) {
    std::uint32_t next = h(cur);
    ++rounds;
    if (next == cur) return {cur, rounds};
    if (rounds > dom.size()) throw Error(ErrorKind::NotConverged, "Kleene iteration did not stabilise");
    cur = next;
  }
}

}  // namespace fixpoint

/// Total table-backed map between two lattices.
struct MonotoneMap {
  Lattice dom;
  Lattice cod;
  IndexTable table;

  static MonotoneMap from(const Lattice& dom, const Lattice& cod,
                          const std::function<LatticeElement(LatticeElement)>& fn) {
    MonotoneMap m{dom, cod, {}};
    for (auto x : dom.elements()) m.table.push_back(static_cast<std::uint32_t>(cod.index_of(fn(x))));
    return m;
  }
  static MonotoneMap identity(const Lattice& l) {
    return from(l, l, [](LatticeElement x) { return x; });
  }
  static MonotoneMap constant(const Lattice& dom, const Lattice& cod, LatticeElement c) {
    return from(dom, cod, [c](LatticeElement) { return c; });
  }

  LatticeElement operator()(LatticeElement x) const { return cod.element(table.at(dom.index_of(x))); }
};

struct MonotonicityReport {
  bool monotone = true;
  std::vector<std::pair<LatticeElement, LatticeElement>> violations;
};

inline MonotonicityReport check_monotone(const MonotoneMap& f) {
  MonotonicityReport r;
  for (auto [x, y] : fixpoint::monotonicity_violations(f.dom, f.cod, f.table))
    r.violations.emplace_back(f.dom.element(x), f.dom.element(y));
  r.monotone = r.violations.empty();
  return r;
}

inline std::vector<LatticeElement> range_of(const MonotoneMap& f,
                                            std::optional<std::span<const LatticeElement>> subset = std::nullopt) {
  std::vector<bool> seen(f.cod.size());
  if (subset) {
    for (auto x : *subset) seen[f.table[f.dom.index_of(x)]] = true;
  } else {
    for (auto y : f.table) seen[y] = true;
  }
  std::vector<LatticeElement> out;
  for (std::size_t i = 0; i < seen.size(); ++i)
    if (seen[i]) out.push_back(f.cod.element(i));
  return out;
}

inline LatticeElement min_preimage(const MonotoneMap& f, LatticeElement u) {
  return f.dom.element(fixpoint::extreme_preimage(f.dom, std::span(f.table),
                                                  static_cast<std::uint32_t>(f.cod.index_of(u)), true));
}

inline LatticeElement max_preimage(const MonotoneMap& f, LatticeElement u) {
  return f.dom.element(fixpoint::extreme_preimage(f.dom, std::span(f.table),
                                                  static_cast<std::uint32_t>(f.cod.index_of(u)), false));
}

namespace detail {
inline void require_same_shape(const MonotoneMap& f, const MonotoneMap& g) {
  if (!(f.dom == g.dom) || !(f.cod == g.cod))
    throw Error(ErrorKind::ForeignElement, "maps do not share domain and codomain");
}
}  // namespace detail

struct Solution {
  LatticeElement value;
  std::size_t iterations = 0;
};

inline Solution least_solution(const MonotoneMap& f, const MonotoneMap& g) {
  detail::require_same_shape(f, g);
  auto r = fixpoint::solve(f.dom, std::span(f.table), std::span(g.table), true);
  return {f.dom.element(r.value), r.iterations};
}

inline Solution greatest_solution(const MonotoneMap& f, const MonotoneMap& g) {
  detail::require_same_shape(f, g);
  auto r = fixpoint::solve(f.dom, std::span(f.table), std::span(g.table), false);
  return {f.dom.element(r.value), r.iterations};
}

inline std::vector<LatticeElement> brute_solutions(const MonotoneMap& f, const MonotoneMap& g) {
  detail::require_same_shape(f, g);
  std::vector<LatticeElement> out;
  for (auto x : fixpoint::brute_solutions(f.dom, std::span(f.table), std::span(g.table)))
    out.push_back(f.dom.element(x));
  return out;
}

inline Solution kleene_lfp(const MonotoneMap& h) {
  auto r = fixpoint::kleene(h.dom, [&](std::uint32_t x) { return h.table[x]; }, true);
  return {h.dom.element(r.value), r.iterations};
}

inline Solution kleene_gfp(const MonotoneMap& h) {
  auto r = fixpoint::kleene(h.dom, [&](std::uint32_t x) { return h.table[x]; }, false);
  return {h.dom.element(r.value), r.iterations};
}

}  // namespace pelw

#endif
