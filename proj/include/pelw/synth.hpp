#ifndef PELW_SYNTH_HPP
#define PELW_SYNTH_HPP

#include <algorithm>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pelw/bisim.hpp"
#include "pelw/error.hpp"
#include "pelw/eval.hpp"
#include "pelw/formula.hpp"
#include "pelw/lattice.hpp"
#include "pelw/process.hpp"
#include "pelw/system.hpp"

namespace pelw {

struct SynthBounds {
  std::size_t max_depth = 2;
  std::vector<std::string> pool;           // constants; empty means every constant of the system
  std::vector<std::string> names;          // restriction names; empty means the system alphabet
  std::optional<std::vector<NameSet>> sync_sets;  // default {∅, full alphabet}
  std::size_t max_candidates = 10000;
  std::size_t max_solutions = std::numeric_limits<std::size_t>::max();
  std::size_t state_cap = 200;             // per-coordinate LTS cap for each candidate
  std::size_t generation_budget = 2'000'000;
};

namespace detail {

inline std::vector<std::string> pool_of(const System& sys, const SynthBounds& b) {
  if (!b.pool.empty()) return b.pool;
  auto cs = sys.constants();
  return {cs.begin(), cs.end()};
}

}  // namespace detail

/// Canonical processes over the constant pool with grammar depth at most
/// `max_depth` (constants and ε have depth 1), deduplicated by canonical
/// form, ordered by size (ε first) then printed form, truncated at `max_candidates`.
inline std::vector<Process> enumerate_processes(const System& sys, const SynthBounds& b) {
  if (b.max_depth == 0) return {};
  const auto& pb = sys.builder();
  const auto alphabet = sys.alphabet();
  const std::vector<std::string> names = b.names.empty() ? alphabet : b.names;
  const std::vector<NameSet> syncs =
      b.sync_sets ? *b.sync_sets : std::vector<NameSet>{NameSet{}, detail::sorted_unique(alphabet)};
  std::unordered_map<std::string, Process> seen;
  std::vector<Process> all;
  std::size_t generated = 0;
  auto add = [&](const Process& p) {
    if (++generated > b.generation_budget)
      throw Error(ErrorKind::BudgetExceeded, "candidate generation exceeds " + std::to_string(b.generation_budget) + " terms");
    if (seen.emplace(p.key(), p).second) all.push_back(p);
  };
  add(pb.eps());
  for (const auto& c : detail::pool_of(sys, b)) add(pb.constant(c));
  for (std::size_t d = 2; d <= b.max_depth; ++d) {
    const std::vector<Process> prev = all;
    for (const auto& x : prev) {
      for (const auto& a : names) add(pb.restrict(NameSet{a}, x));
      for (const auto& y : prev) {
        add(pb.seq(x, y));
        add(pb.choice(x, y));
        for (const auto& l : syncs) add(pb.par(l, x, y));
      }
    }
  }
  auto weight = [](const Process& p) { return p.is_eps() ? 0 : p.size(); };
  std::sort(all.begin(), all.end(), [&](const Process& x, const Process& y) {
    return weight(x) != weight(y) ? weight(x) < weight(y) : x.key() < y.key();
  });
  if (all.size() > b.max_candidates) all.resize(b.max_candidates);
  return all;
}

/// Find P_1..P_i (the free positions) such that the formula evaluates to
/// `target` at (P_1, .., P_i, fixed...).
struct SynthProblem {
  std::shared_ptr<const System> system;
  Formula formula = Formula::atom("_");
  /// When set, the formula is rebuilt per candidate from the labels of its
  /// domain (used for label-indexed formulas such as bisimulation).
  std::function<Formula(const std::vector<Label>&)> formula_for;
  AtomInterp atoms;
  AtomInterp env;  // free variables, tabulated per candidate domain like atoms
  Lattice lattice;
  LatticeElement target;
  std::size_t free_count = 1;
  std::vector<Process> fixed;
  SynthBounds bounds;
  EvalOptions eval;
};

using ProcessTuple = std::vector<Process>;

struct SynthFailure {
  ProcessTuple tuple;
  ErrorKind kind;
  std::string message;
};

struct SynthResult {
  std::vector<ProcessTuple> solutions;
  std::size_t examined = 0;
  std::vector<SynthFailure> failures;
  bool exhausted = false;  // every candidate tuple was examined
};

/// Evaluation buckets: element index -> tuples with that value.
struct InvertResult {
  std::map<std::uint32_t, std::vector<ProcessTuple>> buckets;
  std::size_t examined = 0;
  std::vector<SynthFailure> failures;
};

namespace detail {

inline void check_problem(const SynthProblem& p, bool with_target = true) {
  if (!p.system) throw Error(ErrorKind::Unsupported, "synthesis needs a process system");
  if (p.free_count < 1) throw Error(ErrorKind::RangeViolation, "at least one position must be synthesized");
  if (p.bounds.max_depth < 1 || p.bounds.max_candidates < 1 || p.bounds.max_solutions < 1 || p.bounds.state_cap < 1)
    throw Error(ErrorKind::RangeViolation, "synthesis bounds must be positive");
  if (with_target) p.lattice.index_of(p.target);
}

/// Fresh evaluation of the formula at the tuple.
inline LatticeElement evaluate_tuple(const SynthProblem& p, const ProcessTuple& tuple) {
  std::vector<std::shared_ptr<const System>> systems(tuple.size(), p.system);
  auto dom = Domain::reachable(systems, tuple, p.bounds.state_cap);
  Formula f = p.formula;
  if (p.formula_for) {
    std::set<Label> labels;
    for (std::size_t i = 0; i < dom->arity(); ++i)
      for (const auto& l : dom->coord(i).lts->labels()) labels.insert(l);
    f = p.formula_for({labels.begin(), labels.end()});
  }
  Env env;
  for (const auto& name : p.env.names()) env.emplace(name, ValFunction(dom, p.lattice, p.env.tabulate(name, *dom, p.lattice)));
  Evaluator ev(p.lattice, p.atoms, p.eval);
  return ev.eval(f, dom, env).at(std::vector<std::size_t>(tuple.size(), 0));
}

/// Visits free-position tuples in odometer order (last position fastest)
/// until `visit` returns false.
inline bool for_each_tuple(const SynthProblem& p, const std::vector<Process>& cands,
                           const std::function<bool(const ProcessTuple&)>& visit) {
  if (cands.empty()) return true;
  std::vector<Process> fixed;
  for (const auto& f : p.fixed) fixed.push_back(p.system->canonical(f));
  std::vector<std::size_t> idx(p.free_count, 0);
  while (true) {
    ProcessTuple t;
    for (auto i : idx) t.push_back(cands[i]);
    t.insert(t.end(), fixed.begin(), fixed.end());
    if (!visit(t)) return false;
    std::size_t k = idx.size();
    while (k > 0 && ++idx[k - 1] == cands.size()) idx[--k] = 0;
    if (k == 0) return true;
  }
}

}  // namespace detail

/// Every candidate tuple grouped by its value; failing candidates are
/// listed separately.
inline InvertResult invert_eval(const SynthProblem& p) {
  detail::check_problem(p, false);
  InvertResult r;
  auto cands = enumerate_processes(*p.system, p.bounds);
  detail::for_each_tuple(p, cands, [&](const ProcessTuple& t) {
    ++r.examined;
    try {
      r.buckets[static_cast<std::uint32_t>(p.lattice.index_of(detail::evaluate_tuple(p, t)))].push_back(t);
    } catch (const Error& e) {
      r.failures.push_back({t, e.kind(), e.what()});
    }
    return true;
  });
  return r;
}

/// Candidate tuples whose value equals the target exactly, each confirmed
/// by a second, independent evaluation.
inline SynthResult synthesize(const SynthProblem& p) {
  detail::check_problem(p);
  SynthResult r;
  auto cands = enumerate_processes(*p.system, p.bounds);
  r.exhausted = detail::for_each_tuple(p, cands, [&](const ProcessTuple& t) {
    ++r.examined;
    try {
      if (detail::evaluate_tuple(p, t) != p.target) return true;
      if (detail::evaluate_tuple(p, t) != p.target) {
        r.failures.push_back({t, ErrorKind::NotConverged, "re-verification disagrees"});
        return true;
      }
      r.solutions.push_back(t);
    } catch (const Error& e) {
      r.failures.push_back({t, e.kind(), e.what()});
    }
    return r.solutions.size() < p.bounds.max_solutions;
  });
  return r;
}

/// Drivers for the special cases of synthesis.
struct SynthSetup {
  std::shared_ptr<const System> system;
  Lattice lattice = make_lattice(LatticeSpec::boolean());  // two-element for the Boolean drivers
  AtomInterp atoms;
  SynthBounds bounds;
  EvalOptions eval;
};

namespace detail {

inline SynthProblem bool_problem(const SynthSetup& s, Formula f, bool target) {
  SynthProblem p;
  p.system = s.system;
  p.formula = std::move(f);
  p.atoms = s.atoms;
  p.lattice = s.lattice;
  p.target = target ? p.lattice.top() : p.lattice.bot();
  p.bounds = s.bounds;
  p.eval = s.eval;
  return p;
}

}  // namespace detail

/// Processes satisfying a Boolean formula.
inline SynthResult synth_program(const SynthSetup& s, const Formula& spec) {
  return synthesize(detail::bool_problem(s, spec, true));
}

/// Processes violating a Boolean formula.
inline SynthResult gen_counterexample(const SynthSetup& s, const Formula& spec) {
  return synthesize(detail::bool_problem(s, spec, false));
}

/// Processes strongly bisimilar to `reference`, via the bisimulation formula
/// over the labels of each candidate pair.
inline SynthResult gen_bisimilar(const SynthSetup& s, const Process& reference) {
  auto p = detail::bool_problem(s, Formula::atom("_"), true);
  p.formula_for = [](const std::vector<Label>& labels) { return bisimulation_formula(labels); };
  p.fixed = {reference};
  return synthesize(p);
}

/// Controllers P with value(λX.[X] |{}| plant ▷ spec)(P) = target.
inline SynthResult synth_controller(const SynthSetup& s, const Process& plant, const Formula& spec, const Lattice& lat,
                                    LatticeElement target) {
  const auto& b = s.system->builder();
  SynthProblem p;
  p.system = s.system;
  p.formula = Formula::ctx({"X"}, {b.par({}, b.hole("X"), plant)}, spec);
  p.atoms = s.atoms;
  p.lattice = lat;
  p.target = target;
  p.bounds = s.bounds;
  p.eval = s.eval;
  return synthesize(p);
}

}  // namespace pelw

#endif
