#ifndef PELW_CTL_HPP
#define PELW_CTL_HPP

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pelw/error.hpp"
#include "pelw/formula.hpp"

namespace pelw {

enum class CtlOp { EX, EG, EU };

enum class EgForm {
  Diamond,  // nu F . F == phi /\ \/_a <a>_i F   (infinite-path reading)
  Box,      // nu F . F == phi /\ \/_a [a]_i F   (literal form)
};

namespace detail {

inline Formula big_or(const std::vector<std::string>& alphabet, bool box, std::size_t coord, const Formula& body) {
  if (alphabet.empty()) throw Error(ErrorKind::Unsupported, "CTL expansion needs a non-empty alphabet");
  std::optional<Formula> acc;
  for (const auto& a : alphabet) {
    Formula m = box ? Formula::box(Label{a}, coord, body) : Formula::diamond(Label{a}, coord, body);
    acc = acc ? Formula::disj(*acc, m) : m;
  }
  return *acc;
}

inline std::string fresh_var(const std::vector<Formula>& args) {
  std::set<std::string> used;
  for (const auto& a : args)
    for (const auto& s : subformulas(a))
      if (s.kind() == FormulaKind::Var || s.is_fixpoint()) used.insert(s.name());
  std::string v = "F";
  for (int k = 1; used.count(v); ++k) v = "F" + std::to_string(k);
  return v;
}

}  // namespace detail

/// CTL operators over coordinate `coord` as PEL formulas: EX phi, EG phi and
/// E[phi1 U phi2]. The alphabet lists the actions the disjunctions range over.
inline Formula expand_ctl(CtlOp op, const std::vector<Formula>& args, const std::vector<std::string>& alphabet,
                          std::size_t coord = 1, EgForm eg = EgForm::Diamond) {
  const std::size_t arity = op == CtlOp::EU ? 2 : 1;
  if (args.size() != arity)
    throw Error(ErrorKind::Unsupported, "CTL operator expects " + std::to_string(arity) + " argument(s)");
  switch (op) {
    case CtlOp::EX: return detail::big_or(alphabet, false, coord, args[0]);
    case CtlOp::EG: {
      auto f = detail::fresh_var(args);
      return Formula::nu(f, Formula::conj(args[0], detail::big_or(alphabet, eg == EgForm::Box, coord, Formula::var(f))));
    }
    case CtlOp::EU: {
      auto f = detail::fresh_var(args);
      return Formula::mu(
          f, Formula::disj(args[1], Formula::conj(args[0], detail::big_or(alphabet, false, coord, Formula::var(f)))));
    }
  }
  return args[0];
}

}  // namespace pelw

#endif
