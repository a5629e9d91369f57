#ifndef PELW_FORMULA_HPP
#define PELW_FORMULA_HPP

#include <cctype>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pelw/error.hpp"
#include "pelw/label.hpp"
#include "pelw/process.hpp"
#include "pelw/text.hpp"

namespace pelw {

enum class FormulaKind { Atom, Var, And, Or, Box, Diamond, Lfp, Gfp, Ctx };

/// Immutable PEL formula. Fixpoint nodes hold the equation `lhs == rhs`
/// binding `name`; context nodes hold hole variables, one context per
/// coordinate, and the body.
class Formula {
 public:
  struct Node {
    FormulaKind kind = FormulaKind::Atom;
    std::string name;                 // atom, variable or bound variable
    Label label;                      // modality label
    std::size_t coord = 1;            // modality coordinate (1-based)
    std::vector<Formula> children;    // And/Or: 2; modal: 1; fixpoint: lhs, rhs; ctx: body
    std::vector<std::string> holes;   // ctx hole variables
    std::vector<Process> contexts;    // ctx process contexts
  };

  FormulaKind kind() const { return n_->kind; }
  const std::string& name() const { return n_->name; }
  const Label& label() const { return n_->label; }
  std::size_t coord() const { return n_->coord; }
  const std::vector<Formula>& children() const { return n_->children; }
  const Formula& child(std::size_t i = 0) const { return n_->children.at(i); }
  const Formula& lhs() const { return n_->children.at(0); }
  const Formula& rhs() const { return n_->children.at(1); }
  const std::vector<std::string>& holes() const { return n_->holes; }
  const std::vector<Process>& contexts() const { return n_->contexts; }
  const Node* id() const { return n_.get(); }

  static Formula atom(std::string name) { return make(FormulaKind::Atom, std::move(name)); }
  static Formula var(std::string name) { return make(FormulaKind::Var, std::move(name)); }
  static Formula conj(Formula a, Formula b) { return make(FormulaKind::And, {}, {}, 1, {std::move(a), std::move(b)}); }
  static Formula disj(Formula a, Formula b) { return make(FormulaKind::Or, {}, {}, 1, {std::move(a), std::move(b)}); }
  static Formula box(Label l, std::size_t i, Formula f) { return make(FormulaKind::Box, {}, std::move(l), i, {std::move(f)}); }
  static Formula diamond(Label l, std::size_t i, Formula f) {
    return make(FormulaKind::Diamond, {}, std::move(l), i, {std::move(f)});
  }
  static Formula lfp(std::string var, Formula lhs, Formula rhs) {
    return make(FormulaKind::Lfp, std::move(var), {}, 1, {std::move(lhs), std::move(rhs)});
  }
  static Formula gfp(std::string var, Formula lhs, Formula rhs) {
    return make(FormulaKind::Gfp, std::move(var), {}, 1, {std::move(lhs), std::move(rhs)});
  }
  /// mu F . F == body
  static Formula mu(std::string var, Formula body) { auto v = Formula::var(var); return lfp(std::move(var), v, std::move(body)); }
  static Formula nu(std::string var, Formula body) { auto v = Formula::var(var); return gfp(std::move(var), v, std::move(body)); }
  static Formula ctx(std::vector<std::string> holes, std::vector<Process> contexts, Formula body) {
    Node n{FormulaKind::Ctx, {}, {}, 1, {std::move(body)}, std::move(holes), std::move(contexts)};
    return make(std::move(n));
  }

  /// Same node kind with new children.
  Formula with_children(std::vector<Formula> cs) const {
    Node n = *n_;
    n.children = std::move(cs);
    return make(std::move(n));
  }

  bool is_fixpoint() const { return kind() == FormulaKind::Lfp || kind() == FormulaKind::Gfp; }

  std::string to_string() const { return print(0); }

  std::size_t depth() const {
    std::size_t d = 0;
    for (const auto& c : children()) d = std::max(d, c.depth());
    return d + 1;
  }

  friend bool operator==(const Formula& a, const Formula& b) { return a.to_string() == b.to_string(); }

 private:
  explicit Formula(std::shared_ptr<const Node> n) : n_(std::move(n)) {}
  static Formula make(Node n) { return Formula(std::make_shared<const Node>(std::move(n))); }
  static Formula make(FormulaKind k, std::string name, Label l = {}, std::size_t coord = 1, std::vector<Formula> ch = {}) {
    Node n;
    n.kind = k;
    n.name = std::move(name);
    n.label = std::move(l);
    n.coord = coord;
    n.children = std::move(ch);
    return make(std::move(n));
  }

  static std::string label_text(const Label& l) {
    if (l.size() == 1) return l.counts().begin()->first;
    return l.to_string();
  }

  // Precedence: 0 binders (mu/nu/ctx), 1 or, 2 and, 3 unary.
  std::string print(int ctx) const {
    auto wrap = [&](std::string s, int prec) { return prec < ctx ? "(" + s + ")" : s; };
    switch (kind()) {
      case FormulaKind::Atom: return "atom(" + name() + ")";
      case FormulaKind::Var: return name();
      case FormulaKind::Or: return wrap(child(0).print(1) + " \\/ " + child(1).print(2), 1);
      case FormulaKind::And: return wrap(child(0).print(2) + " /\\ " + child(1).print(3), 2);
      case FormulaKind::Box:
        return "[" + label_text(label()) + "]_" + std::to_string(coord()) + " " + child().print(3);
      case FormulaKind::Diamond:
        return "<" + label_text(label()) + ">_" + std::to_string(coord()) + " " + child().print(3);
      case FormulaKind::Lfp:
      case FormulaKind::Gfp:
        return wrap(std::string(kind() == FormulaKind::Lfp ? "mu " : "nu ") + name() + " . " + lhs().print(1) +
                        " == " + rhs().print(0),
                    0);
      case FormulaKind::Ctx: {
        std::vector<std::string> cs;
        for (const auto& c : contexts()) cs.push_back(c.key());
        return wrap("ctx (" + text::join(holes(), ",") + ") . (" + text::join(cs, ", ") + ") |> " + child().print(0),
                    0);
      }
    }
    return {};
  }

  std::shared_ptr<const Node> n_;
};

namespace detail {

/// Formula grammar:
///   formula := binder | disj
///   binder  := ('mu'|'nu') Var '.' disj '==' formula
///            | 'ctx' '(' Var,.. ')' '.' '(' context,.. ')' '|>' formula
///   disj := conj ('\/' conj)*      conj := unary ('/\' unary)*
///   unary := '[' label ']_' N unary | '<' label '>_' N unary | primary
///   primary := 'atom(' NAME ')' | Var | '(' formula ')' | binder
/// Variables are capitalised identifiers; labels are an action name or a
/// multiset `{a,b}`.
class FormulaParser {
 public:
  explicit FormulaParser(text::Cursor& in) : in_(in) {}

  Formula parse_formula() {
    if (auto b = try_binder()) return *b;
    return parse_disj();
  }

 private:
  std::optional<Formula> try_binder() {
    if (in_.accept_keyword("mu")) return parse_fixpoint(true);
    if (in_.accept_keyword("nu")) return parse_fixpoint(false);
    if (in_.accept_keyword("ctx")) return parse_ctx();
    return std::nullopt;
  }

  std::string variable() {
    auto v = in_.identifier();
    if (!std::isupper(static_cast<unsigned char>(v[0]))) in_.fail("variables must be capitalised: '" + v + "'");
    return v;
  }

  Formula parse_fixpoint(bool least) {
    auto v = variable();
    in_.expect(".");
    Formula lhs = parse_disj();
    in_.expect("==");
    Formula rhs = parse_formula();
    return least ? Formula::lfp(v, lhs, rhs) : Formula::gfp(v, lhs, rhs);
  }

  Formula parse_ctx() {
    in_.expect("(");
    std::vector<std::string> holes;
    do {
      holes.push_back(variable());
    } while (in_.accept(","));
    in_.expect(")");
    in_.expect(".");
    in_.expect("(");
    std::vector<Process> contexts;
    do {
      ProcessParser p(in_, true, nullptr);
      contexts.push_back(p.parse_choice());
    } while (in_.accept(","));
    in_.expect(")");
    in_.expect("|>");
    if (contexts.size() != holes.size()) in_.fail("ctx needs one context per hole variable");
    Formula body = parse_formula();
    return Formula::ctx(std::move(holes), std::move(contexts), body);
  }

  Formula parse_disj() {
    Formula f = parse_conj();
    while (in_.accept("\\/")) f = Formula::disj(f, parse_conj());
    return f;
  }

  Formula parse_conj() {
    Formula f = parse_unary();
    while (in_.accept("/\\")) f = Formula::conj(f, parse_unary());
    return f;
  }

  Label parse_label() {
    if (in_.accept("{")) {
      Label l;
      if (in_.peek() != '}') {
        do {
          l.add(in_.identifier());
        } while (in_.accept(","));
      }
      in_.expect("}");
      return l;
    }
    return Label{in_.identifier()};
  }

  std::size_t coordinate() {
    if (!in_.accept("_")) return 1;
    auto n = in_.number();
    if (n == 0) in_.fail("coordinates start at 1");
    return n;
  }

  Formula parse_unary() {
    if (in_.accept("[")) {
      Label l = parse_label();
      in_.expect("]");
      auto i = coordinate();
      return Formula::box(l, i, parse_unary());
    }
    if (in_.accept("<")) {
      Label l = parse_label();
      in_.expect(">");
      auto i = coordinate();
      return Formula::diamond(l, i, parse_unary());
    }
    return parse_primary();
  }

  Formula parse_primary() {
    if (in_.accept("(")) {
      Formula f = parse_formula();
      in_.expect(")");
      return f;
    }
    if (auto b = try_binder()) return *b;
    if (in_.accept_keyword("atom")) {
      in_.expect("(");
      auto n = in_.word();
      in_.expect(")");
      return Formula::atom(n);
    }
    if (!in_.at_identifier()) in_.fail("expected formula");
    return Formula::var(variable());
  }

  text::Cursor& in_;
};

}  // namespace detail

inline Formula parse_formula(std::string_view src) {
  text::Cursor in(src);
  detail::FormulaParser p(in);
  Formula f = p.parse_formula();
  if (!in.at_end()) in.fail("unexpected trailing input");
  return f;
}

/// Variables occurring free (not bound by an enclosing mu/nu).
inline std::set<std::string> free_variables(const Formula& f) {
  std::set<std::string> out;
  switch (f.kind()) {
    case FormulaKind::Atom: break;
    case FormulaKind::Var: out.insert(f.name()); break;
    case FormulaKind::Lfp:
    case FormulaKind::Gfp:
      for (const auto& c : f.children())
        for (const auto& v : free_variables(c))
          if (v != f.name()) out.insert(v);
      break;
    default:
      for (const auto& c : f.children())
        for (const auto& v : free_variables(c)) out.insert(v);
  }
  return out;
}

/// Subformulas in bottom-up order (children before parents).
inline std::vector<Formula> subformulas(const Formula& f) {
  std::vector<Formula> out;
  for (const auto& c : f.children())
    for (auto& s : subformulas(c)) out.push_back(std::move(s));
  out.push_back(f);
  return out;
}

/// Capture-free substitution of `value` for free occurrences of `var`.
inline Formula substitute(const Formula& f, const std::string& var, const Formula& value) {
  switch (f.kind()) {
    case FormulaKind::Atom: return f;
    case FormulaKind::Var: return f.name() == var ? value : f;
    case FormulaKind::Lfp:
    case FormulaKind::Gfp:
      if (f.name() == var) return f;
      [[fallthrough]];
    default: {
      std::vector<Formula> cs;
      for (const auto& c : f.children()) cs.push_back(substitute(c, var, value));
      return f.with_children(std::move(cs));
    }
  }
}

}  // namespace pelw

#endif
