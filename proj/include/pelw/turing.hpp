#ifndef PELW_TURING_HPP
#define PELW_TURING_HPP

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pelw/error.hpp"
#include "pelw/process.hpp"
#include "pelw/simulation.hpp"
#include "pelw/system.hpp"
#include "pelw/text.hpp"

namespace pelw {

enum class Move { L, R };

struct TmAction {
  std::string state;
  std::string symbol;
  Move move = Move::R;
};

/// One-tape machine with a partial transition function.
struct TuringMachine {
  std::vector<std::string> states;
  std::vector<std::string> gamma;
  std::string blank;
  std::vector<std::string> sigma;
  std::string initial;
  std::vector<std::string> finals;
  std::map<std::pair<std::string, std::string>, TmAction> delta;
  std::vector<std::string> input;  // optional initial tape contents

  bool is_final(const std::string& q) const { return std::find(finals.begin(), finals.end(), q) != finals.end(); }

  void validate() const {
    auto in = [](const std::vector<std::string>& v, const std::string& x) {
      return std::find(v.begin(), v.end(), x) != v.end();
    };
    if (!in(gamma, blank)) throw Error(ErrorKind::NotFound, "blank '" + blank + "' is not a tape symbol");
    if (!in(states, initial)) throw Error(ErrorKind::NotFound, "initial state '" + initial + "' is not a state");
    for (const auto& s : sigma) {
      if (s == blank) throw Error(ErrorKind::Unsupported, "the input alphabet may not contain the blank");
      if (!in(gamma, s)) throw Error(ErrorKind::NotFound, "input symbol '" + s + "' is not a tape symbol");
    }
    for (const auto& f : finals)
      if (!in(states, f)) throw Error(ErrorKind::NotFound, "final state '" + f + "' is not a state");
    for (const auto& [k, a] : delta) {
      if (!in(states, k.first) || !in(states, a.state))
        throw Error(ErrorKind::NotFound, "transition uses an undeclared state");
      if (!in(gamma, k.second) || !in(gamma, a.symbol))
        throw Error(ErrorKind::NotFound, "transition uses an undeclared tape symbol");
      if (is_final(k.first)) throw Error(ErrorKind::Unsupported, "transition out of final state '" + k.first + "'");
    }
    for (const auto& s : input)
      if (!in(gamma, s)) throw Error(ErrorKind::NotFound, "input symbol '" + s + "' is not a tape symbol");
  }
};

/// Configuration with both tape segments listed nearest-to-head first.
/// Blanks beyond the listed cells are implicit.
struct TmConfig {
  std::vector<std::string> left;
  std::string head;
  std::string state;
  std::vector<std::string> right;

  /// Drops blanks at the far ends of both segments.
  TmConfig normalized(const std::string& blank) const {
    TmConfig c = *this;
    while (!c.left.empty() && c.left.back() == blank) c.left.pop_back();
    while (!c.right.empty() && c.right.back() == blank) c.right.pop_back();
    return c;
  }

  std::string to_string() const {
    std::vector<std::string> l(left.rbegin(), left.rend());
    return "[" + text::join(l, " ") + "] " + head + "^" + state + " [" + text::join(right, " ") + "]";
  }

  friend bool operator==(const TmConfig&, const TmConfig&) = default;
};

/// Head on the first input symbol (blank for empty input), state q0.
inline TmConfig initial_config(const TuringMachine& m) {
  TmConfig c;
  c.state = m.initial;
  c.head = m.input.empty() ? m.blank : m.input.front();
  if (m.input.size() > 1) c.right.assign(m.input.begin() + 1, m.input.end());
  return c.normalized(m.blank);
}

/// One machine step, or nullopt when the machine halts.
inline std::optional<TmConfig> tm_step(const TuringMachine& m, const TmConfig& c) {
  if (m.is_final(c.state)) return std::nullopt;
  auto it = m.delta.find({c.state, c.head});
  if (it == m.delta.end()) return std::nullopt;
  const TmAction& a = it->second;
  TmConfig n = c;
  n.state = a.state;
  auto& from = a.move == Move::R ? n.right : n.left;
  auto& to = a.move == Move::R ? n.left : n.right;
  to.insert(to.begin(), a.symbol);
  if (from.empty()) {
    n.head = m.blank;
  } else {
    n.head = from.front();
    from.erase(from.begin());
  }
  return n.normalized(m.blank);
}

/// Parses
///   states: q0, q1; gamma: b, 1; blank: b; sigma: 1; q0: q0; finals: q1;
///   delta: (q0,1) -> (q0,1,R); (q0,b) -> (q1,1,L);
///   input: 1, 1;
/// Sections end with `;` or a newline-separated next header.
inline TuringMachine parse_tm(std::string_view src) {
  text::Cursor in(src);
  TuringMachine m;
  bool have_blank = false, have_initial = false;
  auto list = [&](std::vector<std::string>& out) {
    if (in.peek() == ';' || in.at_end()) return;
    do {
      out.push_back(in.word());
    } while (in.accept(","));
  };
  while (!in.at_end()) {
    auto section = in.identifier();
    in.expect(":");
    if (section == "states") {
      list(m.states);
    } else if (section == "gamma") {
      list(m.gamma);
    } else if (section == "blank") {
      m.blank = in.word();
      have_blank = true;
    } else if (section == "sigma") {
      list(m.sigma);
    } else if (section == "q0" || section == "initial") {
      m.initial = in.word();
      have_initial = true;
    } else if (section == "finals") {
      list(m.finals);
    } else if (section == "input") {
      list(m.input);
    } else if (section == "delta") {
      while (in.accept("(")) {
        auto q = in.word();
        in.expect(",");
        auto s = in.word();
        in.expect(")");
        in.expect("->");
        in.expect("(");
        TmAction a;
        a.state = in.word();
        in.expect(",");
        a.symbol = in.word();
        in.expect(",");
        auto d = in.word();
        if (d != "L" && d != "R") in.fail("move must be L or R");
        a.move = d == "L" ? Move::L : Move::R;
        in.expect(")");
        if (!m.delta.emplace(std::make_pair(q, s), a).second)
          in.fail("duplicate transition for (" + q + "," + s + ")");
        in.accept(";");
      }
    } else {
      in.fail("unknown section '" + section + "'");
    }
    in.accept(";");
  }
  if (!have_blank) throw Error(ErrorKind::SyntaxError, "missing 'blank:' section");
  if (!have_initial) throw Error(ErrorKind::SyntaxError, "missing 'q0:' section");
  m.validate();
  return m;
}

/// Process system for a machine. Tape cells are constants `l_<s>` (left of
/// the head) and `r_<s>` (right), the head is `h_<s>_<q>`, and `l_end` /
/// `r_end` stand for the infinite blank remainder. Segments are sequences
/// listed nearest-to-head first and closed by the end constant, so every
/// rewrite happens at the head of a sequence.
class TmEncoding {
 public:
  explicit TmEncoding(TuringMachine m) : m_(std::move(m)) {
    m_.validate();
    for (const auto& s : m_.gamma) {
      check_symbol(s);
      add_name("l_" + s, {Part::Left, s, {}});
      add_name("r_" + s, {Part::Right, s, {}});
      for (const auto& q : m_.states) add_name("h_" + s + "_" + q, {Part::Head, s, q});
    }
    for (const auto& q : m_.states) check_symbol(q);
    add_name("l_end", {Part::LeftEnd, m_.blank, {}});
    add_name("r_end", {Part::RightEnd, m_.blank, {}});
    SystemSpec spec;
    for (const auto& [name, info] : by_name_) spec.constants.push_back(name);
    ProcessBuilder b;
    auto c = [&](const std::string& n) { return b.constant(n); };
    std::set<std::string> actions;
    for (const auto& [key, act] : m_.delta) {
      const auto& [q, beta] = key;
      const bool right = act.move == Move::R;
      for (const auto& alpha : m_.gamma)
        for (const auto& gamma : m_.gamma) {
          std::string a = "t_" + alpha + "_" + beta + "_" + gamma + "_" + q + "_" + (right ? "R" : "L") + "_" + act.state;
          if (!actions.insert(a).second || by_name_.count(a))
            throw Error(ErrorKind::AlphabetClash, "generated action name '" + a + "' is ambiguous");
          spec.alphabet.push_back(a);
          std::vector<std::string> lefts{"l_" + alpha}, rights{"r_" + gamma};
          if (alpha == m_.blank) lefts.push_back("l_end");
          if (gamma == m_.blank) rights.push_back("r_end");
          if (right) {
            // Head moves right: push the written symbol on the left, pop the right.
            for (const auto& x : lefts) spec.rules.push_back({c(x), a, b.seq(c("l_" + act.symbol), c(x))});
            spec.rules.push_back({c("h_" + beta + "_" + q), a, c("h_" + gamma + "_" + act.state)});
            spec.rules.push_back({c("r_" + gamma), a, b.eps()});
            if (gamma == m_.blank) spec.rules.push_back({c("r_end"), a, c("r_end")});
          } else {
            spec.rules.push_back({c("l_" + alpha), a, b.eps()});
            if (alpha == m_.blank) spec.rules.push_back({c("l_end"), a, c("l_end")});
            spec.rules.push_back({c("h_" + beta + "_" + q), a, c("h_" + alpha + "_" + act.state)});
            for (const auto& x : rights) spec.rules.push_back({c(x), a, b.seq(c("r_" + act.symbol), c(x))});
          }
        }
    }
    sync_ = detail::sorted_unique(NameSet(actions.begin(), actions.end()));
    sys_ = System(std::move(spec));
  }

  const TuringMachine& machine() const { return m_; }
  const System& system() const { return sys_; }
  const NameSet& sync() const { return sync_; }

  /// Same naming with a different rule set (used for fault injection).
  TmEncoding with_rules(std::vector<DeltaRule> rules) const {
    TmEncoding e = *this;
    SystemSpec spec = sys_.spec();
    spec.rules = std::move(rules);
    e.sys_ = System(std::move(spec));
    return e;
  }

  /// (nu L)(left |L| head |L| right) for a configuration.
  Process encode(const TmConfig& cfg) const {
    const auto& b = sys_.builder();
    auto segment = [&](const std::vector<std::string>& cells, const std::string& prefix) {
      std::vector<Process> parts;
      for (const auto& s : cells) parts.push_back(b.constant(known(prefix + s)));
      parts.push_back(b.constant(prefix + "end"));
      return b.seq(parts);
    };
    TmConfig c = cfg.normalized(m_.blank);
    Process head = b.constant(known("h_" + c.head + "_" + c.state));
    return b.restrict(sync_, b.par(sync_, {segment(c.left, "l_"), head, segment(c.right, "r_")}));
  }

  /// Inverse of encode on every process reachable from an encoding.
  TmConfig decode(const Process& p) const {
    Process body = p.kind() == ProcKind::Restrict ? p.children()[0] : p;
    if (body.kind() != ProcKind::Par || body.children().size() != 3)
      throw Error(ErrorKind::Unsupported, "not an encoded configuration: " + p.to_string());
    TmConfig c;
    int seen = 0;
    for (const auto& op : body.children()) {
      std::vector<Process> cells = op.kind() == ProcKind::Seq ? op.children() : std::vector<Process>{op};
      std::vector<const Info*> infos;
      for (const auto& cell : cells) {
        auto it = cell.kind() == ProcKind::Const ? by_name_.find(cell.name()) : by_name_.end();
        if (it == by_name_.end()) throw Error(ErrorKind::Unsupported, "unexpected tape term: " + cell.to_string());
        infos.push_back(&it->second);
      }
      const Part last = infos.back()->part;
      auto cells_of = [&](Part cell, std::vector<std::string>& out) {
        for (std::size_t i = 0; i + 1 < infos.size(); ++i) {
          if (infos[i]->part != cell) throw Error(ErrorKind::Unsupported, "mixed tape segment: " + op.to_string());
          out.push_back(infos[i]->symbol);
        }
      };
      if (last == Part::LeftEnd) {
        cells_of(Part::Left, c.left);
        seen |= 1;
      } else if (last == Part::RightEnd) {
        cells_of(Part::Right, c.right);
        seen |= 2;
      } else if (last == Part::Head && infos.size() == 1) {
        c.head = infos[0]->symbol;
        c.state = infos[0]->state;
        seen |= 4;
      } else {
        throw Error(ErrorKind::Unsupported, "unexpected tape segment: " + op.to_string());
      }
    }
    if (seen != 7) throw Error(ErrorKind::Unsupported, "not an encoded configuration: " + p.to_string());
    return c.normalized(m_.blank);
  }

  /// Lockstep check: each machine step must be matched by exactly one
  /// process step, labelled {tau}, whose decoding is the next configuration;
  /// a halted machine must leave the process without steps.
  SimulationReport check(const TmConfig& start, std::size_t steps) const {
    SimulationReport r;
    TmConfig c = start.normalized(m_.blank);
    Process p = encode(c);
    auto fail = [&](std::size_t k, std::string msg) {
      r.holds = false;
      r.divergence = k;
      r.message = "step " + std::to_string(k + 1) + ": " + msg;
      return r;
    };
    for (std::size_t k = 0; k < steps; ++k) {
      auto next = tm_step(m_, c);
      const auto& moves = sys_.step(p);
      if (!next) {
        if (!moves.empty()) return fail(k, "machine halted but the process can move to " + moves[0].target.to_string());
        r.message = "machine halted after " + std::to_string(k) + " steps";
        return r;
      }
      if (moves.size() != 1)
        return fail(k, "expected one process step, found " + std::to_string(moves.size()) + " from " + c.to_string());
      if (!moves[0].label.is_internal() || moves[0].label.size() != 1)
        return fail(k, "process step labelled " + moves[0].label.to_string());
      TmConfig got = decode(moves[0].target);
      if (!(got == *next)) return fail(k, "decoded " + got.to_string() + ", machine reached " + next->to_string());
      c = *next;
      p = moves[0].target;
      r.steps = k + 1;
    }
    r.message = "simulation holds for " + std::to_string(r.steps) + " steps";
    return r;
  }

 private:
  enum class Part { Left, Right, Head, LeftEnd, RightEnd };
  struct Info {
    Part part;
    std::string symbol;
    std::string state;
  };

  static void check_symbol(const std::string& s) {
    if (s.empty() || !std::all_of(s.begin(), s.end(), text::Cursor::is_ident_char))
      throw Error(ErrorKind::Unsupported, "symbol or state '" + s + "' is not identifier-like");
  }

  void add_name(const std::string& n, Info info) {
    if (!by_name_.emplace(n, std::move(info)).second)
      throw Error(ErrorKind::AlphabetClash, "generated constant name '" + n + "' is ambiguous");
  }

  std::string known(const std::string& n) const {
    if (!by_name_.count(n)) throw Error(ErrorKind::NotFound, "configuration uses an undeclared symbol or state: " + n);
    return n;
  }

  TuringMachine m_;
  std::map<std::string, Info> by_name_;
  NameSet sync_;
  System sys_;
};

/// System and encoded process for a machine in a configuration.
inline std::pair<SystemSpec, Process> trans_tm(const TuringMachine& m, const TmConfig& c) {
  TmEncoding enc(m);
  return {enc.system().spec(), enc.encode(c)};
}

inline SimulationReport check_tm_simulation(const TuringMachine& m, const TmConfig& c, std::size_t steps) {
  return TmEncoding(m).check(c, steps);
}

}  // namespace pelw

#endif
