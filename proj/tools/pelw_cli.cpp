#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "pelw/bisim.hpp"
#include "pelw/eval.hpp"
#include "pelw/formula.hpp"
#include "pelw/lattice.hpp"
#include "pelw/lts.hpp"
#include "pelw/petri.hpp"
#include "pelw/synth.hpp"
#include "pelw/system.hpp"
#include "pelw/turing.hpp"

using namespace pelw;
using Json = nlohmann::ordered_json;

namespace {

enum Exit { kOk = 0, kParse = 2, kResource = 3, kEval = 4, kOther = 5 };

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::SyntaxError:
    case ErrorKind::UnknownConstant: return kParse;
    case ErrorKind::StateCapExceeded:
    case ErrorKind::BudgetExceeded: return kResource;
    case ErrorKind::AlphabetClash:
    case ErrorKind::Unsupported:
    case ErrorKind::NotFound: return kOther;
    default: return kEval;
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::NotFound, "cannot read file '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> label_names(const Label& l) {
  std::vector<std::string> out;
  for (const auto& [n, c] : l.counts())
    for (unsigned i = 0; i < c; ++i) out.push_back(n);
  return out;
}

/// Output sink: human lines or one JSON record per line.
struct Out {
  bool json = false;
  void line(const std::string& human, const Json& record) const {
    if (json)
      std::cout << record.dump() << "\n";
    else
      std::cout << human << "\n";
  }
};

struct Common {
  bool json = false;
  std::size_t cap = 10000;
};

struct LtsArgs {
  std::string system, init;
};

int cmd_lts(const LtsArgs& a, const Common& c) {
  Out out{c.json};
  System sys = parse_system(read_file(a.system));
  Process init = !a.init.empty() ? sys.parse(a.init, true)
                 : sys.spec().init ? *sys.spec().init
                                   : throw Error(ErrorKind::NotFound, "no initial process: give --init or an init: section");
  Lts lts = build_lts(sys, init, c.cap);
  out.line("states " + std::to_string(lts.size()), Json{{"type", "summary"}, {"states", lts.size()}, {"edges", lts.edges.size()}});
  for (std::size_t s = 0; s < lts.size(); ++s)
    out.line("s" + std::to_string(s) + " " + lts.states[s].to_string(),
             Json{{"type", "state"}, {"id", s}, {"process", lts.states[s].to_string()}});
  if (!c.json) std::cout << "edges " << lts.edges.size() << "\n";
  for (const auto& e : lts.edges)
    out.line("s" + std::to_string(e.from) + " -" + e.label.to_string() + "-> s" + std::to_string(e.to),
             Json{{"type", "edge"}, {"from", e.from}, {"label", label_names(e.label)}, {"to", e.to}});
  return kOk;
}

struct EvalArgs {
  std::vector<std::string> systems;
  std::string formula_file, formula_text;
  std::string lattice = "bool", lattice_file;
  std::string atoms;
  std::vector<std::string> tuple;
  bool table = false;
  bool permissive = false;
  std::size_t budget = 1'000'000;
};

Formula load_formula(const std::string& file, const std::string& text) {
  if (!file.empty() && !text.empty()) throw Error(ErrorKind::Unsupported, "give either --formula or --formula-text");
  if (file.empty() && text.empty()) throw Error(ErrorKind::NotFound, "no formula given");
  return parse_formula(file.empty() ? text : read_file(file));
}

Lattice load_lattice(const std::string& text, const std::string& file) {
  return make_lattice(parse_lattice_spec(file.empty() ? text : read_file(file)));
}

AtomInterp load_atoms(const std::string& file) { return file.empty() ? AtomInterp{} : parse_atom_interp(read_file(file)); }

std::vector<std::shared_ptr<const System>> load_systems(const std::vector<std::string>& files, std::size_t arity) {
  if (files.empty()) throw Error(ErrorKind::NotFound, "no system given");
  if (files.size() != 1 && files.size() != arity)
    throw Error(ErrorKind::Unsupported, "give one system, or one per tuple position");
  std::vector<std::shared_ptr<const System>> out;
  for (const auto& f : files) out.push_back(std::make_shared<const System>(parse_system(read_file(f))));
  while (out.size() < arity) out.push_back(out.front());
  return out;
}

std::string tuple_text(const std::vector<Process>& t) {
  std::vector<std::string> parts;
  for (const auto& p : t) parts.push_back(p.to_string());
  return "(" + text::join(parts, ", ") + ")";
}

int cmd_eval(const EvalArgs& a, const Common& c) {
  Out out{c.json};
  Formula f = load_formula(a.formula_file, a.formula_text);
  Lattice lat = load_lattice(a.lattice, a.lattice_file);
  AtomInterp atoms = load_atoms(a.atoms);
  if (a.tuple.empty()) throw Error(ErrorKind::NotFound, "no process tuple given (--tuple)");
  auto systems = load_systems(a.systems, a.tuple.size());
  std::vector<Process> tuple;
  for (std::size_t i = 0; i < a.tuple.size(); ++i) tuple.push_back(systems[i]->parse(a.tuple[i], true));
  EvalOptions opt;
  opt.budget = a.budget;
  opt.state_cap = c.cap;
  opt.strict_equations = !a.permissive;
  auto dom = Domain::reachable(systems, tuple, c.cap);
  Evaluator ev(lat, atoms, opt);
  ValFunction v = ev.eval(f, dom);
  for (const auto& w : ev.warnings()) std::cerr << "warning: " << w << "\n";
  const auto value = lat.name(v.at(std::vector<std::size_t>(tuple.size(), 0)));
  out.line(value, Json{{"type", "value"}, {"tuple", tuple_text(tuple)}, {"value", value}});
  if (a.table)
    for (std::size_t t = 0; t < dom->size(); ++t) {
      auto procs = dom->processes(t);
      auto name = lat.name(lat.element(v.table()[t]));
      out.line(tuple_text(procs) + " -> " + name, Json{{"type", "entry"}, {"tuple", tuple_text(procs)}, {"value", name}});
    }
  return kOk;
}

struct BisimArgs {
  std::string system, p, q;
  bool weak = false, via_pel = false;
  std::optional<std::size_t> approx;
};

int cmd_bisim(const BisimArgs& a, const Common& c) {
  Out out{c.json};
  System sys = parse_system(read_file(a.system));
  Process p = sys.parse(a.p, true), q = sys.parse(a.q, true);
  Lts lts = build_lts(sys, std::vector<Process>{p, q}, c.cap);
  const std::size_t pi = 0, qi = *lts.find(q);
  bool same;
  if (a.approx)
    same = (a.weak ? weak_approx(*a.approx, lts, pi, qi) : strong_approx(*a.approx, lts, pi, qi)).bisimilar;
  else if (a.via_pel) {
    if (a.weak) throw Error(ErrorKind::Unsupported, "--via-pel decides strong bisimilarity only");
    same = bisim_via_pel(lts, pi, qi);
  } else
    same = (a.weak ? weak_bisimilar(lts, pi, qi) : strong_bisimilar(lts, pi, qi)).bisimilar;
  Json rec{{"type", "bisim"}, {"mode", a.weak ? "weak" : "strong"}, {"bisimilar", same}};
  std::string human = same ? "BISIMILAR" : "NOT_BISIMILAR";
  if (!same && !a.approx) {
    auto d = distinguishing_depth(lts, pi, qi, a.weak);
    if (d) {
      rec["depth"] = *d;
      human += " depth " + std::to_string(*d);
    }
  }
  out.line(human, rec);
  return kOk;
}

}  // namespace

namespace {

struct SynthArgs {
  std::string system;
  std::string formula_file, formula_text;
  std::string lattice = "bool", lattice_file;
  std::string atoms;
  std::string target;
  std::string driver;
  std::string plant, reference;
  std::size_t free = 1;
  std::vector<std::string> fixed;
  std::size_t max_depth = 2;
  std::vector<std::string> pool;
  std::size_t max_solutions = 0;  // 0: unlimited
  std::size_t max_candidates = 10000;
  std::size_t candidate_cap = 200;
};

int cmd_synth(const SynthArgs& a, const Common& c) {
  Out out{c.json};
  auto sys = std::make_shared<const System>(parse_system(read_file(a.system)));
  SynthSetup setup;
  setup.system = sys;
  setup.bounds.max_depth = a.max_depth;
  setup.bounds.pool = a.pool;
  setup.bounds.max_candidates = a.max_candidates;
  if (a.max_solutions) setup.bounds.max_solutions = a.max_solutions;
  setup.bounds.state_cap = a.candidate_cap;
  setup.eval.state_cap = c.cap;
  auto needs_formula = [&] { return load_formula(a.formula_file, a.formula_text); };
  SynthResult r;
  if (a.driver == "program" || a.driver == "counterexample") {
    setup.atoms = load_atoms(a.atoms);
    r = a.driver == "program" ? synth_program(setup, needs_formula()) : gen_counterexample(setup, needs_formula());
  } else if (a.driver == "bisimilar") {
    if (a.reference.empty()) throw Error(ErrorKind::NotFound, "--reference is required for the bisimilar driver");
    r = gen_bisimilar(setup, sys->parse(a.reference, true));
  } else if (a.driver == "controller" || a.driver.empty()) {
    Lattice lat = load_lattice(a.lattice, a.lattice_file);
    setup.atoms = load_atoms(a.atoms);
    if (a.target.empty()) throw Error(ErrorKind::NotFound, "--target is required");
    LatticeElement target = lat.element(a.target);
    if (a.driver == "controller") {
      if (a.plant.empty()) throw Error(ErrorKind::NotFound, "--plant is required for the controller driver");
      r = synth_controller(setup, sys->parse(a.plant, true), needs_formula(), lat, target);
    } else {
      SynthProblem p;
      p.system = sys;
      p.formula = needs_formula();
      p.atoms = setup.atoms;
      p.lattice = lat;
      p.target = target;
      p.free_count = a.free;
      for (const auto& f : a.fixed) p.fixed.push_back(sys->parse(f, true));
      p.bounds = setup.bounds;
      p.eval = setup.eval;
      r = synthesize(p);
    }
  } else {
    throw Error(ErrorKind::Unsupported, "unknown driver '" + a.driver + "'");
  }
  for (const auto& t : r.solutions) out.line("solution " + tuple_text(t), Json{{"type", "solution"}, {"tuple", tuple_text(t)}});
  for (const auto& f : r.failures)
    out.line("failure " + tuple_text(f.tuple) + " " + f.message,
             Json{{"type", "failure"}, {"tuple", tuple_text(f.tuple)}, {"kind", std::string(to_string(f.kind))}, {"message", f.message}});
  out.line("examined " + std::to_string(r.examined) + " solutions " + std::to_string(r.solutions.size()) + " failures " +
               std::to_string(r.failures.size()) + " exhausted " + (r.exhausted ? "yes" : "no"),
           Json{{"type", "summary"}, {"examined", r.examined}, {"solutions", r.solutions.size()},
                {"failures", r.failures.size()}, {"exhausted", r.exhausted}});
  return kOk;
}

void write_spec(SystemSpec spec, const Process& init, const std::string& path) {
  spec.init = init;
  const std::string text = format_system_spec(spec);
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw Error(ErrorKind::NotFound, "cannot write '" + path + "'");
  f << text;
}

void report(const Out& out, const SimulationReport& r) {
  Json rec{{"type", "simulation"}, {"holds", r.holds}, {"steps", r.steps}};
  if (r.divergence) rec["divergence"] = *r.divergence;
  rec["message"] = r.message;
  out.line((r.holds ? "SIMULATION_HOLDS " : "DIVERGENCE ") + r.message, rec);
}

struct EncodeArgs {
  std::string input, out;
  std::optional<std::size_t> check;
  std::vector<std::string> marking;
  bool has_marking = false;
};

int cmd_encode_tm(const EncodeArgs& a, const Common& c) {
  TuringMachine m = parse_tm(read_file(a.input));
  TmEncoding enc(m);
  const TmConfig start = initial_config(m);
  if (a.check) {
    if (!a.out.empty()) write_spec(enc.system().spec(), enc.encode(start), a.out);
    report(Out{c.json}, enc.check(start, *a.check));
    return kOk;
  }
  write_spec(enc.system().spec(), enc.encode(start), a.out);
  return kOk;
}

int cmd_encode_pn(const EncodeArgs& a, const Common& c) {
  PetriNet n = parse_pn(read_file(a.input));
  Marking m = a.has_marking ? Marking(a.marking.begin(), a.marking.end()) : n.initial;
  PnEncoding enc(n);
  if (a.check) {
    if (!a.out.empty()) write_spec(enc.system().spec(), enc.encode(m), a.out);
    report(Out{c.json}, enc.check(m, *a.check));
    return kOk;
  }
  write_spec(enc.system().spec(), enc.encode(m), a.out);
  return kOk;
}

std::string strip_kind(const Error& e) {
  std::string w = e.what();
  auto pos = w.find(": ");
  return pos == std::string::npos ? w : w.substr(pos + 2);
}

int cmd_lattice_check(const std::string& text, const std::string& file, const Common& c) {
  Out out{c.json};
  auto spec = parse_lattice_spec(file.empty() ? text : read_file(file));
  Lattice lat;
  try {
    lat = make_lattice(spec);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NotALattice && e.kind() != ErrorKind::EmptyUniverse) throw;
    out.line("NOT_A_LATTICE: " + strip_kind(e), Json{{"type", "lattice"}, {"lattice", false}, {"reason", strip_kind(e)}});
    return kOk;
  }
  auto violations = check_lattice_laws(lat);
  for (const auto& v : violations)
    out.line("LAW_VIOLATION " + v.law + ": " + v.detail, Json{{"type", "violation"}, {"law", v.law}, {"detail", v.detail}});
  out.line("LATTICE " + lat.description() + " size " + std::to_string(lat.size()) + " bot " + lat.name(lat.bot()) + " top " +
               lat.name(lat.top()),
           Json{{"type", "lattice"}, {"lattice", violations.empty()}, {"description", lat.description()}, {"size", lat.size()},
                {"bot", lat.name(lat.bot())}, {"top", lat.name(lat.top())}});
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pelw: process calculus, lattice-valued evaluation, bisimulation, encodings and synthesis"};
  app.require_subcommand(1);
  Common common;
  app.add_flag("--json", common.json, "one JSON record per output line");
  app.add_option("--cap", common.cap, "state cap for LTS construction")->check(CLI::PositiveNumber);

  LtsArgs lts;
  auto* c_lts = app.add_subcommand("lts", "print the LTS reachable from a process");
  c_lts->add_option("--system", lts.system, "system spec file")->required();
  c_lts->add_option("--init", lts.init, "initial process (default: the file's init: section)");

  EvalArgs ev;
  auto* c_eval = app.add_subcommand("eval", "evaluate a formula at a process tuple");
  c_eval->add_option("--system", ev.systems, "system spec file (one, or one per tuple position)")->required();
  c_eval->add_option("--formula", ev.formula_file, "formula file");
  c_eval->add_option("--formula-text", ev.formula_text, "formula text");
  c_eval->add_option("--lattice", ev.lattice, "lattice spec text")->capture_default_str();
  c_eval->add_option("--lattice-file", ev.lattice_file, "lattice spec file");
  c_eval->add_option("--atoms", ev.atoms, "atom interpretation file");
  c_eval->add_option("--tuple", ev.tuple, "process at each position")->required();
  c_eval->add_flag("--table", ev.table, "also print the value at every reachable tuple");
  c_eval->add_flag("--permissive", ev.permissive, "solve equations without a witness, with a warning");
  c_eval->add_option("--budget", ev.budget, "function-lattice budget for general equations")->check(CLI::PositiveNumber);

  BisimArgs bi;
  std::size_t approx = 0;
  auto* c_bisim = app.add_subcommand("bisim", "decide bisimilarity of two processes");
  c_bisim->add_option("--system", bi.system, "system spec file")->required();
  c_bisim->add_option("--p", bi.p, "first process")->required();
  c_bisim->add_option("--q", bi.q, "second process")->required();
  c_bisim->add_flag("--weak", bi.weak, "weak instead of strong bisimilarity");
  c_bisim->add_flag("--via-pel", bi.via_pel, "decide by evaluating the bisimulation formula");
  auto* approx_opt = c_bisim->add_option("--approx", approx, "check the k-th approximant only");

  SynthArgs sy;
  auto* c_synth = app.add_subcommand("synth", "enumerative synthesis of processes meeting a target value");
  c_synth->add_option("--system", sy.system, "system spec file")->required();
  c_synth->add_option("--formula", sy.formula_file, "formula file");
  c_synth->add_option("--formula-text", sy.formula_text, "formula text");
  c_synth->add_option("--lattice", sy.lattice, "lattice spec text")->capture_default_str();
  c_synth->add_option("--lattice-file", sy.lattice_file, "lattice spec file");
  c_synth->add_option("--atoms", sy.atoms, "atom interpretation file");
  c_synth->add_option("--target", sy.target, "target lattice element");
  c_synth->add_option("--driver", sy.driver, "program | counterexample | bisimilar | controller")
      ->check(CLI::IsMember({"program", "counterexample", "bisimilar", "controller"}));
  c_synth->add_option("--plant", sy.plant, "environment process for the controller driver");
  c_synth->add_option("--reference", sy.reference, "reference process for the bisimilar driver");
  c_synth->add_option("--free", sy.free, "number of leading positions to synthesize")->check(CLI::PositiveNumber);
  c_synth->add_option("--fixed", sy.fixed, "fixed processes after the free positions");
  c_synth->add_option("--max-depth", sy.max_depth, "grammar depth bound")->check(CLI::PositiveNumber);
  c_synth->add_option("--pool", sy.pool, "constants to build candidates from")->delimiter(',');
  c_synth->add_option("--max-solutions", sy.max_solutions, "stop after this many solutions");
  c_synth->add_option("--max-candidates", sy.max_candidates, "candidate list bound")->check(CLI::PositiveNumber);
  c_synth->add_option("--candidate-cap", sy.candidate_cap, "state cap per candidate")->check(CLI::PositiveNumber);

  EncodeArgs tm, pn;
  std::size_t tm_steps = 0, pn_steps = 0;
  auto* c_tm = app.add_subcommand("encode-tm", "translate a Turing machine into a process system");
  c_tm->add_option("--machine", tm.input, "machine file")->required();
  c_tm->add_option("--out", tm.out, "write the system spec here instead of stdout");
  auto* tm_check = c_tm->add_option("--check", tm_steps, "run the lockstep simulation check for this many steps");

  auto* c_pn = app.add_subcommand("encode-pn", "translate a Petri net into a process system");
  c_pn->add_option("--net", pn.input, "net file")->required();
  c_pn->add_option("--out", pn.out, "write the system spec here instead of stdout");
  auto* pn_marking = c_pn->add_option("--marking", pn.marking, "initial marking (default: the file's marking:)")->delimiter(',');
  auto* pn_check = c_pn->add_option("--check", pn_steps, "run the lockstep simulation check to this depth");

  std::string lat_text, lat_file;
  auto* c_lat = app.add_subcommand("lattice-check", "validate a lattice spec and its laws");
  c_lat->add_option("--lattice", lat_text, "lattice spec text");
  c_lat->add_option("--lattice-file", lat_file, "lattice spec file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kParse;
  }

  try {
    if (*c_lts) return cmd_lts(lts, common);
    if (*c_eval) return cmd_eval(ev, common);
    if (*c_bisim) {
      if (*approx_opt) bi.approx = approx;
      return cmd_bisim(bi, common);
    }
    if (*c_synth) return cmd_synth(sy, common);
    if (*c_tm) {
      if (*tm_check) tm.check = tm_steps;
      return cmd_encode_tm(tm, common);
    }
    if (*c_pn) {
      if (*pn_check) pn.check = pn_steps;
      pn.has_marking = pn_marking->count() > 0;
      return cmd_encode_pn(pn, common);
    }
    if (*c_lat) {
      if (lat_text.empty() && lat_file.empty()) throw Error(ErrorKind::NotFound, "give --lattice or --lattice-file");
      return cmd_lattice_check(lat_text, lat_file, common);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kOther;
  }
  return kOther;
}
