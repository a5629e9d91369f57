#include <gtest/gtest.h>

#include <random>

#include "pelw/lts.hpp"
#include "pelw/petri.hpp"
#include "pelw/turing.hpp"

using namespace pelw;

namespace {

const char* kIncrement =
    "states: q0, q1, qf; gamma: b, 1; blank: b; sigma: 1; q0: q0; finals: qf;\n"
    "delta: (q0,1) -> (q0,1,R); (q0,b) -> (q1,1,L); (q1,1) -> (q1,1,L); (q1,b) -> (qf,b,R);\n";

TuringMachine increment(std::size_t ones) {
  auto m = parse_tm(kIncrement);
  m.input.assign(ones, "1");
  return m;
}

/// Machine steps until halting, by direct iteration.
std::size_t run_length(const TuringMachine& m, TmConfig c, std::size_t limit) {
  std::size_t k = 0;
  while (k < limit) {
    auto n = tm_step(m, c);
    if (!n) break;
    c = *n;
    ++k;
  }
  return k;
}

TuringMachine random_tm(std::mt19937& rng) {
  TuringMachine m;
  m.states = {"q0", "q1", "q2", "qf"};
  m.gamma = {"b", "x", "y"};
  m.blank = "b";
  m.sigma = {"x", "y"};
  m.initial = "q0";
  m.finals = {"qf"};
  std::bernoulli_distribution defined(0.85);
  for (std::size_t q = 0; q < 3; ++q)
    for (const auto& s : m.gamma)
      if (defined(rng))
        m.delta[{m.states[q], s}] = {m.states[rng() % 4], m.gamma[rng() % 3], rng() % 2 ? Move::L : Move::R};
  return m;
}

TmConfig random_config(std::mt19937& rng, const TuringMachine& m) {
  TmConfig c;
  auto cells = [&](std::vector<std::string>& out) {
    for (std::size_t i = rng() % 5; i > 0; --i) out.push_back(m.gamma[rng() % m.gamma.size()]);
  };
  cells(c.left);
  cells(c.right);
  c.head = m.gamma[rng() % m.gamma.size()];
  c.state = m.states[rng() % 3];
  return c.normalized(m.blank);
}

const char* kProducerConsumer =
    "places: p1, p2, p3, p4; transitions: t1, t2, t3;\n"
    "arcs: p1->t1, t1->p2, p2->t2, p4->t2, t2->p1, t2->p3, p3->t3, t3->p4;\n"
    "marking: p1, p4;";

std::set<std::pair<std::string, std::string>> moves(const System& sys, const Process& p) {
  std::set<std::pair<std::string, std::string>> out;
  for (const auto& t : sys.step(p)) out.insert({t.label.to_string(), t.target.key()});
  return out;
}

}  // namespace

TEST(TuringStep, WritesAndMovesOntoBlank) {
  auto m = parse_tm("states: q0, qf; gamma: b, 1; blank: b; sigma: 1; q0: q0; finals: qf; delta: (q0,b) -> (qf,1,R);");
  auto n = tm_step(m, initial_config(m));
  ASSERT_TRUE(n);
  EXPECT_EQ(*n, (TmConfig{{"1"}, "b", "qf", {}}));
  EXPECT_FALSE(tm_step(m, *n));
}

TEST(TuringStep, UndefinedTransitionHalts) {
  auto m = parse_tm("states: q0, qf; gamma: b, 1; blank: b; sigma: 1; q0: q0; finals: qf; delta: (q0,b) -> (qf,1,R);");
  EXPECT_FALSE(tm_step(m, TmConfig{{}, "1", "q0", {}}));
}

TEST(TuringStep, LeftMoveExtendsWithBlank) {
  auto m = parse_tm("states: q0, qf; gamma: b, 1; blank: b; q0: q0; finals: qf; delta: (q0,b) -> (qf,1,L);");
  EXPECT_EQ(*tm_step(m, initial_config(m)), (TmConfig{{}, "b", "qf", {"1"}}));
}

TEST(TuringStep, IncrementRunLength) {
  for (std::size_t n : {0u, 1u, 4u, 9u}) EXPECT_EQ(run_length(increment(n), initial_config(increment(n)), 100), 2 * n + 2);
}

TEST(TuringParse, Errors) {
  auto kind = [](const char* src) {
    try {
      parse_tm(src);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::Unsupported;
  };
  EXPECT_EQ(kind("states: q0; gamma: b; q0: q0;"), ErrorKind::SyntaxError);
  EXPECT_EQ(kind("states: q0; gamma: b; blank: c; q0: q0;"), ErrorKind::NotFound);
  EXPECT_EQ(kind("states: q0; gamma: b; blank: b; q0: q0; delta: (q0,b) -> (q0,b,U);"), ErrorKind::SyntaxError);
  EXPECT_EQ(kind("states: q0; gamma: b; blank: b; q0: q0; delta: (q0,b) -> (q0,b,L); (q0,b) -> (q0,b,R);"),
            ErrorKind::SyntaxError);
  EXPECT_EQ(kind("states: q0; gamma: b; blank: b; sigma: b; q0: q0;"), ErrorKind::Unsupported);
}

TEST(TuringEncoding, ShapeAndDecodeIsLeftInverse) {
  std::mt19937 rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    auto m = random_tm(rng);
    TmEncoding enc(m);
    auto c = random_config(rng, m);
    Process p = enc.encode(c);
    ASSERT_EQ(p.kind(), ProcKind::Restrict);
    const Process& body = p.children()[0];
    ASSERT_EQ(body.kind(), ProcKind::Par);
    EXPECT_EQ(body.children().size(), 3u);
    EXPECT_EQ(body.names(), enc.sync());
    EXPECT_EQ(enc.decode(p), c) << c.to_string();
    auto [spec, q] = trans_tm(m, c);
    EXPECT_EQ(q, p);
    EXPECT_EQ(enc.system().rules().size(), spec.rules.size());
  }
}

TEST(TuringEncoding, OneStepMatchesMachine) {
  auto m = parse_tm("states: q0, qf; gamma: b, 1; blank: b; sigma: 1; q0: q0; finals: qf; delta: (q0,b) -> (qf,1,R);");
  TmEncoding enc(m);
  auto c = initial_config(m);
  const auto& steps = enc.system().step(enc.encode(c));
  ASSERT_EQ(steps.size(), 1u);
  EXPECT_EQ(steps[0].label, Label{kTau});
  EXPECT_EQ(enc.decode(steps[0].target), *tm_step(m, c));
  EXPECT_TRUE(enc.system().step(steps[0].target).empty());
}

TEST(TuringEncoding, HaltedMachineHasNoStep) {
  auto m = increment(2);
  TmEncoding enc(m);
  EXPECT_TRUE(enc.system().step(enc.encode(TmConfig{{"1"}, "1", "qf", {}})).empty());
  EXPECT_FALSE(enc.system().step(enc.encode(TmConfig{{}, "b", "q1", {}})).empty());
}

TEST(TuringEncoding, ReservedNamesClash) {
  auto m = parse_tm("states: q0; gamma: b, end; blank: b; q0: q0;");
  try {
    TmEncoding enc(m);
    FAIL() << "expected AlphabetClash";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::AlphabetClash);
  }
  auto ambiguous = parse_tm("states: q, x_q; gamma: b, b_x; blank: b; q0: q;");
  try {
    TmEncoding enc(ambiguous);
    FAIL() << "expected AlphabetClash";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::AlphabetClash);
  }
}

TEST(TuringSimulation, IncrementLockstep) {
  auto m = increment(9);
  auto r = check_tm_simulation(m, initial_config(m), 20);
  EXPECT_TRUE(r.holds) << r.message;
  EXPECT_EQ(r.steps, 20u);
  auto m4 = increment(4);
  auto r4 = check_tm_simulation(m4, initial_config(m4), 10);
  EXPECT_TRUE(r4.holds) << r4.message;
  EXPECT_EQ(r4.steps, 10u);
}

TEST(TuringSimulation, ZeroStepsHold) {
  auto m = increment(3);
  auto r = check_tm_simulation(m, initial_config(m), 0);
  EXPECT_TRUE(r.holds);
  EXPECT_EQ(r.steps, 0u);
}

TEST(TuringSimulation, RemovedRuleIsLocated) {
  auto m = increment(9);
  TmEncoding enc(m);
  // Drop the head rule of the final step (q1 reading blank).
  std::vector<DeltaRule> rules;
  for (const auto& r : enc.system().rules())
    if (r.lhs.to_string() != "h_b_q1") rules.push_back(r);
  ASSERT_LT(rules.size(), enc.system().rules().size());
  // Oracle: the first machine step taken from state q1 on a blank.
  TmConfig c = initial_config(m);
  std::size_t first = 0;
  while (!(c.state == "q1" && c.head == "b")) {
    c = *tm_step(m, c);
    ++first;
  }
  auto r = enc.with_rules(rules).check(initial_config(m), 20);
  EXPECT_FALSE(r.holds);
  ASSERT_TRUE(r.divergence);
  EXPECT_EQ(*r.divergence, first);
  EXPECT_EQ(first, 19u);
}

TEST(TuringSimulation, RandomMachinesAndConfigurations) {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 150; ++trial) {
    auto m = random_tm(rng);
    auto c = random_config(rng, m);
    auto r = TmEncoding(m).check(c, 20);
    ASSERT_TRUE(r.holds) << r.message;
    EXPECT_EQ(r.steps, run_length(m, c, 20));
  }
}

TEST(TuringSimulation, EveryVisibleStepIsTau) {
  std::mt19937 rng(9);
  for (int trial = 0; trial < 30; ++trial) {
    auto m = random_tm(rng);
    TmEncoding enc(m);
    auto lts = build_lts_bounded(enc.system(), enc.encode(random_config(rng, m)), 12);
    for (const auto& e : lts.edges) ASSERT_EQ(e.label, Label{kTau});
    for (const auto& s : lts.states) ASSERT_EQ(s.kind(), ProcKind::Restrict);
  }
}

TEST(PetriFire, Examples) {
  auto n = parse_pn("places: p1, p2; transitions: t; arcs: p1->t, t->p2;");
  EXPECT_EQ(pn_fire(n, {"p1"}, "t"), (Marking{"p2"}));
  try {
    pn_fire(n, {"p2"}, "t");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotEnabled);
  }
  try {
    pn_fire(n, {"p1", "p2"}, "t");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnsafeFiring);
  }
  auto src = parse_pn("places: p; transitions: s; arcs: s->p;");
  EXPECT_EQ(pn_fire(src, {}, "s"), (Marking{"p"}));
  auto loop = parse_pn("places: p; transitions: t; arcs: p->t, t->p;");
  EXPECT_EQ(pn_fire(loop, {"p"}, "t"), (Marking{"p"}));
}

TEST(PetriParse, Errors) {
  auto kind = [](const char* src) {
    try {
      parse_pn(src);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::Unsupported;
  };
  EXPECT_EQ(kind("places: p; transitions: t; arcs: p->q;"), ErrorKind::NotFound);
  EXPECT_EQ(kind("places: p; transitions: p;"), ErrorKind::AlphabetClash);
  EXPECT_EQ(kind("places: p; transitions: t; arcs: p t;"), ErrorKind::SyntaxError);
  EXPECT_EQ(kind("places: p; marking: q;"), ErrorKind::NotFound);
}

TEST(PetriEncoding, SingleArc) {
  auto n = parse_pn("places: c1, c2; transitions: t; arcs: c1->t, t->c2;");
  PnEncoding enc(n);
  EXPECT_EQ(moves(enc.system(), enc.encode({"c1"})), (std::set<std::pair<std::string, std::string>>{{"{t}", "c2"}}));
  auto [spec, p] = trans_pn(n, {"c1"});
  EXPECT_EQ(spec.rules.size(), 1u);
  EXPECT_EQ(p.to_string(), "c1");
}

TEST(PetriEncoding, EmptyMarkingIsEps) {
  auto n = parse_pn("places: c1, c2; transitions: t; arcs: c1->t, t->c2;");
  PnEncoding enc(n);
  EXPECT_TRUE(enc.encode({}).is_eps());
  EXPECT_TRUE(enc.system().step(enc.encode({})).empty());
  EXPECT_EQ(enc.decode(enc.encode({})), Marking{});
}

TEST(PetriEncoding, IndependentTransitionsCombine) {
  auto n = parse_pn("places: a, b, c, d; transitions: t1, t2; arcs: a->t1, t1->c, b->t2, t2->d;");
  PnEncoding enc(n);
  auto m = moves(enc.system(), enc.encode({"a", "b"}));
  std::set<std::pair<std::string, std::string>> want;
  for (auto& [ts, next] : pn_steps(n, {"a", "b"})) want.insert({Label::of(ts).to_string(), enc.encode(next).key()});
  EXPECT_EQ(m, want);
  EXPECT_EQ(want.size(), 3u);
  EXPECT_TRUE(want.count({"{t1,t2}", enc.encode({"c", "d"}).key()}));
}

TEST(PetriEncoding, SourceTransitionUnsupported) {
  try {
    PnEncoding enc(parse_pn("places: p; transitions: s; arcs: s->p;"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Unsupported);
  }
}

TEST(PetriEncoding, DecodeIsLeftInverse) {
  auto n = parse_pn(kProducerConsumer);
  PnEncoding enc(n);
  for (unsigned mask = 0; mask < 16; ++mask) {
    Marking m;
    for (unsigned i = 0; i < 4; ++i)
      if (mask >> i & 1) m.insert(n.places[i]);
    EXPECT_EQ(enc.decode(enc.encode(m)), m);
    EXPECT_EQ(enc.decode(trans_pn(n, m).second), m);
  }
}

TEST(PetriSimulation, ProducerConsumer) {
  auto n = parse_pn(kProducerConsumer);
  auto r = check_pn_simulation(n, n.initial, 8);
  EXPECT_TRUE(r.holds) << r.message;
  EXPECT_EQ(r.states, 4u);
  EXPECT_TRUE(check_pn_simulation(n, n.initial, 0).holds);
}

TEST(PetriSimulation, ReachabilityGraphsIsomorphic) {
  auto n = parse_pn(kProducerConsumer);
  PnEncoding enc(n);
  auto net = pn_reachability(n, n.initial, 6);
  auto lts = build_lts_bounded(enc.system(), enc.encode(n.initial), 6);
  ASSERT_EQ(net.markings.size(), lts.size());
  std::map<Marking, std::size_t> pos;
  for (std::size_t i = 0; i < net.markings.size(); ++i) pos[net.markings[i]] = i;
  std::vector<std::size_t> iso(lts.size());
  std::set<std::size_t> image;
  for (std::size_t s = 0; s < lts.size(); ++s) {
    auto it = pos.find(enc.decode(lts.states[s]));
    ASSERT_NE(it, pos.end());
    iso[s] = it->second;
    image.insert(it->second);
  }
  EXPECT_EQ(image.size(), lts.size());
  using EdgeSet = std::set<std::tuple<std::size_t, Label, std::size_t>>;
  EdgeSet mapped;
  for (const auto& e : lts.edges) mapped.insert({iso[e.from], e.label, iso[e.to]});
  EXPECT_EQ(mapped, EdgeSet(net.edges.begin(), net.edges.end()));
  EXPECT_TRUE(mapped.count({pos[{"p1", "p3"}], Label{"t1", "t3"}, pos[{"p2", "p4"}]}));
}

TEST(PetriSimulation, RemovedRuleIsLocated) {
  auto n = parse_pn(kProducerConsumer);
  PnEncoding enc(n);
  std::vector<DeltaRule> rules;
  for (const auto& r : enc.system().rules())
    if (r.action != "t3") rules.push_back(r);
  auto r = enc.with_rules(rules).check(n.initial, 8);
  EXPECT_FALSE(r.holds);
  ASSERT_TRUE(r.divergence);
  // t3 first becomes enabled at {p1,p3}, two firings from the start.
  EXPECT_EQ(*r.divergence, 2u);
}

TEST(PetriSimulation, RandomNetsAgreeOnSafeSteps) {
  std::mt19937 rng(21);
  for (int trial = 0; trial < 80; ++trial) {
    PetriNet n;
    n.places = {"a", "b", "c", "d", "e"};
    n.transitions = {"t", "u", "v"};
    for (const auto& t : n.transitions) {
      n.arcs.push_back({n.places[rng() % 5], t});
      for (const auto& p : n.places)
        if (rng() % 5 == 0) n.arcs.push_back({p, t});
      for (const auto& p : n.places)
        if (rng() % 3 == 0) n.arcs.push_back({t, p});
    }
    std::sort(n.arcs.begin(), n.arcs.end());
    n.arcs.erase(std::unique(n.arcs.begin(), n.arcs.end()), n.arcs.end());
    PnEncoding enc(n);
    Marking m;
    for (const auto& p : n.places)
      if (rng() % 2) m.insert(p);
    std::map<Label, Marking> want;
    for (auto& [ts, next] : pn_steps(n, m)) want.emplace(Label::of(ts), next);
    std::map<Label, Marking> got;
    for (const auto& t : enc.system().step(enc.encode(m))) {
      try {
        got.emplace(t.label, enc.decode(t.target));
      } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::UnsafeFiring);
      }
    }
    EXPECT_EQ(got, want) << trial;
  }
}
