#include <gtest/gtest.h>

#include <random>
#include <set>

#include "pelw/label.hpp"
#include "pelw/lts.hpp"
#include "pelw/process.hpp"
#include "pelw/system.hpp"
#include "support/congruence_axioms.hpp"
#include "support/random_terms.hpp"

using namespace pelw;
using namespace pelw::fixtures;

namespace {

std::set<std::pair<std::string, std::string>> moves(const System& sys, const Process& p) {
  std::set<std::pair<std::string, std::string>> out;
  for (const auto& t : sys.step(p)) out.insert({t.label.to_string(), t.target.key()});
  return out;
}

}  // namespace

TEST(Parse, EpsIsUnitOfSeq) { EXPECT_EQ(parse_process("eps ; C").key(), "C"); }

TEST(Parse, ChoiceIsCommutative) { EXPECT_EQ(parse_process("A + B"), parse_process("B + A")); }

TEST(Parse, RestrictionMovesOntoTheOperandThatUsesIt) {
  System sys = parse_system("rules: P -b-> P; Q -a-> Q;");
  Process p = sys.parse("new a . (P |{}| Q)");
  EXPECT_EQ(p.kind(), ProcKind::Par);
  EXPECT_EQ(p.key(), "P |{}| new a . Q");
  EXPECT_EQ(p, sys.parse("P |{}| new a . Q"));
}

TEST(Parse, PrintingRoundTrips) {
  System sys = term_system();
  for (const char* src : {"A ; (B + C)", "new a . (A ; B) + D", "A |{a,b}| (B |{}| C)", "(A + B) ; C ; D",
                          "new a,b . (C |{a}| D)"}) {
    Process p = sys.parse(src);
    EXPECT_EQ(sys.parse(p.key()), p) << src;
  }
}

TEST(Parse, SyntaxErrorsReportPosition) {
  try {
    parse_process("A + ");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SyntaxError);
    EXPECT_NE(std::string(e.what()).find("line 1"), std::string::npos);
  }
  EXPECT_THROW(parse_process("A |{a B"), Error);
  EXPECT_THROW(parse_process("new tau . A"), Error);
}

TEST(Parse, StrictModeRejectsUnknownConstants) {
  System sys = parse_system("consts: C, D; alphabet: a; rules: C -a-> D;");
  EXPECT_NO_THROW(sys.parse("C ; D", true));
  try {
    sys.parse("C ; E", true);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnknownConstant);
  }
  EXPECT_THROW(parse_system("consts: C; alphabet: a; rules: C -a-> E;"), Error);
}

TEST(Canonical, SeqIsFlattened) {
  Process a = raw::seq(raw::seq(parse_process_raw("P"), parse_process_raw("Q")), parse_process_raw("R"));
  Process b = raw::seq(parse_process_raw("P"), raw::seq(parse_process_raw("Q"), parse_process_raw("R")));
  ProcessBuilder bld;
  EXPECT_EQ(bld.canonicalize(a).key(), "P ; Q ; R");
  EXPECT_EQ(bld.canonicalize(a), bld.canonicalize(b));
}

TEST(Canonical, AdjacentBindersCommute) {
  System sys = parse_system("rules: P -m-> P; P -n-> P;");
  EXPECT_EQ(sys.parse("new m . new n . P"), sys.parse("new n . new m . P"));
  EXPECT_EQ(sys.parse("new m . new n . P").key(), "new m,n . P");
}

TEST(Canonical, RestrictedEpsVanishes) { EXPECT_TRUE(parse_process("new a . eps").is_eps()); }

TEST(Canonical, ChoiceWithEpsDropsIt) { EXPECT_EQ(parse_process("A + eps").key(), "A"); }

TEST(Canonical, BinderIsNotLiftedOverACapturingOperand) {
  System sys = parse_system("rules: P -a-> P; Q -a-> Q;");
  Process p = sys.parse("P + new a . Q");
  EXPECT_EQ(p.key(), "P + new a . Q");
  EXPECT_EQ(p.free_names(), NameSet{"a"});
}

TEST(Canonical, BinderCoversEveryDependentOperand) {
  System sys = parse_system("rules: P -a-> P; Q -a-> Q; R -b-> R;");
  Process p = sys.parse("new a . (P |{b}| Q |{b}| R)");
  EXPECT_EQ(p.key(), "R |{b}| new a . (P |{b}| Q)");
  // A synchronised binder stays on the whole group: R cannot do a.
  Process q = sys.parse("new a . (P |{a}| Q |{a}| R)");
  EXPECT_EQ(q.key(), "new a . (P |{a}| Q |{a}| R)");
}

TEST(Names, ConstantsContributeTheirRuleAlphabet) {
  System sys = parse_system("rules: C -a-> D; D -b-> eps; E -c-> C;");
  EXPECT_EQ(sys.parse("C").free_names(), (NameSet{"a", "b"}));
  EXPECT_EQ(sys.parse("E").free_names(), (NameSet{"a", "b", "c"}));
  EXPECT_EQ(sys.parse("new a . C").free_names(), NameSet{"b"});
  EXPECT_TRUE(free_names(parse_process("eps")).empty());
  EXPECT_EQ(bound_names(sys.parse("new a . C")), NameSet{"a"});
  EXPECT_TRUE(bound_names(sys.parse("C |{a}| D")).empty());
}

TEST(Labels, SyncKeepsOneCopyOfSharedActions) {
  EXPECT_EQ(label_sync(Label{"a"}, Label{"a"}, {"a"}), Label{"a"});
  EXPECT_EQ(label_sync(Label{"b"}, Label{}, {"a"}), Label{"b"});
  EXPECT_EQ(label_sync(Label{"a", "b"}, Label{"a", "c"}, {"a"}), (Label{"a", "b", "c"}));
  EXPECT_EQ(label_sync(Label{"b"}, Label{"b"}, {}), (Label{"b", "b"}));
  try {
    label_sync(Label{"a"}, Label{}, {"a"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SyncMismatch);
  }
}

TEST(Labels, SyncIsCommutativeAndHasEmptyUnit) {
  std::mt19937 rng(7);
  const std::vector<std::string> names{"a", "b", "tau"};
  for (int trial = 0; trial < 300; ++trial) {
    Label a, b;
    std::set<std::string> sync;
    for (const auto& n : names) {
      a.add(n, rng() % 3);
      b.add(n, rng() % 3);
      if (rng() % 2) sync.insert(n);
    }
    EXPECT_EQ(label_sync(a, Label{}, {}), a);
    bool ok = a.project(sync) == b.project(sync);
    if (ok)
      EXPECT_EQ(label_sync(a, b, sync), label_sync(b, a, sync));
    else
      EXPECT_THROW(label_sync(a, b, sync), Error);
  }
}

TEST(Labels, HideRenamesToTau) {
  Label l{"a", "a", "b"};
  EXPECT_EQ(l.hide({"a"}), (Label{kTau, kTau, "b"}));
  EXPECT_EQ(l.hide({"a"}).without_tau(), Label{"b"});
  EXPECT_EQ(Label{}.to_string(), "{}");
  EXPECT_EQ(l.to_string(), "{a,a,b}");
}

TEST(Step, BasicRuleFires) {
  System sys = parse_system("rules: C -a-> D;");
  auto m = moves(sys, sys.parse("C"));
  EXPECT_EQ(m, (std::set<std::pair<std::string, std::string>>{{"{a}", "D"}}));
  EXPECT_TRUE(sys.step(sys.parse("eps")).empty());
}

TEST(Step, SynchronisedParallelAndRestriction) {
  System sys = parse_system("rules: C -a-> D;");
  auto m = moves(sys, sys.parse("C |{a}| C"));
  EXPECT_EQ(m, (std::set<std::pair<std::string, std::string>>{{"{a}", sys.parse("D |{a}| D").key()}}));
  auto r = moves(sys, sys.parse("new a . (C |{a}| C)"));
  EXPECT_EQ(r, (std::set<std::pair<std::string, std::string>>{{"{tau}", sys.parse("new a . (D |{a}| D)").key()}}));
}

TEST(Step, BinderOnSynchronisedNameIsNotPushedInside) {
  System sys = parse_system("rules: C -a-> D; E -b-> F;");
  Process p = sys.parse("new a . (E |{a}| C)");
  ASSERT_EQ(p.kind(), ProcKind::Restrict);
  // Pushing the binder onto C would let C hide a and move alone.
  EXPECT_EQ(moves(sys, p), (std::set<std::pair<std::string, std::string>>{{"{b}", sys.parse("new a . (F |{a}| C)").key()}}));
  Process q = sys.parse("new c . (E |{a}| C)");
  EXPECT_NE(q.kind(), ProcKind::Restrict);
}

TEST(Step, UnsynchronisedParallelInterleavesAndOverlaps) {
  System sys = parse_system("rules: C -a-> D; E -b-> F;");
  auto m = moves(sys, sys.parse("C |{}| E"));
  std::set<std::pair<std::string, std::string>> want{
      {"{a}", sys.parse("D |{}| E").key()},
      {"{b}", sys.parse("C |{}| F").key()},
      {"{a,b}", sys.parse("D |{}| F").key()},
  };
  EXPECT_EQ(m, want);
}

TEST(Step, SequenceHeadAndChoice) {
  System sys = parse_system("rules: C -a-> D; D -b-> eps; E -c-> eps;");
  EXPECT_EQ(moves(sys, sys.parse("C ; E")),
            (std::set<std::pair<std::string, std::string>>{{"{a}", sys.parse("D ; E").key()}}));
  EXPECT_EQ(moves(sys, sys.parse("C + E")),
            (std::set<std::pair<std::string, std::string>>{{"{a}", "D"}, {"{c}", "eps"}}));
}

TEST(Step, CompositeRuleRedexes) {
  System sys = parse_system("rules: (X ; Y) -a-> Z; X |{}| Y -b-> Z; X + Y -c-> Z;");
  EXPECT_EQ(moves(sys, sys.parse("X ; Y ; W")),
            (std::set<std::pair<std::string, std::string>>{{"{a}", "Z ; W"}}));
  EXPECT_EQ(moves(sys, sys.parse("W |{}| Y |{}| X")),
            (std::set<std::pair<std::string, std::string>>{{"{b}", sys.parse("W |{}| Z").key()}}));
  EXPECT_EQ(moves(sys, sys.parse("Y + W + X")), (std::set<std::pair<std::string, std::string>>{{"{c}", "Z"}}));
}

TEST(Lts, Examples) {
  System s1 = parse_system("rules: C -a-> D;");
  auto e = build_lts(s1, parse_process("eps"));
  EXPECT_EQ(e.size(), 1u);
  EXPECT_TRUE(e.edges.empty());

  System s2 = parse_system("rules: C -a-> C;");
  auto loop = build_lts(s2, s2.parse("C"));
  EXPECT_EQ(loop.size(), 1u);
  ASSERT_EQ(loop.edges.size(), 1u);
  EXPECT_EQ(loop.edges[0].label, Label{"a"});

  System s3 = parse_system("rules: C -a-> D; D -b-> eps;");
  auto chain = build_lts(s3, s3.parse("C"));
  EXPECT_EQ(chain.size(), 3u);
  EXPECT_EQ(chain.edges.size(), 2u);
  EXPECT_EQ(chain.states[0].key(), "C");
  EXPECT_EQ(chain.states[1].key(), "D");
  EXPECT_EQ(chain.states[2].key(), "eps");
}

TEST(Lts, CapIsEnforced) {
  System sys = parse_system("rules: C -a-> C ; C;");
  try {
    build_lts(sys, sys.parse("C"), 5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::StateCapExceeded);
  }
}

TEST(Lts, WeakSaturation) {
  System sys = parse_system("rules: P -h-> Q; Q -a-> R;");
  Process init = sys.parse("new h . P");
  auto lts = build_lts(sys, init);
  ASSERT_EQ(lts.size(), 3u);
  auto weak = weak_saturate(lts);
  bool found = false;
  for (const auto& e : weak.edges)
    if (e.from == 0 && e.to == 2 && e.label == Label{"a"}) found = true;
  EXPECT_TRUE(found);

  System plain = parse_system("rules: C -a-> D; D -b-> eps;");
  auto strong = build_lts(plain, plain.parse("C"));
  EXPECT_EQ(weak_saturate(strong).edges, strong.edges);
}

TEST(Lts, WeakLabelDropsTau) {
  System sys = parse_system("rules: C -a-> D; E -h-> F;");
  auto lts = build_lts(sys, sys.parse("C |{}| new h . E"));
  auto weak = weak_saturate(lts);
  bool found = false;
  for (const auto& e : lts.edges)
    if (e.label == (Label{"a", kTau})) found = true;
  EXPECT_TRUE(found);
  for (const auto& e : weak.edges) EXPECT_EQ(e.label.count(kTau), 0u);
}

TEST(Congruence, AxiomsAgreeOnRandomTermsInRandomContexts) {
  System sys = term_system();
  std::mt19937 rng(2024);
  std::map<std::string, int> checked;
  for (int trial = 0; trial < 1000; ++trial) {
    for (auto& c : instantiate_axioms(rng, sys)) {
      Process other = random_raw_term(rng, 3);
      std::mt19937 ctx_rng(rng());
      std::mt19937 ctx_rng2 = ctx_rng;
      Process l = random_context(ctx_rng, c.lhs, other);
      Process r = random_context(ctx_rng2, c.rhs, other);
      ASSERT_EQ(sys.canonical(c.lhs).key(), sys.canonical(c.rhs).key())
          << c.name << ": " << c.lhs.key() << "  vs  " << c.rhs.key();
      ASSERT_EQ(sys.canonical(l).key(), sys.canonical(r).key()) << c.name << " in context: " << l.key();
      ++checked[c.name];
    }
  }
  EXPECT_GE(checked["nu-par"], 100);
  EXPECT_EQ(checked["choice-comm"], 1000);
}

TEST(Congruence, CanonicalizeIsIdempotent) {
  System sys = term_system();
  std::mt19937 rng(99);
  for (int trial = 0; trial < 2000; ++trial) {
    Process t = random_raw_term(rng, 6);
    Process c = sys.canonical(t);
    ASSERT_EQ(sys.canonical(c).key(), c.key()) << t.key();
    ASSERT_EQ(sys.parse(c.key()).key(), c.key()) << t.key();
  }
}

TEST(Congruence, StepIsSymmetricInChoiceAndPar) {
  System sys = term_system();
  std::mt19937 rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    Process p = random_raw_term(rng, 4), q = random_raw_term(rng, 4);
    NameSet l = random_names(rng, false);
    EXPECT_EQ(moves(sys, sys.canonical(raw::choice(p, q))), moves(sys, sys.canonical(raw::choice(q, p))));
    EXPECT_EQ(moves(sys, sys.canonical(raw::par(l, p, q))), moves(sys, sys.canonical(raw::par(l, q, p))));
  }
}

TEST(Congruence, RestrictedNamesNeverEscape) {
  System sys = term_system();
  std::mt19937 rng(11);
  int seen = 0;
  for (int trial = 0; trial < 500; ++trial) {
    Process t = sys.canonical(random_raw_term(rng, 5));
    if (t.kind() != ProcKind::Restrict) continue;
    ++seen;
    for (const auto& tr : sys.step(t))
      for (const auto& n : t.names()) EXPECT_EQ(tr.label.count(n), 0u) << t.key();
  }
  EXPECT_GT(seen, 10);
}
