#include <gtest/gtest.h>

#include <array>

#include "pelw/lattice.hpp"
#include "support/random_lattices.hpp"

using namespace pelw;

TEST(Lattice, BoolUniverse) {
  auto L = make_lattice(LatticeSpec::boolean());
  ASSERT_EQ(L.size(), 2u);
  EXPECT_EQ(L.name(L.element(0)), "False");
  EXPECT_EQ(L.name(L.element(1)), "True");
  EXPECT_TRUE(L.leq(L.element("False"), L.element("True")));
  EXPECT_FALSE(L.leq(L.element("True"), L.element("False")));
  EXPECT_EQ(L.meet(L.element("True"), L.element("False")), L.element("False"));
}

TEST(Lattice, ChainAndNatcap) {
  auto c3 = make_lattice(LatticeSpec::chain(3));
  EXPECT_TRUE(c3.leq(c3.element("0"), c3.element("1")));
  EXPECT_TRUE(c3.leq(c3.element("1"), c3.element("2")));
  EXPECT_EQ(c3.join(c3.element("1"), c3.element("2")), c3.element("2"));

  auto c4 = make_lattice(LatticeSpec::chain(4));
  std::array xs{c4.element("1"), c4.element("3"), c4.element("2")};
  EXPECT_EQ(c4.meet_all(xs), c4.element("1"));

  auto n = make_lattice(LatticeSpec::natcap(10));
  EXPECT_EQ(n.size(), 12u);
  EXPECT_EQ(n.top(), n.element("inf"));
  EXPECT_TRUE(n.leq(n.element("10"), n.element("inf")));
}

TEST(Lattice, EmptyBigOperators) {
  auto L = make_lattice(LatticeSpec::boolean());
  EXPECT_EQ(L.meet_all({}), L.element("True"));
  EXPECT_EQ(L.join_all({}), L.element("False"));
}

TEST(Lattice, Powerset) {
  auto L = make_lattice(LatticeSpec::powerset({"a", "b"}));
  auto a = L.element("{a}"), b = L.element("{b}");
  EXPECT_FALSE(L.leq(a, b));
  EXPECT_EQ(L.meet(a, b), L.element("{}"));
  EXPECT_EQ(L.join(a, b), L.element("{a,b}"));
}

TEST(Lattice, ProductEnumeratesLexicographically) {
  auto L = make_lattice(LatticeSpec::product({LatticeSpec::boolean(), LatticeSpec::boolean()}));
  ASSERT_EQ(L.size(), 4u);
  EXPECT_EQ(L.name(L.element(0)), "(False,False)");
  EXPECT_EQ(L.name(L.element(1)), "(False,True)");
  EXPECT_EQ(L.name(L.element(2)), "(True,False)");
  EXPECT_EQ(L.name(L.element(3)), "(True,True)");
}

TEST(Lattice, TableWithoutBoundsIsRejected) {
  try {
    make_lattice(LatticeSpec::table({"a", "b"}, {}));
    FAIL() << "expected NotALattice";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotALattice);
    EXPECT_NE(std::string(e.what()).find("pair (a,b) has no join"), std::string::npos);
  }
  try {
    make_lattice(LatticeSpec::table({}, {}));
    FAIL() << "expected EmptyUniverse";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyUniverse);
  }
}

TEST(Lattice, ForeignElementsAreRejected) {
  auto a = make_lattice(LatticeSpec::chain(2));
  auto b = make_lattice(LatticeSpec::chain(2));
  try {
    (void)a.leq(a.bot(), b.top());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ForeignElement);
  }
}

TEST(Lattice, LawsHoldOnEveryBuiltin) {
  for (const auto& spec : fixtures::builtin_specs()) {
    auto L = make_lattice(spec);
    ASSERT_LE(L.size(), 64u);
    auto v = check_lattice_laws(L);
    EXPECT_TRUE(v.empty()) << spec.to_string() << ": " << v.front().law << " " << v.front().detail;
  }
}

TEST(Lattice, DualSwapsOperations) {
  for (const auto& spec : fixtures::builtin_specs()) {
    auto L = make_lattice(spec);
    if (L.size() > 16) continue;
    auto D = make_lattice(LatticeSpec::dual(spec));
    ASSERT_EQ(D.size(), L.size());
    EXPECT_EQ(D.bot().index, L.top().index);
    EXPECT_EQ(D.top().index, L.bot().index);
    for (std::size_t i = 0; i < L.size(); ++i)
      for (std::size_t j = 0; j < L.size(); ++j) {
        EXPECT_EQ(D.meet_index(i, j), L.join_index(i, j));
        EXPECT_EQ(D.join_index(i, j), L.meet_index(i, j));
      }
  }
}

TEST(Lattice, NatcapIsChainWithInfinityOnTop) {
  for (std::size_t cap = 0; cap < 6; ++cap) {
    auto n = make_lattice(LatticeSpec::natcap(cap));
    auto c = make_lattice(LatticeSpec::chain(cap + 2));
    ASSERT_EQ(n.size(), c.size());
    for (std::size_t i = 0; i < n.size(); ++i)
      for (std::size_t j = 0; j < n.size(); ++j) EXPECT_EQ(n.leq_index(i, j), c.leq_index(i, j));
    EXPECT_EQ(n.name(n.top()), "inf");
  }
}

TEST(LatticeSpecText, ParsesEveryKind) {
  EXPECT_EQ(make_lattice(parse_lattice_spec("bool")).size(), 2u);
  EXPECT_EQ(make_lattice(parse_lattice_spec("chain 3")).size(), 3u);
  EXPECT_EQ(make_lattice(parse_lattice_spec("natcap 10")).size(), 12u);
  EXPECT_EQ(make_lattice(parse_lattice_spec("powerset {a,b,c}")).size(), 8u);
  EXPECT_EQ(make_lattice(parse_lattice_spec("product [bool, chain 3]")).size(), 6u);
  EXPECT_EQ(make_lattice(parse_lattice_spec("dual chain 4")).size(), 4u);
  auto t = make_lattice(parse_lattice_spec("table { elems: [x,y,z]; leq: [(x,y),(x,z),(y,z)] }  # chain"));
  EXPECT_EQ(t.bot(), t.element("x"));
  EXPECT_EQ(t.top(), t.element("z"));
  auto s = parse_lattice_spec("product [powerset {a}, dual natcap 2]");
  EXPECT_EQ(parse_lattice_spec(s.to_string()).to_string(), s.to_string());
}

TEST(LatticeSpecText, SyntaxErrorsCarryPosition) {
  try {
    parse_lattice_spec("chain x");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SyntaxError);
    EXPECT_NE(std::string(e.what()).find("column"), std::string::npos);
  }
}
