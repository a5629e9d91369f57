#ifndef PELW_LATTICE_HPP
#define PELW_LATTICE_HPP

#include <algorithm>
#include <atomic>
#include <compare>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pelw/error.hpp"
#include "pelw/text.hpp"

namespace pelw {

/// Description of a finite complete lattice, in the vocabulary of the text
/// format (`bool`, `chain 3`, `natcap 10`, `powerset {a,b}`, ...).
struct LatticeSpec {
  enum class Kind { Bool, Chain, NatCap, Powerset, Product, Dual, Table };

  Kind kind = Kind::Bool;
  std::size_t count = 0;                                  // chain length or natcap bound
  std::vector<std::string> names;                         // powerset ground / table elements
  std::vector<LatticeSpec> parts;                         // product factors, dual operand
  std::vector<std::pair<std::string, std::string>> leq;   // table order generators

  static LatticeSpec boolean() { return {}; }
  static LatticeSpec chain(std::size_t n) { return {Kind::Chain, n, {}, {}, {}}; }
  static LatticeSpec natcap(std::size_t cap) { return {Kind::NatCap, cap, {}, {}, {}}; }
  static LatticeSpec powerset(std::vector<std::string> ground) {
    return {Kind::Powerset, 0, std::move(ground), {}, {}};
  }
  static LatticeSpec product(std::vector<LatticeSpec> factors) {
    return {Kind::Product, 0, {}, std::move(factors), {}};
  }
  static LatticeSpec dual(LatticeSpec base) { return {Kind::Dual, 0, {}, {std::move(base)}, {}}; }
  static LatticeSpec table(std::vector<std::string> elems,
                           std::vector<std::pair<std::string, std::string>> order) {
    return {Kind::Table, 0, std::move(elems), {}, std::move(order)};
  }

  std::string to_string() const {
    switch (kind) {
      case Kind::Bool: return "bool";
      case Kind::Chain: return "chain " + std::to_string(count);
      case Kind::NatCap: return "natcap " + std::to_string(count);
      case Kind::Powerset: return "powerset {" + text::join(names, ",") + "}";
      case Kind::Product: {
        std::vector<std::string> s;
        for (const auto& p : parts) s.push_back(p.to_string());
        return "product [" + text::join(s, ", ") + "]";
      }
      case Kind::Dual: return "dual " + parts.at(0).to_string();
      case Kind::Table: {
        std::vector<std::string> s;
        for (const auto& [a, b] : leq) s.push_back("(" + a + "," + b + ")");
        return "table { elems: [" + text::join(names, ",") + "]; leq: [" + text::join(s, ",") + "] }";
      }
    }
    return {};
  }
};

/// An element is identified by its index inside one lattice handle; the
/// lattice id makes cross-lattice mixups detectable.
struct LatticeElement {
  std::uint64_t lattice = 0;
  std::uint32_t index = 0;

  friend bool operator==(const LatticeElement&, const LatticeElement&) = default;
  friend auto operator<=>(const LatticeElement&, const LatticeElement&) = default;
};

inline constexpr std::size_t kMaxLatticeSize = 1024;

/// Immutable finite lattice with precomputed meet/join tables. Copies share
/// the same universe.
class Lattice {
 public:
  Lattice() = default;

  std::uint64_t id() const { return d_->id; }
  std::size_t size() const { return d_->names.size(); }
  const std::string& description() const { return d_->description; }

  LatticeElement element(std::size_t index) const {
    if (index >= size()) throw Error(ErrorKind::ForeignElement, "index out of range");
    return {d_->id, static_cast<std::uint32_t>(index)};
  }

  LatticeElement element(std::string_view name) const {
    auto it = d_->by_name.find(std::string(name));
    if (it == d_->by_name.end())
      throw Error(ErrorKind::NotFound, "no element named '" + std::string(name) + "' in " + description());
    return {d_->id, it->second};
  }

  std::vector<LatticeElement> elements() const {
    std::vector<LatticeElement> out;
    out.reserve(size());
    for (std::size_t i = 0; i < size(); ++i) out.push_back({d_->id, static_cast<std::uint32_t>(i)});
    return out;
  }

  bool contains(LatticeElement x) const { return x.lattice == d_->id && x.index < size(); }

  std::size_t index_of(LatticeElement x) const {
    if (!contains(x)) throw Error(ErrorKind::ForeignElement, "element does not belong to " + description());
    return x.index;
  }

  const std::string& name(LatticeElement x) const { return d_->names[index_of(x)]; }

  LatticeElement bot() const { return {d_->id, d_->bot}; }
  LatticeElement top() const { return {d_->id, d_->top}; }

  bool leq(LatticeElement x, LatticeElement y) const {
    return leq_index(index_of(x), index_of(y));
  }
  LatticeElement meet(LatticeElement x, LatticeElement y) const {
    return {d_->id, meet_index(index_of(x), index_of(y))};
  }
  LatticeElement join(LatticeElement x, LatticeElement y) const {
    return {d_->id, join_index(index_of(x), index_of(y))};
  }

  LatticeElement meet_all(std::span<const LatticeElement> xs) const {
    LatticeElement acc = top();
    for (auto x : xs) acc = meet(acc, x);
    return acc;
  }
  LatticeElement join_all(std::span<const LatticeElement> xs) const {
    LatticeElement acc = bot();
    for (auto x : xs) acc = join(acc, x);
    return acc;
  }

  // Index-level access for hot loops that already validated membership.
  bool leq_index(std::size_t x, std::size_t y) const { return d_->leq[x * size() + y]; }
  std::uint32_t meet_index(std::size_t x, std::size_t y) const { return d_->meet[x * size() + y]; }
  std::uint32_t join_index(std::size_t x, std::size_t y) const { return d_->join[x * size() + y]; }
  std::uint32_t bot_index() const { return d_->bot; }
  std::uint32_t top_index() const { return d_->top; }

  friend bool operator==(const Lattice& a, const Lattice& b) { return a.d_ == b.d_; }

  /// Builds a lattice from an explicit order relation (`leq[i*n+j]` means
  /// element i is below element j). The relation must already be a partial
  /// order; missing bounds raise NotALattice naming the offending pair.
  static Lattice from_order(std::vector<std::string> names, std::vector<bool> leq, std::string description) {
    const std::size_t n = names.size();
    if (n == 0) throw Error(ErrorKind::EmptyUniverse, "lattice has no elements");
    if (n > kMaxLatticeSize)
      throw Error(ErrorKind::Unsupported, "lattice larger than " + std::to_string(kMaxLatticeSize) + " elements");
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j && leq[i * n + j] && leq[j * n + i])
          throw Error(ErrorKind::NotALattice, "order is not antisymmetric on (" + names[i] + "," + names[j] + ")");

    auto d = std::make_shared<Data>();
    d->id = next_id();
    d->description = std::move(description);
    d->leq = std::move(leq);
    d->meet.assign(n * n, 0);
    d->join.assign(n * n, 0);
    auto le = [&](std::size_t a, std::size_t b) { return static_cast<bool>(d->leq[a * n + b]); };

    // Joins first so that an unordered pair reports the missing join.
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i; j < n; ++j) {
        std::size_t best = n;
        for (std::size_t k = 0; k < n; ++k) {
          if (le(i, k) && le(j, k) && (best == n || le(k, best))) best = k;
        }
        bool least = best != n;
        for (std::size_t k = 0; least && k < n; ++k)
          if (le(i, k) && le(j, k) && !le(best, k)) least = false;
        if (!least)
          throw Error(ErrorKind::NotALattice, "pair (" + names[i] + "," + names[j] + ") has no join");
        d->join[i * n + j] = d->join[j * n + i] = static_cast<std::uint32_t>(best);
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i; j < n; ++j) {
        std::size_t best = n;
        for (std::size_t k = 0; k < n; ++k) {
          if (le(k, i) && le(k, j) && (best == n || le(best, k))) best = k;
        }
        bool greatest = best != n;
        for (std::size_t k = 0; greatest && k < n; ++k)
          if (le(k, i) && le(k, j) && !le(k, best)) greatest = false;
        if (!greatest)
          throw Error(ErrorKind::NotALattice, "pair (" + names[i] + "," + names[j] + ") has no meet");
        d->meet[i * n + j] = d->meet[j * n + i] = static_cast<std::uint32_t>(best);
      }
    }
    std::uint32_t bot = 0, top = 0;
    for (std::size_t i = 1; i < n; ++i) {
      bot = d->meet[bot * n + i];
      top = d->join[top * n + i];
    }
    d->bot = bot;
    d->top = top;
    for (std::size_t i = 0; i < n; ++i) {
      if (!d->by_name.emplace(names[i], static_cast<std::uint32_t>(i)).second)
        throw Error(ErrorKind::NotALattice, "duplicate element name '" + names[i] + "'");
    }
    d->names = std::move(names);
    Lattice out;
    out.d_ = std::move(d);
    return out;
  }

 private:
  struct Data {
    std::uint64_t id = 0;
    std::string description;
    std::vector<std::string> names;
    std::unordered_map<std::string, std::uint32_t> by_name;
    std::vector<bool> leq;
    std::vector<std::uint32_t> meet, join;
    std::uint32_t bot = 0, top = 0;
  };

  static std::uint64_t next_id() {
    static std::atomic<std::uint64_t> counter{1};
    return counter.fetch_add(1);
  }

  std::shared_ptr<const Data> d_;
};

namespace detail {

struct RawOrder {
  std::vector<std::string> names;
  std::vector<bool> leq;
};

inline RawOrder chain_order(std::vector<std::string> names) {
  const std::size_t n = names.size();
  RawOrder r{std::move(names), std::vector<bool>(n * n)};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) r.leq[i * n + j] = true;
  return r;
}

inline RawOrder raw_order(const LatticeSpec& spec) {
  using K = LatticeSpec::Kind;
  switch (spec.kind) {
    case K::Bool: return chain_order({"False", "True"});
    case K::Chain: {
      std::vector<std::string> names;
      for (std::size_t i = 0; i < spec.count; ++i) names.push_back(std::to_string(i));
      return chain_order(std::move(names));
    }
    case K::NatCap: {
      std::vector<std::string> names;
      for (std::size_t i = 0; i <= spec.count; ++i) names.push_back(std::to_string(i));
      names.push_back("inf");
      return chain_order(std::move(names));
    }
    case K::Powerset: {
      const std::size_t k = spec.names.size();
      if (k > 10) throw Error(ErrorKind::Unsupported, "powerset ground set too large");
      const std::size_t n = std::size_t{1} << k;
      RawOrder r{{}, std::vector<bool>(n * n)};
      for (std::size_t m = 0; m < n; ++m) {
        std::vector<std::string> members;
        for (std::size_t b = 0; b < k; ++b)
          if (m & (std::size_t{1} << b)) members.push_back(spec.names[b]);
        r.names.push_back("{" + text::join(members, ",") + "}");
        for (std::size_t m2 = 0; m2 < n; ++m2) r.leq[m * n + m2] = (m & m2) == m;
      }
      return r;
    }
    case K::Product: {
      if (spec.parts.empty()) throw Error(ErrorKind::EmptyUniverse, "product of no factors");
      std::vector<RawOrder> fs;
      std::size_t n = 1;
      for (const auto& p : spec.parts) {
        fs.push_back(raw_order(p));
        n *= fs.back().names.size();
        if (n > kMaxLatticeSize) throw Error(ErrorKind::Unsupported, "product lattice too large");
      }
      // Lexicographic tuples: the last factor varies fastest.
      auto digits = [&](std::size_t idx) {
        std::vector<std::size_t> ds(fs.size());
        for (std::size_t f = fs.size(); f-- > 0;) {
          ds[f] = idx % fs[f].names.size();
          idx /= fs[f].names.size();
        }
        return ds;
      };
      RawOrder r{{}, std::vector<bool>(n * n)};
      std::vector<std::vector<std::size_t>> all;
      for (std::size_t i = 0; i < n; ++i) {
        all.push_back(digits(i));
        std::vector<std::string> parts;
        for (std::size_t f = 0; f < fs.size(); ++f) parts.push_back(fs[f].names[all.back()[f]]);
        r.names.push_back("(" + text::join(parts, ",") + ")");
      }
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          bool le = true;
          for (std::size_t f = 0; le && f < fs.size(); ++f) {
            const std::size_t m = fs[f].names.size();
            le = fs[f].leq[all[i][f] * m + all[j][f]];
          }
          r.leq[i * n + j] = le;
        }
      return r;
    }
    case K::Dual: {
      RawOrder base = raw_order(spec.parts.at(0));
      const std::size_t n = base.names.size();
      std::vector<bool> flipped(n * n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) flipped[i * n + j] = base.leq[j * n + i];
      base.leq = std::move(flipped);
      return base;
    }
    case K::Table: {
      const std::size_t n = spec.names.size();
      std::unordered_map<std::string, std::size_t> idx;
      for (std::size_t i = 0; i < n; ++i) idx[spec.names[i]] = i;
      RawOrder r{spec.names, std::vector<bool>(n * n)};
      for (std::size_t i = 0; i < n; ++i) r.leq[i * n + i] = true;
      for (const auto& [a, b] : spec.leq) {
        auto ia = idx.find(a), ib = idx.find(b);
        if (ia == idx.end() || ib == idx.end())
          throw Error(ErrorKind::NotALattice, "order pair (" + a + "," + b + ") names an unknown element");
        r.leq[ia->second * n + ib->second] = true;
      }
      // Reflexive-transitive closure (Warshall).
      for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
          if (r.leq[i * n + k])
            for (std::size_t j = 0; j < n; ++j)
              if (r.leq[k * n + j]) r.leq[i * n + j] = true;
      return r;
    }
  }
  throw Error(ErrorKind::Unsupported, "unknown lattice kind");
}

}  // namespace detail

inline Lattice make_lattice(const LatticeSpec& spec) {
  auto raw = detail::raw_order(spec);
  return Lattice::from_order(std::move(raw.names), std::move(raw.leq), spec.to_string());
}

namespace detail {

inline std::vector<std::string> name_list(text::Cursor& in, char close) {
  std::vector<std::string> out;
  if (in.peek() == close) return out;
  do {
    out.push_back(in.word());
  } while (in.accept(","));
  return out;
}

inline LatticeSpec parse_lattice_spec(text::Cursor& in) {
  if (in.accept_keyword("bool")) return LatticeSpec::boolean();
  if (in.accept_keyword("chain")) {
    auto n = in.number();
    if (n == 0) in.fail("chain length must be positive");
    return LatticeSpec::chain(n);
  }
  if (in.accept_keyword("natcap")) return LatticeSpec::natcap(in.number());
  if (in.accept_keyword("powerset")) {
    in.expect("{");
    auto names = name_list(in, '}');
    in.expect("}");
    return LatticeSpec::powerset(std::move(names));
  }
  if (in.accept_keyword("product")) {
    in.expect("[");
    std::vector<LatticeSpec> parts;
    do {
      parts.push_back(parse_lattice_spec(in));
    } while (in.accept(","));
    in.expect("]");
    return LatticeSpec::product(std::move(parts));
  }
  if (in.accept_keyword("dual")) return LatticeSpec::dual(parse_lattice_spec(in));
  if (in.accept_keyword("table")) {
    in.expect("{");
    in.accept_keyword("elems");
    in.expect(":");
    in.expect("[");
    auto elems = name_list(in, ']');
    in.expect("]");
    in.expect(";");
    std::vector<std::pair<std::string, std::string>> order;
    if (in.accept_keyword("leq")) {
      in.expect(":");
      in.expect("[");
      if (in.peek() != ']') {
        do {
          in.expect("(");
          auto a = in.word();
          in.expect(",");
          auto b = in.word();
          in.expect(")");
          order.emplace_back(std::move(a), std::move(b));
        } while (in.accept(","));
      }
      in.expect("]");
      in.accept(";");
    }
    in.expect("}");
    return LatticeSpec::table(std::move(elems), std::move(order));
  }
  in.fail("expected lattice kind");
}

}  // namespace detail

inline LatticeSpec parse_lattice_spec(std::string_view src) {
  text::Cursor in(src);
  auto spec = detail::parse_lattice_spec(in);
  if (!in.at_end()) in.fail("trailing input after lattice spec");
  return spec;
}

struct LawViolation {
  std::string law;
  std::string detail;
};

/// Exhaustive check of the lattice laws over the whole universe.
inline std::vector<LawViolation> check_lattice_laws(const Lattice& L) {
  std::vector<LawViolation> out;
  auto els = L.elements();
  auto nm = [&](LatticeElement x) { return L.name(x); };
  auto report = [&](std::string law, std::string detail) { out.push_back({std::move(law), std::move(detail)}); };
  for (auto x : els) {
    if (L.meet(x, x) != x) report("meet-idempotence", nm(x));
    if (L.join(x, x) != x) report("join-idempotence", nm(x));
    if (!L.leq(L.bot(), x) || !L.leq(x, L.top())) report("bounds", nm(x));
    for (auto y : els) {
      const std::string pair = "(" + nm(x) + "," + nm(y) + ")";
      if (L.meet(x, y) != L.meet(y, x)) report("meet-commutativity", pair);
      if (L.join(x, y) != L.join(y, x)) report("join-commutativity", pair);
      if (L.meet(x, L.join(x, y)) != x) report("absorption-meet", pair);
      if (L.join(x, L.meet(x, y)) != x) report("absorption-join", pair);
      if (L.leq(x, y) != (L.meet(x, y) == x)) report("order-meet-consistency", pair);
      if (L.leq(x, y) != (L.join(x, y) == y)) report("order-join-consistency", pair);
      if (L.leq(x, y) && L.leq(y, x) && x != y) report("antisymmetry", pair);
      auto m = L.meet(x, y), j = L.join(x, y);
      if (!L.leq(m, x) || !L.leq(m, y)) report("meet-lower-bound", pair);
      if (!L.leq(x, j) || !L.leq(y, j)) report("join-upper-bound", pair);
      for (auto z : els) {
        if (L.meet(L.meet(x, y), z) != L.meet(x, L.meet(y, z)))
          report("meet-associativity", pair + "," + nm(z));
        if (L.join(L.join(x, y), z) != L.join(x, L.join(y, z)))
          report("join-associativity", pair + "," + nm(z));
        if (L.leq(x, y) && L.leq(y, z) && !L.leq(x, z)) report("transitivity", pair + "," + nm(z));
        if (L.leq(z, x) && L.leq(z, y) && !L.leq(z, m)) report("meet-greatest", pair + "," + nm(z));
        if (L.leq(x, z) && L.leq(y, z) && !L.leq(j, z)) report("join-least", pair + "," + nm(z));
      }
    }
    if (!L.leq(x, x)) report("reflexivity", nm(x));
  }
  return out;
}

}  // namespace pelw

#endif
