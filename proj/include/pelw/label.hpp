#ifndef PELW_LABEL_HPP
#define PELW_LABEL_HPP

#include <algorithm>
#include <compare>
#include <initializer_list>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "pelw/error.hpp"

namespace pelw {

/// Reserved spelling of the internal action.
inline const std::string kTau = "tau";

/// Finite multiset of action names; the empty label is the idle step.
class Label {
 public:
  Label() = default;
  Label(std::initializer_list<std::string> names) {
    for (const auto& n : names) add(n);
  }
  static Label of(const std::vector<std::string>& names) {
    Label l;
    for (const auto& n : names) l.add(n);
    return l;
  }

  void add(const std::string& name, unsigned count = 1) {
    if (count) counts_[name] += count;
  }

  unsigned count(const std::string& name) const {
    auto it = counts_.find(name);
    return it == counts_.end() ? 0 : it->second;
  }

  bool empty() const { return counts_.empty(); }
  std::size_t size() const {
    std::size_t s = 0;
    for (const auto& [_, c] : counts_) s += c;
    return s;
  }
  const std::map<std::string, unsigned>& counts() const { return counts_; }

  bool is_singleton(const std::string& name) const { return counts_.size() == 1 && count(name) == 1; }

  /// Non-empty and made only of tau occurrences.
  bool is_internal() const { return !empty() && counts_.size() == 1 && counts_.begin()->first == kTau; }

  /// Multiset union A ⊎ B.
  Label operator+(const Label& other) const {
    Label r = *this;
    for (const auto& [n, c] : other.counts_) r.add(n, c);
    return r;
  }

  /// Multiset difference; counts saturate at zero.
  Label operator-(const Label& other) const {
    Label r;
    for (const auto& [n, c] : counts_) {
      unsigned o = other.count(n);
      if (c > o) r.add(n, c - o);
    }
    return r;
  }

  /// Restriction of the multiset to names in `names`.
  Label project(const std::set<std::string>& names) const {
    Label r;
    for (const auto& [n, c] : counts_)
      if (names.count(n)) r.add(n, c);
    return r;
  }

  /// A(tau/a) for every a in `names`.
  Label hide(const std::set<std::string>& names) const {
    Label r;
    for (const auto& [n, c] : counts_) r.add(names.count(n) ? kTau : n, c);
    return r;
  }

  Label without_tau() const {
    Label r = *this;
    r.counts_.erase(kTau);
    return r;
  }

  std::string to_string() const {
    std::string s = "{";
    bool first = true;
    for (const auto& [n, c] : counts_)
      for (unsigned i = 0; i < c; ++i) {
        if (!first) s += ",";
        s += n;
        first = false;
      }
    return s + "}";
  }

  friend bool operator==(const Label&, const Label&) = default;
  friend bool operator<(const Label& a, const Label& b) { return a.counts_ < b.counts_; }

 private:
  std::map<std::string, unsigned> counts_;
};

/// Synchronising combination of several concurrent labels over the set L.
/// All L-projections must agree; the shared projection is kept once.
inline Label label_sync_all(std::span<const Label> parts, const std::set<std::string>& sync) {
  if (parts.empty()) return {};
  const Label shared = parts[0].project(sync);
  Label sum;
  for (const auto& p : parts) {
    if (p.project(sync) != shared)
      throw Error(ErrorKind::SyncMismatch, "labels " + parts[0].to_string() + " and " + p.to_string() +
                                               " disagree on synchronised actions");
    sum = sum + p;
  }
  for (std::size_t i = 1; i < parts.size(); ++i) sum = sum - shared;
  return sum;
}

/// (A ⊎ B) − L under the side condition A∩L = B∩L, keeping one occurrence
/// of each synchronised action.
inline Label label_sync(const Label& a, const Label& b, const std::set<std::string>& sync) {
  const Label both[] = {a, b};
  return label_sync_all(both, sync);
}

}  // namespace pelw

#endif
