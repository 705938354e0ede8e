#pragma once

#include <bit>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <vector>

#include <boost/container/small_vector.hpp>

namespace tela {

/// Dynamic set of small non-negative integers, stored as 64-bit words.
///
/// The word vector is kept trimmed (no trailing zero words), so two sets are
/// equal iff their word vectors are equal. Sets of indices below 64 never
/// allocate.
class BitSet {
 public:
  BitSet() = default;
  BitSet(std::initializer_list<unsigned> elements) {
    for (unsigned e : elements) set(e);
  }

  static BitSet single(unsigned e) {
    BitSet s;
    s.set(e);
    return s;
  }

  /// The set {0, ..., n-1}.
  static BitSet range(unsigned n) {
    BitSet s;
    s.words_.assign(n / 64, ~std::uint64_t{0});
    if (n % 64) s.words_.push_back((std::uint64_t{1} << (n % 64)) - 1);
    return s;
  }

  bool test(unsigned e) const {
    std::size_t w = e / 64;
    return w < words_.size() && ((words_[w] >> (e % 64)) & 1U);
  }

  void set(unsigned e) {
    std::size_t w = e / 64;
    if (w >= words_.size()) words_.resize(w + 1, 0);
    words_[w] |= std::uint64_t{1} << (e % 64);
  }

  void reset(unsigned e) {
    std::size_t w = e / 64;
    if (w >= words_.size()) return;
    words_[w] &= ~(std::uint64_t{1} << (e % 64));
    trim();
  }

  bool empty() const { return words_.empty(); }

  std::size_t count() const {
    std::size_t c = 0;
    for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
  }

  /// One past the largest element, 0 when empty.
  unsigned bound() const {
    if (words_.empty()) return 0;
    auto top = words_.back();
    return static_cast<unsigned>((words_.size() - 1) * 64 + 64 - std::countl_zero(top));
  }

  bool intersects(const BitSet& o) const {
    std::size_t n = std::min(words_.size(), o.words_.size());
    for (std::size_t i = 0; i < n; ++i)
      if (words_[i] & o.words_[i]) return true;
    return false;
  }

  bool subset_of(const BitSet& o) const {
    if (words_.size() > o.words_.size()) return false;
    for (std::size_t i = 0; i < words_.size(); ++i)
      if (words_[i] & ~o.words_[i]) return false;
    return true;
  }

  BitSet& operator|=(const BitSet& o) {
    if (o.words_.size() > words_.size()) words_.resize(o.words_.size(), 0);
    for (std::size_t i = 0; i < o.words_.size(); ++i) words_[i] |= o.words_[i];
    return *this;
  }

  BitSet& operator&=(const BitSet& o) {
    if (words_.size() > o.words_.size()) words_.resize(o.words_.size());
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= o.words_[i];
    trim();
    return *this;
  }

  /// Set difference.
  BitSet& operator-=(const BitSet& o) {
    std::size_t n = std::min(words_.size(), o.words_.size());
    for (std::size_t i = 0; i < n; ++i) words_[i] &= ~o.words_[i];
    trim();
    return *this;
  }

  friend BitSet operator|(BitSet a, const BitSet& b) { return a |= b; }
  friend BitSet operator&(BitSet a, const BitSet& b) { return a &= b; }
  friend BitSet operator-(BitSet a, const BitSet& b) { return a -= b; }

  /// Every element increased by `offset`.
  BitSet shifted(unsigned offset) const {
    BitSet r;
    for_each([&](unsigned e) { r.set(e + offset); });
    return r;
  }

  template <class F>
  void for_each(F&& f) const {
    for (std::size_t w = 0; w < words_.size(); ++w) {
      auto bits = words_[w];
      while (bits) {
        unsigned b = static_cast<unsigned>(std::countr_zero(bits));
        f(static_cast<unsigned>(w * 64 + b));
        bits &= bits - 1;
      }
    }
  }

  std::vector<unsigned> elements() const {
    std::vector<unsigned> out;
    out.reserve(count());
    for_each([&](unsigned e) { out.push_back(e); });
    return out;
  }

  /// Smallest element; undefined on the empty set.
  unsigned front() const {
    for (std::size_t w = 0; w < words_.size(); ++w)
      if (words_[w]) return static_cast<unsigned>(w * 64 + std::countr_zero(words_[w]));
    return 0;
  }

  friend bool operator==(const BitSet& a, const BitSet& b) { return a.words_ == b.words_; }

  /// Lexicographic order on the ascending element sequences.
  friend std::strong_ordering operator<=>(const BitSet& a, const BitSet& b) {
    std::size_t n = std::max(a.words_.size(), b.words_.size());
    for (std::size_t i = 0; i < n; ++i) {
      auto wa = i < a.words_.size() ? a.words_[i] : 0;
      auto wb = i < b.words_.size() ? b.words_[i] : 0;
      auto diff = wa ^ wb;
      if (!diff) continue;
      unsigned p = static_cast<unsigned>(i * 64 + std::countr_zero(diff));
      bool a_has = a.test(p);
      const BitSet& without = a_has ? b : a;
      // The set lacking p is a prefix of the other iff it has nothing above p.
      bool without_continues = without.bound() > p;
      if (a_has) return without_continues ? std::strong_ordering::less : std::strong_ordering::greater;
      return without_continues ? std::strong_ordering::greater : std::strong_ordering::less;
    }
    return std::strong_ordering::equal;
  }

  std::size_t hash() const {
    std::size_t h = 0x9e3779b97f4a7c15ULL;
    for (auto w : words_) h ^= std::hash<std::uint64_t>{}(w) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
  }

 private:
  void trim() {
    while (!words_.empty() && words_.back() == 0) words_.pop_back();
  }

  boost::container::small_vector<std::uint64_t, 1> words_;
};

/// Acceptance marks seen on a transition or a set of transitions.
using MarkSet = BitSet;
/// Sets of automaton states (subset and breakpoint constructions, Safra labels).
using StateSet = BitSet;

struct BitSetHash {
  std::size_t operator()(const BitSet& s) const { return s.hash(); }
};

}  // namespace tela
