#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bitset.hpp"
#include "detail/lexer.hpp"
#include "error.hpp"

namespace tela {

/// Positive Boolean formula over Inf/Fin atoms.
///
/// Atoms range over sets of marks: Inf(S) is the disjunction of Inf(j) for j in S,
/// Fin(S) the conjunction of Fin(j). The factory functions normalize:
/// nested And/Or nodes are flattened, singleton nodes collapse, all Inf atoms
/// directly under an Or are merged into one atom (likewise Fin under And),
/// Inf(empty) is False and Fin(empty) is True. Nothing else is simplified.
class AcceptanceFormula {
 public:
  enum class Kind { True, False, Inf, Fin, And, Or };

  AcceptanceFormula() : kind_(Kind::True) {}

  static AcceptanceFormula t() { return AcceptanceFormula(Kind::True); }
  static AcceptanceFormula f() { return AcceptanceFormula(Kind::False); }

  static AcceptanceFormula inf(MarkSet s) {
    if (s.empty()) return f();
    AcceptanceFormula r(Kind::Inf);
    r.marks_ = std::move(s);
    return r;
  }
  static AcceptanceFormula fin(MarkSet s) {
    if (s.empty()) return t();
    AcceptanceFormula r(Kind::Fin);
    r.marks_ = std::move(s);
    return r;
  }
  static AcceptanceFormula inf(unsigned m) { return inf(MarkSet::single(m)); }
  static AcceptanceFormula fin(unsigned m) { return fin(MarkSet::single(m)); }

  static AcceptanceFormula make_and(std::vector<AcceptanceFormula> parts) { return junction(Kind::And, std::move(parts)); }
  static AcceptanceFormula make_or(std::vector<AcceptanceFormula> parts) { return junction(Kind::Or, std::move(parts)); }

  friend AcceptanceFormula operator&(AcceptanceFormula a, AcceptanceFormula b) {
    return make_and({std::move(a), std::move(b)});
  }
  friend AcceptanceFormula operator|(AcceptanceFormula a, AcceptanceFormula b) {
    return make_or({std::move(a), std::move(b)});
  }

  Kind kind() const { return kind_; }
  bool is_true() const { return kind_ == Kind::True; }
  bool is_false() const { return kind_ == Kind::False; }
  const MarkSet& marks() const { return marks_; }
  const std::vector<AcceptanceFormula>& children() const { return children_; }

  MarkSet used_marks() const {
    MarkSet r = marks_;
    for (const auto& c : children_) r |= c.used_marks();
    return r;
  }

  bool has_fin() const {
    if (kind_ == Kind::Fin) return true;
    return std::any_of(children_.begin(), children_.end(), [](const auto& c) { return c.has_fin(); });
  }

  friend bool operator==(const AcceptanceFormula&, const AcceptanceFormula&) = default;

 private:
  explicit AcceptanceFormula(Kind k) : kind_(k) {}

  static AcceptanceFormula junction(Kind k, std::vector<AcceptanceFormula> parts) {
    const Kind merged = k == Kind::Or ? Kind::Inf : Kind::Fin;
    std::vector<AcceptanceFormula> flat;
    std::size_t merged_at = SIZE_MAX;
    for (auto& p : parts) {
      std::vector<AcceptanceFormula> sub;
      if (p.kind_ == k)
        sub = std::move(p.children_);
      else
        sub.push_back(std::move(p));
      for (auto& s : sub) {
        if (s.kind_ == merged) {
          if (merged_at == SIZE_MAX) {
            merged_at = flat.size();
            flat.push_back(std::move(s));
          } else {
            flat[merged_at].marks_ |= s.marks_;
          }
        } else {
          flat.push_back(std::move(s));
        }
      }
    }
    if (flat.empty()) return k == Kind::And ? t() : f();
    if (flat.size() == 1) return std::move(flat.front());
    AcceptanceFormula r(k);
    r.children_ = std::move(flat);
    return r;
  }

  Kind kind_;
  MarkSet marks_;
  std::vector<AcceptanceFormula> children_;
};

using Acc = AcceptanceFormula;

inline bool evaluate(const MarkSet& seen, const Acc& phi) {
  switch (phi.kind()) {
    case Acc::Kind::True: return true;
    case Acc::Kind::False: return false;
    case Acc::Kind::Inf: return seen.intersects(phi.marks());
    case Acc::Kind::Fin: return !seen.intersects(phi.marks());
    case Acc::Kind::And:
      for (const auto& c : phi.children())
        if (!evaluate(seen, c)) return false;
      return true;
    case Acc::Kind::Or:
      for (const auto& c : phi.children())
        if (evaluate(seen, c)) return true;
      return false;
  }
  return false;
}

/// Number of atoms with multiplicity; a markset atom counts as its expansion.
inline std::size_t length(const Acc& phi) {
  switch (phi.kind()) {
    case Acc::Kind::True:
    case Acc::Kind::False: return 1;
    case Acc::Kind::Inf:
    case Acc::Kind::Fin: return phi.marks().count();
    default: {
      std::size_t n = 0;
      for (const auto& c : phi.children()) n += length(c);
      return n;
    }
  }
}

inline Acc negate(const Acc& phi) {
  switch (phi.kind()) {
    case Acc::Kind::True: return Acc::f();
    case Acc::Kind::False: return Acc::t();
    case Acc::Kind::Inf: return Acc::fin(phi.marks());
    case Acc::Kind::Fin: return Acc::inf(phi.marks());
    case Acc::Kind::And:
    case Acc::Kind::Or: {
      std::vector<Acc> parts;
      for (const auto& c : phi.children()) parts.push_back(negate(c));
      return phi.kind() == Acc::Kind::And ? Acc::make_or(std::move(parts)) : Acc::make_and(std::move(parts));
    }
  }
  return phi;
}

inline constexpr unsigned kEquivalenceMarkCap = 24;

inline MarkSet markset_from_mask(std::uint64_t mask) {
  MarkSet s;
  while (mask) {
    s.set(static_cast<unsigned>(__builtin_ctzll(mask)));
    mask &= mask - 1;
  }
  return s;
}

/// Agreement of both formulas on every subset of {0, ..., nmarks-1}.
inline bool equivalent(const Acc& a, const Acc& b, unsigned nmarks) {
  if (nmarks > kEquivalenceMarkCap) throw PreconditionError("equivalent: too many marks for exhaustive check");
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << nmarks); ++m) {
    MarkSet seen = markset_from_mask(m);
    if (evaluate(seen, a) != evaluate(seen, b)) return false;
  }
  return true;
}

/// Constant folding: removes True/False children and collapses dominated nodes.
inline Acc fold_constants(const Acc& phi) {
  if (phi.kind() != Acc::Kind::And && phi.kind() != Acc::Kind::Or) return phi;
  const bool is_and = phi.kind() == Acc::Kind::And;
  std::vector<Acc> parts;
  for (const auto& c : phi.children()) {
    Acc s = fold_constants(c);
    if (s.is_true()) {
      if (!is_and) return Acc::t();
      continue;
    }
    if (s.is_false()) {
      if (is_and) return Acc::f();
      continue;
    }
    parts.push_back(std::move(s));
  }
  return is_and ? Acc::make_and(std::move(parts)) : Acc::make_or(std::move(parts));
}

/// Every mark index m replaced by map(m).
template <class F>
Acc map_marks(const Acc& phi, F&& map) {
  switch (phi.kind()) {
    case Acc::Kind::Inf:
    case Acc::Kind::Fin: {
      MarkSet s;
      phi.marks().for_each([&](unsigned m) { s.set(map(m)); });
      return phi.kind() == Acc::Kind::Inf ? Acc::inf(s) : Acc::fin(s);
    }
    case Acc::Kind::And:
    case Acc::Kind::Or: {
      std::vector<Acc> parts;
      for (const auto& c : phi.children()) parts.push_back(map_marks(c, map));
      return phi.kind() == Acc::Kind::And ? Acc::make_and(std::move(parts)) : Acc::make_or(std::move(parts));
    }
    default: return phi;
  }
}

inline Acc shift_marks(const Acc& phi, unsigned offset) {
  return map_marks(phi, [offset](unsigned m) { return m + offset; });
}

// ---------------------------------------------------------------------------
// Generalized Rabin normal form

struct DnfDisjunct {
  MarkSet fin;
  std::vector<MarkSet> infs;

  friend bool operator==(const DnfDisjunct&, const DnfDisjunct&) = default;
};

/// Disjunction of Fin(fin_i) & Inf(S_i1) & ... & Inf(S_ik). No disjuncts means False.
struct DnfAcceptance {
  std::vector<DnfDisjunct> disjuncts;

  std::size_t size() const { return disjuncts.size(); }

  std::size_t max_k() const {
    std::size_t k = 0;
    for (const auto& d : disjuncts) k = std::max(k, d.infs.size());
    return k;
  }

  Acc disjunct_formula(std::size_t i) const {
    const auto& d = disjuncts[i];
    std::vector<Acc> parts;
    if (!d.fin.empty()) parts.push_back(Acc::fin(d.fin));
    for (const auto& s : d.infs) parts.push_back(Acc::inf(s));
    return Acc::make_and(std::move(parts));
  }

  Acc to_formula() const {
    std::vector<Acc> parts;
    for (std::size_t i = 0; i < disjuncts.size(); ++i) parts.push_back(disjunct_formula(i));
    return Acc::make_or(std::move(parts));
  }

  std::size_t length() const {
    if (disjuncts.empty()) return 1;
    std::size_t n = 0;
    for (const auto& d : disjuncts) {
      n += d.fin.count();
      for (const auto& s : d.infs) n += s.count();
    }
    return n;
  }

  MarkSet used_marks() const {
    MarkSet r;
    for (const auto& d : disjuncts) {
      r |= d.fin;
      for (const auto& s : d.infs) r |= s;
    }
    return r;
  }

  friend bool operator==(const DnfAcceptance&, const DnfAcceptance&) = default;
};

inline constexpr std::size_t kNormalFormCap = std::size_t{1} << 22;

namespace detail {

inline std::vector<DnfDisjunct> raw_dnf(const Acc& phi) {
  switch (phi.kind()) {
    case Acc::Kind::True: return {DnfDisjunct{}};
    case Acc::Kind::False: return {};
    case Acc::Kind::Inf: return {DnfDisjunct{MarkSet{}, {phi.marks()}}};
    case Acc::Kind::Fin: return {DnfDisjunct{phi.marks(), {}}};
    case Acc::Kind::Or: {
      std::vector<DnfDisjunct> out;
      for (const auto& c : phi.children()) {
        auto sub = raw_dnf(c);
        out.insert(out.end(), std::make_move_iterator(sub.begin()), std::make_move_iterator(sub.end()));
        if (out.size() > kNormalFormCap) throw std::length_error("DNF too large");
      }
      return out;
    }
    case Acc::Kind::And: {
      std::vector<DnfDisjunct> acc{DnfDisjunct{}};
      for (const auto& c : phi.children()) {
        auto sub = raw_dnf(c);
        if (acc.size() * sub.size() > kNormalFormCap) throw std::length_error("DNF too large");
        std::vector<DnfDisjunct> next;
        next.reserve(acc.size() * sub.size());
        for (const auto& l : acc)
          for (const auto& r : sub) {
            DnfDisjunct d = l;
            d.fin |= r.fin;
            d.infs.insert(d.infs.end(), r.infs.begin(), r.infs.end());
            next.push_back(std::move(d));
          }
        acc = std::move(next);
      }
      return acc;
    }
  }
  return {};
}

}  // namespace detail

/// True iff some DNF disjunct of phi carries no Inf atom, so to_dnf needs an
/// all-transition mark.
inline bool dnf_needs_all_mark(const Acc& phi) {
  for (const auto& d : detail::raw_dnf(phi))
    if (d.infs.empty()) return true;
  return false;
}

/// DNF of phi. Disjuncts lacking an Inf atom get Inf({all_mark}); the caller
/// guarantees that mark sits on every transition. Unsatisfiable disjuncts
/// (an Inf set inside the Fin set) and duplicates are dropped.
inline DnfAcceptance to_dnf(const Acc& phi, unsigned all_mark) {
  DnfAcceptance out;
  for (auto& d : detail::raw_dnf(phi)) {
    DnfDisjunct clean;
    clean.fin = d.fin;
    bool sat = true;
    for (auto& s : d.infs) {
      if (s.subset_of(d.fin)) {
        sat = false;
        break;
      }
      if (std::find(clean.infs.begin(), clean.infs.end(), s) == clean.infs.end()) clean.infs.push_back(s);
    }
    if (!sat) continue;
    if (clean.infs.empty()) clean.infs.push_back(MarkSet::single(all_mark));
    if (std::find(out.disjuncts.begin(), out.disjuncts.end(), clean) == out.disjuncts.end())
      out.disjuncts.push_back(std::move(clean));
  }
  return out;
}

/// Recognizes a formula already in generalized Rabin shape (every disjunct has
/// at most one Fin atom and at least one Inf atom). Returns nullopt otherwise.
inline std::optional<DnfAcceptance> match_dnf(const Acc& phi) {
  auto match_disjunct = [](const Acc& d) -> std::optional<DnfDisjunct> {
    DnfDisjunct r;
    if (d.kind() == Acc::Kind::Inf) {
      r.infs.push_back(d.marks());
      return r;
    }
    if (d.kind() != Acc::Kind::And) return std::nullopt;
    for (const auto& c : d.children()) {
      if (c.kind() == Acc::Kind::Inf)
        r.infs.push_back(c.marks());
      else if (c.kind() == Acc::Kind::Fin)
        r.fin |= c.marks();
      else
        return std::nullopt;
    }
    if (r.infs.empty()) return std::nullopt;
    return r;
  };
  DnfAcceptance out;
  if (phi.is_false()) return out;
  if (phi.kind() == Acc::Kind::Or) {
    for (const auto& c : phi.children()) {
      auto d = match_disjunct(c);
      if (!d) return std::nullopt;
      out.disjuncts.push_back(std::move(*d));
    }
    return out;
  }
  auto d = match_disjunct(phi);
  if (!d) return std::nullopt;
  out.disjuncts.push_back(std::move(*d));
  return out;
}

/// CNF of a Fin-free formula as the list S_1..S_K with phi == Inf(S_1) & ... & Inf(S_K).
/// True yields the empty list, False a list holding the empty set.
inline std::vector<MarkSet> finless_to_gba(const Acc& phi) {
  if (phi.has_fin()) throw PreconditionError("finless_to_gba: formula contains Fin");
  auto dedupe = [](std::vector<MarkSet> v) {
    std::vector<MarkSet> out;
    for (auto& s : v)
      if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(std::move(s));
    return out;
  };
  switch (phi.kind()) {
    case Acc::Kind::True: return {};
    case Acc::Kind::False: return {MarkSet{}};
    case Acc::Kind::Inf: return {phi.marks()};
    case Acc::Kind::And: {
      std::vector<MarkSet> out;
      for (const auto& c : phi.children()) {
        auto sub = finless_to_gba(c);
        out.insert(out.end(), sub.begin(), sub.end());
      }
      return dedupe(std::move(out));
    }
    case Acc::Kind::Or: {
      std::vector<MarkSet> acc{MarkSet{}};
      for (const auto& c : phi.children()) {
        auto sub = finless_to_gba(c);
        if (sub.empty()) return {};
        if (acc.size() * sub.size() > kNormalFormCap) throw std::length_error("CNF too large");
        std::vector<MarkSet> next;
        for (const auto& l : acc)
          for (const auto& r : sub) next.push_back(l | r);
        acc = dedupe(std::move(next));
      }
      return acc;
    }
    default: break;
  }
  return {};
}

/// The Inf sets of a formula already of the form Inf(S_1) & ... & Inf(S_K).
inline std::optional<std::vector<MarkSet>> as_gba(const Acc& phi) {
  switch (phi.kind()) {
    case Acc::Kind::True: return std::vector<MarkSet>{};
    case Acc::Kind::False: return std::vector<MarkSet>{MarkSet{}};
    case Acc::Kind::Inf: return std::vector<MarkSet>{phi.marks()};
    case Acc::Kind::And: {
      std::vector<MarkSet> out;
      for (const auto& c : phi.children()) {
        if (c.kind() != Acc::Kind::Inf) return std::nullopt;
        out.push_back(c.marks());
      }
      return out;
    }
    default: return std::nullopt;
  }
}

inline Acc gba_formula(const std::vector<MarkSet>& sets) {
  std::vector<Acc> parts;
  for (const auto& s : sets) parts.push_back(Acc::inf(s));
  return Acc::make_and(std::move(parts));
}

// ---------------------------------------------------------------------------
// HOA `Acceptance:` syntax

namespace detail {

enum class Ctx { Top, And, Or };

inline void print_acc(const Acc& phi, Ctx ctx, std::string& out) {
  auto atoms = [&](const char* name, const MarkSet& s, const char* sep, bool paren) {
    bool multi = s.count() > 1;
    if (multi && paren) out += '(';
    bool first = true;
    s.for_each([&](unsigned m) {
      if (!first) out += sep;
      first = false;
      out += name;
      out += '(' + std::to_string(m) + ')';
    });
    if (multi && paren) out += ')';
  };
  switch (phi.kind()) {
    case Acc::Kind::True: out += 't'; break;
    case Acc::Kind::False: out += 'f'; break;
    case Acc::Kind::Inf: atoms("Inf", phi.marks(), " | ", ctx == Ctx::And); break;
    case Acc::Kind::Fin: atoms("Fin", phi.marks(), " & ", ctx == Ctx::Or); break;
    case Acc::Kind::And:
    case Acc::Kind::Or: {
      const bool is_and = phi.kind() == Acc::Kind::And;
      const bool paren = ctx != Ctx::Top;
      if (paren) out += '(';
      bool first = true;
      for (const auto& c : phi.children()) {
        if (!first) out += is_and ? " & " : " | ";
        first = false;
        print_acc(c, is_and ? Ctx::And : Ctx::Or, out);
      }
      if (paren) out += ')';
      break;
    }
  }
}

inline Acc parse_acc_or(Lexer& lx);

inline Acc parse_acc_atom(Lexer& lx) {
  const Token& t = lx.peek();
  if (t.kind == Tok::Punct && t.text == "(") {
    lx.next();
    Acc r = parse_acc_or(lx);
    lx.expect_punct(')');
    return r;
  }
  if (t.kind != Tok::Ident) lx.fail("expected acceptance atom");
  std::string name = t.text;
  if (name == "t") {
    lx.next();
    return Acc::t();
  }
  if (name == "f") {
    lx.next();
    return Acc::f();
  }
  if (name != "Inf" && name != "Fin") lx.fail("unknown acceptance atom '" + name + "'");
  lx.next();
  lx.expect_punct('(');
  if (lx.is_punct('!')) lx.fail("complemented acceptance sets are not supported");
  unsigned m = lx.expect_uint();
  lx.expect_punct(')');
  return name == "Inf" ? Acc::inf(m) : Acc::fin(m);
}

inline Acc parse_acc_and(Lexer& lx) {
  std::vector<Acc> parts{parse_acc_atom(lx)};
  while (lx.is_punct('&')) {
    lx.next();
    parts.push_back(parse_acc_atom(lx));
  }
  return Acc::make_and(std::move(parts));
}

inline Acc parse_acc_or(Lexer& lx) {
  std::vector<Acc> parts{parse_acc_and(lx)};
  while (lx.is_punct('|')) {
    lx.next();
    parts.push_back(parse_acc_and(lx));
  }
  return Acc::make_or(std::move(parts));
}

}  // namespace detail

inline std::string to_string(const Acc& phi) {
  std::string out;
  detail::print_acc(phi, detail::Ctx::Top, out);
  return out;
}

inline Acc parse_acceptance(std::string_view text) {
  detail::Lexer lx(text);
  Acc r = detail::parse_acc_or(lx);
  if (lx.peek().kind != detail::Tok::Eof) lx.fail("trailing input after acceptance formula");
  return r;
}

}  // namespace tela
