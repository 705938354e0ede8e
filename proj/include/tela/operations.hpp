#pragma once

#include <cstdint>
#include <deque>
#include <unordered_map>
#include <vector>

#include "acceptance.hpp"
#include "automaton.hpp"
#include "budget.hpp"

namespace tela {

/// One automaton per top-level disjunct of the acceptance, sharing the transition structure.
inline std::vector<Tela> split(const Tela& a) {
  std::vector<Tela> out;
  if (a.acceptance().kind() != Acc::Kind::Or) {
    out.push_back(a);
    return out;
  }
  for (const auto& d : a.acceptance().children()) {
    Tela c = a;
    c.set_acceptance(d, a.mark_count());
    out.push_back(std::move(c));
  }
  return out;
}

namespace detail {

inline void require_same_alphabet(const Tela& a, const Tela& b) {
  if (a.ap_count() != b.ap_count()) throw PreconditionError("automata over different alphabets");
}

inline void require_complete(const Tela& a, const char* op) {
  if (!is_complete(a)) throw PreconditionError(std::string(op) + ": input must be complete");
}

/// Disjoint union of the transition graphs; edges of `b` are offset by a's state count.
/// `mark0` and `mark1` rewrite the marks of each side.
template <class F0, class F1>
Tela disjoint_union(const Tela& a, const Tela& b, F0&& mark0, F1&& mark1) {
  Tela r = empty_like(a);
  const unsigned off = a.state_count();
  r.add_states(off + b.state_count());
  for (unsigned q = 0; q < a.state_count(); ++q)
    for (const auto& e : a.out(q)) r.add_transition_unchecked(q, e.letter, e.dst, mark0(e.marks));
  for (unsigned q = 0; q < b.state_count(); ++q)
    for (const auto& e : b.out(q)) r.add_transition_unchecked(q + off, e.letter, e.dst + off, mark1(e.marks));
  std::vector<unsigned> init = a.initial();
  for (unsigned q : b.initial()) init.push_back(q + off);
  r.set_initial(std::move(init));
  return r;
}

}  // namespace detail

/// Sum A0 + A1: disjoint union, A1's states and marks are offset, and two
/// fresh marks (one on every A0 transition, one on every A1 transition)
/// keep the two acceptance conditions apart.
inline Tela sum(const Tela& a0, const Tela& a1) {
  detail::require_same_alphabet(a0, a1);
  detail::require_complete(a0, "sum");
  detail::require_complete(a1, "sum");
  const unsigned m0 = a0.mark_count(), m1 = a1.mark_count();
  const unsigned f0 = m0 + m1, f1 = m0 + m1 + 1;
  Tela r = detail::disjoint_union(
      a0, a1, [&](const MarkSet& s) { return s | MarkSet::single(f0); },
      [&](const MarkSet& s) { return s.shifted(m0) | MarkSet::single(f1); });
  r.set_acceptance((a0.acceptance() & Acc::inf(f0)) | (shift_marks(a1.acceptance(), m0) & Acc::inf(f1)), m0 + m1 + 2);
  return r;
}

/// Sum of two generalized Buchi automata. The shorter condition is padded with
/// all-transition sets; acceptance set j of the result is the union of the
/// j-th sets of both sides.
inline Tela sum_gba(const Tela& a0, const Tela& a1) {
  detail::require_same_alphabet(a0, a1);
  detail::require_complete(a0, "sum_gba");
  detail::require_complete(a1, "sum_gba");
  auto g0 = as_gba(a0.acceptance()), g1 = as_gba(a1.acceptance());
  if (!g0 || !g1) throw PreconditionError("sum_gba: inputs must be generalized Buchi");
  const unsigned k = static_cast<unsigned>(std::max(g0->size(), g1->size()));
  auto recolor = [k](const std::vector<MarkSet>& sets) {
    return [k, &sets](const MarkSet& s) {
      MarkSet r;
      for (unsigned j = 0; j < k; ++j)
        if (j >= sets.size() || s.intersects(sets[j])) r.set(j);
      return r;
    };
  };
  Tela r = detail::disjoint_union(a0, a1, recolor(*g0), recolor(*g1));
  std::vector<MarkSet> sets;
  for (unsigned j = 0; j < k; ++j) sets.push_back(MarkSet::single(j));
  r.set_acceptance(gba_formula(sets), k);
  return r;
}

enum class Combinator { Or, And };

/// Synchronized product over the reachable pairs. Marks of A1 are offset by
/// A0's mark count. `Or` needs complete inputs; `And` additionally needs
/// deterministic ones.
inline Tela product(const Tela& a0, const Tela& a1, Combinator comb) {
  detail::require_same_alphabet(a0, a1);
  detail::require_complete(a0, "product");
  detail::require_complete(a1, "product");
  if (comb == Combinator::And && (!is_deterministic(a0) || !is_deterministic(a1)))
    throw PreconditionError("product(and): inputs must be deterministic");
  const unsigned m0 = a0.mark_count();
  Tela r = empty_like(a0);
  std::unordered_map<std::uint64_t, unsigned> id;
  std::vector<std::pair<unsigned, unsigned>> pairs;
  auto get = [&](unsigned p, unsigned q) {
    std::uint64_t key = (std::uint64_t{p} << 32) | q;
    auto [it, fresh] = id.emplace(key, static_cast<unsigned>(pairs.size()));
    if (fresh) {
      pairs.emplace_back(p, q);
      r.add_state();
      budget_check(pairs.size());
    }
    return it->second;
  };
  std::vector<unsigned> init;
  for (unsigned p : a0.initial())
    for (unsigned q : a1.initial()) init.push_back(get(p, q));
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    auto [p, q] = pairs[i];
    for (const auto& e0 : a0.out(p))
      for (const auto& e1 : a1.out(q)) {
        if (e0.letter != e1.letter) continue;
        unsigned dst = get(e0.dst, e1.dst);
        r.add_transition_unchecked(static_cast<unsigned>(i), e0.letter, dst, e0.marks | e1.marks.shifted(m0));
      }
  }
  r.set_initial(std::move(init));
  Acc b = shift_marks(a1.acceptance(), m0);
  r.set_acceptance(comb == Combinator::Or ? (a0.acceptance() | b) : (a0.acceptance() & b), m0 + a1.mark_count());
  return r;
}

inline Tela complement_deterministic(const Tela& d) {
  if (!is_deterministic(d) || !is_complete(d))
    throw PreconditionError("complement_deterministic: input must be deterministic and complete");
  Tela r = d;
  r.set_acceptance(negate(d.acceptance()), d.mark_count());
  return r;
}

}  // namespace tela
