#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <unordered_map>
#include <vector>

#include "analysis.hpp"
#include "automaton.hpp"
#include "budget.hpp"
#include "operations.hpp"
#include "transforms.hpp"

namespace tela {

/// Counter construction from generalized Buchi to Buchi. State (q, c) waits
/// for acceptance set c; a transition advances c over every set it hits and
/// carries mark 0 when it completes the round. With zero sets every transition
/// is accepting.
inline Tela degeneralize(const Tela& g) {
  auto sets = as_gba(g.acceptance());
  if (!sets) throw PreconditionError("degeneralize: input must be generalized Buchi");
  const unsigned k = static_cast<unsigned>(sets->size());
  if (k == 0) {
    Tela r = g;
    for (unsigned q = 0; q < r.state_count(); ++q)
      for (auto& e : r.mutable_out(q)) e.marks = MarkSet::single(0);
    r.set_acceptance(Acc::inf(0), 1);
    return r;
  }
  Tela r = empty_like(g);
  std::unordered_map<std::uint64_t, unsigned> id;
  std::vector<std::pair<unsigned, unsigned>> states;
  auto get = [&](unsigned q, unsigned c) {
    std::uint64_t key = (std::uint64_t{q} << 32) | c;
    auto [it, fresh] = id.emplace(key, static_cast<unsigned>(states.size()));
    if (fresh) {
      states.emplace_back(q, c);
      r.add_state();
      budget_check(states.size());
    }
    return it->second;
  };
  std::vector<unsigned> init;
  for (unsigned q : g.initial()) init.push_back(get(q, 0));
  for (std::size_t i = 0; i < states.size(); ++i) {
    auto [q, c] = states[i];
    for (const auto& e : g.out(q)) {
      unsigned j = c;
      while (j < k && e.marks.intersects((*sets)[j])) ++j;
      MarkSet marks;
      if (j == k) {
        marks.set(0);
        j = 0;
      }
      r.add_transition(static_cast<unsigned>(i), e.letter, get(e.dst, j), marks);
    }
  }
  r.set_initial(std::move(init));
  r.set_acceptance(Acc::inf(0), 1);
  return r;
}

namespace detail {

struct SafraNode {
  unsigned name = kNone;  // kNone until named
  StateSet label;
  std::vector<SafraNode> children;  // oldest first
};

inline void safra_key(const SafraNode& n, std::vector<unsigned>& key) {
  key.push_back(n.name);
  key.push_back(static_cast<unsigned>(n.children.size()));
  auto el = n.label.elements();
  key.push_back(static_cast<unsigned>(el.size()));
  key.insert(key.end(), el.begin(), el.end());
  for (const auto& c : n.children) safra_key(c, key);
}

struct SafraStep {
  const Tela& b;
  const MarkSet& accepting;  // Inf set of the Buchi condition; empty means every transition
  bool all_accepting;
  unsigned letter;

  void successors(const StateSet& from, StateSet& all, StateSet& acc) const {
    from.for_each([&](unsigned q) {
      for (const auto& e : b.out(q)) {
        if (e.letter != letter) continue;
        all.set(e.dst);
        if (all_accepting || e.marks.intersects(accepting)) acc.set(e.dst);
      }
    });
  }

  void update(SafraNode& n) const {
    StateSet all, acc;
    successors(n.label, all, acc);
    for (auto& c : n.children) update(c);
    n.label = std::move(all);
    SafraNode spawned;
    spawned.label = std::move(acc);
    n.children.push_back(std::move(spawned));
  }
};

inline void horizontal_merge(SafraNode& n, const StateSet& forbidden) {
  n.label -= forbidden;
  StateSet acc = forbidden;
  for (auto& c : n.children) {
    horizontal_merge(c, acc);
    acc |= c.label;
  }
}

inline void collect_names(const SafraNode& n, MarkSet& out) {
  if (n.name != kNone) out.set(n.name);
  for (const auto& c : n.children) collect_names(c, out);
}

inline void remove_empty(SafraNode& n, MarkSet& bad) {
  std::vector<SafraNode> kept;
  for (auto& c : n.children) {
    if (c.label.empty()) {
      collect_names(c, bad);
      continue;
    }
    remove_empty(c, bad);
    kept.push_back(std::move(c));
  }
  n.children = std::move(kept);
}

inline void vertical_merge(SafraNode& n, MarkSet& bad, MarkSet& good) {
  if (n.children.empty()) return;
  StateSet u;
  for (const auto& c : n.children) u |= c.label;
  if (u == n.label) {
    for (const auto& c : n.children) collect_names(c, bad);
    n.children.clear();
    if (n.name != kNone) good.set(n.name);
    return;
  }
  for (auto& c : n.children) vertical_merge(c, bad, good);
}

inline void assign_names(SafraNode& n, MarkSet& used) {
  if (n.name == kNone) {
    unsigned i = 0;
    while (used.test(i)) ++i;
    n.name = i;
    used.set(i);
  }
  for (auto& c : n.children) assign_names(c, used);
}

}  // namespace detail

/// Safra's construction on transitions: Buchi in, deterministic complete
/// Rabin out. Tree node named i yields marks 2i (node removed) and 2i+1 (node
/// saw a vertical merge); acceptance is the disjunction of Fin(2i) & Inf(2i+1).
inline Tela safra_determinize(const Tela& input) {
  auto sets = as_gba(input.acceptance());
  if (!sets || sets->size() > 1) throw PreconditionError("safra_determinize: input must be Buchi");
  const bool all_accepting = sets->empty();
  const MarkSet accepting = all_accepting ? MarkSet{} : sets->front();
  const Tela b = complete(input);

  Tela r = empty_like(b);
  std::map<std::vector<unsigned>, unsigned> id;
  std::vector<std::optional<detail::SafraNode>> trees;
  auto get = [&](std::optional<detail::SafraNode> t) {
    std::vector<unsigned> key;
    if (t) detail::safra_key(*t, key);
    auto [it, fresh] = id.emplace(std::move(key), static_cast<unsigned>(trees.size()));
    if (fresh) {
      trees.push_back(std::move(t));
      r.add_state();
      budget_check(trees.size());
    }
    return it->second;
  };

  std::optional<detail::SafraNode> root;
  if (!b.initial().empty()) {
    detail::SafraNode n;
    n.name = 0;
    for (unsigned q : b.initial()) n.label.set(q);
    root = std::move(n);
  }
  unsigned init = get(root);
  unsigned max_name = 0;
  bool any_name = false;

  for (std::size_t i = 0; i < trees.size(); ++i) {
    for (unsigned a = 0; a < b.letter_count(); ++a) {
      if (!trees[i]) {
        r.add_transition_unchecked(static_cast<unsigned>(i), a, static_cast<unsigned>(i));
        continue;
      }
      detail::SafraNode t = *trees[i];
      MarkSet bad, good;
      detail::SafraStep{b, accepting, all_accepting, a}.update(t);
      detail::horizontal_merge(t, StateSet{});
      std::optional<detail::SafraNode> next;
      if (t.label.empty()) {
        detail::collect_names(t, bad);
      } else {
        detail::remove_empty(t, bad);
        detail::vertical_merge(t, bad, good);
        MarkSet used;
        detail::collect_names(t, used);
        detail::assign_names(t, used);
        next = std::move(t);
      }
      MarkSet marks;
      bad.for_each([&](unsigned n) {
        marks.set(2 * n);
        max_name = std::max(max_name, n);
        any_name = true;
      });
      good.for_each([&](unsigned n) {
        marks.set(2 * n + 1);
        max_name = std::max(max_name, n);
        any_name = true;
      });
      if (next) {
        MarkSet names;
        detail::collect_names(*next, names);
        if (!names.empty()) {
          max_name = std::max(max_name, names.bound() - 1);
          any_name = true;
        }
      }
      unsigned dst = get(std::move(next));
      r.add_transition_unchecked(static_cast<unsigned>(i), a, dst, std::move(marks));
    }
  }
  r.set_initial({init});
  if (!any_name) {
    r.set_acceptance(Acc::f(), 0);
    return r;
  }
  const unsigned pairs = max_name + 1;
  std::vector<Acc> disj;
  for (unsigned n = 0; n < pairs; ++n) disj.push_back(Acc::fin(2 * n) & Acc::inf(2 * n + 1));
  r.set_acceptance(Acc::make_or(std::move(disj)), 2 * pairs);
  return r;
}

inline Tela determinize_via_gba(const Tela& a, GbaMethod method) {
  return safra_determinize(degeneralize(to_gba(a, method)));
}

/// L(d) is a subset of L(p), for deterministic complete automata.
inline bool contains(const Tela& p, const Tela& d) {
  if (!is_deterministic(p) || !is_deterministic(d) || !is_complete(p) || !is_complete(d))
    throw PreconditionError("contains: inputs must be deterministic and complete");
  Tela prod = product(d, complement_deterministic(p), Combinator::And);
  // One emptiness check per top-level disjunct of d keeps the search free of
  // Rabin-style branching.
  const Acc& acc = d.acceptance();
  if (acc.kind() != Acc::Kind::Or) return is_empty(prod);
  const Acc neg = shift_marks(negate(p.acceptance()), d.mark_count());
  for (const auto& c : acc.children()) {
    prod.set_acceptance(c & neg, prod.mark_count());
    if (!is_empty(prod)) return false;
  }
  return true;
}

inline bool language_equal_deterministic(const Tela& x, const Tela& y) { return contains(x, y) && contains(y, x); }

struct ProductDeterminizeStats {
  std::size_t components = 0;
  std::size_t skipped = 0;
};

/// The 1-state deterministic complete automaton with acceptance f.
inline Tela empty_deterministic(const Tela& like) {
  Tela r = empty_like(like);
  r.add_state();
  for (unsigned a = 0; a < r.letter_count(); ++a) r.add_transition_unchecked(0, a, 0);
  r.set_initial({0});
  r.set_acceptance(Acc::f(), 0);
  return r;
}

/// Deterministic automaton for a single DNF disjunct of `p`.
inline Tela determinize_disjunct(const PreparedDnf& p, std::size_t i) {
  return safra_determinize(degeneralize(trim(remove_fin(p.automaton, DnfAcceptance{{p.dnf.disjuncts[i]}}))));
}

/// Determinizes each DNF disjunct separately and folds the results with the
/// disjunctive product, in disjunct order. With `langcover`, a component whose
/// language is already contained in the accumulated product is skipped.
inline Tela determinize_product(const Tela& a, bool langcover, ProductDeterminizeStats* stats = nullptr) {
  auto p = prepare_dnf(a);
  if (stats) *stats = {};
  if (p.dnf.size() == 0) return empty_deterministic(a);
  std::optional<Tela> acc;
  for (std::size_t i = 0; i < p.dnf.size(); ++i) {
    Tela d = determinize_disjunct(p, i);
    if (!acc) {
      acc = std::move(d);
      if (stats) ++stats->components;
      continue;
    }
    if (langcover && contains(*acc, d)) {
      if (stats) ++stats->skipped;
      continue;
    }
    acc = product(*acc, d, Combinator::Or);
    if (stats) ++stats->components;
  }
  return *acc;
}

}  // namespace tela
