#pragma once

#include <bitset>
#include <cstdint>
#include <deque>
#include <optional>
#include <random>
#include <vector>

#include "acceptance.hpp"
#include "automaton.hpp"
#include "budget.hpp"
#include "detail/graph.hpp"

namespace tela {

namespace detail {

/// Inf(S) -> Inf(S & U), Fin(S) -> Fin(S & U), then constant folding.
inline Acc restrict_formula(const Acc& phi, const MarkSet& u) {
  switch (phi.kind()) {
    case Acc::Kind::Inf: return Acc::inf(phi.marks() & u);
    case Acc::Kind::Fin: return Acc::fin(phi.marks() & u);
    case Acc::Kind::And:
    case Acc::Kind::Or: {
      std::vector<Acc> parts;
      for (const auto& c : phi.children()) parts.push_back(restrict_formula(c, u));
      Acc r = phi.kind() == Acc::Kind::And ? Acc::make_and(std::move(parts)) : Acc::make_or(std::move(parts));
      return fold_constants(r);
    }
    default: return phi;
  }
}

/// Fixes whether mark f is seen infinitely often, as far as Fin atoms go.
inline Acc assume_fin(const Acc& phi, unsigned f, bool seen) {
  switch (phi.kind()) {
    case Acc::Kind::Fin:
      if (!phi.marks().test(f)) return phi;
      if (seen) return Acc::f();
      return Acc::fin(phi.marks() - MarkSet::single(f));
    case Acc::Kind::And:
    case Acc::Kind::Or: {
      std::vector<Acc> parts;
      for (const auto& c : phi.children()) parts.push_back(assume_fin(c, f, seen));
      Acc r = phi.kind() == Acc::Kind::And ? Acc::make_and(std::move(parts)) : Acc::make_or(std::move(parts));
      return fold_constants(r);
    }
    default: return phi;
  }
}

inline MarkSet fin_marks(const Acc& phi) {
  if (phi.kind() == Acc::Kind::Fin) return phi.marks();
  MarkSet r;
  for (const auto& c : phi.children()) r |= fin_marks(c);
  return r;
}

struct AcceptingScc {
  std::vector<unsigned> states;
  MarkSet forbidden;
};

/// Emerson-Lei emptiness: inside an SCC with mark union U, the formula
/// restricted to U either holds (the cycle over all internal transitions is
/// accepting) or some Fin mark f decides the split: cycles that avoid f live
/// in the sub-SCCs without f-transitions, cycles that see f stay in this SCC
/// with Fin(f) false. `pos` is scratch space of size |Q|.
inline std::optional<AcceptingScc> search_states(const Tela& a, const std::vector<unsigned>& states,
                                                 const MarkSet& forbidden, const Acc& phi, std::vector<unsigned>& pos) {
  const unsigned k = static_cast<unsigned>(states.size());
  for (unsigned i = 0; i < k; ++i) pos[states[i]] = i;
  auto local = [&](unsigned q) {
    unsigned j = pos[q];
    return j < k && states[j] == q ? j : kNone;
  };
  Adjacency adj(k);
  for (unsigned i = 0; i < k; ++i)
    for (const auto& e : a.out(states[i])) {
      if (e.marks.intersects(forbidden)) continue;
      if (unsigned j = local(e.dst); j != kNone) adj[i].push_back(j);
    }
  auto res = tarjan(adj);
  const std::size_t ncomp = res.members.size();
  std::vector<MarkSet> u(ncomp);
  std::vector<char> has_edge(ncomp, 0);
  for (unsigned i = 0; i < k; ++i)
    for (const auto& e : a.out(states[i])) {
      if (e.marks.intersects(forbidden)) continue;
      unsigned j = local(e.dst);
      if (j == kNone || res.comp[j] != res.comp[i]) continue;
      has_edge[res.comp[i]] = 1;
      u[res.comp[i]] |= e.marks;
    }
  for (std::size_t c = 0; c < ncomp; ++c) {
    if (!has_edge[c]) continue;
    budget_check(res.members[c].size());
    std::vector<unsigned> members;
    for (unsigned i : res.members[c]) members.push_back(states[i]);
    std::sort(members.begin(), members.end());
    Acc psi = restrict_formula(phi, u[c]);
    while (!psi.is_false()) {
      if (evaluate(u[c], psi)) return AcceptingScc{members, forbidden};
      MarkSet fins = fin_marks(psi);
      if (fins.empty()) break;
      // Marks that falsify psi once seen are avoided by every accepting
      // cycle here; dropping them needs no branching.
      MarkSet avoid;
      Acc rest = psi;
      fins.for_each([&](unsigned f) {
        if (assume_fin(psi, f, true).is_false()) {
          avoid.set(f);
          rest = assume_fin(rest, f, false);
        }
      });
      if (!avoid.empty()) {
        if (auto r = search_states(a, members, forbidden | avoid, rest, pos)) return r;
        break;
      }
      if (psi.kind() == Acc::Kind::Or) {
        for (const auto& d : psi.children())
          if (auto r = search_states(a, members, forbidden, d, pos)) return r;
        break;
      }
      unsigned f = fins.front();
      if (auto r = search_states(a, members, forbidden | MarkSet::single(f), assume_fin(psi, f, false), pos))
        return r;
      psi = assume_fin(psi, f, true);
    }
  }
  return std::nullopt;
}

inline std::optional<AcceptingScc> search(const Tela& a, const std::vector<char>& active, const MarkSet& forbidden,
                                          const Acc& phi) {
  std::vector<unsigned> states;
  for (unsigned q = 0; q < a.state_count(); ++q)
    if (active[q]) states.push_back(q);
  std::vector<unsigned> pos(a.state_count(), kNone);
  return search_states(a, states, forbidden, phi, pos);
}

inline std::optional<AcceptingScc> find_accepting_scc(const Tela& a) {
  auto seen = forward_reach(a.adjacency(), a.initial());
  return search(a, seen, MarkSet{}, fold_constants(a.acceptance()));
}

}  // namespace detail

inline bool is_empty(const Tela& a) { return !detail::find_accepting_scc(a).has_value(); }

/// An accepting lasso, or nullopt if the language is empty. The cycle
/// sees every mark of the accepting SCC found.
inline std::optional<Lasso> find_accepting_lasso(const Tela& a) {
  auto found = detail::find_accepting_scc(a);
  if (!found) return std::nullopt;
  const unsigned n = a.state_count();
  std::vector<char> in_scc(n, 0);
  for (unsigned q : found->states) in_scc[q] = 1;
  auto allowed = [&](unsigned q, const Edge& e) {
    return in_scc[q] && in_scc[e.dst] && !e.marks.intersects(found->forbidden);
  };

  // Shortest path from `from` (any of them) to a state satisfying `target`.
  auto bfs = [&](const std::vector<unsigned>& from, auto&& target, bool inside) {
    std::vector<std::optional<Transition>> via(n);
    std::vector<char> seen(n, 0);
    std::deque<unsigned> queue;
    for (unsigned s : from) {
      seen[s] = 1;
      queue.push_back(s);
    }
    unsigned hit = detail::kNone;
    while (!queue.empty()) {
      unsigned q = queue.front();
      queue.pop_front();
      if (target(q)) {
        hit = q;
        break;
      }
      for (const auto& e : a.out(q)) {
        if (inside && !allowed(q, e)) continue;
        if (seen[e.dst]) continue;
        seen[e.dst] = 1;
        via[e.dst] = Transition{q, e.letter, e.dst, e.marks};
        queue.push_back(e.dst);
      }
    }
    std::vector<Transition> path;
    for (unsigned q = hit; via[q]; q = via[q]->src) path.push_back(*via[q]);
    std::reverse(path.begin(), path.end());
    return std::make_pair(hit, path);
  };

  Lasso lasso;
  auto [entry, prefix] = bfs(a.initial(), [&](unsigned q) { return in_scc[q] != 0; }, false);
  lasso.prefix = std::move(prefix);
  // Visit one transition per mark of the component (or any transition when
  // it has no marks), then close the cycle.
  MarkSet todo;
  std::vector<Transition> internal;
  for (unsigned q : found->states)
    for (const auto& e : a.out(q))
      if (allowed(q, e)) {
        internal.push_back(Transition{q, e.letter, e.dst, e.marks});
        todo |= e.marks;
      }
  unsigned cur = entry;
  auto take = [&](const Transition& t) {
    auto [at, path] = bfs({cur}, [&](unsigned s) { return s == t.src; }, true);
    for (const auto& p : path) todo -= p.marks;
    lasso.cycle.insert(lasso.cycle.end(), path.begin(), path.end());
    lasso.cycle.push_back(t);
    todo -= t.marks;
    cur = t.dst;
  };
  if (todo.empty()) take(internal.front());
  for (const auto& t : internal)
    if (t.marks.intersects(todo)) take(t);
  auto [back, path] = bfs({cur}, [&](unsigned s) { return s == entry; }, true);
  lasso.cycle.insert(lasso.cycle.end(), path.begin(), path.end());
  return lasso;
}

inline void check_word(const Tela& a, const LassoWord& w) {
  if (w.cycle.empty()) throw PreconditionError("lasso word needs a non-empty cycle");
  for (unsigned l : w.prefix)
    if (l >= a.letter_count()) throw PreconditionError("letter outside the alphabet");
  for (unsigned l : w.cycle)
    if (l >= a.letter_count()) throw PreconditionError("letter outside the alphabet");
}

/// Synchronous product of `a` with the deterministic automaton of w.
/// The result has no APs; its runs are the runs of `a` on w.
inline Tela word_product(const Tela& a, const LassoWord& w) {
  check_word(a, w);
  const unsigned len = static_cast<unsigned>(w.prefix.size() + w.cycle.size());
  const unsigned loop = static_cast<unsigned>(w.prefix.size());
  auto letter_at = [&](unsigned pos) { return pos < loop ? w.prefix[pos] : w.cycle[pos - loop]; };
  Tela r(0, a.state_count() * len);
  for (unsigned q = 0; q < a.state_count(); ++q)
    for (unsigned pos = 0; pos < len; ++pos) {
      unsigned next = pos + 1 < len ? pos + 1 : loop;
      for (const auto& e : a.out(q))
        if (e.letter == letter_at(pos)) r.add_transition_unchecked(q * len + pos, 0, e.dst * len + next, e.marks);
    }
  std::vector<unsigned> init;
  for (unsigned q : a.initial()) init.push_back(q * len);
  r.set_initial(std::move(init));
  r.set_acceptance(a.acceptance(), a.mark_count());
  return r;
}

inline bool accepts(const Tela& a, const LassoWord& w) { return !is_empty(word_product(a, w)); }

// ---------------------------------------------------------------------------
// Independent oracle

inline constexpr unsigned kBruteForceStateCap = 7;
inline constexpr unsigned kBruteForceMarkCap = 16;

namespace detail {

/// For each subset M of the used marks with evaluate(M, acc): is there a
/// reachable set of mutually reachable states whose internal transitions
/// with marks inside M carry exactly M? Reachability by transitive closure.
inline bool brute_force_nonempty(const Tela& a) {
  constexpr unsigned kCap = 512;
  const unsigned n = a.state_count();
  if (n > kCap) throw PreconditionError("oracle: state space too large");
  auto ts = a.transitions();
  MarkSet used;
  for (const auto& t : ts) used |= t.marks;
  auto marks = used.elements();
  if (marks.size() > kBruteForceMarkCap) throw PreconditionError("oracle: too many marks");

  using Row = std::bitset<kCap>;
  Row from_init;
  {
    std::vector<unsigned> work(a.initial().begin(), a.initial().end());
    for (unsigned q : work) from_init.set(q);
    while (!work.empty()) {
      unsigned q = work.back();
      work.pop_back();
      for (const auto& t : ts)
        if (t.src == q && !from_init.test(t.dst)) {
          from_init.set(t.dst);
          work.push_back(t.dst);
        }
    }
  }

  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << marks.size()); ++mask) {
    MarkSet m;
    for (unsigned i = 0; i < marks.size(); ++i)
      if ((mask >> i) & 1U) m.set(marks[i]);
    if (!evaluate(m, a.acceptance())) continue;
    std::vector<Row> reach(n);
    for (const auto& t : ts)
      if (t.marks.subset_of(m)) reach[t.src].set(t.dst);
    for (unsigned k = 0; k < n; ++k)
      for (unsigned i = 0; i < n; ++i)
        if (reach[i].test(k)) reach[i] |= reach[k];
    for (unsigned s = 0; s < n; ++s) {
      if (!from_init.test(s) || !reach[s].test(s)) continue;
      auto same_class = [&](unsigned x) { return reach[s].test(x) && reach[x].test(s); };
      bool representative = true;
      for (unsigned x = 0; x < s; ++x)
        if (same_class(x)) representative = false;
      if (!representative) continue;
      MarkSet seen;
      for (const auto& t : ts)
        if (t.marks.subset_of(m) && same_class(t.src) && same_class(t.dst)) seen |= t.marks;
      if (seen == m) return true;
    }
  }
  return false;
}

}  // namespace detail

inline bool brute_force_empty(const Tela& a) {
  if (a.state_count() > kBruteForceStateCap) throw PreconditionError("brute_force_empty: too many states");
  return !detail::brute_force_nonempty(a);
}

inline bool brute_force_accepts(const Tela& a, const LassoWord& w) {
  if (a.state_count() > kBruteForceStateCap) throw PreconditionError("brute_force_accepts: too many states");
  return detail::brute_force_nonempty(word_product(a, w));
}

inline constexpr unsigned kMaxLassoPart = 6;

/// Seeded sample of lasso words with |prefix| <= 6 and 1 <= |cycle| <= 6.
/// Every other word follows a random walk through `a` so that accepted words
/// show up with reasonable frequency.
inline std::vector<LassoWord> sample_lassos(const Tela& a, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto uniform = [&](unsigned lo, unsigned hi) { return std::uniform_int_distribution<unsigned>(lo, hi)(rng); };
  std::vector<LassoWord> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    LassoWord w;
    unsigned plen = uniform(0, kMaxLassoPart), clen = uniform(1, kMaxLassoPart);
    std::vector<unsigned> letters;
    if (i % 2 == 1 && !a.initial().empty()) {
      unsigned q = a.initial()[uniform(0, static_cast<unsigned>(a.initial().size()) - 1)];
      bool stuck = false;
      for (unsigned k = 0; k < plen + clen; ++k) {
        const auto& out_q = a.out(q);
        if (stuck || out_q.empty()) {
          stuck = true;
          letters.push_back(uniform(0, a.letter_count() - 1));
          continue;
        }
        const auto& e = out_q[uniform(0, static_cast<unsigned>(out_q.size()) - 1)];
        letters.push_back(e.letter);
        q = e.dst;
      }
    } else {
      for (unsigned k = 0; k < plen + clen; ++k) letters.push_back(uniform(0, a.letter_count() - 1));
    }
    w.prefix.assign(letters.begin(), letters.begin() + plen);
    w.cycle.assign(letters.begin() + plen, letters.end());
    out.push_back(std::move(w));
  }
  return out;
}

}  // namespace tela
