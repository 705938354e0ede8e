#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "acceptance.hpp"
#include "analysis.hpp"
#include "automaton.hpp"
#include "operations.hpp"

namespace tela {

struct PreparedDnf {
  Tela automaton;
  DnfAcceptance dnf;
};

/// DNF of a's acceptance. When some disjunct has no Inf atom, the returned
/// automaton carries an extra mark on every transition and that mark fills in.
inline PreparedDnf prepare_dnf(const Tela& a) {
  if (dnf_needs_all_mark(a.acceptance())) {
    unsigned all = 0;
    Tela b = with_all_mark(a, all);
    DnfAcceptance d = to_dnf(a.acceptance(), all);
    return {std::move(b), std::move(d)};
  }
  return {a, to_dnf(a.acceptance(), a.mark_count())};
}

namespace detail {

inline void require_dnf(const Tela& a, const DnfAcceptance& dnf, const char* op) {
  for (const auto& d : dnf.disjuncts)
    if (d.infs.empty()) throw PreconditionError(std::string(op) + ": disjunct without Inf atom");
  if (dnf.used_marks().bound() > a.mark_count()) throw PreconditionError(std::string(op) + ": undeclared mark");
}

/// Transition structure shared by both fin-removal variants. `copy_marks(i, marks)`
/// gives the marks of a transition of copy i (1-based).
template <class F>
Tela fin_removal_skeleton(const Tela& a, const DnfAcceptance& dnf, F&& copy_marks) {
  const unsigned n = a.state_count();
  const unsigned m = static_cast<unsigned>(dnf.size());
  Tela r = empty_like(a);
  r.add_states((m + 1) * n);
  for (unsigned q = 0; q < n; ++q)
    for (const auto& e : a.out(q)) r.add_transition(q, e.letter, e.dst);
  for (unsigned i = 1; i <= m; ++i) {
    const auto& d = dnf.disjuncts[i - 1];
    for (unsigned q = 0; q < n; ++q)
      for (const auto& e : a.out(q)) {
        r.add_transition(q, e.letter, i * n + e.dst);
        if (!e.marks.intersects(d.fin)) r.add_transition(i * n + q, e.letter, i * n + e.dst, copy_marks(i, e.marks));
      }
  }
  r.set_initial(a.initial());
  return r;
}

}  // namespace detail

/// Fin removal with one copy per disjunct. Copy i (states i*n .. i*n+n-1)
/// drops the Fin transitions of disjunct i; its j-th Inf set becomes mark
/// base_i + j where base_i is the number of Inf atoms in earlier disjuncts.
/// Acceptance: disjunction over copies of the conjunction of their Inf marks.
inline Tela remove_fin(const Tela& a, const DnfAcceptance& dnf) {
  detail::require_dnf(a, dnf, "remove_fin");
  std::vector<unsigned> base;
  unsigned total = 0;
  for (const auto& d : dnf.disjuncts) {
    base.push_back(total);
    total += static_cast<unsigned>(d.infs.size());
  }
  Tela r = detail::fin_removal_skeleton(a, dnf, [&](unsigned i, const MarkSet& s) {
    MarkSet out;
    const auto& infs = dnf.disjuncts[i - 1].infs;
    for (unsigned j = 0; j < infs.size(); ++j)
      if (s.intersects(infs[j])) out.set(base[i - 1] + j);
    return out;
  });
  std::vector<Acc> disj;
  for (unsigned i = 0; i < dnf.size(); ++i) {
    std::vector<MarkSet> sets;
    for (unsigned j = 0; j < dnf.disjuncts[i].infs.size(); ++j) sets.push_back(MarkSet::single(base[i] + j));
    disj.push_back(gba_formula(sets));
  }
  r.set_acceptance(Acc::make_or(std::move(disj)), total);
  return r;
}

/// Fin removal with generalized Buchi acceptance: mark j collects the j-th Inf
/// set of every copy, copies with fewer sets contribute all their transitions.
inline Tela remove_fin_gba(const Tela& a, const DnfAcceptance& dnf) {
  detail::require_dnf(a, dnf, "remove_fin_gba");
  const unsigned k = static_cast<unsigned>(dnf.max_k());
  Tela r = detail::fin_removal_skeleton(a, dnf, [&](unsigned i, const MarkSet& s) {
    MarkSet out;
    const auto& infs = dnf.disjuncts[i - 1].infs;
    for (unsigned j = 0; j < k; ++j)
      if (j >= infs.size() || s.intersects(infs[j])) out.set(j);
    return out;
  });
  if (dnf.size() == 0) {
    r.set_acceptance(Acc::f(), 0);
    return r;
  }
  std::vector<MarkSet> sets;
  for (unsigned j = 0; j < k; ++j) sets.push_back(MarkSet::single(j));
  r.set_acceptance(gba_formula(sets), k);
  return r;
}

/// Removes states that are unreachable or cannot reach a cycle satisfying the
/// acceptance. An automaton with nothing left becomes a single state without transitions.
inline Tela trim(const Tela& a) {
  const unsigned n = a.state_count();
  auto adj = a.adjacency();
  auto reach = detail::forward_reach(adj, a.initial());
  auto res = detail::tarjan(adj, &reach);
  Acc phi = fold_constants(a.acceptance());
  std::vector<unsigned> good;
  for (const auto& members : res.members) {
    std::vector<char> active(n, 0);
    for (unsigned q : members) active[q] = 1;
    if (detail::search(a, active, MarkSet{}, phi)) good.push_back(members.front());
  }
  auto coreach = detail::forward_reach(detail::reverse(adj), good);
  StateSet keep;
  for (unsigned q = 0; q < n; ++q)
    if (reach[q] && coreach[q]) keep.set(q);
  if (keep.empty()) {
    Tela r = empty_like(a);
    r.add_state();
    r.set_initial({0});
    r.set_acceptance(a.acceptance(), a.mark_count());
    return r;
  }
  return restrict_states(a, keep);
}

enum class GbaMethod { Cnf, RemfinSplit, SplitRemfin, RemfinRewrite };

inline constexpr GbaMethod kAllGbaMethods[] = {GbaMethod::Cnf, GbaMethod::RemfinSplit, GbaMethod::SplitRemfin,
                                               GbaMethod::RemfinRewrite};

inline std::string_view to_string(GbaMethod m) {
  switch (m) {
    case GbaMethod::Cnf: return "cnf";
    case GbaMethod::RemfinSplit: return "remfin_split";
    case GbaMethod::SplitRemfin: return "split_remfin";
    case GbaMethod::RemfinRewrite: return "remfin_rewrite";
  }
  return "?";
}

inline std::optional<GbaMethod> parse_gba_method(std::string_view s) {
  for (GbaMethod m : kAllGbaMethods)
    if (to_string(m) == s) return m;
  return std::nullopt;
}

namespace detail {

/// Fold of sum_gba over trimmed, completed generalized Buchi parts.
inline Tela gba_sum_all(const Tela& like, std::vector<Tela> parts) {
  if (parts.empty()) {
    Tela r = empty_like(like);
    r.add_state();
    r.set_initial({0});
    r.set_acceptance(Acc::f(), 0);
    return r;
  }
  Tela acc = complete(trim(parts[0]));
  for (std::size_t i = 1; i < parts.size(); ++i) acc = sum_gba(acc, complete(trim(parts[i])));
  return acc;
}

/// Rewrites a Fin-free automaton to generalized Buchi form through the CNF.
inline Tela finless_to_gba_automaton(const Tela& a) {
  auto sets = finless_to_gba(a.acceptance());
  const unsigned k = static_cast<unsigned>(sets.size());
  Tela r = a;
  for (unsigned q = 0; q < r.state_count(); ++q)
    for (auto& e : r.mutable_out(q)) {
      MarkSet s;
      for (unsigned j = 0; j < k; ++j)
        if (e.marks.intersects(sets[j])) s.set(j);
      e.marks = std::move(s);
    }
  std::vector<MarkSet> singles;
  for (unsigned j = 0; j < k; ++j) singles.push_back(MarkSet::single(j));
  r.set_acceptance(gba_formula(singles), k);
  r.canonicalize();
  return r;
}

}  // namespace detail

inline Tela to_gba(const Tela& a, GbaMethod method) {
  switch (method) {
    case GbaMethod::Cnf: {
      if (!a.acceptance().has_fin()) return trim(detail::finless_to_gba_automaton(a));
      auto p = prepare_dnf(a);
      return trim(detail::finless_to_gba_automaton(remove_fin(p.automaton, p.dnf)));
    }
    case GbaMethod::RemfinSplit: {
      auto p = prepare_dnf(a);
      Tela r = remove_fin(p.automaton, p.dnf);
      std::vector<Tela> parts;
      unsigned base = 0;
      for (const auto& d : p.dnf.disjuncts) {
        std::vector<MarkSet> sets;
        for (unsigned j = 0; j < d.infs.size(); ++j) sets.push_back(MarkSet::single(base + j));
        base += static_cast<unsigned>(d.infs.size());
        Tela part = r;
        part.set_acceptance(gba_formula(sets), r.mark_count());
        parts.push_back(detail::finless_to_gba_automaton(part));
      }
      return detail::gba_sum_all(a, std::move(parts));
    }
    case GbaMethod::SplitRemfin: {
      auto p = prepare_dnf(a);
      std::vector<Tela> parts;
      for (const auto& d : p.dnf.disjuncts) parts.push_back(remove_fin(p.automaton, DnfAcceptance{{d}}));
      return detail::gba_sum_all(a, std::move(parts));
    }
    case GbaMethod::RemfinRewrite: {
      auto p = prepare_dnf(a);
      return trim(remove_fin_gba(p.automaton, p.dnf));
    }
  }
  return a;
}

}  // namespace tela
