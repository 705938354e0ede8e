#pragma once

#include <deque>
#include <map>
#include <optional>
#include <tuple>
#include <vector>

#include "analysis.hpp"
#include "automaton.hpp"
#include "budget.hpp"
#include "determinize.hpp"
#include "operations.hpp"
#include "transforms.hpp"

namespace tela {

struct Partition {
  StateSet nondet;  // Q_N
  StateSet det;     // Q_D
};

/// States with two transitions on the same letter.
inline StateSet branching_states(const Tela& a) {
  StateSet r;
  std::vector<char> seen(a.letter_count());
  for (unsigned q = 0; q < a.state_count(); ++q) {
    std::fill(seen.begin(), seen.end(), 0);
    for (const auto& e : a.out(q)) {
      if (seen[e.letter]) {
        r.set(q);
        break;
      }
      seen[e.letter] = 1;
    }
  }
  return r;
}

/// Largest deterministic part: Q_D holds the states from which no branching
/// state is reachable.
inline Partition canonical_partition(const Tela& a) {
  auto back = detail::reverse(a.adjacency());
  auto reach = detail::forward_reach(back, branching_states(a).elements());
  Partition p;
  for (unsigned q = 0; q < a.state_count(); ++q) (reach[q] ? p.nondet : p.det).set(q);
  return p;
}

struct LimitDetVerdict {
  bool limit_deterministic = true;
  std::optional<Lasso> violation;  // accepting run staying in Q_N forever
};

/// Limit-determinism holds iff no accepting run stays inside Q_N for ever,
/// i.e. the automaton restricted to the canonical Q_N has an empty language.
inline LimitDetVerdict check_limit_deterministic(const Tela& a) {
  Tela n = restrict_states(a, canonical_partition(a).nondet);
  auto lasso = find_accepting_lasso(n);
  if (!lasso) return {};
  // Map the witness back to original state numbers.
  auto ids = canonical_partition(a).nondet.elements();
  for (auto* part : {&lasso->prefix, &lasso->cycle})
    for (auto& t : *part) {
      t.src = ids[t.src];
      t.dst = ids[t.dst];
    }
  return {false, std::move(lasso)};
}

inline bool is_limit_deterministic(const Tela& a) { return check_limit_deterministic(a).limit_deterministic; }

/// Every transition carrying a mark of some Inf atom lies inside the canonical Q_D.
inline bool is_syntactically_limit_deterministic(const Tela& a) {
  auto dnf = match_dnf(a.acceptance());
  if (!dnf) throw PreconditionError("is_syntactically_limit_deterministic: acceptance is not in DNF");
  MarkSet inf_marks;
  for (const auto& d : dnf->disjuncts)
    for (const auto& s : d.infs) inf_marks |= s;
  const auto part = canonical_partition(a);
  for (unsigned q = 0; q < a.state_count(); ++q)
    for (const auto& e : a.out(q))
      if (e.marks.intersects(inf_marks) && (!part.det.test(q) || !part.det.test(e.dst))) return false;
  return true;
}

/// Sum over the disjuncts of the deterministic automaton for each disjunct.
/// The only nondeterminism is the choice of component at the start.
inline Tela limit_det_sum(const Tela& a) {
  auto p = prepare_dnf(a);
  if (p.dnf.size() == 0) return empty_deterministic(a);
  Tela acc = determinize_disjunct(p, 0);
  for (std::size_t i = 1; i < p.dnf.size(); ++i) acc = sum(acc, determinize_disjunct(p, i));
  return acc;
}

// ---------------------------------------------------------------------------
// Breakpoint constructions

/// (R, B, l): R the states reachable without Fin transitions of the disjunct,
/// B those that saw Inf set l+1 since the last breakpoint (l counts from 0).
struct BreakpointState {
  StateSet r;
  StateSet b;
  unsigned l = 0;

  friend bool operator==(const BreakpointState&, const BreakpointState&) = default;
  friend auto operator<=>(const BreakpointState& x, const BreakpointState& y) {
    return std::tie(x.r, x.b, x.l) <=> std::tie(y.r, y.b, y.l);
  }
};

enum class BridgeMode { AllSubsets, Singletons };

inline constexpr unsigned kGfmStateCap = 12;

/// Output of the breakpoint-based constructions. For state s, `component[s]`
/// is -1 in the initial component and i for breakpoint component i; `bp[s]`
/// is meaningful for breakpoint states, `subset[s]` for subset states.
struct LimitDetAutomaton {
  Tela automaton;
  std::vector<int> component;
  std::vector<BreakpointState> bp;
  std::vector<StateSet> subset;
  unsigned initial_component_size = 0;
};

namespace detail {

class BreakpointBuilder {
 public:
  BreakpointBuilder(const Tela& a, const DnfAcceptance& dnf, LimitDetAutomaton& out)
      : a_(a), dnf_(dnf), out_(out) {}

  unsigned state(unsigned i, BreakpointState s) {
    auto key = std::make_tuple(i, s);
    auto it = ids_.find(key);
    if (it != ids_.end()) return it->second;
    unsigned id = out_.automaton.add_state();
    budget_check(out_.automaton.state_count());
    ids_.emplace(std::move(key), id);
    out_.component.push_back(static_cast<int>(i));
    out_.bp.push_back(s);
    out_.subset.emplace_back();
    queue_.push_back(id);
    return id;
  }

  /// Explores all breakpoint states created so far and their successors.
  void run() {
    while (!queue_.empty()) {
      unsigned id = queue_.front();
      queue_.pop_front();
      const unsigned i = static_cast<unsigned>(out_.component[id]);
      const BreakpointState s = out_.bp[id];
      const auto& d = dnf_.disjuncts[i];
      const unsigned k = static_cast<unsigned>(d.infs.size());
      for (unsigned letter = 0; letter < a_.letter_count(); ++letter) {
        StateSet r2, b2;
        s.r.for_each([&](unsigned q) {
          for (const auto& e : a_.out(q)) {
            if (e.letter != letter || e.marks.intersects(d.fin)) continue;
            r2.set(e.dst);
            if (s.b.test(q) || e.marks.intersects(d.infs[s.l])) b2.set(e.dst);
          }
        });
        if (r2.empty()) continue;
        if (r2 == b2) {
          unsigned dst = state(i, BreakpointState{r2, StateSet{}, (s.l + 1) % k});
          out_.automaton.add_transition_unchecked(id, letter, dst, MarkSet::single(0));
        } else {
          unsigned dst = state(i, BreakpointState{std::move(r2), std::move(b2), s.l});
          out_.automaton.add_transition_unchecked(id, letter, dst);
        }
      }
    }
  }

 private:
  const Tela& a_;
  const DnfAcceptance& dnf_;
  LimitDetAutomaton& out_;
  std::map<std::tuple<unsigned, BreakpointState>, unsigned> ids_;
  std::deque<unsigned> queue_;
};

inline LimitDetAutomaton empty_ld(const Tela& like) {
  LimitDetAutomaton r{empty_like(like), {}, {}, {}, 0};
  r.automaton.set_acceptance(Acc::inf(0), 1);
  return r;
}

}  // namespace detail

/// Breakpoint automaton of disjunct i, started in (seed, {}, 0); the seed
/// defaults to the initial states.
inline LimitDetAutomaton breakpoint_component(const Tela& a, const DnfAcceptance& dnf, std::size_t i,
                                              std::optional<StateSet> seed = std::nullopt) {
  detail::require_dnf(a, dnf, "breakpoint_component");
  if (i >= dnf.size()) throw PreconditionError("breakpoint_component: disjunct index out of range");
  auto r = detail::empty_ld(a);
  detail::BreakpointBuilder bb(a, dnf, r);
  StateSet init;
  if (seed)
    init = *seed;
  else
    for (unsigned q : a.initial()) init.set(q);
  unsigned s0 = bb.state(static_cast<unsigned>(i), BreakpointState{init, StateSet{}, 0});
  bb.run();
  r.automaton.set_initial({s0});
  return r;
}

/// Copy of `a` as initial component, bridged into breakpoint components
/// through singleton seeds ({q'}, {}, 0)_i for every transition (q, a, q').
inline LimitDetAutomaton build_ld(const Tela& a, const DnfAcceptance& dnf) {
  detail::require_dnf(a, dnf, "build_ld");
  auto r = detail::empty_ld(a);
  const unsigned n = a.state_count();
  r.automaton.add_states(n);
  r.component.assign(n, -1);
  r.bp.assign(n, BreakpointState{});
  r.subset.assign(n, StateSet{});
  for (unsigned q = 0; q < n; ++q) r.subset[q] = StateSet::single(q);
  r.initial_component_size = n;
  detail::BreakpointBuilder bb(a, dnf, r);
  for (unsigned q = 0; q < n; ++q)
    for (const auto& e : a.out(q)) {
      r.automaton.add_transition(q, e.letter, e.dst);
      for (unsigned i = 0; i < dnf.size(); ++i)
        r.automaton.add_transition(q, e.letter, bb.state(i, BreakpointState{StateSet::single(e.dst), {}, 0}));
    }
  bb.run();
  r.automaton.set_initial(a.initial());
  return r;
}

/// Subset automaton of `a` as initial component, bridged into breakpoint
/// components from P on letter x through every non-empty P' inside theta(P, x)
/// (only singletons with BridgeMode::Singletons).
inline LimitDetAutomaton build_gfm(const Tela& a, const DnfAcceptance& dnf,
                                   BridgeMode mode = BridgeMode::AllSubsets, unsigned state_cap = kGfmStateCap) {
  detail::require_dnf(a, dnf, "build_gfm");
  if (mode == BridgeMode::AllSubsets && a.state_count() > state_cap)
    throw PreconditionError("build_gfm: too many states for subset bridges");
  auto r = detail::empty_ld(a);
  std::map<StateSet, unsigned> ids;
  auto subset_state = [&](const StateSet& p) {
    auto [it, fresh] = ids.emplace(p, r.automaton.state_count());
    if (fresh) {
      r.automaton.add_state();
      budget_check(r.automaton.state_count());
      r.component.push_back(-1);
      r.bp.emplace_back();
      r.subset.push_back(p);
    }
    return it->second;
  };
  StateSet init;
  for (unsigned q : a.initial()) init.set(q);
  unsigned s0 = subset_state(init);
  std::vector<std::vector<StateSet>> image;  // theta(P, x) per subset state and letter
  for (unsigned id = 0; id < r.automaton.state_count(); ++id) {
    const StateSet p = r.subset[id];
    image.emplace_back();
    for (unsigned x = 0; x < a.letter_count(); ++x) {
      StateSet t;
      p.for_each([&](unsigned q) {
        for (const auto& e : a.out(q))
          if (e.letter == x) t.set(e.dst);
      });
      r.automaton.add_transition_unchecked(id, x, subset_state(t));
      image.back().push_back(std::move(t));
    }
  }
  r.initial_component_size = r.automaton.state_count();
  detail::BreakpointBuilder bb(a, dnf, r);
  for (unsigned id = 0; id < r.initial_component_size; ++id)
    for (unsigned x = 0; x < a.letter_count(); ++x) {
      const auto elems = image[id][x].elements();
      if (elems.empty()) continue;
      auto bridge = [&](const StateSet& target) {
        for (unsigned i = 0; i < dnf.size(); ++i)
          r.automaton.add_transition_unchecked(id, x, bb.state(i, BreakpointState{target, {}, 0}));
      };
      if (mode == BridgeMode::Singletons) {
        for (unsigned q : elems) bridge(StateSet::single(q));
        continue;
      }
      for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << elems.size()); ++mask) {
        StateSet target;
        for (unsigned j = 0; j < elems.size(); ++j)
          if ((mask >> j) & 1U) target.set(elems[j]);
        bridge(target);
      }
    }
  bb.run();
  r.automaton.set_initial({s0});
  return r;
}

inline LimitDetAutomaton build_ld(const Tela& a) {
  auto p = prepare_dnf(a);
  return build_ld(p.automaton, p.dnf);
}

inline LimitDetAutomaton build_gfm(const Tela& a, BridgeMode mode = BridgeMode::AllSubsets,
                                   unsigned state_cap = kGfmStateCap) {
  auto p = prepare_dnf(a);
  return build_gfm(p.automaton, p.dnf, mode, state_cap);
}

}  // namespace tela
