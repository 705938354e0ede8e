#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <boost/rational.hpp>

#include "analysis.hpp"
#include "automaton.hpp"
#include "budget.hpp"
#include "detail/graph.hpp"
#include "determinize.hpp"
#include "error.hpp"
#include "limitdet.hpp"
#include "transforms.hpp"

namespace tela {

using Rational = boost::rational<std::int64_t>;

struct MdpChoice {
  unsigned action;  // index into Mdp::actions
  std::vector<std::pair<unsigned, Rational>> dist;
};

/// Labeled MDP. Each state carries one letter of the automaton alphabet.
struct Mdp {
  unsigned initial = 0;
  std::vector<unsigned> label;
  std::vector<std::string> actions;
  std::vector<std::vector<MdpChoice>> choices;

  unsigned state_count() const { return static_cast<unsigned>(label.size()); }

  unsigned action_id(const std::string& name) {
    auto it = std::find(actions.begin(), actions.end(), name);
    if (it != actions.end()) return static_cast<unsigned>(it - actions.begin());
    actions.push_back(name);
    return static_cast<unsigned>(actions.size() - 1);
  }

  /// Every state has an action, every action distribution sums to exactly 1.
  void validate() const {
    if (initial >= state_count()) throw PreconditionError("mdp: initial state out of range");
    for (unsigned s = 0; s < state_count(); ++s) {
      if (choices[s].empty()) throw PreconditionError("mdp: state " + std::to_string(s) + " has no action");
      for (const auto& c : choices[s]) {
        Rational total = 0;
        for (const auto& [t, p] : c.dist) {
          if (t >= state_count()) throw PreconditionError("mdp: successor out of range");
          if (p <= Rational(0)) throw PreconditionError("mdp: non-positive probability");
          total += p;
        }
        if (total != Rational(1)) throw PreconditionError("mdp: distribution does not sum to 1");
      }
    }
  }
};

// ---------------------------------------------------------------------------
// Text format

inline Mdp parse_mdp(std::string_view text) {
  Mdp m;
  std::optional<unsigned> n;
  std::vector<char> labeled;
  std::map<std::tuple<unsigned, unsigned, unsigned>, char> seen;
  std::map<std::pair<unsigned, unsigned>, std::size_t> choice_index;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    std::vector<std::pair<std::string, std::size_t>> toks;
    for (std::size_t i = 0; i < line.size();) {
      if (std::isspace(static_cast<unsigned char>(line[i]))) {
        ++i;
        continue;
      }
      std::size_t j = i;
      while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
      toks.emplace_back(std::string(line.substr(i, j - i)), i + 1);
      i = j;
    }
    if (toks.empty()) continue;
    auto fail = [&](std::size_t tok, const std::string& msg) -> void {
      throw ParseError(msg, line_no, tok < toks.size() ? toks[tok].second : 1);
    };
    auto num = [&](std::size_t tok) -> std::int64_t {
      if (tok >= toks.size()) fail(tok, "missing argument");
      const auto& s = toks[tok].first;
      if (s.empty() || s.size() > 12 || !std::all_of(s.begin(), s.end(), [](char c) { return std::isdigit(c); }))
        fail(tok, "expected a non-negative integer");
      return std::stoll(s);
    };
    auto state = [&](std::size_t tok) -> unsigned {
      if (!n) fail(tok, "`states` must come first");
      auto v = num(tok);
      if (v >= *n) fail(tok, "state out of range");
      return static_cast<unsigned>(v);
    };
    const std::string& kw = toks[0].first;
    if (kw == "states") {
      if (n) fail(0, "duplicate `states`");
      if (toks.size() != 2) fail(0, "expected `states N`");
      auto v = num(1);
      if (v == 0 || v > 1000000) fail(1, "state count out of range");
      n = static_cast<unsigned>(v);
      m.label.assign(*n, 0);
      labeled.assign(*n, 0);
      m.choices.assign(*n, {});
    } else if (kw == "initial") {
      if (toks.size() != 2) fail(0, "expected `initial i`");
      m.initial = state(1);
    } else if (kw == "label") {
      if (toks.size() != 3) fail(0, "expected `label i letter`");
      unsigned s = state(1);
      if (labeled[s]) fail(1, "duplicate label");
      auto l = num(2);
      if (l >= 256) fail(2, "letter out of range");
      m.label[s] = static_cast<unsigned>(l);
      labeled[s] = 1;
    } else if (kw == "trans") {
      if (toks.size() != 5) fail(0, "expected `trans i action j p/q`");
      unsigned s = state(1);
      unsigned a = m.action_id(toks[2].first);
      unsigned t = state(3);
      const auto& ps = toks[4].first;
      auto slash = ps.find('/');
      std::int64_t nu = 0, de = 1;
      try {
        std::size_t used = 0;
        nu = std::stoll(ps.substr(0, slash), &used);
        if (used != ps.substr(0, slash).size()) throw std::invalid_argument("p");
        if (slash != std::string::npos) {
          de = std::stoll(ps.substr(slash + 1), &used);
          if (used != ps.size() - slash - 1) throw std::invalid_argument("q");
        }
      } catch (const std::exception&) {
        fail(4, "malformed probability");
      }
      if (de <= 0 || nu <= 0 || nu > de) fail(4, "probability must lie in (0, 1]");
      if (seen.count({s, a, t})) fail(0, "duplicate transition");
      seen[{s, a, t}] = 1;
      auto [it, fresh] = choice_index.emplace(std::make_pair(s, a), m.choices[s].size());
      if (fresh) m.choices[s].push_back(MdpChoice{a, {}});
      m.choices[s][it->second].dist.emplace_back(t, Rational(nu, de));
    } else {
      fail(0, "unknown declaration `" + kw + "`");
    }
  }
  if (!n) throw ParseError("missing `states`", line_no, 1);
  for (unsigned s = 0; s < *n; ++s)
    if (!labeled[s]) throw ParseError("state " + std::to_string(s) + " has no label", line_no, 1);
  for (unsigned s = 0; s < *n; ++s) {
    if (m.choices[s].empty()) throw ParseError("state " + std::to_string(s) + " has no action", line_no, 1);
    for (const auto& c : m.choices[s]) {
      Rational total = 0;
      for (const auto& [t, p] : c.dist) total += p;
      if (total != Rational(1))
        throw ParseError("action `" + m.actions[c.action] + "` of state " + std::to_string(s) + " does not sum to 1",
                         line_no, 1);
    }
  }
  return m;
}

inline std::string print_mdp(const Mdp& m) {
  std::ostringstream os;
  os << "states " << m.state_count() << "\n";
  os << "initial " << m.initial << "\n";
  for (unsigned s = 0; s < m.state_count(); ++s) os << "label " << s << " " << m.label[s] << "\n";
  for (unsigned s = 0; s < m.state_count(); ++s)
    for (const auto& c : m.choices[s])
      for (const auto& [t, p] : c.dist)
        os << "trans " << s << " " << m.actions[c.action] << " " << t << " " << p.numerator() << "/"
           << p.denominator() << "\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Product

struct ProductChoice {
  unsigned action;   // MDP action index
  unsigned aut_dst;  // automaton successor chosen together with the action
  MarkSet marks;
  std::vector<std::pair<unsigned, double>> dist;
};

struct ProductMdp {
  std::vector<std::pair<unsigned, unsigned>> states;  // (MDP state, automaton state)
  std::vector<unsigned> initial;
  std::vector<std::vector<ProductChoice>> choices;
  Acc acceptance;
  unsigned mark_count = 0;

  unsigned state_count() const { return static_cast<unsigned>(states.size()); }
};

namespace detail {

inline ProductMdp build_product(const Mdp& m, const Tela& g, const std::vector<unsigned>& aut_init) {
  for (unsigned l : m.label)
    if (l >= g.letter_count()) throw PreconditionError("mdp label outside the automaton alphabet");
  ProductMdp p;
  p.acceptance = g.acceptance();
  p.mark_count = g.mark_count();
  std::unordered_map<std::uint64_t, unsigned> id;
  auto get = [&](unsigned s, unsigned q) {
    std::uint64_t key = (std::uint64_t{s} << 32) | q;
    auto [it, fresh] = id.emplace(key, p.state_count());
    if (fresh) {
      p.states.emplace_back(s, q);
      p.choices.emplace_back();
      budget_check(p.states.size());
    }
    return it->second;
  };
  for (unsigned q : aut_init) p.initial.push_back(get(m.initial, q));
  for (unsigned i = 0; i < p.state_count(); ++i) {
    auto [s, q] = p.states[i];
    for (const auto& c : m.choices[s])
      for (const auto& e : g.out(q)) {
        if (e.letter != m.label[s]) continue;
        ProductChoice pc{c.action, e.dst, e.marks, {}};
        for (const auto& [t, pr] : c.dist)
          pc.dist.emplace_back(get(t, e.dst), boost::rational_cast<double>(pr));
        p.choices[i].push_back(std::move(pc));
      }
  }
  return p;
}

}  // namespace detail

/// Synchronized product: from (s, q) the scheduler picks an MDP action and an
/// automaton transition (q, L(s), q'); the MDP successor s' yields (s', q').
inline ProductMdp mdp_product(const Mdp& m, const Tela& g) {
  if (g.initial().size() != 1) throw PreconditionError("mdp_product: automaton needs exactly one initial state");
  return detail::build_product(m, g, g.initial());
}

// ---------------------------------------------------------------------------
// End components

struct EndComponent {
  std::vector<unsigned> states;                // ascending
  std::vector<std::vector<unsigned>> choices;  // choice indices kept, per entry of `states`
};

namespace detail {

/// succ[s][c] lists the successors of choice c at state s. Only choices with
/// allowed[s][c] and states with active[s] are considered.
inline std::vector<EndComponent> mecs(const std::vector<std::vector<std::vector<unsigned>>>& succ,
                                      std::vector<std::vector<char>> allowed, std::vector<char> active) {
  const unsigned n = static_cast<unsigned>(succ.size());
  for (;;) {
    Adjacency adj(n);
    for (unsigned s = 0; s < n; ++s) {
      if (!active[s]) continue;
      for (unsigned c = 0; c < succ[s].size(); ++c)
        if (allowed[s][c])
          for (unsigned t : succ[s][c])
            if (active[t]) adj[s].push_back(t);
    }
    auto scc = tarjan(adj, &active);
    bool changed = false;
    for (unsigned s = 0; s < n; ++s) {
      if (!active[s]) continue;
      bool any = false;
      for (unsigned c = 0; c < succ[s].size(); ++c) {
        if (!allowed[s][c]) continue;
        bool inside = std::all_of(succ[s][c].begin(), succ[s][c].end(),
                                  [&](unsigned t) { return active[t] && scc.comp[t] == scc.comp[s]; });
        if (!inside) {
          allowed[s][c] = 0;
          changed = true;
        } else {
          any = true;
        }
      }
      if (!any) {
        active[s] = 0;
        changed = true;
      }
    }
    if (changed) continue;
    std::vector<EndComponent> out;
    for (const auto& members : scc.members) {
      if (!active[members.front()]) continue;
      EndComponent ec;
      ec.states = members;
      for (unsigned s : members) {
        std::vector<unsigned> cs;
        for (unsigned c = 0; c < succ[s].size(); ++c)
          if (allowed[s][c]) cs.push_back(c);
        ec.choices.push_back(std::move(cs));
      }
      out.push_back(std::move(ec));
    }
    std::sort(out.begin(), out.end(),
              [](const EndComponent& x, const EndComponent& y) { return x.states.front() < y.states.front(); });
    return out;
  }
}

inline std::vector<std::vector<std::vector<unsigned>>> successor_lists(const ProductMdp& p) {
  std::vector<std::vector<std::vector<unsigned>>> succ(p.state_count());
  for (unsigned s = 0; s < p.state_count(); ++s)
    for (const auto& c : p.choices[s]) {
      std::vector<unsigned> ts;
      for (const auto& [t, pr] : c.dist) ts.push_back(t);
      succ[s].push_back(std::move(ts));
    }
  return succ;
}

template <class Allow>
std::vector<EndComponent> product_mecs(const ProductMdp& p, Allow&& allow) {
  std::vector<std::vector<char>> allowed(p.state_count());
  for (unsigned s = 0; s < p.state_count(); ++s)
    for (const auto& c : p.choices[s]) allowed[s].push_back(allow(c) ? 1 : 0);
  return mecs(successor_lists(p), std::move(allowed), std::vector<char>(p.state_count(), 1));
}

}  // namespace detail

inline std::vector<EndComponent> mec_decomposition(const Mdp& m) {
  std::vector<std::vector<std::vector<unsigned>>> succ(m.state_count());
  std::vector<std::vector<char>> allowed(m.state_count());
  for (unsigned s = 0; s < m.state_count(); ++s)
    for (const auto& c : m.choices[s]) {
      std::vector<unsigned> ts;
      for (const auto& [t, pr] : c.dist) ts.push_back(t);
      succ[s].push_back(std::move(ts));
      allowed[s].push_back(1);
    }
  return detail::mecs(succ, std::move(allowed), std::vector<char>(m.state_count(), 1));
}

inline std::vector<EndComponent> mec_decomposition(const ProductMdp& p) {
  return detail::product_mecs(p, [](const ProductChoice&) { return true; });
}

// ---------------------------------------------------------------------------
// Quantitative analysis

inline constexpr double kValueIterationEpsilon = 1e-9;

/// Maximal probability to reach `target` from each state: interval value
/// iteration on the quotient where maximal end components outside the target
/// are collapsed, so lower and upper bounds meet.
inline std::vector<double> max_reach_probabilities(const ProductMdp& p, const std::vector<char>& target,
                                                   double eps = kValueIterationEpsilon) {
  const unsigned n = p.state_count();
  auto succ = detail::successor_lists(p);
  // States that can reach the target at all.
  detail::Adjacency adj(n);
  for (unsigned s = 0; s < n; ++s)
    for (const auto& c : succ[s]) adj[s].insert(adj[s].end(), c.begin(), c.end());
  std::vector<unsigned> tgt;
  for (unsigned s = 0; s < n; ++s)
    if (target[s]) tgt.push_back(s);
  auto can_reach = detail::forward_reach(detail::reverse(adj), tgt);

  // Collapse MECs among the undecided states.
  std::vector<char> undecided(n, 0);
  for (unsigned s = 0; s < n; ++s) undecided[s] = !target[s] && can_reach[s];
  std::vector<std::vector<char>> allowed(n);
  for (unsigned s = 0; s < n; ++s) allowed[s].assign(succ[s].size(), 1);
  auto ecs = detail::mecs(succ, allowed, undecided);
  std::vector<unsigned> rep(n);
  for (unsigned s = 0; s < n; ++s) rep[s] = s;
  for (const auto& ec : ecs)
    for (std::size_t j = 0; j < ec.states.size(); ++j) rep[ec.states[j]] = ec.states.front();

  struct QChoice {
    std::vector<std::pair<unsigned, double>> dist;
  };
  std::vector<std::vector<QChoice>> q(n);
  for (unsigned s = 0; s < n; ++s) {
    if (!undecided[s]) continue;
    for (const auto& c : p.choices[s]) {
      bool stays = std::all_of(c.dist.begin(), c.dist.end(), [&](const auto& d) { return rep[d.first] == rep[s]; });
      if (stays) continue;
      QChoice qc;
      for (const auto& [t, pr] : c.dist) qc.dist.emplace_back(rep[t], pr);
      q[rep[s]].push_back(std::move(qc));
    }
  }

  std::vector<double> lo(n, 0.0), hi(n, 0.0);
  for (unsigned s = 0; s < n; ++s) {
    if (target[s]) lo[s] = hi[s] = 1.0;
    else if (undecided[s]) hi[s] = 1.0;
  }
  std::vector<unsigned> order;
  for (unsigned s = 0; s < n; ++s)
    if (undecided[s] && rep[s] == s) order.push_back(s);
  for (std::size_t iter = 0;; ++iter) {
    double width = 0.0;
    for (unsigned s : order) {
      double best_lo = 0.0, best_hi = 0.0;
      for (const auto& c : q[s]) {
        double l = 0.0, h = 0.0;
        for (const auto& [t, pr] : c.dist) {
          l += pr * lo[t];
          h += pr * hi[t];
        }
        best_lo = std::max(best_lo, l);
        best_hi = std::max(best_hi, h);
      }
      lo[s] = std::max(lo[s], best_lo);
      hi[s] = std::min(hi[s], best_hi);
      width = std::max(width, hi[s] - lo[s]);
    }
    if (width < eps || iter > 10000000) break;
  }
  std::vector<double> out(n);
  for (unsigned s = 0; s < n; ++s) {
    unsigned r = rep[s];
    out[s] = target[s] ? 1.0 : std::clamp((lo[r] + hi[r]) / 2.0, 0.0, 1.0);
  }
  return out;
}

namespace detail {

/// States of end components, inside the product restricted to choices
/// avoiding `fin`, that contain a choice hitting each Inf set of the disjunct.
inline void mark_accepting_ecs(const ProductMdp& p, const DnfDisjunct& d, std::vector<char>& target) {
  auto ecs = product_mecs(p, [&](const ProductChoice& c) { return !c.marks.intersects(d.fin); });
  for (const auto& ec : ecs) {
    MarkSet seen;
    for (std::size_t j = 0; j < ec.states.size(); ++j)
      for (unsigned c : ec.choices[j]) seen |= p.choices[ec.states[j]][c].marks;
    bool ok = std::all_of(d.infs.begin(), d.infs.end(), [&](const MarkSet& s) { return seen.intersects(s); });
    if (ok)
      for (unsigned s : ec.states) target[s] = 1;
  }
}

inline double initial_value(const ProductMdp& p, const std::vector<double>& v) {
  double best = 0.0;
  for (unsigned s : p.initial) best = std::max(best, v[s]);
  return best;
}

}  // namespace detail

/// Maximal probability of the accepting paths of a product whose acceptance
/// is a single Inf atom.
inline double pr_max_buchi(const ProductMdp& p, double eps = kValueIterationEpsilon) {
  auto sets = as_gba(p.acceptance);
  if (!sets || sets->size() > 1) throw PreconditionError("pr_max_buchi: product acceptance must be Buchi");
  std::vector<char> target(p.state_count(), 0);
  if (sets->empty()) {
    for (const auto& ec : mec_decomposition(p))
      for (unsigned s : ec.states) target[s] = 1;
  } else {
    detail::mark_accepting_ecs(p, DnfDisjunct{MarkSet{}, {sets->front()}}, target);
  }
  return detail::initial_value(p, max_reach_probabilities(p, target, eps));
}

/// Pr^max of L(b) in m through the good-for-MDP limit-deterministic automaton.
/// BridgeMode::Singletons builds the variant with singleton bridges, which is
/// not good-for-MDP in general.
inline double pr_max_tela(const Mdp& m, const Tela& b, BridgeMode mode = BridgeMode::AllSubsets,
                          double eps = kValueIterationEpsilon, unsigned state_cap = kGfmStateCap) {
  auto g = build_gfm(b, mode, state_cap);
  return pr_max_buchi(mdp_product(m, g.automaton), eps);
}

/// Reference value through a deterministic automaton: accepting end components
/// per DNF disjunct of its acceptance, then maximal reachability.
inline double pr_max_reference(const Mdp& m, const Tela& b, double eps = kValueIterationEpsilon) {
  Tela d = determinize_product(b, true);
  auto prep = prepare_dnf(d);
  ProductMdp p = mdp_product(m, prep.automaton);
  std::vector<char> target(p.state_count(), 0);
  for (const auto& dj : prep.dnf.disjuncts) detail::mark_accepting_ecs(p, dj, target);
  return detail::initial_value(p, max_reach_probabilities(p, target, eps));
}

// ---------------------------------------------------------------------------
// Qualitative analysis

namespace detail {

inline ProductMdp qualitative_product(const Mdp& m, const Tela& a) {
  auto verdict = check_limit_deterministic(a);
  if (!verdict.limit_deterministic) {
    std::string msg = "automaton is not limit-deterministic; accepting cycle inside the nondeterministic part:";
    for (const auto& t : verdict.violation->cycle) msg += " " + std::to_string(t.src);
    if (!verdict.violation->cycle.empty()) msg += " " + std::to_string(verdict.violation->cycle.front().src);
    throw PreconditionError(msg);
  }
  return build_product(m, a, a.initial());
}

}  // namespace detail

/// Pr^max > 0 for a Fin-free limit-deterministic automaton: some end component
/// whose marks satisfy the (monotone) acceptance.
inline bool qualitative_positive_finless(const Mdp& m, const Tela& a) {
  if (a.acceptance().has_fin()) throw PreconditionError("qualitative_positive_finless: acceptance has Fin");
  ProductMdp p = detail::qualitative_product(m, a);
  for (const auto& ec : mec_decomposition(p)) {
    MarkSet seen;
    for (std::size_t j = 0; j < ec.states.size(); ++j)
      for (unsigned c : ec.choices[j]) seen |= p.choices[ec.states[j]][c].marks;
    if (evaluate(seen, p.acceptance)) return true;
  }
  return false;
}

/// Pr^max > 0 for a limit-deterministic automaton, one DNF disjunct at a time.
inline bool qualitative_positive_dnf(const Mdp& m, const Tela& a) {
  auto prep = prepare_dnf(a);
  ProductMdp p = detail::qualitative_product(m, prep.automaton);
  std::vector<char> target(p.state_count(), 0);
  for (const auto& d : prep.dnf.disjuncts) {
    detail::mark_accepting_ecs(p, d, target);
    if (std::find(target.begin(), target.end(), 1) != target.end()) return true;
  }
  return false;
}

inline bool qualitative_positive(const Mdp& m, const Tela& a) {
  return a.acceptance().has_fin() ? qualitative_positive_dnf(m, a) : qualitative_positive_finless(m, a);
}

}  // namespace tela
