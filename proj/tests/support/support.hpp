#pragma once

// Shared fixtures: small random automata for the oracle-backed tests, the
// alternating-letters automaton with its Markov chain, and language checks
// on sampled lasso words.

#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "tela/tela.hpp"

namespace tela::testing {

struct SmallParams {
  unsigned min_states = 1;
  unsigned max_states = 6;
  unsigned marks = 4;
  unsigned aps = 1;
  double density = 0.35;
  double mark_prob = 0.3;
  unsigned acc_depth = 3;
};

inline unsigned uniform(std::mt19937_64& rng, unsigned lo, unsigned hi) {
  return std::uniform_int_distribution<unsigned>(lo, hi)(rng);
}

inline bool coin(std::mt19937_64& rng, double p) { return std::bernoulli_distribution(p)(rng); }

inline MarkSet random_markset(std::mt19937_64& rng, unsigned marks) {
  MarkSet m;
  m.set(uniform(rng, 0, marks - 1));
  if (marks > 1 && coin(rng, 0.25)) m.set(uniform(rng, 0, marks - 1));
  return m;
}

inline Acc random_formula(std::mt19937_64& rng, unsigned marks, unsigned depth) {
  unsigned kind = uniform(rng, 0, depth == 0 ? 1 : 4);
  switch (kind) {
    case 0: return Acc::inf(random_markset(rng, marks));
    case 1: return Acc::fin(random_markset(rng, marks));
    case 2:
    case 3: {
      std::vector<Acc> parts;
      unsigned n = uniform(rng, 2, 3);
      for (unsigned i = 0; i < n; ++i) parts.push_back(random_formula(rng, marks, depth - 1));
      return kind == 2 ? Acc::make_and(std::move(parts)) : Acc::make_or(std::move(parts));
    }
    default: return coin(rng, 0.5) ? Acc::t() : Acc::f();
  }
}

inline Tela random_structure(std::mt19937_64& rng, const SmallParams& p) {
  const unsigned n = uniform(rng, p.min_states, p.max_states);
  Tela a(p.aps, n);
  for (unsigned q = 0; q < n; ++q)
    for (unsigned l = 0; l < a.letter_count(); ++l)
      for (unsigned d = 0; d < n; ++d) {
        if (!coin(rng, p.density)) continue;
        MarkSet m;
        for (unsigned j = 0; j < p.marks; ++j)
          if (coin(rng, p.mark_prob)) m.set(j);
        a.add_transition(q, l, d, m);
      }
  std::vector<unsigned> init{0};
  if (n > 1 && coin(rng, 0.2)) init.push_back(uniform(rng, 1, n - 1));
  a.set_initial(init);
  return a;
}

/// Arbitrary Emerson-Lei acceptance.
inline Tela random_tela(std::mt19937_64& rng, const SmallParams& p = {}) {
  Tela a = random_structure(rng, p);
  a.set_acceptance(random_formula(rng, p.marks, p.acc_depth), p.marks);
  return a;
}

/// Acceptance in DNF with at most `max_atoms` atoms: 1-3 disjuncts, each an
/// optional Fin atom and 1-2 Inf atoms.
inline Tela random_dnf_tela(std::mt19937_64& rng, const SmallParams& p = {}, unsigned max_atoms = 6) {
  Tela a = random_structure(rng, p);
  std::vector<Acc> disj;
  unsigned atoms = 0;
  const unsigned m = uniform(rng, 1, 3);
  for (unsigned i = 0; i < m && atoms + 1 <= max_atoms; ++i) {
    std::vector<Acc> parts;
    if (atoms + 2 <= max_atoms && coin(rng, 0.6)) {
      parts.push_back(Acc::fin(uniform(rng, 0, p.marks - 1)));
      ++atoms;
    }
    unsigned k = uniform(rng, 1, 2);
    for (unsigned j = 0; j < k && atoms < max_atoms; ++j, ++atoms) parts.push_back(Acc::inf(uniform(rng, 0, p.marks - 1)));
    if (parts.size() == 1 && parts[0].kind() == Acc::Kind::Fin && atoms < max_atoms) {
      parts.push_back(Acc::inf(uniform(rng, 0, p.marks - 1)));
      ++atoms;
    }
    disj.push_back(Acc::make_and(std::move(parts)));
  }
  a.set_acceptance(Acc::make_or(std::move(disj)), p.marks);
  return a;
}

/// Membership of sampled words: the brute-force oracle on `reference`, the
/// library's lasso check on `candidate`. Returns a description of the first
/// disagreement, or an empty string.
inline std::string language_mismatch(const Tela& reference, const Tela& candidate, std::size_t words,
                                     std::uint64_t seed) {
  auto ws = sample_lassos(reference, words / 2, seed);
  auto more = sample_lassos(candidate, words - words / 2, seed + 7919);
  ws.insert(ws.end(), more.begin(), more.end());
  for (const auto& w : ws) {
    bool expected = brute_force_accepts(reference, w);
    bool got = accepts(candidate, w);
    if (expected != got) {
      std::ostringstream os;
      os << "word";
      for (unsigned l : w.prefix) os << ' ' << l;
      os << " |";
      for (unsigned l : w.cycle) os << ' ' << l;
      os << ": reference " << expected << ", candidate " << got;
      return os.str();
    }
  }
  return {};
}

/// parse(print(a)) == a and printing is stable; empty string on success.
inline std::string hoa_roundtrip_problem(const Tela& a) {
  const std::string text = print_hoa(a);
  Tela back;
  try {
    back = parse_hoa(text);
  } catch (const std::exception& e) {
    return std::string("reparse failed: ") + e.what();
  }
  if (!(back == a)) return "reparsed automaton differs";
  if (print_hoa(back) != text) return "printing is not stable";
  return {};
}

// Alternating a/b letters. Letters: a1 = 0, a2 = 1, b1 = 2, b2 = 3.
// States 0..3 are a1b1 a1b2 a2b1 a2b2, states 4..7 are b1a1 b1a2 b2a1 b2a2.
// State x_i y_j reads x_i and moves to y_j z_1 or y_j z_2.
inline Tela alternating_automaton() {
  Tela a(2, 8);
  a.set_ap_names({"x0", "x1"});
  for (unsigned i = 0; i < 2; ++i)
    for (unsigned j = 0; j < 2; ++j) {
      const unsigned ab = 2 * i + j, ba = 4 + 2 * i + j;
      for (unsigned k = 0; k < 2; ++k) {
        a.add_transition(ab, i, 4 + 2 * j + k, MarkSet::single(0));
        a.add_transition(ba, 2 + i, 2 * j + k, MarkSet::single(0));
      }
    }
  a.set_initial({0, 1, 2, 3});
  a.set_acceptance(Acc::inf(0), 1);
  return a;
}

inline constexpr const char* kAlternatingChain =
    "states 4\n"
    "initial 0\n"
    "label 0 0\nlabel 1 1\nlabel 2 2\nlabel 3 3\n"
    "trans 0 go 2 1/2\ntrans 0 go 3 1/2\n"
    "trans 1 go 2 1/2\ntrans 1 go 3 1/2\n"
    "trans 2 go 0 1/2\ntrans 2 go 1 1/2\n"
    "trans 3 go 0 1/2\ntrans 3 go 1 1/2\n";

inline Mdp alternating_chain() { return parse_mdp(kAlternatingChain); }

/// Random MDP over `letters` with up to `max_states` states and 1-2 actions
/// per state; probabilities are halves or full.
inline Mdp random_mdp(std::mt19937_64& rng, unsigned max_states, unsigned letters) {
  Mdp m;
  const unsigned n = uniform(rng, 1, max_states);
  m.label.resize(n);
  m.choices.resize(n);
  for (unsigned s = 0; s < n; ++s) {
    m.label[s] = uniform(rng, 0, letters - 1);
    const unsigned acts = uniform(rng, 1, 2);
    for (unsigned k = 0; k < acts; ++k) {
      MdpChoice c{m.action_id(k == 0 ? "x" : "y"), {}};
      unsigned t1 = uniform(rng, 0, n - 1), t2 = uniform(rng, 0, n - 1);
      if (t1 == t2 || coin(rng, 0.3)) {
        c.dist.emplace_back(t1, Rational(1));
      } else {
        c.dist.emplace_back(t1, Rational(1, 2));
        c.dist.emplace_back(t2, Rational(1, 2));
      }
      m.choices[s].push_back(std::move(c));
    }
  }
  m.initial = 0;
  m.validate();
  return m;
}

}  // namespace tela::testing
