#pragma once

#include <algorithm>
#include <string>
#include <tuple>
#include <vector>

#include "acceptance.hpp"
#include "bitset.hpp"
#include "detail/graph.hpp"
#include "error.hpp"

namespace tela {

inline constexpr unsigned kMaxAps = 8;

struct Edge {
  unsigned letter;
  unsigned dst;
  MarkSet marks;

  friend bool operator==(const Edge&, const Edge&) = default;
  friend bool operator<(const Edge& a, const Edge& b) {
    return std::tie(a.letter, a.dst, a.marks) < std::tie(b.letter, b.dst, b.marks);
  }
};

struct Transition {
  unsigned src;
  unsigned letter;
  unsigned dst;
  MarkSet marks;

  friend bool operator==(const Transition&, const Transition&) = default;
};

/// Ultimately periodic word prefix . cycle^omega, as letter indices.
struct LassoWord {
  std::vector<unsigned> prefix;
  std::vector<unsigned> cycle;

  friend bool operator==(const LassoWord&, const LassoWord&) = default;
};

/// Run of the shape prefix . cycle^omega.
struct Lasso {
  std::vector<Transition> prefix;
  std::vector<Transition> cycle;

  LassoWord word() const {
    LassoWord w;
    for (const auto& t : prefix) w.prefix.push_back(t.letter);
    for (const auto& t : cycle) w.cycle.push_back(t.letter);
    return w;
  }

  MarkSet cycle_marks() const {
    MarkSet m;
    for (const auto& t : cycle) m |= t.marks;
    return m;
  }
};

/// Transition-based Emerson-Lei automaton over the explicit alphabet 2^AP.
/// Letter bit i is the value of atomic proposition i.
class Tela {
 public:
  explicit Tela(unsigned ap_count = 0, unsigned states = 0) : out_(states) {
    if (ap_count > kMaxAps) throw PreconditionError("too many atomic propositions");
    ap_names_.reserve(ap_count);
    for (unsigned i = 0; i < ap_count; ++i) ap_names_.push_back("p" + std::to_string(i));
  }

  unsigned ap_count() const { return static_cast<unsigned>(ap_names_.size()); }
  unsigned letter_count() const { return 1U << ap_count(); }
  const std::vector<std::string>& ap_names() const { return ap_names_; }
  void set_ap_names(std::vector<std::string> names) {
    if (names.size() != ap_names_.size()) throw PreconditionError("AP name count mismatch");
    ap_names_ = std::move(names);
  }

  unsigned state_count() const { return static_cast<unsigned>(out_.size()); }
  unsigned add_state() {
    out_.emplace_back();
    return state_count() - 1;
  }
  void add_states(unsigned n) { out_.resize(out_.size() + n); }

  const std::vector<Edge>& out(unsigned q) const { return out_[q]; }

  /// Adds a transition unless an identical one exists.
  void add_transition(unsigned src, unsigned letter, unsigned dst, MarkSet marks = {}) {
    check_edge(src, letter, dst);
    Edge e{letter, dst, std::move(marks)};
    auto& v = out_[src];
    if (std::find(v.begin(), v.end(), e) == v.end()) v.push_back(std::move(e));
  }

  /// For constructions that cannot produce duplicates.
  void add_transition_unchecked(unsigned src, unsigned letter, unsigned dst, MarkSet marks = {}) {
    out_[src].push_back(Edge{letter, dst, std::move(marks)});
  }

  std::vector<Edge>& mutable_out(unsigned q) { return out_[q]; }

  std::size_t transition_count() const {
    std::size_t n = 0;
    for (const auto& v : out_) n += v.size();
    return n;
  }

  std::vector<Transition> transitions() const {
    std::vector<Transition> ts;
    for (unsigned q = 0; q < state_count(); ++q)
      for (const auto& e : out_[q]) ts.push_back({q, e.letter, e.dst, e.marks});
    return ts;
  }

  const std::vector<unsigned>& initial() const { return initial_; }
  void set_initial(std::vector<unsigned> init) {
    std::sort(init.begin(), init.end());
    init.erase(std::unique(init.begin(), init.end()), init.end());
    for (unsigned q : init)
      if (q >= state_count()) throw PreconditionError("initial state out of range");
    initial_ = std::move(init);
  }
  void add_initial(unsigned q) {
    auto v = initial_;
    v.push_back(q);
    set_initial(std::move(v));
  }

  const Acc& acceptance() const { return acc_; }
  unsigned mark_count() const { return mark_count_; }
  void set_acceptance(Acc acc, unsigned mark_count) {
    if (acc.used_marks().bound() > mark_count) throw PreconditionError("acceptance references undeclared mark");
    acc_ = std::move(acc);
    mark_count_ = mark_count;
  }

  /// Union of the marks over all transitions.
  MarkSet used_marks() const {
    MarkSet m;
    for (const auto& v : out_)
      for (const auto& e : v) m |= e.marks;
    return m;
  }

  /// Throws PreconditionError if some transition carries an undeclared mark.
  void validate() const {
    if (used_marks().bound() > mark_count_) throw PreconditionError("transition carries undeclared mark");
    if (acc_.used_marks().bound() > mark_count_) throw PreconditionError("acceptance references undeclared mark");
  }

  detail::Adjacency adjacency() const {
    detail::Adjacency adj(state_count());
    for (unsigned q = 0; q < state_count(); ++q) {
      for (const auto& e : out_[q]) adj[q].push_back(e.dst);
      std::sort(adj[q].begin(), adj[q].end());
      adj[q].erase(std::unique(adj[q].begin(), adj[q].end()), adj[q].end());
    }
    return adj;
  }

  /// Edges sorted by (letter, target, marks), duplicates removed.
  void canonicalize() {
    for (auto& v : out_) {
      std::sort(v.begin(), v.end());
      v.erase(std::unique(v.begin(), v.end()), v.end());
    }
  }

  friend bool operator==(const Tela& a, const Tela& b) {
    if (a.ap_names_ != b.ap_names_ || a.initial_ != b.initial_ || a.mark_count_ != b.mark_count_ ||
        !(a.acc_ == b.acc_) || a.out_.size() != b.out_.size())
      return false;
    for (std::size_t q = 0; q < a.out_.size(); ++q) {
      auto x = a.out_[q], y = b.out_[q];
      std::sort(x.begin(), x.end());
      std::sort(y.begin(), y.end());
      if (x != y) return false;
    }
    return true;
  }

 private:
  void check_edge(unsigned src, unsigned letter, unsigned dst) const {
    if (src >= state_count() || dst >= state_count()) throw PreconditionError("transition endpoint out of range");
    if (letter >= letter_count()) throw PreconditionError("letter out of range");
  }

  std::vector<std::string> ap_names_;
  std::vector<std::vector<Edge>> out_;
  std::vector<unsigned> initial_;
  Acc acc_ = Acc::t();
  unsigned mark_count_ = 0;
};

/// Same alphabet and AP names as `a`, no states.
inline Tela empty_like(const Tela& a) {
  Tela r(a.ap_count());
  r.set_ap_names(a.ap_names());
  return r;
}

inline bool is_deterministic(const Tela& a) {
  if (a.initial().size() != 1) return false;
  std::vector<char> seen(a.letter_count());
  for (unsigned q = 0; q < a.state_count(); ++q) {
    std::fill(seen.begin(), seen.end(), 0);
    for (const auto& e : a.out(q)) {
      if (seen[e.letter]) return false;
      seen[e.letter] = 1;
    }
  }
  return true;
}

inline bool is_complete(const Tela& a) {
  if (a.initial().empty()) return false;
  std::vector<char> seen(a.letter_count());
  for (unsigned q = 0; q < a.state_count(); ++q) {
    std::fill(seen.begin(), seen.end(), 0);
    unsigned n = 0;
    for (const auto& e : a.out(q))
      if (!seen[e.letter]) {
        seen[e.letter] = 1;
        ++n;
      }
    if (n != a.letter_count()) return false;
  }
  return true;
}

/// Copy of `a` where every transition additionally carries a fresh mark
/// (index = old mark count). Returns the new mark index through `all_mark`.
inline Tela with_all_mark(const Tela& a, unsigned& all_mark) {
  Tela r = a;
  all_mark = a.mark_count();
  for (unsigned q = 0; q < r.state_count(); ++q)
    for (auto& e : r.mutable_out(q)) e.marks.set(all_mark);
  r.set_acceptance(a.acceptance(), a.mark_count() + 1);
  return r;
}

/// Language-preserving completion by a fresh rejecting sink. Returns `a`
/// unchanged when already complete. If the acceptance holds for the empty
/// markset, original transitions gain a fresh mark that is required infinitely often.
inline Tela complete(const Tela& a) {
  if (is_complete(a)) return a;
  Tela r = a;
  if (evaluate(MarkSet{}, a.acceptance())) {
    unsigned all = 0;
    r = with_all_mark(a, all);
    r.set_acceptance(fold_constants(a.acceptance() & Acc::inf(all)), all + 1);
  }
  unsigned sink = r.add_state();
  for (unsigned q = 0; q < r.state_count(); ++q) {
    std::vector<char> seen(r.letter_count());
    for (const auto& e : r.out(q)) seen[e.letter] = 1;
    for (unsigned l = 0; l < r.letter_count(); ++l)
      if (!seen[l]) r.add_transition_unchecked(q, l, sink);
  }
  if (r.initial().empty()) r.set_initial({sink});
  return r;
}

/// SCCs ordered by their smallest state.
inline std::vector<StateSet> sccs(const Tela& a) {
  auto res = detail::tarjan(a.adjacency());
  std::vector<StateSet> out;
  for (const auto& m : res.members) {
    StateSet s;
    for (unsigned q : m) s.set(q);
    out.push_back(std::move(s));
  }
  std::sort(out.begin(), out.end(), [](const StateSet& x, const StateSet& y) { return x.front() < y.front(); });
  return out;
}

inline StateSet reachable(const Tela& a) {
  auto seen = detail::forward_reach(a.adjacency(), a.initial());
  StateSet s;
  for (unsigned q = 0; q < seen.size(); ++q)
    if (seen[q]) s.set(q);
  return s;
}

/// Sub-automaton induced by `keep`, states renumbered in ascending order.
inline Tela restrict_states(const Tela& a, const StateSet& keep) {
  std::vector<unsigned> id(a.state_count(), detail::kNone);
  unsigned n = 0;
  keep.for_each([&](unsigned q) {
    if (q < a.state_count()) id[q] = n++;
  });
  Tela r = empty_like(a);
  r.add_states(n);
  for (unsigned q = 0; q < a.state_count(); ++q) {
    if (id[q] == detail::kNone) continue;
    for (const auto& e : a.out(q))
      if (id[e.dst] != detail::kNone) r.add_transition_unchecked(id[q], e.letter, id[e.dst], e.marks);
  }
  std::vector<unsigned> init;
  for (unsigned q : a.initial())
    if (id[q] != detail::kNone) init.push_back(id[q]);
  r.set_initial(std::move(init));
  r.set_acceptance(a.acceptance(), a.mark_count());
  return r;
}

/// Letter as an HOA label over AP indices, e.g. `0&!1`; `t` without APs.
inline std::string letter_label(unsigned letter, unsigned ap_count) {
  if (ap_count == 0) return "t";
  std::string s;
  for (unsigned i = 0; i < ap_count; ++i) {
    if (i) s += '&';
    if (!((letter >> i) & 1U)) s += '!';
    s += std::to_string(i);
  }
  return s;
}

}  // namespace tela
