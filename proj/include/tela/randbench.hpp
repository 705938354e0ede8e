#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <boost/rational.hpp>

#include "acceptance.hpp"
#include "automaton.hpp"
#include "budget.hpp"
#include "determinize.hpp"
#include "error.hpp"
#include "transforms.hpp"

namespace tela {

using Rational = boost::rational<std::int64_t>;

enum class AccKind { RandomEl, Dnf };

inline std::string_view to_string(AccKind k) { return k == AccKind::RandomEl ? "random-el" : "dnf"; }

inline std::optional<AccKind> parse_acc_kind(std::string_view s) {
  if (s == "random-el") return AccKind::RandomEl;
  if (s == "dnf") return AccKind::Dnf;
  return std::nullopt;
}

struct RandomParams {
  unsigned n_states = 4;
  unsigned n_marks = 4;
  unsigned ap_count = 1;
  double edge_density = -1;  // negative: 3 / n_states
  double mark_prob = 0.2;
  AccKind acc = AccKind::RandomEl;
  std::uint64_t seed = 0;
};

inline constexpr unsigned kRandomMinStates = 4;
inline constexpr unsigned kRandomMaxStates = 50;
inline constexpr unsigned kRandomMaxMarks = 16;
inline constexpr std::size_t kRandomElMinLength = 2;
inline constexpr std::size_t kRandomElMaxLength = 21;

namespace detail {

inline Acc random_acc_tree(std::mt19937_64& rng, unsigned n_marks, unsigned depth) {
  std::uniform_int_distribution<int> kind(0, depth >= 4 ? 1 : 3);
  std::uniform_int_distribution<unsigned> mark(0, n_marks - 1);
  switch (kind(rng)) {
    case 0: return Acc::inf(mark(rng));
    case 1: return Acc::fin(mark(rng));
    case 2: {
      Acc l = random_acc_tree(rng, n_marks, depth + 1);
      return l & random_acc_tree(rng, n_marks, depth + 1);
    }
    default: {
      Acc l = random_acc_tree(rng, n_marks, depth + 1);
      return l | random_acc_tree(rng, n_marks, depth + 1);
    }
  }
}

/// 2-3 disjuncts, each with 2-3 Inf atoms and 0-1 Fin atoms, all marks distinct.
inline Acc random_dnf_acc(std::mt19937_64& rng, unsigned n_marks) {
  std::uniform_int_distribution<unsigned> two_three(2, 3), zero_one(0, 1);
  for (;;) {
    unsigned m = two_three(rng);
    std::vector<std::pair<unsigned, unsigned>> shape;
    unsigned total = 0;
    for (unsigned i = 0; i < m; ++i) {
      shape.emplace_back(two_three(rng), zero_one(rng));
      total += shape.back().first + shape.back().second;
    }
    if (total > n_marks) continue;
    std::vector<unsigned> marks(n_marks);
    for (unsigned i = 0; i < n_marks; ++i) marks[i] = i;
    std::shuffle(marks.begin(), marks.end(), rng);
    unsigned next = 0;
    std::vector<Acc> disj;
    for (auto [infs, fins] : shape) {
      std::vector<Acc> parts;
      for (unsigned j = 0; j < fins; ++j) parts.push_back(Acc::fin(marks[next++]));
      for (unsigned j = 0; j < infs; ++j) parts.push_back(Acc::inf(marks[next++]));
      disj.push_back(Acc::make_and(std::move(parts)));
    }
    return Acc::make_or(std::move(disj));
  }
}

inline bool has_branching(const Tela& a) {
  std::vector<char> seen(a.letter_count());
  for (unsigned q = 0; q < a.state_count(); ++q) {
    std::fill(seen.begin(), seen.end(), 0);
    for (const auto& e : a.out(q)) {
      if (seen[e.letter]) return true;
      seen[e.letter] = 1;
    }
  }
  return false;
}

}  // namespace detail

/// Random TELA: each (q, a, q') is a transition with probability
/// edge_density, each transition carries mark j with probability mark_prob.
/// Transition systems are redrawn until nondeterministic. State 0 is initial.
inline Tela random_tela(const RandomParams& p) {
  if (p.n_states < kRandomMinStates || p.n_states > kRandomMaxStates)
    throw PreconditionError("random_tela: state count must lie in [4, 50]");
  if (p.n_marks == 0 || p.n_marks > kRandomMaxMarks) throw PreconditionError("random_tela: mark count must lie in [1, 16]");
  if (p.ap_count > kMaxAps) throw PreconditionError("random_tela: too many atomic propositions");
  if (p.acc == AccKind::Dnf && p.n_marks < 4) throw PreconditionError("random_tela: dnf acceptance needs at least 4 marks");
  const double density = p.edge_density < 0 ? 3.0 / p.n_states : p.edge_density;
  if (density <= 0 || density > 1 || p.mark_prob < 0 || p.mark_prob > 1)
    throw PreconditionError("random_tela: probabilities must lie in [0, 1]");

  std::mt19937_64 rng(p.seed);
  std::bernoulli_distribution edge(density), mark(p.mark_prob);
  Tela a(p.ap_count);
  for (;;) {
    a = Tela(p.ap_count, p.n_states);
    for (unsigned q = 0; q < p.n_states; ++q)
      for (unsigned l = 0; l < a.letter_count(); ++l)
        for (unsigned d = 0; d < p.n_states; ++d) {
          if (!edge(rng)) continue;
          MarkSet m;
          for (unsigned j = 0; j < p.n_marks; ++j)
            if (mark(rng)) m.set(j);
          a.add_transition_unchecked(q, l, d, std::move(m));
        }
    if (detail::has_branching(a)) break;
  }
  a.set_initial({0});

  Acc acc = Acc::t();
  if (p.acc == AccKind::Dnf) {
    acc = detail::random_dnf_acc(rng, p.n_marks);
  } else {
    for (;;) {
      acc = detail::random_acc_tree(rng, p.n_marks, 0);
      auto dnf = to_dnf(acc, p.n_marks);
      const auto len = dnf.length();
      if (dnf.size() >= 2 && len >= kRandomElMinLength && len <= kRandomElMaxLength) break;
    }
  }
  a.set_acceptance(std::move(acc), p.n_marks);
  return a;
}

/// Pairs of transitions (q,a,q1), (q,a,q2) with q1 != q2, divided by the
/// number of states.
inline Rational nondeterminism_amount(const Tela& a) {
  if (a.state_count() == 0) return 0;
  std::int64_t pairs = 0;
  for (unsigned q = 0; q < a.state_count(); ++q) {
    std::map<unsigned, std::vector<unsigned>> targets;
    for (const auto& e : a.out(q)) targets[e.letter].push_back(e.dst);
    for (auto& [l, v] : targets) {
      std::sort(v.begin(), v.end());
      v.erase(std::unique(v.begin(), v.end()), v.end());
      const auto d = static_cast<std::int64_t>(v.size());
      pairs += d * (d - 1) / 2;
    }
  }
  return Rational(pairs, a.state_count());
}

/// The CNF blow-up family: hub state 0 with a loop on every letter and, for
/// each i < n, a gadget state i+1 entered on p0 with mark 2i and left on !p0
/// with mark 2i+1. Acceptance is the disjunction of Inf(2i) & Inf(2i+1).
inline Tela cnf_blowup_family(unsigned n) {
  if (n == 0) throw PreconditionError("cnf_blowup_family: n must be positive");
  Tela a(1, n + 1);
  a.set_ap_names({"a"});
  a.add_transition(0, 0, 0);
  a.add_transition(0, 1, 0);
  std::vector<Acc> disj;
  for (unsigned i = 0; i < n; ++i) {
    a.add_transition(0, 1, i + 1, MarkSet::single(2 * i));
    a.add_transition(i + 1, 0, 0, MarkSet::single(2 * i + 1));
    disj.push_back(Acc::inf(2 * i) & Acc::inf(2 * i + 1));
  }
  a.set_initial({0});
  a.set_acceptance(Acc::make_or(std::move(disj)), 2 * n);
  return a;
}

// ---------------------------------------------------------------------------
// Benchmark harness

/// Determinization pipelines compared by the harness: `product`,
/// `product-langcover`, or a GBA method name (determinize via that GBA).
inline const std::vector<std::string>& known_bench_methods() {
  static const std::vector<std::string> m{"product", "product-langcover", "cnf", "remfin_split", "split_remfin",
                                          "remfin_rewrite"};
  return m;
}

struct BenchConfig {
  std::size_t instances = 50;
  std::uint64_t seed = 1;
  RandomParams gen{};
  std::vector<std::string> methods{known_bench_methods()};
  double timeout_seconds = 10;
  std::size_t max_states = 200000;
  unsigned threads = 1;
  double hard_threshold = 0.5;
  unsigned family_max = 8;
  bool cross_validate = true;
  std::string report_path;
};

inline BenchConfig parse_bench_config(std::string_view text) {
  BenchConfig c;
  std::size_t line_no = 0, pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string line(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    auto trim = [](std::string s) {
      auto b = s.find_first_not_of(" \t\r");
      auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected key=value", line_no, 1);
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    const std::size_t col = eq + 2;
    auto to_u64 = [&]() -> std::uint64_t {
      try {
        std::size_t used = 0;
        auto v = std::stoull(value, &used);
        if (used == value.size()) return v;
      } catch (const std::exception&) {
      }
      throw ParseError("expected a non-negative integer for `" + key + "`", line_no, col);
    };
    auto to_double = [&]() -> double {
      try {
        std::size_t used = 0;
        double v = std::stod(value, &used);
        if (used == value.size()) return v;
      } catch (const std::exception&) {
      }
      throw ParseError("expected a number for `" + key + "`", line_no, col);
    };
    if (key == "instances") c.instances = to_u64();
    else if (key == "seed") c.seed = to_u64();
    else if (key == "states") c.gen.n_states = static_cast<unsigned>(to_u64());
    else if (key == "marks") c.gen.n_marks = static_cast<unsigned>(to_u64());
    else if (key == "aps") c.gen.ap_count = static_cast<unsigned>(to_u64());
    else if (key == "edge_density") c.gen.edge_density = to_double();
    else if (key == "mark_prob") c.gen.mark_prob = to_double();
    else if (key == "acc") {
      auto k = parse_acc_kind(value);
      if (!k) throw ParseError("acc must be random-el or dnf", line_no, col);
      c.gen.acc = *k;
    } else if (key == "methods") {
      c.methods.clear();
      std::stringstream ss(value);
      std::string m;
      while (std::getline(ss, m, ',')) {
        m = trim(m);
        const auto& known = known_bench_methods();
        if (std::find(known.begin(), known.end(), m) == known.end())
          throw ParseError("unknown method `" + m + "`", line_no, col);
        c.methods.push_back(m);
      }
      if (c.methods.empty()) throw ParseError("empty method list", line_no, col);
    } else if (key == "timeout") c.timeout_seconds = to_double();
    else if (key == "max_states") c.max_states = to_u64();
    else if (key == "threads") c.threads = std::max<unsigned>(1, static_cast<unsigned>(to_u64()));
    else if (key == "hard_threshold") c.hard_threshold = to_double();
    else if (key == "family_max") c.family_max = static_cast<unsigned>(to_u64());
    else if (key == "cross_validate") {
      if (value != "true" && value != "false") throw ParseError("expected true or false", line_no, col);
      c.cross_validate = value == "true";
    } else if (key == "report") c.report_path = value;
    else throw ParseError("unknown key `" + key + "`", line_no, 1);
  }
  return c;
}

enum class RunStatus { Ok, Timeout, Error };

struct MethodResult {
  RunStatus status = RunStatus::Ok;
  std::size_t states = 0;
  std::size_t marks = 0;
  std::optional<std::size_t> gba_marks;  // acceptance sets of the intermediate GBA
  double seconds = 0;
  std::string error;
};

struct InstanceResult {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  std::size_t input_states = 0;
  std::size_t dnf_length = 0;
  Rational nondeterminism = 0;
  std::vector<MethodResult> methods;
  std::size_t mismatches = 0;  // method pairs with different languages
  std::vector<std::string> mismatch_pairs;
};

struct FamilyRow {
  unsigned n = 0;
  std::vector<std::size_t> gba_marks;  // per GBA method in kAllGbaMethods order
};

struct BenchReport {
  BenchConfig config;
  std::vector<InstanceResult> instances;
  std::vector<FamilyRow> family;

  std::size_t mismatches() const {
    std::size_t n = 0;
    for (const auto& i : instances) n += i.mismatches;
    return n;
  }
};

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Median with timeouts counted as +infinity; NaN for an empty sample.
inline double median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  if (v.size() % 2) return v[h];
  if (std::isinf(v[h - 1]) || std::isinf(v[h])) return kInfinity;
  return (v[h - 1] + v[h]) / 2;
}

/// method / baseline, with 0 when only the baseline failed and infinity when
/// only the method failed; nullopt when both failed.
inline std::optional<double> bench_ratio(double method, double baseline) {
  const bool mi = std::isinf(method), bi = std::isinf(baseline);
  if (mi && bi) return std::nullopt;
  if (bi) return 0.0;
  if (mi) return kInfinity;
  if (baseline == 0) return method == 0 ? 1.0 : kInfinity;
  return method / baseline;
}

namespace detail {

inline Tela run_bench_method(const Tela& a, const std::string& method, MethodResult& r) {
  if (method == "product") return determinize_product(a, false);
  if (method == "product-langcover") return determinize_product(a, true);
  auto m = parse_gba_method(method);
  if (!m) throw PreconditionError("unknown method " + method);
  Tela g = to_gba(a, *m);
  r.gba_marks = g.mark_count();
  return safra_determinize(degeneralize(g));
}

inline InstanceResult run_instance(const BenchConfig& c, std::size_t index) {
  InstanceResult ir;
  ir.index = index;
  ir.seed = c.seed + index;
  RandomParams p = c.gen;
  p.seed = ir.seed;
  const Tela a = random_tela(p);
  ir.input_states = a.state_count();
  ir.dnf_length = prepare_dnf(a).dnf.length();
  ir.nondeterminism = nondeterminism_amount(a);
  std::vector<std::optional<Tela>> outputs;
  for (const auto& m : c.methods) {
    MethodResult r;
    Budget b;
    b.max_states = c.max_states;
    const auto start = std::chrono::steady_clock::now();
    b.deadline = start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                             std::chrono::duration<double>(c.timeout_seconds));
    std::optional<Tela> out;
    try {
      BudgetScope scope(b);
      out = run_bench_method(a, m, r);
      r.states = out->state_count();
      r.marks = out->mark_count();
    } catch (const BudgetExceeded&) {
      r.status = RunStatus::Timeout;
    } catch (const std::length_error&) {
      r.status = RunStatus::Timeout;
    } catch (const std::exception& e) {
      r.status = RunStatus::Error;
      r.error = e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    outputs.push_back(std::move(out));
    ir.methods.push_back(std::move(r));
  }
  if (c.cross_validate) {
    // Equality with the smallest output implies pairwise equality.
    std::optional<std::size_t> ref;
    for (std::size_t i = 0; i < outputs.size(); ++i)
      if (outputs[i] && (!ref || outputs[i]->state_count() < outputs[*ref]->state_count())) ref = i;
    for (std::size_t i = 0; i < outputs.size(); ++i) {
      if (!outputs[i] || i == *ref) continue;
      if (!language_equal_deterministic(*outputs[*ref], *outputs[i])) {
        ++ir.mismatches;
        ir.mismatch_pairs.push_back(c.methods[*ref] + "/" + c.methods[i]);
      }
    }
  }
  return ir;
}

inline std::string fmt_num(double v) {
  if (std::isnan(v)) return "-";
  if (std::isinf(v)) return "inf";
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

inline std::string fmt_rational(const Rational& r) {
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

inline double metric(const MethodResult& r, int which) {
  if (r.status != RunStatus::Ok) return kInfinity;
  switch (which) {
    case 0: return static_cast<double>(r.states);
    case 1: return r.seconds;
    default: return static_cast<double>(r.marks);
  }
}

inline const char* kMetricNames[] = {"states", "seconds", "marks"};

/// Instances grouped by DNF length bucket and nondeterminism bucket.
inline std::string group_key(const InstanceResult& ir) {
  std::string len = ir.dnf_length <= 5 ? "2-5" : ir.dnf_length <= 10 ? "6-10" : "11-21";
  const double nd = boost::rational_cast<double>(ir.nondeterminism);
  std::string det = nd < 1 ? "<1" : nd < 2 ? "1-2" : ">=2";
  return "dnf=" + len + " nondet=" + det;
}

}  // namespace detail

inline BenchReport run_benchmark(const BenchConfig& c) {
  BenchReport rep;
  rep.config = c;
  rep.instances.resize(c.instances);
  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::exception_ptr failure;
  auto worker = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= c.instances) return;
      try {
        rep.instances[i] = detail::run_instance(c, i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const unsigned n_threads = std::max<unsigned>(1, std::min<unsigned>(c.threads, static_cast<unsigned>(c.instances)));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  for (unsigned n = 1; n <= c.family_max; ++n) {
    FamilyRow row{n, {}};
    const Tela a = cnf_blowup_family(n);
    for (GbaMethod m : kAllGbaMethods) row.gba_marks.push_back(to_gba(a, m).mark_count());
    rep.family.push_back(std::move(row));
  }
  return rep;
}

/// Machine-readable report: a version header followed by key/value lines.
inline std::string format_report(const BenchReport& r) {
  const auto& c = r.config;
  std::ostringstream o;
  o << "tela-bench-report v1\n";
  o << "config instances=" << c.instances << " seed=" << c.seed << " states=" << c.gen.n_states
    << " marks=" << c.gen.n_marks << " aps=" << c.gen.ap_count << " acc=" << to_string(c.gen.acc)
    << " timeout=" << detail::fmt_num(c.timeout_seconds) << " max_states=" << c.max_states << "\n";
  o << "methods";
  for (const auto& m : c.methods) o << ' ' << m;
  o << "\n";
  for (const auto& ir : r.instances) {
    o << "instance " << ir.index << " seed=" << ir.seed << " states=" << ir.input_states
      << " dnf_length=" << ir.dnf_length << " nondet=" << detail::fmt_rational(ir.nondeterminism)
      << " mismatches=" << ir.mismatches << "\n";
    for (std::size_t j = 0; j < ir.methods.size(); ++j) {
      const auto& m = ir.methods[j];
      o << "result " << ir.index << ' ' << c.methods[j] << ' ';
      if (m.status == RunStatus::Ok)
        o << "ok states=" << m.states << " marks=" << m.marks;
      else
        o << (m.status == RunStatus::Timeout ? "timeout" : "error");
      o << " gba_marks=" << (m.gba_marks ? std::to_string(*m.gba_marks) : "-");
      o << " seconds=" << std::fixed << std::setprecision(6) << m.seconds << std::defaultfloat << "\n";
    }
  }
  // Medians over all instances and over hard ones (baseline slower than the threshold).
  for (int hard = 0; hard < 2; ++hard) {
    for (std::size_t j = 0; j < c.methods.size(); ++j) {
      o << (hard ? "median-hard " : "median ") << c.methods[j];
      for (int w = 0; w < 3; ++w) {
        std::vector<double> v;
        for (const auto& ir : r.instances) {
          if (hard && detail::metric(ir.methods[0], 1) <= c.hard_threshold) continue;
          v.push_back(detail::metric(ir.methods[j], w));
        }
        o << ' ' << detail::kMetricNames[w] << '=' << detail::fmt_num(median(v));
      }
      o << "\n";
    }
  }
  std::map<std::string, std::vector<const InstanceResult*>> groups;
  for (const auto& ir : r.instances) groups[detail::group_key(ir)].push_back(&ir);
  for (const auto& [key, members] : groups) {
    for (std::size_t j = 1; j < c.methods.size(); ++j) {
      o << "ratio " << key << " count=" << members.size() << ' ' << c.methods[j] << '/' << c.methods[0];
      for (int w = 0; w < 3; ++w) {
        std::vector<double> v;
        for (const auto* ir : members) {
          auto q = bench_ratio(detail::metric(ir->methods[j], w), detail::metric(ir->methods[0], w));
          if (q) v.push_back(*q);
        }
        o << ' ' << detail::kMetricNames[w] << '=' << detail::fmt_num(median(v));
      }
      o << "\n";
    }
  }
  for (const auto& row : r.family) {
    o << "family n=" << row.n;
    for (std::size_t j = 0; j < row.gba_marks.size(); ++j)
      o << ' ' << to_string(kAllGbaMethods[j]) << '=' << row.gba_marks[j];
    o << "\n";
  }
  o << "mismatches " << r.mismatches() << "\n";
  for (const auto& ir : r.instances)
    for (const auto& p : ir.mismatch_pairs) o << "mismatch " << ir.index << ' ' << p << "\n";
  return o.str();
}

/// Human-readable summary table of the medians.
inline std::string format_table(const BenchReport& r) {
  std::ostringstream o;
  o << std::left << std::setw(20) << "method" << std::right << std::setw(12) << "states" << std::setw(12) << "seconds"
    << std::setw(12) << "marks" << std::setw(10) << "timeouts" << "\n";
  for (std::size_t j = 0; j < r.config.methods.size(); ++j) {
    o << std::left << std::setw(20) << r.config.methods[j] << std::right;
    for (int w = 0; w < 3; ++w) {
      std::vector<double> v;
      for (const auto& ir : r.instances) v.push_back(detail::metric(ir.methods[j], w));
      o << std::setw(12) << detail::fmt_num(median(v));
    }
    std::size_t to = 0;
    for (const auto& ir : r.instances) to += ir.methods[j].status != RunStatus::Ok;
    o << std::setw(10) << to << "\n";
  }
  o << "language mismatches: " << r.mismatches() << "\n";
  return o.str();
}

}  // namespace tela
