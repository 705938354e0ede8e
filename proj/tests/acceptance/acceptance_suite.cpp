// Acceptance criteria 1-11. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "support/support.hpp"

using namespace tela;
using tela::testing::SmallParams;

namespace {

constexpr double kProbabilityTolerance = 1e-6;
constexpr double kEmptinessBudgetSeconds = 60;
constexpr double kDeterminizationBudgetSeconds = 600;
constexpr std::size_t kWordsPerInstance = 20;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = true;
  std::string detail;
  std::vector<std::string> problems;

  void fail(const std::string& why) {
    pass = false;
    if (problems.size() < 5) problems.push_back(why);
  }
};

// Every automaton produced while checking criteria 1-9 is round-tripped
// through HOA for criterion 10.
struct RoundTrip {
  std::size_t checked = 0;
  std::vector<std::string> problems;
} roundtrip;

std::size_t roundtrip_failures = 0;

void record(const Tela& a, const std::string& where) {
  std::size_t before = roundtrip.problems.size();
  auto p = testing::hoa_roundtrip_problem(a);
  ++roundtrip.checked;
  if (!p.empty()) {
    ++roundtrip_failures;
    if (before < 5) roundtrip.problems.push_back(where + ": " + p);
  }
}

std::string fmt(double v, int prec = 3) {
  std::ostringstream os;
  os.precision(prec);
  os << std::fixed << v;
  return os.str();
}

// ---------------------------------------------------------------------------

Outcome criterion1() {
  Outcome o;
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1001);
  const std::size_t instances = 500;
  std::size_t disagreements = 0, nonempty = 0;
  for (std::size_t i = 0; i < instances; ++i) {
    SmallParams p;
    p.marks = testing::uniform(rng, 1, 6);
    p.max_states = 6;
    p.acc_depth = testing::uniform(rng, 1, 3);
    Tela a = testing::random_tela(rng, p);
    record(a, "c1 input " + std::to_string(i));
    const bool fast = is_empty(a), slow = brute_force_empty(a);
    if (!fast) ++nonempty;
    if (fast != slow) {
      ++disagreements;
      o.fail("instance " + std::to_string(i) + ": is_empty=" + std::to_string(fast));
      continue;
    }
    if (!fast) {
      auto lasso = find_accepting_lasso(a);
      if (!lasso || !brute_force_accepts(a, lasso->word())) o.fail("instance " + std::to_string(i) + ": bad witness");
    }
  }
  const double secs = seconds_since(t0);
  if (secs >= kEmptinessBudgetSeconds) o.fail("runtime " + fmt(secs) + "s");
  o.detail = std::to_string(instances) + " instances (" + std::to_string(nonempty) + " non-empty), " +
             std::to_string(disagreements) + " disagreements, " + fmt(secs) + "s < 60s";
  return o;
}

// Deterministic complete automaton with random marks.
Tela random_deterministic(std::mt19937_64& rng, unsigned max_states, unsigned marks) {
  const unsigned n = testing::uniform(rng, 1, max_states);
  Tela a(1, n);
  for (unsigned q = 0; q < n; ++q)
    for (unsigned l = 0; l < 2; ++l) {
      MarkSet m;
      for (unsigned j = 0; j < marks; ++j)
        if (testing::coin(rng, 0.3)) m.set(j);
      a.add_transition(q, l, testing::uniform(rng, 0, n - 1), m);
    }
  a.set_initial({0});
  a.set_acceptance(testing::random_formula(rng, marks, 2), marks);
  return a;
}

Tela random_gba(std::mt19937_64& rng, unsigned max_states) {
  SmallParams p;
  p.max_states = max_states;
  p.marks = 3;
  Tela a = testing::random_structure(rng, p);
  std::vector<MarkSet> sets;
  const unsigned k = testing::uniform(rng, 0, 2);
  for (unsigned j = 0; j < k; ++j) sets.push_back(MarkSet::single(testing::uniform(rng, 0, 2)));
  a.set_acceptance(gba_formula(sets), 3);
  return a;
}

Outcome criterion2() {
  Outcome o;
  const std::size_t instances = 50;
  std::size_t words_checked = 0;
  std::mt19937_64 rng(2002);
  // Membership with a union of references.
  auto check_union = [&](const std::string& what, std::size_t i, const std::vector<const Tela*>& refs,
                         const Tela& candidate) {
    auto words = sample_lassos(candidate, kWordsPerInstance / 2, 31 * i + 1);
    for (const Tela* r : refs) {
      auto more = sample_lassos(*r, kWordsPerInstance / 2 / refs.size() + 1, 17 * i + 3);
      words.insert(words.end(), more.begin(), more.end());
    }
    while (words.size() < kWordsPerInstance) {
      auto more = sample_lassos(candidate, 1, 97 * i + words.size());
      words.insert(words.end(), more.begin(), more.end());
    }
    for (const auto& w : words) {
      bool expected = false;
      for (const Tela* r : refs) expected = expected || brute_force_accepts(*r, w);
      ++words_checked;
      if (accepts(candidate, w) != expected) {
        o.fail(what + " instance " + std::to_string(i));
        return;
      }
    }
  };

  SmallParams p;
  p.max_states = 6;
  p.marks = 4;
  for (std::size_t i = 0; i < instances; ++i) {
    // split: the union of the parts is the language.
    Tela a = testing::random_tela(rng, p);
    auto parts = split(a);
    std::vector<const Tela*> refs;
    for (const auto& t : parts) {
      refs.push_back(&t);
      record(t, "c2 split part");
    }
    check_union("split (parts vs input)", i, refs, a);

    // remove_fin and remove_fin_gba on DNF inputs.
    Tela d = testing::random_dnf_tela(rng, p);
    record(d, "c2 dnf input");
    auto prep = prepare_dnf(d);
    Tela rf = remove_fin(prep.automaton, prep.dnf);
    Tela rg = remove_fin_gba(prep.automaton, prep.dnf);
    record(rf, "c2 remove_fin");
    record(rg, "c2 remove_fin_gba");
    if (rf.acceptance().has_fin()) o.fail("remove_fin output has Fin");
    if (!as_gba(rg.acceptance())) o.fail("remove_fin_gba output is not generalized Buchi");
    check_union("remove_fin", i, {&d}, rf);
    check_union("remove_fin_gba", i, {&d}, rg);

    // sum and sum_gba of complete automata.
    SmallParams q = p;
    q.max_states = 3;
    Tela a0 = complete(testing::random_tela(rng, q)), a1 = complete(testing::random_tela(rng, q));
    Tela s = sum(a0, a1);
    record(s, "c2 sum");
    check_union("sum", i, {&a0, &a1}, s);
    Tela g0 = complete(random_gba(rng, 3)), g1 = complete(random_gba(rng, 3));
    Tela sg = sum_gba(g0, g1);
    record(sg, "c2 sum_gba");
    if (!as_gba(sg.acceptance())) o.fail("sum_gba output is not generalized Buchi");
    check_union("sum_gba", i, {&g0, &g1}, sg);

    // Disjunctive product of complete automata, conjunctive product of
    // deterministic ones.
    Tela c0 = complete(testing::random_tela(rng, q)), c1 = complete(testing::random_tela(rng, q));
    Tela po = product(c0, c1, Combinator::Or);
    record(po, "c2 product or");
    check_union("product(or)", i, {&c0, &c1}, po);
    Tela d0 = random_deterministic(rng, 3, 3), d1 = random_deterministic(rng, 3, 3);
    Tela pa = product(d0, d1, Combinator::And);
    record(pa, "c2 product and");
    auto words = sample_lassos(pa, kWordsPerInstance, 5 * i + 11);
    for (const auto& w : words) {
      ++words_checked;
      if (accepts(pa, w) != (brute_force_accepts(d0, w) && brute_force_accepts(d1, w))) {
        o.fail("product(and) instance " + std::to_string(i));
        break;
      }
    }
  }
  o.detail = std::to_string(instances) + " instances per contract, " + std::to_string(words_checked) +
             " word checks against the oracle";
  return o;
}

Outcome criterion3() {
  Outcome o;
  std::ostringstream marks_line;
  for (unsigned n = 1; n <= 8; ++n) {
    const Tela a = cnf_blowup_family(n);
    record(a, "c3 family");
    std::vector<Tela> outs;
    for (GbaMethod m : kAllGbaMethods) {
      outs.push_back(to_gba(a, m));
      record(outs.back(), "c3 to_gba");
    }
    const std::size_t cnf_marks = outs[0].mark_count();
    marks_line << " n=" << n << ":" << cnf_marks;
    if (cnf_marks != (std::size_t{1} << n)) o.fail("n=" + std::to_string(n) + " cnf marks " + std::to_string(cnf_marks));
    for (std::size_t j = 1; j < outs.size(); ++j)
      if (outs[j].mark_count() > 2)
        o.fail("n=" + std::to_string(n) + " " + std::string(to_string(kAllGbaMethods[j])) + " marks " +
               std::to_string(outs[j].mark_count()));
    if (n <= 4) {
      std::vector<Tela> dets{determinize_product(a, false)};
      for (const auto& g : outs) dets.push_back(safra_determinize(degeneralize(g)));
      for (const auto& d : dets) record(d, "c3 determinized");
      for (std::size_t x = 0; x < dets.size(); ++x)
        for (std::size_t y = x + 1; y < dets.size(); ++y)
          if (!language_equal_deterministic(dets[x], dets[y]))
            o.fail("n=" + std::to_string(n) + " outputs " + std::to_string(x) + "/" + std::to_string(y) + " differ");
    } else {
      auto words = sample_lassos(a, 40, n);
      for (const auto& w : words) {
        const bool expected = accepts(a, w);
        for (const auto& g : outs)
          if (accepts(g, w) != expected) {
            o.fail("n=" + std::to_string(n) + " sampled word disagrees");
            break;
          }
      }
    }
  }
  o.detail = "cnf marks" + marks_line.str() + "; copy-based <= 2; n<=4 pairwise equal by containment";
  return o;
}

Outcome criterion4() {
  Outcome o;
  const auto t0 = Clock::now();
  std::mt19937_64 rng(4004);
  SmallParams p;
  p.min_states = 2;
  p.max_states = 4;
  p.marks = 4;
  p.density = 0.45;
  const std::size_t instances = 30;
  std::size_t comparisons = 0, skipped_langcover = 0, largest = 0;
  for (std::size_t i = 0; i < instances; ++i) {
    // Non-empty and nondeterministic inputs only.
    Tela a(1);
    for (;;) {
      a = i % 2 == 0 ? testing::random_dnf_tela(rng, p, 6) : testing::random_tela(rng, p);
      if (to_dnf(a.acceptance(), a.mark_count()).length() <= 6 && !is_deterministic(a) && !is_empty(a)) break;
    }
    record(a, "c4 input");
    std::vector<Tela> outs;
    ProductDeterminizeStats st;
    outs.push_back(determinize_product(a, false));
    outs.push_back(determinize_product(a, true, &st));
    skipped_langcover += st.skipped;
    for (GbaMethod m : kAllGbaMethods) outs.push_back(determinize_via_gba(a, m));
    for (const auto& d : outs) {
      record(d, "c4 output");
      largest = std::max<std::size_t>(largest, d.state_count());
      if (!is_deterministic(d) || !is_complete(d)) o.fail("instance " + std::to_string(i) + ": not deterministic complete");
    }
    for (std::size_t x = 0; x < outs.size(); ++x)
      for (std::size_t y = x + 1; y < outs.size(); ++y) {
        ++comparisons;
        if (!contains(outs[x], outs[y]) || !contains(outs[y], outs[x]))
          o.fail("instance " + std::to_string(i) + ": outputs " + std::to_string(x) + "/" + std::to_string(y));
      }
    // Anchor the common language to the input.
    if (auto m = testing::language_mismatch(a, outs[0], kWordsPerInstance, i); !m.empty())
      o.fail("instance " + std::to_string(i) + ": " + m);
  }
  const double secs = seconds_since(t0);
  if (secs >= kDeterminizationBudgetSeconds) o.fail("runtime " + fmt(secs) + "s");
  o.detail = std::to_string(instances) + " instances, 6 outputs each, " + std::to_string(comparisons) +
             " pairwise containment checks both ways, langcover skipped " + std::to_string(skipped_langcover) +
             " components, largest output " + std::to_string(largest) + " states, " + fmt(secs) + "s < 600s";
  return o;
}

std::vector<Tela> limitdet_suite() {
  std::mt19937_64 rng(5005);
  SmallParams p;
  p.max_states = 5;
  p.marks = 4;
  std::vector<Tela> v;
  while (v.size() < 30) {
    Tela a = testing::random_dnf_tela(rng, p);
    if (!is_empty(a)) v.push_back(std::move(a));
  }
  return v;
}

Outcome criterion5() {
  Outcome o;
  std::size_t i = 0, max_ld = 0, max_gfm = 0;
  for (const Tela& a : limitdet_suite()) {
    record(a, "c5 input");
    auto prep = prepare_dnf(a);
    const double n = prep.automaton.state_count(), m = static_cast<double>(prep.dnf.size()),
                 k = static_cast<double>(prep.dnf.max_k());
    const double core = std::pow(3.0, n) * m * (k + 1);
    auto ld = build_ld(prep.automaton, prep.dnf);
    auto gfm = build_gfm(prep.automaton, prep.dnf);
    record(ld.automaton, "c5 ld");
    record(gfm.automaton, "c5 gfm");
    max_ld = std::max<std::size_t>(max_ld, ld.automaton.state_count());
    max_gfm = std::max<std::size_t>(max_gfm, gfm.automaton.state_count());
    for (const auto* r : {&ld, &gfm}) {
      const std::string which = r == &ld ? "ld" : "gfm";
      if (!is_syntactically_limit_deterministic(r->automaton)) o.fail(which + " instance " + std::to_string(i));
      if (auto mm = testing::language_mismatch(a, r->automaton, kWordsPerInstance, 3 * i); !mm.empty())
        o.fail(which + " instance " + std::to_string(i) + ": " + mm);
    }
    if (ld.automaton.state_count() > n + core) o.fail("ld bound instance " + std::to_string(i));
    if (gfm.automaton.state_count() > std::pow(2.0, n) + core) o.fail("gfm bound instance " + std::to_string(i));
    ++i;
  }
  o.detail = std::to_string(i) + " instances; largest outputs " + std::to_string(max_ld) + " (ld), " +
             std::to_string(max_gfm) + " (gfm) states, within n+3^n*m*(k+1) / 2^n+3^n*m*(k+1)";
  return o;
}

Outcome criterion6() {
  Outcome o;
  std::size_t i = 0;
  for (const Tela& a : limitdet_suite()) {
    Tela s = limit_det_sum(a);
    record(s, "c6 sum");
    if (!is_limit_deterministic(s)) o.fail("instance " + std::to_string(i) + " not limit-deterministic");
    if (auto mm = testing::language_mismatch(a, s, kWordsPerInstance, 7 * i); !mm.empty())
      o.fail("instance " + std::to_string(i) + ": " + mm);
    ++i;
  }
  o.detail = std::to_string(i) + " instances limit-deterministic and language-equal on sampled words";
  return o;
}

Outcome criterion7() {
  Outcome o;
  const Tela a = testing::alternating_automaton();
  const Mdp m = testing::alternating_chain();
  record(a, "c7 automaton");
  record(build_gfm(a).automaton, "c7 gfm");
  record(build_gfm(a, BridgeMode::Singletons).automaton, "c7 gfm singletons");
  const double good = pr_max_tela(m, a);
  const double broken = pr_max_tela(m, a, BridgeMode::Singletons);
  if (std::abs(good - 1.0) > kProbabilityTolerance) o.fail("Pr = " + fmt(good, 9));
  if (broken > 0.5 + kProbabilityTolerance) o.fail("singleton variant Pr = " + fmt(broken, 9));
  o.detail = "Pr_max = " + fmt(good, 9) + " (1 +- 1e-6), singleton-bridge variant = " + fmt(broken, 9) +
             " (<= 0.5 + 1e-6)";
  return o;
}

struct MdpCase {
  Mdp m;
  Tela a;
  double reference = 0;
};

std::vector<MdpCase> mdp_suite() {
  std::mt19937_64 rng(8008);
  SmallParams p;
  p.max_states = 3;
  p.marks = 3;
  p.acc_depth = 2;
  std::vector<MdpCase> v;
  for (int i = 0; i < 24; ++i) {
    MdpCase c{testing::random_mdp(rng, 3, 2), testing::random_tela(rng, p), 0};
    c.reference = pr_max_reference(c.m, c.a);
    v.push_back(std::move(c));
  }
  return v;
}

Outcome criterion8(const std::vector<MdpCase>& suite) {
  Outcome o;
  double worst = 0;
  std::size_t positive = 0, i = 0;
  for (const auto& c : suite) {
    record(c.a, "c8 automaton");
    record(build_gfm(c.a).automaton, "c8 gfm");
    record(determinize_product(c.a, true), "c8 reference automaton");
    const double v = pr_max_tela(c.m, c.a);
    worst = std::max(worst, std::abs(v - c.reference));
    if (c.reference > kProbabilityTolerance) ++positive;
    if (std::abs(v - c.reference) > kProbabilityTolerance)
      o.fail("pair " + std::to_string(i) + ": " + fmt(v, 9) + " vs " + fmt(c.reference, 9));
    ++i;
  }
  o.detail = std::to_string(suite.size()) + " pairs (" + std::to_string(positive) +
             " with positive value), max deviation " + fmt(worst, 12) + " <= 1e-6";
  return o;
}

Outcome criterion9(const std::vector<MdpCase>& suite) {
  Outcome o;
  std::size_t i = 0, both_paths = 0;
  for (const auto& c : suite) {
    const bool expected = c.reference > kProbabilityTolerance;
    const Tela gfm = build_gfm(c.a).automaton;
    const Tela ld = build_ld(c.a).automaton;
    for (const Tela* t : {&gfm, &ld}) {
      const bool q = qualitative_positive(c.m, *t);
      if (q != expected) o.fail("pair " + std::to_string(i) + ": qualitative " + std::to_string(q));
      if (!t->acceptance().has_fin()) {
        ++both_paths;
        if (qualitative_positive_finless(c.m, *t) != qualitative_positive_dnf(c.m, *t))
          o.fail("pair " + std::to_string(i) + ": fin-less and DNF paths differ");
      }
    }
    // The input itself when it happens to be limit-deterministic.
    if (is_limit_deterministic(c.a) && qualitative_positive(c.m, c.a) != expected)
      o.fail("pair " + std::to_string(i) + ": qualitative on input");
    ++i;
  }
  o.detail = std::to_string(suite.size()) + " pairs agree with reference > 0; fin-less and DNF paths compared " +
             std::to_string(both_paths) + " times";
  return o;
}

Outcome criterion10() {
  Outcome o;
  // Byte-determinism across independent constructions.
  std::mt19937_64 r1(77), r2(77);
  for (int i = 0; i < 20; ++i)
    if (print_hoa(testing::random_tela(r1)) != print_hoa(testing::random_tela(r2))) o.fail("print not reproducible");
  for (const auto& p : roundtrip.problems) o.fail(p);
  if (roundtrip_failures) o.pass = false;
  o.detail = std::to_string(roundtrip.checked) + " automata from criteria 1-9 round-tripped, " +
             std::to_string(roundtrip_failures) + " failures";
  return o;
}

Outcome criterion11() {
  Outcome o;
  BenchConfig c;
  c.instances = 50;
  c.seed = 11;
  c.gen.n_states = 4;
  c.gen.n_marks = 4;
  c.timeout_seconds = 5;
  c.max_states = 100000;
  c.family_max = 8;
  const auto t0 = Clock::now();
  BenchReport r = run_benchmark(c);
  const double secs = seconds_since(t0);
  const std::string text = format_report(r);
  if (text.rfind("tela-bench-report v1\n", 0) != 0) o.fail("report header");
  if (r.instances.size() != 50) o.fail("instance count");
  if (r.mismatches()) o.fail(std::to_string(r.mismatches()) + " language mismatches");
  std::size_t timeouts = 0, copy_checked = 0;
  for (const auto& ir : r.instances)
    for (std::size_t j = 0; j < ir.methods.size(); ++j) {
      const auto& mr = ir.methods[j];
      timeouts += mr.status != RunStatus::Ok;
      const auto gm = parse_gba_method(c.methods[j]);
      if (!gm || *gm == GbaMethod::Cnf || !mr.gba_marks) continue;
      ++copy_checked;
      if (*mr.gba_marks > ir.dnf_length)
        o.fail("instance " + std::to_string(ir.index) + " " + c.methods[j] + " marks " +
               std::to_string(*mr.gba_marks) + " > dnf length " + std::to_string(ir.dnf_length));
    }
  for (const auto& row : r.family) {
    for (std::size_t j = 1; j < row.gba_marks.size(); ++j) {
      if (row.gba_marks[0] < row.gba_marks[j]) o.fail("family n=" + std::to_string(row.n) + " cnf not dominant");
      if (row.n >= 2 && row.gba_marks[0] <= row.gba_marks[j]) o.fail("family n=" + std::to_string(row.n) + " no gap");
    }
  }
  o.detail = "50 instances in " + fmt(secs, 1) + "s, " + std::to_string(timeouts) + " budget hits, 0 mismatches required (" +
             std::to_string(r.mismatches()) + "), " + std::to_string(copy_checked) +
             " copy-based mark counts <= DNF length, cnf dominates on family n=1..8";
  return o;
}

}  // namespace

int main() {
  std::vector<std::pair<int, std::function<Outcome()>>> criteria;
  criteria.emplace_back(1, criterion1);
  criteria.emplace_back(2, criterion2);
  criteria.emplace_back(3, criterion3);
  criteria.emplace_back(4, criterion4);
  criteria.emplace_back(5, criterion5);
  criteria.emplace_back(6, criterion6);
  criteria.emplace_back(7, criterion7);
  std::vector<MdpCase> suite;
  criteria.emplace_back(8, [&] {
    suite = mdp_suite();
    return criterion8(suite);
  });
  criteria.emplace_back(9, [&] { return criterion9(suite); });
  criteria.emplace_back(10, criterion10);
  criteria.emplace_back(11, criterion11);

  int failed = 0;
  for (auto& [id, run] : criteria) {
    Outcome o;
    const auto t0 = Clock::now();
    try {
      o = run();
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    std::printf("criterion %2d: %s  %s  [%.1fs]\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str(), seconds_since(t0));
    for (const auto& p : o.problems) std::printf("    %s\n", p.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
