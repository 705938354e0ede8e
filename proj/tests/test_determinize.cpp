#include <gtest/gtest.h>

#include <random>

#include "support/support.hpp"

using namespace tela;
namespace tt = tela::testing;

namespace {

// Letter 1 is `a`, letter 0 is `b`.
Tela finitely_many_a() {
  Tela a(1, 2);
  a.add_transition(0, 0, 0);
  a.add_transition(0, 1, 0);
  a.add_transition(0, 0, 1);
  a.add_transition(1, 0, 1, MarkSet{0});
  a.set_initial({0});
  a.set_acceptance(Acc::inf(0), 1);
  return a;
}

Tela universal() {
  Tela a(1, 1);
  a.add_transition(0, 0, 0);
  a.add_transition(0, 1, 0);
  a.set_initial({0});
  a.set_acceptance(Acc::t(), 0);
  return a;
}

Tela random_gba(std::mt19937_64& rng, unsigned max_states, unsigned k) {
  tt::SmallParams p;
  p.max_states = max_states;
  p.marks = 3;
  Tela a = tt::random_structure(rng, p);
  std::vector<MarkSet> sets;
  for (unsigned j = 0; j < k; ++j) sets.push_back(MarkSet::single(tt::uniform(rng, 0, 2)));
  a.set_acceptance(gba_formula(sets), 3);
  return a;
}

void expect_det_complete(const Tela& d) {
  EXPECT_TRUE(is_deterministic(d));
  EXPECT_TRUE(is_complete(d));
}

}  // namespace

TEST(Degeneralize, SingleSetKeepsReachableSize) {
  std::mt19937_64 rng(51);
  for (int i = 0; i < 20; ++i) {
    const Tela g = random_gba(rng, 4, 1);
    const Tela b = degeneralize(g);
    EXPECT_EQ(b.state_count(), reachable(g).count());
    EXPECT_EQ(tt::language_mismatch(g, b, 20, i), "");
  }
}

TEST(Degeneralize, StateBoundAndLanguage) {
  std::mt19937_64 rng(52);
  for (int i = 0; i < 50; ++i) {
    const unsigned k = tt::uniform(rng, 0, 3);
    const Tela g = random_gba(rng, 3, k);
    const Tela b = degeneralize(g);
    EXPECT_LE(b.state_count(), g.state_count() * std::max(1u, k));
    ASSERT_TRUE(as_gba(b.acceptance()).has_value());
    EXPECT_LE(as_gba(b.acceptance())->size(), 1u);
    EXPECT_EQ(tt::language_mismatch(g, b, 20, i), "") << print_hoa(g);
  }
  Tela bad = universal();
  bad.set_acceptance(Acc::fin(0), 1);
  EXPECT_THROW(degeneralize(bad), PreconditionError);
}

TEST(Safra, SingleStateDeterministicBuchi) {
  Tela b(1, 1);
  b.add_transition(0, 0, 0);
  b.add_transition(0, 1, 0, MarkSet{0});
  b.set_initial({0});
  b.set_acceptance(Acc::inf(0), 1);
  const Tela d = safra_determinize(b);
  expect_det_complete(d);
  EXPECT_EQ(d.state_count(), 1u);
  EXPECT_EQ(tt::language_mismatch(b, d, 30, 1), "");
}

TEST(Safra, FinitelyManyA) {
  const Tela d = safra_determinize(finitely_many_a());
  expect_det_complete(d);
  EXPECT_TRUE(accepts(d, LassoWord{{1}, {0}}));
  EXPECT_TRUE(accepts(d, LassoWord{{1, 0, 1, 1}, {0}}));
  EXPECT_FALSE(accepts(d, LassoWord{{}, {1, 0}}));
  EXPECT_FALSE(accepts(d, LassoWord{{}, {1}}));
}

TEST(Safra, RandomBuchiAutomata) {
  std::mt19937_64 rng(53);
  for (int i = 0; i < 30; ++i) {
    const Tela b = random_gba(rng, 5, 1);
    const Tela d = safra_determinize(b);
    expect_det_complete(d);
    EXPECT_EQ(tt::language_mismatch(b, d, 30, i), "") << print_hoa(b);
  }
}

TEST(Safra, RejectsNonBuchi) {
  Tela g = universal();
  g.set_acceptance(Acc::inf(0) & Acc::inf(1), 2);
  EXPECT_THROW(safra_determinize(g), PreconditionError);
}

TEST(DeterminizeViaGba, DeterministicInputKeepsLanguage) {
  Tela b(1, 2);
  b.add_transition(0, 0, 1, MarkSet{0});
  b.add_transition(0, 1, 0);
  b.add_transition(1, 0, 0);
  b.add_transition(1, 1, 1);
  b.set_initial({0});
  b.set_acceptance(Acc::inf(0), 1);
  for (GbaMethod m : kAllGbaMethods) {
    const Tela d = determinize_via_gba(b, m);
    expect_det_complete(d);
    EXPECT_EQ(tt::language_mismatch(b, d, 30, 2), "");
  }
}

TEST(DeterminizeViaGba, BlowupFamilyMethodsAgree) {
  const Tela a = cnf_blowup_family(3);
  const Tela x = determinize_via_gba(a, GbaMethod::Cnf), y = determinize_via_gba(a, GbaMethod::RemfinRewrite);
  EXPECT_TRUE(contains(x, y));
  EXPECT_TRUE(contains(y, x));
}

TEST(Determinize, PipelinesAgreeOnRandomInputs) {
  std::mt19937_64 rng(54);
  tt::SmallParams p;
  p.max_states = 4;
  for (int i = 0; i < 30; ++i) {
    const Tela a = i % 2 ? tt::random_dnf_tela(rng, p, 5) : tt::random_tela(rng, p);
    std::vector<Tela> outs{determinize_product(a, false), determinize_product(a, true)};
    for (GbaMethod m : kAllGbaMethods) outs.push_back(determinize_via_gba(a, m));
    for (const auto& d : outs) expect_det_complete(d);
    for (std::size_t x = 1; x < outs.size(); ++x)
      EXPECT_TRUE(language_equal_deterministic(outs[0], outs[x])) << i << " output " << x;
    EXPECT_EQ(tt::language_mismatch(a, outs[0], 20, i), "") << print_hoa(a);
  }
}

TEST(DeterminizeProduct, LangcoverSkipsEqualDisjuncts) {
  // Every disjunct accepts the same words: each mark pair sits on one loop.
  Tela a(1, 1);
  a.add_transition(0, 0, 0, MarkSet{0, 2});
  a.add_transition(0, 1, 0, MarkSet{1, 3});
  a.set_initial({0});
  a.set_acceptance((Acc::inf(0) & Acc::inf(1)) | (Acc::inf(2) & Acc::inf(3)), 4);
  ProductDeterminizeStats st;
  const Tela d = determinize_product(a, true, &st);
  EXPECT_EQ(st.components, 1u);
  EXPECT_EQ(st.skipped, 1u);
  EXPECT_TRUE(language_equal_deterministic(d, determinize_product(a, false)));
}

TEST(DeterminizeProduct, SingleDisjunctMatchesViaGba) {
  std::mt19937_64 rng(55);
  tt::SmallParams p;
  p.max_states = 4;
  int checked = 0;
  while (checked < 10) {
    const Tela a = tt::random_dnf_tela(rng, p);
    if (prepare_dnf(a).dnf.size() != 1) continue;
    ++checked;
    EXPECT_TRUE(language_equal_deterministic(determinize_product(a, true), determinize_via_gba(a, GbaMethod::RemfinRewrite)));
  }
}

TEST(DeterminizeProduct, FalseAcceptance) {
  Tela a = universal();
  a.set_acceptance(Acc::f(), 0);
  const Tela d = determinize_product(a, true);
  EXPECT_EQ(d.state_count(), 1u);
  expect_det_complete(d);
  EXPECT_TRUE(is_empty(d));
}

TEST(Contains, Examples) {
  const Tela u = universal();
  Tela e = u;
  e.set_acceptance(Acc::f(), 0);
  const Tela d = safra_determinize(finitely_many_a());
  EXPECT_TRUE(contains(d, d));
  EXPECT_TRUE(contains(u, d));
  EXPECT_TRUE(contains(u, e));
  EXPECT_FALSE(contains(e, u));
  EXPECT_FALSE(contains(d, u));
  EXPECT_THROW(contains(complete(finitely_many_a()), u), PreconditionError);
}
