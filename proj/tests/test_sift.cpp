#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "sqlayer/sift.hpp"
#include "test_support.hpp"

using namespace sqlayer;

namespace {

constexpr auto M = BobAction::Measure;
constexpr auto R = BobAction::Reflect;

Transcript simulate(std::size_t n, std::uint64_t seed, const ChannelStack& stack = {}) {
  Participants parts(seed);
  Network net(stack, seed);
  Transcript t;
  t.rounds.reserve(n);
  for (std::size_t i = 0; i < n; ++i) t.rounds.push_back(run_round(i, parts, net));
  return t;
}

Transcript scripted(const std::vector<RoundScript>& scripts) {
  Participants parts(1);
  Network net({}, 1);
  Transcript t;
  for (std::size_t i = 0; i < scripts.size(); ++i) t.rounds.push_back(run_round(i, parts, net, scripts[i]));
  return t;
}

ChannelModel eve1_comp() {
  return {Link::ToBob1, Direction::Forward, channel_kind::InterceptResend{Basis::Computational}};
}

}  // namespace

TEST(Sift, Examples) {
  const Transcript t = scripted({{PreparationRecord{BasisSet::S1, 4}, M, M},
                                 {PreparationRecord{BasisSet::S2, 4}, R, R},
                                 {PreparationRecord{BasisSet::S1, 4}, M, R},
                                 {PreparationRecord{BasisSet::S1, 4}, R, R},
                                 {PreparationRecord{BasisSet::S2, 4}, M, M}});
  const SiftedSets s = sift(t, disclose(t));
  EXPECT_EQ(s.key_rounds, (std::vector<std::size_t>{0}));
  EXPECT_EQ(s.check_rounds, (std::vector<std::size_t>{1, 3}));
  EXPECT_EQ(s.discarded, (std::vector<std::size_t>{2, 4}));
}

TEST(Sift, Partition) {
  const Transcript t = simulate(20000, 3, {{Link::ToBob2, Direction::Both, channel_kind::Loss{0.1}}});
  const SiftedSets s = sift(t, disclose(t));
  EXPECT_EQ(s.check_rounds.size() + s.key_rounds.size() + s.discarded.size(), t.rounds.size());
  std::vector<char> seen(t.rounds.size(), 0);
  for (const auto* list : {&s.check_rounds, &s.key_rounds, &s.discarded})
    for (auto id : *list) {
      ASSERT_FALSE(seen[id]);
      seen[id] = 1;
    }
  for (auto id : s.key_rounds) EXPECT_FALSE(t.rounds[id].lost);
  for (auto id : s.check_rounds) EXPECT_FALSE(t.rounds[id].lost);
}

TEST(Sift, RejectsInconsistentDisclosure) {
  const Transcript t = simulate(100, 4);
  DisclosureSet d = disclose(t);
  d.s1_rounds.pop_back();
  EXPECT_THROW(sift(t, d), InconsistentDisclosure);
}

TEST(EavesdropTest, IdentityChannel) {
  const Transcript t = simulate(10000, 5);
  const auto r = eavesdrop_test(t, sift(t, disclose(t)).check_rounds, 0.0);
  EXPECT_EQ(r.mismatch_first, 0.0);
  EXPECT_EQ(r.mismatch_second, 0.0);
  EXPECT_FALSE(r.abort);
  EXPECT_FALSE(r.inconclusive);
}

TEST(EavesdropTest, InterceptOnS2Checks) {
  const Transcript t = simulate(100000, 6, {eve1_comp()});
  std::vector<std::size_t> s2_checks;
  for (auto id : sift(t, disclose(t)).check_rounds)
    if (t.rounds[id].prep.basis == BasisSet::S2) s2_checks.push_back(id);
  const auto r = eavesdrop_test(t, s2_checks, 0.0);
  EXPECT_TRUE(testutil::within_5sigma(r.mismatch_first, s2_checks.size(), 8.0 / 9.0));
  EXPECT_EQ(r.mismatch_second, 0.0);
  EXPECT_TRUE(r.abort);
}

TEST(EavesdropTest, ThresholdLogic) {
  // Four check rounds; the second subsystem of two of them is corrupted by hand.
  Transcript t = scripted({{PreparationRecord{BasisSet::S1, 0}, R, R},
                           {PreparationRecord{BasisSet::S1, 1}, R, R},
                           {PreparationRecord{BasisSet::S2, 2}, R, R},
                           {PreparationRecord{BasisSet::S2, 3}, R, R}});
  t.rounds[0].alice_remeasure2 = 1;
  t.rounds[2].alice_remeasure2 = 0;
  const auto r = eavesdrop_test(t, {0, 1, 2, 3}, 0.05);
  EXPECT_EQ(r.mismatch_first, 0.0);
  EXPECT_EQ(r.mismatch_second, 0.5);
  EXPECT_TRUE(r.abort);
  EXPECT_FALSE(eavesdrop_test(t, {1, 3}, 0.05).abort);
  EXPECT_THROW(eavesdrop_test(t, {0}, 1.5), std::invalid_argument);
}

TEST(EavesdropTest, EmptyCheckSetIsInconclusive) {
  const auto r = eavesdrop_test(Transcript{}, {}, 0.0);
  EXPECT_TRUE(r.inconclusive);
  EXPECT_TRUE(r.abort);
}

TEST(EavesdropTest, AbortFiresUnderAttack) {
  int aborted = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Transcript t = simulate(400, 1000 + seed, {eve1_comp()});
    const SiftedSets s = sift(t, disclose(t));
    ASSERT_GE(s.check_rounds.size(), 50u);
    aborted += eavesdrop_test(t, s.check_rounds, 0.0).abort;
  }
  EXPECT_GE(aborted, 99);
}

TEST(SplitTrits, Examples) {
  EXPECT_EQ(split_trits(0), (TritPair{0, 0}));
  EXPECT_EQ(split_trits(7), (TritPair{2, 1}));
  EXPECT_EQ(split_trits(5), (TritPair{1, 2}));
  EXPECT_THROW(split_trits(9), std::out_of_range);
  EXPECT_THROW(split_trits(-1), std::out_of_range);
}

TEST(SplitTrits, RoundTripsExhaustively) {
  for (int a = 0; a < 9; ++a) {
    const TritPair p = split_trits(a);
    EXPECT_EQ(3 * p.high + p.low, a);
    EXPECT_EQ(p.low, a % 3);
  }
}

TEST(ExtractKeys, SingleRound) {
  Transcript t = scripted({{PreparationRecord{BasisSet::S1, 7}, M, M}});
  const KeyMaterial k = extract_keys(t, {0});
  EXPECT_EQ(k.layer1.alice, TritString({2}));
  EXPECT_EQ(k.layer1.bob1, TritString({2}));
  EXPECT_EQ(k.layer2.alice, TritString({1}));
  EXPECT_EQ(k.layer2.bob1, TritString({1}));
  EXPECT_EQ(k.layer2.bob2, TritString({1}));
  EXPECT_EQ(k.round_ids, (std::vector<std::size_t>{0}));
}

TEST(ExtractKeys, ZeroRound) {
  Transcript t = scripted({{PreparationRecord{BasisSet::S1, 0}, M, M}});
  const KeyMaterial k = extract_keys(t, {0});
  EXPECT_EQ(k.layer1.alice, TritString({0}));
  EXPECT_EQ(k.layer2.alice, TritString({0}));
  EXPECT_EQ(k.layer2.bob2, TritString({0}));
}

TEST(ExtractKeys, MissingOutcome) {
  Transcript t = scripted({{PreparationRecord{BasisSet::S1, 3}, M, R}});
  EXPECT_THROW(extract_keys(t, {0}), std::invalid_argument);
}

TEST(ExtractKeys, IdealChannelAgreement) {
  const Transcript t = simulate(20000, 8);
  const KeyMaterial k = extract_keys(t, sift(t, disclose(t)).key_rounds);
  EXPECT_GT(k.layer1.alice.size(), 0u);
  EXPECT_EQ(k.layer1.alice, k.layer1.bob1);
  EXPECT_EQ(k.layer2.alice, k.layer2.bob1);
  EXPECT_EQ(k.layer2.alice, k.layer2.bob2);
}

TEST(Statistics, EntropyAndMutualInformation) {
  EXPECT_NEAR(empirical_entropy(TritString{0, 1, 2}), std::log2(3.0), 1e-12);
  EXPECT_EQ(empirical_entropy(TritString{1, 1, 1}), 0.0);
  EXPECT_NEAR(mutual_information(TritString{0, 1, 2}, TritString{0, 1, 2}), std::log2(3.0), 1e-12);
  EXPECT_NEAR(mutual_information(TritString{0, 0, 1, 1}, TritString{0, 1, 0, 1}), 0.0, 1e-12);
  EXPECT_THROW(mutual_information(TritString{0}, TritString{}), std::invalid_argument);
  EXPECT_THROW(symbol_error_rate(TritString{0}, TritString{}), std::invalid_argument);
  EXPECT_EQ(symbol_error_rate(TritString{0, 1}, TritString{0, 2}), 0.5);
}

TEST(Report, IdealRun) {
  const Transcript t = simulate(100000, 42);
  const SiftedSets s = sift(t, disclose(t));
  const KeyMaterial k = extract_keys(t, s.key_rounds);
  const RunReport r = report(t, s, k, 0.0);
  EXPECT_TRUE(testutil::within_5sigma(r.key_fraction, r.n_rounds, 1.0 / 8.0));
  EXPECT_TRUE(testutil::within_5sigma(r.check_fraction, r.n_rounds, 1.0 / 4.0));
  EXPECT_EQ(r.layer1_qber, 0.0);
  EXPECT_EQ(r.layer2_qber, 0.0);
  EXPECT_EQ(r.layer2_qber_bob1, 0.0);
  EXPECT_EQ(r.layer2_qber_bob2, 0.0);
  EXPECT_FALSE(r.abort);
  EXPECT_NEAR(r.sifted_rate_bits_per_layer, std::log2(3.0), 1e-15);
  ASSERT_GE(r.key_length, 10000u);
  EXPECT_LT(r.independence_stat, 0.01);
  EXPECT_GE(r.layer1_entropy, 1.58);
  EXPECT_GE(r.layer2_entropy, 1.58);
  for (int i = 0; i < 3; ++i) {
    EXPECT_TRUE(testutil::within_5sigma(r.layer1_frequencies[i], r.key_length, 1.0 / 3.0));
    EXPECT_TRUE(testutil::within_5sigma(r.layer2_frequencies[i], r.key_length, 1.0 / 3.0));
  }
  EXPECT_NEAR(r.check_fraction + r.key_fraction + r.discarded_fraction, 1.0, 1e-12);
}

TEST(Report, LayerTwoQberCountsEitherBob) {
  Transcript t = scripted({{PreparationRecord{BasisSet::S1, 4}, M, M},
                           {PreparationRecord{BasisSet::S1, 5}, M, M}});
  t.rounds[0].bob2_outcome = 0;
  t.rounds[1].bob1_outcome = 3;
  const SiftedSets s = sift(t, disclose(t));
  const RunReport r = report(t, s, extract_keys(t, s.key_rounds), 0.0);
  EXPECT_EQ(r.layer2_qber_bob2, 0.5);
  EXPECT_EQ(r.layer2_qber_bob1, 0.5);
  EXPECT_EQ(r.layer2_qber, 1.0);
  EXPECT_EQ(r.layer1_qber, 0.0);  // 3 and 5 share the high trit
}
