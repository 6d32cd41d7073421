#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sqlayer/errors.hpp"
#include "sqlayer/roles.hpp"
#include "sqlayer/trits.hpp"
#include "sqlayer/types.hpp"

namespace sqlayer {

/// Partition of all rounds after public discussion.
struct SiftedSets {
  std::vector<std::size_t> check_rounds;  // neither Bob measured
  std::vector<std::size_t> key_rounds;    // S1 sent and both Bobs measured
  std::vector<std::size_t> discarded;     // everything else, lost rounds included
  friend bool operator==(const SiftedSets&, const SiftedSets&) = default;
};

/**
 * Splits rounds into check, key and discard sets from the public lists alone.
 * Rounds where exactly one Bob measured, and S2 rounds where both measured,
 * fall in neither named category and are discarded.
 *
 * Throws InconsistentDisclosure if `disclosure` is not what the transcript
 * would announce.
 */
inline SiftedSets sift(const Transcript& t, const DisclosureSet& disclosure) {
  if (disclose(t) != disclosure)
    throw InconsistentDisclosure("sift: disclosure does not match transcript");
  const std::size_t n = t.rounds.size();
  std::vector<char> s1(n, 0), m1(n, 0), m2(n, 0), lost(n, 0);
  for (auto i : disclosure.s1_rounds) s1[i] = 1;
  for (auto i : disclosure.bob1_measured) m1[i] = 1;
  for (auto i : disclosure.bob2_measured) m2[i] = 1;
  for (auto i : disclosure.lost_rounds) lost[i] = 1;

  SiftedSets out;
  for (std::size_t i = 0; i < n; ++i) {
    if (lost[i])
      out.discarded.push_back(i);
    else if (!m1[i] && !m2[i])
      out.check_rounds.push_back(i);
    else if (s1[i] && m1[i] && m2[i])
      out.key_rounds.push_back(i);
    else
      out.discarded.push_back(i);
  }
  return out;
}

struct EavesdropResult {
  double mismatch_first = 0.0;
  double mismatch_second = 0.0;
  bool abort = true;
  bool inconclusive = false;  // no check rounds: aborts by default
};

/// Alice compares her remeasurement with what she sent on every check round.
inline EavesdropResult eavesdrop_test(const Transcript& t,
                                      const std::vector<std::size_t>& check_rounds,
                                      double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0))
    throw std::invalid_argument("eavesdrop_test: threshold must be in [0,1]");
  EavesdropResult r;
  if (check_rounds.empty()) {
    r.inconclusive = true;
    return r;
  }
  std::size_t bad1 = 0, bad2 = 0;
  for (auto id : check_rounds) {
    const RoundRecord& rec = t.rounds.at(id);
    if (rec.alice_remeasure1 != rec.prep.a) ++bad1;
    if (rec.alice_remeasure2 != rec.prep.a % 3) ++bad2;
  }
  const double n = static_cast<double>(check_rounds.size());
  r.mismatch_first = static_cast<double>(bad1) / n;
  r.mismatch_second = static_cast<double>(bad2) / n;
  r.abort = r.mismatch_first > threshold || r.mismatch_second > threshold;
  return r;
}

/// a = 3 * high + low.
struct TritPair {
  int high;
  int low;
  friend bool operator==(const TritPair&, const TritPair&) = default;
};

inline TritPair split_trits(int a) {
  if (a < 0 || a > 8) throw std::out_of_range("split_trits: value must be in 0..8");
  return {a / 3, a % 3};
}

/// Per-layer sifted keys. Layer 1 is {Alice, Bob1}; layer 2 is all three.
struct KeyMaterial {
  struct Layer1 {
    TritString alice, bob1;
    friend bool operator==(const Layer1&, const Layer1&) = default;
  } layer1;
  struct Layer2 {
    TritString alice, bob1, bob2;
    friend bool operator==(const Layer2&, const Layer2&) = default;
  } layer2;
  std::vector<std::size_t> round_ids;  // key round behind each symbol
  friend bool operator==(const KeyMaterial&, const KeyMaterial&) = default;
};

inline KeyMaterial extract_keys(const Transcript& t, const std::vector<std::size_t>& key_rounds) {
  KeyMaterial k;
  for (auto id : key_rounds) {
    const RoundRecord& r = t.rounds.at(id);
    if (!r.bob1_outcome || !r.bob2_outcome)
      throw std::invalid_argument("extract_keys: key round " + std::to_string(id) +
                                  " lacks a Bob outcome");
    const TritPair alice = split_trits(r.prep.a);
    const TritPair bob1 = split_trits(*r.bob1_outcome);
    k.layer1.alice.push_back(alice.high);
    k.layer1.bob1.push_back(bob1.high);
    k.layer2.alice.push_back(alice.low);
    k.layer2.bob1.push_back(bob1.low);
    k.layer2.bob2.push_back(*r.bob2_outcome);
    k.round_ids.push_back(id);
  }
  return k;
}

/// Fraction of positions where `other` differs from `reference`.
inline double symbol_error_rate(const TritString& reference, const TritString& other) {
  if (reference.size() != other.size())
    throw std::invalid_argument("symbol_error_rate: length mismatch");
  if (reference.empty()) return 0.0;
  std::size_t bad = 0;
  for (std::size_t i = 0; i < reference.size(); ++i) bad += reference[i] != other[i];
  return static_cast<double>(bad) / static_cast<double>(reference.size());
}

/// Plug-in Shannon entropy of a trit string, in bits.
inline double empirical_entropy(const TritString& s) {
  if (s.empty()) return 0.0;
  std::array<double, 3> c{};
  for (int t : s) c[t] += 1.0;
  double h = 0.0;
  for (double x : c)
    if (x > 0) {
      const double p = x / static_cast<double>(s.size());
      h -= p * std::log2(p);
    }
  return h;
}

/// Plug-in mutual information between two aligned trit strings, in bits.
inline double mutual_information(const TritString& x, const TritString& y) {
  if (x.size() != y.size()) throw std::invalid_argument("mutual_information: length mismatch");
  if (x.empty()) return 0.0;
  const double n = static_cast<double>(x.size());
  std::array<std::array<double, 3>, 3> joint{};
  std::array<double, 3> px{}, py{};
  for (std::size_t i = 0; i < x.size(); ++i) {
    joint[x[i]][y[i]] += 1.0;
    px[x[i]] += 1.0;
    py[y[i]] += 1.0;
  }
  double mi = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (joint[i][j] > 0) mi += joint[i][j] / n * std::log2(joint[i][j] * n / (px[i] * py[j]));
  return std::max(mi, 0.0);
}

inline std::array<double, 3> trit_frequencies(const TritString& s) {
  std::array<double, 3> f{};
  if (s.empty()) return f;
  for (int t : s) f[t] += 1.0;
  for (double& x : f) x /= static_cast<double>(s.size());
  return f;
}

struct CategoryStats {
  std::size_t rounds = 0;
  double fraction = 0.0;  // of all rounds
  double mismatch_first = 0.0;
  double mismatch_second = 0.0;
  double mismatch_any = 0.0;
};

/// Summary statistics of one run.
struct RunReport {
  std::size_t n_rounds = 0;
  std::size_t lost_rounds = 0;
  double check_fraction = 0.0;
  double key_fraction = 0.0;
  double discarded_fraction = 0.0;
  double lost_fraction = 0.0;
  PerCategory<CategoryStats> categories{};

  std::size_t check_rounds = 0;
  double check_mismatch_first = 0.0;
  double check_mismatch_second = 0.0;
  double threshold = 0.0;
  bool abort = true;
  bool inconclusive = false;

  std::size_t key_length = 0;
  double layer1_qber = 0.0;
  double layer2_qber = 0.0;  // a position counts if Bob1's low trit or b2 disagrees
  double layer2_qber_bob1 = 0.0;
  double layer2_qber_bob2 = 0.0;
  double sifted_rate_bits_per_layer = 0.0;
  double layer1_entropy = 0.0;  // empirical, of Alice's string
  double layer2_entropy = 0.0;
  std::array<double, 3> layer1_frequencies{};
  std::array<double, 3> layer2_frequencies{};
  double independence_stat = 0.0;  // I(layer-1 key ; b2), bits
};

inline RunReport report(const Transcript& t, const SiftedSets& sifted, const KeyMaterial& keys,
                        double threshold) {
  RunReport r;
  r.n_rounds = t.rounds.size();
  const double n = r.n_rounds ? static_cast<double>(r.n_rounds) : 1.0;
  r.check_fraction = static_cast<double>(sifted.check_rounds.size()) / n;
  r.key_fraction = static_cast<double>(sifted.key_rounds.size()) / n;
  r.discarded_fraction = static_cast<double>(sifted.discarded.size()) / n;

  PerCategory<std::array<std::size_t, 3>> bad{};
  for (const RoundRecord& rec : t.rounds) {
    if (rec.lost) ++r.lost_rounds;
    const auto cat = rec.category();
    if (!cat) continue;
    const std::size_t ci = cat->index();
    ++r.categories[ci].rounds;
    const bool b1 = rec.alice_remeasure1 != rec.prep.a;
    const bool b2 = rec.alice_remeasure2 != rec.prep.a % 3;
    bad[ci][0] += b1;
    bad[ci][1] += b2;
    bad[ci][2] += b1 || b2;
  }
  r.lost_fraction = static_cast<double>(r.lost_rounds) / n;
  for (std::size_t ci = 0; ci < Category::kCount; ++ci) {
    CategoryStats& c = r.categories[ci];
    c.fraction = static_cast<double>(c.rounds) / n;
    if (c.rounds == 0) continue;
    const double m = static_cast<double>(c.rounds);
    c.mismatch_first = static_cast<double>(bad[ci][0]) / m;
    c.mismatch_second = static_cast<double>(bad[ci][1]) / m;
    c.mismatch_any = static_cast<double>(bad[ci][2]) / m;
  }

  const EavesdropResult test = eavesdrop_test(t, sifted.check_rounds, threshold);
  r.check_rounds = sifted.check_rounds.size();
  r.check_mismatch_first = test.mismatch_first;
  r.check_mismatch_second = test.mismatch_second;
  r.threshold = threshold;
  r.abort = test.abort;
  r.inconclusive = test.inconclusive;

  r.key_length = keys.layer1.alice.size();
  r.layer1_qber = symbol_error_rate(keys.layer1.alice, keys.layer1.bob1);
  r.layer2_qber_bob1 = symbol_error_rate(keys.layer2.alice, keys.layer2.bob1);
  r.layer2_qber_bob2 = symbol_error_rate(keys.layer2.alice, keys.layer2.bob2);
  if (r.key_length > 0) {
    std::size_t bad2 = 0;
    for (std::size_t i = 0; i < r.key_length; ++i)
      bad2 += keys.layer2.bob1[i] != keys.layer2.alice[i] ||
              keys.layer2.bob2[i] != keys.layer2.alice[i];
    r.layer2_qber = static_cast<double>(bad2) / static_cast<double>(r.key_length);
  }
  // One uniform trit per key round in each layer.
  r.sifted_rate_bits_per_layer = std::log2(3.0);
  r.layer1_entropy = empirical_entropy(keys.layer1.alice);
  r.layer2_entropy = empirical_entropy(keys.layer2.alice);
  r.layer1_frequencies = trit_frequencies(keys.layer1.alice);
  r.layer2_frequencies = trit_frequencies(keys.layer2.alice);
  r.independence_stat = mutual_information(keys.layer1.alice, keys.layer2.bob2);
  return r;
}

}  // namespace sqlayer
