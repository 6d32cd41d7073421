#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sqlayer/channel.hpp"
#include "sqlayer/qudit.hpp"
#include "sqlayer/rng.hpp"
#include "sqlayer/types.hpp"

namespace sqlayer {

/// Alice's private per-round secret.
struct PreparationRecord {
  BasisSet basis;
  int a;  // quantum number of the 9-level subsystem
  friend bool operator==(const PreparationRecord&, const PreparationRecord&) = default;
};

struct Preparation {
  PreparationRecord record;
  ProductState state;
};

/// Step 1. Two draws (basis, then index) unless `forced`.
inline Preparation alice_prepare(RngStream& rng,
                                 std::optional<PreparationRecord> forced = std::nullopt) {
  PreparationRecord rec{};
  if (forced) {
    check_symbol(forced->a);
    rec = *forced;
  } else {
    rec.basis = rng.uniform_int(2) == 0 ? BasisSet::S1 : BasisSet::S2;
    rec.a = static_cast<int>(rng.uniform_int(kAlphabet));
  }
  return {rec, prepare(rec.basis, rec.a)};
}

struct BobStep {
  BobAction action;
  std::optional<int> outcome;  // present iff action == Measure
  StateVector returned;
};

/**
 * Step 2 for a classical Bob. He may only measure in the computational basis
 * and send back the post-measurement state, or reflect the carrier untouched.
 * One draw for the action, one more when he measures.
 */
inline BobStep bob_step(const StateVector& incoming, RngStream& rng,
                        std::optional<BobAction> forced = std::nullopt) {
  if (incoming.dim() != kFirstDim && incoming.dim() != kSecondDim)
    throw std::invalid_argument("bob_step: dimension must be 3 or 9");
  const BobAction action =
      forced ? *forced : (rng.uniform_int(2) == 0 ? BobAction::Measure : BobAction::Reflect);
  if (action == BobAction::Reflect) return {action, std::nullopt, incoming};
  MeasurementOutcome m = measure(incoming, Basis::Computational, rng);
  return {action, m.index, std::move(m.post_state)};
}

/// Step 3: measure each returned subsystem in the basis it was prepared in.
inline std::pair<int, int> alice_remeasure(const StateVector& returned_first,
                                           const StateVector& returned_second,
                                           const PreparationRecord& prep, RngStream& rng) {
  if (returned_first.dim() != kFirstDim || returned_second.dim() != kSecondDim)
    throw std::invalid_argument("alice_remeasure: expected dimensions 9 and 3");
  const Basis b = subsystem_basis(prep.basis);
  const int first = measure(returned_first, b, rng).index;
  const int second = measure(returned_second, b, rng).index;
  return {first, second};
}

/// Full transcript entry for one round. A lost round carries only what
/// actually happened before the carrier vanished.
struct RoundRecord {
  std::size_t round_id = 0;
  PreparationRecord prep{};
  std::optional<BobAction> action1, action2;
  std::optional<int> bob1_outcome, bob2_outcome;
  std::optional<int> alice_remeasure1, alice_remeasure2;
  BasisSet alice_remeasure_basis = BasisSet::S1;
  bool lost = false;

  std::optional<Category> category() const {
    if (lost || !action1 || !action2) return std::nullopt;
    return Category{prep.basis, *action1, *action2};
  }

  friend bool operator==(const RoundRecord&, const RoundRecord&) = default;
};

struct Transcript {
  std::vector<RoundRecord> rounds;
  std::string config_digest;
  friend bool operator==(const Transcript&, const Transcript&) = default;
};

/// Overrides for any random choice in a round. Unset fields are drawn.
struct RoundScript {
  std::optional<PreparationRecord> prep;
  std::optional<BobAction> bob1, bob2;
};

/// The three participants' private streams.
struct Participants {
  RngStream alice, bob1, bob2;

  explicit Participants(std::uint64_t seed)
      : alice(seed, "alice"), bob1(seed, "bob1"), bob2(seed, "bob2") {}
};

/// What Bob sent back over one link. In a distributed run Bob keeps his
/// action and outcome private, so only `returned` is filled in.
struct BobReply {
  std::optional<BobAction> action;
  std::optional<int> outcome;
  std::optional<StateVector> returned;
};

/**
 * Alice's side of steps 1-3 for one round. `to_bob1` / `to_bob2` carry a
 * state that survived the forward channel (or nullopt if it was lost) to the
 * Bob and return his reply. Channel loss yields a round flagged `lost`.
 */
template <class Exchange1, class Exchange2>
RoundRecord alice_round(std::size_t round_id, RngStream& alice, Network& net,
                        std::optional<PreparationRecord> forced, Exchange1&& to_bob1,
                        Exchange2&& to_bob2) {
  const Preparation prep = alice_prepare(alice, forced);
  RoundRecord rec;
  rec.round_id = round_id;
  rec.prep = prep.record;
  rec.alice_remeasure_basis = prep.record.basis;

  auto hop = [&](Link link, const StateVector& sent, auto& exchange) {
    std::optional<StateVector> arrived = net.traverse(round_id, link, Direction::Forward, sent);
    BobReply reply = exchange(round_id, arrived);
    if (reply.returned)
      reply.returned = net.traverse(round_id, link, Direction::Backward, *reply.returned);
    return reply;
  };
  BobReply r1 = hop(Link::ToBob1, prep.state.first, to_bob1);
  BobReply r2 = hop(Link::ToBob2, prep.state.second, to_bob2);
  rec.action1 = r1.action;
  rec.bob1_outcome = r1.outcome;
  rec.action2 = r2.action;
  rec.bob2_outcome = r2.outcome;
  rec.lost = !r1.returned || !r2.returned;

  const Basis b = subsystem_basis(prep.record.basis);
  if (r1.returned && r2.returned) {
    auto [m1, m2] = alice_remeasure(*r1.returned, *r2.returned, prep.record, alice);
    rec.alice_remeasure1 = m1;
    rec.alice_remeasure2 = m2;
  } else if (r1.returned) {
    rec.alice_remeasure1 = measure(*r1.returned, b, alice).index;
  } else if (r2.returned) {
    rec.alice_remeasure2 = measure(*r2.returned, b, alice).index;
  }
  return rec;
}

/// A Bob in the same process. He does nothing in a round whose carrier was lost.
inline auto local_bob(RngStream& rng, std::optional<BobAction> forced) {
  return [&rng, forced](std::size_t, const std::optional<StateVector>& arrived) -> BobReply {
    if (!arrived) return {};
    BobStep s = bob_step(*arrived, rng, forced);
    return {s.action, s.outcome, std::move(s.returned)};
  };
}

/// One full round with all three participants in-process.
inline RoundRecord run_round(std::size_t round_id, Participants& parts, Network& net,
                             const RoundScript& script = {}) {
  return alice_round(round_id, parts.alice, net, script.prep, local_bob(parts.bob1, script.bob1),
                     local_bob(parts.bob2, script.bob2));
}

/// Public announcements of step 4, plus the publicly flagged lost rounds.
/// Outcomes and preparation indices never appear here.
struct DisclosureSet {
  std::vector<std::size_t> s1_rounds;
  std::vector<std::size_t> bob1_measured;
  std::vector<std::size_t> bob2_measured;
  std::vector<std::size_t> lost_rounds;
  friend bool operator==(const DisclosureSet&, const DisclosureSet&) = default;
};

inline void check_complete(const Transcript& t) {
  for (std::size_t i = 0; i < t.rounds.size(); ++i) {
    const RoundRecord& r = t.rounds[i];
    if (r.round_id != i)
      throw std::invalid_argument("transcript: round ids not contiguous at position " +
                                  std::to_string(i));
    if (r.lost) continue;
    if (!r.action1 || !r.action2 || !r.alice_remeasure1 || !r.alice_remeasure2)
      throw std::invalid_argument("transcript: round " + std::to_string(i) + " incomplete");
    if ((*r.action1 == BobAction::Measure) != r.bob1_outcome.has_value() ||
        (*r.action2 == BobAction::Measure) != r.bob2_outcome.has_value())
      throw std::invalid_argument("transcript: round " + std::to_string(i) +
                                  " has outcome/action mismatch");
  }
}

inline DisclosureSet disclose(const Transcript& t) {
  check_complete(t);
  DisclosureSet d;
  for (const RoundRecord& r : t.rounds) {
    if (r.prep.basis == BasisSet::S1) d.s1_rounds.push_back(r.round_id);
    if (r.action1 == BobAction::Measure) d.bob1_measured.push_back(r.round_id);
    if (r.action2 == BobAction::Measure) d.bob2_measured.push_back(r.round_id);
    if (r.lost) d.lost_rounds.push_back(r.round_id);
  }
  return d;
}

}  // namespace sqlayer
