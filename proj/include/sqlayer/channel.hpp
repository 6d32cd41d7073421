#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "sqlayer/qudit.hpp"
#include "sqlayer/rng.hpp"
#include "sqlayer/types.hpp"

namespace sqlayer {

namespace channel_kind {
struct Identity {
  friend bool operator==(const Identity&, const Identity&) = default;
};
struct Loss {
  double p_loss;
  friend bool operator==(const Loss&, const Loss&) = default;
};
/// Replaces the carrier by a uniformly random computational basis state with
/// probability p_dep. At the ensemble level this is exactly ρ -> (1-p)ρ + p I/d.
struct Depolarize {
  double p_dep;
  friend bool operator==(const Depolarize&, const Depolarize&) = default;
};
struct InterceptResend {
  Basis basis;
  friend bool operator==(const InterceptResend&, const InterceptResend&) = default;
};
}  // namespace channel_kind

using ChannelKind = std::variant<channel_kind::Identity, channel_kind::Loss,
                                 channel_kind::Depolarize, channel_kind::InterceptResend>;

struct ChannelModel {
  Link link;
  Direction direction;
  ChannelKind kind;

  void validate() const {
    auto check = [](double p, const char* what) {
      if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument(std::string(what) + " must be in [0,1]");
    };
    if (auto* l = std::get_if<channel_kind::Loss>(&kind)) check(l->p_loss, "p_loss");
    if (auto* d = std::get_if<channel_kind::Depolarize>(&kind)) check(d->p_dep, "p_dep");
  }

  bool is_eve() const noexcept {
    return std::holds_alternative<channel_kind::InterceptResend>(kind);
  }

  friend bool operator==(const ChannelModel&, const ChannelModel&) = default;
};

/// Channels applied in order. Entries for the other link are skipped.
using ChannelStack = std::vector<ChannelModel>;

struct ChannelResult {
  std::optional<StateVector> state;  // absent when the carrier was lost
  std::optional<int> eve_outcome;
};

inline ChannelResult apply(const ChannelModel& channel, const StateVector& state,
                           RngStream& rng) {
  if (state.dim() != link_dim(channel.link))
    throw std::invalid_argument("apply: state dimension " + std::to_string(state.dim()) +
                                " does not match link " + std::string(to_string(channel.link)));
  return std::visit(
      [&](const auto& k) -> ChannelResult {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, channel_kind::Identity>) {
          return {state, std::nullopt};
        } else if constexpr (std::is_same_v<K, channel_kind::Loss>) {
          if (rng.bernoulli(k.p_loss)) return {std::nullopt, std::nullopt};
          return {state, std::nullopt};
        } else if constexpr (std::is_same_v<K, channel_kind::Depolarize>) {
          if (!rng.bernoulli(k.p_dep)) return {state, std::nullopt};
          const auto j = rng.uniform_int(state.dim());
          return {StateVector::basis_state(state.dim(), j), std::nullopt};
        } else {
          MeasurementOutcome m = measure(state, k.basis, rng);
          return {std::move(m.post_state), m.index};
        }
      },
      channel.kind);
}

struct EveLogEntry {
  std::size_t round_id;
  Link link;
  Direction direction;  // Forward or Backward, never Both
  int eve_outcome;
  friend bool operator==(const EveLogEntry&, const EveLogEntry&) = default;
};

using EveLog = std::vector<EveLogEntry>;

/**
 * The configured channel stack together with one random stream per entry.
 * Entry i draws from stream "channel:i", so channels never disturb the
 * participants' streams or each other.
 */
class Network {
 public:
  Network(ChannelStack stack, std::uint64_t seed) : stack_(std::move(stack)) {
    streams_.reserve(stack_.size());
    for (std::size_t i = 0; i < stack_.size(); ++i) {
      stack_[i].validate();
      streams_.emplace_back(seed, "channel:" + std::to_string(i));
    }
  }

  const ChannelStack& stack() const noexcept { return stack_; }
  const EveLog& eve_log() const noexcept { return eve_log_; }

  /// Carries `state` across `link` in direction `pass` (Forward or Backward).
  std::optional<StateVector> traverse(std::size_t round_id, Link link, Direction pass,
                                      StateVector state) {
    for (std::size_t i = 0; i < stack_.size(); ++i) {
      const ChannelModel& c = stack_[i];
      if (c.link != link || !covers(c.direction, pass)) continue;
      ChannelResult r = apply(c, state, streams_[i]);
      if (r.eve_outcome) eve_log_.push_back({round_id, link, pass, *r.eve_outcome});
      if (!r.state) return std::nullopt;
      state = std::move(*r.state);
    }
    return state;
  }

 private:
  ChannelStack stack_;
  std::vector<RngStream> streams_;
  EveLog eve_log_;
};

/// Exact per-category mismatch probabilities of Alice's remeasurement.
struct OracleEntry {
  double mismatch_first = 0.0;   // 9-level subsystem
  double mismatch_second = 0.0;  // 3-level subsystem
  double mismatch_any = 0.0;
};

using OracleTable = PerCategory<OracleEntry>;

namespace detail {

// Weighted branches of a pure state; each channel or measurement splits them.
using Branches = std::vector<std::pair<double, StateVector>>;

inline Branches split(const Branches& in, Basis basis, FourierSign sign) {
  Branches out;
  for (const auto& [w, psi] : in) {
    const auto p = outcome_probabilities(psi, basis, sign);
    for (std::size_t k = 0; k < p.size(); ++k)
      if (p[k] > 1e-15) out.emplace_back(w * p[k], basis_vector(basis, psi.dim(), k, sign));
  }
  return out;
}

inline Branches through(const ChannelStack& stack, Link link, Direction pass, Branches b,
                        FourierSign sign) {
  for (const ChannelModel& c : stack) {
    if (c.link != link || !covers(c.direction, pass)) continue;
    if (std::holds_alternative<channel_kind::Identity>(c.kind)) continue;
    if (auto* ir = std::get_if<channel_kind::InterceptResend>(&c.kind)) {
      b = split(b, ir->basis, sign);
      continue;
    }
    throw std::invalid_argument(
        "detection_probability_oracle: only Identity and InterceptResend are supported");
  }
  return b;
}

/// P(Alice recovers index `k` on this subsystem) for one preparation.
inline double match_probability(const ChannelStack& stack, Link link, BasisSet set,
                                std::size_t k, BobAction action, FourierSign sign) {
  const Basis basis = subsystem_basis(set);
  const std::size_t d = link_dim(link);
  const StateVector sent = basis_vector(basis, d, k, sign);
  Branches b{{1.0, sent}};
  b = through(stack, link, Direction::Forward, std::move(b), sign);
  if (action == BobAction::Measure) b = split(b, Basis::Computational, sign);
  b = through(stack, link, Direction::Backward, std::move(b), sign);
  double match = 0.0;
  for (const auto& [w, psi] : b) match += w * std::norm(overlap(sent, psi));
  return match;
}

}  // namespace detail

/**
 * Exhaustive enumeration over Alice's 18 preparations, both Bobs' actions
 * and every measurement branch (Eve's and the Bobs'), giving the exact
 * probability that Alice's remeasurement disagrees with what she sent.
 *
 * Only Identity and InterceptResend are supported; anything else throws.
 * `sign` selects the DFT convention for both S2 and Eve's Fourier basis.
 */
inline OracleTable detection_probability_oracle(const ChannelStack& stack,
                                                FourierSign sign = FourierSign::Positive) {
  OracleTable table{};
  for (std::size_t ci = 0; ci < Category::kCount; ++ci) {
    const Category cat = Category::from_index(ci);
    OracleEntry e;
    for (int a = 0; a < kAlphabet; ++a) {
      const double m1 = detail::match_probability(stack, Link::ToBob1, cat.basis,
                                                  static_cast<std::size_t>(a), cat.bob1, sign);
      const double m2 = detail::match_probability(stack, Link::ToBob2, cat.basis,
                                                  static_cast<std::size_t>(a % 3), cat.bob2, sign);
      // Given a, the two links evolve independently.
      e.mismatch_first += (1.0 - m1) / kAlphabet;
      e.mismatch_second += (1.0 - m2) / kAlphabet;
      e.mismatch_any += (1.0 - m1 * m2) / kAlphabet;
    }
    table[ci] = e;
  }
  return table;
}

}  // namespace sqlayer
