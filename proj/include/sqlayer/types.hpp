#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

#include "sqlayer/qudit.hpp"

namespace sqlayer {

enum class Link { ToBob1, ToBob2 };
enum class Direction { Forward, Backward, Both };
enum class BobAction { Measure, Reflect };

constexpr std::size_t link_dim(Link link) noexcept {
  return link == Link::ToBob1 ? kFirstDim : kSecondDim;
}

constexpr bool covers(Direction configured, Direction pass) noexcept {
  return configured == Direction::Both || configured == pass;
}

inline std::string_view to_string(Link l) { return l == Link::ToBob1 ? "bob1" : "bob2"; }
inline std::string_view to_string(BasisSet b) { return b == BasisSet::S1 ? "S1" : "S2"; }
inline std::string_view to_string(Basis b) {
  return b == Basis::Computational ? "comp" : "fourier";
}
inline std::string_view to_string(BobAction a) {
  return a == BobAction::Measure ? "MEASURE" : "REFLECT";
}
inline std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::Forward: return "fwd";
    case Direction::Backward: return "bwd";
    case Direction::Both: return "both";
  }
  return "?";
}

inline Link parse_link(std::string_view s) {
  if (s == "bob1") return Link::ToBob1;
  if (s == "bob2") return Link::ToBob2;
  throw std::invalid_argument("unknown link '" + std::string(s) + "'");
}
inline BasisSet parse_basis_set(std::string_view s) {
  if (s == "S1") return BasisSet::S1;
  if (s == "S2") return BasisSet::S2;
  throw std::invalid_argument("unknown basis set '" + std::string(s) + "'");
}
inline Basis parse_basis(std::string_view s) {
  if (s == "comp" || s == "computational") return Basis::Computational;
  if (s == "fourier") return Basis::Fourier;
  throw std::invalid_argument("unknown basis '" + std::string(s) + "'");
}
inline BobAction parse_action(std::string_view s) {
  if (s == "MEASURE") return BobAction::Measure;
  if (s == "REFLECT") return BobAction::Reflect;
  throw std::invalid_argument("unknown action '" + std::string(s) + "'");
}
inline Direction parse_direction(std::string_view s) {
  if (s == "fwd") return Direction::Forward;
  if (s == "bwd") return Direction::Backward;
  if (s == "both") return Direction::Both;
  throw std::invalid_argument("unknown direction '" + std::string(s) + "'");
}

/// (basis Alice sent, Bob1's action, Bob2's action). Eight in total.
struct Category {
  BasisSet basis;
  BobAction bob1;
  BobAction bob2;

  static constexpr std::size_t kCount = 8;

  constexpr std::size_t index() const noexcept {
    return (basis == BasisSet::S2 ? 4u : 0u) + (bob1 == BobAction::Reflect ? 2u : 0u) +
           (bob2 == BobAction::Reflect ? 1u : 0u);
  }
  static constexpr Category from_index(std::size_t i) noexcept {
    return {i & 4u ? BasisSet::S2 : BasisSet::S1,
            i & 2u ? BobAction::Reflect : BobAction::Measure,
            i & 1u ? BobAction::Reflect : BobAction::Measure};
  }
  std::string name() const {
    auto c = [](BobAction a) { return a == BobAction::Measure ? 'M' : 'R'; };
    return std::string(to_string(basis)) + "/" + c(bob1) + c(bob2);
  }
  friend constexpr bool operator==(const Category&, const Category&) = default;
};

template <class T>
using PerCategory = std::array<T, Category::kCount>;

}  // namespace sqlayer
