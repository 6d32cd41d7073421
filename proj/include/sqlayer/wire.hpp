#pragma once

// Line-delimited wire protocol between participants.
//
// Each message is one line: a type tag, one space, a JSON object.
//
//   QUDIT {"round":3,"link":"bob1","dir":"fwd","dim":9,"amps":[[re,im],...]}
//   LOST {"round":3,"link":"bob2","dir":"fwd"}
//   BASIS_DISCLOSURE {"s1_rounds":[...],"lost_rounds":[...]}
//   ACTION_DISCLOSURE {"party":"bob1","measured":[...]}
//   CIPHER {"ciphertext":"0120","key_rounds":[...]}
//   REPORT {"party":"alice","body":{...}}
//
// Amplitudes are printed with 17 significant digits, so every double
// survives the trip exactly. The quantum channel is simulated: amplitudes on
// the wire are a modelling device, not something a real link could carry.

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "sqlayer/errors.hpp"
#include "sqlayer/qudit.hpp"
#include "sqlayer/trits.hpp"
#include "sqlayer/types.hpp"

namespace sqlayer::wire {

inline constexpr double kWireNormTolerance = 1e-6;

struct Qudit {
  std::size_t round_id;
  Link link;
  Direction dir;
  StateVector state;
  friend bool operator==(const Qudit&, const Qudit&) = default;
};

struct Lost {
  std::size_t round_id;
  Link link;
  Direction dir;
  friend bool operator==(const Lost&, const Lost&) = default;
};

struct BasisDisclosure {
  std::vector<std::size_t> s1_rounds;
  std::vector<std::size_t> lost_rounds;
  friend bool operator==(const BasisDisclosure&, const BasisDisclosure&) = default;
};

struct ActionDisclosure {
  Link party;
  std::vector<std::size_t> measured;
  friend bool operator==(const ActionDisclosure&, const ActionDisclosure&) = default;
};

struct Cipher {
  TritString ciphertext;
  std::vector<std::size_t> key_rounds;
  friend bool operator==(const Cipher&, const Cipher&) = default;
};

struct Report {
  std::string party;
  nlohmann::ordered_json body;
  friend bool operator==(const Report&, const Report&) = default;
};

using Message = std::variant<Qudit, Lost, BasisDisclosure, ActionDisclosure, Cipher, Report>;

namespace detail {

inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string dump_ids(const std::vector<std::size_t>& ids) {
  return nlohmann::json(ids).dump();
}

}  // namespace detail

inline std::string serialize(const Message& msg) {
  return std::visit(
      [](const auto& m) -> std::string {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, Qudit>) {
          std::string s = "QUDIT {\"round\":" + std::to_string(m.round_id) + ",\"link\":\"" +
                          std::string(to_string(m.link)) + "\",\"dir\":\"" +
                          std::string(to_string(m.dir)) +
                          "\",\"dim\":" + std::to_string(m.state.dim()) + ",\"amps\":[";
          for (std::size_t i = 0; i < m.state.dim(); ++i) {
            if (i) s += ',';
            s += '[' + detail::format_double(m.state[i].real()) + ',' +
                 detail::format_double(m.state[i].imag()) + ']';
          }
          return s + "]}";
        } else if constexpr (std::is_same_v<M, Lost>) {
          nlohmann::ordered_json j{{"round", m.round_id},
                                   {"link", to_string(m.link)},
                                   {"dir", to_string(m.dir)}};
          return "LOST " + j.dump();
        } else if constexpr (std::is_same_v<M, BasisDisclosure>) {
          return "BASIS_DISCLOSURE {\"s1_rounds\":" + detail::dump_ids(m.s1_rounds) +
                 ",\"lost_rounds\":" + detail::dump_ids(m.lost_rounds) + "}";
        } else if constexpr (std::is_same_v<M, ActionDisclosure>) {
          return "ACTION_DISCLOSURE {\"party\":\"" + std::string(to_string(m.party)) +
                 "\",\"measured\":" + detail::dump_ids(m.measured) + "}";
        } else if constexpr (std::is_same_v<M, Cipher>) {
          return "CIPHER {\"ciphertext\":\"" + m.ciphertext.str() +
                 "\",\"key_rounds\":" + detail::dump_ids(m.key_rounds) + "}";
        } else {
          nlohmann::ordered_json j;
          j["party"] = m.party;
          j["body"] = m.body;
          return "REPORT " + j.dump();
        }
      },
      msg);
}

namespace detail {

inline Direction wire_direction(const nlohmann::ordered_json& j) {
  const Direction d = parse_direction(j.at("dir").get<std::string>());
  if (d == Direction::Both) throw std::invalid_argument("dir must be fwd or bwd");
  return d;
}

inline Qudit parse_qudit(const nlohmann::ordered_json& j, std::size_t line) {
  Qudit q{j.at("round").get<std::size_t>(), parse_link(j.at("link").get<std::string>()),
          wire_direction(j), StateVector::basis_state(3, 0)};
  const auto dim = j.at("dim").get<std::size_t>();
  const auto& amps = j.at("amps");
  if (!amps.is_array() || amps.size() != dim)
    throw WireError(line, "QUDIT: amplitude count does not match dim");
  if (dim != link_dim(q.link))
    throw ProtocolViolation(line, "QUDIT: dim " + std::to_string(dim) + " wrong for link " +
                                      std::string(to_string(q.link)));
  std::vector<Complex> v;
  v.reserve(dim);
  for (const auto& pair : amps) {
    if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number())
      throw WireError(line, "QUDIT: amplitude must be a [re, im] pair");
    v.emplace_back(pair[0].get<double>(), pair[1].get<double>());
  }
  double norm = 0.0;
  for (const auto& a : v) norm += std::norm(a);
  if (!(std::abs(norm - 1.0) <= kWireNormTolerance))
    throw ProtocolViolation(line, "QUDIT: amplitudes not normalized (norm^2 = " +
                                      format_double(norm) + ")");
  q.state = StateVector(std::move(v), kWireNormTolerance);
  return q;
}

}  // namespace detail

/// Parses one line. `line` is the 1-based line number used in error messages.
inline Message parse(std::string_view text, std::size_t line) {
  const auto space = text.find(' ');
  if (space == std::string_view::npos) throw WireError(line, "missing payload");
  const std::string_view tag = text.substr(0, space);
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(text.substr(space + 1));
  } catch (const nlohmann::ordered_json::exception& e) {
    throw WireError(line, std::string(tag) + ": malformed payload: " + e.what());
  }
  if (!j.is_object()) throw WireError(line, std::string(tag) + ": payload must be an object");
  try {
    if (tag == "QUDIT") return detail::parse_qudit(j, line);
    if (tag == "LOST")
      return Lost{j.at("round").get<std::size_t>(), parse_link(j.at("link").get<std::string>()),
                  detail::wire_direction(j)};
    if (tag == "BASIS_DISCLOSURE")
      return BasisDisclosure{j.at("s1_rounds").get<std::vector<std::size_t>>(),
                             j.at("lost_rounds").get<std::vector<std::size_t>>()};
    if (tag == "ACTION_DISCLOSURE")
      return ActionDisclosure{parse_link(j.at("party").get<std::string>()),
                              j.at("measured").get<std::vector<std::size_t>>()};
    if (tag == "CIPHER")
      return Cipher{TritString::parse(j.at("ciphertext").get<std::string>()),
                    j.at("key_rounds").get<std::vector<std::size_t>>()};
    if (tag == "REPORT") return Report{j.at("party").get<std::string>(), j.at("body")};
  } catch (const WireError&) {
    throw;
  } catch (const std::exception& e) {
    throw WireError(line, std::string(tag) + ": " + e.what());
  }
  throw WireError(line, "unknown message type '" + std::string(tag) + "'");
}

}  // namespace sqlayer::wire
