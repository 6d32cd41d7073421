#pragma once

// JSON forms of transcripts, channel models and reports.

#include <istream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "sqlayer/channel.hpp"
#include "sqlayer/roles.hpp"
#include "sqlayer/sift.hpp"

namespace sqlayer {

using ojson = nlohmann::ordered_json;

namespace detail {

template <class T, class F>
ojson opt(const std::optional<T>& v, F&& f) {
  return v ? ojson(f(*v)) : ojson(nullptr);
}

template <class T>
std::optional<T> get_opt(const ojson& j, const char* key) {
  const auto& v = j.at(key);
  if (v.is_null()) return std::nullopt;
  return v.get<T>();
}

}  // namespace detail

inline ojson to_json(const RoundRecord& r) {
  auto name = [](auto x) { return std::string(to_string(x)); };
  auto same = [](int x) { return x; };
  ojson j;
  j["round"] = r.round_id;
  j["basis"] = name(r.prep.basis);
  j["a"] = r.prep.a;
  j["action1"] = detail::opt(r.action1, name);
  j["action2"] = detail::opt(r.action2, name);
  j["bob1"] = detail::opt(r.bob1_outcome, same);
  j["bob2"] = detail::opt(r.bob2_outcome, same);
  j["alice1"] = detail::opt(r.alice_remeasure1, same);
  j["alice2"] = detail::opt(r.alice_remeasure2, same);
  j["remeasure_basis"] = name(r.alice_remeasure_basis);
  j["lost"] = r.lost;
  return j;
}

inline RoundRecord round_from_json(const ojson& j) {
  RoundRecord r;
  r.round_id = j.at("round").get<std::size_t>();
  r.prep.basis = parse_basis_set(j.at("basis").get<std::string>());
  r.prep.a = j.at("a").get<int>();
  if (auto s = detail::get_opt<std::string>(j, "action1")) r.action1 = parse_action(*s);
  if (auto s = detail::get_opt<std::string>(j, "action2")) r.action2 = parse_action(*s);
  r.bob1_outcome = detail::get_opt<int>(j, "bob1");
  r.bob2_outcome = detail::get_opt<int>(j, "bob2");
  r.alice_remeasure1 = detail::get_opt<int>(j, "alice1");
  r.alice_remeasure2 = detail::get_opt<int>(j, "alice2");
  r.alice_remeasure_basis = parse_basis_set(j.at("remeasure_basis").get<std::string>());
  r.lost = j.at("lost").get<bool>();
  return r;
}

/// One header line, then one line per round.
inline void write_transcript(std::ostream& os, const Transcript& t) {
  ojson head;
  head["config_digest"] = t.config_digest;
  head["n_rounds"] = t.rounds.size();
  os << head.dump() << '\n';
  for (const RoundRecord& r : t.rounds) os << to_json(r).dump() << '\n';
}

inline Transcript read_transcript(std::istream& is) {
  Transcript t;
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("transcript: empty input");
  const ojson head = ojson::parse(line);
  t.config_digest = head.at("config_digest").get<std::string>();
  const auto n = head.at("n_rounds").get<std::size_t>();
  t.rounds.reserve(n);
  while (std::getline(is, line))
    if (!line.empty()) t.rounds.push_back(round_from_json(ojson::parse(line)));
  if (t.rounds.size() != n)
    throw std::runtime_error("transcript: header promises " + std::to_string(n) +
                             " rounds, found " + std::to_string(t.rounds.size()));
  return t;
}

inline ojson to_json(const ChannelModel& c) {
  ojson j;
  j["link"] = std::string(to_string(c.link));
  j["direction"] = std::string(to_string(c.direction));
  std::visit(
      [&](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, channel_kind::Identity>) {
          j["kind"] = "identity";
        } else if constexpr (std::is_same_v<K, channel_kind::Loss>) {
          j["kind"] = "loss";
          j["p"] = k.p_loss;
        } else if constexpr (std::is_same_v<K, channel_kind::Depolarize>) {
          j["kind"] = "depolarize";
          j["p"] = k.p_dep;
        } else {
          j["kind"] = "intercept_resend";
          j["basis"] = std::string(to_string(k.basis));
        }
      },
      c.kind);
  return j;
}

inline ChannelModel channel_from_json(const ojson& j) {
  ChannelModel c{parse_link(j.at("link").get<std::string>()),
                 parse_direction(j.at("direction").get<std::string>()), channel_kind::Identity{}};
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "identity")
    c.kind = channel_kind::Identity{};
  else if (kind == "loss")
    c.kind = channel_kind::Loss{j.at("p").get<double>()};
  else if (kind == "depolarize")
    c.kind = channel_kind::Depolarize{j.at("p").get<double>()};
  else if (kind == "intercept_resend")
    c.kind = channel_kind::InterceptResend{parse_basis(j.at("basis").get<std::string>())};
  else
    throw std::invalid_argument("unknown channel kind '" + kind + "'");
  c.validate();
  return c;
}

inline ojson to_json(const RunReport& r) {
  ojson j;
  j["n_rounds"] = r.n_rounds;
  j["lost_rounds"] = r.lost_rounds;
  j["sift_fractions"] = {{"check", r.check_fraction},
                         {"key", r.key_fraction},
                         {"discarded", r.discarded_fraction},
                         {"lost", r.lost_fraction}};
  ojson cats = ojson::array();
  for (std::size_t i = 0; i < Category::kCount; ++i) {
    const CategoryStats& c = r.categories[i];
    cats.push_back({{"name", Category::from_index(i).name()},
                    {"rounds", c.rounds},
                    {"fraction", c.fraction},
                    {"mismatch_first", c.mismatch_first},
                    {"mismatch_second", c.mismatch_second},
                    {"mismatch_any", c.mismatch_any}});
  }
  j["categories"] = cats;
  j["check_rounds"] = r.check_rounds;
  j["check_mismatch_rate"] = {{"first", r.check_mismatch_first},
                              {"second", r.check_mismatch_second}};
  j["threshold"] = r.threshold;
  j["abort"] = r.abort;
  j["inconclusive"] = r.inconclusive;
  j["key_length"] = r.key_length;
  j["layer1_qber"] = r.layer1_qber;
  j["layer2_qber"] = r.layer2_qber;
  j["layer2_qber_pairwise"] = {{"bob1", r.layer2_qber_bob1}, {"bob2", r.layer2_qber_bob2}};
  j["sifted_rate_bits_per_layer"] = r.sifted_rate_bits_per_layer;
  j["layer1_entropy"] = r.layer1_entropy;
  j["layer2_entropy"] = r.layer2_entropy;
  j["layer1_frequencies"] = r.layer1_frequencies;
  j["layer2_frequencies"] = r.layer2_frequencies;
  j["independence_stat"] = r.independence_stat;
  return j;
}

/// Per-category mismatch rates as CSV, for external plotting.
inline void write_category_csv(std::ostream& os, const RunReport& r) {
  os << "category,rounds,fraction,mismatch_first,mismatch_second,mismatch_any\n";
  for (std::size_t i = 0; i < Category::kCount; ++i) {
    const CategoryStats& c = r.categories[i];
    os << Category::from_index(i).name() << ',' << c.rounds << ',' << ojson(c.fraction).dump()
       << ',' << ojson(c.mismatch_first).dump() << ',' << ojson(c.mismatch_second).dump() << ','
       << ojson(c.mismatch_any).dump() << '\n';
  }
}

}  // namespace sqlayer
