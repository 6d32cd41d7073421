#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sqlayer/channel.hpp"
#include "sqlayer/errors.hpp"
#include "sqlayer/messaging.hpp"
#include "sqlayer/roles.hpp"
#include "sqlayer/serialize.hpp"
#include "sqlayer/sift.hpp"
#include "sqlayer/trits.hpp"

namespace sqlayer {

enum class Protocol { SQKD, TLSQSC };
enum class Transport { InProcess, Socket };

inline std::string_view to_string(Protocol p) { return p == Protocol::SQKD ? "SQKD" : "TLSQSC"; }
inline Protocol parse_protocol(std::string_view s) {
  if (s == "SQKD" || s == "sqkd") return Protocol::SQKD;
  if (s == "TLSQSC" || s == "tlsqsc") return Protocol::TLSQSC;
  throw std::invalid_argument("unknown protocol '" + std::string(s) + "'");
}

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;
};

inline Endpoint parse_endpoint(std::string_view s) {
  const auto colon = s.rfind(':');
  if (colon == std::string_view::npos) throw std::invalid_argument("endpoint must be host:port");
  const int port = std::stoi(std::string(s.substr(colon + 1)));
  if (port <= 0 || port > 65535) throw std::invalid_argument("port out of range");
  return {std::string(s.substr(0, colon)), static_cast<std::uint16_t>(port)};
}

/// Message payload as given by the user: a trit string, or text converted
/// at 6 trits per byte.
struct MessagePayload {
  TritString trits;
  bool is_text = false;

  static MessagePayload parse(std::string_view spec) {
    if (spec.starts_with("text:")) return {bytes_to_trits(spec.substr(5)), true};
    return {TritString::parse(spec), false};
  }
};

struct RunConfig {
  std::size_t n_rounds = 10000;
  std::uint64_t seed = 0;
  Protocol protocol = Protocol::SQKD;
  ChannelStack channels;
  double abort_threshold = 0.0;
  std::optional<MessagePayload> message;
  Transport transport = Transport::InProcess;
  Endpoint bob1, bob2;
  std::string out_dir;

  void validate() const {
    if (n_rounds == 0) throw std::invalid_argument("config: rounds must be positive");
    if (!(abort_threshold >= 0.0 && abort_threshold <= 1.0))
      throw std::invalid_argument("config: threshold must be in [0,1]");
    if (protocol == Protocol::TLSQSC && !message)
      throw std::invalid_argument("config: TLSQSC needs a message");
    for (const auto& c : channels) c.validate();
  }

  /// Parameters that determine the run's outcome. Transport and output
  /// location are deliberately absent.
  ojson outcome_json() const {
    ojson j;
    j["n_rounds"] = n_rounds;
    j["seed"] = seed;
    j["protocol"] = std::string(to_string(protocol));
    ojson ch = ojson::array();
    for (const auto& c : channels) ch.push_back(sqlayer::to_json(c));
    j["channels"] = ch;
    j["abort_threshold"] = abort_threshold;
    j["message"] = message ? ojson(message->trits.str()) : ojson(nullptr);
    j["message_is_text"] = message && message->is_text;
    return j;
  }

  std::string digest() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(outcome_json().dump())));
    return buf;
  }

  ojson to_json() const {
    ojson j = outcome_json();
    j["transport"] = transport == Transport::InProcess ? "inprocess" : "socket";
    j["bob1"] = bob1.host + ":" + std::to_string(bob1.port);
    j["bob2"] = bob2.host + ":" + std::to_string(bob2.port);
    j["out_dir"] = out_dir;
    return j;
  }

  /// Reads a run-config document. Missing keys keep their defaults.
  static RunConfig from_json(const ojson& j) {
    RunConfig c;
    if (j.contains("n_rounds")) c.n_rounds = j["n_rounds"].get<std::size_t>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("protocol")) c.protocol = parse_protocol(j["protocol"].get<std::string>());
    if (j.contains("channels"))
      for (const auto& ch : j["channels"]) c.channels.push_back(channel_from_json(ch));
    if (j.contains("abort_threshold")) c.abort_threshold = j["abort_threshold"].get<double>();
    if (j.contains("message") && !j["message"].is_null()) {
      const bool text = j.value("message_is_text", false);
      c.message = MessagePayload{TritString::parse(j["message"].get<std::string>()), text};
    }
    if (j.contains("transport")) {
      const auto t = j["transport"].get<std::string>();
      if (t == "inprocess")
        c.transport = Transport::InProcess;
      else if (t == "socket")
        c.transport = Transport::Socket;
      else
        throw std::invalid_argument("unknown transport '" + t + "'");
    }
    if (j.contains("bob1")) c.bob1 = parse_endpoint(j["bob1"].get<std::string>());
    if (j.contains("bob2")) c.bob2 = parse_endpoint(j["bob2"].get<std::string>());
    if (j.contains("out_dir")) c.out_dir = j["out_dir"].get<std::string>();
    return c;
  }
};

namespace detail {

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

inline std::vector<Link> links_for(std::string_view s) {
  if (s == "all") return {Link::ToBob1, Link::ToBob2};
  return {parse_link(s)};
}

inline double parse_probability(std::string_view s) {
  std::size_t used = 0;
  const double p = std::stod(std::string(s), &used);
  if (used != s.size() || !(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument("probability must be a number in [0,1], got '" +
                                std::string(s) + "'");
  return p;
}

}  // namespace detail

/// "link:dir:basis[,...]", e.g. "bob1:fwd:comp,bob2:both:fourier"; "none" is empty.
inline ChannelStack parse_eve_spec(std::string_view spec) {
  ChannelStack out;
  if (spec.empty() || spec == "none") return out;
  for (auto item : detail::split(spec, ',')) {
    const auto parts = detail::split(item, ':');
    if (parts.size() != 3)
      throw std::invalid_argument("eve spec '" + std::string(item) + "' must be link:dir:basis");
    for (Link l : detail::links_for(parts[0]))
      out.push_back({l, parse_direction(parts[1]),
                     channel_kind::InterceptResend{parse_basis(parts[2])}});
  }
  return out;
}

/// "[link:][dir:]p", link in {bob1,bob2,all} (default all), dir default fwd.
template <class Kind>
ChannelStack parse_noise_spec(std::string_view spec) {
  const auto parts = detail::split(spec, ':');
  std::string_view link = "all", dir = "fwd", p;
  if (parts.size() == 1) {
    p = parts[0];
  } else if (parts.size() == 2) {
    if (parts[0] == "fwd" || parts[0] == "bwd" || parts[0] == "both")
      dir = parts[0];
    else
      link = parts[0];
    p = parts[1];
  } else if (parts.size() == 3) {
    link = parts[0];
    dir = parts[1];
    p = parts[2];
  } else {
    throw std::invalid_argument("noise spec '" + std::string(spec) + "' must be [link:][dir:]p");
  }
  ChannelStack out;
  for (Link l : detail::links_for(link))
    out.push_back({l, parse_direction(dir), Kind{detail::parse_probability(p)}});
  return out;
}

/// Everything a run produces.
struct RunOutcome {
  Transcript transcript;
  DisclosureSet disclosure;
  SiftedSets sifted;
  KeyMaterial keys;
  EavesdropResult test;
  RunReport report;
  EveLog eve_log;
  std::optional<CipherMessage> cipher;  // TLSQSC only, never on abort
  std::optional<TritString> decoded;    // what Bob1 recovered
};

/// Steps 4-5 and key extraction over a finished transcript.
inline RunOutcome analyze(Transcript transcript, EveLog eve_log, const RunConfig& config) {
  RunOutcome out;
  out.transcript = std::move(transcript);
  out.eve_log = std::move(eve_log);
  out.disclosure = disclose(out.transcript);
  out.sifted = sift(out.transcript, out.disclosure);
  out.test = eavesdrop_test(out.transcript, out.sifted.check_rounds, config.abort_threshold);
  out.keys = extract_keys(out.transcript, out.sifted.key_rounds);
  out.report = report(out.transcript, out.sifted, out.keys, config.abort_threshold);
  return out;
}

/// All three participants in this process.
inline RunOutcome run_in_process(const RunConfig& config,
                                 const std::vector<RoundScript>& scripts = {}) {
  config.validate();
  Participants parts(config.seed);
  Network net(config.channels, config.seed);
  Transcript t;
  t.config_digest = config.digest();
  t.rounds.reserve(config.n_rounds);
  for (std::size_t i = 0; i < config.n_rounds; ++i)
    t.rounds.push_back(run_round(i, parts, net, i < scripts.size() ? scripts[i] : RoundScript{}));
  RunOutcome out = analyze(std::move(t), net.eve_log(), config);
  if (config.protocol == Protocol::TLSQSC && !out.test.abort) {
    TlsqscResult r = run_tlsqsc(config.message->trits, out.keys, out.test);
    out.cipher = std::move(r.cipher);
    out.decoded = std::move(r.decoded);
  }
  return out;
}

/// The report document: run identity, statistics and messaging result.
inline ojson report_document(const RunOutcome& out, const RunConfig& config) {
  ojson j;
  j["protocol"] = std::string(to_string(config.protocol));
  j["config_digest"] = out.transcript.config_digest;
  j["seed"] = config.seed;
  const ojson stats = to_json(out.report);
  for (auto it = stats.begin(); it != stats.end(); ++it) j[it.key()] = it.value();
  if (config.protocol == Protocol::TLSQSC) {
    ojson m;
    m["length"] = config.message->trits.size();
    m["ciphertext_emitted"] = out.cipher.has_value();
    m["delivered"] = out.decoded && *out.decoded == config.message->trits;
    j["message"] = m;
  }
  return j;
}

/// 0 completed, 2 aborted (eavesdropper detected or no check rounds).
inline int exit_status(const RunOutcome& out) { return out.test.abort ? 2 : 0; }

namespace detail {

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + p.string() + " for writing");
  f << text;
  if (!f) throw std::runtime_error("write failed: " + p.string());
}

}  // namespace detail

/**
 * Writes transcript.jsonl, report.json, categories.csv, eve_log.jsonl (when
 * an eavesdropper is configured) and, unless the session aborted, the key
 * files under keys/ plus ciphertext/decoded message for TLSQSC.
 */
inline void write_artifacts(const RunOutcome& out, const RunConfig& config,
                            const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  {
    std::ostringstream os;
    write_transcript(os, out.transcript);
    detail::write_file(dir / "transcript.jsonl", os.str());
  }
  detail::write_file(dir / "report.json", report_document(out, config).dump(2) + "\n");
  {
    std::ostringstream os;
    write_category_csv(os, out.report);
    detail::write_file(dir / "categories.csv", os.str());
  }
  bool has_eve = false;
  for (const auto& c : config.channels) has_eve = has_eve || c.is_eve();
  if (has_eve) {
    std::ostringstream os;
    for (const auto& e : out.eve_log)
      os << ojson{{"round", e.round_id},
                  {"link", std::string(to_string(e.link))},
                  {"dir", std::string(to_string(e.direction))},
                  {"eve_outcome", e.eve_outcome}}
                .dump()
         << '\n';
    detail::write_file(dir / "eve_log.jsonl", os.str());
  }
  if (out.test.abort) return;
  fs::create_directories(dir / "keys");
  detail::write_file(dir / "keys" / "layer1_alice.txt", out.keys.layer1.alice.str() + "\n");
  detail::write_file(dir / "keys" / "layer1_bob1.txt", out.keys.layer1.bob1.str() + "\n");
  detail::write_file(dir / "keys" / "layer2_alice.txt", out.keys.layer2.alice.str() + "\n");
  detail::write_file(dir / "keys" / "layer2_bob1.txt", out.keys.layer2.bob1.str() + "\n");
  detail::write_file(dir / "keys" / "layer2_bob2.txt", out.keys.layer2.bob2.str() + "\n");
  if (out.cipher) {
    detail::write_file(dir / "ciphertext.txt", out.cipher->ciphertext.str() + "\n");
    std::string decoded = out.decoded ? out.decoded->str() : std::string();
    if (out.decoded && config.message && config.message->is_text) {
      try {
        decoded = trits_to_bytes(*out.decoded);
      } catch (const std::invalid_argument&) {
        // Not valid text (nonzero QBER); keep the raw trits.
      }
    }
    detail::write_file(dir / "decoded.txt", decoded + "\n");
  }
}

}  // namespace sqlayer
