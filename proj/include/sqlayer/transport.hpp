#pragma once

// TCP transport: Alice coordinates and hosts the channel models; each Bob is
// a server that only ever sees the carriers addressed to him plus the public
// discussion.

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <sys/time.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstdint>
#include <cstring>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>

#include "sqlayer/harness.hpp"
#include "sqlayer/wire.hpp"

namespace sqlayer {

/// Connection lost or timed out. The session is incomplete and emits no key.
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  Socket(Socket&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
  Socket& operator=(Socket&& o) noexcept {
    if (this != &o) {
      reset();
      fd_ = std::exchange(o.fd_, -1);
    }
    return *this;
  }
  ~Socket() { reset(); }

  int fd() const noexcept { return fd_; }
  explicit operator bool() const noexcept { return fd_ >= 0; }

  void reset() noexcept {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_ = -1;
};

namespace detail {

[[noreturn]] inline void sys_fail(const std::string& what) {
  throw TransportError(what + ": " + std::strerror(errno));
}

inline sockaddr_in resolve(const Endpoint& ep) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(ep.port);
  if (::inet_pton(AF_INET, ep.host.c_str(), &addr.sin_addr) == 1) return addr;
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (::getaddrinfo(ep.host.c_str(), nullptr, &hints, &res) != 0 || !res)
    throw TransportError("cannot resolve host '" + ep.host + "'");
  addr.sin_addr = reinterpret_cast<sockaddr_in*>(res->ai_addr)->sin_addr;
  ::freeaddrinfo(res);
  return addr;
}

inline void set_timeout(int fd, std::chrono::seconds t) {
  timeval tv{};
  tv.tv_sec = static_cast<decltype(tv.tv_sec)>(t.count());
  ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
  ::setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof tv);
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

}  // namespace detail

/// Newline-framed wire messages over a connected socket.
class LineStream {
 public:
  explicit LineStream(Socket s, std::chrono::seconds timeout = std::chrono::seconds(60))
      : sock_(std::move(s)) {
    detail::set_timeout(sock_.fd(), timeout);
  }

  void send(const wire::Message& m) { send_line(wire::serialize(m)); }

  void send_line(const std::string& line) {
    std::string data = line + '\n';
    std::size_t off = 0;
    while (off < data.size()) {
      const ssize_t n = ::send(sock_.fd(), data.data() + off, data.size() - off, MSG_NOSIGNAL);
      if (n < 0) {
        if (errno == EINTR) continue;
        detail::sys_fail("send");
      }
      off += static_cast<std::size_t>(n);
    }
  }

  /// Next line without its newline; throws TransportError on EOF or timeout.
  std::string read_line() {
    while (true) {
      const auto nl = buf_.find('\n', scan_);
      if (nl != std::string::npos) {
        std::string line = buf_.substr(0, nl);
        buf_.erase(0, nl + 1);
        scan_ = 0;
        ++line_no_;
        return line;
      }
      scan_ = buf_.size();
      char chunk[65536];
      const ssize_t n = ::recv(sock_.fd(), chunk, sizeof chunk, 0);
      if (n == 0) throw TransportError("connection closed by peer");
      if (n < 0) {
        if (errno == EINTR) continue;
        detail::sys_fail("recv");
      }
      buf_.append(chunk, static_cast<std::size_t>(n));
    }
  }

  wire::Message receive() {
    std::string line = read_line();
    return wire::parse(line, line_no_);
  }

  std::size_t lines_read() const noexcept { return line_no_; }

 private:
  Socket sock_;
  std::string buf_;
  std::size_t scan_ = 0;
  std::size_t line_no_ = 0;
};

class Listener {
 public:
  /// Port 0 binds an ephemeral port; see port().
  explicit Listener(const Endpoint& ep) : sock_(::socket(AF_INET, SOCK_STREAM, 0)) {
    if (!sock_) detail::sys_fail("socket");
    int one = 1;
    ::setsockopt(sock_.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr = detail::resolve(ep);
    if (::bind(sock_.fd(), reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0)
      detail::sys_fail("bind " + ep.host + ":" + std::to_string(ep.port));
    if (::listen(sock_.fd(), 1) != 0) detail::sys_fail("listen");
    socklen_t len = sizeof addr;
    ::getsockname(sock_.fd(), reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
  }

  std::uint16_t port() const noexcept { return port_; }

  LineStream accept() {
    while (true) {
      const int fd = ::accept(sock_.fd(), nullptr, nullptr);
      if (fd >= 0) return LineStream(Socket(fd));
      if (errno != EINTR) detail::sys_fail("accept");
    }
  }

 private:
  Socket sock_;
  std::uint16_t port_ = 0;
};

/// Connects, retrying while the server is not yet listening.
inline LineStream connect_to(const Endpoint& ep, int attempts = 50,
                             std::chrono::milliseconds delay = std::chrono::milliseconds(100)) {
  const sockaddr_in addr = detail::resolve(ep);
  for (int i = 0;; ++i) {
    Socket s(::socket(AF_INET, SOCK_STREAM, 0));
    if (!s) detail::sys_fail("socket");
    if (::connect(s.fd(), reinterpret_cast<const sockaddr*>(&addr), sizeof addr) == 0)
      return LineStream(std::move(s));
    if (i + 1 >= attempts) detail::sys_fail("connect " + ep.host + ":" + std::to_string(ep.port));
    std::this_thread::sleep_for(delay);
  }
}

/// What a Bob knows privately at the end of a session.
struct BobSession {
  std::map<std::size_t, std::pair<BobAction, std::optional<int>>> rounds;
  std::optional<TritString> decoded;  // Bob1 in TLSQSC only
};

namespace detail {

[[noreturn]] inline void unexpected(const LineStream& s, const char* expected) {
  throw ProtocolViolation(s.lines_read(), std::string("expected ") + expected);
}

inline ojson private_record(const BobSession& b) {
  ojson rounds = ojson::array();
  for (const auto& [id, rec] : b.rounds)
    rounds.push_back({id, std::string(to_string(rec.first)),
                      rec.second ? ojson(*rec.second) : ojson(nullptr)});
  return {{"rounds", rounds}};
}

}  // namespace detail

/**
 * Runs one Bob over an accepted connection until Alice closes the session
 * with a REPORT. Bob uses the stream "bob1"/"bob2" keyed by `seed`, exactly
 * as in an in-process run.
 */
inline BobSession serve_participant(Link role, LineStream& alice, std::uint64_t seed) {
  RngStream rng(seed, role == Link::ToBob1 ? "bob1" : "bob2");
  BobSession me;
  const std::string party(to_string(role));
  while (true) {
    wire::Message m = alice.receive();
    if (auto* q = std::get_if<wire::Qudit>(&m)) {
      if (q->link != role || q->dir != Direction::Forward) detail::unexpected(alice, "own link");
      BobStep s = bob_step(q->state, rng);
      me.rounds[q->round_id] = {s.action, s.outcome};
      alice.send(wire::Qudit{q->round_id, role, Direction::Backward, std::move(s.returned)});
    } else if (auto* l = std::get_if<wire::Lost>(&m)) {
      alice.send(wire::Lost{l->round_id, role, Direction::Backward});
    } else if (std::holds_alternative<wire::BasisDisclosure>(m)) {
      wire::ActionDisclosure d{role, {}};
      for (const auto& [id, rec] : me.rounds)
        if (rec.first == BobAction::Measure) d.measured.push_back(id);
      alice.send(d);
      // Simulator bookkeeping: Alice needs Bob's private record to score the keys.
      alice.send(wire::Report{party, detail::private_record(me)});
    } else if (auto* c = std::get_if<wire::Cipher>(&m)) {
      if (role != Link::ToBob1) detail::unexpected(alice, "no CIPHER for bob2");
      TritString key;
      for (auto id : c->key_rounds) {
        auto it = me.rounds.find(id);
        if (it == me.rounds.end() || !it->second.second)
          throw ProtocolViolation(alice.lines_read(), "CIPHER names a round without an outcome");
        key.push_back(split_trits(*it->second.second).high);
      }
      me.decoded = decode(c->ciphertext, key);
      alice.send(wire::Report{party, {{"decoded", me.decoded->str()}}});
    } else if (std::holds_alternative<wire::Report>(m)) {
      return me;
    } else {
      detail::unexpected(alice, "QUDIT, LOST, BASIS_DISCLOSURE, CIPHER or REPORT");
    }
  }
}

namespace detail {

inline auto remote_bob(LineStream& bob, Link link) {
  return [&bob, link](std::size_t round_id, const std::optional<StateVector>& arrived) -> BobReply {
    if (!arrived) {
      bob.send(wire::Lost{round_id, link, Direction::Forward});
      auto m = bob.receive();
      auto* l = std::get_if<wire::Lost>(&m);
      if (!l || l->round_id != round_id) unexpected(bob, "LOST acknowledgement");
      return {};
    }
    bob.send(wire::Qudit{round_id, link, Direction::Forward, *arrived});
    auto m = bob.receive();
    auto* q = std::get_if<wire::Qudit>(&m);
    if (!q || q->round_id != round_id || q->link != link || q->dir != Direction::Backward)
      unexpected(bob, "QUDIT reply for the current round");
    return {std::nullopt, std::nullopt, std::move(q->state)};
  };
}

inline void merge_bob(Transcript& t, LineStream& bob, Link link) {
  auto m1 = bob.receive();
  auto* d = std::get_if<wire::ActionDisclosure>(&m1);
  if (!d || d->party != link) unexpected(bob, "ACTION_DISCLOSURE");
  auto m2 = bob.receive();
  auto* r = std::get_if<wire::Report>(&m2);
  if (!r) unexpected(bob, "REPORT with private record");
  std::vector<std::size_t> measured;
  for (const auto& item : r->body.at("rounds")) {
    const auto id = item.at(0).get<std::size_t>();
    if (id >= t.rounds.size()) unexpected(bob, "round id within the session");
    const BobAction a = parse_action(item.at(1).get<std::string>());
    RoundRecord& rec = t.rounds[id];
    (link == Link::ToBob1 ? rec.action1 : rec.action2) = a;
    if (!item.at(2).is_null())
      (link == Link::ToBob1 ? rec.bob1_outcome : rec.bob2_outcome) = item.at(2).get<int>();
    if (a == BobAction::Measure) measured.push_back(id);
  }
  if (measured != d->measured)
    throw ProtocolViolation(bob.lines_read(), "action disclosure disagrees with private record");
}

}  // namespace detail

/// Alice's process in a socket run. Both Bobs must already be serving.
inline RunOutcome connect_and_run(const RunConfig& config) {
  config.validate();
  LineStream bob1 = connect_to(config.bob1);
  LineStream bob2 = connect_to(config.bob2);

  RngStream alice(config.seed, "alice");
  Network net(config.channels, config.seed);
  Transcript t;
  t.config_digest = config.digest();
  t.rounds.reserve(config.n_rounds);
  for (std::size_t i = 0; i < config.n_rounds; ++i)
    t.rounds.push_back(alice_round(i, alice, net, std::nullopt,
                                   detail::remote_bob(bob1, Link::ToBob1),
                                   detail::remote_bob(bob2, Link::ToBob2)));

  wire::BasisDisclosure bd;
  for (const RoundRecord& r : t.rounds) {
    if (r.prep.basis == BasisSet::S1) bd.s1_rounds.push_back(r.round_id);
    if (r.lost) bd.lost_rounds.push_back(r.round_id);
  }
  bob1.send(bd);
  bob2.send(bd);
  detail::merge_bob(t, bob1, Link::ToBob1);
  detail::merge_bob(t, bob2, Link::ToBob2);

  RunOutcome out = analyze(std::move(t), net.eve_log(), config);
  if (config.protocol == Protocol::TLSQSC && !out.test.abort) {
    KeyLedger ledger(out.keys.layer1.alice, out.keys.round_ids);
    CipherMessage c = encrypt(config.message->trits, ledger);
    bob1.send(wire::Cipher{c.ciphertext, c.key_round_ids});
    auto m = bob1.receive();
    auto* r = std::get_if<wire::Report>(&m);
    if (!r) detail::unexpected(bob1, "REPORT with decoded message");
    out.decoded = TritString::parse(r->body.at("decoded").get<std::string>());
    out.cipher = std::move(c);
  }
  const wire::Report done{"alice", to_json(out.report)};
  bob1.send(done);
  bob2.send(done);
  return out;
}

}  // namespace sqlayer
