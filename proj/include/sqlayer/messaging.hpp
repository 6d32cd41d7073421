#pragma once

#include <algorithm>
#include <cstddef>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "sqlayer/errors.hpp"
#include "sqlayer/sift.hpp"
#include "sqlayer/trits.hpp"

namespace sqlayer {

/// m_i = (M_i + k_i) mod 3. Uses the first |message| key symbols.
inline TritString encode(const TritString& message, const TritString& key) {
  if (message.size() > key.size())
    throw KeyExhausted("encode: message has " + std::to_string(message.size()) +
                       " trits but only " + std::to_string(key.size()) + " key symbols");
  TritString out;
  for (std::size_t i = 0; i < message.size(); ++i) out.push_back((message[i] + key[i]) % 3);
  return out;
}

/// M_i = m_i ⊕ (additive inverse of k_i), i.e. subtraction mod 3.
inline TritString decode(const TritString& ciphertext, const TritString& key) {
  if (ciphertext.size() != key.size())
    throw std::invalid_argument("decode: ciphertext and key lengths differ");
  TritString out;
  for (std::size_t i = 0; i < ciphertext.size(); ++i)
    out.push_back((ciphertext[i] + (3 - key[i]) % 3) % 3);
  return out;
}

struct CipherMessage {
  TritString ciphertext;
  std::vector<std::size_t> key_round_ids;  // round whose layer-1 symbol pads each trit
  friend bool operator==(const CipherMessage&, const CipherMessage&) = default;
};

/**
 * Hands out layer-1 key symbols in round order and refuses to hand out any
 * round twice. One ledger per session.
 */
class KeyLedger {
 public:
  KeyLedger(TritString key, std::vector<std::size_t> round_ids)
      : key_(std::move(key)), round_ids_(std::move(round_ids)) {
    if (key_.size() != round_ids_.size())
      throw std::invalid_argument("KeyLedger: key and round ids differ in length");
  }

  std::size_t remaining() const noexcept { return key_.size() - next_; }

  /// Takes the next n unused symbols.
  std::pair<TritString, std::vector<std::size_t>> take(std::size_t n) {
    if (n > remaining())
      throw KeyExhausted("key ledger: " + std::to_string(n) + " symbols requested, " +
                         std::to_string(remaining()) + " left");
    TritString k;
    std::vector<std::size_t> ids;
    for (std::size_t i = 0; i < n; ++i, ++next_) {
      mark_used(round_ids_[next_]);
      k.push_back(key_[next_]);
      ids.push_back(round_ids_[next_]);
    }
    return {std::move(k), std::move(ids)};
  }

  /// Records that a round's key symbol has been consumed.
  void mark_used(std::size_t round_id) {
    if (!used_.insert(round_id).second)
      throw KeyReuse("key round " + std::to_string(round_id) + " already used");
  }

 private:
  TritString key_;
  std::vector<std::size_t> round_ids_;
  std::size_t next_ = 0;
  std::set<std::size_t> used_;
};

/// Alice's side: pads the message with her copy of the layer-1 key.
inline CipherMessage encrypt(const TritString& message, KeyLedger& alice_ledger) {
  auto [key, ids] = alice_ledger.take(message.size());
  return {encode(message, key), std::move(ids)};
}

/// Bob1's side: looks up his own layer-1 symbol for each listed round.
inline TritString decrypt(const CipherMessage& msg, const KeyMaterial& keys) {
  if (msg.ciphertext.size() != msg.key_round_ids.size())
    throw std::invalid_argument("decrypt: ciphertext and round list differ in length");
  std::set<std::size_t> seen;
  TritString key;
  for (auto id : msg.key_round_ids) {
    if (!seen.insert(id).second) throw KeyReuse("decrypt: key round " + std::to_string(id) +
                                                " listed twice");
    // Key rounds are stored in ascending order.
    auto it = std::lower_bound(keys.round_ids.begin(), keys.round_ids.end(), id);
    if (it == keys.round_ids.end() || *it != id)
      throw std::invalid_argument("decrypt: round " + std::to_string(id) + " is not a key round");
    key.push_back(keys.layer1.bob1[static_cast<std::size_t>(it - keys.round_ids.begin())]);
  }
  return decode(msg.ciphertext, key);
}

struct TlsqscResult {
  CipherMessage cipher;
  TritString decoded;          // what Bob1 recovers
  KeyMaterial::Layer2 layer2;  // untouched layer-2 key
};

/**
 * Direct messaging in layer 1 with key distribution in layer 2. Refuses to
 * run on an aborted session, so no ciphertext ever exists for one.
 */
inline TlsqscResult run_tlsqsc(const TritString& message, const KeyMaterial& keys,
                               const EavesdropResult& test) {
  if (test.abort)
    throw SessionAborted(test.inconclusive ? "session aborted: no check rounds"
                                           : "session aborted: eavesdropping detected");
  KeyLedger ledger(keys.layer1.alice, keys.round_ids);
  TlsqscResult r{encrypt(message, ledger), {}, keys.layer2};
  r.decoded = decrypt(r.cipher, keys);
  return r;
}

}  // namespace sqlayer
