#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sqlayer {

/// Sequence of base-3 symbols.
class TritString {
 public:
  TritString() = default;
  TritString(std::initializer_list<int> trits) {
    for (int t : trits) push_back(t);
  }
  explicit TritString(const std::vector<int>& trits) {
    for (int t : trits) push_back(t);
  }

  /// Parses "0120..." (one character per trit).
  static TritString parse(std::string_view text) {
    TritString s;
    for (char c : text) {
      if (c < '0' || c > '2')
        throw std::invalid_argument(std::string("not a trit: '") + c + "'");
      s.trits_.push_back(static_cast<std::uint8_t>(c - '0'));
    }
    return s;
  }

  void push_back(int t) {
    if (t < 0 || t > 2) throw std::invalid_argument("not a trit: " + std::to_string(t));
    trits_.push_back(static_cast<std::uint8_t>(t));
  }

  std::size_t size() const noexcept { return trits_.size(); }
  bool empty() const noexcept { return trits_.empty(); }
  int operator[](std::size_t i) const { return trits_[i]; }
  auto begin() const noexcept { return trits_.begin(); }
  auto end() const noexcept { return trits_.end(); }

  std::string str() const {
    std::string out;
    out.reserve(trits_.size());
    for (auto t : trits_) out.push_back(static_cast<char>('0' + t));
    return out;
  }

  friend bool operator==(const TritString&, const TritString&) = default;

 private:
  std::vector<std::uint8_t> trits_;
};

/// Byte payloads as trits: 6 trits per byte, most significant first.
inline TritString bytes_to_trits(std::string_view bytes) {
  TritString out;
  for (unsigned char b : bytes) {
    int v = b;
    int digits[6];
    for (int i = 5; i >= 0; --i) {
      digits[i] = v % 3;
      v /= 3;
    }
    for (int d : digits) out.push_back(d);
  }
  return out;
}

inline std::string trits_to_bytes(const TritString& trits) {
  if (trits.size() % 6 != 0)
    throw std::invalid_argument("trits_to_bytes: length is not a multiple of 6");
  std::string out;
  for (std::size_t i = 0; i < trits.size(); i += 6) {
    int v = 0;
    for (std::size_t j = 0; j < 6; ++j) v = v * 3 + trits[i + j];
    if (v > 255) throw std::invalid_argument("trits_to_bytes: group exceeds one byte");
    out.push_back(static_cast<char>(v));
  }
  return out;
}

}  // namespace sqlayer
