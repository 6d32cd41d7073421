#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sqlayer {

/// The eavesdropping test failed; the session must not emit key or ciphertext.
class SessionAborted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Not enough unused layer-1 key symbols to pad the message.
class KeyExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A key round was offered to the one-time pad twice.
class KeyReuse : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Public disclosure does not agree with the transcript it claims to describe.
class InconsistentDisclosure : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A line on the wire could not be parsed.
class WireError : public std::runtime_error {
 public:
  WireError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A well-formed message that breaks a protocol rule (e.g. unnormalized amplitudes).
class ProtocolViolation : public WireError {
 public:
  using WireError::WireError;
};

}  // namespace sqlayer
