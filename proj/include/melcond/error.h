#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace melcond {

enum class ErrorKind {
  MalformedXml,
  UnsupportedTimeSignature,
  UnsupportedScore,
  UnknownChordKind,
  EmptyScore,
  SchemaViolation,
  MissingHarmony,
  InvalidArgument,
  IndexOutOfRange,
  ShapeMismatch,
  DegenerateBatch,
  AllMasked,
  CorpusTooSmall,
  DivergedNaN,
  FingerprintMismatch,
  SeedTooShort,
  EmptySong,
  SupportMismatch,
  EmptyCorpus,
  DegenerateVariance,
  Io,
};

std::string_view to_string(ErrorKind kind);

// Every failure surfaced by the library carries a kind so callers (and the
// CLI exit-code mapping) can branch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace melcond
