#include "melcond/error.h"

namespace melcond {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MalformedXml: return "MalformedXml";
    case ErrorKind::UnsupportedTimeSignature: return "UnsupportedTimeSignature";
    case ErrorKind::UnsupportedScore: return "UnsupportedScore";
    case ErrorKind::UnknownChordKind: return "UnknownChordKind";
    case ErrorKind::EmptyScore: return "EmptyScore";
    case ErrorKind::SchemaViolation: return "SchemaViolation";
    case ErrorKind::MissingHarmony: return "MissingHarmony";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::DegenerateBatch: return "DegenerateBatch";
    case ErrorKind::AllMasked: return "AllMasked";
    case ErrorKind::CorpusTooSmall: return "CorpusTooSmall";
    case ErrorKind::DivergedNaN: return "DivergedNaN";
    case ErrorKind::FingerprintMismatch: return "FingerprintMismatch";
    case ErrorKind::SeedTooShort: return "SeedTooShort";
    case ErrorKind::EmptySong: return "EmptySong";
    case ErrorKind::SupportMismatch: return "SupportMismatch";
    case ErrorKind::EmptyCorpus: return "EmptyCorpus";
    case ErrorKind::DegenerateVariance: return "DegenerateVariance";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace melcond
