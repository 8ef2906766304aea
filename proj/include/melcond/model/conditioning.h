#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace melcond {

// Which inputs, besides the network's own token, feed the information vector.
struct ConditioningConfig {
  bool inter = false;       // partner sequence (duration for pitch, pitch for duration)
  bool chord = false;       // chord at the current note
  bool next_chord = false;  // chord at the following note
  bool barpos = false;      // bar position of the current note

  bool operator==(const ConditioningConfig&) const = default;
};

// The 13 configurations in their canonical order:
// No-Cond, I, C, N, B, CI, CN, CB, IB, CNI, CNB, CIB, CNIB.
const std::array<ConditioningConfig, 13>& all_configs();

// True for the 13 listed configurations; next_chord without chord is only
// valid as the standalone N configuration.
bool is_valid(const ConditioningConfig& config);

// "No-Cond" or the active letters in C, N, I, B order.
std::string abbreviation(const ConditioningConfig& config);
std::optional<ConditioningConfig> parse_abbreviation(std::string_view abbrev);
std::vector<std::string> valid_abbreviations();

// Canonical "P|D:<abbrev>" string shared by both networks of a configuration.
std::string fingerprint(const ConditioningConfig& config);

}  // namespace melcond
