#include "melcond/model/conditioning.h"

namespace melcond {

const std::array<ConditioningConfig, 13>& all_configs() {
  // {inter, chord, next_chord, barpos}
  static const std::array<ConditioningConfig, 13> configs = {{
      {false, false, false, false},  // No-Cond
      {true, false, false, false},   // I
      {false, true, false, false},   // C
      {false, false, true, false},   // N
      {false, false, false, true},   // B
      {true, true, false, false},    // CI
      {false, true, true, false},    // CN
      {false, true, false, true},    // CB
      {true, false, false, true},    // IB
      {true, true, true, false},     // CNI
      {false, true, true, true},     // CNB
      {true, true, false, true},     // CIB
      {true, true, true, true},      // CNIB
  }};
  return configs;
}

bool is_valid(const ConditioningConfig& config) {
  for (const auto& c : all_configs()) {
    if (c == config) return true;
  }
  return false;
}

std::string abbreviation(const ConditioningConfig& config) {
  std::string s;
  if (config.chord) s += 'C';
  if (config.next_chord) s += 'N';
  if (config.inter) s += 'I';
  if (config.barpos) s += 'B';
  return s.empty() ? "No-Cond" : s;
}

std::optional<ConditioningConfig> parse_abbreviation(std::string_view abbrev) {
  for (const auto& c : all_configs()) {
    if (abbreviation(c) == abbrev) return c;
  }
  return std::nullopt;
}

std::vector<std::string> valid_abbreviations() {
  std::vector<std::string> out;
  for (const auto& c : all_configs()) out.push_back(abbreviation(c));
  return out;
}

std::string fingerprint(const ConditioningConfig& config) { return "P|D:" + abbreviation(config); }

}  // namespace melcond
