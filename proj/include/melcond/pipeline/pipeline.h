#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "melcond/generate/generator.h"
#include "melcond/ingest.h"
#include "melcond/model/conditioning.h"
#include "melcond/train/trainer.h"

namespace melcond {

inline constexpr const char* kToolVersion = "0.1.0";

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitPartial = 1;
inline constexpr int kExitUsage = 2;

struct SyntheticSpec {
  std::uint64_t seed = 0;
  int songs = 200;
  SyntheticStyle style = SyntheticStyle::ChordLocked;
};

// Experiment config file:
//   {"name": str, "seed": int,
//    "dataset": {"synthetic": {"seed", "songs", "style"}} | {"paths": [str]},
//    "plan": {TrainPlan keys except seed},
//    "configs": ["No-Cond", ...],            (default: all 13)
//    "generation": {"seed_len", "temperature", "max_notes"}}
// Unknown keys anywhere are rejected (SchemaViolation).
struct ExperimentConfig {
  std::string name = "experiment";
  std::uint64_t seed = 0;
  std::optional<SyntheticSpec> synthetic;
  std::vector<std::string> paths;
  TrainPlan plan;  // plan.seed mirrors `seed`
  std::vector<ConditioningConfig> configs;
  GenerationSettings generation;

  static ExperimentConfig from_json(const nlohmann::ordered_json& j);
  static ExperimentConfig load(const std::string& path);
  nlohmann::ordered_json to_json() const;
  // 16 hex digits of the FNV-1a hash of the canonical JSON dump.
  std::string hash() const;
};

// Comma-separated abbreviations; throws InvalidArgument naming the valid ones.
std::vector<ConditioningConfig> parse_subset(const std::string& list);

// Experiment directory layout:
//   <out>/dataset/canonical/NNNN.json      accepted songs (ingest)
//   <out>/dataset/tokens/NNNN.json         their token arrays (ingest)
//   <out>/dataset/stats.json, MANIFEST.json
//   <out>/config.json                       resolved config (train)
//   <out>/dataset/{train,val}/*.json        split token files (train)
//   <out>/runs/<abbrev>/{pitch,duration}/{checkpoint.bin,logs.csv}
//   <out>/runs/MANIFEST.json, <out>/summary.csv
//   <out>/generated/<abbrev>/NNNN.json (+ .provenance.json, .tokens.json)
//   <out>/report/{divergence,aggregates,bleu,nll_summary,ttests}.csv, report.json
// Each directory written by a subcommand carries its own MANIFEST.json.

struct IngestOptions {
  std::string out;
  std::vector<std::string> inputs;         // files or directories
  std::optional<SyntheticSpec> synthetic;  // used when inputs is empty
};

struct TrainOptions {
  std::string config_path;
  std::string out;
  std::optional<std::vector<ConditioningConfig>> subset;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
};

struct GenerateOptions {
  std::string out;
  std::optional<std::vector<ConditioningConfig>> subset;  // default: every trained run
  std::optional<std::uint64_t> seed;
  bool emit_tokens = false;
  int jobs = 1;
};

struct EvaluateOptions {
  std::string out;
  int jobs = 1;
};

// Each returns an exit code and logs plain text to `log`.
int cmd_ingest(const IngestOptions& options, std::ostream& log);
int cmd_train(const TrainOptions& options, std::ostream& log);
int cmd_generate(const GenerateOptions& options, std::ostream& log);
int cmd_evaluate(const EvaluateOptions& options, std::ostream& log);

}  // namespace melcond
