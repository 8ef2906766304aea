#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "melcond/error.h"
#include "melcond/pipeline/pipeline.h"

using namespace melcond;

namespace {

std::optional<std::vector<ConditioningConfig>> subset_or_exit(const std::string& list) {
  if (list.empty()) return std::nullopt;
  return parse_subset(list);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Chord-conditioned melody models: ingest, train, generate, evaluate"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  std::string out;
  std::string subset;
  std::uint64_t seed = 0;
  int jobs = 1;

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Parse lead sheets into the canonical dataset");
  std::vector<std::string> inputs;
  std::uint64_t synth_seed = 0;
  int synth_count = 200;
  std::string style = "chord-locked";
  ingest->add_option("--out", out, "Experiment directory")->required();
  ingest->add_option("--input", inputs, "MusicXML/canonical files or directories (repeatable)");
  auto* synth_opt = ingest->add_option("--synthetic-seed", synth_seed, "Generate a synthetic corpus with this seed");
  ingest->add_option("--synthetic-count", synth_count, "Synthetic corpus size")->check(CLI::PositiveNumber);
  ingest->add_option("--style", style, "Synthetic style: diatonic | chord-locked");

  // train
  auto* train = app.add_subcommand("train", "Train the configuration matrix");
  std::string config_path;
  train->add_option("--config", config_path, "Experiment config JSON")->required();
  train->add_option("--out", out, "Experiment directory")->required();
  train->add_option("--subset", subset, "Comma-separated configurations, e.g. No-Cond,C,CNIB");
  auto* train_seed = train->add_option("--seed", seed, "Override the config seed");
  train->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

  // generate
  auto* generate = app.add_subcommand("generate", "Sample melodies from trained runs");
  bool tokens = false;
  generate->add_option("--out", out, "Experiment directory")->required();
  generate->add_option("--subset", subset, "Comma-separated configurations");
  auto* gen_seed = generate->add_option("--seed", seed, "Override the sampling seed");
  generate->add_flag("--tokens", tokens, "Also write token arrays");
  generate->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Compute divergences, BLEU and summary tables");
  evaluate->add_option("--out", out, "Experiment directory")->required();
  evaluate->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (ingest->parsed()) {
      IngestOptions o{out, inputs, std::nullopt};
      if (inputs.empty()) {
        if (synth_opt->count() == 0) {
          std::cerr << "ingest: give --input paths or --synthetic-seed\n";
          return kExitUsage;
        }
        o.synthetic = SyntheticSpec{synth_seed, synth_count, parse_synthetic_style(style)};
      }
      return cmd_ingest(o, std::cerr);
    }
    if (train->parsed()) {
      TrainOptions o{config_path, out, subset_or_exit(subset), std::nullopt, jobs};
      if (train_seed->count() > 0) o.seed = seed;
      return cmd_train(o, std::cerr);
    }
    if (generate->parsed()) {
      GenerateOptions o{out, subset_or_exit(subset), std::nullopt, tokens, jobs};
      if (gen_seed->count() > 0) o.seed = seed;
      return cmd_generate(o, std::cerr);
    }
    if (evaluate->parsed()) return cmd_evaluate(EvaluateOptions{out, jobs}, std::cerr);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
