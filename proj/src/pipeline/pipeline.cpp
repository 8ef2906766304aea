#include "melcond/pipeline/pipeline.h"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>

#include "melcond/error.h"
#include "melcond/eval/report.h"
#include "melcond/rng.h"
#include "melcond/util.h"

namespace fs = std::filesystem;

namespace melcond {

using json = nlohmann::ordered_json;

// --- config ------------------------------------------------------------------

namespace {

void reject_unknown(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  if (!j.is_object()) fail(ErrorKind::SchemaViolation, where + ": expected object");
  for (const auto& [key, v] : j.items()) {
    if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return key == k; })) {
      fail(ErrorKind::SchemaViolation, where + "." + key + ": unknown key");
    }
  }
}

template <typename T>
T get(const json& j, const std::string& where) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception&) {
    fail(ErrorKind::SchemaViolation, where + ": wrong type");
  }
}

std::string hex16(std::uint64_t x) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

}  // namespace

std::vector<ConditioningConfig> parse_subset(const std::string& list) {
  std::vector<ConditioningConfig> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto c = parse_abbreviation(item);
    if (!c) {
      std::string valid;
      for (const auto& v : valid_abbreviations()) valid += (valid.empty() ? "" : ", ") + v;
      fail(ErrorKind::InvalidArgument, "unknown configuration '" + item + "'; valid: " + valid);
    }
    if (std::find(out.begin(), out.end(), *c) == out.end()) out.push_back(*c);
  }
  if (out.empty()) fail(ErrorKind::InvalidArgument, "empty configuration subset");
  return out;
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  reject_unknown(j, {"name", "seed", "dataset", "plan", "configs", "generation"}, "config");
  ExperimentConfig c;
  if (j.contains("name")) c.name = get<std::string>(j["name"], "config.name");
  if (j.contains("seed")) c.seed = get<std::uint64_t>(j["seed"], "config.seed");
  if (j.contains("dataset")) {
    const json& d = j["dataset"];
    reject_unknown(d, {"synthetic", "paths"}, "config.dataset");
    if (d.contains("synthetic")) {
      const json& s = d["synthetic"];
      reject_unknown(s, {"seed", "songs", "style"}, "config.dataset.synthetic");
      SyntheticSpec spec;
      if (s.contains("seed")) spec.seed = get<std::uint64_t>(s["seed"], "config.dataset.synthetic.seed");
      if (s.contains("songs")) spec.songs = get<int>(s["songs"], "config.dataset.synthetic.songs");
      if (s.contains("style")) spec.style = parse_synthetic_style(get<std::string>(s["style"], "config.dataset.synthetic.style"));
      if (spec.songs < 1) fail(ErrorKind::SchemaViolation, "config.dataset.synthetic.songs must be >= 1");
      c.synthetic = spec;
    }
    if (d.contains("paths")) c.paths = get<std::vector<std::string>>(d["paths"], "config.dataset.paths");
  }
  if (j.contains("plan")) {
    if (j["plan"].is_object() && j["plan"].contains("seed")) {
      fail(ErrorKind::SchemaViolation, "config.plan.seed: set the top-level seed instead");
    }
    c.plan = TrainPlan::from_json(j["plan"]);
  }
  c.plan.seed = c.seed;
  if (j.contains("configs")) {
    for (const auto& name : get<std::vector<std::string>>(j["configs"], "config.configs")) {
      const auto parsed = parse_subset(name);
      c.configs.insert(c.configs.end(), parsed.begin(), parsed.end());
    }
  }
  if (c.configs.empty()) c.configs.assign(all_configs().begin(), all_configs().end());
  if (j.contains("generation")) c.generation = GenerationSettings::from_json(j["generation"]);
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  const std::string text = read_text_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::SchemaViolation, path + ": " + e.what());
  }
  return from_json(j);
}

json ExperimentConfig::to_json() const {
  json j;
  j["name"] = name;
  j["seed"] = seed;
  json d = json::object();
  if (synthetic) {
    d["synthetic"] = {{"seed", synthetic->seed}, {"songs", synthetic->songs}, {"style", std::string(to_string(synthetic->style))}};
  }
  if (!paths.empty()) d["paths"] = paths;
  j["dataset"] = d;
  json p = plan.to_json();
  p.erase("seed");
  j["plan"] = p;
  json names = json::array();
  for (const auto& c : configs) names.push_back(abbreviation(c));
  j["configs"] = names;
  j["generation"] = generation.to_json();
  return j;
}

std::string ExperimentConfig::hash() const { return hex16(fnv1a64(to_json().dump())); }

// --- shared helpers ----------------------------------------------------------

namespace {

std::string numbered(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04zu", i);
  return buf;
}

// Plain song files in a directory (sidecars excluded), sorted by name.
std::vector<fs::path> song_files(const fs::path& dir) {
  std::vector<fs::path> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (!e.is_regular_file() || e.path().extension() != ".json") continue;
    if (name == "MANIFEST.json" || name.find(".provenance.") != std::string::npos || name.find(".tokens.") != std::string::npos) {
      continue;
    }
    out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

void write_manifest(const fs::path& dir, const std::string& command, json details, const std::vector<fs::path>& files) {
  json m;
  m["tool"] = "melcond";
  m["version"] = kToolVersion;
  m["command"] = command;
  for (auto& [k, v] : details.items()) m[k] = v;
  json hashes = json::object();
  std::vector<fs::path> sorted = files;
  std::sort(sorted.begin(), sorted.end());
  for (const auto& f : sorted) {
    hashes[fs::relative(f, dir).generic_string()] = hex16(fnv1a64(read_text_file(f.string())));
  }
  m["artifacts"] = hashes;
  write_text_file((dir / "MANIFEST.json").string(), m.dump(2) + "\n");
}

std::vector<LeadSheet> load_canonical_dir(const fs::path& dir) {
  std::vector<LeadSheet> songs;
  for (const auto& f : song_files(dir)) songs.push_back(parse_canonical(read_text_file(f.string())));
  return songs;
}

fs::path canonical_dir(const std::string& out) { return fs::path(out) / "dataset" / "canonical"; }

std::vector<fs::path> collect_inputs(const std::vector<std::string>& inputs) {
  std::vector<fs::path> files;
  for (const auto& in : inputs) {
    if (fs::is_directory(in)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::recursive_directory_iterator(in)) {
        const auto ext = e.path().extension();
        if (e.is_regular_file() && (ext == ".xml" || ext == ".musicxml" || ext == ".json")) found.push_back(e.path());
      }
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else {
      files.emplace_back(in);
    }
  }
  return files;
}

}  // namespace

// --- ingest ------------------------------------------------------------------

int cmd_ingest(const IngestOptions& options, std::ostream& log) {
  if (options.out.empty()) {
    log << "ingest: --out is required\n";
    return kExitUsage;
  }
  std::vector<LeadSheet> songs;
  json skipped = json::array();
  json source;
  if (!options.inputs.empty()) {
    const auto files = collect_inputs(options.inputs);
    for (const auto& f : files) {
      try {
        LeadSheet s = load_song(f.string());
        tokenize(s);
        songs.push_back(std::move(s));
      } catch (const Error& e) {
        log << "skip " << f.generic_string() << ": " << e.what() << "\n";
        skipped.push_back({{"path", f.generic_string()}, {"error", e.what()}});
      }
    }
    source = {{"inputs", options.inputs}, {"files", files.size()}};
  } else if (options.synthetic) {
    songs = generate_synthetic_corpus(options.synthetic->seed, options.synthetic->songs, options.synthetic->style);
    source = {{"synthetic",
               {{"seed", options.synthetic->seed}, {"songs", options.synthetic->songs}, {"style", std::string(to_string(options.synthetic->style))}}}};
  } else {
    log << "ingest: give input paths or a synthetic corpus spec\n";
    return kExitUsage;
  }
  if (songs.empty()) {
    log << "ingest: zero songs accepted (" << skipped.size() << " skipped)\n";
    return kExitUsage;
  }

  const fs::path data = fs::path(options.out) / "dataset";
  fs::remove_all(data / "canonical");
  fs::remove_all(data / "tokens");
  std::vector<fs::path> written;
  for (std::size_t i = 0; i < songs.size(); ++i) {
    const fs::path c = data / "canonical" / (numbered(i) + ".json");
    const fs::path t = data / "tokens" / (numbered(i) + ".json");
    write_text_file(c.string(), serialize_canonical(songs[i]));
    write_text_file(t.string(), serialize_tokens(tokenize(songs[i])));
    written.push_back(c);
    written.push_back(t);
  }
  StatsReport stats = corpus_stats(songs);
  stats.augmented_count = augment_corpus_tagged(songs).size();
  write_text_file((data / "stats.json").string(), stats.to_json());
  written.push_back(data / "stats.json");
  write_manifest(data, "ingest", {{"source", source}, {"accepted", songs.size()}, {"skipped", skipped}}, written);
  log << "ingest: " << songs.size() << " songs accepted, " << skipped.size() << " skipped\n";
  log << stats.to_table();
  return kExitOk;
}

// --- train -------------------------------------------------------------------

int cmd_train(const TrainOptions& options, std::ostream& log) {
  ExperimentConfig config;
  try {
    config = ExperimentConfig::load(options.config_path);
    if (options.seed) {
      config.seed = *options.seed;
      config.plan.seed = *options.seed;
    }
    if (options.subset) config.configs = *options.subset;
  } catch (const Error& e) {
    log << "train: " << e.what() << "\n";
    return kExitUsage;
  }
  const fs::path out(options.out);
  const fs::path canon = canonical_dir(options.out);
  const auto files = song_files(canon);
  if (files.empty()) {
    log << "train: dataset not found at " << canon.generic_string() << " (run ingest first)\n";
    return kExitUsage;
  }

  Dataset data;
  try {
    data = build_dataset(load_canonical_dir(canon), config.plan);
  } catch (const Error& e) {
    log << "train: " << e.what() << "\n";
    return kExitUsage;
  }
  write_text_file((out / "config.json").string(), config.to_json().dump(2) + "\n");

  std::vector<fs::path> written{out / "config.json"};
  for (const auto& [side, songs, base] : {std::tuple{"train", &data.train, &data.train_base},
                                          std::tuple{"val", &data.val, &data.val_base}}) {
    const fs::path dir = out / "dataset" / side;
    fs::remove_all(dir);
    std::map<std::size_t, int> seen;
    for (std::size_t i = 0; i < songs->size(); ++i) {
      const std::size_t b = (*base)[i];
      char name[32];
      std::snprintf(name, sizeof name, "%04zu_%02d.json", b, seen[b]++);
      write_text_file((dir / name).string(), serialize_tokens((*songs)[i]));
      written.push_back(dir / name);
    }
  }
  log << "train: " << data.train.size() << " train / " << data.val.size() << " val sequences, "
      << config.configs.size() << " configurations\n";

  std::mutex mu;
  const auto results = run_experiment_matrix(data, config.plan, config.configs, options.jobs, [&](const std::string& m) {
    std::lock_guard<std::mutex> lock(mu);
    log << m << "\n";
  });

  int succeeded = 0;
  json cells = json::array();
  for (const auto& r : results) {
    const std::string abbrev = abbreviation(r.config);
    const fs::path run = out / "runs" / abbrev;
    fs::remove_all(run);
    bool ok = true;
    json cell = {{"config", abbrev}};
    for (const auto& [name, nr] : {std::pair{"pitch", &r.pitch}, std::pair{"duration", &r.duration}}) {
      const fs::path dir = run / name;
      if (!*nr) {
        ok = false;
        continue;
      }
      write_text_file((dir / "logs.csv").string(), logs_csv((*nr)->log));
      if ((*nr)->best) {
        nn::write_checkpoint((dir / "checkpoint.bin").string(), *(*nr)->best);
        written.push_back(dir / "checkpoint.bin");
      }
      if ((*nr)->log.diverged || !(*nr)->best) ok = false;
      cell[name] = {{"seed_init", derive_seed(config.seed, std::string("init/") + name)},
                    {"best_epoch", (*nr)->log.best_epoch},
                    {"diverged", (*nr)->log.diverged},
                    {"error", (*nr)->log.error}};
    }
    if (ok) ++succeeded;
    cells.push_back(cell);
  }
  write_text_file((out / "summary.csv").string(), summary_csv(results));
  written.push_back(out / "summary.csv");
  write_manifest(out / "runs", "train",
                 {{"config_hash", config.hash()}, {"seed", config.seed}, {"cells", cells}}, written);
  log << "train: " << succeeded << " of " << results.size() << " configurations trained\n";
  return succeeded > 0 ? kExitOk : kExitPartial;
}

// --- generate ----------------------------------------------------------------

int cmd_generate(const GenerateOptions& options, std::ostream& log) {
  const fs::path out(options.out);
  ExperimentConfig config;
  try {
    config = ExperimentConfig::load((out / "config.json").string());
  } catch (const Error& e) {
    log << "generate: " << e.what() << " (run train first)\n";
    return kExitUsage;
  }
  const std::uint64_t seed = options.seed.value_or(config.seed);
  const std::vector<ConditioningConfig> configs = options.subset.value_or(config.configs);
  const auto sources = load_canonical_dir(canonical_dir(options.out));
  if (sources.empty()) {
    log << "generate: no source songs under " << canonical_dir(options.out).generic_string() << "\n";
    return kExitUsage;
  }

  std::vector<std::string> logs(configs.size());
  std::vector<int> ok(configs.size(), 0);
  parallel_for(configs.size(), options.jobs, [&](std::size_t k) {
    const std::string abbrev = abbreviation(configs[k]);
    std::ostringstream clog;
    try {
      const fs::path run = out / "runs" / abbrev;
      MelodyGenerator gen(nn::read_checkpoint((run / "pitch" / "checkpoint.bin").string()),
                          nn::read_checkpoint((run / "duration" / "checkpoint.bin").string()));
      if (gen.config() != configs[k]) {
        fail(ErrorKind::FingerprintMismatch, "checkpoints under runs/" + abbrev + " belong to " + gen.fingerprint());
      }
      const std::uint64_t set_seed = derive_seed(seed, "generate/" + abbrev);
      const EvalSet set = generate_eval_set(gen, sources, config.generation, set_seed);
      const fs::path dir = out / "generated" / abbrev;
      fs::remove_all(dir);
      std::vector<fs::path> written;
      for (std::size_t m = 0; m < set.melodies.size(); ++m) {
        const std::string stem = numbered(set.source_index[m]);
        const GeneratedMelody& g = set.melodies[m];
        write_text_file((dir / (stem + ".json")).string(), serialize_canonical(detokenize(g.song)));
        write_text_file((dir / (stem + ".provenance.json")).string(), g.provenance.dump(2) + "\n");
        written.push_back(dir / (stem + ".json"));
        written.push_back(dir / (stem + ".provenance.json"));
        if (options.emit_tokens) {
          write_text_file((dir / (stem + ".tokens.json")).string(), serialize_tokens(g.song));
          written.push_back(dir / (stem + ".tokens.json"));
        }
      }
      json failures = json::array();
      for (const auto& f : set.failures) {
        clog << abbrev << ": skipped source " << f.index << " (" << f.title << "): " << f.error << "\n";
        failures.push_back({{"source_index", f.index}, {"title", f.title}, {"error", f.error}});
      }
      write_manifest(dir, "generate",
                     {{"config", abbrev},
                      {"config_hash", config.hash()},
                      {"seed", seed},
                      {"set_seed", set_seed},
                      {"settings", config.generation.to_json()},
                      {"failures", failures}},
                     written);
      clog << abbrev << ": " << set.melodies.size() << " of " << sources.size() << " melodies generated\n";
      ok[k] = 1;
    } catch (const Error& e) {
      clog << abbrev << ": " << e.what() << "\n";
    }
    logs[k] = clog.str();
  });
  for (const auto& l : logs) log << l;
  const auto n_ok = static_cast<std::size_t>(std::count(ok.begin(), ok.end(), 1));
  return n_ok == configs.size() ? kExitOk : kExitPartial;
}

// --- evaluate ----------------------------------------------------------------

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string c;
  while (std::getline(ss, c, ',')) cells.push_back(c);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::optional<double> parse_number(const std::string& s) {
  if (s.empty() || s == "diverged") return std::nullopt;
  try {
    return std::stod(s);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

struct GeneratedSet {
  std::vector<TokenizedSong> songs;
  std::vector<std::size_t> source_index;
  std::vector<std::size_t> seed_len;
};

}  // namespace

int cmd_evaluate(const EvaluateOptions& options, std::ostream& log) {
  const fs::path out(options.out);
  const auto sources = load_canonical_dir(canonical_dir(options.out));
  if (sources.empty()) {
    log << "evaluate: no reference songs under " << canonical_dir(options.out).generic_string() << "\n";
    return kExitUsage;
  }
  std::vector<TokenizedSong> reference;
  for (const auto& s : sources) reference.push_back(tokenize(s));

  EvalReport report;
  const std::vector<std::string> names = valid_abbreviations();

  // NLL table from the training summary
  std::map<std::string, std::pair<std::optional<double>, std::optional<double>>> nll;
  const fs::path summary = out / "summary.csv";
  if (fs::exists(summary)) {
    std::stringstream ss(read_text_file(summary.string()));
    std::string line;
    std::getline(ss, line);
    while (std::getline(ss, line)) {
      const auto cells = split_csv_line(line);
      if (cells.size() >= 7) nll[cells[0]] = {parse_number(cells[3]), parse_number(cells[6])};
    }
  } else {
    report.warnings.push_back("summary.csv missing, NLL table left empty");
  }
  for (const auto& n : names) {
    NllRow row{n, std::nullopt, std::nullopt};
    if (const auto it = nll.find(n); it != nll.end()) std::tie(row.pitch, row.duration) = it->second;
    report.nll.push_back(row);
  }
  report.nll = nll_summary(report.nll);

  // generated sets
  std::vector<std::optional<GeneratedSet>> sets(names.size());
  std::vector<std::optional<FeatureSet>> features(names.size());
  std::vector<std::string> errors(names.size());
  parallel_for(names.size(), options.jobs, [&](std::size_t k) {
    const fs::path dir = out / "generated" / names[k];
    const auto files = song_files(dir);
    if (files.empty()) return;
    try {
      GeneratedSet g;
      for (const auto& f : files) {
        g.songs.push_back(tokenize(parse_canonical(read_text_file(f.string()))));
        fs::path prov = f;
        prov.replace_extension(".provenance.json");
        const json p = json::parse(read_text_file(prov.string()));
        g.source_index.push_back(p.at("source_index").get<std::size_t>());
        g.seed_len.push_back(p.at("settings").at("seed_len").get<std::size_t>());
        if (g.source_index.back() >= sources.size()) fail(ErrorKind::IndexOutOfRange, f.generic_string() + ": source index");
      }
      features[k] = extract_feature_set(g.songs);
      sets[k] = std::move(g);
    } catch (const std::exception& e) {
      errors[k] = names[k] + ": unreadable generations: " + e.what();
      features[k].reset();
      sets[k].reset();
    }
  });
  for (std::size_t k = 0; k < names.size(); ++k) {
    if (!errors[k].empty()) report.warnings.push_back(errors[k]);
  }

  report.divergence = divergence_table(names, features, extract_feature_set(reference));
  try {
    report.aggregates = aggregate_scores(report.divergence);
  } catch (const Error& e) {
    report.warnings.push_back(std::string("aggregate scores skipped: ") + e.what());
  }
  report.ttests = condition_ttests(report.divergence);

  std::size_t present = 0;
  for (std::size_t k = 0; k < names.size(); ++k) {
    BleuRow row{names[k], std::nullopt, std::nullopt};
    if (sets[k]) {
      ++present;
      std::vector<std::vector<int>> cp, rp, cd, rd;
      for (std::size_t m = 0; m < sets[k]->songs.size(); ++m) {
        const TokenizedSong& g = sets[k]->songs[m];
        const TokenizedSong& r = reference[sets[k]->source_index[m]];
        const auto skip = static_cast<long>(std::min({sets[k]->seed_len[m], g.size(), r.size()}));
        cp.emplace_back(g.pitch.begin() + skip, g.pitch.end());
        cd.emplace_back(g.duration.begin() + skip, g.duration.end());
        rp.emplace_back(r.pitch.begin() + skip, r.pitch.end());
        rd.emplace_back(r.duration.begin() + skip, r.duration.end());
      }
      if (!cp.empty()) {
        row.pitch = corpus_bleu(cp, rp);
        row.duration = corpus_bleu(cd, rd);
      }
    }
    report.bleu.push_back(row);
  }

  const fs::path dir = out / "report";
  const std::vector<std::pair<std::string, std::string>> files = {
      {"divergence.csv", divergence_csv(report.divergence)},
      {"aggregates.csv", aggregates_csv(report.aggregates)},
      {"bleu.csv", bleu_csv(report.bleu)},
      {"nll_summary.csv", nll_summary_csv(report.nll)},
      {"ttests.csv", ttests_csv(report.ttests)},
      {"report.json", report_json(report).dump(2) + "\n"}};
  std::vector<fs::path> written;
  for (const auto& [name, text] : files) {
    write_text_file((dir / name).string(), text);
    written.push_back(dir / name);
  }
  write_manifest(dir, "evaluate", {{"configs_present", present}, {"references", reference.size()}}, written);

  for (const auto& w : report.warnings) log << "warning: " << w << "\n";
  for (const auto& w : report.divergence.warnings) log << "warning: " << w << "\n";
  log << "evaluate: " << present << " of " << names.size() << " configurations evaluated\n";
  return present == names.size() ? kExitOk : kExitPartial;
}

}  // namespace melcond
