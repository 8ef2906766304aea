#include "melcond/generate/generator.h"

#include <cmath>

#include "melcond/error.h"
#include "melcond/rng.h"

namespace melcond {

void GenerationSettings::validate() const {
  if (seed_len < 1) fail(ErrorKind::InvalidArgument, "seed_len must be >= 1");
  if (!std::isfinite(temperature)) fail(ErrorKind::InvalidArgument, "temperature must be finite");
  if (max_notes < static_cast<std::size_t>(seed_len)) fail(ErrorKind::InvalidArgument, "max_notes must be >= seed_len");
}

nlohmann::ordered_json GenerationSettings::to_json() const {
  return {{"seed_len", seed_len}, {"temperature", temperature}, {"max_notes", max_notes}};
}

GenerationSettings GenerationSettings::from_json(const nlohmann::ordered_json& j) {
  if (!j.is_object()) fail(ErrorKind::SchemaViolation, "generation: expected object");
  GenerationSettings s;
  for (const auto& [key, v] : j.items()) {
    try {
      if (key == "seed_len") s.seed_len = v.get<int>();
      else if (key == "temperature") s.temperature = v.get<double>();
      else if (key == "max_notes") s.max_notes = v.get<std::size_t>();
      else fail(ErrorKind::SchemaViolation, "generation." + key + ": unknown key");
    } catch (const nlohmann::json::exception&) {
      fail(ErrorKind::SchemaViolation, "generation." + key + ": wrong type");
    }
  }
  s.validate();
  return s;
}

int sample_token(const float* log_probs, int n, double temperature, Rng& rng) {
  if (temperature <= 0.0) {
    int best = 0;
    for (int i = 1; i < n; ++i) {
      if (log_probs[i] > log_probs[best]) best = i;
    }
    return best;
  }
  double mx = -INFINITY;
  for (int i = 0; i < n; ++i) mx = std::max(mx, static_cast<double>(log_probs[i]) / temperature);
  std::vector<double> w(static_cast<std::size_t>(n));
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    w[static_cast<std::size_t>(i)] = std::exp(static_cast<double>(log_probs[i]) / temperature - mx);
    total += w[static_cast<std::size_t>(i)];
  }
  const double u = rng.uniform() * total;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    acc += w[static_cast<std::size_t>(i)];
    if (u < acc) return i;
  }
  // u landed in the rounding slack: take the last token with mass
  for (int i = n - 1; i >= 0; --i) {
    if (w[static_cast<std::size_t>(i)] > 0.0) return i;
  }
  return n - 1;
}

namespace {

ConditionedNetwork restore(const nn::Checkpoint& ckpt, Target want) {
  ConditionedNetwork net = network_from_checkpoint(ckpt);
  if (net.spec().target != want) {
    fail(ErrorKind::FingerprintMismatch,
         "checkpoint holds a " + std::string(to_string(net.spec().target)) + " network, expected " +
             std::string(to_string(want)));
  }
  return net;
}

ChordSymbol symbol_at(const LeadSheet& sheet, int tick) {
  const ChordEvent& c = chord_at(sheet, tick);
  return {c.root, ChordKindDictionary::builtin().absolute(c.root, c.kind)};
}

void check_distribution(const nn::Tensor& lp, int row) {
  double s = 0.0;
  for (int c = 0; c < lp.cols(); ++c) s += std::exp(static_cast<double>(lp.at(row, c)));
  if (!(std::abs(s - 1.0) <= 1e-5)) fail(ErrorKind::DivergedNaN, "model output does not sum to 1");
}

}  // namespace

MelodyGenerator::MelodyGenerator(const nn::Checkpoint& pitch, const nn::Checkpoint& duration)
    : pitch_(restore(pitch, Target::Pitch)), duration_(restore(duration, Target::Duration)) {
  if (pitch.fingerprint != duration.fingerprint) {
    fail(ErrorKind::FingerprintMismatch,
         "pitch checkpoint is '" + pitch.fingerprint + "' but duration checkpoint is '" + duration.fingerprint + "'");
  }
  fingerprint_ = pitch.fingerprint;
}

GeneratedMelody MelodyGenerator::generate(const LeadSheet& source, const GenerationSettings& settings,
                                          std::uint64_t seed, const StepObserver& observer) {
  settings.validate();
  const TokenizedSong src = tokenize(source);
  const auto seed_len = static_cast<std::size_t>(settings.seed_len);
  if (src.size() < seed_len) {
    fail(ErrorKind::SeedTooShort,
         "'" + source.title + "' has " + std::to_string(src.size()) + " notes, seed needs " + std::to_string(seed_len));
  }
  const auto& durations = default_duration_dictionary();
  const int end = source.total_ticks();
  Rng rng(seed);

  GeneratedMelody out;
  out.seed_len = seed_len;
  TokenizedSong& song = out.song;
  song.title = source.title;

  auto push = [&](int pitch, int duration, int barpos, const ChordSymbol& chord) {
    song.pitch.push_back(pitch);
    song.duration.push_back(duration);
    song.barpos.push_back(barpos);
    song.chord.push_back(chord);
  };

  // Seed: the source's first notes, laid on the generation clock.
  int clock = 0;
  StepInputs warm;
  std::vector<int> onsets;
  warm.steps = settings.seed_len;
  warm.batch = 1;
  for (std::size_t t = 0; t < seed_len; ++t) {
    push(src.pitch[t], src.duration[t], clock % kTicksPerBar, symbol_at(source, clock));
    warm.pitch.push_back(src.pitch[t]);
    warm.duration.push_back(src.duration[t]);
    warm.barpos.push_back(clock % kTicksPerBar);
    warm.chord.push_back(song.chord.back());
    onsets.push_back(clock);
    clock += durations.ticks(src.duration[t]);
    warm.next_chord.push_back(symbol_at(source, clock));
  }
  if (observer) {
    for (std::size_t t = 0; t < seed_len; ++t) {
      StepInputs row;
      row.steps = row.batch = 1;
      row.pitch = {warm.pitch[t]};
      row.duration = {warm.duration[t]};
      row.barpos = {warm.barpos[t]};
      row.chord = {warm.chord[t]};
      row.next_chord = {warm.next_chord[t]};
      observer(t, row, onsets[t]);
    }
  }

  nn::LstmState ps = pitch_.zero_state(1), ds = duration_.zero_state(1);
  nn::Tensor plp = pitch_.forward(warm, nn::Mode::Eval, nullptr, &ps);
  nn::Tensor dlp = duration_.forward(warm, nn::Mode::Eval, nullptr, &ds);
  int last_row = settings.seed_len - 1;

  while (clock < end && song.size() < settings.max_notes) {
    check_distribution(plp, last_row);
    check_distribution(dlp, last_row);
    const int p = sample_token(&plp.at(last_row, 0), plp.cols(), settings.temperature, rng);
    const int d = sample_token(&dlp.at(last_row, 0), dlp.cols(), settings.temperature, rng);
    const int onset = clock;
    push(p, d, onset % kTicksPerBar, symbol_at(source, onset));
    clock += durations.ticks(d);
    if (clock >= end || song.size() >= settings.max_notes) break;

    StepInputs step;
    step.steps = step.batch = 1;
    step.pitch = {p};
    step.duration = {d};
    step.barpos = {onset % kTicksPerBar};
    step.chord = {song.chord.back()};
    step.next_chord = {symbol_at(source, clock)};
    if (observer) observer(song.size() - 1, step, onset);
    plp = pitch_.forward(step, nn::Mode::Eval, nullptr, &ps);
    dlp = duration_.forward(step, nn::Mode::Eval, nullptr, &ds);
    last_row = 0;
  }

  out.provenance = {{"source_title", source.title},
                    {"fingerprint", fingerprint_},
                    {"rng_seed", seed},
                    {"settings", settings.to_json()},
                    {"notes", song.size()},
                    {"ticks", clock}};
  return out;
}

EvalSet generate_eval_set(MelodyGenerator& generator, const std::vector<LeadSheet>& sources,
                          const GenerationSettings& settings, std::uint64_t master_seed) {
  EvalSet set;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    const std::uint64_t seed = derive_seed(master_seed, static_cast<std::uint64_t>(i));
    try {
      GeneratedMelody m = generator.generate(sources[i], settings, seed);
      m.provenance["source_index"] = i;
      set.melodies.push_back(std::move(m));
      set.source_index.push_back(i);
    } catch (const Error& e) {
      set.failures.push_back({i, sources[i].title, e.what()});
    }
  }
  return set;
}

}  // namespace melcond
