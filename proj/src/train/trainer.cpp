#include "melcond/train/trainer.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <sstream>
#include <thread>

#include "melcond/error.h"
#include "melcond/nn/optim.h"
#include "melcond/rng.h"
#include "melcond/util.h"

namespace melcond {

void TrainPlan::validate() const {
  auto bad = [](const std::string& what) { fail(ErrorKind::InvalidArgument, "train plan: " + what); };
  if (window_len < 2) bad("window_len must be >= 2");
  if (hop < 1) bad("hop must be >= 1");
  if (batch_size < 1) bad("batch_size must be >= 1");
  if (epochs < 0) bad("epochs must be >= 0");
  if (!(lr > 0.0f)) bad("lr must be positive");
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) bad("val_fraction must be in (0,1)");
  if (hidden < 1) bad("hidden must be >= 1");
  if (!(dropout >= 0.0f && dropout < 1.0f)) bad("dropout must be in [0,1)");
}

nlohmann::ordered_json TrainPlan::to_json() const {
  return {{"window_len", window_len}, {"hop", hop},       {"batch_size", batch_size},
          {"epochs", epochs},         {"lr", lr},         {"val_fraction", val_fraction},
          {"seed", seed},             {"hidden", hidden}, {"dropout", dropout},
          {"augment", augment}};
}

TrainPlan TrainPlan::from_json(const nlohmann::ordered_json& j) {
  if (!j.is_object()) fail(ErrorKind::SchemaViolation, "plan: expected object");
  TrainPlan p;
  for (const auto& [key, v] : j.items()) {
    try {
      if (key == "window_len") p.window_len = v.get<int>();
      else if (key == "hop") p.hop = v.get<int>();
      else if (key == "batch_size") p.batch_size = v.get<int>();
      else if (key == "epochs") p.epochs = v.get<int>();
      else if (key == "lr") p.lr = v.get<float>();
      else if (key == "val_fraction") p.val_fraction = v.get<double>();
      else if (key == "seed") p.seed = v.get<std::uint64_t>();
      else if (key == "hidden") p.hidden = v.get<int>();
      else if (key == "dropout") p.dropout = v.get<float>();
      else if (key == "augment") p.augment = v.get<bool>();
      else fail(ErrorKind::SchemaViolation, "plan." + key + ": unknown key");
    } catch (const nlohmann::json::exception&) {
      fail(ErrorKind::SchemaViolation, "plan." + key + ": wrong type");
    }
  }
  p.validate();
  return p;
}

CorpusSplit split_corpus(std::size_t n_songs, double val_fraction, std::uint64_t seed) {
  if (n_songs < 2) fail(ErrorKind::CorpusTooSmall, "need at least 2 songs to split, got " + std::to_string(n_songs));
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) fail(ErrorKind::InvalidArgument, "val_fraction must be in (0,1)");
  auto n_val = static_cast<std::size_t>(std::llround(static_cast<double>(n_songs) * val_fraction));
  n_val = std::clamp<std::size_t>(n_val, 1, n_songs - 1);
  std::vector<std::size_t> order(n_songs);
  for (std::size_t i = 0; i < n_songs; ++i) order[i] = i;
  Rng rng(derive_seed(seed, "split"));
  rng.shuffle(order);
  CorpusSplit s;
  s.val.assign(order.begin(), order.begin() + static_cast<long>(n_val));
  s.train.assign(order.begin() + static_cast<long>(n_val), order.end());
  std::sort(s.val.begin(), s.val.end());
  std::sort(s.train.begin(), s.train.end());
  return s;
}

Dataset build_dataset(const std::vector<LeadSheet>& songs, const TrainPlan& plan) {
  plan.validate();
  const CorpusSplit split = split_corpus(songs.size(), plan.val_fraction, plan.seed);
  Dataset d;
  auto fill = [&](const std::vector<std::size_t>& idx, std::vector<TokenizedSong>& out, std::vector<std::size_t>& base) {
    for (std::size_t i : idx) {
      if (plan.augment) {
        for (const auto& a : augment_corpus_tagged({songs[i]})) {
          out.push_back(tokenize(a.sheet));
          base.push_back(i);
        }
      } else {
        out.push_back(tokenize(songs[i]));
        base.push_back(i);
      }
    }
  };
  fill(split.train, d.train, d.train_base);
  fill(split.val, d.val, d.val_base);
  return d;
}

std::vector<Window> make_windows(const TokenizedSong& song, int window_len, int hop, std::size_t song_index) {
  if (window_len < 2 || hop < 1) fail(ErrorKind::InvalidArgument, "window_len >= 2 and hop >= 1 required");
  std::vector<Window> out;
  const std::size_t len = song.size();
  const auto w = static_cast<std::size_t>(window_len);
  if (len > w) {
    for (std::size_t n = 0; n + w < len; n += static_cast<std::size_t>(hop)) out.push_back({song_index, n, window_len});
  } else if (len >= 2) {
    out.push_back({song_index, 0, static_cast<int>(len) - 1});
  }
  return out;
}

std::vector<Window> make_windows(const std::vector<TokenizedSong>& songs, int window_len, int hop) {
  std::vector<Window> out;
  for (std::size_t i = 0; i < songs.size(); ++i) {
    auto w = make_windows(songs[i], window_len, hop, i);
    out.insert(out.end(), w.begin(), w.end());
  }
  return out;
}

Batch make_batch(const std::vector<TokenizedSong>& songs, std::span<const Window> windows, int window_len,
                 Target target) {
  const auto& durations = default_duration_dictionary();
  const int n = static_cast<int>(windows.size());
  Batch b;
  StepInputs& in = b.inputs;
  in.steps = window_len;
  in.batch = n;
  const std::size_t rows = in.rows();
  in.pitch.resize(rows);
  in.duration.resize(rows);
  in.barpos.resize(rows);
  in.chord.resize(rows);
  in.next_chord.resize(rows);
  b.targets.assign(rows, 0);
  b.mask.assign(rows, 0);

  for (int k = 0; k < n; ++k) {
    const Window& w = windows[static_cast<std::size_t>(k)];
    const TokenizedSong& s = songs.at(w.song);
    const std::size_t len = s.size();
    int pad_barpos = 0;
    for (int t = 0; t < window_len; ++t) {
      const std::size_t row = static_cast<std::size_t>(t) * n + k;
      const std::size_t pos = w.begin + static_cast<std::size_t>(t);
      if (pos < len) {
        in.pitch[row] = s.pitch[pos];
        in.duration[row] = s.duration[pos];
        in.barpos[row] = s.barpos[pos];
        in.chord[row] = s.chord[pos];
        in.next_chord[row] = pos + 1 < len ? s.chord[pos + 1] : s.chord[pos];
        pad_barpos = (s.barpos[pos] + durations.ticks(s.duration[pos])) % kTicksPerBar;
      } else {
        in.pitch[row] = kRestToken;
        in.duration[row] = durations.shortest_token();
        in.barpos[row] = pad_barpos;
        in.chord[row] = s.chord.back();
        in.next_chord[row] = s.chord.back();
        pad_barpos = (pad_barpos + durations.ticks(durations.shortest_token())) % kTicksPerBar;
      }
      if (t < w.valid) {
        b.targets[row] = target == Target::Pitch ? s.pitch[pos + 1] : s.duration[pos + 1];
        b.mask[row] = 1;
      }
    }
  }
  return b;
}

double evaluate_nll(ConditionedNetwork& net, const std::vector<TokenizedSong>& songs, const std::vector<Window>& windows,
                    int window_len, int batch_size) {
  if (windows.empty()) fail(ErrorKind::EmptyCorpus, "no windows to evaluate");
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < windows.size(); i += static_cast<std::size_t>(batch_size)) {
    const std::size_t m = std::min(windows.size() - i, static_cast<std::size_t>(batch_size));
    const Batch b = make_batch(songs, std::span<const Window>(windows).subspan(i, m), window_len, net.spec().target);
    if (std::find(b.mask.begin(), b.mask.end(), 1) == b.mask.end()) continue;
    const auto r = nn::nll_loss(net.forward(b.inputs, nn::Mode::Eval, nullptr), b.targets, b.mask);
    total += r.loss * static_cast<double>(r.count);
    count += r.count;
  }
  if (count == 0) fail(ErrorKind::AllMasked, "no valid targets to evaluate");
  return total / static_cast<double>(count);
}

double NetworkLog::monotone_fraction() const {
  int transitions = 0, ok = 0;
  for (std::size_t i = 2; i < epochs.size(); ++i) {
    ++transitions;
    if (epochs[i].train_nll <= epochs[i - 1].train_nll) ++ok;
  }
  return transitions == 0 ? 1.0 : static_cast<double>(ok) / transitions;
}

namespace {

NetworkSpec spec_for(Target target, const ConditioningConfig& config, const TrainPlan& plan) {
  NetworkSpec s;
  s.target = target;
  s.config = config;
  s.hidden = plan.hidden;
  s.dropout = plan.dropout;
  return s;
}

std::vector<Window> usable(std::vector<Window> w) {
  w.erase(std::remove_if(w.begin(), w.end(), [](const Window& x) { return x.valid == 0; }), w.end());
  return w;
}

}  // namespace

NetworkResult train_network(Target target, const ConditioningConfig& config, const Dataset& data, const TrainPlan& plan,
                            const ProgressFn& progress) {
  plan.validate();
  const std::string label = abbreviation(config) + "/" + std::string(to_string(target));
  const std::vector<Window> train_windows = usable(make_windows(data.train, plan.window_len, plan.hop));
  const std::vector<Window> val_windows = usable(make_windows(data.val, plan.window_len, plan.hop));
  if (train_windows.empty()) fail(ErrorKind::CorpusTooSmall, "no training windows");
  if (val_windows.empty()) fail(ErrorKind::CorpusTooSmall, "no validation windows");

  const std::string tname(to_string(target));
  ConditionedNetwork net(spec_for(target, config, plan), derive_seed(plan.seed, "init/" + tname));
  Rng shuffle_rng(derive_seed(plan.seed, "shuffle/" + tname));
  Rng dropout_rng(derive_seed(plan.seed, "dropout/" + tname));
  nn::OptimizerState opt;
  nn::AmsGradConfig opt_cfg;
  opt_cfg.lr = plan.lr;

  NetworkResult result;
  NetworkLog& log = result.log;
  log.target = target;
  using clock = std::chrono::steady_clock;

  auto record_best = [&](const EpochRecord& rec) {
    if (log.best_epoch < 0 || rec.val_nll < log.best_val_nll) {
      log.best_epoch = rec.epoch;
      log.best_val_nll = rec.val_nll;
      result.best = make_checkpoint(net, opt, rec.epoch,
                                    {{"train_nll", rec.train_nll}, {"val_nll", rec.val_nll}, {"target", tname}});
    }
  };

  {
    const auto t0 = clock::now();
    EpochRecord rec;
    rec.train_nll = evaluate_nll(net, data.train, train_windows, plan.window_len, plan.batch_size);
    rec.val_nll = evaluate_nll(net, data.val, val_windows, plan.window_len, plan.batch_size);
    rec.seconds = std::chrono::duration<double>(clock::now() - t0).count();
    log.epochs.push_back(rec);
    if (plan.epochs == 0) record_best(rec);
    if (progress) progress(label + " epoch 0 train " + format_number(rec.train_nll, 4) + " val " + format_number(rec.val_nll, 4));
  }

  std::vector<Window> order = train_windows;
  for (int epoch = 1; epoch <= plan.epochs && !log.diverged; ++epoch) {
    const auto t0 = clock::now();
    shuffle_rng.shuffle(order);
    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < order.size(); i += static_cast<std::size_t>(plan.batch_size)) {
      const std::size_t m = std::min(order.size() - i, static_cast<std::size_t>(plan.batch_size));
      const Batch b = make_batch(data.train, std::span<const Window>(order).subspan(i, m), plan.window_len, target);
      net.params().zero_grad();
      const auto r = nn::nll_loss(net.forward(b.inputs, nn::Mode::Train, &dropout_rng), b.targets, b.mask);
      if (!std::isfinite(r.loss)) {
        log.diverged = true;
        log.error = "non-finite loss at epoch " + std::to_string(epoch);
        break;
      }
      net.backward(r.grad);
      nn::amsgrad_step(net.params(), opt, opt_cfg);
      total += r.loss * static_cast<double>(r.count);
      count += r.count;
    }
    if (log.diverged) break;
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_nll = total / static_cast<double>(count);
    rec.val_nll = evaluate_nll(net, data.val, val_windows, plan.window_len, plan.batch_size);
    rec.seconds = std::chrono::duration<double>(clock::now() - t0).count();
    if (!std::isfinite(rec.val_nll)) {
      log.diverged = true;
      log.error = "non-finite validation loss at epoch " + std::to_string(epoch);
      break;
    }
    log.epochs.push_back(rec);
    record_best(rec);
    if (progress) {
      progress(label + " epoch " + std::to_string(epoch) + " train " + format_number(rec.train_nll, 4) + " val " +
               format_number(rec.val_nll, 4));
    }
  }
  if (log.diverged && progress) progress(label + " diverged: " + log.error);
  return result;
}

TrainResult train(const ConditioningConfig& config, const Dataset& data, const TrainPlan& plan, TrainTargets targets,
                  const ProgressFn& progress) {
  if (!is_valid(config)) fail(ErrorKind::InvalidArgument, "configuration is not one of the 13 listed");
  TrainResult r;
  r.config = config;
  if (targets.pitch) r.pitch = train_network(Target::Pitch, config, data, plan, progress);
  if (targets.duration) r.duration = train_network(Target::Duration, config, data, plan, progress);
  return r;
}

std::vector<TrainResult> run_experiment_matrix(const Dataset& data, const TrainPlan& plan,
                                               const std::vector<ConditioningConfig>& configs, int jobs,
                                               const ProgressFn& progress) {
  const std::vector<ConditioningConfig> cells =
      configs.empty() ? std::vector<ConditioningConfig>(all_configs().begin(), all_configs().end()) : configs;
  std::vector<TrainResult> results(cells.size());
  std::mutex mu;
  ProgressFn locked;
  if (progress) {
    locked = [&](const std::string& msg) {
      std::lock_guard<std::mutex> lock(mu);
      progress(msg);
    };
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      TrainResult& r = results[i];
      r.config = cells[i];
      for (const Target t : {Target::Pitch, Target::Duration}) {
        NetworkResult nr;
        try {
          nr = train_network(t, cells[i], data, plan, locked);
        } catch (const Error& e) {
          nr.log.target = t;
          nr.log.diverged = true;
          nr.log.error = e.what();
          if (locked) locked(abbreviation(cells[i]) + "/" + std::string(to_string(t)) + " failed: " + e.what());
        }
        (t == Target::Pitch ? r.pitch : r.duration) = std::move(nr);
      }
    }
  };
  const int n_threads = std::clamp(jobs, 1, static_cast<int>(std::max<std::size_t>(cells.size(), 1)));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return results;
}

std::string summary_csv(const std::vector<TrainResult>& results) {
  std::ostringstream out;
  out << "config,pitch_best_epoch,pitch_train_nll,pitch_val_nll,duration_best_epoch,duration_train_nll,duration_val_nll\n";
  auto cells = [&](const std::optional<NetworkResult>& nr) {
    if (!nr) return std::string(",,");
    const NetworkLog& log = nr->log;
    if (log.best_epoch < 0 || !nr->best) return std::string(log.diverged ? "diverged,diverged,diverged" : ",,");
    const auto it = std::find_if(log.epochs.begin(), log.epochs.end(),
                                 [&](const EpochRecord& e) { return e.epoch == log.best_epoch; });
    const std::string status = log.diverged ? "diverged" : std::to_string(log.best_epoch);
    return status + "," + format_number(it->train_nll) + "," + format_number(it->val_nll);
  };
  for (const auto& r : results) out << abbreviation(r.config) << "," << cells(r.pitch) << "," << cells(r.duration) << "\n";
  return out.str();
}

std::string logs_csv(const NetworkLog& log) {
  std::ostringstream out;
  out << "epoch,train_nll,val_nll,seconds\n";
  for (const auto& e : log.epochs) {
    out << e.epoch << "," << format_number(e.train_nll) << "," << format_number(e.val_nll) << ","
        << format_number(e.seconds, 3) << "\n";
  }
  return out.str();
}

}  // namespace melcond
