#include "melcond/eval/divergence.h"

#include <algorithm>
#include <cmath>

#include "melcond/error.h"
#include "melcond/model/conditioning.h"

namespace melcond {

double kl_divergence(const std::vector<double>& p, const std::vector<double>& q, double eps) {
  if (eps < 0.0) fail(ErrorKind::InvalidArgument, "eps must be >= 0");
  if (p.empty() || p.size() != q.size()) {
    fail(ErrorKind::SupportMismatch,
         "distributions have " + std::to_string(p.size()) + " and " + std::to_string(q.size()) + " bins");
  }
  double sp = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] < 0.0 || q[i] < 0.0) fail(ErrorKind::InvalidArgument, "negative probability mass");
    sp += p[i] + eps;
    sq += q[i] + eps;
  }
  double kl = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double a = (p[i] + eps) / sp;
    const double b = (q[i] + eps) / sq;
    if (a == 0.0) continue;
    if (b == 0.0) return INFINITY;
    kl += a * std::log(a / b);
  }
  return std::max(kl, 0.0);
}

FeatureSet extract_feature_set(const std::vector<TokenizedSong>& songs) {
  FeatureSet out;
  out.reserve(songs.size());
  for (const auto& s : songs) out.push_back(extract_features(s));
  return out;
}

namespace {

std::vector<const std::vector<double>*> defined(Feature f, const FeatureSet& set) {
  std::vector<const std::vector<double>*> out;
  for (const auto& song : set) {
    const auto& v = song[static_cast<std::size_t>(f)];
    if (v) out.push_back(&*v);
  }
  return out;
}

std::vector<double> histogram(const std::vector<const std::vector<double>*>& values, double lo, double hi) {
  std::vector<double> h(kScalarBins, 0.0);
  for (const auto* v : values) {
    int bin = 0;
    if (hi > lo) bin = std::min(kScalarBins - 1, static_cast<int>(std::floor(((*v)[0] - lo) / (hi - lo) * kScalarBins)));
    h[static_cast<std::size_t>(bin)] += 1.0;
  }
  for (double& x : h) x /= static_cast<double>(values.size());
  return h;
}

std::vector<double> mean_distribution(const std::vector<const std::vector<double>*>& values) {
  std::vector<double> m(values.front()->size(), 0.0);
  for (const auto* v : values) {
    for (std::size_t i = 0; i < m.size(); ++i) m[i] += (*v)[i];
  }
  for (double& x : m) x /= static_cast<double>(values.size());
  return m;
}

std::optional<double> population_stddev(const std::vector<double>& xs) {
  if (xs.empty()) return std::nullopt;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  return std::sqrt(var / static_cast<double>(xs.size()));
}

}  // namespace

std::optional<double> feature_divergence(Feature f, const FeatureSet& generated, const FeatureSet& reference) {
  const auto gen = defined(f, generated);
  const auto ref = defined(f, reference);
  if (gen.empty() || ref.empty()) return std::nullopt;
  if (is_distribution(f)) return kl_divergence(mean_distribution(gen), mean_distribution(ref));
  double lo = (*gen.front())[0], hi = lo;
  for (const auto* side : {&gen, &ref}) {
    for (const auto* v : *side) {
      lo = std::min(lo, (*v)[0]);
      hi = std::max(hi, (*v)[0]);
    }
  }
  return kl_divergence(histogram(gen, lo, hi), histogram(ref, lo, hi));
}

DivergenceTable divergence_table(const std::vector<std::string>& configs,
                                 const std::vector<std::optional<FeatureSet>>& generated, const FeatureSet& reference) {
  if (configs.size() != generated.size()) fail(ErrorKind::InvalidArgument, "one generated set per configuration");
  if (reference.empty()) fail(ErrorKind::EmptyCorpus, "reference set is empty");
  DivergenceTable t;
  t.configs = configs;
  t.kl.resize(configs.size());
  for (std::size_t r = 0; r < configs.size(); ++r) {
    if (!generated[r]) {
      t.warnings.push_back(configs[r] + ": no generations, row left empty");
      continue;
    }
    if (generated[r]->empty()) {
      t.warnings.push_back(configs[r] + ": generated set is empty, row left empty");
      continue;
    }
    for (Feature f : all_features()) {
      const auto kl = feature_divergence(f, *generated[r], reference);
      if (!kl) t.warnings.push_back(configs[r] + ": feature " + std::string(feature_name(f)) + " undefined, skipped");
      t.kl[r][static_cast<std::size_t>(f)] = kl;
    }
  }
  for (int c = 0; c < kFeatureCount; ++c) {
    std::vector<double> xs;
    for (const auto& row : t.kl) {
      if (row[static_cast<std::size_t>(c)]) xs.push_back(*row[static_cast<std::size_t>(c)]);
    }
    t.stddev[static_cast<std::size_t>(c)] = population_stddev(xs);
  }
  return t;
}

AggregateScores aggregate_scores(const DivergenceTable& table) {
  std::vector<ConditioningConfig> configs;
  for (const auto& name : table.configs) {
    const auto c = parse_abbreviation(name);
    if (!c) fail(ErrorKind::InvalidArgument, "unknown configuration '" + name + "'");
    configs.push_back(*c);
  }
  AggregateScores out;
  bool any = false;
  for (int c = 0; c < kFeatureCount; ++c) {
    const auto col = static_cast<std::size_t>(c);
    std::vector<double> xs;
    for (const auto& row : table.kl) {
      if (row[col]) xs.push_back(*row[col]);
    }
    if (xs.empty()) continue;
    any = true;
    const double best = *std::min_element(xs.begin(), xs.end());
    const double limit = best + *population_stddev(xs);
    std::vector<std::size_t> winners;
    for (std::size_t r = 0; r < table.kl.size(); ++r) {
      if (table.kl[r][col] && *table.kl[r][col] <= limit) winners.push_back(r);
    }
    GroupScores& g = feature_group(all_features()[col]) == FeatureGroup::Pitch ? out.pitch : out.duration;
    const double share = 1.0 / static_cast<double>(winners.size());
    for (std::size_t r : winners) {
      out.winners[col].push_back(table.configs[r]);
      const ConditioningConfig& cfg = configs[r];
      const std::array<bool, 4> active = {cfg.inter, cfg.chord, cfg.next_chord, cfg.barpos};
      const int k = static_cast<int>(std::count(active.begin(), active.end(), true));
      if (k == 0) continue;
      for (std::size_t i = 0; i < 4; ++i) {
        if (active[i]) g.raw[i] += share / k;
      }
    }
  }
  if (!any) fail(ErrorKind::InvalidArgument, "divergence table has no values");
  for (GroupScores* g : {&out.pitch, &out.duration}) {
    double total = 0.0;
    for (double x : g->raw) total += x;
    for (std::size_t i = 0; i < 4; ++i) g->normalized[i] = total > 0.0 ? g->raw[i] / total : 0.0;
  }
  return out;
}

}  // namespace melcond
