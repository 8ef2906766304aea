#include "melcond/eval/analysis.h"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/students_t.hpp>

#include "melcond/error.h"
#include "melcond/model/conditioning.h"

namespace melcond {

namespace {

void mean_var(const std::vector<double>& xs, double& mean, double& var) {
  mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= static_cast<double>(xs.size() - 1);
}

}  // namespace

TTest welch_ttest(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() < 2 || b.size() < 2) fail(ErrorKind::InvalidArgument, "each group needs at least 2 values");
  double ma, va, mb, vb;
  mean_var(a, ma, va);
  mean_var(b, mb, vb);
  const double sa = va / static_cast<double>(a.size()), sb = vb / static_cast<double>(b.size());
  const double se2 = sa + sb;
  if (se2 == 0.0) {
    if (ma == mb) return {0.0, static_cast<double>(a.size() + b.size() - 2), 1.0};
    fail(ErrorKind::DegenerateVariance, "both groups are constant with different means");
  }
  TTest r;
  r.t = (ma - mb) / std::sqrt(se2);
  const double denom = sa * sa / static_cast<double>(a.size() - 1) + sb * sb / static_cast<double>(b.size() - 1);
  r.df = se2 * se2 / denom;
  const boost::math::students_t dist(r.df);
  r.p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t)));
  return r;
}

std::vector<std::vector<double>> zscore_columns(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) fail(ErrorKind::DegenerateVariance, "no rows to normalize");
  const std::size_t cols = rows.front().size();
  std::vector<std::vector<double>> out(rows.size());
  for (std::size_t c = 0; c < cols; ++c) {
    double mean = 0.0;
    for (const auto& r : rows) mean += r.at(c);
    mean /= static_cast<double>(rows.size());
    double var = 0.0;
    for (const auto& r : rows) var += (r[c] - mean) * (r[c] - mean);
    const double sd = std::sqrt(var / static_cast<double>(rows.size()));
    if (!(sd > 0.0)) continue;
    for (std::size_t k = 0; k < rows.size(); ++k) out[k].push_back((rows[k][c] - mean) / sd);
  }
  if (out.front().empty()) fail(ErrorKind::DegenerateVariance, "every metric is constant across configurations");
  return out;
}

std::vector<ConditionTest> condition_ttests(const DivergenceTable& table) {
  std::vector<ConditionTest> out;
  for (const FeatureGroup group : {FeatureGroup::Pitch, FeatureGroup::Duration}) {
    std::vector<std::size_t> cols;
    for (Feature f : all_features()) {
      if (feature_group(f) == group) cols.push_back(static_cast<std::size_t>(f));
    }
    std::vector<std::vector<double>> rows;
    std::vector<ConditioningConfig> configs;
    for (std::size_t r = 0; r < table.kl.size(); ++r) {
      std::vector<double> row;
      for (std::size_t c : cols) {
        if (table.kl[r][c]) row.push_back(*table.kl[r][c]);
      }
      const auto cfg = parse_abbreviation(table.configs[r]);
      if (row.size() != cols.size() || !cfg) continue;
      rows.push_back(std::move(row));
      configs.push_back(*cfg);
    }
    std::vector<std::vector<double>> z;
    std::string z_note;
    try {
      z = zscore_columns(rows);
    } catch (const Error& e) {
      z_note = e.what();
    }
    for (std::size_t i = 0; i < kInputs.size(); ++i) {
      ConditionTest ct;
      ct.group = group;
      ct.condition = kInputs[i];
      std::vector<double> with, without;
      for (std::size_t r = 0; r < configs.size(); ++r) {
        const ConditioningConfig& c = configs[r];
        const bool active = std::array<bool, 4>{c.inter, c.chord, c.next_chord, c.barpos}[i];
        active ? ++ct.with : ++ct.without;
        if (!z.empty()) (active ? with : without).insert((active ? with : without).end(), z[r].begin(), z[r].end());
      }
      if (!z_note.empty()) {
        ct.note = z_note;
      } else if (ct.with < 2 || ct.without < 2) {
        ct.note = "fewer than 2 configurations on one side";
      } else {
        try {
          ct.test = welch_ttest(with, without);
        } catch (const Error& e) {
          ct.note = e.what();
        }
      }
      out.push_back(std::move(ct));
    }
  }
  return out;
}

std::vector<NllRow> nll_summary(std::vector<NllRow> rows) {
  auto flag = [&](auto value, auto mark) {
    std::vector<double> xs;
    for (const auto& r : rows) {
      if (value(r)) xs.push_back(*value(r));
    }
    if (xs.empty()) return;
    std::sort(xs.begin(), xs.end());
    const double cut = xs[std::min<std::size_t>(2, xs.size() - 1)];
    for (auto& r : rows) {
      if (value(r) && *value(r) <= cut) mark(r);
    }
  };
  flag([](const NllRow& r) { return r.pitch; }, [](NllRow& r) { r.pitch_top3 = true; });
  flag([](const NllRow& r) { return r.duration; }, [](NllRow& r) { r.duration_top3 = true; });
  return rows;
}

}  // namespace melcond
