#include "melcond/eval/report.h"

#include <sstream>

#include "melcond/util.h"

namespace melcond {

namespace {

std::string cell(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

nlohmann::ordered_json value(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

std::string_view group_name(FeatureGroup g) { return g == FeatureGroup::Pitch ? "pitch" : "duration"; }

// Commas never appear in our labels, but notes are free text.
std::string quoted(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string divergence_csv(const DivergenceTable& table) {
  std::ostringstream out;
  out << "config";
  for (Feature f : all_features()) out << "," << feature_name(f);
  out << "\n";
  for (std::size_t r = 0; r < table.configs.size(); ++r) {
    out << table.configs[r];
    for (const auto& v : table.kl[r]) out << "," << cell(v);
    out << "\n";
  }
  out << "stddev";
  for (const auto& v : table.stddev) out << "," << cell(v);
  out << "\n";
  return out.str();
}

std::string aggregates_csv(const std::optional<AggregateScores>& scores) {
  std::ostringstream out;
  out << "group,input,raw,normalized\n";
  if (!scores) return out.str();
  for (const auto& [name, g] : {std::pair{"pitch", &scores->pitch}, std::pair{"duration", &scores->duration}}) {
    for (std::size_t i = 0; i < kInputs.size(); ++i) {
      out << name << "," << kInputs[i] << "," << format_number(g->raw[i], 9) << "," << format_number(g->normalized[i], 9)
          << "\n";
    }
  }
  return out.str();
}

std::string bleu_csv(const std::vector<BleuRow>& rows) {
  std::ostringstream out;
  out << "config,pitch_bleu,pitch_bleu_smoothed,duration_bleu,duration_bleu_smoothed\n";
  for (const auto& r : rows) {
    out << r.config;
    for (const auto& b : {r.pitch, r.duration}) {
      if (b) out << "," << format_number(b->bleu) << "," << format_number(b->smoothed);
      else out << ",,";
    }
    out << "\n";
  }
  return out.str();
}

std::string nll_summary_csv(const std::vector<NllRow>& rows) {
  std::ostringstream out;
  out << "config,pitch_val_nll,pitch_top3,duration_val_nll,duration_top3\n";
  for (const auto& r : rows) {
    out << r.config << "," << cell(r.pitch) << "," << (r.pitch_top3 ? 1 : 0) << "," << cell(r.duration) << ","
        << (r.duration_top3 ? 1 : 0) << "\n";
  }
  return out.str();
}

std::string ttests_csv(const std::vector<ConditionTest>& tests) {
  std::ostringstream out;
  out << "group,condition,n_with,n_without,t,df,p,note\n";
  for (const auto& t : tests) {
    out << group_name(t.group) << "," << t.condition << "," << t.with << "," << t.without << ",";
    if (t.test) out << format_number(t.test->t) << "," << format_number(t.test->df) << "," << format_number(t.test->p);
    else out << ",,";
    out << "," << quoted(t.note) << "\n";
  }
  return out.str();
}

nlohmann::ordered_json report_json(const EvalReport& report) {
  using json = nlohmann::ordered_json;
  json j;
  j["format"] = "melcond-report";
  j["version"] = 1;

  json features = json::array();
  for (Feature f : all_features()) features.push_back(feature_name(f));
  j["features"] = features;

  json nll = json::array();
  for (const auto& r : report.nll) {
    nll.push_back({{"config", r.config},
                   {"pitch_val_nll", value(r.pitch)},
                   {"pitch_top3", r.pitch_top3},
                   {"duration_val_nll", value(r.duration)},
                   {"duration_top3", r.duration_top3}});
  }
  j["nll_summary"] = nll;

  json div = json::array();
  for (std::size_t r = 0; r < report.divergence.configs.size(); ++r) {
    json kl = json::object();
    for (Feature f : all_features()) kl[std::string(feature_name(f))] = value(report.divergence.kl[r][static_cast<std::size_t>(f)]);
    div.push_back({{"config", report.divergence.configs[r]}, {"kl", kl}});
  }
  json sd = json::object();
  for (Feature f : all_features()) sd[std::string(feature_name(f))] = value(report.divergence.stddev[static_cast<std::size_t>(f)]);
  j["divergence"] = {{"rows", div}, {"stddev", sd}};

  if (report.aggregates) {
    json agg = json::object();
    for (const auto& [name, g] : {std::pair{"pitch", &report.aggregates->pitch},
                                  std::pair{"duration", &report.aggregates->duration}}) {
      json raw = json::object(), norm = json::object();
      for (std::size_t i = 0; i < kInputs.size(); ++i) {
        raw[std::string(1, kInputs[i])] = g->raw[i];
        norm[std::string(1, kInputs[i])] = g->normalized[i];
      }
      agg[name] = {{"raw", raw}, {"normalized", norm}};
    }
    json winners = json::object();
    for (Feature f : all_features()) winners[std::string(feature_name(f))] = report.aggregates->winners[static_cast<std::size_t>(f)];
    agg["winners"] = winners;
    j["aggregates"] = agg;
  } else {
    j["aggregates"] = nullptr;
  }

  auto bleu_json = [](const std::optional<BleuResult>& b) -> json {
    if (!b) return nullptr;
    return {{"bleu", b->bleu},
            {"smoothed", b->smoothed},
            {"precisions", b->precisions},
            {"smoothed_precisions", b->smoothed_precisions},
            {"brevity_penalty", b->brevity_penalty},
            {"candidate_length", b->candidate_length},
            {"reference_length", b->reference_length}};
  };
  json bleu = json::array();
  for (const auto& r : report.bleu) {
    bleu.push_back({{"config", r.config}, {"pitch", bleu_json(r.pitch)}, {"duration", bleu_json(r.duration)}});
  }
  j["bleu"] = bleu;

  json tt = json::array();
  for (const auto& t : report.ttests) {
    json e = {{"group", group_name(t.group)},
              {"condition", std::string(1, t.condition)},
              {"n_with", t.with},
              {"n_without", t.without}};
    if (t.test) {
      e["t"] = t.test->t;
      e["df"] = t.test->df;
      e["p"] = t.test->p;
    } else {
      e["t"] = e["df"] = e["p"] = nullptr;
    }
    e["note"] = t.note;
    tt.push_back(e);
  }
  j["ttests"] = tt;

  std::vector<std::string> warnings = report.warnings;
  warnings.insert(warnings.end(), report.divergence.warnings.begin(), report.divergence.warnings.end());
  j["warnings"] = warnings;
  return j;
}

}  // namespace melcond
