#include "melcond/eval/bleu.h"

#include <cmath>
#include <map>

#include "melcond/error.h"

namespace melcond {

namespace {

std::map<std::vector<int>, std::size_t> ngrams(const std::vector<int>& seq, int n) {
  std::map<std::vector<int>, std::size_t> counts;
  const auto un = static_cast<std::size_t>(n);
  for (std::size_t i = 0; i + un <= seq.size(); ++i) ++counts[std::vector<int>(seq.begin() + static_cast<long>(i), seq.begin() + static_cast<long>(i + un))];
  return counts;
}

}  // namespace

BleuResult corpus_bleu(const std::vector<std::vector<int>>& candidates, const std::vector<std::vector<int>>& references,
                       int max_n) {
  if (candidates.empty()) fail(ErrorKind::EmptyCorpus, "no candidates");
  if (candidates.size() != references.size()) {
    fail(ErrorKind::EmptyCorpus, "candidate and reference counts differ (" + std::to_string(candidates.size()) + " vs " +
                                     std::to_string(references.size()) + ")");
  }
  if (max_n < 1) fail(ErrorKind::InvalidArgument, "max_n must be >= 1");

  BleuResult r;
  std::vector<double> matched(static_cast<std::size_t>(max_n), 0.0), total(static_cast<std::size_t>(max_n), 0.0);
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    r.candidate_length += candidates[k].size();
    r.reference_length += references[k].size();
    for (int n = 1; n <= max_n; ++n) {
      const auto ref = ngrams(references[k], n);
      for (const auto& [gram, count] : ngrams(candidates[k], n)) {
        const auto it = ref.find(gram);
        matched[static_cast<std::size_t>(n - 1)] += static_cast<double>(it == ref.end() ? 0 : std::min(count, it->second));
        total[static_cast<std::size_t>(n - 1)] += static_cast<double>(count);
      }
    }
  }

  double log_plain = 0.0, log_smooth = 0.0;
  bool zero = false;
  for (std::size_t i = 0; i < matched.size(); ++i) {
    const double p = total[i] > 0.0 ? matched[i] / total[i] : 0.0;
    const double s = i == 0 ? p : (matched[i] + 1.0) / (total[i] + 1.0);
    r.precisions.push_back(p);
    r.smoothed_precisions.push_back(s);
    if (p == 0.0) zero = true;
    log_plain += p > 0.0 ? std::log(p) : 0.0;
    log_smooth += s > 0.0 ? std::log(s) : -INFINITY;
  }
  const auto c = static_cast<double>(r.candidate_length), ref_len = static_cast<double>(r.reference_length);
  r.brevity_penalty = c > ref_len ? 1.0 : (c == 0.0 ? 0.0 : std::exp(1.0 - ref_len / c));
  r.bleu = zero ? 0.0 : r.brevity_penalty * std::exp(log_plain / max_n);
  r.smoothed = r.brevity_penalty * std::exp(log_smooth / max_n);
  return r;
}

}  // namespace melcond
