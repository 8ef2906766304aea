#pragma once

#include <vector>

namespace melcond {

struct BleuResult {
  double bleu = 0.0;      // geometric mean of the plain precisions times the brevity penalty
  double smoothed = 0.0;  // same with add-one precisions for n >= 2
  std::vector<double> precisions;
  std::vector<double> smoothed_precisions;
  double brevity_penalty = 1.0;
  std::size_t candidate_length = 0;
  std::size_t reference_length = 0;
};

// Corpus-level BLEU with one reference per candidate: clipped n-gram counts
// and totals are summed over the corpus before dividing. Throws EmptyCorpus
// for empty or mismatched lists.
BleuResult corpus_bleu(const std::vector<std::vector<int>>& candidates, const std::vector<std::vector<int>>& references,
                       int max_n = 4);

}  // namespace melcond
