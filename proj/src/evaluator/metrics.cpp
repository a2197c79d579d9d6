#include "jdrec/evaluator/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "jdrec/core/error.hpp"

namespace jdrec::evaluator {

double evaluator_loss(std::span<const double> per_item_ctr, std::span<const std::uint8_t> exposure,
                      std::span<const std::uint8_t> click) {
  if (per_item_ctr.size() != exposure.size() || per_item_ctr.size() != click.size()) {
    throw UsageError("evaluator_loss: vectors differ in length");
  }
  double loss = 0.0;
  for (std::size_t i = 0; i < per_item_ctr.size(); ++i) {
    const double p = per_item_ctr[i];
    if (!(p >= 0.0 && p <= 1.0)) {
      throw NumericError("evaluator_loss: prediction " + std::to_string(p) + " at position " +
                         std::to_string(i) + " is not a probability");
    }
    if (click[i] > exposure[i]) throw DataError("evaluator_loss: click without exposure");
    if (exposure[i] == 0) continue;
    const double pc = std::clamp(p, kProbClamp, 1.0 - kProbClamp);
    loss -= click[i] ? std::log(pc) : std::log(1.0 - pc);
  }
  return loss;
}

double auc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) throw UsageError("auc: scores and labels differ in length");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Mann-Whitney U with mid-ranks for ties.
  double pos_rank_sum = 0.0;
  std::size_t positives = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double mid_rank = 0.5 * static_cast<double>(i + 1 + j);  // average of ranks i+1..j
    for (std::size_t t = i; t < j; ++t) {
      if (labels[order[t]]) {
        pos_rank_sum += mid_rank;
        ++positives;
      }
    }
    i = j;
  }
  const std::size_t negatives = scores.size() - positives;
  if (positives == 0 || negatives == 0) {
    throw UsageError("auc: undefined without both positive and negative labels");
  }
  const double p = static_cast<double>(positives);
  const double u = pos_rank_sum - p * (p + 1.0) / 2.0;
  return u / (p * static_cast<double>(negatives));
}

}  // namespace jdrec::evaluator
