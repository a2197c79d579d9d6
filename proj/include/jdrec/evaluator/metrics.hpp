#pragma once

#include <cstdint>
#include <span>

namespace jdrec::evaluator {

inline constexpr double kProbClamp = 1e-7;

// Exposure-masked negative log-likelihood:
//   -sum_i exposure_i * [click_i log p_i + (1 - click_i) log(1 - p_i)]
// with p clamped to [1e-7, 1 - 1e-7]. Unexposed positions contribute nothing.
// Throws NumericError for p outside [0, 1] or NaN, UsageError on length
// mismatch, DataError for a click without exposure.
double evaluator_loss(std::span<const double> per_item_ctr, std::span<const std::uint8_t> exposure,
                      std::span<const std::uint8_t> click);

// Probability that a random positive outscores a random negative, ties
// counting one half. Throws UsageError unless both classes are present.
double auc(std::span<const double> scores, std::span<const std::uint8_t> labels);

}  // namespace jdrec::evaluator
