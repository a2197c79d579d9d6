#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "jdrec/core/rng.hpp"
#include "jdrec/data/types.hpp"
#include "jdrec/nn/matrix.hpp"

namespace jdrec::sampler {

// Business-rule hook: may `candidate` be appended to `prefix`? Must be pure.
using LegalityRule =
    std::function<bool(std::span<const data::ItemIndex> prefix, data::ItemIndex candidate)>;

LegalityRule always_legal();

// At most `cap` items of one category per slate. item_category[i] is the
// category of candidate i.
LegalityRule max_per_category(std::vector<std::uint32_t> item_category, std::size_t cap);

// Values of categorical item feature `feature` (index among categorical
// features) for every candidate.
std::vector<std::uint32_t> item_categories(const data::CandidateSet& cs, std::size_t feature);

struct GenerationConfig {
  double temperature = 5.0;
  std::size_t max_rounds = 32;  // k
  std::size_t list_len = 4;     // L
  LegalityRule rule = always_legal();
  // Keep only the first occurrence of each slate. Disabling it exposes the
  // raw per-round draws (used to check the sampling law).
  bool deduplicate = true;
};

struct GenerationResult {
  std::vector<data::Slate> slates;
  std::size_t aborted_rounds = 0;
};

// L x N matrix with prob[i, j] = exp(t M[i, j]) / sum_m exp(t M[i, m]) for
// rows i < L. Throws NumericError on non-finite entries or temperature.
nn::Matrix temperature_table(const data::PolicyMatrix& policy, double temperature);

// Multi-round sequential sampling. Each round fills positions top-down from
// the temperature table; an illegal draw zeroes that entry and redraws, a
// chosen item's column is zeroed and the remaining rows renormalized. A round
// whose current row runs out of mass is aborted. Runs exactly k rounds.
// Throws GenerationExhausted if every round aborts.
GenerationResult mcmc_generate(const data::PolicyMatrix& policy, const GenerationConfig& config,
                               Rng& rng);

// Candidates by descending pctr (ties by index), truncated to list_len.
data::Slate ranking_slate(const data::CandidateSet& cs, std::size_t list_len);

// One slate drawn without replacement with probability proportional to pctr.
data::Slate sample_by_pctr(const data::CandidateSet& cs, std::size_t list_len, Rng& rng);

// Step-one candidate pool: the ranking slate first, then count - 1 pctr-
// proportional draws, deduplicated (so possibly fewer than count slates).
std::vector<data::Slate> heuristic_generate(const data::CandidateSet& cs, std::size_t list_len,
                                            std::size_t count, Rng& rng);

}  // namespace jdrec::sampler
