#pragma once

#include <span>

#include "jdrec/data/types.hpp"
#include "jdrec/nn/matrix.hpp"

namespace jdrec::generator {

// Column-wise softmax of (L+1) x N logits: each item's distribution over
// slate positions plus "not in list".
data::PolicyMatrix column_softmax(const nn::Matrix& logits);

// dLoss/dlogits given dLoss/dM for M = column_softmax(logits).
nn::Matrix column_softmax_backward(const data::PolicyMatrix& policy, const nn::Matrix& grad_policy);

struct Softmax2DLoss {
  double id = 0.0;    // sum over positions of row-wise cross entropy
  double rank = 0.0;  // sum over items of column-wise cross entropy
  double total = 0.0; // id + lambda * rank
};

// Softmax2D cross entropy on (L+1) x N logits. Row i < L is a softmax over
// items with target ids[i]; column j is a softmax over L+1 rank classes with
// target rank_label(ids)[j]. grad (optional) receives dTotal/dlogits.
// Throws ConfigError for lambda < 0 and DataError for invalid ids.
Softmax2DLoss softmax2d_loss(const nn::Matrix& logits, std::span<const data::ItemIndex> ids,
                             double lambda, nn::Matrix* grad = nullptr);

// Log-probability that the temperature sampler produces `slate`: position i
// draws from softmax(t * M[i, :]) restricted to items not chosen earlier.
// grad (optional, (L+1) x N) receives dlogp/dM. Throws NumericError when the
// slate has zero probability (repeated item).
double list_log_prob(const data::PolicyMatrix& policy, std::span<const data::ItemIndex> slate,
                     double temperature, nn::Matrix* grad = nullptr);

struct GeneratorAccuracy {
  double item_selection = 0.0;  // rows 0..L-1 whose argmax is ids[i]
  double rank = 0.0;            // columns whose argmax is the item's rank label
};

// Argmax ties resolve to the lowest index.
GeneratorAccuracy generator_accuracies(const data::PolicyMatrix& policy,
                                       std::span<const data::ItemIndex> ids);

// Mean Shannon entropy (nats) of the temperature rows softmax(t * M[i, :]).
double row_entropy(const data::PolicyMatrix& policy, double temperature);

}  // namespace jdrec::generator
