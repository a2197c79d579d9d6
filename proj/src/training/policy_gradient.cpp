#include "jdrec/training/policy_gradient.hpp"

#include <cmath>
#include <string>

#include "jdrec/core/error.hpp"
#include "jdrec/generator/policy.hpp"
#include "jdrec/kernels/kernels.hpp"

namespace jdrec::training {

std::size_t TrainBatch::slate_count() const noexcept {
  std::size_t n = 0;
  for (const auto& e : entries) n += e.slates.size();
  return n;
}

PolicyGradientStats policy_gradient_surrogate(const generator::GeneratorModel& model,
                                              TrainBatch& batch, double temperature,
                                              nn::Gradients* grads) {
  PolicyGradientStats stats;
  stats.slates = batch.slate_count();
  if (stats.slates == 0) throw UsageError("policy gradient: empty batch");
  double reward_sum = 0.0;
  for (const auto& e : batch.entries) {
    if (e.rewards.size() != e.slates.size()) {
      throw UsageError("policy gradient: rewards not aligned with slates");
    }
    for (double r : e.rewards) reward_sum += r;
  }
  const double baseline = reward_sum / static_cast<double>(stats.slates);
  stats.mean_reward = baseline;

  nn::Matrix slate_grad;
  for (std::size_t ei = 0; ei < batch.entries.size(); ++ei) {
    BatchEntry& e = batch.entries[ei];
    const auto trace = model.forward(*e.candidates);
    const auto policy = generator::column_softmax(trace.logits);
    stats.mean_entropy += generator::row_entropy(policy, temperature);

    nn::Matrix grad_policy(policy.entries.rows(), policy.entries.cols());
    bool any_advantage = false;
    e.log_probs.assign(e.slates.size(), 0.0);
    for (std::size_t s = 0; s < e.slates.size(); ++s) {
      const double adv = e.rewards[s] - baseline;
      const double logp = generator::list_log_prob(policy, e.slates[s].items, temperature,
                                                   grads && adv != 0.0 ? &slate_grad : nullptr);
      if (!std::isfinite(logp)) {
        throw NumericError("policy gradient: non-finite log-probability for request " +
                           std::to_string(ei) + ", slate " + std::to_string(s));
      }
      e.log_probs[s] = logp;
      stats.surrogate -= adv * logp;
      if (grads && adv != 0.0) {
        kernels::active().axpy(grad_policy.size(), -adv, slate_grad.data(), grad_policy.data());
        any_advantage = true;
      }
    }
    if (grads && any_advantage) {
      const nn::Matrix grad_logits = generator::column_softmax_backward(policy, grad_policy);
      model.backward(*e.candidates, trace, grad_logits, *grads);
    }
  }
  stats.mean_entropy /= static_cast<double>(batch.entries.size());
  return stats;
}

PolicyGradientStats policy_gradient_step(generator::GeneratorModel& model, TrainBatch& batch,
                                         nn::AdaGradState& optimizer, double temperature) {
  auto params = model.parameters();
  nn::Gradients grads = nn::zero_gradients(params);
  const auto stats = policy_gradient_surrogate(model, batch, temperature, &grads);
  nn::adagrad_step(params, grads, optimizer);
  return stats;
}

}  // namespace jdrec::training
