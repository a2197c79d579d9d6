#include "jdrec/training/generator_training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "jdrec/core/error.hpp"
#include "jdrec/generator/policy.hpp"
#include "jdrec/sampler/sampler.hpp"
#include "jdrec/training/rewards.hpp"

namespace jdrec::training {

TrainMode parse_train_mode(std::string_view text) {
  if (text == "naive") return TrainMode::naive;
  if (text == "ctr") return TrainMode::ctr;
  throw ConfigError("unknown training mode '" + std::string(text) + "' (expected naive or ctr)");
}

const char* to_string(TrainMode mode) noexcept {
  return mode == TrainMode::naive ? "naive" : "ctr";
}

namespace {

void check_config(const GeneratorTrainConfig& c) {
  if (c.batch_size == 0) throw ConfigError("generator training: batch size must be positive");
  if (!(c.lambda >= 0.0)) throw ConfigError("generator training: lambda must be >= 0");
  if (!(c.temperature > 0.0) || !std::isfinite(c.temperature)) {
    throw ConfigError("generator training: temperature must be positive");
  }
  if (c.rounds == 0) throw ConfigError("generator training: rounds must be positive");
}

std::vector<std::size_t> shuffled_order(std::size_t n, Rng& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  return order;
}

}  // namespace

GeneratorTrainer::GeneratorTrainer(generator::GeneratorModel& model, GeneratorTrainConfig config)
    : model_(model), config_(std::move(config)) {
  check_config(config_);
  state_ = nn::AdaGradState::zeros_for(model_.parameters(), config_.optimizer);
}

GeneratorTrainer::GeneratorTrainer(generator::GeneratorModel& model, GeneratorTrainConfig config,
                                   nn::AdaGradState state)
    : model_(model), config_(std::move(config)), state_(std::move(state)) {
  check_config(config_);
}

double GeneratorTrainer::naive_epoch(std::span<const data::LoggedSample> samples, Rng& rng) {
  if (samples.empty()) return 0.0;
  auto params = model_.parameters();
  const auto order = shuffled_order(samples.size(), rng);
  double total = 0.0;
  nn::Matrix grad_logits;
  for (std::size_t start = 0; start < order.size(); start += config_.batch_size) {
    const std::size_t end = std::min(order.size(), start + config_.batch_size);
    nn::Gradients grads = nn::zero_gradients(params);
    for (std::size_t b = start; b < end; ++b) {
      const auto& s = samples[order[b]];
      const auto trace = model_.forward(s.candidates);
      const auto loss =
          generator::softmax2d_loss(trace.logits, s.selected.items, config_.lambda, &grad_logits);
      if (!std::isfinite(loss.total)) {
        throw NumericError("naive training: non-finite Softmax2D loss on sample " +
                           std::to_string(order[b]));
      }
      total += loss.total;
      model_.backward(s.candidates, trace, grad_logits, grads);
    }
    nn::adagrad_step(params, grads, state_);
  }
  return total / static_cast<double>(samples.size());
}

double GeneratorTrainer::ctr_epoch(std::span<const data::LoggedSample> samples,
                                   const evaluator::EvaluatorModel& evaluator, Rng& rng) {
  if (samples.empty()) return 0.0;
  const auto order = shuffled_order(samples.size(), rng);
  sampler::GenerationConfig gen;
  gen.temperature = config_.temperature;
  gen.max_rounds = config_.rounds;
  gen.list_len = model_.list_len();
  // Raw draws keep the score-function estimator unbiased.
  gen.deduplicate = false;

  double reward_total = 0.0;
  std::size_t scored = 0;
  for (std::size_t start = 0; start < order.size(); start += config_.batch_size) {
    const std::size_t end = std::min(order.size(), start + config_.batch_size);
    TrainBatch batch;
    for (std::size_t b = start; b < end; ++b) {
      const auto& s = samples[order[b]];
      BatchEntry entry;
      entry.candidates = &s.candidates;
      entry.slates = sampler::mcmc_generate(model_.policy_matrix(s.candidates), gen, rng).slates;
      if (config_.include_logged) entry.slates.push_back(data::Slate{s.selected.items, {}, {}});
      if (config_.include_top_ctr) entry.slates.push_back(greedy_top_ctr_slate(evaluator, s.candidates));
      entry.rewards = reward_ctr_many(entry.slates, evaluator, s.candidates);
      for (double r : entry.rewards) reward_total += r;
      scored += entry.rewards.size();
      batch.entries.push_back(std::move(entry));
    }
    policy_gradient_step(model_, batch, state_, config_.temperature);
  }
  return reward_total / static_cast<double>(scored);
}

HoldoutMetrics GeneratorTrainer::evaluate(std::span<const data::LoggedSample> holdout,
                                          const evaluator::EvaluatorModel* evaluator,
                                          Rng& rng) const {
  HoldoutMetrics m;
  if (holdout.empty()) {
    m.average_ctr = std::numeric_limits<double>::quiet_NaN();
    return m;
  }
  sampler::GenerationConfig gen;
  gen.temperature = config_.temperature;
  gen.max_rounds = std::max<std::size_t>(1, config_.eval_slates);
  gen.list_len = model_.list_len();
  gen.deduplicate = false;

  double ctr_total = 0.0;
  for (const auto& s : holdout) {
    const auto trace = model_.forward(s.candidates);
    const auto policy = generator::column_softmax(trace.logits);
    const auto acc = generator::generator_accuracies(policy, s.selected.items);
    m.selection_accuracy += acc.item_selection;
    m.rank_accuracy += acc.rank;
    m.softmax2d_loss += generator::softmax2d_loss(trace.logits, s.selected.items, config_.lambda).total;
    if (evaluator) {
      const auto slates = sampler::mcmc_generate(policy, gen, rng).slates;
      const auto rewards = reward_ctr_many(slates, *evaluator, s.candidates);
      ctr_total += std::accumulate(rewards.begin(), rewards.end(), 0.0) /
                   static_cast<double>(rewards.size());
    }
  }
  const double n = static_cast<double>(holdout.size());
  m.selection_accuracy /= n;
  m.rank_accuracy /= n;
  m.softmax2d_loss /= n;
  m.average_ctr = evaluator ? ctr_total / n : std::numeric_limits<double>::quiet_NaN();
  return m;
}

GeneratorTrainResult train_generator(std::span<const data::LoggedSample> train,
                                     std::span<const data::LoggedSample> holdout,
                                     const evaluator::EvaluatorModel& evaluator,
                                     const generator::GeneratorConfig& model_config,
                                     const GeneratorTrainConfig& train_config) {
  if (model_config.list_len != evaluator.list_len()) {
    throw ConfigError("generator and evaluator disagree on list length");
  }
  Rng init = Rng::stream(train_config.seed, "init");
  Rng shuffle = Rng::stream(train_config.seed, "shuffle");
  Rng sampling = Rng::stream(train_config.seed, "sampling");
  Rng eval_rng = Rng::stream(train_config.seed, "eval");

  generator::GeneratorModel model(evaluator.schema(), model_config, init);
  std::vector<GeneratorEpoch> epochs;
  nn::AdaGradState state;
  {
    GeneratorTrainer trainer(model, train_config);
    for (std::size_t e = 1; e <= train_config.epochs; ++e) {
      GeneratorEpoch rec;
      rec.epoch = e;
      if (train_config.mode == TrainMode::naive) {
        trainer.naive_epoch(train, shuffle);
        // Exact-hit rate of the policy's argmax list against the labels.
        double hits = 0.0;
        for (const auto& s : train) {
          const auto acc = generator::generator_accuracies(model.policy_matrix(s.candidates),
                                                           s.selected.items);
          hits += acc.item_selection == 1.0 ? 1.0 : 0.0;
        }
        rec.mean_reward = train.empty() ? 0.0 : hits / static_cast<double>(train.size());
      } else {
        rec.mean_reward = trainer.ctr_epoch(train, evaluator, sampling);
      }
      const auto m = trainer.evaluate(holdout, &evaluator, eval_rng);
      rec.average_ctr = m.average_ctr;
      rec.selection_accuracy = m.selection_accuracy;
      rec.rank_accuracy = m.rank_accuracy;
      rec.softmax2d_loss = m.softmax2d_loss;
      epochs.push_back(rec);
    }
    state = trainer.state();
  }
  return GeneratorTrainResult{std::move(model), std::move(epochs), std::move(state)};
}

}  // namespace jdrec::training
