#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "jdrec/evaluator/evaluator.hpp"
#include "jdrec/generator/generator.hpp"
#include "jdrec/nn/adagrad.hpp"
#include "jdrec/sim/world.hpp"
#include "jdrec/training/generator_training.hpp"

namespace jdrec::sim {

struct DayMetrics {
  std::size_t day = 0;  // 1-based
  double winning_rate = 0.0;
  double item_selection_accuracy = 0.0;
  double rank_accuracy = 0.0;
  double realized_ctr = 0.0;
  double evaluator_auc = 0.0;  // today's traffic, scored before today's retrain

  friend bool operator==(const DayMetrics&, const DayMetrics&) = default;
};

// Header plus one row per day, fixed column order, six decimals.
void write_day_metrics_csv(std::ostream& out, std::span<const DayMetrics> days);

enum class WinnerSource : std::uint8_t { heuristic, model };

// Fraction of winners tagged model. Throws UsageError on an empty list.
double winning_rate(std::span<const WinnerSource> winners);

// Trailing mean over up to `window` days ending at index i (0-based).
double moving_average(std::span<const double> values, std::size_t i, std::size_t window);

struct BootstrapConfig {
  std::size_t requests_per_day = 2000;
  std::size_t heuristic_slates = 8;
  double exploration = 0.1;       // share of requests showing a random pool slate
  std::size_t history_days = 5;   // retraining window
  std::size_t evaluator_epochs = 2;
  std::size_t batch_size = 32;
  nn::AdaGradConfig optimizer{};
  evaluator::EvaluatorConfig evaluator{};
  generator::GeneratorConfig generator{};
  // Temperature, k, lambda and batch size of the generator; mode is driven
  // by the schedule below.
  training::GeneratorTrainConfig generator_training{};
  // Offline training on the step-one log before release: naive epochs,
  // then ctr epochs against the step-one evaluator.
  std::size_t warmup_epochs = 5;
  std::size_t warmup_ctr_epochs = 1;
  std::size_t naive_days = 0;     // step-two days still trained naively
  std::size_t generator_epochs = 1;
  double gray_start = 0.05;       // share of traffic seeing the generator
  double gray_end = 0.95;
  std::size_t ramp_day = 20;      // first day at gray_end
  std::size_t category_cap = 0;   // per-slate category limit; 0 disables

  void validate() const;
  nlohmann::json to_json() const;
};

struct Step1Result {
  std::vector<DayMetrics> days;
  std::vector<data::LoggedSample> logs;
  std::vector<std::size_t> day_end;  // logs[day_end[d-1] .. day_end[d]) is day d
  evaluator::EvaluatorModel evaluator;
  nn::AdaGradState evaluator_state;
  std::vector<double> expected_ctr;  // ground truth of the shown slates, per day
  std::vector<double> ranking_ctr;   // same requests under pure pctr ranking
};

struct Step2Result {
  std::vector<DayMetrics> days;
  generator::GeneratorModel generator;
  evaluator::EvaluatorModel evaluator;
  std::vector<double> gray_fraction;       // per day
  std::vector<double> treated_win_rate;    // winning rate among treated requests
  std::vector<double> expected_ctr;
};

// Heuristic pool + list evaluator, evaluator retrained daily.
Step1Result run_step1(const SyntheticWorld& world, std::size_t days, const BootstrapConfig& config,
                      std::uint64_t seed);

// Adds the generator's sampled slates on the gray-release share of traffic.
Step2Result run_step2(const SyntheticWorld& world, std::size_t days, const BootstrapConfig& config,
                      const Step1Result& step1, std::uint64_t seed);

}  // namespace jdrec::sim
