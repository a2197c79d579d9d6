#include "jdrec/sim/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

#include "jdrec/core/error.hpp"
#include "jdrec/generator/policy.hpp"
#include "jdrec/sampler/sampler.hpp"

namespace jdrec::sim {

void write_day_metrics_csv(std::ostream& out, std::span<const DayMetrics> days) {
  out << "day,winning_rate,item_selection_accuracy,rank_accuracy,realized_ctr,evaluator_auc\n";
  out << std::fixed << std::setprecision(6);
  for (const auto& d : days) {
    out << d.day << ',' << d.winning_rate << ',' << d.item_selection_accuracy << ','
        << d.rank_accuracy << ',' << d.realized_ctr << ',' << d.evaluator_auc << '\n';
  }
}

double winning_rate(std::span<const WinnerSource> winners) {
  if (winners.empty()) throw UsageError("winning_rate: no winners");
  const auto n = std::count(winners.begin(), winners.end(), WinnerSource::model);
  return static_cast<double>(n) / static_cast<double>(winners.size());
}

double moving_average(std::span<const double> values, std::size_t i, std::size_t window) {
  if (i >= values.size() || window == 0) throw UsageError("moving_average: bad index or window");
  const std::size_t lo = i + 1 >= window ? i + 1 - window : 0;
  double s = 0.0;
  for (std::size_t k = lo; k <= i; ++k) s += values[k];
  return s / static_cast<double>(i + 1 - lo);
}

void BootstrapConfig::validate() const {
  if (requests_per_day == 0) throw ConfigError("bootstrap: requests per day must be positive");
  if (heuristic_slates == 0) throw ConfigError("bootstrap: heuristic pool must be nonempty");
  if (!(exploration >= 0.0 && exploration <= 1.0)) throw ConfigError("bootstrap: exploration must be in [0, 1]");
  if (history_days == 0) throw ConfigError("bootstrap: history window must be positive");
  if (batch_size == 0) throw ConfigError("bootstrap: batch size must be positive");
  if (!(gray_start >= 0.0 && gray_start <= 1.0 && gray_end >= 0.0 && gray_end <= 1.0)) {
    throw ConfigError("bootstrap: gray-release fractions must be in [0, 1]");
  }
  if (evaluator.list_len != generator.list_len) {
    throw ConfigError("bootstrap: evaluator and generator list lengths differ");
  }
}

nlohmann::json BootstrapConfig::to_json() const {
  return {{"requests_per_day", requests_per_day},
          {"heuristic_slates", heuristic_slates},
          {"exploration", exploration},
          {"history_days", history_days},
          {"evaluator_epochs", evaluator_epochs},
          {"batch_size", batch_size},
          {"learning_rate", optimizer.learning_rate},
          {"temperature", generator_training.temperature},
          {"rounds", generator_training.rounds},
          {"lambda", generator_training.lambda},
          {"warmup_epochs", warmup_epochs},
          {"warmup_ctr_epochs", warmup_ctr_epochs},
          {"naive_days", naive_days},
          {"generator_epochs", generator_epochs},
          {"gray_start", gray_start},
          {"gray_end", gray_end},
          {"ramp_day", ramp_day},
          {"category_cap", category_cap}};
}

namespace {

double safe_auc(const evaluator::EvaluatorModel& model, std::span<const data::LoggedSample> day) {
  try {
    return evaluator::evaluator_auc(model, day);
  } catch (const UsageError&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

std::span<const data::LoggedSample> window(const std::vector<data::LoggedSample>& logs,
                                           const std::vector<std::size_t>& day_end,
                                           std::size_t history_days) {
  const std::size_t d = day_end.size();  // days completed
  const std::size_t first = d > history_days ? d - history_days : 0;
  const std::size_t lo = first == 0 ? 0 : day_end[first - 1];
  return std::span<const data::LoggedSample>(logs).subspan(lo, day_end.back() - lo);
}

sampler::LegalityRule legality(const BootstrapConfig& config, const data::CandidateSet& cs) {
  if (config.category_cap == 0) return sampler::always_legal();
  return sampler::max_per_category(
      sampler::item_categories(cs, SyntheticWorld::kCategoryFeature), config.category_cap);
}

double realized_ctr(std::span<const data::LoggedSample> day) {
  double clicks = 0.0, shown = 0.0;
  for (const auto& s : day) {
    for (std::size_t i = 0; i < s.selected.click.size(); ++i) {
      clicks += s.selected.click[i];
      shown += s.selected.exposure[i];
    }
  }
  return shown > 0.0 ? clicks / shown : 0.0;
}

}  // namespace

Step1Result run_step1(const SyntheticWorld& world, std::size_t days, const BootstrapConfig& config,
                      std::uint64_t seed) {
  config.validate();
  if (config.evaluator.list_len != world.config().list_len) {
    throw ConfigError("bootstrap: evaluator list length differs from the world's");
  }
  Rng init = Rng::stream(seed, "init");
  Rng requests = Rng::stream(seed, "requests");
  Rng pool_rng = Rng::stream(seed, "heuristic");
  Rng explore = Rng::stream(seed, "explore");
  Rng clicks = Rng::stream(seed, "clicks");
  Rng train = Rng::stream(seed, "train");

  evaluator::EvaluatorConfig ecfg = config.evaluator;
  ecfg.zero_init_output = true;
  Step1Result out{{}, {}, {}, evaluator::EvaluatorModel(world.schema(), ecfg, init), {}, {}, {}};
  evaluator::EvaluatorTrainer trainer(out.evaluator, config.optimizer);
  const std::size_t L = world.config().list_len;

  for (std::size_t day = 1; day <= days; ++day) {
    const std::size_t start = out.logs.size();
    double expected = 0.0, ranking = 0.0;
    for (std::size_t r = 0; r < config.requests_per_day; ++r) {
      const Request req = world.sample_request(requests);
      const auto pool =
          sampler::heuristic_generate(req.candidates, L, config.heuristic_slates, pool_rng);
      std::size_t pick = evaluator::select_best(pool, out.evaluator, req.candidates);
      if (explore.bernoulli(config.exploration)) pick = explore.below(pool.size());
      const data::Slate shown = simulate_clicks(world, req, pool[pick], clicks);
      expected += world.expected_ctr(req, shown);
      ranking += world.expected_ctr(req, pool.front());
      out.logs.push_back(make_logged(req, shown));
    }
    const auto today = std::span<const data::LoggedSample>(out.logs).subspan(start);
    DayMetrics m;
    m.day = day;
    m.realized_ctr = realized_ctr(today);
    m.evaluator_auc = safe_auc(out.evaluator, today);
    out.days.push_back(m);
    out.expected_ctr.push_back(expected / static_cast<double>(config.requests_per_day));
    out.ranking_ctr.push_back(ranking / static_cast<double>(config.requests_per_day));
    out.day_end.push_back(out.logs.size());

    const auto recent = window(out.logs, out.day_end, config.history_days);
    for (std::size_t e = 0; e < config.evaluator_epochs; ++e) {
      trainer.run_epoch(recent, config.batch_size, train);
    }
  }
  out.evaluator_state = trainer.state();
  return out;
}

Step2Result run_step2(const SyntheticWorld& world, std::size_t days, const BootstrapConfig& config,
                      const Step1Result& step1, std::uint64_t seed) {
  config.validate();
  const std::size_t L = world.config().list_len;
  if (config.generator.list_len != L) {
    throw ConfigError("bootstrap: generator list length differs from the world's");
  }
  Rng init = Rng::stream(seed, "step2/init");
  Rng requests = Rng::stream(seed, "step2/requests");
  Rng pool_rng = Rng::stream(seed, "step2/heuristic");
  Rng sampling = Rng::stream(seed, "step2/sampling");
  Rng gray = Rng::stream(seed, "step2/gray");
  Rng explore = Rng::stream(seed, "step2/explore");
  Rng clicks = Rng::stream(seed, "step2/clicks");
  Rng train = Rng::stream(seed, "step2/train");

  Step2Result out{{}, generator::GeneratorModel(world.schema(), config.generator, init),
                  step1.evaluator, {}, {}, {}};
  evaluator::EvaluatorTrainer eval_trainer(out.evaluator, step1.evaluator_state);

  training::GeneratorTrainConfig gcfg = config.generator_training;
  gcfg.mode = training::TrainMode::naive;
  gcfg.optimizer = config.optimizer;
  training::GeneratorTrainer gen_trainer(out.generator, gcfg);
  if (!step1.day_end.empty()) {
    const auto warm = window(step1.logs, step1.day_end, config.history_days);
    for (std::size_t e = 0; e < config.warmup_epochs; ++e) gen_trainer.naive_epoch(warm, train);
    for (std::size_t e = 0; e < config.warmup_ctr_epochs; ++e) {
      gen_trainer.ctr_epoch(warm, out.evaluator, sampling);
    }
  }

  std::vector<data::LoggedSample> logs;
  std::vector<std::size_t> day_end;
  sampler::GenerationConfig gen;
  gen.temperature = gcfg.temperature;
  gen.max_rounds = gcfg.rounds;
  gen.list_len = L;

  for (std::size_t day = 1; day <= days; ++day) {
    const double fraction = day < config.ramp_day ? config.gray_start : config.gray_end;
    const std::size_t start = logs.size();
    std::vector<WinnerSource> winners;
    std::size_t treated = 0, treated_wins = 0;
    double sel_acc = 0.0, rank_acc = 0.0, expected = 0.0;

    for (std::size_t r = 0; r < config.requests_per_day; ++r) {
      const Request req = world.sample_request(requests);
      const auto& cs = req.candidates;
      auto heuristic = sampler::heuristic_generate(cs, L, config.heuristic_slates, pool_rng);
      const auto policy = out.generator.policy_matrix(cs);

      std::vector<data::Slate> all;
      if (gray.bernoulli(fraction)) {
        ++treated;
        gen.rule = legality(config, cs);
        try {
          all = sampler::mcmc_generate(policy, gen, sampling).slates;
        } catch (const GenerationExhausted&) {
          all.clear();
        }
      }
      // Model slates come first, so an identical heuristic slate never
      // takes the win away from the generator.
      const std::size_t model_count = all.size();
      all.insert(all.end(), std::make_move_iterator(heuristic.begin()),
                 std::make_move_iterator(heuristic.end()));
      const std::size_t best = evaluator::select_best(all, out.evaluator, cs);
      const bool model_won = best < model_count;
      winners.push_back(model_won ? WinnerSource::model : WinnerSource::heuristic);
      if (model_won) ++treated_wins;

      const auto acc = generator::generator_accuracies(policy, all[best].items);
      sel_acc += acc.item_selection;
      rank_acc += acc.rank;

      std::size_t pick = best;
      if (explore.bernoulli(config.exploration)) pick = explore.below(all.size());
      const data::Slate shown = simulate_clicks(world, req, all[pick], clicks);
      expected += world.expected_ctr(req, shown);
      logs.push_back(make_logged(req, shown));
    }

    const double n = static_cast<double>(config.requests_per_day);
    const auto today = std::span<const data::LoggedSample>(logs).subspan(start);
    DayMetrics m;
    m.day = day;
    m.winning_rate = winning_rate(winners);
    m.item_selection_accuracy = sel_acc / n;
    m.rank_accuracy = rank_acc / n;
    m.realized_ctr = realized_ctr(today);
    m.evaluator_auc = safe_auc(out.evaluator, today);
    out.days.push_back(m);
    out.gray_fraction.push_back(fraction);
    out.treated_win_rate.push_back(
        treated ? static_cast<double>(treated_wins) / static_cast<double>(treated) : 0.0);
    out.expected_ctr.push_back(expected / n);
    day_end.push_back(logs.size());

    const auto recent = window(logs, day_end, config.history_days);
    for (std::size_t e = 0; e < config.evaluator_epochs; ++e) {
      eval_trainer.run_epoch(recent, config.batch_size, train);
    }
    for (std::size_t e = 0; e < config.generator_epochs; ++e) {
      if (day <= config.naive_days) {
        gen_trainer.naive_epoch(recent, train);
      } else {
        gen_trainer.ctr_epoch(today, out.evaluator, sampling);
      }
    }
  }
  return out;
}

}  // namespace jdrec::sim
