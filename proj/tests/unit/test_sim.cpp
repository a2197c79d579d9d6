#include <doctest.h>

#include <cmath>
#include <sstream>

#include "jdrec/core/error.hpp"
#include "jdrec/evaluator/evaluator.hpp"
#include "jdrec/sampler/sampler.hpp"
#include "jdrec/sim/bootstrap.hpp"
#include "jdrec/sim/world.hpp"

using namespace jdrec;

namespace {

sim::WorldConfig small_world() {
  sim::WorldConfig c;
  c.catalog_size = 120;
  c.candidates = 12;
  return c;
}

sim::BootstrapConfig small_bootstrap() {
  sim::BootstrapConfig b;
  b.requests_per_day = 60;
  b.heuristic_slates = 4;
  b.evaluator.point_hidden = {8};
  b.evaluator.head_hidden = {8};
  b.generator.point_hidden = {8};
  b.generator.rank_hidden = {8};
  b.generator_training.rounds = 4;
  b.generator_training.eval_slates = 2;
  b.warmup_epochs = 1;
  b.ramp_day = 2;
  return b;
}

std::uint32_t category_of(const sim::SyntheticWorld& w, const sim::Request& r, std::size_t i) {
  return w.catalog()[r.catalog_index[i]].category;
}

// Candidate positions a, b sharing a category and c, d from two other ones.
struct Picks {
  data::ItemIndex a, b, c, d;
};

Picks pick_items(const sim::SyntheticWorld& w, const sim::Request& r) {
  const std::size_t n = r.catalog_index.size();
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) {
      if (category_of(w, r, a) != category_of(w, r, b)) continue;
      for (std::size_t c = 0; c < n; ++c)
        for (std::size_t d = c + 1; d < n; ++d) {
          const auto ca = category_of(w, r, a), cc = category_of(w, r, c), cd = category_of(w, r, d);
          if (cc != ca && cd != ca && cc != cd)
            return {static_cast<data::ItemIndex>(a), static_cast<data::ItemIndex>(b),
                    static_cast<data::ItemIndex>(c), static_cast<data::ItemIndex>(d)};
        }
    }
  FAIL("no suitable candidates");
  return {};
}

}  // namespace

TEST_CASE("world generation is deterministic in the seed") {
  const auto a = sim::gen_world(5, small_world());
  const auto b = sim::gen_world(5, small_world());
  const auto c = sim::gen_world(6, small_world());
  REQUIRE(a.catalog().size() == 120);
  bool differs = false;
  for (std::size_t i = 0; i < a.catalog().size(); ++i) {
    CHECK(a.catalog()[i].quality == b.catalog()[i].quality);
    CHECK(a.catalog()[i].pctr == b.catalog()[i].pctr);
    differs |= a.catalog()[i].quality != c.catalog()[i].quality;
  }
  CHECK(differs);
  Rng r1(3), r2(3);
  const auto q1 = a.sample_request(r1), q2 = b.sample_request(r2);
  CHECK(q1.catalog_index == q2.catalog_index);
  CHECK(q1.segment == q2.segment);
  CHECK(a.schema().item_features.size() == 3);
  CHECK(a.warnings().empty());
}

TEST_CASE("world config validation") {
  auto c = small_world();
  c.candidates = 3;  // fewer than list_len
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small_world();
  c.position_bias = {1.0, 0.5};
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small_world();
  c.position_bias[2] = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small_world();
  CHECK(sim::WorldConfig::from_json(c.to_json()).to_json() == c.to_json());
}

TEST_CASE("redundancy lowers a repeated category's click probability") {
  const auto w = sim::gen_world(7, small_world());
  Rng rng(8);
  for (int t = 0; t < 20; ++t) {
    const auto r = w.sample_request(rng);
    const auto p = pick_items(w, r);
    const auto same = w.click_probabilities(r, data::Slate{{p.a, p.b, p.c, p.d}, {}, {}});
    const auto mixed = w.click_probabilities(r, data::Slate{{p.c, p.b, p.a, p.d}, {}, {}});
    CHECK(same[1] < mixed[1]);
    CHECK(same[1] == doctest::Approx(mixed[1] * std::exp(-1.0)).epsilon(1e-12));
  }
}

TEST_CASE("without redundancy and position bias the world is context-free") {
  auto cfg = small_world();
  cfg.redundancy = 0.0;
  cfg.position_bias = {1.0, 1.0, 1.0, 1.0};
  const auto w = sim::gen_world(9, cfg);
  CHECK(w.warnings().size() == 1);
  Rng rng(10);
  const auto r = w.sample_request(rng);
  const auto p = pick_items(w, r);
  const auto x = w.click_probabilities(r, data::Slate{{p.a, p.b, p.c, p.d}, {}, {}});
  const auto y = w.click_probabilities(r, data::Slate{{p.d, p.c, p.b, p.a}, {}, {}});
  CHECK(x[0] == y[3]);
  CHECK(x[1] == y[2]);
}

TEST_CASE("click draws follow the ground-truth probabilities") {
  const auto w = sim::gen_world(11, small_world());
  Rng rng(12);
  const auto r = w.sample_request(rng);
  const data::Slate slate = sampler::ranking_slate(r.candidates, 4);
  const auto p = w.click_probabilities(r, slate);
  const int reps = 100000;
  std::vector<int> clicks(4, 0);
  for (int i = 0; i < reps; ++i) {
    const auto s = sim::simulate_clicks(w, r, slate, rng);
    for (std::size_t j = 0; j < 4; ++j) {
      CHECK(s.exposure[j] == 1);
      clicks[j] += s.click[j];
    }
  }
  for (std::size_t j = 0; j < 4; ++j) {
    const double se = std::sqrt(p[j] * (1 - p[j]) / reps);
    CHECK(std::abs(clicks[j] / double(reps) - p[j]) < 3 * se);
  }
  double sum = 0.0;
  for (double v : p) sum += v;
  CHECK(w.expected_ctr(r, slate) == doctest::Approx(sum / 4.0));

  Rng a(13), b(13);
  CHECK(sim::simulate_clicks(w, r, slate, a).click == sim::simulate_clicks(w, r, slate, b).click);
}

TEST_CASE("vanishing click probability never clicks") {
  auto cfg = small_world();
  cfg.base_logit = -60.0;
  const auto w = sim::gen_world(14, cfg);
  Rng rng(15);
  int total = 0;
  for (int i = 0; i < 200; ++i) {
    const auto r = w.sample_request(rng);
    const auto s = sim::simulate_clicks(w, r, sampler::ranking_slate(r.candidates, 4), rng);
    for (auto c : s.click) total += c;
  }
  CHECK(total == 0);
}

TEST_CASE("the world is contextual: item order changes expected clicks") {
  const auto w = sim::gen_world(16, small_world());
  Rng rng(17);
  const auto r = w.sample_request(rng);
  const auto p = pick_items(w, r);
  CHECK(w.expected_ctr(r, data::Slate{{p.a, p.b, p.c, p.d}, {}, {}}) !=
        w.expected_ctr(r, data::Slate{{p.a, p.c, p.b, p.d}, {}, {}}));
}

TEST_CASE("winning rate") {
  using W = sim::WinnerSource;
  const std::vector<W> a{W::model, W::heuristic, W::model, W::model};
  CHECK(sim::winning_rate(a) == 0.75);
  CHECK(sim::winning_rate(std::vector<W>{W::heuristic}) == 0.0);
  CHECK_THROWS_AS(sim::winning_rate(std::vector<W>{}), UsageError);

  Rng rng(18);
  for (int t = 0; t < 100; ++t) {
    std::vector<W> tags(1 + rng.below(50));
    std::size_t m = 0;
    for (auto& x : tags) {
      x = rng.bernoulli(0.3) ? W::model : W::heuristic;
      m += x == W::model;
    }
    CHECK(sim::winning_rate(tags) == double(m) / double(tags.size()));
  }
}

TEST_CASE("moving average") {
  const std::vector<double> v{1, 2, 3, 4, 5, 6};
  CHECK(sim::moving_average(v, 0, 5) == 1.0);
  CHECK(sim::moving_average(v, 2, 5) == 2.0);
  CHECK(sim::moving_average(v, 5, 5) == 4.0);
  CHECK(sim::moving_average(v, 5, 1) == 6.0);
}

TEST_CASE("day metrics csv") {
  std::ostringstream empty;
  sim::write_day_metrics_csv(empty, {});
  CHECK(empty.str() == "day,winning_rate,item_selection_accuracy,rank_accuracy,realized_ctr,evaluator_auc\n");
  std::ostringstream one;
  const std::vector<sim::DayMetrics> d{{3, 0.5, 0.25, 1.0, 0.125, 0.75}};
  sim::write_day_metrics_csv(one, d);
  CHECK(one.str().substr(empty.str().size()) == "3,0.500000,0.250000,1.000000,0.125000,0.750000\n");
}

TEST_CASE("step one starts from the ranking slate and is deterministic") {
  const auto w = sim::gen_world(19, small_world());
  auto cfg = small_bootstrap();
  cfg.exploration = 0.0;
  const auto r = sim::run_step1(w, 2, cfg, 20);
  REQUIRE(r.days.size() == 2);
  REQUIRE(r.day_end.size() == 2);
  CHECK(r.day_end[0] == 60);
  // Day one: an untrained evaluator ties every slate, so the ranking slate wins.
  for (std::size_t i = 0; i < r.day_end[0]; ++i)
    CHECK(r.logs[i].selected.items == sampler::ranking_slate(r.logs[i].candidates, 4).items);
  CHECK(r.expected_ctr[0] == doctest::Approx(r.ranking_ctr[0]));

  const auto again = sim::run_step1(w, 2, cfg, 20);
  CHECK(again.days == r.days);
  CHECK(again.evaluator.checksum() == r.evaluator.checksum());
}

TEST_CASE("the evaluator's pick never scores below the ranking slate") {
  const auto w = sim::gen_world(21, small_world());
  const auto s1 = sim::run_step1(w, 3, small_bootstrap(), 22);
  Rng rng(23);
  for (int i = 0; i < 50; ++i) {
    const auto r = w.sample_request(rng);
    const auto pool = sampler::heuristic_generate(r.candidates, 4, 6, rng);
    const auto best = evaluator::select_best(pool, s1.evaluator, r.candidates);
    CHECK(s1.evaluator.predict(r.candidates, pool[best]).list_score >=
          s1.evaluator.predict(r.candidates, pool[0]).list_score);
  }
}

TEST_CASE("step two is deterministic and follows the gray schedule") {
  const auto w = sim::gen_world(24, small_world());
  const auto cfg = small_bootstrap();
  const auto s1 = sim::run_step1(w, 2, cfg, 25);
  const auto a = sim::run_step2(w, 3, cfg, s1, 26);
  const auto b = sim::run_step2(w, 3, cfg, s1, 26);
  REQUIRE(a.days.size() == 3);
  CHECK(a.days == b.days);
  CHECK(a.generator.checksum() == b.generator.checksum());
  CHECK(a.gray_fraction[0] == cfg.gray_start);
  CHECK(a.gray_fraction[1] == cfg.gray_end);
  for (const auto& d : a.days) {
    CHECK(d.winning_rate >= 0.0);
    CHECK(d.winning_rate <= 1.0);
  }
  CHECK(sim::run_step2(w, 0, cfg, s1, 26).days.empty());
}

TEST_CASE("a trained step-one evaluator beats pctr ranking by day 20") {
  const auto w = sim::gen_world(1, sim::WorldConfig{});
  sim::BootstrapConfig cfg;
  cfg.exploration = 0.0;
  const auto r = sim::run_step1(w, 20, cfg, 1);
  CHECK(r.expected_ctr[19] > r.ranking_ctr[19]);
  // Untrained on day one, it shows exactly the ranking slates.
  CHECK(r.expected_ctr[0] == doctest::Approx(r.ranking_ctr[0]));
}
