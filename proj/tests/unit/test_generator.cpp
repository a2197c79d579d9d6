#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "helpers.hpp"
#include "jdrec/core/error.hpp"
#include "jdrec/generator/generator.hpp"
#include "jdrec/generator/policy.hpp"

using namespace jdrec;
using nn::Matrix;

namespace {

data::PolicyMatrix example_matrix() {
  return {Matrix::from_rows({{0.9, 0.1, 0.0, 0.0, 0.0, 0.0},
                             {0.05, 0.8, 0.15, 0.0, 0.0, 0.0},
                             {0.05, 0.1, 0.7, 0.15, 0.0, 0.0},
                             {0.0, 0.0, 0.15, 0.85, 0.0, 0.0},
                             {0.0, 0.0, 0.0, 0.0, 1.0, 1.0}})};
}

Matrix random_logits(std::size_t l, std::size_t n, Rng& rng, double scale = 2.0) {
  Matrix m(l + 1, n);
  for (auto& v : m.values()) v = scale * rng.normal();
  return m;
}

double log_softmax_at(std::span<const double> xs, std::size_t target) {
  const double mx = *std::max_element(xs.begin(), xs.end());
  double z = 0.0;
  for (double x : xs) z += std::exp(x - mx);
  return xs[target] - mx - std::log(z);
}

// Straight-line Softmax2D: rows for positions, columns for rank classes.
double reference_softmax2d(const Matrix& logits, const std::vector<data::ItemIndex>& ids,
                           double lambda) {
  const std::size_t l = logits.rows() - 1, n = logits.cols();
  double id = 0.0, rank = 0.0;
  for (std::size_t i = 0; i < l; ++i) id -= log_softmax_at(logits.row(i), ids[i]);
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<double> col(l + 1);
    for (std::size_t r = 0; r <= l; ++r) col[r] = logits(r, j);
    std::size_t target = l;
    for (std::size_t i = 0; i < l; ++i)
      if (ids[i] == j) target = i;
    rank -= log_softmax_at(col, target);
  }
  return id + lambda * rank;
}

data::PolicyMatrix random_policy(std::size_t l, std::size_t n, Rng& rng) {
  return generator::column_softmax(random_logits(l, n, rng));
}

generator::GeneratorConfig small_config(std::size_t l = 3) {
  generator::GeneratorConfig c;
  c.point_hidden = {6, 4};
  c.rank_hidden = {5};
  c.list_len = l;
  return c;
}

}  // namespace

TEST_CASE("a worked example matrix is a valid policy matrix") {
  const auto m = example_matrix();
  m.validate();
  double col3 = 0.0;
  for (std::size_t r = 0; r < 5; ++r) col3 += m.entries(r, 2);
  CHECK(col3 == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("accuracies on the worked example") {
  const std::vector<data::ItemIndex> ids{0, 1, 2, 3};
  const auto acc = generator::generator_accuracies(example_matrix(), ids);
  CHECK(acc.item_selection == 1.0);
  CHECK(acc.rank == 1.0);
}

TEST_CASE("accuracies on a uniform matrix follow the lowest-index rule") {
  const data::PolicyMatrix u{Matrix(4, 5, 0.25)};
  // Every row's argmax is item 0; every column's argmax is position 0.
  const std::vector<data::ItemIndex> ids{0, 3, 1};
  const auto acc = generator::generator_accuracies(u, ids);
  CHECK(acc.item_selection == doctest::Approx(1.0 / 3.0));
  CHECK(acc.rank == doctest::Approx(1.0 / 5.0));  // only item 0 has rank 0
}

TEST_CASE("accuracies match a brute-force argmax scan") {
  Rng rng(41);
  for (int t = 0; t < 100; ++t) {
    const std::size_t l = 1 + rng.below(4), n = l + rng.below(6);
    const auto m = random_policy(l, n, rng);
    const auto ids = testing::random_ids(n, l, rng);
    const auto rank = data::rank_label(ids, n);
    double rows = 0.0, cols = 0.0;
    for (std::size_t i = 0; i < l; ++i) {
      std::size_t best = 0;
      for (std::size_t j = 1; j < n; ++j)
        if (m.entries(i, j) > m.entries(i, best)) best = j;
      rows += best == ids[i];
    }
    for (std::size_t j = 0; j < n; ++j) {
      std::size_t best = 0;
      for (std::size_t r = 1; r <= l; ++r)
        if (m.entries(r, j) > m.entries(best, j)) best = r;
      cols += best == rank[j];
    }
    const auto acc = generator::generator_accuracies(m, ids);
    CHECK(acc.item_selection == doctest::Approx(rows / l).epsilon(1e-15));
    CHECK(acc.rank == doctest::Approx(cols / n).epsilon(1e-15));
  }
}

TEST_CASE("column softmax columns sum to one and its backward matches finite differences") {
  Rng rng(42);
  for (int t = 0; t < 20; ++t) {
    Matrix logits = random_logits(3, 5, rng);
    const auto m = generator::column_softmax(logits);
    m.validate(1e-12);
    const Matrix w = random_logits(3, 5, rng);
    auto loss = [&] {
      const auto p = generator::column_softmax(logits);
      double s = 0.0;
      for (std::size_t i = 0; i < w.size(); ++i) s += w.data()[i] * p.entries.data()[i];
      return s;
    };
    const nn::Gradients g{generator::column_softmax_backward(m, w)};
    CHECK(testing::max_fd_error({{"logits", &logits}}, g, loss, rng, 20) < 1e-4);
  }
}

TEST_CASE("softmax2d closed forms") {
  const std::vector<data::ItemIndex> ids{0, 1, 2, 3};
  const Matrix zeros(5, 6);
  const auto z = generator::softmax2d_loss(zeros, ids, 1.0);
  CHECK(z.id == doctest::Approx(4.0 * std::log(6.0)).epsilon(1e-13));
  CHECK(z.rank == doctest::Approx(6.0 * std::log(5.0)).epsilon(1e-13));
  CHECK(z.total == doctest::Approx(16.8236).epsilon(1e-5));

  Matrix peaked(5, 6, -20.0);
  const auto rank = data::rank_label(ids, 6);
  for (std::size_t i = 0; i < 4; ++i) peaked(i, ids[i]) = 20.0;
  for (std::size_t j = 0; j < 6; ++j) peaked(rank[j], j) = 20.0;
  CHECK(generator::softmax2d_loss(peaked, ids, 1.0).total < 1e-6);
  CHECK_THROWS_AS(generator::softmax2d_loss(zeros, ids, -0.1), ConfigError);
}

TEST_CASE("softmax2d matches the reference, lambda behaves, gradient matches finite differences") {
  Rng rng(43);
  for (int t = 0; t < 20; ++t) {
    const std::size_t l = 1 + rng.below(4), n = l + 1 + rng.below(5);
    Matrix logits = random_logits(l, n, rng);
    const auto ids = testing::random_ids(n, l, rng);
    const double lambda = rng.uniform(0.0, 2.0);
    Matrix grad;
    const auto loss = generator::softmax2d_loss(logits, ids, lambda, &grad);
    CHECK(std::abs(loss.total - reference_softmax2d(logits, ids, lambda)) <= 1e-10);
    CHECK(generator::softmax2d_loss(logits, ids, 0.0).total == loss.id);
    CHECK(generator::softmax2d_loss(logits, ids, lambda + 0.5).total >= loss.total);
    auto f = [&] { return generator::softmax2d_loss(logits, ids, lambda).total; };
    CHECK(testing::max_fd_error({{"logits", &logits}}, {grad}, f, rng, 30) < 1e-4);
  }
}

TEST_CASE("list_log_prob small cases") {
  const data::PolicyMatrix one{Matrix(2, 1, 0.5)};
  CHECK(generator::list_log_prob(one, std::vector<data::ItemIndex>{0}, 1.0) == 0.0);
  const data::PolicyMatrix two{Matrix::from_rows({{0.9, 0.1}, {0.1, 0.9}})};
  const double expect = std::log(std::exp(0.9) / (std::exp(0.9) + std::exp(0.1)));
  CHECK(generator::list_log_prob(two, std::vector<data::ItemIndex>{0}, 1.0) ==
        doctest::Approx(expect).epsilon(1e-14));
  CHECK(std::exp(expect) == doctest::Approx(0.6900).epsilon(1e-4));
  Rng rng(1);
  const auto three = random_policy(2, 3, rng);
  CHECK_THROWS_AS(generator::list_log_prob(three, std::vector<data::ItemIndex>{1, 1}, 1.0),
                  NumericError);
}

TEST_CASE("list_log_prob sums to one over every ordered slate") {
  Rng rng(44);
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 3 + rng.below(3), l = 1 + rng.below(3);
    const auto m = random_policy(l, n, rng);
    const double temp = rng.uniform(0.0, 6.0);
    std::vector<data::ItemIndex> items(n);
    std::iota(items.begin(), items.end(), 0u);
    double total = 0.0;
    // Enumerate all l-permutations through sorted full permutations.
    std::vector<std::vector<data::ItemIndex>> seen;
    do {
      std::vector<data::ItemIndex> prefix(items.begin(), items.begin() + l);
      if (std::find(seen.begin(), seen.end(), prefix) != seen.end()) continue;
      seen.push_back(prefix);
      total += std::exp(generator::list_log_prob(m, prefix, temp));
    } while (std::next_permutation(items.begin(), items.end()));
    CHECK(std::abs(total - 1.0) <= 1e-9);
  }
}

TEST_CASE("list_log_prob gradient matches finite differences") {
  Rng rng(45);
  for (int t = 0; t < 20; ++t) {
    const std::size_t l = 1 + rng.below(3), n = l + 1 + rng.below(4);
    auto m = random_policy(l, n, rng);
    const auto slate = testing::random_ids(n, l, rng);
    const double temp = rng.uniform(0.5, 6.0);
    Matrix grad;
    generator::list_log_prob(m, slate, temp, &grad);
    auto f = [&] { return generator::list_log_prob(m, slate, temp); };
    CHECK(testing::max_fd_error({{"M", &m.entries}}, {grad}, f, rng, 40) < 1e-4);
  }
}

TEST_CASE("generator output is equivariant under candidate permutation") {
  Rng rng(46);
  for (int t = 0; t < 10; ++t) {
    generator::GeneratorModel g(testing::tiny_schema(), small_config(), rng);
    const auto cs = testing::random_candidates(7, rng);
    const auto perm = testing::random_ids(7, 7, rng);
    data::CandidateSet permuted = cs;
    for (std::size_t j = 0; j < 7; ++j) permuted.items[j] = cs.items[perm[j]];
    const auto a = g.policy_matrix(cs);
    const auto b = g.policy_matrix(permuted);
    a.validate(1e-12);
    for (std::size_t r = 0; r < a.entries.rows(); ++r)
      for (std::size_t j = 0; j < 7; ++j) CHECK(b.entries(r, j) == a.entries(r, perm[j]));
  }
}

TEST_CASE("zeroed rank classifier gives uniform columns; too few candidates is an error") {
  Rng rng(47);
  generator::GeneratorModel g(testing::tiny_schema(), small_config(), rng);
  g.zero_rank_output();
  const auto m = g.policy_matrix(testing::random_candidates(5, rng));
  for (double v : m.entries.values()) CHECK(v == doctest::Approx(0.25).epsilon(1e-15));
  CHECK_THROWS_AS(g.policy_matrix(testing::random_candidates(2, rng)), UsageError);
}

TEST_CASE("generator backward matches finite differences through Softmax2D") {
  Rng rng(48);
  for (int t = 0; t < 20; ++t) {
    generator::GeneratorModel g(testing::tiny_schema(), small_config(), rng);
    const auto cs = testing::random_candidates(6, rng);
    const auto ids = testing::random_ids(6, 3, rng);
    auto params = g.parameters();
    testing::jitter_biases(params, rng);
    auto grads = nn::zero_gradients(params);
    const auto trace = g.forward(cs);
    Matrix dlogits;
    generator::softmax2d_loss(trace.logits, ids, 0.7, &dlogits);
    g.backward(cs, trace, dlogits, grads);
    auto f = [&] { return generator::softmax2d_loss(g.logits(cs), ids, 0.7).total; };
    CHECK(testing::max_fd_error(params, grads, f, rng) < 1e-4);
  }
}

TEST_CASE("generator checkpoint round trip") {
  Rng rng(49);
  generator::GeneratorModel g(testing::tiny_schema(), small_config(), rng);
  const auto back = generator::GeneratorModel::from_checkpoint(g.to_checkpoint());
  CHECK(back.checksum() == g.checksum());
  const auto cs = testing::random_candidates(5, rng);
  CHECK(back.policy_matrix(cs).entries == g.policy_matrix(cs).entries);
}
