#include <doctest.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <filesystem>

#include "helpers.hpp"
#include "jdrec/core/error.hpp"
#include "jdrec/nn/adagrad.hpp"
#include "jdrec/nn/checkpoint.hpp"
#include "jdrec/nn/dense.hpp"

using namespace jdrec;
using nn::Matrix;

namespace {

// Straight-line affine + activation chain, written without the kernels.
Matrix reference_forward(const std::vector<nn::DenseLayer>& layers, Matrix x) {
  for (const auto& l : layers) {
    Matrix y(x.rows(), l.out_dim());
    for (std::size_t r = 0; r < x.rows(); ++r) {
      for (std::size_t c = 0; c < l.out_dim(); ++c) {
        double s = l.bias(0, c);
        for (std::size_t i = 0; i < l.in_dim(); ++i) s += x(r, i) * l.weights(i, c);
        if (l.activation == nn::Activation::relu) s = s > 0.0 ? s : 0.0;
        if (l.activation == nn::Activation::sigmoid) s = 1.0 / (1.0 + std::exp(-s));
        y(r, c) = s;
      }
    }
    x = y;
  }
  return x;
}

Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng) {
  Matrix m(r, c);
  for (auto& v : m.values()) v = rng.uniform(-1.0, 1.0);
  return m;
}

std::vector<nn::ParamRef> layer_params(std::vector<nn::DenseLayer>& layers) {
  std::vector<nn::ParamRef> out;
  for (auto& l : layers) {
    out.push_back({"w", &l.weights});
    out.push_back({"b", &l.bias});
  }
  return out;
}

}  // namespace

TEST_CASE("forward: identity layer passes the input through") {
  nn::DenseLayer l{Matrix::from_rows({{1, 0}, {0, 1}}), Matrix(1, 2), nn::Activation::identity};
  const std::vector<nn::DenseLayer> layers{l};
  const auto acts = nn::forward(layers, Matrix::from_rows({{1, 2}}));
  CHECK(acts.back() == Matrix::from_rows({{1, 2}}));
}

TEST_CASE("forward: zero sigmoid layer outputs one half") {
  const std::vector<nn::DenseLayer> layers{{Matrix(3, 2), Matrix(1, 2), nn::Activation::sigmoid}};
  Rng rng(1);
  const auto acts = nn::forward(layers, random_matrix(4, 3, rng));
  for (double v : acts.back().values()) CHECK(v == 0.5);
}

TEST_CASE("forward matches an independent re-implementation") {
  Rng rng(2);
  const std::size_t dims[] = {5, 4, 3};
  for (auto out_act : {nn::Activation::identity, nn::Activation::sigmoid}) {
    auto layers = nn::make_mlp(dims, nn::Activation::relu, out_act, rng);
    for (auto& l : layers) l.bias = random_matrix(1, l.out_dim(), rng);
    const Matrix x = random_matrix(3, 5, rng);
    const Matrix got = nn::forward(layers, x).back();
    const Matrix want = reference_forward(layers, x);
    for (std::size_t i = 0; i < got.size(); ++i) CHECK(got.data()[i] == doctest::Approx(want.data()[i]).epsilon(1e-13));
  }
}

TEST_CASE("forward rejects a width mismatch") {
  Rng rng(3);
  const std::size_t dims[] = {3, 2};
  const auto layers = nn::make_mlp(dims, nn::Activation::relu, nn::Activation::identity, rng);
  CHECK_THROWS_AS(nn::forward(layers, Matrix(1, 4)), ConfigError);
}

TEST_CASE("glorot init stays inside its bound and is seeded") {
  Rng a(4), b(4);
  const auto l1 = nn::make_dense(10, 6, nn::Activation::relu, a);
  const auto l2 = nn::make_dense(10, 6, nn::Activation::relu, b);
  CHECK(l1.weights == l2.weights);
  const double r = std::sqrt(6.0 / 16.0);
  for (double v : l1.weights.values()) CHECK(std::abs(v) < r);
  for (double v : l1.bias.values()) CHECK(v == 0.0);
}

TEST_CASE("backward: zero upstream gives zero gradients") {
  Rng rng(5);
  const std::size_t dims[] = {4, 3, 2};
  const auto layers = nn::make_mlp(dims, nn::Activation::relu, nn::Activation::sigmoid, rng);
  const auto acts = nn::forward(layers, random_matrix(2, 4, rng));
  const auto g = nn::backward(layers, acts, Matrix(2, 2));
  for (const auto& lg : g.layers) {
    for (double v : lg.weights.values()) CHECK(v == 0.0);
    for (double v : lg.bias.values()) CHECK(v == 0.0);
  }
  for (double v : g.input_grad.values()) CHECK(v == 0.0);
}

TEST_CASE("backward: linear layer weight gradient is X^T G") {
  Rng rng(6);
  const auto l = nn::make_dense(3, 2, nn::Activation::identity, rng);
  const std::vector<nn::DenseLayer> layers{l};
  const Matrix x = random_matrix(4, 3, rng), g = random_matrix(4, 2, rng);
  const auto res = nn::backward(layers, nn::forward(layers, x), g);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 2; ++j) {
      double s = 0.0;
      for (std::size_t r = 0; r < 4; ++r) s += x(r, i) * g(r, j);
      CHECK(res.layers[0].weights(i, j) == doctest::Approx(s).epsilon(1e-13));
    }
}

TEST_CASE("backward matches finite differences on random nets") {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t dims[] = {4, 5, 3, 2};
    auto layers = nn::make_mlp(dims, nn::Activation::relu, nn::Activation::sigmoid, rng);
    for (auto& l : layers) l.bias = random_matrix(1, l.out_dim(), rng);
    Matrix x = random_matrix(3, 4, rng);
    const Matrix weight = random_matrix(3, 2, rng);
    auto loss = [&] {
      const auto out = nn::forward(layers, x).back();
      double s = 0.0;
      for (std::size_t i = 0; i < out.size(); ++i) s += weight.data()[i] * out.data()[i];
      return s;
    };
    const auto res = nn::backward(layers, nn::forward(layers, x), weight);
    nn::Gradients grads;
    for (const auto& lg : res.layers) {
      grads.push_back(lg.weights);
      grads.push_back(lg.bias);
    }
    grads.push_back(res.input_grad);
    auto params = layer_params(layers);
    params.push_back({"x", &x});
    CHECK(testing::max_fd_error(params, grads, loss, rng, 6) < 1e-4);
  }
}

TEST_CASE("adagrad: zero gradient changes nothing") {
  Matrix p = Matrix::from_rows({{1.0, -2.0}});
  std::vector<nn::ParamRef> params{{"p", &p}};
  auto state = nn::AdaGradState::zeros_for(params);
  const std::vector<Matrix> grads{Matrix(1, 2)};
  nn::adagrad_step(params, grads, state);
  CHECK(p == Matrix::from_rows({{1.0, -2.0}}));
  CHECK(state.accumulators[0] == Matrix(1, 2));
}

TEST_CASE("adagrad: closed-form first and second steps") {
  Matrix p(1, 1, 0.0);
  std::vector<nn::ParamRef> params{{"p", &p}};
  auto state = nn::AdaGradState::zeros_for(params, {0.01, 1e-8});
  const std::vector<Matrix> grads{Matrix(1, 1, 1.0)};
  nn::adagrad_step(params, grads, state);
  CHECK(p(0, 0) == doctest::Approx(-0.01 / std::sqrt(1.0 + 1e-8)).epsilon(1e-15));
  const double after_one = p(0, 0);
  nn::adagrad_step(params, grads, state);
  CHECK(after_one - p(0, 0) == doctest::Approx(0.01 / std::sqrt(2.0 + 1e-8)).epsilon(1e-12));
  CHECK(state.accumulators[0](0, 0) == 2.0);
}

TEST_CASE("adagrad: accumulators never decrease") {
  Rng rng(8);
  Matrix p = random_matrix(3, 3, rng);
  std::vector<nn::ParamRef> params{{"p", &p}};
  auto state = nn::AdaGradState::zeros_for(params);
  Matrix prev = state.accumulators[0];
  for (int s = 0; s < 10; ++s) {
    const std::vector<Matrix> grads{random_matrix(3, 3, rng)};
    nn::adagrad_step(params, grads, state);
    for (std::size_t i = 0; i < prev.size(); ++i) CHECK(state.accumulators[0].data()[i] >= prev.data()[i]);
    prev = state.accumulators[0];
  }
}

TEST_CASE("adagrad: a non-finite gradient names the parameter and updates nothing") {
  Matrix a(1, 2, 1.0), b(1, 2, 1.0);
  std::vector<nn::ParamRef> params{{"head/0/weights", &a}, {"head/0/bias", &b}};
  auto state = nn::AdaGradState::zeros_for(params);
  std::vector<Matrix> grads{Matrix(1, 2, 0.5), Matrix(1, 2, 0.5)};
  grads[1](0, 1) = std::nan("");
  try {
    nn::adagrad_step(params, grads, state);
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("head/0/bias") != std::string::npos);
  }
  CHECK(a == Matrix(1, 2, 1.0));
  CHECK(state.accumulators[0] == Matrix(1, 2));
}

TEST_CASE("checkpoint round trip is bit exact") {
  Rng rng(9);
  Matrix w = random_matrix(4, 3, rng), b = random_matrix(1, 3, rng);
  w(0, 0) = -0.0;
  w(1, 1) = 1e-310;  // subnormal
  std::vector<nn::ParamRef> params{{"w", &w}, {"b", &b}};
  auto state = nn::AdaGradState::zeros_for(params);
  state.accumulators[0] = random_matrix(4, 3, rng);
  nn::Checkpoint ck;
  ck.metadata = R"({"kind":"test"})";
  nn::store_parameters(ck, params, &state);
  const auto path = std::filesystem::temp_directory_path() / "jdrec_nn_roundtrip.ckpt";
  nn::save_checkpoint(path, ck);
  const auto loaded = nn::load_checkpoint(path);
  std::filesystem::remove(path);
  CHECK(loaded.metadata == ck.metadata);

  Matrix w2(4, 3), b2(1, 3);
  std::vector<nn::ParamRef> params2{{"w", &w2}, {"b", &b2}};
  auto state2 = nn::AdaGradState::zeros_for(params2);
  nn::restore_parameters(loaded, params2, &state2);
  CHECK(std::memcmp(w.data(), w2.data(), w.size() * sizeof(double)) == 0);
  CHECK(b == b2);
  CHECK(state2.accumulators[0] == state.accumulators[0]);
}

TEST_CASE("checkpoint loading rejects garbage") {
  const auto path = std::filesystem::temp_directory_path() / "jdrec_nn_garbage.ckpt";
  {
    std::ofstream out(path, std::ios::binary);
    out << "not a checkpoint";
  }
  CHECK_THROWS_AS(nn::load_checkpoint(path), DataError);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(nn::load_checkpoint(path), IoError);
}
