#include "jdrec/generator/policy.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "jdrec/core/error.hpp"

namespace jdrec::generator {

using nn::Matrix;

data::PolicyMatrix column_softmax(const Matrix& logits) {
  data::PolicyMatrix m{Matrix(logits.rows(), logits.cols())};
  for (std::size_t j = 0; j < logits.cols(); ++j) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < logits.rows(); ++i) mx = std::max(mx, logits(i, j));
    double z = 0.0;
    for (std::size_t i = 0; i < logits.rows(); ++i) {
      const double e = std::exp(logits(i, j) - mx);
      m.entries(i, j) = e;
      z += e;
    }
    for (std::size_t i = 0; i < logits.rows(); ++i) m.entries(i, j) /= z;
  }
  return m;
}

Matrix column_softmax_backward(const data::PolicyMatrix& policy, const Matrix& grad_policy) {
  const Matrix& m = policy.entries;
  if (!m.same_shape(grad_policy)) throw ConfigError("column_softmax_backward: shape mismatch");
  Matrix out(m.rows(), m.cols());
  for (std::size_t j = 0; j < m.cols(); ++j) {
    double dot = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) dot += grad_policy(i, j) * m(i, j);
    for (std::size_t i = 0; i < m.rows(); ++i) out(i, j) = m(i, j) * (grad_policy(i, j) - dot);
  }
  return out;
}

Softmax2DLoss softmax2d_loss(const Matrix& logits, std::span<const data::ItemIndex> ids,
                             double lambda, Matrix* grad) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ConfigError("softmax2d_loss: lambda must be finite and >= 0");
  }
  const std::size_t L = ids.size();
  const std::size_t N = logits.cols();
  if (logits.rows() != L + 1) {
    throw ConfigError("softmax2d_loss: logits have " + std::to_string(logits.rows()) +
                      " rows, expected L+1=" + std::to_string(L + 1));
  }
  const auto rank = data::rank_label(ids, N);
  if (grad) grad->resize(L + 1, N);

  Softmax2DLoss loss;
  std::vector<double> p(std::max(N, L + 1));
  for (std::size_t i = 0; i < L; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < N; ++j) mx = std::max(mx, logits(i, j));
    double z = 0.0;
    for (std::size_t j = 0; j < N; ++j) z += (p[j] = std::exp(logits(i, j) - mx));
    loss.id += std::log(z) + mx - logits(i, ids[i]);
    if (grad) {
      for (std::size_t j = 0; j < N; ++j) (*grad)(i, j) += p[j] / z;
      (*grad)(i, ids[i]) -= 1.0;
    }
  }
  for (std::size_t j = 0; j < N; ++j) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i <= L; ++i) mx = std::max(mx, logits(i, j));
    double z = 0.0;
    for (std::size_t i = 0; i <= L; ++i) z += (p[i] = std::exp(logits(i, j) - mx));
    loss.rank += std::log(z) + mx - logits(rank[j], j);
    if (grad) {
      for (std::size_t i = 0; i <= L; ++i) (*grad)(i, j) += lambda * (p[i] / z);
      (*grad)(rank[j], j) -= lambda;
    }
  }
  loss.total = loss.id + lambda * loss.rank;
  return loss;
}

double list_log_prob(const data::PolicyMatrix& policy, std::span<const data::ItemIndex> slate,
                     double temperature, Matrix* grad) {
  const Matrix& m = policy.entries;
  const std::size_t L = policy.list_len();
  const std::size_t N = policy.candidate_count();
  if (slate.size() != L) {
    throw UsageError("list_log_prob: slate length " + std::to_string(slate.size()) +
                     " != L=" + std::to_string(L));
  }
  if (grad) grad->resize(m.rows(), m.cols());
  std::vector<bool> taken(N, false);
  std::vector<double> q(N);
  double logp = 0.0;
  for (std::size_t i = 0; i < L; ++i) {
    const auto chosen = slate[i];
    if (chosen >= N) throw UsageError("list_log_prob: item index out of range");
    if (taken[chosen]) {
      throw NumericError("list_log_prob: item " + std::to_string(chosen) +
                         " repeats, its renormalized probability is zero");
    }
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < N; ++j) {
      if (!taken[j]) mx = std::max(mx, temperature * m(i, j));
    }
    double z = 0.0;
    for (std::size_t j = 0; j < N; ++j) {
      q[j] = taken[j] ? 0.0 : std::exp(temperature * m(i, j) - mx);
      z += q[j];
    }
    logp += temperature * m(i, chosen) - mx - std::log(z);
    if (grad) {
      for (std::size_t j = 0; j < N; ++j) {
        if (!taken[j]) (*grad)(i, j) = -temperature * (q[j] / z);
      }
      (*grad)(i, chosen) += temperature;
    }
    taken[chosen] = true;
  }
  return logp;
}

GeneratorAccuracy generator_accuracies(const data::PolicyMatrix& policy,
                                       std::span<const data::ItemIndex> ids) {
  const Matrix& m = policy.entries;
  const std::size_t L = policy.list_len();
  const std::size_t N = policy.candidate_count();
  if (ids.size() != L) throw UsageError("generator_accuracies: ids length != L");
  const auto rank = data::rank_label(ids, N);
  std::size_t row_hits = 0;
  for (std::size_t i = 0; i < L; ++i) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < N; ++j) {
      if (m(i, j) > m(i, best)) best = j;
    }
    if (best == ids[i]) ++row_hits;
  }
  std::size_t col_hits = 0;
  for (std::size_t j = 0; j < N; ++j) {
    std::size_t best = 0;
    for (std::size_t i = 1; i <= L; ++i) {
      if (m(i, j) > m(best, j)) best = i;
    }
    if (best == rank[j]) ++col_hits;
  }
  return {static_cast<double>(row_hits) / static_cast<double>(L),
          static_cast<double>(col_hits) / static_cast<double>(N)};
}

double row_entropy(const data::PolicyMatrix& policy, double temperature) {
  const Matrix& m = policy.entries;
  const std::size_t L = policy.list_len();
  const std::size_t N = policy.candidate_count();
  double total = 0.0;
  for (std::size_t i = 0; i < L; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < N; ++j) mx = std::max(mx, temperature * m(i, j));
    double z = 0.0;
    for (std::size_t j = 0; j < N; ++j) z += std::exp(temperature * m(i, j) - mx);
    double h = 0.0;
    for (std::size_t j = 0; j < N; ++j) {
      const double p = std::exp(temperature * m(i, j) - mx) / z;
      if (p > 0.0) h -= p * std::log(p);
    }
    total += h;
  }
  return L == 0 ? 0.0 : total / static_cast<double>(L);
}

}  // namespace jdrec::generator
