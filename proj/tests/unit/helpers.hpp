#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "jdrec/core/rng.hpp"
#include "jdrec/data/schema.hpp"
#include "jdrec/data/types.hpp"
#include "jdrec/nn/parameters.hpp"

namespace testing {

using namespace jdrec;

// Two categorical and one numeric item feature, one of each on the user side.
inline data::FeatureSchema tiny_schema() {
  data::FeatureSchema s;
  data::FeatureDescriptor cat;
  cat.name = "category";
  cat.kind = data::FeatureKind::categorical;
  cat.vocab_size = 5;
  cat.embedding_dim = 3;
  data::FeatureDescriptor brand = cat;
  brand.name = "brand";
  brand.vocab_size = 4;
  brand.embedding_dim = 2;
  data::FeatureDescriptor price;
  price.name = "price";
  price.kind = data::FeatureKind::numeric;
  price.boundaries = {-0.5, 0.5};
  price.embedding_dim = 2;
  price.use_raw = true;
  s.item_features = {cat, brand, price};

  data::FeatureDescriptor seg = cat;
  seg.name = "segment";
  seg.vocab_size = 3;
  data::FeatureDescriptor act = price;
  act.name = "activity";
  act.embedding_dim = 0;
  s.user_features = {seg, act};
  return s;
}

inline data::CandidateSet random_candidates(std::size_t n, Rng& rng) {
  data::CandidateSet cs;
  for (std::size_t i = 0; i < n; ++i) {
    data::Item item;
    item.id = "i" + std::to_string(i);
    item.categorical = {static_cast<std::uint32_t>(1 + rng.below(4)),
                        static_cast<std::uint32_t>(1 + rng.below(3))};
    item.numeric = {rng.normal()};
    item.pctr = rng.uniform(0.01, 0.5);
    cs.items.push_back(std::move(item));
  }
  cs.user.categorical = {static_cast<std::uint32_t>(1 + rng.below(2))};
  cs.user.numeric = {rng.uniform()};
  return cs;
}

inline std::vector<data::ItemIndex> random_ids(std::size_t n, std::size_t l, Rng& rng) {
  std::vector<data::ItemIndex> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = static_cast<data::ItemIndex>(i);
  for (std::size_t i = n; i > 1; --i) std::swap(all[i - 1], all[rng.below(i)]);
  all.resize(l);
  return all;
}

inline data::LoggedSample random_sample(std::size_t n, std::size_t l, Rng& rng,
                                        bool partial_exposure = true) {
  data::LoggedSample s;
  s.candidates = random_candidates(n, rng);
  s.selected.items = random_ids(n, l, rng);
  s.selected.exposure.assign(l, 1);
  s.selected.click.assign(l, 0);
  for (std::size_t i = 0; i < l; ++i) {
    if (partial_exposure && rng.bernoulli(0.25)) s.selected.exposure[i] = 0;
    if (s.selected.exposure[i] && rng.bernoulli(0.4)) s.selected.click[i] = 1;
  }
  s.rerank_index = data::rerank_index_for(s.selected.items, n);
  return s;
}

// Zero-initialized biases put dead ReLU rows exactly on the kink, where
// finite differences are meaningless. Nudge them off it.
inline void jitter_biases(const std::vector<nn::ParamRef>& params, Rng& rng) {
  for (const auto& p : params) {
    if (p.name.find("bias") == std::string::npos) continue;
    for (double& v : p.value->values()) v += rng.uniform(-0.1, 0.1);
  }
}

inline double rel_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-5});
}

// Largest relative error between analytic gradients and central finite
// differences on up to `per_tensor` random entries of every parameter.
inline double max_fd_error(const std::vector<nn::ParamRef>& params, const nn::Gradients& analytic,
                           const std::function<double()>& loss, Rng& rng,
                           std::size_t per_tensor = 4, double h = 1e-6) {
  double worst = 0.0;
  for (std::size_t p = 0; p < params.size(); ++p) {
    nn::Matrix& m = *params[p].value;
    for (std::size_t t = 0; t < per_tensor && t < m.size(); ++t) {
      const std::size_t idx = m.size() <= per_tensor ? t : rng.below(m.size());
      const double keep = m.data()[idx];
      m.data()[idx] = keep + h;
      const double up = loss();
      m.data()[idx] = keep - h;
      const double down = loss();
      m.data()[idx] = keep;
      worst = std::max(worst, rel_error(analytic[p].data()[idx], (up - down) / (2.0 * h)));
    }
  }
  return worst;
}

}  // namespace testing
