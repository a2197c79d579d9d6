#include "jdrec/sampler/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "jdrec/core/error.hpp"

namespace jdrec::sampler {

using data::ItemIndex;
using data::Slate;

LegalityRule always_legal() {
  return [](std::span<const ItemIndex>, ItemIndex) { return true; };
}

LegalityRule max_per_category(std::vector<std::uint32_t> item_category, std::size_t cap) {
  return [categories = std::move(item_category), cap](std::span<const ItemIndex> prefix,
                                                       ItemIndex candidate) {
    const auto c = categories.at(candidate);
    std::size_t same = 0;
    for (auto p : prefix) {
      if (categories.at(p) == c) ++same;
    }
    return same < cap;
  };
}

std::vector<std::uint32_t> item_categories(const data::CandidateSet& cs, std::size_t feature) {
  std::vector<std::uint32_t> out;
  out.reserve(cs.size());
  for (const auto& item : cs.items) out.push_back(item.categorical.at(feature));
  return out;
}

nn::Matrix temperature_table(const data::PolicyMatrix& policy, double temperature) {
  if (!std::isfinite(temperature) || temperature < 0.0) {
    throw NumericError("temperature must be finite and >= 0");
  }
  const nn::Matrix& m = policy.entries;
  const std::size_t L = policy.list_len();
  const std::size_t N = policy.candidate_count();
  nn::Matrix prob(L, N);
  for (std::size_t i = 0; i < L; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < N; ++j) {
      if (!std::isfinite(m(i, j))) {
        throw NumericError("temperature_table: non-finite policy entry (" + std::to_string(i) +
                           ", " + std::to_string(j) + ")");
      }
      mx = std::max(mx, temperature * m(i, j));
    }
    double z = 0.0;
    for (std::size_t j = 0; j < N; ++j) z += (prob(i, j) = std::exp(temperature * m(i, j) - mx));
    for (std::size_t j = 0; j < N; ++j) prob(i, j) /= z;
  }
  return prob;
}

namespace {

// Index drawn proportionally to nonnegative weights; N if the row has no mass.
std::size_t draw(std::span<const double> weights, Rng& rng) {
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0)) return weights.size();
  const double u = rng.uniform() * total;
  double cum = 0.0;
  std::size_t last_positive = weights.size();
  for (std::size_t j = 0; j < weights.size(); ++j) {
    if (weights[j] <= 0.0) continue;
    cum += weights[j];
    last_positive = j;
    if (u < cum) return j;
  }
  return last_positive;
}

void renormalize(std::span<double> row) {
  double s = 0.0;
  for (double v : row) s += v;
  if (s > 0.0) {
    for (double& v : row) v /= s;
  }
}

}  // namespace

GenerationResult mcmc_generate(const data::PolicyMatrix& policy, const GenerationConfig& config,
                               Rng& rng) {
  const std::size_t L = config.list_len;
  const std::size_t N = policy.candidate_count();
  if (L != policy.list_len()) {
    throw ConfigError("mcmc_generate: config list length " + std::to_string(L) +
                      " != policy list length " + std::to_string(policy.list_len()));
  }
  if (N < L) throw UsageError("mcmc_generate: fewer candidates than slate positions");
  if (config.max_rounds == 0) throw ConfigError("mcmc_generate: k must be >= 1");
  const LegalityRule& legal = config.rule ? config.rule : always_legal();

  const nn::Matrix base = temperature_table(policy, config.temperature);
  GenerationResult result;
  std::set<std::vector<ItemIndex>> seen;
  std::vector<ItemIndex> list;
  for (std::size_t round = 0; round < config.max_rounds; ++round) {
    nn::Matrix prob = base;
    list.clear();
    bool aborted = false;
    for (std::size_t n = 0; n < L && !aborted; ++n) {
      auto row = prob.row(n);
      std::size_t pick = N;
      while (true) {
        pick = draw(row, rng);
        if (pick == N) {
          aborted = true;
          break;
        }
        if (legal(list, static_cast<ItemIndex>(pick))) break;
        row[pick] = 0.0;
      }
      if (aborted) break;
      list.push_back(static_cast<ItemIndex>(pick));
      for (std::size_t r = 0; r < L; ++r) prob(r, pick) = 0.0;
      for (std::size_t r = n + 1; r < L; ++r) renormalize(prob.row(r));
    }
    if (aborted) {
      ++result.aborted_rounds;
      continue;
    }
    if (config.deduplicate && !seen.insert(list).second) continue;
    result.slates.push_back(Slate{list, {}, {}});
  }
  if (result.slates.empty()) {
    throw GenerationExhausted("mcmc_generate: all " + std::to_string(config.max_rounds) +
                              " rounds hit a legality dead end");
  }
  return result;
}

Slate ranking_slate(const data::CandidateSet& cs, std::size_t list_len) {
  if (cs.size() < list_len) throw UsageError("ranking_slate: fewer candidates than positions");
  std::vector<ItemIndex> order(cs.size());
  std::iota(order.begin(), order.end(), ItemIndex{0});
  std::stable_sort(order.begin(), order.end(), [&](ItemIndex a, ItemIndex b) {
    return cs.items[a].pctr > cs.items[b].pctr;
  });
  order.resize(list_len);
  return Slate{std::move(order), {}, {}};
}

Slate sample_by_pctr(const data::CandidateSet& cs, std::size_t list_len, Rng& rng) {
  if (cs.size() < list_len) throw UsageError("sample_by_pctr: fewer candidates than positions");
  std::vector<double> w(cs.size());
  for (std::size_t i = 0; i < cs.size(); ++i) w[i] = cs.items[i].pctr;
  std::vector<bool> used(cs.size(), false);
  Slate s;
  for (std::size_t p = 0; p < list_len; ++p) {
    std::size_t pick = draw(w, rng);
    if (pick == w.size()) {
      // Remaining items all have zero pctr: uniform among the unused ones.
      std::vector<std::size_t> rest;
      for (std::size_t i = 0; i < used.size(); ++i) {
        if (!used[i]) rest.push_back(i);
      }
      pick = rest[rng.below(rest.size())];
    }
    used[pick] = true;
    w[pick] = 0.0;
    s.items.push_back(static_cast<ItemIndex>(pick));
  }
  return s;
}

std::vector<Slate> heuristic_generate(const data::CandidateSet& cs, std::size_t list_len,
                                      std::size_t count, Rng& rng) {
  if (count == 0) throw UsageError("heuristic_generate: count must be >= 1");
  std::vector<Slate> out{ranking_slate(cs, list_len)};
  std::set<std::vector<ItemIndex>> seen{out.front().items};
  for (std::size_t c = 1; c < count; ++c) {
    Slate s = sample_by_pctr(cs, list_len, rng);
    if (seen.insert(s.items).second) out.push_back(std::move(s));
  }
  return out;
}

}  // namespace jdrec::sampler
