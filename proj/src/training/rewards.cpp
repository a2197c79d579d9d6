#include "jdrec/training/rewards.hpp"

#include <algorithm>
#include <numeric>

#include "jdrec/core/error.hpp"

namespace jdrec::training {

double reward_naive(const data::Slate& slate, const data::LoggedSample& logged) {
  return slate.items == logged.selected.items ? 1.0 : 0.0;
}

std::vector<double> reward_ctr_many(std::span<const data::Slate> slates,
                                    const evaluator::EvaluatorModel& evaluator,
                                    const data::CandidateSet& cs) {
  const auto results = evaluator.predict_many(cs, slates);
  std::vector<double> out;
  out.reserve(results.size());
  for (const auto& r : results) {
    out.push_back(r.list_score / static_cast<double>(r.per_item_ctr.size()));
  }
  return out;
}

double reward_ctr(const data::Slate& slate, const evaluator::EvaluatorModel& evaluator,
                  const data::CandidateSet& cs) {
  return reward_ctr_many(std::span<const data::Slate>(&slate, 1), evaluator, cs).front();
}

data::Slate greedy_top_ctr_slate(const evaluator::EvaluatorModel& evaluator,
                                 const data::CandidateSet& cs) {
  const std::size_t L = evaluator.list_len();
  const std::size_t N = cs.size();
  if (N < L) throw UsageError("greedy_top_ctr_slate: fewer candidates than positions");
  std::vector<data::ItemIndex> by_pctr(N);
  std::iota(by_pctr.begin(), by_pctr.end(), data::ItemIndex{0});
  std::stable_sort(by_pctr.begin(), by_pctr.end(), [&](auto a, auto b) {
    return cs.items[a].pctr > cs.items[b].pctr;
  });

  std::vector<bool> used(N, false);
  std::vector<data::ItemIndex> prefix;
  std::vector<data::Slate> trials;
  std::vector<data::ItemIndex> trial_items;
  for (std::size_t pos = 0; pos < L; ++pos) {
    trials.clear();
    trial_items.clear();
    for (std::size_t c = 0; c < N; ++c) {
      if (used[c]) continue;
      data::Slate s{prefix, {}, {}};
      s.items.push_back(static_cast<data::ItemIndex>(c));
      for (auto f : by_pctr) {
        if (s.items.size() == L) break;
        if (!used[f] && f != c) s.items.push_back(f);
      }
      trials.push_back(std::move(s));
      trial_items.push_back(static_cast<data::ItemIndex>(c));
    }
    const auto results = evaluator.predict_many(cs, trials);
    std::size_t best = 0;
    for (std::size_t t = 1; t < results.size(); ++t) {
      if (results[t].list_score > results[best].list_score) best = t;
    }
    prefix.push_back(trial_items[best]);
    used[trial_items[best]] = true;
  }
  return data::Slate{prefix, {}, {}};
}

}  // namespace jdrec::training
