#pragma once

#include <functional>
#include <span>
#include <vector>

#include "jdrec/data/types.hpp"
#include "jdrec/evaluator/evaluator.hpp"

namespace jdrec::training {

enum class RewardKind { naive, ctr, custom };

// Custom reward hook, e.g. mixing additional feedback signals.
using RewardHook = std::function<double(const data::Slate&, const data::CandidateSet&)>;

// 1 iff the slate equals the logged selection item for item, in order.
double reward_naive(const data::Slate& slate, const data::LoggedSample& logged);

// Mean of the evaluator's per-position CTRs for the slate.
double reward_ctr(const data::Slate& slate, const evaluator::EvaluatorModel& evaluator,
                  const data::CandidateSet& cs);

std::vector<double> reward_ctr_many(std::span<const data::Slate> slates,
                                    const evaluator::EvaluatorModel& evaluator,
                                    const data::CandidateSet& cs);

// Greedy list built position by position: each position takes the item that
// maximizes the evaluator's list score when the later positions are filled
// with the highest-pctr unused items.
data::Slate greedy_top_ctr_slate(const evaluator::EvaluatorModel& evaluator,
                                 const data::CandidateSet& cs);

}  // namespace jdrec::training
