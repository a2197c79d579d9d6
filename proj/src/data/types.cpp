#include "jdrec/data/types.hpp"

#include <cmath>
#include <unordered_set>

#include "jdrec/core/error.hpp"

namespace jdrec::data {

void PolicyMatrix::validate(double tolerance) const {
  if (entries.rows() < 2) throw DataError("policy matrix needs at least L + 1 = 2 rows");
  for (std::size_t j = 0; j < entries.cols(); ++j) {
    double sum = 0.0;
    for (std::size_t i = 0; i < entries.rows(); ++i) {
      const double v = entries(i, j);
      if (!(v >= 0.0 && v <= 1.0)) {
        throw DataError("policy matrix entry (" + std::to_string(i) + ", " +
                        std::to_string(j) + ") outside [0, 1]");
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > tolerance) {
      throw DataError("policy matrix column " + std::to_string(j) + " sums to " +
                      std::to_string(sum));
    }
  }
}

std::vector<std::uint32_t> rank_label(std::span<const ItemIndex> ids, std::size_t n) {
  const auto not_in = static_cast<std::uint32_t>(ids.size());
  std::vector<std::uint32_t> rank(n, not_in);
  for (std::size_t j = 0; j < ids.size(); ++j) {
    if (ids[j] >= n) {
      throw DataError("rank_label: id " + std::to_string(ids[j]) + " out of range for N=" +
                      std::to_string(n));
    }
    if (rank[ids[j]] != not_in) {
      throw DataError("rank_label: duplicate id " + std::to_string(ids[j]));
    }
    rank[ids[j]] = static_cast<std::uint32_t>(j);
  }
  return rank;
}

std::vector<int> rerank_index_for(std::span<const ItemIndex> ids, std::size_t n) {
  const auto rank = rank_label(ids, n);
  std::vector<int> out(n);
  for (std::size_t x = 0; x < n; ++x) {
    out[x] = rank[x] == ids.size() ? -1 : static_cast<int>(rank[x]);
  }
  return out;
}

void validate_item(const Item& item, const FeatureSchema& schema) {
  if (item.categorical.size() != schema.item_categorical_count() ||
      item.numeric.size() != schema.item_numeric_count()) {
    throw DataError("item '" + item.id + "': feature counts do not match schema");
  }
  std::size_t ci = 0;
  for (const auto& f : schema.item_features) {
    if (f.kind != FeatureKind::categorical) continue;
    if (item.categorical[ci] >= f.vocab_size) {
      throw DataError("item '" + item.id + "': feature '" + f.name + "' index " +
                      std::to_string(item.categorical[ci]) + " outside vocabulary");
    }
    ++ci;
  }
  for (double v : item.numeric) {
    if (!std::isfinite(v)) throw DataError("item '" + item.id + "': non-finite numeric feature");
  }
  if (!(item.pctr >= 0.0 && item.pctr <= 1.0)) {
    throw DataError("item '" + item.id + "': pctr outside [0, 1]");
  }
}

void validate_candidate_set(const CandidateSet& cs, const FeatureSchema& schema,
                            std::size_t list_len) {
  if (cs.size() < list_len) {
    throw DataError("candidate set has " + std::to_string(cs.size()) + " items, fewer than L=" +
                    std::to_string(list_len));
  }
  std::unordered_set<std::string> ids;
  for (const Item& item : cs.items) {
    validate_item(item, schema);
    if (!ids.insert(item.id).second) throw DataError("duplicate item id '" + item.id + "'");
  }
  if (cs.user.categorical.size() != schema.user_categorical_count() ||
      cs.user.numeric.size() != schema.user_numeric_count()) {
    throw DataError("user context feature counts do not match schema");
  }
  std::size_t ci = 0;
  for (const auto& f : schema.user_features) {
    if (f.kind != FeatureKind::categorical) continue;
    if (cs.user.categorical[ci] >= f.vocab_size) {
      throw DataError("user feature '" + f.name + "' index outside vocabulary");
    }
    ++ci;
  }
  for (double v : cs.user.numeric) {
    if (!std::isfinite(v)) throw DataError("user context: non-finite numeric feature");
  }
}

void validate_slate(const Slate& slate, std::size_t candidate_count, std::size_t list_len) {
  if (slate.items.size() != list_len) {
    throw DataError("slate has length " + std::to_string(slate.items.size()) + ", expected L=" +
                    std::to_string(list_len));
  }
  rank_label(slate.items, candidate_count);  // distinctness and range
  if (slate.labeled()) {
    if (slate.exposure.size() != list_len || slate.click.size() != list_len) {
      throw DataError("slate label vectors have wrong length");
    }
    for (std::size_t i = 0; i < list_len; ++i) {
      if (slate.exposure[i] > 1 || slate.click[i] > 1) throw DataError("labels must be 0 or 1");
      if (slate.click[i] > slate.exposure[i]) {
        throw DataError("click without exposure at position " + std::to_string(i));
      }
    }
  } else if (!slate.click.empty()) {
    throw DataError("slate has click labels but no exposure labels");
  }
}

void validate_sample(const LoggedSample& sample, const FeatureSchema& schema,
                     std::size_t list_len) {
  validate_candidate_set(sample.candidates, schema, list_len);
  validate_slate(sample.selected, sample.candidates.size(), list_len);
  if (sample.rerank_index != rerank_index_for(sample.selected.items, sample.candidates.size())) {
    throw DataError("rerank_index inconsistent with selected slate");
  }
}

}  // namespace jdrec::data
