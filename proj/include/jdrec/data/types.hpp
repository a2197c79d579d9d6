#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "jdrec/data/schema.hpp"
#include "jdrec/nn/matrix.hpp"

namespace jdrec::data {

// Position of an item inside its candidate set (0-based).
using ItemIndex = std::uint32_t;

struct Item {
  std::string id;
  std::vector<std::uint32_t> categorical;
  std::vector<double> numeric;
  double pctr = 0.0;  // point-wise predicted CTR, in [0, 1]

  friend bool operator==(const Item&, const Item&) = default;
};

struct UserContext {
  std::vector<std::uint32_t> categorical;
  std::vector<double> numeric;

  friend bool operator==(const UserContext&, const UserContext&) = default;
};

// N candidate items for one request. Semantically a set: any reordering of
// items denotes the same request.
struct CandidateSet {
  std::vector<Item> items;
  UserContext user;

  std::size_t size() const noexcept { return items.size(); }

  friend bool operator==(const CandidateSet&, const CandidateSet&) = default;
};

// Ordered list of L distinct candidate indices. exposure/click are either
// empty (unlabeled, e.g. a freshly generated slate) or have length L.
struct Slate {
  std::vector<ItemIndex> items;
  std::vector<std::uint8_t> exposure;
  std::vector<std::uint8_t> click;

  std::size_t size() const noexcept { return items.size(); }
  bool labeled() const noexcept { return !exposure.empty(); }

  friend bool operator==(const Slate&, const Slate&) = default;
};

struct LoggedSample {
  CandidateSet candidates;
  Slate selected;
  // Per candidate: 0-based position in the selected slate, or -1.
  std::vector<int> rerank_index;

  friend bool operator==(const LoggedSample&, const LoggedSample&) = default;
};

// (L + 1) x N generation policy. Row i < L holds the per-item score for
// position i; row L is the "not in list" class. Each column is a
// distribution over the L + 1 classes.
struct PolicyMatrix {
  nn::Matrix entries;

  std::size_t list_len() const noexcept { return entries.rows() - 1; }
  std::size_t candidate_count() const noexcept { return entries.cols(); }

  // Throws DataError unless entries are in [0, 1] and columns sum to 1
  // within tolerance.
  void validate(double tolerance = 1e-6) const;
};

// Rank label, 0-based: rank[x] = j if ids[j] == x, else L.
// Throws DataError on duplicate or out-of-range ids.
std::vector<std::uint32_t> rank_label(std::span<const ItemIndex> ids, std::size_t n);

// rerank_index vector (position or -1) for a slate over n candidates.
std::vector<int> rerank_index_for(std::span<const ItemIndex> ids, std::size_t n);

// Throws DataError describing the first violated invariant.
void validate_item(const Item& item, const FeatureSchema& schema);
void validate_candidate_set(const CandidateSet& cs, const FeatureSchema& schema,
                            std::size_t list_len);
void validate_slate(const Slate& slate, std::size_t candidate_count, std::size_t list_len);
void validate_sample(const LoggedSample& sample, const FeatureSchema& schema,
                     std::size_t list_len);

}  // namespace jdrec::data
