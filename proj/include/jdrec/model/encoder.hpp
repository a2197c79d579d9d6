#pragma once

#include <span>
#include <string>
#include <vector>

#include "jdrec/core/rng.hpp"
#include "jdrec/data/schema.hpp"
#include "jdrec/data/types.hpp"
#include "jdrec/nn/matrix.hpp"
#include "jdrec/nn/parameters.hpp"

namespace jdrec::model {

struct EmbeddingTable {
  nn::Matrix values;  // vocab_size x dim

  std::size_t vocab_size() const noexcept { return values.rows(); }
  std::size_t dim() const noexcept { return values.cols(); }
};

// Maps (item, user context) pairs to dense input rows via shared embedding
// tables. Row layout: item features in schema order (embedding, then raw
// value when enabled), the item's pctr, then user features likewise.
class FeatureEncoder {
 public:
  FeatureEncoder() = default;
  FeatureEncoder(data::FeatureSchema schema, Rng& rng);
  FeatureEncoder(const FeatureEncoder& other);
  FeatureEncoder& operator=(const FeatureEncoder& other);
  FeatureEncoder(FeatureEncoder&& other) noexcept;
  FeatureEncoder& operator=(FeatureEncoder&& other) noexcept;
  ~FeatureEncoder() = default;

  const data::FeatureSchema& schema() const noexcept { return schema_; }
  std::size_t output_dim() const noexcept { return dim_; }

  // Writes one row per entry of `items` into out starting at row_offset.
  void encode_into(const data::CandidateSet& cs, std::span<const data::ItemIndex> items,
                   nn::Matrix& out, std::size_t row_offset) const;
  nn::Matrix encode(const data::CandidateSet& cs, std::span<const data::ItemIndex> items) const;
  nn::Matrix encode_all(const data::CandidateSet& cs) const;

  // Accumulates table gradients from dLoss/d(rows). table_grads follows the
  // order of parameters().
  void backward(const data::CandidateSet& cs, std::span<const data::ItemIndex> items,
                const nn::Matrix& grad, std::size_t row_offset,
                std::span<nn::Matrix> table_grads) const;

  void append_parameters(std::vector<nn::ParamRef>& out, const std::string& prefix);
  std::size_t table_count() const noexcept { return tables_.size(); }

 private:
  struct Slot {
    bool user = false;
    data::FeatureKind kind = data::FeatureKind::categorical;
    std::size_t value_index = 0;  // index into the categorical or numeric vector
    int table = -1;
    std::size_t emb_offset = 0;
    bool raw = false;
    std::size_t raw_offset = 0;
    const std::vector<double>* boundaries = nullptr;
  };

  std::size_t row_index(const Slot& slot, const data::Item& item, const data::UserContext& user) const;
  void build_layout();

  data::FeatureSchema schema_;
  std::vector<EmbeddingTable> tables_;
  std::vector<Slot> slots_;
  std::size_t pctr_offset_ = 0;
  std::size_t dim_ = 0;
};

}  // namespace jdrec::model
