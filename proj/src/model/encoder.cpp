#include "jdrec/model/encoder.hpp"

#include <cmath>

#include "jdrec/core/error.hpp"
#include "jdrec/kernels/kernels.hpp"

namespace jdrec::model {

using data::FeatureKind;

FeatureEncoder::FeatureEncoder(data::FeatureSchema schema, Rng& rng) : schema_(std::move(schema)) {
  schema_.validate();
  auto add_tables = [&](const std::vector<data::FeatureDescriptor>& fs) {
    for (const auto& f : fs) {
      if (f.embedding_dim == 0) continue;
      EmbeddingTable t{nn::Matrix(f.table_rows(), f.embedding_dim)};
      const double r = std::sqrt(6.0 / static_cast<double>(t.vocab_size() + t.dim()));
      for (double& v : t.values.values()) v = rng.uniform(-r, r);
      tables_.push_back(std::move(t));
    }
  };
  add_tables(schema_.item_features);
  add_tables(schema_.user_features);
  build_layout();
}

// Slots keep pointers into schema_, so copies rebuild them.
FeatureEncoder::FeatureEncoder(const FeatureEncoder& other)
    : schema_(other.schema_), tables_(other.tables_) {
  build_layout();
}

FeatureEncoder& FeatureEncoder::operator=(const FeatureEncoder& other) {
  if (this != &other) {
    schema_ = other.schema_;
    tables_ = other.tables_;
    build_layout();
  }
  return *this;
}

FeatureEncoder::FeatureEncoder(FeatureEncoder&& other) noexcept
    : schema_(std::move(other.schema_)), tables_(std::move(other.tables_)) {
  build_layout();
}

FeatureEncoder& FeatureEncoder::operator=(FeatureEncoder&& other) noexcept {
  schema_ = std::move(other.schema_);
  tables_ = std::move(other.tables_);
  build_layout();
  return *this;
}

void FeatureEncoder::build_layout() {
  slots_.clear();
  std::size_t offset = 0;
  int table = 0;
  auto add = [&](const std::vector<data::FeatureDescriptor>& fs, bool user) {
    std::size_t cat = 0, num = 0;
    for (const auto& f : fs) {
      Slot s;
      s.user = user;
      s.kind = f.kind;
      s.value_index = f.kind == FeatureKind::categorical ? cat++ : num++;
      if (f.embedding_dim > 0) {
        s.table = table++;
        s.emb_offset = offset;
        offset += f.embedding_dim;
      }
      if (f.kind == FeatureKind::numeric) {
        s.boundaries = &f.boundaries;
        if (f.use_raw) {
          s.raw = true;
          s.raw_offset = offset++;
        }
      }
      slots_.push_back(s);
    }
  };
  add(schema_.item_features, false);
  pctr_offset_ = offset++;
  add(schema_.user_features, true);
  dim_ = offset;
}

std::size_t FeatureEncoder::row_index(const Slot& slot, const data::Item& item,
                                      const data::UserContext& user) const {
  if (slot.kind == FeatureKind::categorical) {
    const auto& cat = slot.user ? user.categorical : item.categorical;
    const std::size_t v = cat.at(slot.value_index);
    return v < tables_[slot.table].vocab_size() ? v : 0;
  }
  const auto& num = slot.user ? user.numeric : item.numeric;
  return data::bucketize(num.at(slot.value_index), *slot.boundaries);
}

void FeatureEncoder::encode_into(const data::CandidateSet& cs,
                                 std::span<const data::ItemIndex> items, nn::Matrix& out,
                                 std::size_t row_offset) const {
  if (out.cols() != dim_ || out.rows() < row_offset + items.size()) {
    throw ConfigError("encoder: output matrix has wrong shape");
  }
  for (std::size_t r = 0; r < items.size(); ++r) {
    if (items[r] >= cs.size()) throw ConfigError("encoder: item index out of range");
    const data::Item& item = cs.items[items[r]];
    auto row = out.row(row_offset + r);
    for (const Slot& s : slots_) {
      if (s.table >= 0) {
        const auto src = tables_[s.table].values.row(row_index(s, item, cs.user));
        std::copy(src.begin(), src.end(), row.begin() + static_cast<std::ptrdiff_t>(s.emb_offset));
      }
      if (s.raw) {
        const auto& num = s.user ? cs.user.numeric : item.numeric;
        row[s.raw_offset] = num.at(s.value_index);
      }
    }
    row[pctr_offset_] = item.pctr;
  }
}

nn::Matrix FeatureEncoder::encode(const data::CandidateSet& cs,
                                  std::span<const data::ItemIndex> items) const {
  nn::Matrix out(items.size(), dim_);
  encode_into(cs, items, out, 0);
  return out;
}

nn::Matrix FeatureEncoder::encode_all(const data::CandidateSet& cs) const {
  std::vector<data::ItemIndex> all(cs.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<data::ItemIndex>(i);
  return encode(cs, all);
}

void FeatureEncoder::backward(const data::CandidateSet& cs, std::span<const data::ItemIndex> items,
                              const nn::Matrix& grad, std::size_t row_offset,
                              std::span<nn::Matrix> table_grads) const {
  if (table_grads.size() != tables_.size()) throw ConfigError("encoder: gradient count mismatch");
  const auto& k = kernels::active();
  for (std::size_t r = 0; r < items.size(); ++r) {
    const data::Item& item = cs.items[items[r]];
    const auto g = grad.row(row_offset + r);
    for (const Slot& s : slots_) {
      if (s.table < 0) continue;
      nn::Matrix& tg = table_grads[static_cast<std::size_t>(s.table)];
      k.axpy(tg.cols(), 1.0, g.data() + s.emb_offset, tg.row(row_index(s, item, cs.user)).data());
    }
  }
}

void FeatureEncoder::append_parameters(std::vector<nn::ParamRef>& out, const std::string& prefix) {
  std::size_t t = 0;
  auto add = [&](const std::vector<data::FeatureDescriptor>& fs, const char* side) {
    for (const auto& f : fs) {
      if (f.embedding_dim == 0) continue;
      out.push_back({prefix + "embedding/" + side + "/" + f.name, &tables_[t++].values});
    }
  };
  add(schema_.item_features, "item");
  add(schema_.user_features, "user");
}

}  // namespace jdrec::model
