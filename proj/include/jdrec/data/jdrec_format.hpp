#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>

#include "jdrec/data/schema.hpp"

namespace jdrec::data {

// Flat JDRec-style export: one tab-separated row per candidate item,
//
//   sample_id  click  rerank_index  <feature columns by schema name...>
//
// with a header row naming the columns. Rows of one sample are contiguous;
// rerank_index is -1 (or empty) for candidates that were not selected and
// the 0-based slate position otherwise. User features, when present, repeat
// on every row of the sample.

struct ConvertOptions {
  std::size_t list_len = 4;
  // Numeric item feature whose value also becomes the item's pctr. Empty
  // means pctr = 0.
  std::string pctr_feature;
  bool skip_malformed = false;
};

struct ConvertStats {
  std::size_t samples = 0;
  std::size_t rows = 0;
  std::size_t rejected = 0;
};

// Converts the flat export to the line-delimited JSON sample log.
ConvertStats convert_jdrec_flat(std::istream& in, std::ostream& out, const FeatureSchema& schema,
                                const ConvertOptions& options);

// Generic 51-feature item schema mirroring the JDRec dataset layout:
// 30 categorical and 21 numeric features (one of them "pctr").
FeatureSchema jdrec_schema();

// Synthetic flat export with `samples` requests of `candidates` rows each.
void write_synthetic_jdrec_flat(std::ostream& out, const FeatureSchema& schema,
                                std::size_t samples, std::size_t candidates,
                                std::size_t list_len, std::uint64_t seed);

}  // namespace jdrec::data
