#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace jdrec::data {

enum class FeatureKind { categorical, numeric };

struct FeatureDescriptor {
  std::string name;
  FeatureKind kind = FeatureKind::categorical;
  // Categorical only. Index 0 is reserved for out-of-vocabulary values.
  std::size_t vocab_size = 0;
  // Numeric only; strictly increasing.
  std::vector<double> boundaries;
  // Width of the embedding (bucket embedding for numeric features). A numeric
  // feature may use 0 and rely on its raw value alone.
  std::size_t embedding_dim = 0;
  // Numeric only: also feed the raw value into the network.
  bool use_raw = false;

  // Number of embedding rows (vocabulary or bucket count).
  std::size_t table_rows() const noexcept {
    return kind == FeatureKind::categorical ? vocab_size : boundaries.size() + 1;
  }

  friend bool operator==(const FeatureDescriptor&, const FeatureDescriptor&) = default;
};

// Feature descriptors for item-side and user-side inputs. Items and user
// contexts store categorical and numeric values as two vectors, each in the
// declaration order of the matching kind.
struct FeatureSchema {
  static constexpr int kCurrentVersion = 1;

  int version = kCurrentVersion;
  std::vector<FeatureDescriptor> item_features;
  std::vector<FeatureDescriptor> user_features;

  std::size_t item_categorical_count() const noexcept;
  std::size_t item_numeric_count() const noexcept;
  std::size_t user_categorical_count() const noexcept;
  std::size_t user_numeric_count() const noexcept;

  // Throws ConfigError on duplicate names, zero vocabularies or unsorted
  // boundaries.
  void validate() const;

  nlohmann::json to_json() const;
  static FeatureSchema from_json(const nlohmann::json& j);
  static FeatureSchema load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  friend bool operator==(const FeatureSchema&, const FeatureSchema&) = default;
};

// Number of boundaries strictly below value, in [0, boundaries.size()].
// Throws DataError for non-finite values.
std::size_t bucketize(double value, std::span<const double> boundaries);

}  // namespace jdrec::data
