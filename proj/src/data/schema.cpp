#include "jdrec/data/schema.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "jdrec/core/error.hpp"

namespace jdrec::data {

namespace {

std::size_t count_kind(const std::vector<FeatureDescriptor>& fs, FeatureKind kind) {
  return static_cast<std::size_t>(
      std::count_if(fs.begin(), fs.end(), [&](const auto& f) { return f.kind == kind; }));
}

nlohmann::json descriptor_to_json(const FeatureDescriptor& f) {
  nlohmann::json j;
  j["name"] = f.name;
  j["kind"] = f.kind == FeatureKind::categorical ? "categorical" : "numeric";
  if (f.kind == FeatureKind::categorical) {
    j["vocab_size"] = f.vocab_size;
  } else {
    j["boundaries"] = f.boundaries;
    j["use_raw"] = f.use_raw;
  }
  j["embedding_dim"] = f.embedding_dim;
  return j;
}

FeatureDescriptor descriptor_from_json(const nlohmann::json& j) {
  FeatureDescriptor f;
  f.name = j.at("name").get<std::string>();
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "categorical") {
    f.kind = FeatureKind::categorical;
    f.vocab_size = j.at("vocab_size").get<std::size_t>();
  } else if (kind == "numeric") {
    f.kind = FeatureKind::numeric;
    f.boundaries = j.value("boundaries", std::vector<double>{});
    f.use_raw = j.value("use_raw", false);
  } else {
    throw ConfigError("feature '" + f.name + "': unknown kind '" + kind + "'");
  }
  f.embedding_dim = j.value("embedding_dim", std::size_t{0});
  return f;
}

void validate_group(const std::vector<FeatureDescriptor>& fs, std::set<std::string>& names) {
  for (const auto& f : fs) {
    if (f.name.empty()) throw ConfigError("feature with empty name");
    if (!names.insert(f.name).second) throw ConfigError("duplicate feature name '" + f.name + "'");
    if (f.kind == FeatureKind::categorical) {
      if (f.vocab_size < 1) throw ConfigError("feature '" + f.name + "': vocab_size must be >= 1");
      if (f.embedding_dim < 1) {
        throw ConfigError("feature '" + f.name + "': categorical features need embedding_dim >= 1");
      }
    } else {
      for (std::size_t i = 0; i < f.boundaries.size(); ++i) {
        if (!std::isfinite(f.boundaries[i])) {
          throw ConfigError("feature '" + f.name + "': non-finite bucket boundary");
        }
        if (i > 0 && !(f.boundaries[i - 1] < f.boundaries[i])) {
          throw ConfigError("feature '" + f.name + "': bucket boundaries must be strictly increasing");
        }
      }
    }
  }
}

}  // namespace

std::size_t FeatureSchema::item_categorical_count() const noexcept {
  return count_kind(item_features, FeatureKind::categorical);
}
std::size_t FeatureSchema::item_numeric_count() const noexcept {
  return count_kind(item_features, FeatureKind::numeric);
}
std::size_t FeatureSchema::user_categorical_count() const noexcept {
  return count_kind(user_features, FeatureKind::categorical);
}
std::size_t FeatureSchema::user_numeric_count() const noexcept {
  return count_kind(user_features, FeatureKind::numeric);
}

void FeatureSchema::validate() const {
  if (version != kCurrentVersion) {
    throw ConfigError("unsupported schema version " + std::to_string(version));
  }
  std::set<std::string> names;
  validate_group(item_features, names);
  validate_group(user_features, names);
}

nlohmann::json FeatureSchema::to_json() const {
  nlohmann::json j;
  j["version"] = version;
  j["item_features"] = nlohmann::json::array();
  for (const auto& f : item_features) j["item_features"].push_back(descriptor_to_json(f));
  j["user_features"] = nlohmann::json::array();
  for (const auto& f : user_features) j["user_features"].push_back(descriptor_to_json(f));
  return j;
}

FeatureSchema FeatureSchema::from_json(const nlohmann::json& j) {
  FeatureSchema s;
  try {
    if (!j.contains("version")) throw ConfigError("schema: missing mandatory 'version' field");
    s.version = j.at("version").get<int>();
    for (const auto& f : j.at("item_features")) s.item_features.push_back(descriptor_from_json(f));
    if (j.contains("user_features")) {
      for (const auto& f : j.at("user_features")) s.user_features.push_back(descriptor_from_json(f));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("schema: ") + e.what());
  }
  s.validate();
  return s;
}

FeatureSchema FeatureSchema::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open schema file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("schema " + path.string() + ": " + e.what());
  }
  return from_json(j);
}

void FeatureSchema::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write schema file " + path.string());
  out << to_json().dump(2) << '\n';
}

std::size_t bucketize(double value, std::span<const double> boundaries) {
  if (!std::isfinite(value)) throw DataError("bucketize: non-finite value");
  return static_cast<std::size_t>(
      std::lower_bound(boundaries.begin(), boundaries.end(), value) - boundaries.begin());
}

}  // namespace jdrec::data
