#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "jdrec/core/rng.hpp"
#include "jdrec/data/schema.hpp"
#include "jdrec/data/types.hpp"

namespace jdrec::sim {

struct WorldConfig {
  std::size_t catalog_size = 400;
  std::size_t categories = 5;
  std::size_t segments = 4;        // user segments
  std::size_t candidates = 40;     // N per request
  std::size_t list_len = 4;        // L
  double quality_weight = 1.2;
  // Spread of the per-category mean quality; a large spread concentrates
  // the best items in a few categories.
  double category_spread = 1.5;
  double affinity_scale = 0.8;     // user segment x category preference
  double activity_weight = 0.5;
  double base_logit = -2.0;
  double redundancy = 1.0;         // beta: penalty per earlier same-category item
  std::vector<double> position_bias{1.0, 0.8, 0.65, 0.5};
  double signal_noise = 0.3;       // noise on the observable quality signal
  double pctr_noise = 0.3;         // noise on the point-wise pctr logit

  void validate() const;
  nlohmann::json to_json() const;
  static WorldConfig from_json(const nlohmann::json& j);
};

struct CatalogItem {
  std::uint32_t category = 0;
  double quality = 0.0;         // latent
  double quality_signal = 0.0;  // observable, noisy
  double price = 0.0;           // observable, irrelevant to clicks
  double pctr = 0.0;            // context-free estimate
};

// One request: candidates as the models see them plus the hidden state the
// click model needs.
struct Request {
  data::CandidateSet candidates;
  std::uint32_t segment = 0;
  double activity = 0.0;
  std::vector<std::uint32_t> catalog_index;  // per candidate
};

class SyntheticWorld {
 public:
  SyntheticWorld(WorldConfig config, std::uint64_t seed);

  const WorldConfig& config() const noexcept { return config_; }
  const data::FeatureSchema& schema() const noexcept { return schema_; }
  const std::vector<CatalogItem>& catalog() const noexcept { return catalog_; }
  double affinity(std::uint32_t segment, std::uint32_t category) const;
  // Non-fatal configuration remarks (e.g. a non-contextual world).
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

  Request sample_request(Rng& rng) const;

  // Ground-truth click probability of every slate position.
  std::vector<double> click_probabilities(const Request& request, const data::Slate& slate) const;
  // Expected clicks per position.
  double expected_ctr(const Request& request, const data::Slate& slate) const;

  // Categorical feature holding the category, for legality rules.
  static constexpr std::size_t kCategoryFeature = 0;

 private:
  WorldConfig config_;
  data::FeatureSchema schema_;
  std::vector<CatalogItem> catalog_;
  std::vector<double> affinity_;  // segments x categories
  std::vector<std::string> warnings_;
};

SyntheticWorld gen_world(std::uint64_t seed, const WorldConfig& config);

// Exposes every position and draws clicks from the ground-truth model.
data::Slate simulate_clicks(const SyntheticWorld& world, const Request& request,
                            const data::Slate& slate, Rng& rng);

data::LoggedSample make_logged(const Request& request, const data::Slate& shown);

}  // namespace jdrec::sim
