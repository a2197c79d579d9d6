#include "jdrec/sim/world.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "jdrec/core/error.hpp"

namespace jdrec::sim {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

data::FeatureDescriptor categorical(std::string name, std::size_t vocab, std::size_t dim) {
  data::FeatureDescriptor d;
  d.name = std::move(name);
  d.kind = data::FeatureKind::categorical;
  d.vocab_size = vocab;
  d.embedding_dim = dim;
  return d;
}

data::FeatureDescriptor numeric(std::string name, std::vector<double> boundaries,
                                std::size_t dim) {
  data::FeatureDescriptor d;
  d.name = std::move(name);
  d.kind = data::FeatureKind::numeric;
  d.boundaries = std::move(boundaries);
  d.embedding_dim = dim;
  d.use_raw = true;
  return d;
}

}  // namespace

void WorldConfig::validate() const {
  if (categories == 0 || segments == 0) throw ConfigError("world: need at least one category and segment");
  if (list_len == 0) throw ConfigError("world: list length must be positive");
  if (candidates < list_len) throw ConfigError("world: fewer candidates than list positions");
  if (catalog_size < candidates) throw ConfigError("world: catalog smaller than a candidate set");
  if (position_bias.size() != list_len) {
    throw ConfigError("world: position bias needs one entry per list position");
  }
  for (std::size_t i = 0; i < position_bias.size(); ++i) {
    if (!(position_bias[i] > 0.0 && position_bias[i] <= 1.0)) {
      throw ConfigError("world: position bias entries must lie in (0, 1]");
    }
    if (i > 0 && position_bias[i] > position_bias[i - 1]) {
      throw ConfigError("world: position bias must not increase with position");
    }
  }
  if (!(redundancy >= 0.0) || !std::isfinite(redundancy)) {
    throw ConfigError("world: redundancy penalty must be finite and >= 0");
  }
  for (double v : {quality_weight, category_spread, affinity_scale, activity_weight, base_logit,
                   signal_noise, pctr_noise}) {
    if (!std::isfinite(v)) throw ConfigError("world: non-finite parameter");
  }
}

nlohmann::json WorldConfig::to_json() const {
  return {{"catalog_size", catalog_size},     {"categories", categories},
          {"segments", segments},             {"candidates", candidates},
          {"list_len", list_len},             {"quality_weight", quality_weight},
          {"category_spread", category_spread}, {"affinity_scale", affinity_scale},
          {"activity_weight", activity_weight}, {"base_logit", base_logit},
          {"redundancy", redundancy},         {"position_bias", position_bias},
          {"signal_noise", signal_noise},     {"pctr_noise", pctr_noise}};
}

WorldConfig WorldConfig::from_json(const nlohmann::json& j) {
  WorldConfig c;
  try {
    c.catalog_size = j.value("catalog_size", c.catalog_size);
    c.categories = j.value("categories", c.categories);
    c.segments = j.value("segments", c.segments);
    c.candidates = j.value("candidates", c.candidates);
    c.list_len = j.value("list_len", c.list_len);
    c.quality_weight = j.value("quality_weight", c.quality_weight);
    c.category_spread = j.value("category_spread", c.category_spread);
    c.affinity_scale = j.value("affinity_scale", c.affinity_scale);
    c.activity_weight = j.value("activity_weight", c.activity_weight);
    c.base_logit = j.value("base_logit", c.base_logit);
    c.redundancy = j.value("redundancy", c.redundancy);
    c.position_bias = j.value("position_bias", c.position_bias);
    c.signal_noise = j.value("signal_noise", c.signal_noise);
    c.pctr_noise = j.value("pctr_noise", c.pctr_noise);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("world config: ") + e.what());
  }
  c.validate();
  return c;
}

SyntheticWorld::SyntheticWorld(WorldConfig config, std::uint64_t seed)
    : config_(std::move(config)) {
  config_.validate();
  Rng rng = Rng::stream(seed, "world");

  std::vector<double> category_mean(config_.categories);
  for (auto& m : category_mean) m = config_.category_spread * rng.normal();
  affinity_.resize(config_.segments * config_.categories);
  for (auto& a : affinity_) a = config_.affinity_scale * rng.normal();

  catalog_.resize(config_.catalog_size);
  for (auto& item : catalog_) {
    item.category = static_cast<std::uint32_t>(rng.below(config_.categories));
    item.quality = category_mean[item.category] + 0.7 * rng.normal();
    item.quality_signal = item.quality + config_.signal_noise * rng.normal();
    item.price = rng.uniform();
    item.pctr = sigmoid(config_.quality_weight * item.quality_signal + config_.base_logit +
                        config_.pctr_noise * rng.normal());
  }

  schema_.item_features = {categorical("category", config_.categories + 1, 4),
                           numeric("quality_signal", {-1.5, -0.5, 0.5, 1.5}, 2),
                           numeric("price", {0.25, 0.5, 0.75}, 0)};
  schema_.user_features = {categorical("segment", config_.segments + 1, 4),
                           numeric("activity", {0.5}, 0)};
  schema_.validate();

  const bool flat = std::all_of(config_.position_bias.begin(), config_.position_bias.end(),
                                [&](double b) { return b == config_.position_bias.front(); });
  if (config_.redundancy == 0.0 && flat) {
    warnings_.push_back(
        "redundancy penalty is 0 and position bias is flat: clicks do not depend on list context");
  }
}

double SyntheticWorld::affinity(std::uint32_t segment, std::uint32_t category) const {
  return affinity_[segment * config_.categories + category];
}

Request SyntheticWorld::sample_request(Rng& rng) const {
  Request r;
  r.segment = static_cast<std::uint32_t>(rng.below(config_.segments));
  r.activity = rng.uniform();
  std::unordered_set<std::uint32_t> seen;
  while (r.catalog_index.size() < config_.candidates) {
    const auto idx = static_cast<std::uint32_t>(rng.below(catalog_.size()));
    if (seen.insert(idx).second) r.catalog_index.push_back(idx);
  }
  r.candidates.user.categorical = {r.segment + 1};
  r.candidates.user.numeric = {r.activity};
  r.candidates.items.reserve(config_.candidates);
  for (auto idx : r.catalog_index) {
    const auto& c = catalog_[idx];
    data::Item item;
    item.id = "c" + std::to_string(idx);
    item.categorical = {c.category + 1};
    item.numeric = {c.quality_signal, c.price};
    item.pctr = c.pctr;
    r.candidates.items.push_back(std::move(item));
  }
  return r;
}

std::vector<double> SyntheticWorld::click_probabilities(const Request& request,
                                                        const data::Slate& slate) const {
  if (slate.items.size() != config_.list_len) {
    throw UsageError("click model: slate length differs from the world's list length");
  }
  std::vector<double> p(slate.items.size());
  std::vector<std::size_t> shown(config_.categories, 0);
  for (std::size_t i = 0; i < slate.items.size(); ++i) {
    const auto& item = catalog_.at(request.catalog_index.at(slate.items[i]));
    const double logit = config_.quality_weight * item.quality +
                         affinity(request.segment, item.category) +
                         config_.activity_weight * (request.activity - 0.5) + config_.base_logit;
    p[i] = sigmoid(logit) * config_.position_bias[i] *
           std::exp(-config_.redundancy * static_cast<double>(shown[item.category]));
    ++shown[item.category];
  }
  return p;
}

double SyntheticWorld::expected_ctr(const Request& request, const data::Slate& slate) const {
  const auto p = click_probabilities(request, slate);
  double s = 0.0;
  for (double v : p) s += v;
  return s / static_cast<double>(p.size());
}

SyntheticWorld gen_world(std::uint64_t seed, const WorldConfig& config) {
  return SyntheticWorld(config, seed);
}

data::Slate simulate_clicks(const SyntheticWorld& world, const Request& request,
                            const data::Slate& slate, Rng& rng) {
  const auto p = world.click_probabilities(request, slate);
  data::Slate out{slate.items, std::vector<std::uint8_t>(p.size(), 1),
                  std::vector<std::uint8_t>(p.size(), 0)};
  for (std::size_t i = 0; i < p.size(); ++i) out.click[i] = rng.bernoulli(p[i]) ? 1 : 0;
  return out;
}

data::LoggedSample make_logged(const Request& request, const data::Slate& shown) {
  data::LoggedSample s;
  s.candidates = request.candidates;
  s.selected = shown;
  s.rerank_index = data::rerank_index_for(shown.items, request.candidates.size());
  return s;
}

}  // namespace jdrec::sim
