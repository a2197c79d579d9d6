#include "jdrec/data/sample_io.hpp"

#include <cmath>
#include <json.hpp>

#include "jdrec/core/error.hpp"

namespace jdrec::data {

namespace {

using nlohmann::json;

std::vector<std::uint32_t> read_categorical(const json& values,
                                            const std::vector<FeatureDescriptor>& features,
                                            const LoadOptions& options, std::size_t* oov) {
  std::vector<std::uint32_t> out;
  std::size_t vi = 0;
  for (const auto& f : features) {
    if (f.kind != FeatureKind::categorical) continue;
    if (vi >= values.size()) throw DataError("too few categorical values");
    const json& v = values[vi++];
    if (!v.is_number_integer()) throw DataError("feature '" + f.name + "': not an integer");
    const auto raw = v.get<std::int64_t>();
    if (raw < 0 || static_cast<std::uint64_t>(raw) >= f.vocab_size) {
      if (options.strict_vocab) {
        throw DataError("feature '" + f.name + "': index " + std::to_string(raw) +
                        " out of vocabulary");
      }
      if (oov) ++*oov;
      out.push_back(0);
    } else {
      out.push_back(static_cast<std::uint32_t>(raw));
    }
  }
  if (vi != values.size()) throw DataError("too many categorical values");
  return out;
}

std::vector<double> read_numeric(const json& values, std::size_t expected) {
  if (values.size() != expected) {
    throw DataError("expected " + std::to_string(expected) + " numeric values, got " +
                    std::to_string(values.size()));
  }
  std::vector<double> out;
  out.reserve(expected);
  for (const json& v : values) {
    if (!v.is_number()) throw DataError("non-numeric value in numeric features");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw DataError("non-finite numeric feature");
    out.push_back(d);
  }
  return out;
}

const json& field(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw DataError(std::string("missing field '") + key + "'");
  return *it;
}

}  // namespace

LoggedSample parse_sample(const std::string& line, const FeatureSchema& schema,
                          const LoadOptions& options, std::size_t* oov_mapped) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw DataError(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw DataError("record is not a JSON object");

  LoggedSample s;
  if (auto it = j.find("user"); it != j.end()) {
    s.candidates.user.categorical =
        read_categorical(it->value("cat", json::array()), schema.user_features, options, oov_mapped);
    s.candidates.user.numeric = read_numeric(it->value("num", json::array()),
                                             schema.user_numeric_count());
  } else {
    s.candidates.user.categorical =
        read_categorical(json::array(), schema.user_features, options, oov_mapped);
    s.candidates.user.numeric = read_numeric(json::array(), schema.user_numeric_count());
  }

  const json& cands = field(j, "candidates");
  if (!cands.is_array()) throw DataError("'candidates' is not an array");
  const std::size_t n = cands.size();
  const std::size_t list_len = options.list_len;
  s.selected.items.assign(list_len, 0);
  s.selected.exposure.assign(list_len, 0);
  s.selected.click.assign(list_len, 0);
  std::vector<bool> filled(list_len, false);
  s.rerank_index.assign(n, -1);

  for (std::size_t c = 0; c < n; ++c) {
    const json& cj = cands[c];
    Item item;
    item.id = field(cj, "id").is_string() ? cj["id"].get<std::string>() : cj["id"].dump();
    item.categorical = read_categorical(cj.value("cat", json::array()), schema.item_features,
                                        options, oov_mapped);
    item.numeric = read_numeric(cj.value("num", json::array()), schema.item_numeric_count());
    item.pctr = cj.value("pctr", 0.0);
    if (!(item.pctr >= 0.0 && item.pctr <= 1.0)) {
      throw DataError("candidate " + std::to_string(c) + ": pctr outside [0, 1]");
    }
    const int rerank = cj.value("rerank_index", -1);
    const int click = cj.value("click", 0);
    if (click != 0 && click != 1) throw DataError("click label must be 0 or 1");
    const int exposure = cj.value("exposure", rerank >= 0 ? 1 : 0);
    if (exposure != 0 && exposure != 1) throw DataError("exposure label must be 0 or 1");
    if (click > exposure) {
      throw DataError("candidate " + std::to_string(c) + " ('" + item.id +
                      "') clicked without exposure");
    }
    if (rerank < 0) {
      if (rerank != -1) throw DataError("rerank_index must be -1 or a slate position");
      if (exposure != 0) {
        throw DataError("candidate " + std::to_string(c) + " exposed but not in the slate");
      }
    } else {
      if (static_cast<std::size_t>(rerank) >= list_len) {
        throw DataError("rerank_index " + std::to_string(rerank) + " outside slate of length " +
                        std::to_string(list_len));
      }
      if (filled[rerank]) throw DataError("two candidates share rerank_index " + std::to_string(rerank));
      filled[rerank] = true;
      s.selected.items[rerank] = static_cast<ItemIndex>(c);
      s.selected.exposure[rerank] = static_cast<std::uint8_t>(exposure);
      s.selected.click[rerank] = static_cast<std::uint8_t>(click);
      s.rerank_index[c] = rerank;
    }
    s.candidates.items.push_back(std::move(item));
  }
  for (std::size_t p = 0; p < list_len; ++p) {
    if (!filled[p]) {
      throw DataError("no candidate carries rerank_index " + std::to_string(p) +
                      " (expected exactly L=" + std::to_string(list_len) + " selected)");
    }
  }
  validate_sample(s, schema, list_len);
  return s;
}

SampleReader::SampleReader(const std::filesystem::path& path, FeatureSchema schema,
                           LoadOptions options)
    : in_(path), schema_(std::move(schema)), options_(options) {
  if (!in_) throw IoError("cannot open sample file " + path.string());
}

std::optional<LoggedSample> SampleReader::next() {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_no_;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      return parse_sample(line, schema_, options_, &oov_mapped_);
    } catch (const DataError& e) {
      if (!options_.skip_malformed) {
        throw DataError("line " + std::to_string(line_no_) + ": " + e.what());
      }
      issues_.push_back({line_no_, e.what()});
    }
  }
  return std::nullopt;
}

LoadResult load_samples(const std::filesystem::path& path, const FeatureSchema& schema,
                        LoadOptions options) {
  SampleReader reader(path, schema, options);
  LoadResult result;
  while (auto s = reader.next()) result.samples.push_back(std::move(*s));
  result.issues = reader.issues();
  result.oov_mapped = reader.oov_mapped();
  return result;
}

void write_sample(std::ostream& out, const LoggedSample& sample) {
  json j;
  j["user"] = {{"cat", sample.candidates.user.categorical},
               {"num", sample.candidates.user.numeric}};
  json cands = json::array();
  const auto& slate = sample.selected;
  for (std::size_t c = 0; c < sample.candidates.size(); ++c) {
    const Item& item = sample.candidates.items[c];
    json cj;
    cj["id"] = item.id;
    cj["cat"] = item.categorical;
    cj["num"] = item.numeric;
    cj["pctr"] = item.pctr;
    const int rerank = sample.rerank_index.empty() ? -1 : sample.rerank_index[c];
    int click = 0;
    if (rerank >= 0 && slate.labeled()) {
      click = slate.click[rerank];
      if (slate.exposure[rerank] != 1) cj["exposure"] = slate.exposure[rerank];
    }
    cj["click"] = click;
    cj["rerank_index"] = rerank;
    cands.push_back(std::move(cj));
  }
  j["candidates"] = std::move(cands);
  out << j.dump() << '\n';
}

void write_samples(const std::filesystem::path& path, std::span<const LoggedSample> samples) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write sample file " + path.string());
  for (const auto& s : samples) write_sample(out, s);
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace jdrec::data
