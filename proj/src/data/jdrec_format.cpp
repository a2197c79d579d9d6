#include "jdrec/data/jdrec_format.hpp"

#include <charconv>
#include <cmath>
#include <sstream>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "jdrec/core/error.hpp"
#include "jdrec/core/rng.hpp"
#include "jdrec/data/sample_io.hpp"
#include "jdrec/data/types.hpp"

namespace jdrec::data {

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

std::int64_t parse_int(std::string_view s, const char* what) {
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw DataError(std::string("bad ") + what + " '" + std::string(s) + "'");
  }
  return v;
}

double parse_double(std::string_view s, const char* what) {
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v)) {
    throw DataError(std::string("bad ") + what + " '" + std::string(s) + "'");
  }
  return v;
}

struct ColumnMap {
  std::size_t sample_id, click, rerank;
  std::vector<std::size_t> item_cat, item_num, user_cat, user_num;
  std::vector<const FeatureDescriptor*> item_cat_f, user_cat_f;
  std::ptrdiff_t pctr = -1;
};

ColumnMap map_columns(const std::vector<std::string_view>& header, const FeatureSchema& schema,
                      const ConvertOptions& options) {
  std::unordered_map<std::string, std::size_t> idx;
  for (std::size_t i = 0; i < header.size(); ++i) idx.emplace(std::string(header[i]), i);
  auto need = [&](const std::string& name) {
    auto it = idx.find(name);
    if (it == idx.end()) throw DataError("flat file header lacks column '" + name + "'");
    return it->second;
  };
  ColumnMap m{need("sample_id"), need("click"), need("rerank_index"), {}, {}, {}, {}, {}, {}, -1};
  for (const auto& f : schema.item_features) {
    if (f.kind == FeatureKind::categorical) {
      m.item_cat.push_back(need(f.name));
      m.item_cat_f.push_back(&f);
    } else {
      m.item_num.push_back(need(f.name));
    }
  }
  for (const auto& f : schema.user_features) {
    if (f.kind == FeatureKind::categorical) {
      m.user_cat.push_back(need(f.name));
      m.user_cat_f.push_back(&f);
    } else {
      m.user_num.push_back(need(f.name));
    }
  }
  if (!options.pctr_feature.empty()) m.pctr = static_cast<std::ptrdiff_t>(need(options.pctr_feature));
  return m;
}

std::uint32_t vocab_index(std::int64_t raw, const FeatureDescriptor& f) {
  return raw < 0 || static_cast<std::uint64_t>(raw) >= f.vocab_size ? 0u
                                                                     : static_cast<std::uint32_t>(raw);
}

// Accumulates the rows of one sample and emits it as a LoggedSample.
struct PendingSample {
  std::string id;
  LoggedSample sample;
  std::vector<int> rerank;
  std::vector<int> click;
  std::size_t first_line = 0;

  void reset(std::string sid, std::size_t line) {
    id = std::move(sid);
    sample = LoggedSample{};
    rerank.clear();
    click.clear();
    first_line = line;
  }
};

void finish(PendingSample& p, const FeatureSchema& schema, const ConvertOptions& options) {
  const std::size_t n = p.sample.candidates.size();
  const std::size_t list_len = options.list_len;
  Slate& slate = p.sample.selected;
  slate.items.assign(list_len, 0);
  slate.exposure.assign(list_len, 1);
  slate.click.assign(list_len, 0);
  std::vector<bool> filled(list_len, false);
  p.sample.rerank_index.assign(n, -1);
  for (std::size_t c = 0; c < n; ++c) {
    const int r = p.rerank[c];
    if (r < 0) {
      if (p.click[c] != 0) throw DataError("candidate " + std::to_string(c) + " clicked without exposure");
      continue;
    }
    if (static_cast<std::size_t>(r) >= list_len || filled[r]) {
      throw DataError("invalid or repeated rerank_index " + std::to_string(r));
    }
    filled[r] = true;
    slate.items[r] = static_cast<ItemIndex>(c);
    slate.click[r] = static_cast<std::uint8_t>(p.click[c]);
    p.sample.rerank_index[c] = r;
  }
  for (bool f : filled) {
    if (!f) throw DataError("sample does not select exactly L=" + std::to_string(list_len) + " items");
  }
  validate_sample(p.sample, schema, list_len);
}

}  // namespace

ConvertStats convert_jdrec_flat(std::istream& in, std::ostream& out, const FeatureSchema& schema,
                                const ConvertOptions& options) {
  ConvertStats stats;
  std::string line;
  if (!std::getline(in, line)) return stats;
  const auto header = split_tabs(line);
  const ColumnMap cols = map_columns(header, schema, options);

  PendingSample pending;
  bool open = false;
  std::size_t line_no = 1;

  auto flush = [&]() {
    if (!open) return;
    try {
      finish(pending, schema, options);
      write_sample(out, pending.sample);
      ++stats.samples;
    } catch (const DataError& e) {
      if (!options.skip_malformed) {
        throw DataError("sample '" + pending.id + "' (line " + std::to_string(pending.first_line) +
                        "): " + e.what());
      }
      ++stats.rejected;
    }
    open = false;
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_tabs(line);
    if (f.size() != header.size()) {
      throw DataError("line " + std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " columns, got " + std::to_string(f.size()));
    }
    ++stats.rows;
    const std::string sid(f[cols.sample_id]);
    if (!open || sid != pending.id) {
      flush();
      pending.reset(sid, line_no);
      open = true;
    }
    try {
      Item item;
      item.id = pending.id + ":" + std::to_string(pending.sample.candidates.size());
      for (std::size_t i = 0; i < cols.item_cat.size(); ++i) {
        item.categorical.push_back(
            vocab_index(parse_int(f[cols.item_cat[i]], "categorical value"), *cols.item_cat_f[i]));
      }
      for (std::size_t c : cols.item_num) item.numeric.push_back(parse_double(f[c], "numeric value"));
      if (cols.pctr >= 0) item.pctr = parse_double(f[static_cast<std::size_t>(cols.pctr)], "pctr");
      if (pending.sample.candidates.items.empty()) {
        auto& user = pending.sample.candidates.user;
        for (std::size_t i = 0; i < cols.user_cat.size(); ++i) {
          user.categorical.push_back(
              vocab_index(parse_int(f[cols.user_cat[i]], "categorical value"), *cols.user_cat_f[i]));
        }
        for (std::size_t c : cols.user_num) user.numeric.push_back(parse_double(f[c], "numeric value"));
      }
      const auto click = parse_int(f[cols.click], "click");
      if (click != 0 && click != 1) throw DataError("click must be 0 or 1");
      const std::string_view rr = f[cols.rerank];
      const auto rerank = rr.empty() ? -1 : parse_int(rr, "rerank_index");
      pending.sample.candidates.items.push_back(std::move(item));
      pending.click.push_back(static_cast<int>(click));
      pending.rerank.push_back(rerank < 0 ? -1 : static_cast<int>(rerank));
    } catch (const DataError& e) {
      throw DataError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  flush();
  return stats;
}

FeatureSchema jdrec_schema() {
  FeatureSchema s;
  for (int i = 0; i < 30; ++i) {
    FeatureDescriptor f;
    f.name = "cat_" + std::to_string(i);
    f.kind = FeatureKind::categorical;
    f.vocab_size = 64;
    f.embedding_dim = 2;
    s.item_features.push_back(f);
  }
  for (int i = 0; i < 21; ++i) {
    FeatureDescriptor f;
    f.name = i == 0 ? "pctr" : "num_" + std::to_string(i);
    f.kind = FeatureKind::numeric;
    f.boundaries = i == 0 ? std::vector<double>{0.01, 0.02, 0.05, 0.1, 0.2}
                          : std::vector<double>{-1.0, -0.5, 0.0, 0.5, 1.0};
    f.embedding_dim = 2;
    f.use_raw = true;
    s.item_features.push_back(f);
  }
  s.validate();
  return s;
}

void write_synthetic_jdrec_flat(std::ostream& out, const FeatureSchema& schema,
                                std::size_t samples, std::size_t candidates,
                                std::size_t list_len, std::uint64_t seed) {
  if (candidates < list_len) throw ConfigError("need at least L candidates per sample");
  Rng rng = Rng::stream(seed, "jdrec-flat");
  out << "sample_id\tclick\trerank_index";
  for (const auto& f : schema.item_features) out << '\t' << f.name;
  for (const auto& f : schema.user_features) out << '\t' << f.name;
  out << '\n';
  std::vector<std::size_t> perm(candidates);
  for (std::size_t s = 0; s < samples; ++s) {
    for (std::size_t i = 0; i < candidates; ++i) perm[i] = i;
    for (std::size_t i = 0; i < list_len; ++i) {
      std::swap(perm[i], perm[i + rng.below(candidates - i)]);
    }
    std::vector<int> rerank(candidates, -1);
    for (std::size_t p = 0; p < list_len; ++p) rerank[perm[p]] = static_cast<int>(p);
    std::vector<std::int64_t> user_cat;
    std::vector<double> user_num;
    for (const auto& f : schema.user_features) {
      if (f.kind == FeatureKind::categorical) {
        user_cat.push_back(static_cast<std::int64_t>(1 + rng.below(f.vocab_size - 1)));
      } else {
        user_num.push_back(rng.normal());
      }
    }
    for (std::size_t c = 0; c < candidates; ++c) {
      const int click = rerank[c] >= 0 && rng.bernoulli(0.1) ? 1 : 0;
      out << "s" << s << '\t' << click << '\t' << rerank[c];
      for (const auto& f : schema.item_features) {
        out << '\t';
        if (f.kind == FeatureKind::categorical) {
          out << 1 + rng.below(f.vocab_size > 1 ? f.vocab_size - 1 : 1);
        } else if (f.name == "pctr") {
          out << rng.uniform(0.0, 0.3);
        } else {
          out << rng.normal();
        }
      }
      std::size_t uc = 0, un = 0;
      for (const auto& f : schema.user_features) {
        out << '\t';
        if (f.kind == FeatureKind::categorical) out << user_cat[uc++];
        else out << user_num[un++];
      }
      out << '\n';
    }
  }
}

}  // namespace jdrec::data
