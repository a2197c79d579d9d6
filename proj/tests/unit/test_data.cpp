#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "helpers.hpp"
#include "jdrec/core/error.hpp"
#include "jdrec/data/jdrec_format.hpp"
#include "jdrec/data/sample_io.hpp"

using namespace jdrec;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name, const std::string& content) {
  const auto p = fs::temp_directory_path() / name;
  std::ofstream out(p, std::ios::binary);
  out << content;
  return p;
}

std::vector<std::uint32_t> to_zero_based(std::initializer_list<std::uint32_t> one_based) {
  std::vector<std::uint32_t> out;
  for (auto v : one_based) out.push_back(v - 1);
  return out;
}

}  // namespace

TEST_CASE("rank_label on the documented examples") {
  const std::vector<data::ItemIndex> a{0, 1, 2, 3};
  CHECK(data::rank_label(a, 6) == to_zero_based({1, 2, 3, 4, 5, 5}));
  const std::vector<data::ItemIndex> b{4, 0, 2, 1};
  CHECK(data::rank_label(b, 6) == to_zero_based({2, 4, 3, 5, 1, 5}));
}

TEST_CASE("rank_label is a bijection on ranked entries and inverts") {
  Rng rng(21);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 4 + rng.below(10), l = 1 + rng.below(4);
    const auto ids = testing::random_ids(n, l, rng);
    const auto rank = data::rank_label(ids, n);
    REQUIRE(rank.size() == n);
    std::size_t not_in = 0;
    std::vector<data::ItemIndex> recovered(l, 0);
    std::vector<int> hits(l, 0);
    for (std::size_t x = 0; x < n; ++x) {
      if (rank[x] == l) {
        ++not_in;
      } else {
        ++hits[rank[x]];
        recovered[rank[x]] = static_cast<data::ItemIndex>(x);
      }
    }
    CHECK(not_in == n - l);
    for (int h : hits) CHECK(h == 1);
    CHECK(recovered == ids);
  }
}

TEST_CASE("rank_label rejects duplicates and out-of-range ids") {
  const std::vector<data::ItemIndex> dup{0, 0};
  const std::vector<data::ItemIndex> far{0, 7};
  CHECK_THROWS_AS(data::rank_label(dup, 5), DataError);
  CHECK_THROWS_AS(data::rank_label(far, 5), DataError);
}

TEST_CASE("bucketize") {
  const std::vector<double> b{0.1, 0.5};
  CHECK(data::bucketize(-3.0, b) == 0);
  CHECK(data::bucketize(0.3, b) == 1);
  CHECK(data::bucketize(0.5, b) == 1);  // strictly below
  CHECK(data::bucketize(0.51, b) == 2);
  CHECK_THROWS_AS(data::bucketize(std::nan(""), b), DataError);

  Rng rng(22);
  std::vector<double> bounds;
  double x = -2.0;
  for (int i = 0; i < 9; ++i) bounds.push_back(x += rng.uniform(0.05, 0.6));
  for (int t = 0; t < 1000; ++t) {
    const double v = rng.uniform(-3.0, 4.0);
    std::size_t scan = 0;
    for (double bd : bounds) scan += bd < v ? 1 : 0;
    CHECK(data::bucketize(v, bounds) == scan);
  }
}

TEST_CASE("schema validation and json round trip") {
  const auto s = testing::tiny_schema();
  s.validate();
  CHECK(data::FeatureSchema::from_json(s.to_json()) == s);

  auto dup = s;
  dup.item_features[1].name = "category";
  CHECK_THROWS_AS(dup.validate(), ConfigError);
  auto unsorted = s;
  unsorted.item_features[2].boundaries = {0.5, 0.1};
  CHECK_THROWS_AS(unsorted.validate(), ConfigError);
  auto zero_vocab = s;
  zero_vocab.item_features[0].vocab_size = 0;
  CHECK_THROWS_AS(zero_vocab.validate(), ConfigError);

  auto j = s.to_json();
  j.erase("version");
  CHECK_THROWS_AS(data::FeatureSchema::from_json(j), ConfigError);
}

TEST_CASE("sample log round trip is loss free") {
  Rng rng(23);
  const auto schema = testing::tiny_schema();
  std::vector<data::LoggedSample> samples;
  for (int i = 0; i < 25; ++i) samples.push_back(testing::random_sample(8, 4, rng));
  const auto path = fs::temp_directory_path() / "jdrec_roundtrip.jsonl";
  data::write_samples(path, samples);
  const auto loaded = data::load_samples(path, schema);
  fs::remove(path);
  CHECK(loaded.issues.empty());
  REQUIRE(loaded.samples.size() == samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) CHECK(loaded.samples[i] == samples[i]);
}

TEST_CASE("empty sample file loads as empty") {
  const auto p = temp_file("jdrec_empty.jsonl", "");
  const auto r = data::load_samples(p, testing::tiny_schema());
  fs::remove(p);
  CHECK(r.samples.empty());
  CHECK(r.issues.empty());
}

TEST_CASE("a click without exposure is rejected with its line number") {
  Rng rng(24);
  auto s = testing::random_sample(6, 4, rng, false);
  std::ostringstream good;
  data::write_sample(good, s);
  // Second line: a selected candidate clicked but not exposed.
  auto j = nlohmann::json::parse(good.str());
  for (auto& c : j["candidates"]) {
    if (c["rerank_index"].get<int>() >= 0) {
      c["exposure"] = 0;
      c["click"] = 1;
      break;
    }
  }
  const auto p = temp_file("jdrec_bad.jsonl", good.str() + j.dump() + "\n" + good.str());
  try {
    data::load_samples(p, testing::tiny_schema());
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  data::LoadOptions skip;
  skip.skip_malformed = true;
  const auto r = data::load_samples(p, testing::tiny_schema(), skip);
  fs::remove(p);
  CHECK(r.samples.size() == 2);
  REQUIRE(r.issues.size() == 1);
  CHECK(r.issues[0].line == 2);
}

TEST_CASE("malformed records: wrong arity, non-finite numbers, bad json") {
  Rng rng(25);
  const auto s = testing::random_sample(6, 4, rng, false);
  std::ostringstream line;
  data::write_sample(line, s);
  auto base = nlohmann::json::parse(line.str());

  auto arity = base;
  arity["candidates"][0]["cat"] = {1};
  auto too_few = base;
  too_few["candidates"].erase(too_few["candidates"].begin() + 5);
  while (too_few["candidates"].size() > 3) too_few["candidates"].erase(too_few["candidates"].begin());
  auto pctr = base;
  pctr["candidates"][0]["pctr"] = 1.5;

  const std::string content = arity.dump() + "\n{not json\n" + pctr.dump() + "\n" +
                              R"({"user":{"cat":[1],"num":[1e999]},"candidates":[]})" + "\n" +
                              too_few.dump() + "\n";
  const auto p = temp_file("jdrec_malformed.jsonl", content);
  data::LoadOptions skip;
  skip.skip_malformed = true;
  const auto r = data::load_samples(p, testing::tiny_schema(), skip);
  fs::remove(p);
  CHECK(r.samples.empty());
  CHECK(r.issues.size() == 5);
}

TEST_CASE("out-of-vocabulary categories map to the reserved index") {
  Rng rng(26);
  auto s = testing::random_sample(6, 4, rng, false);
  s.candidates.items[2].categorical[0] = 99;
  std::ostringstream line;
  data::write_sample(line, s);
  const auto p = temp_file("jdrec_oov.jsonl", line.str());
  const auto r = data::load_samples(p, testing::tiny_schema());
  REQUIRE(r.samples.size() == 1);
  CHECK(r.samples[0].candidates.items[2].categorical[0] == 0);
  CHECK(r.oov_mapped == 1);
  data::LoadOptions strict;
  strict.strict_vocab = true;
  CHECK_THROWS_AS(data::load_samples(p, testing::tiny_schema(), strict), DataError);
  fs::remove(p);
}

TEST_CASE("validators catch broken invariants") {
  Rng rng(27);
  const auto schema = testing::tiny_schema();
  auto s = testing::random_sample(6, 4, rng);
  data::validate_sample(s, schema, 4);
  auto dup = s;
  dup.selected.items[1] = dup.selected.items[0];
  CHECK_THROWS_AS(data::validate_sample(dup, schema, 4), DataError);
  auto short_list = s;
  short_list.selected.items.pop_back();
  CHECK_THROWS_AS(data::validate_sample(short_list, schema, 4), DataError);
  auto bad_rerank = s;
  bad_rerank.rerank_index[bad_rerank.selected.items[0]] = 3;
  bad_rerank.rerank_index[bad_rerank.selected.items[3]] = 0;
  CHECK_THROWS_AS(data::validate_sample(bad_rerank, schema, 4), DataError);
  auto dup_id = s;
  dup_id.candidates.items[1].id = dup_id.candidates.items[0].id;
  CHECK_THROWS_AS(data::validate_sample(dup_id, schema, 4), DataError);
}

TEST_CASE("policy matrix validation") {
  data::PolicyMatrix ok{nn::Matrix::from_rows({{0.9, 0.1, 0.0, 0.0, 0.0, 0.0},
                                               {0.05, 0.8, 0.15, 0.0, 0.0, 0.0},
                                               {0.05, 0.1, 0.7, 0.15, 0.0, 0.0},
                                               {0.0, 0.0, 0.15, 0.85, 0.0, 0.0},
                                               {0.0, 0.0, 0.0, 0.0, 1.0, 1.0}})};
  ok.validate();
  CHECK(ok.list_len() == 4);
  CHECK(ok.candidate_count() == 6);
  auto bad = ok;
  bad.entries(0, 0) = 0.95;
  CHECK_THROWS_AS(bad.validate(), DataError);
}

TEST_CASE("flat export converts to the sample log") {
  const auto schema = data::jdrec_schema();
  CHECK(schema.item_features.size() == 51);
  std::ostringstream flat;
  data::write_synthetic_jdrec_flat(flat, schema, 30, 40, 4, 7);
  std::istringstream in(flat.str());
  std::ostringstream jsonl;
  data::ConvertOptions opt;
  opt.pctr_feature = "pctr";
  const auto stats = data::convert_jdrec_flat(in, jsonl, schema, opt);
  CHECK(stats.samples == 30);
  CHECK(stats.rows == 1200);
  CHECK(stats.rejected == 0);

  const auto p = temp_file("jdrec_converted.jsonl", jsonl.str());
  const auto r = data::load_samples(p, schema);
  fs::remove(p);
  CHECK(r.issues.empty());
  REQUIRE(r.samples.size() == 30);
  for (const auto& s : r.samples) {
    CHECK(s.candidates.size() == 40);
    CHECK(s.selected.size() == 4);
  }
}

TEST_CASE("converter rejects a sample with the wrong number of selected rows") {
  const auto schema = data::jdrec_schema();
  std::ostringstream flat;
  data::write_synthetic_jdrec_flat(flat, schema, 2, 6, 4, 8);
  std::string text = flat.str();
  // Unselect the first selected row of the first sample.
  std::istringstream lines(text);
  std::string header, row, out;
  std::getline(lines, header);
  out = header + "\n";
  bool done = false;
  while (std::getline(lines, row)) {
    std::vector<std::string> cols;
    std::stringstream ss(row);
    std::string c;
    while (std::getline(ss, c, '\t')) cols.push_back(c);
    if (!done && cols[0] == cols.at(0) && cols[2] != "-1" && cols[2] != "") {
      cols[2] = "-1";
      done = true;
    }
    for (std::size_t i = 0; i < cols.size(); ++i) out += (i ? "\t" : "") + cols[i];
    out += "\n";
  }
  std::istringstream in(out);
  std::ostringstream jsonl;
  data::ConvertOptions opt;
  opt.pctr_feature = "pctr";
  CHECK_THROWS_AS(data::convert_jdrec_flat(in, jsonl, schema, opt), DataError);
  std::istringstream in2(out);
  std::ostringstream jsonl2;
  opt.skip_malformed = true;
  const auto stats = data::convert_jdrec_flat(in2, jsonl2, schema, opt);
  CHECK(stats.samples == 1);
  CHECK(stats.rejected == 1);
}
