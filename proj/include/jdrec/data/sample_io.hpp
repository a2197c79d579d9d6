#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "jdrec/data/schema.hpp"
#include "jdrec/data/types.hpp"

namespace jdrec::data {

// Line-delimited JSON sample log. One request per line:
//
//   {"user": {"cat": [..], "num": [..]},
//    "candidates": [{"id": "..", "cat": [..], "num": [..], "pctr": 0.1,
//                    "click": 0, "rerank_index": -1, "exposure": 1}, ...]}
//
// rerank_index is the 0-based slate position, -1 for unselected candidates.
// "exposure" is optional and defaults to 1 for selected candidates, 0 otherwise.

struct LoadOptions {
  std::size_t list_len = 4;
  // Report malformed records and continue instead of throwing.
  bool skip_malformed = false;
  // Treat out-of-vocabulary categorical values as errors instead of mapping
  // them to the reserved index 0.
  bool strict_vocab = false;
};

struct LoadIssue {
  std::size_t line = 0;
  std::string message;
};

class SampleReader {
 public:
  SampleReader(const std::filesystem::path& path, FeatureSchema schema, LoadOptions options = {});

  // Next valid sample, or nullopt at end of file. Throws DataError on the
  // first malformed record unless skip_malformed is set.
  std::optional<LoggedSample> next();

  const std::vector<LoadIssue>& issues() const noexcept { return issues_; }
  std::size_t oov_mapped() const noexcept { return oov_mapped_; }

 private:
  LoggedSample parse(const std::string& line);

  std::ifstream in_;
  FeatureSchema schema_;
  LoadOptions options_;
  std::size_t line_no_ = 0;
  std::size_t oov_mapped_ = 0;
  std::vector<LoadIssue> issues_;
};

struct LoadResult {
  std::vector<LoggedSample> samples;
  std::vector<LoadIssue> issues;
  std::size_t oov_mapped = 0;
};

LoadResult load_samples(const std::filesystem::path& path, const FeatureSchema& schema,
                        LoadOptions options = {});

// Parse one record; used by the reader and by converters.
LoggedSample parse_sample(const std::string& line, const FeatureSchema& schema,
                          const LoadOptions& options, std::size_t* oov_mapped = nullptr);

void write_sample(std::ostream& out, const LoggedSample& sample);
void write_samples(const std::filesystem::path& path, std::span<const LoggedSample> samples);

}  // namespace jdrec::data
