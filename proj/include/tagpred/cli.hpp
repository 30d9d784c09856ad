#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tagpred/pipeline.hpp"

namespace tagpred {

// Everything a run can be configured with, from the config file and/or flags.
struct RunConfig {
  std::optional<Representation> representation;
  std::optional<ModelKind> model;
  std::optional<double> learning_rate;  // per-pairing default applied when unset
  TrainConfig train;
  Word2VecConfig word2vec;
  Doc2VecConfig doc2vec;
  ForestConfig forest;
  std::size_t doc2vec_infer_steps = 50;
  double ratio = 0.9;
  HoldoutMode holdout = HoldoutMode::carved;
  std::size_t min_word_occurrences = 10;
  std::optional<std::string> stopwords_path;
  std::optional<std::string> dataset_path;
  std::optional<std::string> taxonomy_path;
  std::optional<std::string> model_path;
  std::optional<std::string> report_path;

  PipelineConfig pipeline_config() const;  // with the learning rate resolved
};

// Flat key=value file; '#' starts a comment. Unknown keys or bad values raise
// UsageError naming the key.
RunConfig load_config(const std::filesystem::path& path);
void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value);

namespace cli {

// Exit codes: 0 success, 1 usage error, 2 data error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cli

}  // namespace tagpred
