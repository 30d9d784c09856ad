#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tagpred/corpus.hpp"
#include "tagpred/metrics.hpp"
#include "tagpred/models.hpp"
#include "tagpred/preprocess.hpp"
#include "tagpred/represent.hpp"
#include "tagpred/taxonomy.hpp"
#include "tagpred/training.hpp"

namespace tagpred {

enum class Representation { tfidf, onehot, word2vec, doc2vec };

std::string to_string(Representation r);
Representation representation_from_string(const std::string& s);

// The supported pairings: tfidf with tree/forest, onehot/word2vec with lstm,
// doc2vec with ffnn; the random baseline takes no representation.
// Throws UsageError otherwise.
void validate_pairing(const std::optional<Representation>& rep, ModelKind model);

// Gradient models stop early on either the test set itself or a validation
// fold carved from the training data.
enum class HoldoutMode { test, carved };

std::string to_string(HoldoutMode m);
HoldoutMode holdout_from_string(const std::string& s);

inline constexpr std::size_t kHiddenUnits = 16;

struct PipelineConfig {
  std::optional<Representation> representation;
  ModelKind model = ModelKind::random;
  TrainConfig train;
  Word2VecConfig word2vec;
  Doc2VecConfig doc2vec;
  ForestConfig forest;
  TreeConfig tree;
  std::size_t doc2vec_infer_steps = 50;
};

// A fitted representation plus a trained model plus the taxonomy used for
// label encoding: everything needed to tag raw text.
class Pipeline {
 public:
  // `holdout` drives early stopping for gradient models and may be null for
  // tree/forest/random. The taxonomy supplies the label order.
  static Pipeline fit(const Dataset& train, const Dataset* holdout, const TaxonomyMap& taxonomy,
                      const PipelineConfig& cfg, TrainHistory* history = nullptr);

  std::vector<LabelVector> predict(const Dataset& d) const;
  // Full cleaning pipeline applied first, matching training-time preprocessing.
  std::vector<std::string> predict_tags(const std::string& raw_text) const;

  MetricsReport evaluate(const Dataset& test) const;

  void save(const std::filesystem::path& path) const;
  static Pipeline load(const std::filesystem::path& path);

  ModelKind model_kind() const { return kind_of(model_); }
  const std::optional<Representation>& representation() const { return rep_; }
  const TaxonomyMap& taxonomy() const { return taxonomy_; }
  const Vocabulary& vocabulary() const { return vocab_; }

 private:
  Pipeline() = default;

  std::vector<Probabilities> predict_proba(const Dataset& d) const;
  VectorData make_vector_data(const Dataset& d, bool training_set) const;
  SequenceData make_sequence_data(const Dataset& d) const;

  std::optional<Representation> rep_;
  TaxonomyMap taxonomy_ = TaxonomyMap::builtin();
  Vocabulary vocab_;
  TfidfModel tfidf_;
  EmbeddingMatrix embeddings_;
  Doc2VecModel doc2vec_;
  AnyModel model_ = RandomBaseline{};
  std::size_t d2v_infer_steps_ = 50;
  std::uint64_t seed_ = 1;
};

// Operation-style alias for Pipeline::evaluate.
MetricsReport evaluate(const Pipeline& p, const Dataset& test);

// The six pairings of the results table, in row order.
struct BenchmarkRow {
  std::string name;
  MetricsReport report;
};

std::vector<std::pair<std::optional<Representation>, ModelKind>> benchmark_pairings();

// Splits `mapped` once, trains all six pairings, evaluates each on the test
// side. Deterministic given the seeds in `base`.
std::vector<BenchmarkRow> run_benchmark(const Dataset& mapped, const TaxonomyMap& taxonomy,
                                        const PipelineConfig& base, double ratio, HoldoutMode holdout,
                                        std::optional<double> explicit_lr = std::nullopt);

std::string render_benchmark_table(const std::vector<BenchmarkRow>& rows);
std::string benchmark_report_json(const std::vector<BenchmarkRow>& rows);

// The per-pairing default: 0.005 for word2vec+lstm, 0.01 otherwise.
double default_learning_rate(const std::optional<Representation>& rep);

}  // namespace tagpred
