#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "tagpred/corpus.hpp"
#include "tagpred/models.hpp"
#include "tagpred/taxonomy.hpp"

namespace tagpred {

struct TrainConfig {
  double learning_rate = 0.01;  // 0.005 is the default for word2vec+lstm
  std::size_t batch_size = 32;
  std::size_t max_epochs = 200;
  std::size_t patience = 10;
  double w1 = 0.82;  // weight on true-1 entries
  double w0 = 0.18;  // weight on true-0 entries
  std::uint64_t seed = 1;
};

struct SplitResult {
  Dataset train;
  Dataset test;
  double ratio = 0.9;
  std::vector<std::size_t> train_indices;  // positions in the input dataset
  std::vector<std::size_t> test_indices;
};

// Iterative stratification: the label with the fewest remaining examples is
// placed first, each example going to the side whose demand for that label is
// largest. Side sizes are capped so |train| = round(ratio * n) exactly.
SplitResult stratified_split(const Dataset& d, double ratio = 0.9, std::uint64_t seed = 1);

// -mean over entries of [w1 * y * ln p + w0 * (1-y) * ln(1-p)], with p clamped
// to [1e-12, 1 - 1e-12]. With w1 = w0 = 0.5 this is half the plain BCE.
double weighted_bce(std::span<const double> p, std::span<const std::uint8_t> y, double w1 = 0.82,
                    double w0 = 0.18);
double weighted_bce(const std::vector<Probabilities>& p, const std::vector<LabelVector>& y,
                    double w1 = 0.82, double w0 = 0.18);

struct PaddedBatch {
  std::vector<std::vector<std::vector<double>>> padded;  // all sequences at max length
  std::vector<std::size_t> lengths;
};

// Pads every sequence with zero vectors up to the longest one. At least one
// sequence must be non-empty.
PaddedBatch pad_batch(const std::vector<std::vector<std::vector<double>>>& seqs);

struct TrainHistory {
  std::vector<double> train_loss;
  std::vector<double> holdout_loss;
  std::vector<double> holdout_whs;
  std::size_t best_epoch = 0;

  std::size_t epochs() const { return train_loss.size(); }
  void save_csv(const std::filesystem::path& path) const;
  std::string to_csv() const;
};

// Fixed-dimension inputs for the FFNN.
struct VectorData {
  FeatureMatrix x;
  std::vector<LabelVector> labels;

  std::size_t size() const { return labels.size(); }
};

// Variable-length sequence inputs for the LSTM: dense rows (flattened
// length x input_dim), one-hot token indices, or token indices resolved
// against a shared embedding table.
struct SequenceData {
  std::size_t input_dim = 0;
  bool one_hot = false;
  const std::vector<double>* embedding = nullptr;  // V x input_dim row-major, not owned
  std::vector<std::vector<double>> dense;          // used when !one_hot && !embedding
  std::vector<std::vector<int>> indices;           // used when one_hot or embedding
  std::vector<LabelVector> labels;

  std::size_t size() const { return labels.size(); }
  std::size_t length(std::size_t i) const {
    return (one_hot || embedding) ? indices[i].size() : dense[i].size() / input_dim;
  }
  const double* x_at(std::size_t i, std::size_t t) const {
    if (embedding) return &(*embedding)[static_cast<std::size_t>(indices[i][t]) * input_dim];
    return &dense[i][t * input_dim];
  }
};

// Mean weighted-BCE loss over the batch plus its gradient w.r.t. every
// parameter (same layout as model.params()). Exposed for gradient checking.
double ffnn_loss_grad(const FfnnModel& m, const VectorData& data, std::span<const std::size_t> batch,
                      double w1, double w0, std::vector<double>& grad);
double lstm_loss_grad(const LstmModel& m, const SequenceData& data, std::span<const std::size_t> batch,
                      double w1, double w0, std::vector<double>& grad);

// Mini-batch Adam (beta1 = 0.9, beta2 = 0.999, eps = 1e-8) minimizing the
// weighted BCE, with early stopping on the holdout loss, restoring the
// parameters of the best holdout epoch. Deterministic given cfg.seed.
TrainHistory train_model(FfnnModel& m, const VectorData& train, const VectorData& holdout,
                         const TrainConfig& cfg);
TrainHistory train_model(LstmModel& m, const SequenceData& train, const SequenceData& holdout,
                         const TrainConfig& cfg);

std::vector<Probabilities> ffnn_predict_proba(const FfnnModel& m, const VectorData& data);
std::vector<Probabilities> lstm_predict_proba(const LstmModel& m, const SequenceData& data);

}  // namespace tagpred
