#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <variant>
#include <vector>

#include "tagpred/taxonomy.hpp"

namespace tagpred {

// Dense row-major feature matrix (documents x features).
struct FeatureMatrix {
  std::size_t cols = 0;
  std::vector<double> data;

  std::size_t rows() const { return cols == 0 ? 0 : data.size() / cols; }
  std::span<const double> row(std::size_t i) const { return {&data[i * cols], cols}; }
  void push_row(std::span<const double> r);
  void push_row(std::initializer_list<double> r) { push_row(std::span<const double>(r.begin(), r.size())); }
};

using Probabilities = std::array<double, kNumLabels>;

LabelVector threshold_probabilities(const Probabilities& p, double threshold = 0.5);

// ---------------------------------------------------------------------------
// Random baseline: every entry is an independent fair coin flip.

struct RandomBaseline {
  std::size_t n_labels = kNumLabels;
  std::uint64_t seed = 0;
};

std::vector<LabelVector> random_predict(const RandomBaseline& m, std::size_t n_samples);

// ---------------------------------------------------------------------------
// Multi-output CART. Split impurity is the mean over the 9 labels of the
// binary Gini index; ties break toward the lowest feature index, then the
// lowest threshold.

struct TreeConfig {
  std::size_t min_split = 2;
  std::size_t max_features = 0;  // 0 = all features, scanned in index order
  std::uint64_t seed = 0;
};

struct TreeNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::array<double, kNumLabels> fractions{};  // leaf per-label positive fractions

  bool is_leaf() const { return feature < 0; }
};

struct TreeModel {
  std::vector<TreeNode> nodes;  // nodes[0] is the root, stored in preorder

  const std::array<double, kNumLabels>& leaf_fractions(std::span<const double> x) const;
};

TreeModel train_tree(const FeatureMatrix& X, const std::vector<LabelVector>& Y,
                     const TreeConfig& cfg = {});
LabelVector tree_predict(const TreeModel& t, std::span<const double> x, double threshold = 0.5);

// ---------------------------------------------------------------------------
// Random forest: bootstrap-resampled trees with per-split feature subsets;
// prediction thresholds the mean of the per-tree leaf fractions.

struct ForestConfig {
  std::size_t n_trees = 500;
  bool bootstrap = true;
  std::size_t max_features = 0;  // 0 = floor(sqrt(F))
  std::size_t min_split = 2;
  std::uint64_t seed = 0;
  unsigned n_threads = 0;  // 0 = hardware concurrency; result independent of the value
};

struct ForestModel {
  std::vector<TreeModel> trees;
};

ForestModel train_forest(const FeatureMatrix& X, const std::vector<LabelVector>& Y,
                         const ForestConfig& cfg = {});
std::array<double, kNumLabels> forest_fractions(const ForestModel& f, std::span<const double> x);
LabelVector forest_predict(const ForestModel& f, std::span<const double> x, double threshold = 0.5);

// ---------------------------------------------------------------------------
// Feed-forward network: input -> hidden ReLU -> 9 sigmoid outputs.
// Parameters live in one flat vector (W1 row-major hidden x input, b1,
// W2 row-major 9 x hidden, b2) so the optimizer and serializers can treat
// every model uniformly.

class FfnnModel {
 public:
  FfnnModel() = default;
  FfnnModel(std::size_t input_dim, std::size_t hidden_dim);
  static FfnnModel init(std::size_t input_dim, std::size_t hidden_dim, std::uint64_t seed);

  std::size_t input_dim() const { return input_dim_; }
  std::size_t hidden_dim() const { return hidden_dim_; }
  std::vector<double>& params() { return theta_; }
  const std::vector<double>& params() const { return theta_; }

  std::span<double> w1() { return {theta_.data(), hidden_dim_ * input_dim_}; }
  std::span<double> b1() { return {theta_.data() + hidden_dim_ * input_dim_, hidden_dim_}; }
  std::span<double> w2() { return {theta_.data() + hidden_dim_ * (input_dim_ + 1), kNumLabels * hidden_dim_}; }
  std::span<double> b2() { return {theta_.data() + hidden_dim_ * (input_dim_ + 1) + kNumLabels * hidden_dim_, kNumLabels}; }
  std::span<const double> w1() const { return {theta_.data(), hidden_dim_ * input_dim_}; }
  std::span<const double> b1() const { return {theta_.data() + hidden_dim_ * input_dim_, hidden_dim_}; }
  std::span<const double> w2() const { return {theta_.data() + hidden_dim_ * (input_dim_ + 1), kNumLabels * hidden_dim_}; }
  std::span<const double> b2() const { return {theta_.data() + hidden_dim_ * (input_dim_ + 1) + kNumLabels * hidden_dim_, kNumLabels}; }

 private:
  std::size_t input_dim_ = 0;
  std::size_t hidden_dim_ = 0;
  std::vector<double> theta_;
};

// Hidden activations plus output probabilities of one forward pass.
struct FfnnActivations {
  std::vector<double> hidden;
  Probabilities probs;
};

FfnnActivations ffnn_forward_full(const FfnnModel& m, std::span<const double> x);
Probabilities ffnn_forward(const FfnnModel& m, std::span<const double> x);

// ---------------------------------------------------------------------------
// LSTM with 16 hidden units and a sigmoid output layer. Standard cell with
// sigmoid gates, tanh candidate and tanh on the cell output; each gate block
// carries two bias vectors (input-side and recurrent-side), which is what
// makes the parameter count come out right.
//
// Flat layout: W (4H x I), U (4H x H), b_in (4H), b_rec (4H),
// Wout (9 x H), bout (9). Gate block order within 4H: input, forget,
// candidate, output.

class LstmModel {
 public:
  LstmModel() = default;
  LstmModel(std::size_t input_dim, std::size_t hidden_dim);
  static LstmModel init(std::size_t input_dim, std::size_t hidden_dim, std::uint64_t seed);

  std::size_t input_dim() const { return input_dim_; }
  std::size_t hidden_dim() const { return hidden_dim_; }
  std::vector<double>& params() { return theta_; }
  const std::vector<double>& params() const { return theta_; }

  std::size_t w_off() const { return 0; }
  std::size_t u_off() const { return 4 * hidden_dim_ * input_dim_; }
  std::size_t b_in_off() const { return u_off() + 4 * hidden_dim_ * hidden_dim_; }
  std::size_t b_rec_off() const { return b_in_off() + 4 * hidden_dim_; }
  std::size_t wout_off() const { return b_rec_off() + 4 * hidden_dim_; }
  std::size_t bout_off() const { return wout_off() + kNumLabels * hidden_dim_; }

 private:
  std::size_t input_dim_ = 0;
  std::size_t hidden_dim_ = 0;
  std::vector<double> theta_;
};

// Per-step gate activations; kept by the training loop for backpropagation.
struct LstmStep {
  std::vector<double> i, f, g, o, c, h;
};

// One cell step. Exactly one of x_dense (I values) / x_index (one-hot column)
// is used; pass x_index = -1 for dense input.
LstmStep lstm_step(const LstmModel& m, const double* x_dense, int x_index,
                   const std::vector<double>& h_prev, const std::vector<double>& c_prev);

Probabilities lstm_output(const LstmModel& m, const std::vector<double>& h);

// Hidden state is read at step `length`; trailing padding beyond it never
// affects the output. length = 0 is an error.
Probabilities lstm_forward(const LstmModel& m, const std::vector<std::vector<double>>& seq,
                           std::size_t length);
Probabilities lstm_forward(const LstmModel& m, std::span<const double> seq_flat, std::size_t length);
Probabilities lstm_forward_onehot(const LstmModel& m, std::span<const int> indices, std::size_t length);

// ---------------------------------------------------------------------------

std::size_t count_params(const FfnnModel& m);
std::size_t count_params(const LstmModel& m);
std::size_t ffnn_param_count(std::size_t input_dim, std::size_t hidden_dim);
std::size_t lstm_param_count(std::size_t input_dim, std::size_t hidden_dim);

// Versioned "TGMD" container: magic, version, model-kind byte, dims, then
// little-endian 64-bit parameters (trees as preorder node lists).

enum class ModelKind : std::uint8_t { random = 0, tree = 1, forest = 2, ffnn = 3, lstm = 4 };

std::string to_string(ModelKind k);
ModelKind model_kind_from_string(const std::string& s);

using AnyModel = std::variant<RandomBaseline, TreeModel, ForestModel, FfnnModel, LstmModel>;

ModelKind kind_of(const AnyModel& m);
void write_model(std::ostream& os, const AnyModel& m);
AnyModel read_model(std::istream& is);

}  // namespace tagpred
