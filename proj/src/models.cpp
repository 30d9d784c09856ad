#include "tagpred/models.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "tagpred/binio.hpp"
#include "tagpred/errors.hpp"
#include "tagpred/rng.hpp"

namespace tagpred {

namespace {

constexpr char kModelMagic[4] = {'T', 'G', 'M', 'D'};
constexpr std::uint32_t kModelVersion = 1;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

void FeatureMatrix::push_row(std::span<const double> r) {
  if (cols == 0) cols = r.size();
  if (r.size() != cols) throw std::invalid_argument("FeatureMatrix: ragged row");
  data.insert(data.end(), r.begin(), r.end());
}

LabelVector threshold_probabilities(const Probabilities& p, double threshold) {
  LabelVector v;
  for (std::size_t j = 0; j < kNumLabels; ++j) v.bits[j] = p[j] >= threshold ? 1 : 0;
  return v;
}

std::vector<LabelVector> random_predict(const RandomBaseline& m, std::size_t n_samples) {
  Rng rng(m.seed);
  std::vector<LabelVector> out(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i)
    for (std::size_t j = 0; j < m.n_labels && j < kNumLabels; ++j)
      out[i].bits[j] = rng.bernoulli(0.5) ? 1 : 0;
  return out;
}

// ---------------------------------------------------------------------------
// CART

namespace {

struct LabelCounts {
  std::array<std::size_t, kNumLabels> pos{};
  std::size_t n = 0;

  void add(const LabelVector& y) {
    for (std::size_t j = 0; j < kNumLabels; ++j) pos[j] += y.bits[j];
    ++n;
  }
  void remove(const LabelVector& y) {
    for (std::size_t j = 0; j < kNumLabels; ++j) pos[j] -= y.bits[j];
    --n;
  }

  // Mean over labels of the binary Gini index 2p(1-p).
  double impurity() const {
    if (n == 0) return 0.0;
    const double dn = static_cast<double>(n);
    double total = 0.0;
    for (std::size_t j = 0; j < kNumLabels; ++j) {
      const double p = static_cast<double>(pos[j]) / dn;
      total += 2.0 * p * (1.0 - p);
    }
    return total / static_cast<double>(kNumLabels);
  }

  bool pure() const {
    for (std::size_t j = 0; j < kNumLabels; ++j)
      if (pos[j] != 0 && pos[j] != n) return false;
    return true;
  }
};

struct BestSplit {
  bool found = false;
  std::size_t feature = 0;
  double threshold = 0.0;
  double score = 0.0;  // nL*giniL + nR*giniR, lower is better
};

class TreeBuilder {
 public:
  TreeBuilder(const FeatureMatrix& X, const std::vector<LabelVector>& Y, const TreeConfig& cfg)
      : X_(X), Y_(Y), cfg_(cfg), rng_(cfg.seed) {}

  TreeModel build(std::vector<std::size_t> idx) {
    TreeModel t;
    build_node(t.nodes, std::move(idx));
    return t;
  }

 private:
  std::int32_t build_node(std::vector<TreeNode>& nodes, std::vector<std::size_t> idx) {
    LabelCounts counts;
    for (std::size_t i : idx) counts.add(Y_[i]);

    const std::int32_t id = static_cast<std::int32_t>(nodes.size());
    nodes.emplace_back();

    BestSplit best;
    if (idx.size() >= cfg_.min_split && !counts.pure()) best = find_split(idx, counts);

    if (!best.found) {
      TreeNode& leaf = nodes[id];
      const double dn = static_cast<double>(counts.n);
      for (std::size_t j = 0; j < kNumLabels; ++j)
        leaf.fractions[j] = dn > 0 ? static_cast<double>(counts.pos[j]) / dn : 0.0;
      return id;
    }

    std::vector<std::size_t> left, right;
    left.reserve(idx.size());
    right.reserve(idx.size());
    for (std::size_t i : idx)
      (X_.row(i)[best.feature] <= best.threshold ? left : right).push_back(i);
    idx.clear();
    idx.shrink_to_fit();

    nodes[id].feature = static_cast<std::int32_t>(best.feature);
    nodes[id].threshold = best.threshold;
    const std::int32_t l = build_node(nodes, std::move(left));
    nodes[id].left = l;
    const std::int32_t r = build_node(nodes, std::move(right));
    nodes[id].right = r;
    return id;
  }

  BestSplit find_split(const std::vector<std::size_t>& idx, const LabelCounts& total) {
    const std::size_t F = X_.cols;
    std::vector<std::size_t> order(F);
    std::iota(order.begin(), order.end(), 0);
    const bool subset = cfg_.max_features > 0 && cfg_.max_features < F;
    if (subset) rng_.shuffle(order);

    BestSplit best;
    std::size_t informative_seen = 0;
    for (std::size_t f : order) {
      // Once max_features informative features have been inspected, keep
      // drawing only while no valid split has been found.
      if (subset && informative_seen >= cfg_.max_features && best.found) break;
      if (scan_feature(f, idx, total, best)) ++informative_seen;
    }
    return best;
  }

  // Returns true when the feature varies within the node.
  bool scan_feature(std::size_t f, const std::vector<std::size_t>& idx, const LabelCounts& total,
                    BestSplit& best) {
    sorted_.assign(idx.begin(), idx.end());
    std::sort(sorted_.begin(), sorted_.end(), [&](std::size_t a, std::size_t b) {
      const double va = X_.row(a)[f], vb = X_.row(b)[f];
      return va < vb || (va == vb && a < b);
    });
    if (X_.row(sorted_.front())[f] == X_.row(sorted_.back())[f]) return false;

    LabelCounts left;
    LabelCounts right = total;
    for (std::size_t k = 0; k + 1 < sorted_.size(); ++k) {
      left.add(Y_[sorted_[k]]);
      right.remove(Y_[sorted_[k]]);
      const double v = X_.row(sorted_[k])[f];
      const double v_next = X_.row(sorted_[k + 1])[f];
      if (v == v_next) continue;
      const double score = static_cast<double>(left.n) * left.impurity() +
                           static_cast<double>(right.n) * right.impurity();
      if (!best.found || score < best.score) {
        best.found = true;
        best.feature = f;
        best.threshold = v + (v_next - v) / 2.0;
        best.score = score;
      }
    }
    return true;
  }

  const FeatureMatrix& X_;
  const std::vector<LabelVector>& Y_;
  TreeConfig cfg_;
  Rng rng_;
  std::vector<std::size_t> sorted_;
};

}  // namespace

const std::array<double, kNumLabels>& TreeModel::leaf_fractions(std::span<const double> x) const {
  const TreeNode* node = &nodes.at(0);
  while (!node->is_leaf()) {
    if (static_cast<std::size_t>(node->feature) >= x.size())
      throw std::invalid_argument("tree_predict: feature dimension mismatch");
    node = &nodes[x[static_cast<std::size_t>(node->feature)] <= node->threshold
                      ? static_cast<std::size_t>(node->left)
                      : static_cast<std::size_t>(node->right)];
  }
  return node->fractions;
}

TreeModel train_tree(const FeatureMatrix& X, const std::vector<LabelVector>& Y,
                     const TreeConfig& cfg) {
  if (X.rows() == 0) throw std::invalid_argument("train_tree: empty training set");
  if (X.rows() != Y.size()) throw std::invalid_argument("train_tree: X/Y row mismatch");
  std::vector<std::size_t> idx(X.rows());
  std::iota(idx.begin(), idx.end(), 0);
  return TreeBuilder(X, Y, cfg).build(std::move(idx));
}

LabelVector tree_predict(const TreeModel& t, std::span<const double> x, double threshold) {
  const auto& fr = t.leaf_fractions(x);
  LabelVector v;
  for (std::size_t j = 0; j < kNumLabels; ++j) v.bits[j] = fr[j] >= threshold ? 1 : 0;
  return v;
}

ForestModel train_forest(const FeatureMatrix& X, const std::vector<LabelVector>& Y,
                         const ForestConfig& cfg) {
  if (X.rows() == 0) throw std::invalid_argument("train_forest: empty training set");
  if (X.rows() != Y.size()) throw std::invalid_argument("train_forest: X/Y row mismatch");
  if (cfg.n_trees < 1) throw std::invalid_argument("train_forest: need at least one tree");

  const std::size_t F = X.cols;
  std::size_t max_features = cfg.max_features;
  if (max_features == 0)
    max_features = std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(F))));

  // Per-tree seeds are drawn up front so the result does not depend on the
  // number of worker threads.
  Rng master(cfg.seed);
  std::vector<std::uint64_t> seeds(cfg.n_trees);
  for (auto& s : seeds) s = master.next_u64();

  ForestModel forest;
  forest.trees.resize(cfg.n_trees);
  const std::size_t n = X.rows();

  auto train_one = [&](std::size_t t) {
    Rng rng(seeds[t]);
    std::vector<std::size_t> idx(n);
    if (cfg.bootstrap) {
      for (std::size_t i = 0; i < n; ++i) idx[i] = rng.uniform_index(n);
    } else {
      std::iota(idx.begin(), idx.end(), 0);
    }
    TreeConfig tree_cfg;
    tree_cfg.min_split = cfg.min_split;
    tree_cfg.max_features = max_features >= F ? 0 : max_features;
    tree_cfg.seed = rng.next_u64();
    forest.trees[t] = TreeBuilder(X, Y, tree_cfg).build(std::move(idx));
  };

  unsigned n_threads = cfg.n_threads > 0 ? cfg.n_threads : std::thread::hardware_concurrency();
  if (n_threads <= 1 || cfg.n_trees == 1) {
    for (std::size_t t = 0; t < cfg.n_trees; ++t) train_one(t);
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t t = next.fetch_add(1); t < cfg.n_trees; t = next.fetch_add(1)) train_one(t);
    };
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < n_threads; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return forest;
}

std::array<double, kNumLabels> forest_fractions(const ForestModel& f, std::span<const double> x) {
  std::array<double, kNumLabels> mean{};
  for (const TreeModel& t : f.trees) {
    const auto& fr = t.leaf_fractions(x);
    for (std::size_t j = 0; j < kNumLabels; ++j) mean[j] += fr[j];
  }
  for (double& v : mean) v /= static_cast<double>(f.trees.size());
  return mean;
}

LabelVector forest_predict(const ForestModel& f, std::span<const double> x, double threshold) {
  const auto fr = forest_fractions(f, x);
  LabelVector v;
  for (std::size_t j = 0; j < kNumLabels; ++j) v.bits[j] = fr[j] >= threshold ? 1 : 0;
  return v;
}

// ---------------------------------------------------------------------------
// FFNN

FfnnModel::FfnnModel(std::size_t input_dim, std::size_t hidden_dim)
    : input_dim_(input_dim),
      hidden_dim_(hidden_dim),
      theta_(ffnn_param_count(input_dim, hidden_dim), 0.0) {}

FfnnModel FfnnModel::init(std::size_t input_dim, std::size_t hidden_dim, std::uint64_t seed) {
  FfnnModel m(input_dim, hidden_dim);
  Rng rng(seed);
  const double r1 = 1.0 / std::sqrt(static_cast<double>(input_dim));
  const double r2 = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
  for (double& w : m.w1()) w = rng.uniform(-r1, r1);
  for (double& w : m.w2()) w = rng.uniform(-r2, r2);
  return m;
}

FfnnActivations ffnn_forward_full(const FfnnModel& m, std::span<const double> x) {
  if (x.size() != m.input_dim()) throw std::invalid_argument("ffnn_forward: input dimension mismatch");
  const std::size_t I = m.input_dim(), H = m.hidden_dim();
  FfnnActivations act;
  act.hidden.assign(H, 0.0);
  auto w1 = m.w1();
  auto b1 = m.b1();
  for (std::size_t h = 0; h < H; ++h) {
    double z = b1[h];
    const double* row = &w1[h * I];
    for (std::size_t i = 0; i < I; ++i) z += row[i] * x[i];
    act.hidden[h] = z > 0.0 ? z : 0.0;
  }
  auto w2 = m.w2();
  auto b2 = m.b2();
  for (std::size_t j = 0; j < kNumLabels; ++j) {
    double z = b2[j];
    const double* row = &w2[j * H];
    for (std::size_t h = 0; h < H; ++h) z += row[h] * act.hidden[h];
    act.probs[j] = sigmoid(z);
  }
  return act;
}

Probabilities ffnn_forward(const FfnnModel& m, std::span<const double> x) {
  return ffnn_forward_full(m, x).probs;
}

// ---------------------------------------------------------------------------
// LSTM

LstmModel::LstmModel(std::size_t input_dim, std::size_t hidden_dim)
    : input_dim_(input_dim),
      hidden_dim_(hidden_dim),
      theta_(lstm_param_count(input_dim, hidden_dim), 0.0) {}

LstmModel LstmModel::init(std::size_t input_dim, std::size_t hidden_dim, std::uint64_t seed) {
  LstmModel m(input_dim, hidden_dim);
  Rng rng(seed);
  const std::size_t H = hidden_dim;
  const double rw = 1.0 / std::sqrt(static_cast<double>(input_dim));
  const double ru = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
  auto& theta = m.params();
  for (std::size_t k = 0; k < 4 * H * input_dim; ++k) theta[m.w_off() + k] = rng.uniform(-rw, rw);
  for (std::size_t k = 0; k < 4 * H * H; ++k) theta[m.u_off() + k] = rng.uniform(-ru, ru);
  // Forget gate bias starts at +1 (gate block order: i, f, g, o).
  for (std::size_t k = 0; k < H; ++k) theta[m.b_in_off() + H + k] = 1.0;
  for (std::size_t k = 0; k < kNumLabels * H; ++k) theta[m.wout_off() + k] = rng.uniform(-ru, ru);
  return m;
}

LstmStep lstm_step(const LstmModel& m, const double* x_dense, int x_index,
                   const std::vector<double>& h_prev, const std::vector<double>& c_prev) {
  const std::size_t I = m.input_dim(), H = m.hidden_dim();
  const auto& theta = m.params();
  const double* W = &theta[m.w_off()];
  const double* U = &theta[m.u_off()];
  const double* b_in = &theta[m.b_in_off()];
  const double* b_rec = &theta[m.b_rec_off()];

  std::vector<double> pre(4 * H);
  for (std::size_t r = 0; r < 4 * H; ++r) {
    double z = b_in[r] + b_rec[r];
    if (x_index >= 0) {
      z += W[r * I + static_cast<std::size_t>(x_index)];
    } else {
      const double* row = &W[r * I];
      for (std::size_t i = 0; i < I; ++i) z += row[i] * x_dense[i];
    }
    const double* urow = &U[r * H];
    for (std::size_t h = 0; h < H; ++h) z += urow[h] * h_prev[h];
    pre[r] = z;
  }

  LstmStep s;
  s.i.resize(H);
  s.f.resize(H);
  s.g.resize(H);
  s.o.resize(H);
  s.c.resize(H);
  s.h.resize(H);
  for (std::size_t h = 0; h < H; ++h) {
    s.i[h] = sigmoid(pre[h]);
    s.f[h] = sigmoid(pre[H + h]);
    s.g[h] = std::tanh(pre[2 * H + h]);
    s.o[h] = sigmoid(pre[3 * H + h]);
    s.c[h] = s.f[h] * c_prev[h] + s.i[h] * s.g[h];
    s.h[h] = s.o[h] * std::tanh(s.c[h]);
  }
  return s;
}

Probabilities lstm_output(const LstmModel& m, const std::vector<double>& h) {
  const std::size_t H = m.hidden_dim();
  const auto& theta = m.params();
  const double* Wout = &theta[m.wout_off()];
  const double* bout = &theta[m.bout_off()];
  Probabilities p;
  for (std::size_t j = 0; j < kNumLabels; ++j) {
    double z = bout[j];
    const double* row = &Wout[j * H];
    for (std::size_t k = 0; k < H; ++k) z += row[k] * h[k];
    p[j] = sigmoid(z);
  }
  return p;
}

Probabilities lstm_forward(const LstmModel& m, std::span<const double> seq_flat, std::size_t length) {
  if (length == 0) throw std::invalid_argument("lstm_forward: length must be >= 1");
  const std::size_t I = m.input_dim(), H = m.hidden_dim();
  if (seq_flat.size() < length * I)
    throw std::invalid_argument("lstm_forward: sequence shorter than length");
  std::vector<double> h(H, 0.0), c(H, 0.0);
  for (std::size_t t = 0; t < length; ++t) {
    LstmStep s = lstm_step(m, &seq_flat[t * I], -1, h, c);
    h = std::move(s.h);
    c = std::move(s.c);
  }
  return lstm_output(m, h);
}

Probabilities lstm_forward(const LstmModel& m, const std::vector<std::vector<double>>& seq,
                           std::size_t length) {
  if (length == 0) throw std::invalid_argument("lstm_forward: length must be >= 1");
  if (seq.size() < length) throw std::invalid_argument("lstm_forward: sequence shorter than length");
  const std::size_t H = m.hidden_dim();
  std::vector<double> h(H, 0.0), c(H, 0.0);
  for (std::size_t t = 0; t < length; ++t) {
    if (seq[t].size() != m.input_dim())
      throw std::invalid_argument("lstm_forward: input dimension mismatch");
    LstmStep s = lstm_step(m, seq[t].data(), -1, h, c);
    h = std::move(s.h);
    c = std::move(s.c);
  }
  return lstm_output(m, h);
}

Probabilities lstm_forward_onehot(const LstmModel& m, std::span<const int> indices,
                                  std::size_t length) {
  if (length == 0) throw std::invalid_argument("lstm_forward: length must be >= 1");
  if (indices.size() < length) throw std::invalid_argument("lstm_forward: sequence shorter than length");
  const std::size_t H = m.hidden_dim();
  std::vector<double> h(H, 0.0), c(H, 0.0);
  for (std::size_t t = 0; t < length; ++t) {
    LstmStep s = lstm_step(m, nullptr, indices[t], h, c);
    h = std::move(s.h);
    c = std::move(s.c);
  }
  return lstm_output(m, h);
}

// ---------------------------------------------------------------------------

std::size_t ffnn_param_count(std::size_t input_dim, std::size_t hidden_dim) {
  return input_dim * hidden_dim + hidden_dim + hidden_dim * kNumLabels + kNumLabels;
}

std::size_t lstm_param_count(std::size_t input_dim, std::size_t hidden_dim) {
  return 4 * ((input_dim + hidden_dim) * hidden_dim + 2 * hidden_dim) +
         (hidden_dim * kNumLabels + kNumLabels);
}

std::size_t count_params(const FfnnModel& m) { return m.params().size(); }
std::size_t count_params(const LstmModel& m) { return m.params().size(); }

// ---------------------------------------------------------------------------
// Serialization

std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::random: return "random";
    case ModelKind::tree: return "tree";
    case ModelKind::forest: return "forest";
    case ModelKind::ffnn: return "ffnn";
    case ModelKind::lstm: return "lstm";
  }
  return "random";
}

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "random") return ModelKind::random;
  if (s == "tree") return ModelKind::tree;
  if (s == "forest") return ModelKind::forest;
  if (s == "ffnn") return ModelKind::ffnn;
  if (s == "lstm") return ModelKind::lstm;
  throw UsageError("unknown model '" + s + "' (expected random, tree, forest, ffnn or lstm)");
}

ModelKind kind_of(const AnyModel& m) {
  return static_cast<ModelKind>(m.index());
}

namespace {

void write_tree_node(std::ostream& os, const TreeModel& t, std::int32_t id) {
  const TreeNode& n = t.nodes[static_cast<std::size_t>(id)];
  binio::write_u8(os, n.is_leaf() ? 1 : 0);
  if (n.is_leaf()) {
    for (double f : n.fractions) binio::write_f64(os, f);
  } else {
    binio::write_u32(os, static_cast<std::uint32_t>(n.feature));
    binio::write_f64(os, n.threshold);
    write_tree_node(os, t, n.left);
    write_tree_node(os, t, n.right);
  }
}

std::int32_t read_tree_node(std::istream& is, TreeModel& t) {
  const std::int32_t id = static_cast<std::int32_t>(t.nodes.size());
  t.nodes.emplace_back();
  if (binio::read_u8(is) == 1) {
    for (double& f : t.nodes[static_cast<std::size_t>(id)].fractions) f = binio::read_f64(is);
  } else {
    const std::uint32_t feature = binio::read_u32(is);
    const double threshold = binio::read_f64(is);
    const std::int32_t l = read_tree_node(is, t);
    const std::int32_t r = read_tree_node(is, t);
    TreeNode& n = t.nodes[static_cast<std::size_t>(id)];
    n.feature = static_cast<std::int32_t>(feature);
    n.threshold = threshold;
    n.left = l;
    n.right = r;
  }
  return id;
}

void write_payload(std::ostream& os, const RandomBaseline& m) {
  binio::write_u32(os, static_cast<std::uint32_t>(m.n_labels));
  binio::write_u32(os, static_cast<std::uint32_t>(m.seed >> 32));
  binio::write_u32(os, static_cast<std::uint32_t>(m.seed & 0xffffffffu));
}

void write_payload(std::ostream& os, const TreeModel& m) { write_tree_node(os, m, 0); }

void write_payload(std::ostream& os, const ForestModel& m) {
  binio::write_u32(os, static_cast<std::uint32_t>(m.trees.size()));
  for (const TreeModel& t : m.trees) write_tree_node(os, t, 0);
}

void write_payload(std::ostream& os, const FfnnModel& m) {
  binio::write_u32(os, static_cast<std::uint32_t>(m.input_dim()));
  binio::write_u32(os, static_cast<std::uint32_t>(m.hidden_dim()));
  binio::write_f64s(os, m.params());
}

void write_payload(std::ostream& os, const LstmModel& m) {
  binio::write_u32(os, static_cast<std::uint32_t>(m.input_dim()));
  binio::write_u32(os, static_cast<std::uint32_t>(m.hidden_dim()));
  binio::write_f64s(os, m.params());
}

}  // namespace

void write_model(std::ostream& os, const AnyModel& m) {
  binio::write_magic(os, kModelMagic);
  binio::write_u32(os, kModelVersion);
  binio::write_u8(os, static_cast<std::uint8_t>(kind_of(m)));
  std::visit([&](const auto& model) { write_payload(os, model); }, m);
}

AnyModel read_model(std::istream& is) {
  binio::expect_magic(is, kModelMagic, "TGMD model");
  const std::uint32_t version = binio::read_u32(is);
  if (version != kModelVersion)
    throw DataError("unsupported TGMD version " + std::to_string(version));
  const auto kind = static_cast<ModelKind>(binio::read_u8(is));
  switch (kind) {
    case ModelKind::random: {
      RandomBaseline m;
      m.n_labels = binio::read_u32(is);
      const std::uint64_t hi = binio::read_u32(is);
      const std::uint64_t lo = binio::read_u32(is);
      m.seed = (hi << 32) | lo;
      return m;
    }
    case ModelKind::tree: {
      TreeModel t;
      read_tree_node(is, t);
      return t;
    }
    case ModelKind::forest: {
      ForestModel f;
      const std::uint32_t n = binio::read_u32(is);
      f.trees.resize(n);
      for (std::uint32_t i = 0; i < n; ++i) read_tree_node(is, f.trees[i]);
      return f;
    }
    case ModelKind::ffnn: {
      const std::uint32_t input = binio::read_u32(is);
      const std::uint32_t hidden = binio::read_u32(is);
      FfnnModel m(input, hidden);
      m.params() = binio::read_f64s(is, ffnn_param_count(input, hidden));
      return m;
    }
    case ModelKind::lstm: {
      const std::uint32_t input = binio::read_u32(is);
      const std::uint32_t hidden = binio::read_u32(is);
      LstmModel m(input, hidden);
      m.params() = binio::read_f64s(is, lstm_param_count(input, hidden));
      return m;
    }
  }
  throw DataError("unknown model kind byte");
}

}  // namespace tagpred
