#include "tagpred/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "tagpred/errors.hpp"
#include "tagpred/metrics.hpp"
#include "tagpred/rng.hpp"

namespace tagpred {

namespace {

constexpr double kProbClamp = 1e-12;

double clamp_prob(double p) { return std::min(std::max(p, kProbClamp), 1.0 - kProbClamp); }

}  // namespace

// ---------------------------------------------------------------------------
// Stratified split

SplitResult stratified_split(const Dataset& d, double ratio, std::uint64_t seed) {
  const std::size_t n = d.problems.size();
  if (n < 2) throw std::invalid_argument("stratified_split: need at least 2 problems");
  if (ratio <= 0.0 || ratio >= 1.0) throw std::invalid_argument("stratified_split: ratio must be in (0,1)");

  const std::size_t n_train = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));
  const std::size_t caps[2] = {n_train, n - n_train};

  Rng rng(seed);
  std::vector<int> side(n, -1);
  std::size_t assigned[2] = {0, 0};

  // Remaining per-label example pools and per-side demands.
  std::map<std::string, std::vector<std::size_t>> pools;
  for (std::size_t i = 0; i < n; ++i)
    for (const std::string& tag : d.problems[i].tags) pools[tag].push_back(i);
  std::map<std::string, double> demand[2];
  for (const auto& [tag, members] : pools) {
    demand[0][tag] = static_cast<double>(members.size()) * ratio;
    demand[1][tag] = static_cast<double>(members.size()) * (1.0 - ratio);
  }

  auto pick_side = [&](const std::string& tag) {
    const bool open0 = assigned[0] < caps[0];
    const bool open1 = assigned[1] < caps[1];
    if (open0 != open1) return open0 ? 0 : 1;
    if (!open0) return 0;  // both full cannot happen while examples remain
    double d0 = tag.empty() ? 0.0 : demand[0][tag];
    double d1 = tag.empty() ? 0.0 : demand[1][tag];
    if (d0 != d1 && !tag.empty()) return d0 > d1 ? 0 : 1;
    const std::size_t room0 = caps[0] - assigned[0];
    const std::size_t room1 = caps[1] - assigned[1];
    if (room0 != room1) return room0 > room1 ? 0 : 1;
    return rng.bernoulli(0.5) ? 0 : 1;
  };

  auto assign = [&](std::size_t example, int s) {
    side[example] = s;
    ++assigned[s];
    for (const std::string& tag : d.problems[example].tags) demand[s][tag] -= 1.0;
  };

  while (!pools.empty()) {
    // Label with the fewest remaining unassigned examples; ties break toward
    // the lexicographically smallest label.
    std::string next_tag;
    std::size_t fewest = std::numeric_limits<std::size_t>::max();
    for (auto it = pools.begin(); it != pools.end();) {
      auto& members = it->second;
      members.erase(std::remove_if(members.begin(), members.end(),
                                   [&](std::size_t i) { return side[i] >= 0; }),
                    members.end());
      if (members.empty()) {
        it = pools.erase(it);
        continue;
      }
      if (members.size() < fewest) {
        fewest = members.size();
        next_tag = it->first;
      }
      ++it;
    }
    if (pools.empty()) break;

    std::vector<std::size_t> members = pools.at(next_tag);
    rng.shuffle(members);
    for (std::size_t example : members)
      if (side[example] < 0) assign(example, pick_side(next_tag));
    pools.erase(next_tag);
  }

  // Label-free problems go wherever more capacity remains.
  std::vector<std::size_t> rest;
  for (std::size_t i = 0; i < n; ++i)
    if (side[i] < 0) rest.push_back(i);
  rng.shuffle(rest);
  for (std::size_t example : rest) assign(example, pick_side(std::string()));

  SplitResult result;
  result.ratio = ratio;
  result.train.source = d.source;
  result.test.source = d.source;
  for (std::size_t i = 0; i < n; ++i) {
    if (side[i] == 0) {
      result.train.problems.push_back(d.problems[i]);
      result.train_indices.push_back(i);
    } else {
      result.test.problems.push_back(d.problems[i]);
      result.test_indices.push_back(i);
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Loss

double weighted_bce(std::span<const double> p, std::span<const std::uint8_t> y, double w1,
                    double w0) {
  if (p.size() != y.size()) throw std::invalid_argument("weighted_bce: shape mismatch");
  if (p.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double pi = clamp_prob(p[i]);
    total += y[i] ? -w1 * std::log(pi) : -w0 * std::log(1.0 - pi);
  }
  return total / static_cast<double>(p.size());
}

double weighted_bce(const std::vector<Probabilities>& p, const std::vector<LabelVector>& y,
                    double w1, double w0) {
  if (p.size() != y.size()) throw std::invalid_argument("weighted_bce: shape mismatch");
  std::vector<double> flat_p;
  std::vector<std::uint8_t> flat_y;
  flat_p.reserve(p.size() * kNumLabels);
  flat_y.reserve(p.size() * kNumLabels);
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = 0; j < kNumLabels; ++j) {
      flat_p.push_back(p[i][j]);
      flat_y.push_back(y[i].bits[j]);
    }
  return weighted_bce(flat_p, flat_y, w1, w0);
}

PaddedBatch pad_batch(const std::vector<std::vector<std::vector<double>>>& seqs) {
  std::size_t max_len = 0;
  std::size_t dim = 0;
  for (const auto& s : seqs) {
    max_len = std::max(max_len, s.size());
    if (!s.empty()) dim = s.front().size();
  }
  if (max_len == 0) throw std::invalid_argument("pad_batch: all sequences are empty");

  PaddedBatch out;
  out.lengths.reserve(seqs.size());
  out.padded.reserve(seqs.size());
  for (const auto& s : seqs) {
    out.lengths.push_back(s.size());
    std::vector<std::vector<double>> padded = s;
    padded.resize(max_len, std::vector<double>(dim, 0.0));
    out.padded.push_back(std::move(padded));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Gradients

namespace {

// d(loss)/d(logit) for one entry, before division by the entry count.
double dloss_dz(double p, double y, double w1, double w0) {
  return y > 0.5 ? -w1 * (1.0 - p) : w0 * p;
}

}  // namespace

double ffnn_loss_grad(const FfnnModel& m, const VectorData& data, std::span<const std::size_t> batch,
                      double w1, double w0, std::vector<double>& grad) {
  const std::size_t I = m.input_dim(), H = m.hidden_dim();
  grad.assign(m.params().size(), 0.0);
  if (batch.empty()) return 0.0;

  const double inv_entries = 1.0 / (static_cast<double>(batch.size()) * kNumLabels);
  double loss = 0.0;

  const std::size_t w1_off = 0, b1_off = H * I, w2_off = H * (I + 1), b2_off = w2_off + kNumLabels * H;
  auto w2 = m.w2();

  for (std::size_t idx : batch) {
    const auto x = data.x.row(idx);
    const LabelVector& y = data.labels[idx];
    const FfnnActivations act = ffnn_forward_full(m, x);

    std::array<double, kNumLabels> dz;
    for (std::size_t j = 0; j < kNumLabels; ++j) {
      const double p = clamp_prob(act.probs[j]);
      loss += y.bits[j] ? -w1 * std::log(p) : -w0 * std::log(1.0 - p);
      dz[j] = dloss_dz(act.probs[j], y.bits[j], w1, w0) * inv_entries;
    }

    std::vector<double> dh(H, 0.0);
    for (std::size_t j = 0; j < kNumLabels; ++j) {
      for (std::size_t h = 0; h < H; ++h) {
        grad[w2_off + j * H + h] += dz[j] * act.hidden[h];
        dh[h] += w2[j * H + h] * dz[j];
      }
      grad[b2_off + j] += dz[j];
    }
    for (std::size_t h = 0; h < H; ++h) {
      if (act.hidden[h] <= 0.0) continue;  // ReLU gate
      for (std::size_t i = 0; i < I; ++i) grad[w1_off + h * I + i] += dh[h] * x[i];
      grad[b1_off + h] += dh[h];
    }
  }
  return loss * inv_entries;
}

double lstm_loss_grad(const LstmModel& m, const SequenceData& data, std::span<const std::size_t> batch,
                      double w1, double w0, std::vector<double>& grad) {
  const std::size_t I = m.input_dim(), H = m.hidden_dim();
  grad.assign(m.params().size(), 0.0);

  std::size_t live_samples = 0;
  for (std::size_t idx : batch)
    if (data.length(idx) > 0) ++live_samples;
  if (live_samples == 0) return 0.0;
  const double inv_entries = 1.0 / (static_cast<double>(live_samples) * kNumLabels);

  const auto& theta = m.params();
  const double* U = &theta[m.u_off()];
  const double* Wout = &theta[m.wout_off()];

  double loss = 0.0;
  std::vector<LstmStep> steps;
  const std::vector<double> zeros(H, 0.0);

  for (std::size_t idx : batch) {
    const std::size_t T = data.length(idx);
    if (T == 0) continue;

    // Forward, keeping every step for backpropagation through time.
    steps.clear();
    steps.reserve(T);
    for (std::size_t t = 0; t < T; ++t) {
      const std::vector<double>& h_prev = t == 0 ? zeros : steps[t - 1].h;
      const std::vector<double>& c_prev = t == 0 ? zeros : steps[t - 1].c;
      if (data.one_hot)
        steps.push_back(lstm_step(m, nullptr, data.indices[idx][t], h_prev, c_prev));
      else
        steps.push_back(lstm_step(m, data.x_at(idx, t), -1, h_prev, c_prev));
    }
    const Probabilities probs = lstm_output(m, steps.back().h);
    const LabelVector& y = data.labels[idx];

    std::array<double, kNumLabels> dz;
    for (std::size_t j = 0; j < kNumLabels; ++j) {
      const double p = clamp_prob(probs[j]);
      loss += y.bits[j] ? -w1 * std::log(p) : -w0 * std::log(1.0 - p);
      dz[j] = dloss_dz(probs[j], y.bits[j], w1, w0) * inv_entries;
    }

    // Output layer.
    std::vector<double> dh(H, 0.0);
    for (std::size_t j = 0; j < kNumLabels; ++j) {
      for (std::size_t h = 0; h < H; ++h) {
        grad[m.wout_off() + j * H + h] += dz[j] * steps.back().h[h];
        dh[h] += Wout[j * H + h] * dz[j];
      }
      grad[m.bout_off() + j] += dz[j];
    }

    // Backward through time.
    std::vector<double> dc(H, 0.0), dpre(4 * H), dh_prev(H), dc_prev(H);
    for (std::size_t t = T; t-- > 0;) {
      const LstmStep& s = steps[t];
      const std::vector<double>& h_prev = t == 0 ? zeros : steps[t - 1].h;
      const std::vector<double>& c_prev = t == 0 ? zeros : steps[t - 1].c;

      for (std::size_t h = 0; h < H; ++h) {
        const double tanh_c = std::tanh(s.c[h]);
        const double do_ = dh[h] * tanh_c;
        const double dct = dc[h] + dh[h] * s.o[h] * (1.0 - tanh_c * tanh_c);
        const double di = dct * s.g[h];
        const double df = dct * c_prev[h];
        const double dg = dct * s.i[h];
        dpre[h] = di * s.i[h] * (1.0 - s.i[h]);
        dpre[H + h] = df * s.f[h] * (1.0 - s.f[h]);
        dpre[2 * H + h] = dg * (1.0 - s.g[h] * s.g[h]);
        dpre[3 * H + h] = do_ * s.o[h] * (1.0 - s.o[h]);
        dc_prev[h] = dct * s.f[h];
      }

      std::fill(dh_prev.begin(), dh_prev.end(), 0.0);
      for (std::size_t r = 0; r < 4 * H; ++r) {
        const double g = dpre[r];
        if (g == 0.0) continue;
        if (data.one_hot) {
          grad[m.w_off() + r * I + static_cast<std::size_t>(data.indices[idx][t])] += g;
        } else {
          const double* x = data.x_at(idx, t);
          double* grow = &grad[m.w_off() + r * I];
          for (std::size_t i = 0; i < I; ++i) grow[i] += g * x[i];
        }
        double* gurow = &grad[m.u_off() + r * H];
        const double* urow = &U[r * H];
        for (std::size_t h = 0; h < H; ++h) {
          gurow[h] += g * h_prev[h];
          dh_prev[h] += urow[h] * g;
        }
        grad[m.b_in_off() + r] += g;
        grad[m.b_rec_off() + r] += g;
      }

      dh = dh_prev;
      dc = dc_prev;
    }
  }
  return loss * inv_entries;
}

// ---------------------------------------------------------------------------
// Optimizer and training loop

namespace {

struct Adam {
  explicit Adam(std::size_t n) : m(n, 0.0), v(n, 0.0) {}

  void step(std::vector<double>& theta, const std::vector<double>& grad, double lr) {
    ++t;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    for (std::size_t i = 0; i < theta.size(); ++i) {
      m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
      v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
      theta[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
    }
  }

  std::vector<double> m, v;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  std::size_t t = 0;
};

template <typename Model, typename Data, typename LossGrad, typename Predict>
TrainHistory train_impl(Model& model, const Data& train, const Data& holdout, const TrainConfig& cfg,
                        LossGrad loss_grad, Predict predict) {
  if (train.size() == 0 || holdout.size() == 0)
    throw std::invalid_argument("train_model: train and holdout must be non-empty");
  if (cfg.batch_size < 1) throw std::invalid_argument("train_model: batch_size must be >= 1");

  Rng rng(cfg.seed);
  Adam adam(model.params().size());
  TrainHistory history;

  std::vector<double> best_params = model.params();
  double best_loss = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> grad;

  for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    rng.shuffle(order);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(start + cfg.batch_size, order.size());
      std::span<const std::size_t> batch(&order[start], end - start);
      const double loss = loss_grad(model, batch, grad);
      if (!std::isfinite(loss))
        throw std::runtime_error("train_model: loss diverged at epoch " + std::to_string(epoch + 1) +
                                 "; last finite epoch " + std::to_string(epoch));
      adam.step(model.params(), grad, cfg.learning_rate);
      loss_sum += loss * static_cast<double>(end - start);
    }
    history.train_loss.push_back(loss_sum / static_cast<double>(order.size()));

    const std::vector<Probabilities> probs = predict(model, holdout);
    const double hl = weighted_bce(probs, holdout.labels, cfg.w1, cfg.w0);
    std::vector<LabelVector> hp(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) hp[i] = threshold_probabilities(probs[i]);
    history.holdout_loss.push_back(hl);
    history.holdout_whs.push_back(weighted_hamming_score(hp, holdout.labels, cfg.w1, cfg.w0));

    if (hl < best_loss) {
      best_loss = hl;
      best_params = model.params();
      history.best_epoch = epoch;
      since_best = 0;
    } else {
      ++since_best;
    }
    if (since_best >= cfg.patience) break;
  }

  model.params() = best_params;
  return history;
}

}  // namespace

std::vector<Probabilities> ffnn_predict_proba(const FfnnModel& m, const VectorData& data) {
  std::vector<Probabilities> out;
  out.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) out.push_back(ffnn_forward(m, data.x.row(i)));
  return out;
}

std::vector<Probabilities> lstm_predict_proba(const LstmModel& m, const SequenceData& data) {
  std::vector<Probabilities> out;
  out.reserve(data.size());
  const std::vector<double> zeros(m.hidden_dim(), 0.0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const std::size_t T = data.length(i);
    if (T == 0) {
      // No in-vocabulary tokens: score from the zero hidden state.
      out.push_back(lstm_output(m, zeros));
      continue;
    }
    std::vector<double> h = zeros, c = zeros;
    for (std::size_t t = 0; t < T; ++t) {
      LstmStep s = data.one_hot ? lstm_step(m, nullptr, data.indices[i][t], h, c)
                                : lstm_step(m, data.x_at(i, t), -1, h, c);
      h = std::move(s.h);
      c = std::move(s.c);
    }
    out.push_back(lstm_output(m, h));
  }
  return out;
}

TrainHistory train_model(FfnnModel& m, const VectorData& train, const VectorData& holdout,
                         const TrainConfig& cfg) {
  return train_impl(
      m, train, holdout, cfg,
      [&](const FfnnModel& model, std::span<const std::size_t> batch, std::vector<double>& grad) {
        return ffnn_loss_grad(model, train, batch, cfg.w1, cfg.w0, grad);
      },
      [](const FfnnModel& model, const VectorData& data) { return ffnn_predict_proba(model, data); });
}

TrainHistory train_model(LstmModel& m, const SequenceData& train, const SequenceData& holdout,
                         const TrainConfig& cfg) {
  return train_impl(
      m, train, holdout, cfg,
      [&](const LstmModel& model, std::span<const std::size_t> batch, std::vector<double>& grad) {
        return lstm_loss_grad(model, train, batch, cfg.w1, cfg.w0, grad);
      },
      [](const LstmModel& model, const SequenceData& data) { return lstm_predict_proba(model, data); });
}

// ---------------------------------------------------------------------------

std::string TrainHistory::to_csv() const {
  std::ostringstream os;
  os << "epoch,train_loss,holdout_loss,holdout_whs\n";
  os.precision(17);
  for (std::size_t e = 0; e < epochs(); ++e)
    os << (e + 1) << ',' << train_loss[e] << ',' << holdout_loss[e] << ',' << holdout_whs[e] << '\n';
  return os.str();
}

void TrainHistory::save_csv(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write history file: " + path.string());
  out << to_csv();
}

}  // namespace tagpred
