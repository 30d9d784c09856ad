#include "tagpred/metrics.hpp"

#include <stdexcept>

#include <json.hpp>

#include "tagpred/errors.hpp"

namespace tagpred {

double weighted_hamming_score(const std::vector<LabelVector>& pred,
                              const std::vector<LabelVector>& truth, double w1, double w0) {
  if (pred.size() != truth.size())
    throw std::invalid_argument("weighted_hamming_score: shape mismatch");

  std::size_t ones = 0, zeros = 0, missed_ones = 0, false_ones = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    for (std::size_t j = 0; j < kNumLabels; ++j) {
      if (truth[i].bits[j]) {
        ++ones;
        if (!pred[i].bits[j]) ++missed_ones;
      } else {
        ++zeros;
        if (pred[i].bits[j]) ++false_ones;
      }
    }
  }
  const double ratio1 = ones > 0 ? static_cast<double>(missed_ones) / static_cast<double>(ones) : 0.0;
  const double ratio0 = zeros > 0 ? static_cast<double>(false_ones) / static_cast<double>(zeros) : 0.0;
  return 1.0 - (w1 * ratio1 + w0 * ratio0);
}

Prf avg_prf(const std::vector<LabelVector>& pred, const std::vector<LabelVector>& truth) {
  if (pred.size() != truth.size()) throw std::invalid_argument("avg_prf: shape mismatch");

  Prf out;
  double support_total = 0.0;
  for (std::size_t j = 0; j < kNumLabels; ++j) {
    std::size_t tp = 0, fp = 0, fn = 0, support = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      const bool t = truth[i].bits[j] != 0;
      const bool p = pred[i].bits[j] != 0;
      support += t;
      if (p && t) ++tp;
      if (p && !t) ++fp;
      if (!p && t) ++fn;
    }
    if (support == 0) continue;
    const double precision = (tp + fp) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    const double recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
    const double f1 = (precision + recall) > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
    const double w = static_cast<double>(support);
    out.precision += w * precision;
    out.recall += w * recall;
    out.f1 += w * f1;
    support_total += w;
  }
  if (support_total > 0.0) {
    out.precision /= support_total;
    out.recall /= support_total;
    out.f1 /= support_total;
  }
  return out;
}

double avg_ones(const std::vector<LabelVector>& pred) {
  if (pred.empty()) return 0.0;
  std::size_t total = 0;
  for (const LabelVector& v : pred) total += v.count_ones();
  return static_cast<double>(total) / static_cast<double>(pred.size());
}

std::string MetricsReport::to_json() const {
  nlohmann::ordered_json j;
  j["weighted_hamming_score"] = weighted_hamming_score;
  j["avg_precision"] = avg_precision;
  j["avg_recall"] = avg_recall;
  j["avg_f1"] = avg_f1;
  if (loss) j["loss"] = *loss;
  j["avg_ones_per_sample"] = avg_ones_per_sample;
  if (n_trainable_params) j["n_trainable_params"] = *n_trainable_params;
  j["w1"] = w1;
  j["w0"] = w0;
  return j.dump(2);
}

MetricsReport MetricsReport::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("metrics report: ") + e.what());
  }
  MetricsReport r;
  r.weighted_hamming_score = j.at("weighted_hamming_score").get<double>();
  r.avg_precision = j.at("avg_precision").get<double>();
  r.avg_recall = j.at("avg_recall").get<double>();
  r.avg_f1 = j.at("avg_f1").get<double>();
  if (j.contains("loss")) r.loss = j.at("loss").get<double>();
  r.avg_ones_per_sample = j.at("avg_ones_per_sample").get<double>();
  if (j.contains("n_trainable_params")) r.n_trainable_params = j.at("n_trainable_params").get<std::size_t>();
  r.w1 = j.value("w1", 0.82);
  r.w0 = j.value("w0", 0.18);
  return r;
}

}  // namespace tagpred
