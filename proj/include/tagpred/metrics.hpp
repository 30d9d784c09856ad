#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tagpred/taxonomy.hpp"

namespace tagpred {

// One evaluation row: the columns of the results table.
struct MetricsReport {
  double weighted_hamming_score = 0.0;
  double avg_precision = 0.0;
  double avg_recall = 0.0;
  double avg_f1 = 0.0;
  std::optional<double> loss;                    // gradient-trained models only
  double avg_ones_per_sample = 0.0;
  std::optional<std::size_t> n_trainable_params; // parametric models only
  double w1 = 0.82;
  double w0 = 0.18;

  std::string to_json() const;  // fixed key order, optional fields omitted
  static MetricsReport from_json(const std::string& text);
};

// 1 - (w1 * false-negative rate over true-1 entries
//      + w0 * false-positive rate over true-0 entries).
// A rate with zero denominator contributes 0.
double weighted_hamming_score(const std::vector<LabelVector>& pred,
                              const std::vector<LabelVector>& truth, double w1 = 0.82,
                              double w0 = 0.18);

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Per-label precision/recall/F1 averaged over labels weighted by support;
// zero-support labels are excluded, per-label 0/0 counts as 0.
Prf avg_prf(const std::vector<LabelVector>& pred, const std::vector<LabelVector>& truth);

// Mean row sum of a binary prediction matrix.
double avg_ones(const std::vector<LabelVector>& pred);

}  // namespace tagpred
