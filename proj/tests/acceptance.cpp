// Acceptance suite: one line per criterion, [PASS]/[FAIL], nonzero exit if
// anything fails. Criteria 8 and 9 train every pairing end-to-end and
// dominate the runtime.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "tagpred/cli.hpp"
#include "tagpred/corpus.hpp"
#include "tagpred/metrics.hpp"
#include "tagpred/models.hpp"
#include "tagpred/pipeline.hpp"
#include "tagpred/preprocess.hpp"
#include "tagpred/represent.hpp"
#include "tagpred/rng.hpp"
#include "tagpred/taxonomy.hpp"
#include "tagpred/training.hpp"

using namespace tagpred;

namespace {

int g_failures = 0;

void report(int criterion, const std::string& name, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %d: %s -- %s\n", pass ? "PASS" : "FAIL", criterion, name.c_str(),
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

LabelVector random_labels(Rng& rng, double p_one) {
  LabelVector v;
  for (std::size_t j = 0; j < kNumLabels; ++j) v.bits[j] = rng.bernoulli(p_one);
  return v;
}

// --------------------------------------------------------------------------
// 1. Parameter counts

void criterion_1() {
  const std::size_t ffnn = ffnn_param_count(30, 16);
  const std::size_t w2v_lstm = lstm_param_count(300, 16);
  const std::size_t onehot_lstm = lstm_param_count(6259, 16);
  const bool pass = ffnn == 649 && w2v_lstm == 20505 && onehot_lstm == 401881;
  char detail[160];
  std::snprintf(detail, sizeof(detail),
                "ffnn=%zu (want 649), w2v-lstm=%zu (want 20505), onehot-lstm=%zu (want 401881)",
                ffnn, w2v_lstm, onehot_lstm);
  report(1, "parameter counts", pass, detail);
}

// --------------------------------------------------------------------------
// 2. Metric oracles

double brute_whs(const std::vector<LabelVector>& pred, const std::vector<LabelVector>& truth,
                 double w1, double w0) {
  double n1 = 0, n0 = 0, miss1 = 0, miss0 = 0;
  for (std::size_t i = 0; i < truth.size(); ++i)
    for (std::size_t j = 0; j < kNumLabels; ++j)
      if (truth[i].bits[j]) {
        n1 += 1;
        miss1 += !pred[i].bits[j];
      } else {
        n0 += 1;
        miss0 += pred[i].bits[j];
      }
  return 1.0 - (w1 * (n1 > 0 ? miss1 / n1 : 0.0) + w0 * (n0 > 0 ? miss0 / n0 : 0.0));
}

Prf brute_prf(const std::vector<LabelVector>& pred, const std::vector<LabelVector>& truth) {
  double wp = 0, wr = 0, wf = 0, wsum = 0;
  for (std::size_t j = 0; j < kNumLabels; ++j) {
    double tp = 0, fp = 0, fn = 0, support = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      support += truth[i].bits[j];
      tp += pred[i].bits[j] && truth[i].bits[j];
      fp += pred[i].bits[j] && !truth[i].bits[j];
      fn += !pred[i].bits[j] && truth[i].bits[j];
    }
    if (support == 0) continue;
    const double p = tp + fp > 0 ? tp / (tp + fp) : 0.0;
    const double r = tp / (tp + fn);
    const double f = p + r > 0 ? 2 * p * r / (p + r) : 0.0;
    wp += support * p;
    wr += support * r;
    wf += support * f;
    wsum += support;
  }
  if (wsum == 0) return {};
  return {wp / wsum, wr / wsum, wf / wsum};
}

double brute_ones(const std::vector<LabelVector>& pred) {
  if (pred.empty()) return 0.0;
  double total = 0;
  for (const auto& v : pred)
    for (std::size_t j = 0; j < kNumLabels; ++j) total += v.bits[j];
  return total / static_cast<double>(pred.size());
}

void criterion_2() {
  Rng rng(202);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.uniform_index(60);
    std::vector<LabelVector> truth(n), pred(n);
    for (std::size_t i = 0; i < n; ++i) {
      truth[i] = random_labels(rng, 0.2 + 0.6 * rng.next_double());
      pred[i] = random_labels(rng, 0.2 + 0.6 * rng.next_double());
    }
    worst = std::max(worst, std::abs(weighted_hamming_score(pred, truth) -
                                     brute_whs(pred, truth, 0.82, 0.18)));
    const Prf a = avg_prf(pred, truth);
    const Prf b = brute_prf(pred, truth);
    worst = std::max({worst, std::abs(a.precision - b.precision), std::abs(a.recall - b.recall),
                      std::abs(a.f1 - b.f1)});
    worst = std::max(worst, std::abs(avg_ones(pred) - brute_ones(pred)));
  }
  char detail[96];
  std::snprintf(detail, sizeof(detail), "worst |library - brute force| = %.3e over 1000 instances",
                worst);
  report(2, "metric oracles at 1e-12", worst < 1e-12, detail);
}

// --------------------------------------------------------------------------
// 3. Random-baseline calibration

void criterion_3() {
  const Dataset d = generate_synthetic(10000, TaxonomyMap::builtin(), 303);
  const std::vector<LabelVector> truth = encode_dataset(d, TaxonomyMap::builtin());
  const std::vector<LabelVector> pred = random_predict(RandomBaseline{kNumLabels, 304}, 10000);
  const double ones = avg_ones(pred);
  const double whs = weighted_hamming_score(pred, truth);
  const bool pass = ones >= 4.4 && ones <= 4.6 && whs >= 0.48 && whs <= 0.52;
  char detail[96];
  std::snprintf(detail, sizeof(detail), "avg ones/sample = %.4f (in [4.4,4.6]), WHS = %.4f (in [0.48,0.52])",
                ones, whs);
  report(3, "random-baseline calibration", pass, detail);
}

// --------------------------------------------------------------------------
// 4. Gradient checks

// Worst relative error of analytic vs central-difference gradients. The 1e-6
// denominator floor keeps difference-quotient roundoff (~1e-11 absolute at
// step 1e-5) from dominating on gradients too small to resolve.
template <typename Model, typename LossFn>
double grad_rel_error(Model& m, LossFn loss_fn, const std::vector<double>& analytic) {
  const double h = 1e-5;
  double worst = 0.0;
  for (std::size_t k = 0; k < m.params().size(); ++k) {
    const double saved = m.params()[k];
    m.params()[k] = saved + h;
    const double up = loss_fn(m);
    m.params()[k] = saved - h;
    const double down = loss_fn(m);
    m.params()[k] = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double denom = std::max({std::abs(numeric), std::abs(analytic[k]), 1e-6});
    worst = std::max(worst, std::abs(numeric - analytic[k]) / denom);
  }
  return worst;
}

void criterion_4() {
  Rng rng(404);
  double worst = 0.0;

  for (int instance = 0; instance < 20; ++instance) {
    const std::size_t dim = 3 + rng.uniform_index(6);
    const std::size_t n = 2 + rng.uniform_index(3);
    VectorData data;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> x(dim);
      for (double& v : x) v = rng.uniform(-1.5, 1.5);
      data.x.push_row(x);
      data.labels.push_back(random_labels(rng, 0.3));
    }
    FfnnModel m = FfnnModel::init(dim, 16, rng.next_u64());
    std::vector<std::size_t> batch(n);
    for (std::size_t i = 0; i < n; ++i) batch[i] = i;
    std::vector<double> grad;
    ffnn_loss_grad(m, data, batch, 0.82, 0.18, grad);
    worst = std::max(worst, grad_rel_error(
                                m,
                                [&](const FfnnModel& model) {
                                  std::vector<double> g;
                                  return ffnn_loss_grad(model, data, batch, 0.82, 0.18, g);
                                },
                                grad));
  }
  const double ffnn_worst = worst;

  for (int instance = 0; instance < 20; ++instance) {
    const bool one_hot = instance % 2 == 0;
    const std::size_t dim = 3 + rng.uniform_index(4);
    const std::size_t n = 2 + rng.uniform_index(2);
    SequenceData data;
    data.input_dim = dim;
    data.one_hot = one_hot;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t len = 1 + rng.uniform_index(4);
      if (one_hot) {
        std::vector<int> idx(len);
        for (int& v : idx) v = static_cast<int>(rng.uniform_index(dim));
        data.indices.push_back(std::move(idx));
      } else {
        std::vector<double> flat(len * dim);
        for (double& v : flat) v = rng.uniform(-1.5, 1.5);
        data.dense.push_back(std::move(flat));
      }
      data.labels.push_back(random_labels(rng, 0.3));
    }
    LstmModel m = LstmModel::init(dim, 16, rng.next_u64());
    std::vector<std::size_t> batch(n);
    for (std::size_t i = 0; i < n; ++i) batch[i] = i;
    std::vector<double> grad;
    lstm_loss_grad(m, data, batch, 0.82, 0.18, grad);
    worst = std::max(worst, grad_rel_error(
                                m,
                                [&](const LstmModel& model) {
                                  std::vector<double> g;
                                  return lstm_loss_grad(model, data, batch, 0.82, 0.18, g);
                                },
                                grad));
  }

  char detail[96];
  std::snprintf(detail, sizeof(detail), "worst relative error: ffnn %.3e, overall %.3e (< 1e-4)",
                ffnn_worst, worst);
  report(4, "gradient checks vs central differences", worst < 1e-4, detail);
}

// --------------------------------------------------------------------------
// 5. tf-idf correctness

void criterion_5() {
  const std::vector<std::string> corpus = {"sum pairs array", "graph shortest path", "sum graph",
                                           "array array scan", "path sum pairs"};
  Dataset d;
  for (const auto& t : corpus) d.problems.push_back({t, {}});
  const Vocabulary v = Vocabulary::build(d);
  const TfidfModel m = TfidfModel::fit(d, v);

  // Independent two-pass oracle.
  double worst = 0.0;
  for (const std::string& doc : corpus) {
    std::map<std::string, int> df, tf;
    for (const auto& text : corpus) {
      std::set<std::string> seen;
      for (auto tok : tokenize(text))
        if (seen.insert(std::string(tok)).second) ++df[std::string(tok)];
    }
    for (auto tok : tokenize(doc)) ++tf[std::string(tok)];
    std::vector<double> want(v.size(), 0.0);
    for (std::size_t i = 0; i < v.size(); ++i) {
      const auto it = tf.find(v.term(i));
      if (it == tf.end()) continue;
      want[i] = it->second * (std::log(6.0 / (1.0 + df.at(v.term(i)))) + 1.0);
    }
    double norm = 0.0;
    for (double x : want) norm += x * x;
    for (double& x : want) x /= std::sqrt(norm);
    const std::vector<double> got = m.transform(doc, v);
    for (std::size_t i = 0; i < v.size(); ++i) worst = std::max(worst, std::abs(got[i] - want[i]));
  }

  // "sum" appears in 3 of 5 docs; make a corpus-wide term for the df=n case.
  Dataset all;
  for (const auto& t : corpus) all.problems.push_back({t + " always", {}});
  const Vocabulary va = Vocabulary::build(all);
  const TfidfModel ma = TfidfModel::fit(all, va);
  const bool idf_exact = ma.idf[static_cast<std::size_t>(*va.index_of("always"))] == 1.0;

  char detail[96];
  std::snprintf(detail, sizeof(detail), "worst |got - oracle| = %.3e; idf(df=n) == 1 exactly: %s",
                worst, idf_exact ? "yes" : "no");
  report(5, "tf-idf matches the naive oracle", worst < 1e-12 && idf_exact, detail);
}

// --------------------------------------------------------------------------
// 6. Preprocessing fuzz

void criterion_6() {
  Rng rng(606);
  static const std::string pieces[] = {
      "<p>", "</p>", "<a href=\"x\">", "<",    ">",        "$x_i$", "$$\\sum_{i}^n$$",
      "$",   "\\frac", "\\",            "word", "WORD",     "can't", "a.b,c;d",
      "a",   "I",     "0",             "42",   "3.14",     "\xc3\xa9", "\xf0\x9f\x98\x80",
      " ",   "\t",    "\n",            "\r",   "the of in", "mixed<tag>text", "$a$b$c$",
  };
  std::size_t checked = 0;
  bool pass = true;
  std::string why;
  for (int i = 0; i < 10000 && pass; ++i) {
    std::string raw;
    const std::size_t n = rng.uniform_index(40);
    for (std::size_t k = 0; k < n; ++k) raw += pieces[rng.uniform_index(std::size(pieces))];
    const std::string once = clean_text(raw);
    const std::string twice = clean_text(once);
    if (twice != once) {
      pass = false;
      why = "not idempotent";
      break;
    }
    if (!once.empty() && (once.front() == ' ' || once.back() == ' ')) {
      pass = false;
      why = "edge spaces";
      break;
    }
    for (char c : once)
      if (c != ' ' && (c < 'a' || c > 'z')) {
        pass = false;
        why = "character outside [a-z ]";
        break;
      }
    for (auto tok : tokenize(once))
      if (tok.size() < 2) {
        pass = false;
        why = "single-char token survived";
        break;
      }
    ++checked;
  }
  char detail[96];
  std::snprintf(detail, sizeof(detail), "%zu fuzzed strings%s%s", checked, pass ? "" : "; failed: ",
                pass ? "" : why.c_str());
  report(6, "clean_text idempotence and charset", pass, detail);
}

// --------------------------------------------------------------------------
// 7. Stratified split quality

double split_deviation(const Dataset& d, const std::vector<std::size_t>& train_idx) {
  std::map<std::string, std::size_t> total = tag_frequencies(d);
  std::map<std::string, std::size_t> train;
  for (std::size_t i : train_idx)
    for (const auto& t : d.problems[i].tags) ++train[t];
  double dev = 0.0;
  for (const auto& [tag, count] : total) {
    const double global = static_cast<double>(count) / static_cast<double>(d.size());
    const double in_train =
        static_cast<double>(train.count(tag) ? train.at(tag) : 0) / static_cast<double>(train_idx.size());
    dev += std::abs(in_train - global);
  }
  return dev / static_cast<double>(total.size());
}

void criterion_7() {
  const Dataset d = generate_synthetic(2000, TaxonomyMap::builtin(), 707);
  double strat_dev = 0.0, random_dev = 0.0;
  bool sizes_ok = true;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const SplitResult s = stratified_split(d, 0.9, seed);
    if (s.train.size() != 1800 || s.test.size() != 200) sizes_ok = false;
    strat_dev += split_deviation(d, s.train_indices);

    // Uniform random split of identical sizes.
    std::vector<std::size_t> idx(d.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    Rng rng(seed);
    rng.shuffle(idx);
    random_dev += split_deviation(d, std::vector<std::size_t>(idx.begin(), idx.begin() + 1800));
  }
  strat_dev /= 10.0;
  random_dev /= 10.0;
  const bool pass = sizes_ok && strat_dev <= random_dev;
  char detail[128];
  std::snprintf(detail, sizeof(detail),
                "mean per-label deviation: stratified %.5f <= random %.5f; 1800/200 sizes: %s",
                strat_dev, random_dev, sizes_ok ? "exact" : "WRONG");
  report(7, "stratified split beats a uniform split", pass, detail);
}

// --------------------------------------------------------------------------
// 8 + 9. Benchmark ordering and determinism

std::map<std::string, double> whs_by_name(const std::vector<BenchmarkRow>& rows) {
  std::map<std::string, double> out;
  for (const auto& r : rows) out[r.name] = r.report.weighted_hamming_score;
  return out;
}

void criterion_8() {
  const Dataset d = generate_synthetic(2000, TaxonomyMap::builtin(), 808);
  PipelineConfig base;
  base.train.seed = 808;
  const std::vector<BenchmarkRow> rows =
      run_benchmark(d, TaxonomyMap::builtin(), base, 0.9, HoldoutMode::carved);
  const auto whs = whs_by_name(rows);

  const double rnd = whs.at("random");
  const double tree = whs.at("tfidf+tree");
  bool learned_beat_random = true;
  for (const char* name : {"tfidf+forest", "tfidf+tree", "onehot+lstm", "doc2vec+ffnn", "word2vec+lstm"})
    if (whs.at(name) < rnd + 0.10) learned_beat_random = false;
  const bool lstms_beat_tree =
      whs.at("word2vec+lstm") > tree && whs.at("onehot+lstm") > tree;

  std::string detail = "WHS:";
  for (const auto& r : rows) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), " %s=%.3f", r.name.c_str(), r.report.weighted_hamming_score);
    detail += buf;
  }
  report(8, "directional ordering on the synthetic corpus", learned_beat_random && lstms_beat_tree,
         detail);
}

void criterion_9() {
  // End-to-end determinism at a smaller scale; byte-identical reports.
  const Dataset d = generate_synthetic(400, TaxonomyMap::builtin(), 909);
  PipelineConfig base;
  base.train.seed = 909;
  base.train.max_epochs = 40;
  base.word2vec.epochs = 5;
  base.doc2vec.epochs = 8;
  base.forest.n_trees = 100;
  const auto rows1 = run_benchmark(d, TaxonomyMap::builtin(), base, 0.9, HoldoutMode::carved);
  const auto rows2 = run_benchmark(d, TaxonomyMap::builtin(), base, 0.9, HoldoutMode::carved);
  const std::string rep1 = benchmark_report_json(rows1);
  const std::string rep2 = benchmark_report_json(rows2);
  const bool pass = rep1 == rep2 && rows1.size() == 6;
  char detail[96];
  std::snprintf(detail, sizeof(detail), "two runs, %zu rows, reports %s", rows1.size(),
                rep1 == rep2 ? "byte-identical" : "DIFFER");
  report(9, "benchmark determinism", pass, detail);
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  if (g_failures > 0) {
    std::printf("%d criteria FAILED\n", g_failures);
    return 1;
  }
  std::printf("all 9 criteria passed\n");
  return 0;
}
