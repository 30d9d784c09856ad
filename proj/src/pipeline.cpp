#include "tagpred/pipeline.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "tagpred/binio.hpp"
#include "tagpred/errors.hpp"

namespace tagpred {

namespace {

constexpr char kBundleMagic[4] = {'T', 'G', 'B', 'N'};
constexpr std::uint32_t kBundleVersion = 1;

}  // namespace

std::string to_string(Representation r) {
  switch (r) {
    case Representation::tfidf: return "tfidf";
    case Representation::onehot: return "onehot";
    case Representation::word2vec: return "word2vec";
    case Representation::doc2vec: return "doc2vec";
  }
  return "tfidf";
}

Representation representation_from_string(const std::string& s) {
  if (s == "tfidf") return Representation::tfidf;
  if (s == "onehot") return Representation::onehot;
  if (s == "word2vec") return Representation::word2vec;
  if (s == "doc2vec") return Representation::doc2vec;
  throw UsageError("unknown representation '" + s + "' (expected tfidf, onehot, word2vec or doc2vec)");
}

std::string to_string(HoldoutMode m) { return m == HoldoutMode::test ? "test" : "carved"; }

HoldoutMode holdout_from_string(const std::string& s) {
  if (s == "test") return HoldoutMode::test;
  if (s == "carved") return HoldoutMode::carved;
  throw UsageError("unknown holdout mode '" + s + "' (expected test or carved)");
}

void validate_pairing(const std::optional<Representation>& rep, ModelKind model) {
  static const char* kValid =
      "valid pairings: tfidf+tree, tfidf+forest, onehot+lstm, word2vec+lstm, doc2vec+ffnn, random";
  if (model == ModelKind::random) {
    if (rep) throw UsageError(std::string("the random baseline takes no representation; ") + kValid);
    return;
  }
  if (!rep) throw UsageError(std::string("model '") + to_string(model) + "' needs a representation; " + kValid);
  const bool ok = (*rep == Representation::tfidf &&
                   (model == ModelKind::tree || model == ModelKind::forest)) ||
                  (*rep == Representation::onehot && model == ModelKind::lstm) ||
                  (*rep == Representation::word2vec && model == ModelKind::lstm) ||
                  (*rep == Representation::doc2vec && model == ModelKind::ffnn);
  if (!ok)
    throw UsageError("invalid pairing " + to_string(*rep) + "+" + to_string(model) + "; " + kValid);
}

double default_learning_rate(const std::optional<Representation>& rep) {
  return rep && *rep == Representation::word2vec ? 0.005 : 0.01;
}

// ---------------------------------------------------------------------------

VectorData Pipeline::make_vector_data(const Dataset& d, bool training_set) const {
  VectorData out;
  out.labels = encode_dataset(d, taxonomy_);
  if (*rep_ == Representation::tfidf) {
    out.x.cols = vocab_.size();
    for (const Problem& p : d.problems) out.x.push_row(tfidf_.transform(p.text, vocab_));
  } else {  // doc2vec
    out.x.cols = doc2vec_.dim;
    if (training_set) {
      for (std::size_t i = 0; i < d.problems.size(); ++i) out.x.push_row(doc2vec_.doc_row(i));
    } else {
      for (const Problem& p : d.problems)
        out.x.push_row(infer_doc(doc2vec_, p.text, vocab_, d2v_infer_steps_, seed_));
    }
  }
  return out;
}

SequenceData Pipeline::make_sequence_data(const Dataset& d) const {
  SequenceData out;
  out.labels = encode_dataset(d, taxonomy_);
  out.indices.reserve(d.problems.size());
  for (const Problem& p : d.problems) out.indices.push_back(vocab_.token_indices(p.text));
  if (*rep_ == Representation::onehot) {
    out.one_hot = true;
    out.input_dim = vocab_.size();
  } else {
    out.one_hot = false;
    out.embedding = &embeddings_.input_vectors;
    out.input_dim = embeddings_.dim;
  }
  return out;
}

Pipeline Pipeline::fit(const Dataset& train, const Dataset* holdout, const TaxonomyMap& taxonomy,
                       const PipelineConfig& cfg, TrainHistory* history) {
  validate_pairing(cfg.representation, cfg.model);

  Pipeline p;
  p.rep_ = cfg.representation;
  p.taxonomy_ = taxonomy;
  p.d2v_infer_steps_ = cfg.doc2vec_infer_steps;
  p.seed_ = cfg.train.seed;

  if (cfg.model == ModelKind::random) {
    p.model_ = RandomBaseline{kNumLabels, cfg.train.seed};
    return p;
  }

  p.vocab_ = Vocabulary::build(train);

  switch (cfg.model) {
    case ModelKind::tree: {
      p.tfidf_ = TfidfModel::fit(train, p.vocab_);
      const VectorData data = p.make_vector_data(train, true);
      TreeConfig tree_cfg = cfg.tree;
      tree_cfg.seed = cfg.train.seed;
      p.model_ = train_tree(data.x, data.labels, tree_cfg);
      break;
    }
    case ModelKind::forest: {
      p.tfidf_ = TfidfModel::fit(train, p.vocab_);
      const VectorData data = p.make_vector_data(train, true);
      ForestConfig forest_cfg = cfg.forest;
      forest_cfg.seed = cfg.train.seed;
      p.model_ = train_forest(data.x, data.labels, forest_cfg);
      break;
    }
    case ModelKind::ffnn: {
      if (!holdout) throw std::invalid_argument("Pipeline::fit: ffnn training needs a holdout set");
      Doc2VecConfig d2v_cfg = cfg.doc2vec;
      d2v_cfg.seed = cfg.train.seed;
      p.doc2vec_ = train_doc2vec(train, p.vocab_, d2v_cfg);
      const VectorData train_data = p.make_vector_data(train, true);
      const VectorData holdout_data = p.make_vector_data(*holdout, false);
      FfnnModel m = FfnnModel::init(p.doc2vec_.dim, kHiddenUnits, cfg.train.seed);
      TrainHistory h = train_model(m, train_data, holdout_data, cfg.train);
      if (history) *history = std::move(h);
      p.model_ = std::move(m);
      break;
    }
    case ModelKind::lstm: {
      if (!holdout) throw std::invalid_argument("Pipeline::fit: lstm training needs a holdout set");
      if (*cfg.representation == Representation::word2vec) {
        Word2VecConfig w2v_cfg = cfg.word2vec;
        w2v_cfg.seed = cfg.train.seed;
        p.embeddings_ = train_word2vec(train, p.vocab_, w2v_cfg).embeddings;
      }
      const SequenceData train_data = p.make_sequence_data(train);
      const SequenceData holdout_data = p.make_sequence_data(*holdout);
      LstmModel m = LstmModel::init(train_data.input_dim, kHiddenUnits, cfg.train.seed);
      TrainHistory h = train_model(m, train_data, holdout_data, cfg.train);
      if (history) *history = std::move(h);
      p.model_ = std::move(m);
      break;
    }
    default:
      throw std::invalid_argument("Pipeline::fit: unsupported model kind");
  }
  return p;
}

std::vector<Probabilities> Pipeline::predict_proba(const Dataset& d) const {
  switch (model_kind()) {
    case ModelKind::tree: {
      const TreeModel& t = std::get<TreeModel>(model_);
      std::vector<Probabilities> out;
      for (const Problem& p : d.problems) {
        const std::vector<double> x = tfidf_.transform(p.text, vocab_);
        out.push_back(t.leaf_fractions(x));
      }
      return out;
    }
    case ModelKind::forest: {
      const ForestModel& f = std::get<ForestModel>(model_);
      std::vector<Probabilities> out;
      for (const Problem& p : d.problems) {
        const std::vector<double> x = tfidf_.transform(p.text, vocab_);
        out.push_back(forest_fractions(f, x));
      }
      return out;
    }
    case ModelKind::ffnn: {
      const FfnnModel& m = std::get<FfnnModel>(model_);
      return ffnn_predict_proba(m, make_vector_data(d, false));
    }
    case ModelKind::lstm: {
      const LstmModel& m = std::get<LstmModel>(model_);
      return lstm_predict_proba(m, make_sequence_data(d));
    }
    default:
      throw std::invalid_argument("predict_proba: random baseline has no probabilities");
  }
}

std::vector<LabelVector> Pipeline::predict(const Dataset& d) const {
  if (model_kind() == ModelKind::random)
    return random_predict(std::get<RandomBaseline>(model_), d.problems.size());
  const std::vector<Probabilities> probs = predict_proba(d);
  std::vector<LabelVector> out(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) out[i] = threshold_probabilities(probs[i]);
  return out;
}

std::vector<std::string> Pipeline::predict_tags(const std::string& raw_text) const {
  Dataset d;
  Problem p;
  p.text = clean_text(raw_text);
  d.problems.push_back(std::move(p));
  const std::vector<LabelVector> pred = predict(d);
  return decode_labels(pred.at(0), taxonomy_);
}

MetricsReport Pipeline::evaluate(const Dataset& test) const {
  const std::vector<LabelVector> truth = encode_dataset(test, taxonomy_);
  MetricsReport r;

  std::vector<LabelVector> pred;
  if (model_kind() == ModelKind::random) {
    pred = random_predict(std::get<RandomBaseline>(model_), test.problems.size());
  } else {
    const std::vector<Probabilities> probs = predict_proba(test);
    pred.resize(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) pred[i] = threshold_probabilities(probs[i]);
    if (model_kind() == ModelKind::ffnn || model_kind() == ModelKind::lstm)
      r.loss = weighted_bce(probs, truth, r.w1, r.w0);
  }

  r.weighted_hamming_score = weighted_hamming_score(pred, truth, r.w1, r.w0);
  const Prf prf = avg_prf(pred, truth);
  r.avg_precision = prf.precision;
  r.avg_recall = prf.recall;
  r.avg_f1 = prf.f1;
  r.avg_ones_per_sample = avg_ones(pred);
  if (model_kind() == ModelKind::ffnn) r.n_trainable_params = count_params(std::get<FfnnModel>(model_));
  if (model_kind() == ModelKind::lstm) r.n_trainable_params = count_params(std::get<LstmModel>(model_));
  return r;
}

MetricsReport evaluate(const Pipeline& p, const Dataset& test) { return p.evaluate(test); }

// ---------------------------------------------------------------------------
// Bundle serialization

void Pipeline::save(const std::filesystem::path& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write model file: " + path.string());
  binio::write_magic(os, kBundleMagic);
  binio::write_u32(os, kBundleVersion);
  binio::write_u8(os, rep_ ? 1 : 0);
  if (rep_) binio::write_u8(os, static_cast<std::uint8_t>(*rep_));
  binio::write_string(os, taxonomy_.to_json());
  binio::write_u32(os, static_cast<std::uint32_t>(d2v_infer_steps_));
  binio::write_u32(os, static_cast<std::uint32_t>(seed_ >> 32));
  binio::write_u32(os, static_cast<std::uint32_t>(seed_ & 0xffffffffu));

  const bool has_vocab = model_kind() != ModelKind::random;
  binio::write_u8(os, has_vocab ? 1 : 0);
  if (has_vocab) vocab_.write(os);
  if (rep_) {
    switch (*rep_) {
      case Representation::tfidf: tfidf_.write(os); break;
      case Representation::word2vec: embeddings_.write(os); break;
      case Representation::doc2vec: doc2vec_.write(os); break;
      case Representation::onehot: break;  // vocabulary is the whole state
    }
  }
  write_model(os, model_);
}

Pipeline Pipeline::load(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open model file: " + path.string());
  binio::expect_magic(is, kBundleMagic, "model bundle");
  const std::uint32_t version = binio::read_u32(is);
  if (version != kBundleVersion)
    throw DataError("unsupported model bundle version " + std::to_string(version));

  Pipeline p;
  if (binio::read_u8(is) == 1) p.rep_ = static_cast<Representation>(binio::read_u8(is));
  p.taxonomy_ = TaxonomyMap::from_json(binio::read_string(is), path.string());
  p.d2v_infer_steps_ = binio::read_u32(is);
  const std::uint64_t hi = binio::read_u32(is);
  const std::uint64_t lo = binio::read_u32(is);
  p.seed_ = (hi << 32) | lo;

  if (binio::read_u8(is) == 1) p.vocab_ = Vocabulary::read(is);
  if (p.rep_) {
    switch (*p.rep_) {
      case Representation::tfidf: p.tfidf_ = TfidfModel::read(is); break;
      case Representation::word2vec: p.embeddings_ = EmbeddingMatrix::read(is); break;
      case Representation::doc2vec: p.doc2vec_ = Doc2VecModel::read(is); break;
      case Representation::onehot: break;
    }
  }
  p.model_ = read_model(is);
  return p;
}

// ---------------------------------------------------------------------------
// Benchmark

std::vector<std::pair<std::optional<Representation>, ModelKind>> benchmark_pairings() {
  return {
      {Representation::tfidf, ModelKind::forest},
      {Representation::tfidf, ModelKind::tree},
      {std::nullopt, ModelKind::random},
      {Representation::onehot, ModelKind::lstm},
      {Representation::doc2vec, ModelKind::ffnn},
      {Representation::word2vec, ModelKind::lstm},
  };
}

std::vector<BenchmarkRow> run_benchmark(const Dataset& mapped, const TaxonomyMap& taxonomy,
                                        const PipelineConfig& base, double ratio, HoldoutMode holdout,
                                        std::optional<double> explicit_lr) {
  const SplitResult split = stratified_split(mapped, ratio, base.train.seed);

  std::vector<BenchmarkRow> rows;
  for (const auto& [rep, model] : benchmark_pairings()) {
    PipelineConfig cfg = base;
    cfg.representation = rep;
    cfg.model = model;
    cfg.train.learning_rate = explicit_lr ? *explicit_lr : default_learning_rate(rep);

    const bool gradient = model == ModelKind::ffnn || model == ModelKind::lstm;
    Pipeline pipeline = [&] {
      if (!gradient) return Pipeline::fit(split.train, nullptr, taxonomy, cfg);
      if (holdout == HoldoutMode::test)
        return Pipeline::fit(split.train, &split.test, taxonomy, cfg);
      const SplitResult inner = stratified_split(split.train, 0.9, cfg.train.seed + 1);
      return Pipeline::fit(inner.train, &inner.test, taxonomy, cfg);
    }();

    BenchmarkRow row;
    row.name = rep ? to_string(*rep) + "+" + to_string(model) : to_string(model);
    row.report = pipeline.evaluate(split.test);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string render_benchmark_table(const std::vector<BenchmarkRow>& rows) {
  std::ostringstream os;
  os << std::left << std::setw(18) << "Model" << std::right << std::setw(8) << "WHS" << std::setw(10)
     << "Prec" << std::setw(10) << "Recall" << std::setw(10) << "F1" << std::setw(10) << "Loss"
     << std::setw(10) << "Ones" << std::setw(10) << "Params" << '\n';
  os << std::string(86, '-') << '\n';
  os << std::fixed << std::setprecision(3);
  for (const BenchmarkRow& r : rows) {
    os << std::left << std::setw(18) << r.name << std::right;
    os << std::setw(8) << r.report.weighted_hamming_score;
    os << std::setw(10) << r.report.avg_precision;
    os << std::setw(10) << r.report.avg_recall;
    os << std::setw(10) << r.report.avg_f1;
    if (r.report.loss)
      os << std::setw(10) << *r.report.loss;
    else
      os << std::setw(10) << "-";
    os << std::setw(10) << r.report.avg_ones_per_sample;
    if (r.report.n_trainable_params)
      os << std::setw(10) << *r.report.n_trainable_params;
    else
      os << std::setw(10) << "-";
    os << '\n';
  }
  return os.str();
}

std::string benchmark_report_json(const std::vector<BenchmarkRow>& rows) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const BenchmarkRow& r : rows) {
    nlohmann::ordered_json entry = nlohmann::ordered_json::parse(r.report.to_json());
    nlohmann::ordered_json named;
    named["model"] = r.name;
    for (auto& [key, value] : entry.items()) named[key] = value;
    arr.push_back(std::move(named));
  }
  return arr.dump(2) + "\n";
}

}  // namespace tagpred
