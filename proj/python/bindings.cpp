#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "tagpred/cli.hpp"
#include "tagpred/corpus.hpp"
#include "tagpred/errors.hpp"
#include "tagpred/metrics.hpp"
#include "tagpred/models.hpp"
#include "tagpred/pipeline.hpp"
#include "tagpred/preprocess.hpp"
#include "tagpred/represent.hpp"
#include "tagpred/taxonomy.hpp"
#include "tagpred/training.hpp"

namespace py = pybind11;
using namespace tagpred;

namespace {

LabelVector labels_from_list(const std::vector<int>& bits) {
  if (bits.size() != kNumLabels) throw py::value_error("label vector must have 9 entries");
  LabelVector v;
  for (std::size_t j = 0; j < kNumLabels; ++j) v.bits[j] = bits[j] ? 1 : 0;
  return v;
}

std::vector<LabelVector> matrix_from_lists(const std::vector<std::vector<int>>& rows) {
  std::vector<LabelVector> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(labels_from_list(r));
  return out;
}

py::dict report_to_dict(const MetricsReport& r) {
  py::dict d;
  d["weighted_hamming_score"] = r.weighted_hamming_score;
  d["avg_precision"] = r.avg_precision;
  d["avg_recall"] = r.avg_recall;
  d["avg_f1"] = r.avg_f1;
  if (r.loss) d["loss"] = *r.loss;
  d["avg_ones_per_sample"] = r.avg_ones_per_sample;
  if (r.n_trainable_params) d["n_trainable_params"] = *r.n_trainable_params;
  d["w1"] = r.w1;
  d["w0"] = r.w0;
  return d;
}

PipelineConfig config_from_kwargs(const std::string& representation, const std::string& model,
                                  const py::kwargs& kwargs) {
  RunConfig rc;
  if (!representation.empty()) rc.representation = representation_from_string(representation);
  rc.model = model_kind_from_string(model);
  for (auto item : kwargs)
    apply_config_entry(rc, py::cast<std::string>(item.first), py::cast<std::string>(py::str(item.second)));
  PipelineConfig pc = rc.pipeline_config();
  pc.representation = rc.representation;
  pc.model = *rc.model;
  return pc;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Strategy-tag prediction for programming-challenge statements";

  py::class_<Problem>(m, "Problem")
      .def(py::init([](const std::string& text, const std::vector<std::string>& tags) {
             Problem p;
             p.text = text;
             p.tags = tags;
             return p;
           }),
           py::arg("text"), py::arg("tags") = std::vector<std::string>{})
      .def_readwrite("text", &Problem::text)
      .def_readwrite("tags", &Problem::tags)
      .def("__repr__", [](const Problem& p) {
        return "Problem(text=" + std::string(py::repr(py::str(p.text))) + ", tags=" +
               std::to_string(p.tags.size()) + ")";
      });

  py::class_<Dataset>(m, "Dataset")
      .def(py::init<>())
      .def_readwrite("problems", &Dataset::problems)
      .def("__len__", [](const Dataset& d) { return d.size(); })
      .def("to_json", &dataset_to_json)
      .def_static("from_json", [](const std::string& text) { return dataset_from_json(text); },
                  py::arg("text"));

  m.def("load_dataset", &load_dataset, py::arg("path"));
  m.def("save_dataset", &save_dataset, py::arg("dataset"), py::arg("path"));

  py::class_<StatsReport>(m, "StatsReport")
      .def_readonly("problem_count", &StatsReport::problem_count)
      .def_readonly("avg_words_per_problem", &StatsReport::avg_words_per_problem)
      .def_readonly("avg_tags_per_problem", &StatsReport::avg_tags_per_problem)
      .def_readonly("per_tag_avg_words", &StatsReport::per_tag_avg_words);

  m.def("dataset_stats", &dataset_stats, py::arg("dataset"));
  m.def("per_tag_word_stats", &per_tag_word_stats, py::arg("dataset"));

  py::class_<TaxonomyMap>(m, "TaxonomyMap")
      .def_static("builtin", [] { return TaxonomyMap::builtin(); })
      .def_static("load", &TaxonomyMap::load, py::arg("path"))
      .def_static("from_json", &TaxonomyMap::from_json, py::arg("text"),
                  py::arg("origin") = "<memory>")
      .def("to_json", &TaxonomyMap::to_json)
      .def_property_readonly("final_tags", &TaxonomyMap::final_tags);

  m.def("generate_synthetic", &generate_synthetic, py::arg("n"), py::arg("taxonomy"),
        py::arg("seed"));
  m.def("apply_taxonomy", &apply_taxonomy, py::arg("dataset"), py::arg("taxonomy"));
  m.def("tag_frequencies", &tag_frequencies, py::arg("dataset"));
  m.def(
      "encode_labels",
      [](const std::vector<std::string>& tags, const TaxonomyMap& t) {
        const LabelVector v = encode_labels(tags, t);
        std::vector<int> bits(v.bits.begin(), v.bits.end());
        return bits;
      },
      py::arg("tags"), py::arg("taxonomy"));
  m.def(
      "tag_correlation",
      [](const Dataset& d) {
        const CorrelationMatrix c = tag_correlation(d);
        py::dict out;
        out["tags"] = c.tags;
        std::vector<std::vector<double>> rows(c.tags.size(),
                                              std::vector<double>(c.tags.size(), 0.0));
        for (std::size_t i = 0; i < c.tags.size(); ++i)
          for (std::size_t j = 0; j < c.tags.size(); ++j) rows[i][j] = c.at(i, j);
        out["values"] = rows;
        return out;
      },
      py::arg("dataset"));

  m.def("merge_fields", &merge_fields, py::arg("title"), py::arg("description"));
  m.def(
      "clean_text", [](const std::string& raw) { return clean_text(raw); }, py::arg("raw"));
  m.def("default_stopwords", &default_stopwords);
  m.def("remove_duplicates", &remove_duplicates, py::arg("dataset"));
  m.def("filter_rare_words", &filter_rare_words, py::arg("dataset"), py::arg("min_count"));
  m.def(
      "preprocess_dataset",
      [](const Dataset& d, std::size_t min_word_occurrences) {
        CleaningConfig cfg;
        cfg.min_word_occurrences = min_word_occurrences;
        return preprocess_dataset(d, cfg);
      },
      py::arg("dataset"), py::arg("min_word_occurrences") = 10);

  py::class_<Vocabulary>(m, "Vocabulary")
      .def_static("build", &Vocabulary::build, py::arg("dataset"))
      .def("__len__", [](const Vocabulary& v) { return v.size(); })
      .def("index_of",
           [](const Vocabulary& v, const std::string& term) { return v.index_of(term); })
      .def_property_readonly("terms", &Vocabulary::terms);

  py::class_<TfidfModel>(m, "TfidfModel")
      .def_static("fit", &TfidfModel::fit, py::arg("dataset"), py::arg("vocabulary"))
      .def("transform",
           [](const TfidfModel& m_, const std::string& doc, const Vocabulary& v) {
             return m_.transform(doc, v);
           },
           py::arg("doc"), py::arg("vocabulary"))
      .def_readonly("idf", &TfidfModel::idf)
      .def_readonly("doc_freq", &TfidfModel::doc_freq);

  py::class_<EmbeddingMatrix>(m, "EmbeddingMatrix")
      .def_readonly("dim", &EmbeddingMatrix::dim)
      .def("rows", &EmbeddingMatrix::rows)
      .def("input_row", [](const EmbeddingMatrix& e, std::size_t i) {
        auto row = e.input_row(i);
        return std::vector<double>(row.begin(), row.end());
      });

  m.def(
      "train_word2vec",
      [](const Dataset& d, const Vocabulary& v, std::size_t dim, std::size_t window,
         std::size_t negatives, std::size_t epochs, double lr0, std::uint64_t seed) {
        Word2VecConfig cfg{dim, window, negatives, epochs, lr0, seed};
        Word2VecResult r = train_word2vec(d, v, cfg);
        return py::make_tuple(std::move(r.embeddings), r.epoch_losses);
      },
      py::arg("dataset"), py::arg("vocabulary"), py::arg("dim") = 300, py::arg("window") = 5,
      py::arg("negatives") = 5, py::arg("epochs") = 15, py::arg("lr0") = 0.025, py::arg("seed") = 1);

  py::class_<Doc2VecModel>(m, "Doc2VecModel")
      .def_readonly("dim", &Doc2VecModel::dim)
      .def_readonly("epoch_losses", &Doc2VecModel::epoch_losses)
      .def("doc_vector", [](const Doc2VecModel& m_, std::size_t i) {
        auto row = m_.doc_row(i);
        return std::vector<double>(row.begin(), row.end());
      });

  m.def(
      "train_doc2vec",
      [](const Dataset& d, const Vocabulary& v, std::size_t dim, std::size_t negatives,
         std::size_t epochs, double lr0, std::uint64_t seed) {
        return train_doc2vec(d, v, Doc2VecConfig{dim, negatives, epochs, lr0, seed});
      },
      py::arg("dataset"), py::arg("vocabulary"), py::arg("dim") = 30, py::arg("negatives") = 5,
      py::arg("epochs") = 20, py::arg("lr0") = 0.025, py::arg("seed") = 1);
  m.def("infer_doc", &infer_doc, py::arg("model"), py::arg("doc"), py::arg("vocabulary"),
        py::arg("steps") = 50, py::arg("seed") = 1);

  m.def(
      "onehot_sequence",
      [](const std::string& doc, const Vocabulary& v) { return onehot_sequence(doc, v).indices; },
      py::arg("doc"), py::arg("vocabulary"));
  m.def("embed_sequence", &embed_sequence, py::arg("doc"), py::arg("embeddings"),
        py::arg("vocabulary"));

  m.def(
      "stratified_split",
      [](const Dataset& d, double ratio, std::uint64_t seed) {
        SplitResult s = stratified_split(d, ratio, seed);
        return py::make_tuple(std::move(s.train), std::move(s.test));
      },
      py::arg("dataset"), py::arg("ratio") = 0.9, py::arg("seed") = 1);

  m.def(
      "weighted_hamming_score",
      [](const std::vector<std::vector<int>>& pred, const std::vector<std::vector<int>>& truth,
         double w1, double w0) {
        return weighted_hamming_score(matrix_from_lists(pred), matrix_from_lists(truth), w1, w0);
      },
      py::arg("pred"), py::arg("truth"), py::arg("w1") = 0.82, py::arg("w0") = 0.18);
  m.def(
      "avg_prf",
      [](const std::vector<std::vector<int>>& pred, const std::vector<std::vector<int>>& truth) {
        const Prf p = avg_prf(matrix_from_lists(pred), matrix_from_lists(truth));
        return py::make_tuple(p.precision, p.recall, p.f1);
      },
      py::arg("pred"), py::arg("truth"));
  m.def(
      "avg_ones",
      [](const std::vector<std::vector<int>>& pred) { return avg_ones(matrix_from_lists(pred)); },
      py::arg("pred"));

  m.def("ffnn_param_count", &ffnn_param_count, py::arg("input_dim"), py::arg("hidden_dim") = 16);
  m.def("lstm_param_count", &lstm_param_count, py::arg("input_dim"), py::arg("hidden_dim") = 16);

  py::class_<Pipeline>(m, "Pipeline")
      .def_static(
          "fit",
          [](const Dataset& train, const std::optional<Dataset>& holdout, const TaxonomyMap& tax,
             const std::string& representation, const std::string& model, const py::kwargs& kwargs) {
            const PipelineConfig cfg = config_from_kwargs(representation, model, kwargs);
            return Pipeline::fit(train, holdout ? &*holdout : nullptr, tax, cfg);
          },
          py::arg("train"), py::arg("holdout"), py::arg("taxonomy"), py::arg("representation"),
          py::arg("model"))
      .def("predict",
           [](const Pipeline& p, const Dataset& d) {
             std::vector<std::vector<int>> out;
             for (const LabelVector& v : p.predict(d))
               out.emplace_back(v.bits.begin(), v.bits.end());
             return out;
           },
           py::arg("dataset"))
      .def("predict_tags", &Pipeline::predict_tags, py::arg("raw_text"))
      .def("evaluate",
           [](const Pipeline& p, const Dataset& test) { return report_to_dict(p.evaluate(test)); },
           py::arg("test"))
      .def("save", &Pipeline::save, py::arg("path"))
      .def_static("load", &Pipeline::load, py::arg("path"));

  m.def(
      "run_benchmark",
      [](const Dataset& mapped, const TaxonomyMap& tax, double ratio, const std::string& holdout,
         const py::kwargs& kwargs) {
        RunConfig rc;
        for (auto item : kwargs)
          apply_config_entry(rc, py::cast<std::string>(item.first),
                             py::cast<std::string>(py::str(item.second)));
        const std::vector<BenchmarkRow> rows = run_benchmark(
            mapped, tax, rc.pipeline_config(), ratio, holdout_from_string(holdout), rc.learning_rate);
        py::list out;
        for (const BenchmarkRow& r : rows) {
          py::dict entry = report_to_dict(r.report);
          entry["model"] = r.name;
          out.append(entry);
        }
        return out;
      },
      py::arg("dataset"), py::arg("taxonomy"), py::arg("ratio") = 0.9, py::arg("holdout") = "carved");

  py::register_exception<DataError>(m, "DataError");
  py::register_exception<UsageError>(m, "UsageError");
}
