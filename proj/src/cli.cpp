#include "tagpred/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "tagpred/errors.hpp"

namespace tagpred {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("");
    return v;
  } catch (...) {
    throw UsageError("config key '" + key + "': expected a number, got '" + value + "'");
  }
}

std::size_t parse_count(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(value, &pos);
    if (pos != value.size() || v < 0) throw std::invalid_argument("");
    return static_cast<std::size_t>(v);
  } catch (...) {
    throw UsageError("config key '" + key + "': expected a non-negative integer, got '" + value + "'");
  }
}

}  // namespace

PipelineConfig RunConfig::pipeline_config() const {
  PipelineConfig cfg;
  cfg.representation = representation;
  if (model) cfg.model = *model;
  cfg.train = train;
  cfg.train.learning_rate = learning_rate ? *learning_rate : default_learning_rate(representation);
  cfg.word2vec = word2vec;
  cfg.doc2vec = doc2vec;
  cfg.forest = forest;
  cfg.doc2vec_infer_steps = doc2vec_infer_steps;
  cfg.word2vec.seed = cfg.doc2vec.seed = cfg.forest.seed = cfg.tree.seed = train.seed;
  return cfg;
}

void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "representation") cfg.representation = representation_from_string(value);
  else if (key == "model") cfg.model = model_kind_from_string(value);
  else if (key == "learning_rate") cfg.learning_rate = parse_double(key, value);
  else if (key == "batch_size") cfg.train.batch_size = parse_count(key, value);
  else if (key == "max_epochs") cfg.train.max_epochs = parse_count(key, value);
  else if (key == "patience") cfg.train.patience = parse_count(key, value);
  else if (key == "w1") cfg.train.w1 = parse_double(key, value);
  else if (key == "w0") cfg.train.w0 = parse_double(key, value);
  else if (key == "seed") cfg.train.seed = parse_count(key, value);
  else if (key == "ratio") cfg.ratio = parse_double(key, value);
  else if (key == "holdout") cfg.holdout = holdout_from_string(value);
  else if (key == "min_word_occurrences") cfg.min_word_occurrences = parse_count(key, value);
  else if (key == "stopwords_path") cfg.stopwords_path = value;
  else if (key == "dataset_path") cfg.dataset_path = value;
  else if (key == "taxonomy_path") cfg.taxonomy_path = value;
  else if (key == "model_path") cfg.model_path = value;
  else if (key == "report_path") cfg.report_path = value;
  else if (key == "n_trees") cfg.forest.n_trees = parse_count(key, value);
  else if (key == "max_features") cfg.forest.max_features = parse_count(key, value);
  else if (key == "threads") cfg.forest.n_threads = static_cast<unsigned>(parse_count(key, value));
  else if (key == "word2vec_dim") cfg.word2vec.dim = parse_count(key, value);
  else if (key == "word2vec_window") cfg.word2vec.window = parse_count(key, value);
  else if (key == "word2vec_negatives") cfg.word2vec.negatives = parse_count(key, value);
  else if (key == "word2vec_epochs") cfg.word2vec.epochs = parse_count(key, value);
  else if (key == "doc2vec_dim") cfg.doc2vec.dim = parse_count(key, value);
  else if (key == "doc2vec_negatives") cfg.doc2vec.negatives = parse_count(key, value);
  else if (key == "doc2vec_epochs") cfg.doc2vec.epochs = parse_count(key, value);
  else if (key == "doc2vec_infer_steps") cfg.doc2vec_infer_steps = parse_count(key, value);
  else
    throw UsageError(
        "unknown config key '" + key +
        "'; accepted keys: representation, model, learning_rate, batch_size, max_epochs, patience, "
        "w1, w0, seed, ratio, holdout, min_word_occurrences, stopwords_path, dataset_path, "
        "taxonomy_path, model_path, report_path, n_trees, max_features, threads, word2vec_dim, "
        "word2vec_window, word2vec_negatives, word2vec_epochs, doc2vec_dim, doc2vec_negatives, "
        "doc2vec_epochs, doc2vec_infer_steps");
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file: " + path.string());
  RunConfig cfg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto comment = line.find('#');
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError("config line " + std::to_string(lineno) + ": expected key=value, got '" + line + "'");
    apply_config_entry(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

namespace cli {

namespace {

CleaningConfig cleaning_config(const RunConfig& cfg) {
  CleaningConfig cc;
  cc.min_word_occurrences = cfg.min_word_occurrences;
  if (cfg.stopwords_path) {
    std::ifstream in(*cfg.stopwords_path);
    if (!in) throw DataError("cannot open stopwords file: " + *cfg.stopwords_path);
    cc.stopwords.clear();
    std::string word;
    while (std::getline(in, word)) {
      word = trim(word);
      if (!word.empty()) cc.stopwords.push_back(word);
    }
  }
  return cc;
}

TaxonomyMap taxonomy_for(const RunConfig& cfg) {
  if (cfg.taxonomy_path) return TaxonomyMap::load(*cfg.taxonomy_path);
  return TaxonomyMap::builtin();
}

struct CommonFlags {
  std::string config_path;
  std::string input, output, taxonomy, model_out, report, test_path, history;
  std::string representation, model, holdout;
  std::int64_t n = 1000;
  std::optional<std::uint64_t> seed;
  std::optional<double> ratio;
  std::optional<double> learning_rate;
  std::string text;
};

RunConfig merge(const CommonFlags& f) {
  RunConfig cfg;
  if (!f.config_path.empty()) cfg = load_config(f.config_path);
  if (!f.representation.empty()) cfg.representation = representation_from_string(f.representation);
  if (!f.model.empty()) cfg.model = model_kind_from_string(f.model);
  if (!f.holdout.empty()) cfg.holdout = holdout_from_string(f.holdout);
  if (f.seed) cfg.train.seed = *f.seed;
  if (f.ratio) cfg.ratio = *f.ratio;
  if (f.learning_rate) cfg.learning_rate = *f.learning_rate;
  if (!f.input.empty()) cfg.dataset_path = f.input;
  if (!f.taxonomy.empty()) cfg.taxonomy_path = f.taxonomy;
  if (!f.model_out.empty()) cfg.model_path = f.model_out;
  if (!f.report.empty()) cfg.report_path = f.report;
  return cfg;
}

Dataset required_dataset(const RunConfig& cfg) {
  if (!cfg.dataset_path) throw UsageError("missing input dataset (--input or dataset_path)");
  return load_dataset(*cfg.dataset_path);
}

int do_run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"strategy-tag prediction for programming-challenge statements", "tagpred"};
  app.require_subcommand(1);

  CommonFlags f;

  auto add_common = [&](CLI::App* sub, bool with_model_flags) {
    sub->add_option("--config", f.config_path, "key=value config file");
    sub->add_option("--seed", f.seed, "master RNG seed");
    if (with_model_flags) {
      sub->add_option("--representation", f.representation, "tfidf|onehot|word2vec|doc2vec");
      sub->add_option("--model", f.model, "random|tree|forest|ffnn|lstm");
      sub->add_option("--holdout", f.holdout, "test|carved (early-stopping set)");
      sub->add_option("--learning-rate", f.learning_rate, "override the per-pairing default");
    }
  };

  CLI::App* synth = app.add_subcommand("synth", "generate a seeded synthetic corpus");
  synth->add_option("--n", f.n, "number of problems")->required();
  synth->add_option("--out", f.output, "output dataset path")->required();
  synth->add_option("--taxonomy", f.taxonomy, "taxonomy JSON (default: built-in)");
  add_common(synth, false);

  CLI::App* stats = app.add_subcommand("stats", "descriptive statistics of a dataset");
  stats->add_option("--input", f.input, "dataset path")->required();

  CLI::App* preprocess = app.add_subcommand("preprocess", "clean, dedup and rare-word-filter a dataset");
  preprocess->add_option("--input", f.input, "raw dataset path")->required();
  preprocess->add_option("--output", f.output, "cleaned dataset path")->required();
  add_common(preprocess, false);

  CLI::App* taxonomy = app.add_subcommand("taxonomy", "map original tags to the final 9 labels");
  taxonomy->add_option("--input", f.input, "dataset path")->required();
  taxonomy->add_option("--output", f.output, "mapped dataset path")->required();
  taxonomy->add_option("--taxonomy", f.taxonomy, "taxonomy JSON (default: built-in)");
  bool print_freq = false, print_corr = false;
  taxonomy->add_flag("--frequencies", print_freq, "print per-tag frequencies");
  taxonomy->add_flag("--correlation", print_corr, "print the tag correlation matrix");

  CLI::App* split = app.add_subcommand("split", "stratified train/test split");
  split->add_option("--input", f.input, "dataset path")->required();
  std::string train_out, test_out;
  split->add_option("--train-out", train_out, "train output path")->required();
  split->add_option("--test-out", test_out, "test output path")->required();
  split->add_option("--ratio", f.ratio, "train fraction (default 0.9)");
  add_common(split, false);

  CLI::App* train = app.add_subcommand("train", "fit a representation+model pipeline");
  train->add_option("--input", f.input, "training dataset (tags already mapped)")->required();
  train->add_option("--test", f.test_path, "test dataset (required with --holdout test)");
  train->add_option("--model-out", f.model_out, "output model bundle")->required();
  train->add_option("--history", f.history, "training history CSV output");
  train->add_option("--taxonomy", f.taxonomy, "taxonomy JSON (default: built-in)");
  add_common(train, true);

  CLI::App* evaluate = app.add_subcommand("evaluate", "evaluate a trained pipeline on a dataset");
  evaluate->add_option("--model", f.model_out, "model bundle path")->required();
  evaluate->add_option("--input", f.input, "test dataset path")->required();
  evaluate->add_option("--report", f.report, "metrics report JSON output");

  CLI::App* predict = app.add_subcommand("predict", "predict tags for one raw problem statement");
  predict->add_option("--model", f.model_out, "model bundle path")->required();
  predict->add_option("--text", f.text, "problem statement text")->required();

  CLI::App* benchmark = app.add_subcommand("benchmark", "run all six pairings and print the comparison");
  benchmark->add_option("--input", f.input, "dataset path (tags already mapped)");
  benchmark->add_option("--report", f.report, "report JSON output");
  benchmark->add_option("--taxonomy", f.taxonomy, "taxonomy JSON (default: built-in)");
  benchmark->add_option("--ratio", f.ratio, "train fraction (default 0.9)");
  add_common(benchmark, true);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return 1;
  }

  if (synth->parsed()) {
    RunConfig cfg = merge(f);
    const TaxonomyMap tax = taxonomy_for(cfg);
    const Dataset d = generate_synthetic(f.n, tax, cfg.train.seed);
    save_dataset(d, f.output);
    out << "wrote " << d.size() << " problems to " << f.output << "\n";
    return 0;
  }

  if (stats->parsed()) {
    const Dataset d = load_dataset(f.input);
    const StatsReport r = dataset_stats(d);
    out << "problems: " << r.problem_count << "\n";
    out << "avg words/problem: " << r.avg_words_per_problem << "\n";
    out << "avg tags/problem: " << r.avg_tags_per_problem << "\n";
    if (!r.per_tag_avg_words.empty()) {
      out << "avg words per tag:\n";
      for (const auto& [tag, words] : r.per_tag_avg_words)
        out << "  " << tag << ": " << words << "\n";
    }
    return 0;
  }

  if (preprocess->parsed()) {
    RunConfig cfg = merge(f);
    const Dataset d = required_dataset(cfg);
    const Dataset cleaned = preprocess_dataset(d, cleaning_config(cfg));
    save_dataset(cleaned, f.output);
    out << "wrote " << cleaned.size() << " problems to " << f.output << "\n";
    return 0;
  }

  if (taxonomy->parsed()) {
    RunConfig cfg = merge(f);
    const TaxonomyMap tax = taxonomy_for(cfg);
    const Dataset d = required_dataset(cfg);
    if (print_corr) {
      const CorrelationMatrix corr = tag_correlation(d);
      out << "tag correlation (" << corr.tags.size() << " tags):\n";
      for (std::size_t i = 0; i < corr.tags.size(); ++i) {
        out << "  " << corr.tags[i] << ":";
        for (std::size_t j = 0; j < corr.tags.size(); ++j) out << ' ' << corr.at(i, j);
        out << "\n";
      }
    }
    const Dataset mapped = apply_taxonomy(d, tax);
    if (print_freq) {
      out << "tag frequencies:\n";
      for (const auto& [tag, count] : tag_frequencies(mapped))
        out << "  " << tag << ": " << count << "\n";
    }
    save_dataset(mapped, f.output);
    out << "wrote " << mapped.size() << " problems to " << f.output << "\n";
    return 0;
  }

  if (split->parsed()) {
    RunConfig cfg = merge(f);
    const Dataset d = required_dataset(cfg);
    const SplitResult s = stratified_split(d, cfg.ratio, cfg.train.seed);
    save_dataset(s.train, train_out);
    save_dataset(s.test, test_out);
    out << "train: " << s.train.size() << "  test: " << s.test.size() << "\n";
    return 0;
  }

  if (train->parsed()) {
    RunConfig cfg = merge(f);
    if (!cfg.model) throw UsageError("missing --model (or config key model)");
    const PipelineConfig pc = cfg.pipeline_config();
    validate_pairing(pc.representation, pc.model);
    const TaxonomyMap tax = taxonomy_for(cfg);
    const Dataset data = required_dataset(cfg);

    TrainHistory history;
    Pipeline pipeline = [&] {
      const bool gradient = pc.model == ModelKind::ffnn || pc.model == ModelKind::lstm;
      if (!gradient) return Pipeline::fit(data, nullptr, tax, pc);
      if (cfg.holdout == HoldoutMode::test) {
        if (f.test_path.empty())
          throw UsageError("--holdout test needs --test with the test dataset");
        const Dataset test = load_dataset(f.test_path);
        return Pipeline::fit(data, &test, tax, pc, &history);
      }
      const SplitResult inner = stratified_split(data, 0.9, cfg.train.seed + 1);
      return Pipeline::fit(inner.train, &inner.test, tax, pc, &history);
    }();

    pipeline.save(*cfg.model_path);
    if (!f.history.empty()) history.save_csv(f.history);
    out << "model written to " << *cfg.model_path;
    if (history.epochs() > 0)
      out << " (best epoch " << history.best_epoch + 1 << "/" << history.epochs() << ")";
    out << "\n";
    return 0;
  }

  if (evaluate->parsed()) {
    const Pipeline pipeline = Pipeline::load(f.model_out);
    const Dataset test = load_dataset(f.input);
    BenchmarkRow row;
    row.name = pipeline.representation()
                   ? to_string(*pipeline.representation()) + "+" + to_string(pipeline.model_kind())
                   : to_string(pipeline.model_kind());
    row.report = pipeline.evaluate(test);
    if (!f.report.empty()) {
      std::ofstream os(f.report, std::ios::binary);
      if (!os) throw DataError("cannot write report file: " + f.report);
      os << row.report.to_json() << "\n";
    }
    out << render_benchmark_table({row});
    return 0;
  }

  if (predict->parsed()) {
    const Pipeline pipeline = Pipeline::load(f.model_out);
    for (const std::string& tag : pipeline.predict_tags(f.text)) out << tag << "\n";
    return 0;
  }

  if (benchmark->parsed()) {
    RunConfig cfg = merge(f);
    const TaxonomyMap tax = taxonomy_for(cfg);
    const Dataset data = required_dataset(cfg);
    const std::vector<BenchmarkRow> rows =
        run_benchmark(data, tax, cfg.pipeline_config(), cfg.ratio, cfg.holdout, cfg.learning_rate);
    out << render_benchmark_table(rows);
    if (cfg.report_path) {
      std::ofstream os(*cfg.report_path, std::ios::binary);
      if (!os) throw DataError("cannot write report file: " + *cfg.report_path);
      os << benchmark_report_json(rows);
    }
    return 0;
  }

  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    return do_run(args, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace cli

}  // namespace tagpred
