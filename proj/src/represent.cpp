#include "tagpred/represent.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "tagpred/binio.hpp"
#include "tagpred/errors.hpp"
#include "tagpred/preprocess.hpp"
#include "tagpred/rng.hpp"

namespace tagpred {

namespace {

constexpr char kEmbeddingMagic[4] = {'T', 'G', 'E', 'M'};
constexpr std::uint32_t kEmbeddingVersion = 1;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Cumulative unigram^0.75 table for negative sampling.
class NegativeSampler {
 public:
  explicit NegativeSampler(const std::vector<std::size_t>& counts) {
    cumulative_.reserve(counts.size());
    double total = 0.0;
    for (std::size_t c : counts) {
      total += std::pow(static_cast<double>(c), 0.75);
      cumulative_.push_back(total);
    }
  }

  int draw(Rng& rng) const {
    const double u = rng.next_double() * cumulative_.back();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    if (it == cumulative_.end()) --it;
    return static_cast<int>(it - cumulative_.begin());
  }

 private:
  std::vector<double> cumulative_;
};

std::vector<std::size_t> unigram_counts(const std::vector<std::vector<int>>& docs, std::size_t v_size) {
  std::vector<std::size_t> counts(v_size, 0);
  for (const auto& doc : docs)
    for (int idx : doc) ++counts[static_cast<std::size_t>(idx)];
  return counts;
}

// One skip-gram negative-sampling update: center vector `center` against the
// positive output row `positive` plus `negatives` sampled rows. Returns the
// pair loss. Used by both Word2Vec (center = word) and PV-DBOW (center = doc).
double sgns_update(std::span<double> center, std::vector<double>& output, std::size_t dim,
                   int positive, const NegativeSampler& sampler, std::size_t negatives, double lr,
                   Rng& rng, std::vector<double>& center_grad) {
  center_grad.assign(dim, 0.0);
  double loss = 0.0;
  auto one = [&](int target, double label) {
    double* out_row = &output[static_cast<std::size_t>(target) * dim];
    double dot = 0.0;
    for (std::size_t k = 0; k < dim; ++k) dot += center[k] * out_row[k];
    const double score = sigmoid(dot);
    const double g = (label - score) * lr;
    for (std::size_t k = 0; k < dim; ++k) {
      center_grad[k] += g * out_row[k];
      out_row[k] += g * center[k];
    }
    loss += label > 0.5 ? -std::log(std::max(score, 1e-12))
                        : -std::log(std::max(1.0 - score, 1e-12));
  };
  one(positive, 1.0);
  for (std::size_t s = 0; s < negatives; ++s) {
    const int neg = sampler.draw(rng);
    if (neg == positive) continue;  // skip accidental positives
    one(neg, 0.0);
  }
  for (std::size_t k = 0; k < dim; ++k) center[k] += center_grad[k];
  return loss;
}

}  // namespace

Vocabulary Vocabulary::build(const Dataset& d) {
  Vocabulary v;
  for (const Problem& p : d.problems) {
    for (std::string_view tok : tokenize(p.text)) {
      std::string key(tok);
      if (v.term_to_index_.emplace(key, static_cast<int>(v.index_to_term_.size())).second)
        v.index_to_term_.push_back(std::move(key));
    }
  }
  if (v.index_to_term_.empty())
    throw std::invalid_argument("build_vocabulary: corpus has no tokens");
  return v;
}

std::optional<int> Vocabulary::index_of(std::string_view term) const {
  auto it = term_to_index_.find(term);
  if (it == term_to_index_.end()) return std::nullopt;
  return it->second;
}

std::vector<int> Vocabulary::token_indices(std::string_view doc) const {
  std::vector<int> out;
  for (std::string_view tok : tokenize(doc)) {
    auto it = term_to_index_.find(tok);
    if (it != term_to_index_.end()) out.push_back(it->second);
  }
  return out;
}

void Vocabulary::write(std::ostream& os) const {
  binio::write_u32(os, static_cast<std::uint32_t>(index_to_term_.size()));
  for (const std::string& t : index_to_term_) binio::write_string(os, t);
}

Vocabulary Vocabulary::read(std::istream& is) {
  Vocabulary v;
  const std::uint32_t n = binio::read_u32(is);
  v.index_to_term_.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    std::string t = binio::read_string(is);
    v.term_to_index_.emplace(t, static_cast<int>(i));
    v.index_to_term_.push_back(std::move(t));
  }
  return v;
}

TfidfModel TfidfModel::fit(const Dataset& d, const Vocabulary& v) {
  TfidfModel m;
  m.n_docs = d.problems.size();
  m.doc_freq.assign(v.size(), 0);
  for (const Problem& p : d.problems) {
    std::vector<int> idx = v.token_indices(p.text);
    std::sort(idx.begin(), idx.end());
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    for (int i : idx) ++m.doc_freq[static_cast<std::size_t>(i)];
  }
  m.idf.resize(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    m.idf[i] = std::log((1.0 + static_cast<double>(m.n_docs)) /
                        (1.0 + static_cast<double>(m.doc_freq[i]))) +
               1.0;
  return m;
}

std::vector<double> TfidfModel::transform(std::string_view doc, const Vocabulary& v) const {
  std::vector<double> out(v.size(), 0.0);
  for (int i : v.token_indices(doc)) out[static_cast<std::size_t>(i)] += 1.0;
  double norm_sq = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] *= idf[i];
    norm_sq += out[i] * out[i];
  }
  if (norm_sq > 0.0) {
    const double inv = 1.0 / std::sqrt(norm_sq);
    for (double& x : out) x *= inv;
  }
  return out;
}

void TfidfModel::write(std::ostream& os) const {
  binio::write_u32(os, static_cast<std::uint32_t>(n_docs));
  binio::write_u32(os, static_cast<std::uint32_t>(doc_freq.size()));
  for (std::size_t df : doc_freq) binio::write_u32(os, static_cast<std::uint32_t>(df));
}

TfidfModel TfidfModel::read(std::istream& is) {
  TfidfModel m;
  m.n_docs = binio::read_u32(is);
  const std::uint32_t n = binio::read_u32(is);
  m.doc_freq.resize(n);
  m.idf.resize(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    m.doc_freq[i] = binio::read_u32(is);
    m.idf[i] = std::log((1.0 + static_cast<double>(m.n_docs)) /
                        (1.0 + static_cast<double>(m.doc_freq[i]))) +
               1.0;
  }
  return m;
}

std::vector<double> OneHotSequence::vector_at(std::size_t step) const {
  std::vector<double> v(dim, 0.0);
  v[static_cast<std::size_t>(indices.at(step))] = 1.0;
  return v;
}

OneHotSequence onehot_sequence(std::string_view doc, const Vocabulary& v) {
  OneHotSequence seq;
  seq.dim = v.size();
  seq.indices = v.token_indices(doc);
  return seq;
}

void EmbeddingMatrix::write(std::ostream& os) const {
  binio::write_magic(os, kEmbeddingMagic);
  binio::write_u32(os, kEmbeddingVersion);
  binio::write_u32(os, static_cast<std::uint32_t>(rows()));
  binio::write_u32(os, static_cast<std::uint32_t>(dim));
  binio::write_f64s(os, input_vectors);
  binio::write_f64s(os, output_vectors);
}

EmbeddingMatrix EmbeddingMatrix::read(std::istream& is) {
  binio::expect_magic(is, kEmbeddingMagic, "TGEM embedding");
  const std::uint32_t version = binio::read_u32(is);
  if (version != kEmbeddingVersion)
    throw DataError("unsupported TGEM version " + std::to_string(version));
  const std::uint32_t rows = binio::read_u32(is);
  const std::uint32_t dim = binio::read_u32(is);
  EmbeddingMatrix e;
  e.dim = dim;
  e.input_vectors = binio::read_f64s(is, static_cast<std::size_t>(rows) * dim);
  e.output_vectors = binio::read_f64s(is, static_cast<std::size_t>(rows) * dim);
  return e;
}

void EmbeddingMatrix::save(const std::filesystem::path& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write embedding file: " + path.string());
  write(os);
}

EmbeddingMatrix EmbeddingMatrix::load(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open embedding file: " + path.string());
  return read(is);
}

Word2VecResult train_word2vec(const Dataset& d, const Vocabulary& v, const Word2VecConfig& cfg) {
  if (d.problems.empty()) throw std::invalid_argument("train_word2vec: empty corpus");
  std::vector<std::vector<int>> docs;
  docs.reserve(d.problems.size());
  std::size_t total_tokens = 0;
  for (const Problem& p : d.problems) {
    docs.push_back(v.token_indices(p.text));
    total_tokens += docs.back().size();
  }
  if (total_tokens == 0) throw std::invalid_argument("train_word2vec: corpus has no tokens");

  const std::size_t V = v.size();
  const std::size_t dim = cfg.dim;
  Rng rng(cfg.seed);

  Word2VecResult result;
  result.embeddings.dim = dim;
  result.embeddings.input_vectors.resize(V * dim);
  result.embeddings.output_vectors.assign(V * dim, 0.0);
  for (double& x : result.embeddings.input_vectors)
    x = rng.uniform(-0.5 / static_cast<double>(dim), 0.5 / static_cast<double>(dim));

  const NegativeSampler sampler(unigram_counts(docs, V));
  const double total_steps = static_cast<double>(cfg.epochs) * static_cast<double>(total_tokens);
  std::size_t processed = 0;
  std::vector<double> center_grad(dim);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    double epoch_loss = 0.0;
    std::size_t epoch_pairs = 0;
    for (const auto& doc : docs) {
      for (std::size_t pos = 0; pos < doc.size(); ++pos) {
        const double lr =
            std::max(cfg.lr0 * (1.0 - static_cast<double>(processed) / total_steps), cfg.lr0 * 1e-4);
        ++processed;
        // Dynamic context size in [1, window], as in the original formulation.
        const std::size_t b = 1 + rng.uniform_index(cfg.window);
        const std::size_t lo = pos >= b ? pos - b : 0;
        const std::size_t hi = std::min(pos + b, doc.size() - 1);
        for (std::size_t ctx = lo; ctx <= hi; ++ctx) {
          if (ctx == pos) continue;
          std::span<double> center(&result.embeddings.input_vectors[static_cast<std::size_t>(doc[pos]) * dim],
                                   dim);
          epoch_loss += sgns_update(center, result.embeddings.output_vectors, dim, doc[ctx], sampler,
                                    cfg.negatives, lr, rng, center_grad);
          ++epoch_pairs;
        }
      }
    }
    result.epoch_losses.push_back(epoch_pairs > 0 ? epoch_loss / static_cast<double>(epoch_pairs) : 0.0);
  }
  return result;
}

Doc2VecModel train_doc2vec(const Dataset& d, const Vocabulary& v, const Doc2VecConfig& cfg) {
  if (d.problems.empty()) throw std::invalid_argument("train_doc2vec: empty corpus");
  std::vector<std::vector<int>> docs;
  docs.reserve(d.problems.size());
  std::size_t total_tokens = 0;
  for (const Problem& p : d.problems) {
    docs.push_back(v.token_indices(p.text));
    total_tokens += docs.back().size();
  }
  if (total_tokens == 0) throw std::invalid_argument("train_doc2vec: corpus has no tokens");

  const std::size_t V = v.size();
  const std::size_t dim = cfg.dim;
  Rng rng(cfg.seed);

  Doc2VecModel m;
  m.dim = dim;
  m.n_docs = docs.size();
  m.negatives = cfg.negatives;
  m.doc_vectors.resize(docs.size() * dim);
  m.word_output.assign(V * dim, 0.0);
  m.unigram = unigram_counts(docs, V);
  for (double& x : m.doc_vectors)
    x = rng.uniform(-0.5 / static_cast<double>(dim), 0.5 / static_cast<double>(dim));

  const NegativeSampler sampler(m.unigram);
  const double total_steps = static_cast<double>(cfg.epochs) * static_cast<double>(total_tokens);
  std::size_t processed = 0;
  std::vector<double> center_grad(dim);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    double epoch_loss = 0.0;
    std::size_t epoch_pairs = 0;
    for (std::size_t di = 0; di < docs.size(); ++di) {
      std::span<double> doc_vec(&m.doc_vectors[di * dim], dim);
      for (int word : docs[di]) {
        const double lr =
            std::max(cfg.lr0 * (1.0 - static_cast<double>(processed) / total_steps), cfg.lr0 * 1e-4);
        ++processed;
        epoch_loss +=
            sgns_update(doc_vec, m.word_output, dim, word, sampler, cfg.negatives, lr, rng, center_grad);
        ++epoch_pairs;
      }
    }
    m.epoch_losses.push_back(epoch_pairs > 0 ? epoch_loss / static_cast<double>(epoch_pairs) : 0.0);
  }
  return m;
}

std::vector<double> infer_doc(const Doc2VecModel& m, std::string_view doc, const Vocabulary& v,
                              std::size_t steps, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> vec(m.dim);
  for (double& x : vec) x = rng.uniform(-0.5 / static_cast<double>(m.dim), 0.5 / static_cast<double>(m.dim));

  const std::vector<int> tokens = v.token_indices(doc);
  if (tokens.empty()) return vec;

  // Word output weights stay frozen; only the fresh document vector moves.
  const NegativeSampler sampler(m.unigram);
  std::vector<double> center_grad(m.dim);
  const std::size_t total = steps * tokens.size();
  std::size_t processed = 0;
  const double lr0 = 0.025;

  for (std::size_t s = 0; s < steps; ++s) {
    for (int word : tokens) {
      const double lr =
          std::max(lr0 * (1.0 - static_cast<double>(processed) / static_cast<double>(total)), lr0 * 1e-4);
      ++processed;
      center_grad.assign(m.dim, 0.0);
      auto one = [&](int target, double label) {
        const double* out_row = &m.word_output[static_cast<std::size_t>(target) * m.dim];
        double dot = 0.0;
        for (std::size_t k = 0; k < m.dim; ++k) dot += vec[k] * out_row[k];
        const double g = (label - sigmoid(dot)) * lr;
        for (std::size_t k = 0; k < m.dim; ++k) center_grad[k] += g * out_row[k];
      };
      one(word, 1.0);
      for (std::size_t n = 0; n < m.negatives; ++n) {
        const int neg = sampler.draw(rng);
        if (neg == word) continue;
        one(neg, 0.0);
      }
      for (std::size_t k = 0; k < m.dim; ++k) vec[k] += center_grad[k];
    }
  }
  return vec;
}

void Doc2VecModel::write(std::ostream& os) const {
  binio::write_u32(os, static_cast<std::uint32_t>(dim));
  binio::write_u32(os, static_cast<std::uint32_t>(n_docs));
  binio::write_u32(os, static_cast<std::uint32_t>(negatives));
  binio::write_u32(os, static_cast<std::uint32_t>(unigram.size()));
  binio::write_f64s(os, doc_vectors);
  binio::write_f64s(os, word_output);
  for (std::size_t c : unigram) binio::write_u32(os, static_cast<std::uint32_t>(c));
}

Doc2VecModel Doc2VecModel::read(std::istream& is) {
  Doc2VecModel m;
  m.dim = binio::read_u32(is);
  m.n_docs = binio::read_u32(is);
  m.negatives = binio::read_u32(is);
  const std::uint32_t V = binio::read_u32(is);
  m.doc_vectors = binio::read_f64s(is, m.n_docs * m.dim);
  m.word_output = binio::read_f64s(is, static_cast<std::size_t>(V) * m.dim);
  m.unigram.resize(V);
  for (std::uint32_t i = 0; i < V; ++i) m.unigram[i] = binio::read_u32(is);
  return m;
}

std::vector<std::vector<double>> embed_sequence(std::string_view doc, const EmbeddingMatrix& e,
                                                const Vocabulary& v) {
  std::vector<std::vector<double>> seq;
  for (int idx : v.token_indices(doc)) {
    auto row = e.input_row(static_cast<std::size_t>(idx));
    seq.emplace_back(row.begin(), row.end());
  }
  return seq;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("cosine_similarity: size mismatch");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / std::sqrt(na * nb);
}

}  // namespace tagpred
