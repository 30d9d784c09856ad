#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tagpred/corpus.hpp"

namespace tagpred {

// Dense term index, ordered by first occurrence in the corpus.
class Vocabulary {
 public:
  static Vocabulary build(const Dataset& d);

  std::optional<int> index_of(std::string_view term) const;
  const std::string& term(std::size_t index) const { return index_to_term_.at(index); }
  const std::vector<std::string>& terms() const { return index_to_term_; }
  std::size_t size() const { return index_to_term_.size(); }

  // In-vocabulary token indices of a document, in order; OOV tokens skipped.
  std::vector<int> token_indices(std::string_view doc) const;

  void write(std::ostream& os) const;
  static Vocabulary read(std::istream& is);

 private:
  // Transparent hashing so lookups by string_view do not allocate.
  struct TermHash {
    using is_transparent = void;
    std::size_t operator()(std::string_view sv) const { return std::hash<std::string_view>{}(sv); }
  };
  std::unordered_map<std::string, int, TermHash, std::equal_to<>> term_to_index_;
  std::vector<std::string> index_to_term_;
};

// Document-frequency statistics fitted on a training corpus.
// idf(t) = ln((1+n)/(1+df(t))) + 1.
struct TfidfModel {
  std::size_t n_docs = 0;
  std::vector<std::size_t> doc_freq;  // aligned to vocabulary indices
  std::vector<double> idf;

  static TfidfModel fit(const Dataset& d, const Vocabulary& v);

  // tf * idf per term, L2-normalized (the zero vector stays zero).
  std::vector<double> transform(std::string_view doc, const Vocabulary& v) const;

  void write(std::ostream& os) const;
  static TfidfModel read(std::istream& is);
};

// One vector per in-vocabulary token; each has a single 1 at the token index.
struct OneHotSequence {
  std::size_t dim = 0;
  std::vector<int> indices;

  std::size_t length() const { return indices.size(); }
  std::vector<double> vector_at(std::size_t step) const;
};

OneHotSequence onehot_sequence(std::string_view doc, const Vocabulary& v);

// Input and output vectors of a trained embedding, V x dim row-major.
struct EmbeddingMatrix {
  std::size_t dim = 0;
  std::vector<double> input_vectors;
  std::vector<double> output_vectors;

  std::size_t rows() const { return dim == 0 ? 0 : input_vectors.size() / dim; }
  std::span<const double> input_row(std::size_t i) const { return {&input_vectors[i * dim], dim}; }
  std::span<const double> output_row(std::size_t i) const { return {&output_vectors[i * dim], dim}; }

  void write(std::ostream& os) const;  // "TGEM" header, little-endian payload
  static EmbeddingMatrix read(std::istream& is);
  void save(const std::filesystem::path& path) const;
  static EmbeddingMatrix load(const std::filesystem::path& path);
};

struct Word2VecConfig {
  std::size_t dim = 300;
  std::size_t window = 5;
  std::size_t negatives = 5;
  std::size_t epochs = 15;
  double lr0 = 0.025;
  std::uint64_t seed = 1;
};

struct Word2VecResult {
  EmbeddingMatrix embeddings;
  std::vector<double> epoch_losses;  // mean negative-sampling loss per epoch
};

// Skip-gram with negative sampling; negatives drawn from the unigram^0.75
// distribution, learning rate decaying linearly to 1e-4 * lr0.
Word2VecResult train_word2vec(const Dataset& d, const Vocabulary& v, const Word2VecConfig& cfg);

struct Doc2VecConfig {
  std::size_t dim = 30;
  std::size_t negatives = 5;
  std::size_t epochs = 20;
  double lr0 = 0.025;
  std::uint64_t seed = 1;
};

// PV-DBOW state: trained per-document vectors plus the frozen word output
// weights and unigram counts needed to infer vectors for unseen documents.
struct Doc2VecModel {
  std::size_t dim = 0;
  std::size_t n_docs = 0;
  std::size_t negatives = 5;
  std::vector<double> doc_vectors;    // n_docs x dim row-major
  std::vector<double> word_output;    // V x dim row-major
  std::vector<std::size_t> unigram;   // per-term corpus counts
  std::vector<double> epoch_losses;

  std::span<const double> doc_row(std::size_t i) const { return {&doc_vectors[i * dim], dim}; }

  void write(std::ostream& os) const;
  static Doc2VecModel read(std::istream& is);
};

Doc2VecModel train_doc2vec(const Dataset& d, const Vocabulary& v, const Doc2VecConfig& cfg);

// Trains a fresh document vector against the frozen model state. Returns the
// seed-determined initialization unchanged when the document has no
// in-vocabulary tokens.
std::vector<double> infer_doc(const Doc2VecModel& m, std::string_view doc, const Vocabulary& v,
                              std::size_t steps = 50, std::uint64_t seed = 1);

// Per-token input-vector lookup; OOV tokens skipped.
std::vector<std::vector<double>> embed_sequence(std::string_view doc, const EmbeddingMatrix& e,
                                                const Vocabulary& v);

double cosine_similarity(std::span<const double> a, std::span<const double> b);

}  // namespace tagpred
