#include <doctest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "tagpred/corpus.hpp"
#include "tagpred/preprocess.hpp"
#include "tagpred/represent.hpp"
#include "tagpred/taxonomy.hpp"

using namespace tagpred;

namespace {

Dataset docs(const std::vector<std::string>& texts) {
  Dataset d;
  for (const auto& t : texts) d.problems.push_back({t, {}});
  return d;
}

// Independent two-pass tf-idf: count document frequencies over the corpus,
// then weight and normalize one document. Shares nothing with TfidfModel.
std::vector<double> naive_tfidf(const std::vector<std::string>& corpus, const std::string& doc,
                                const std::vector<std::string>& vocab_order) {
  std::map<std::string, int> df;
  for (const auto& text : corpus) {
    std::map<std::string, bool> seen;
    std::istringstream is(text);
    std::string tok;
    while (is >> tok)
      if (!seen[tok]) {
        seen[tok] = true;
        ++df[tok];
      }
  }
  std::map<std::string, int> tf;
  {
    std::istringstream is(doc);
    std::string tok;
    while (is >> tok)
      if (df.count(tok)) ++tf[tok];
  }
  std::vector<double> out(vocab_order.size(), 0.0);
  const double n = static_cast<double>(corpus.size());
  for (std::size_t i = 0; i < vocab_order.size(); ++i) {
    const auto it = tf.find(vocab_order[i]);
    if (it == tf.end()) continue;
    const double idf = std::log((1.0 + n) / (1.0 + df.at(vocab_order[i]))) + 1.0;
    out[i] = it->second * idf;
  }
  double norm = 0.0;
  for (double v : out) norm += v * v;
  if (norm > 0.0)
    for (double& v : out) v /= std::sqrt(norm);
  return out;
}

}  // namespace

TEST_CASE("vocabulary") {
  SUBCASE("unique terms, first-occurrence order") {
    const Vocabulary v = Vocabulary::build(docs({"a b", "b c"}));
    REQUIRE(v.size() == 3);
    CHECK(v.index_of("a") == 0);
    CHECK(v.index_of("b") == 1);
    CHECK(v.index_of("c") == 2);
    CHECK(!v.index_of("zz").has_value());
  }
  SUBCASE("permutation changes indices, not size") {
    const Vocabulary v1 = Vocabulary::build(docs({"a b", "b c"}));
    const Vocabulary v2 = Vocabulary::build(docs({"b c", "a b"}));
    CHECK(v1.size() == v2.size());
    CHECK(v2.index_of("b") == 0);
  }
  SUBCASE("empty corpus is an error") {
    CHECK_THROWS_AS(Vocabulary::build(Dataset{}), std::invalid_argument);
    CHECK_THROWS_AS(Vocabulary::build(docs({"", ""})), std::invalid_argument);
  }
}

TEST_CASE("tfidf") {
  SUBCASE("term present in every doc has idf exactly 1") {
    const Dataset d = docs({"x a", "x b", "x c"});
    const Vocabulary v = Vocabulary::build(d);
    const TfidfModel m = TfidfModel::fit(d, v);
    CHECK(m.idf[*v.index_of("x")] == 1.0);
  }
  SUBCASE("n=3, df=1, tf=2 gives raw weight 2(ln2 + 1)") {
    const Dataset d = docs({"t t u", "u v", "v w"});
    const Vocabulary v = Vocabulary::build(d);
    const TfidfModel m = TfidfModel::fit(d, v);
    const double idf_t = m.idf[*v.index_of("t")];
    CHECK(idf_t == doctest::Approx(std::log(2.0) + 1.0).epsilon(1e-12));
    CHECK(2.0 * idf_t == doctest::Approx(3.3862943611198906).epsilon(1e-12));
  }
  SUBCASE("single distinct in-vocabulary term normalizes to a lone 1") {
    const Dataset d = docs({"a b", "b c"});
    const Vocabulary v = Vocabulary::build(d);
    const TfidfModel m = TfidfModel::fit(d, v);
    const std::vector<double> vec = m.transform("a a a", v);
    CHECK(vec[*v.index_of("a")] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(vec[*v.index_of("b")] == 0.0);
  }
  SUBCASE("matches the naive two-pass oracle on a 5-doc corpus") {
    const std::vector<std::string> corpus = {
        "sum pairs array", "graph shortest path", "sum graph", "array array scan", "path sum pairs"};
    const Dataset d = docs(corpus);
    const Vocabulary v = Vocabulary::build(d);
    const TfidfModel m = TfidfModel::fit(d, v);
    for (const std::string& doc : corpus) {
      const std::vector<double> got = m.transform(doc, v);
      const std::vector<double> want = naive_tfidf(corpus, doc, v.terms());
      REQUIRE(got.size() == want.size());
      for (std::size_t i = 0; i < got.size(); ++i)
        CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
    }
  }
  SUBCASE("idf decreases as df increases") {
    const Dataset d = docs({"a a b c", "a b", "a b c d", "a e"});
    const Vocabulary v = Vocabulary::build(d);
    const TfidfModel m = TfidfModel::fit(d, v);
    for (std::size_t i = 0; i < v.size(); ++i)
      for (std::size_t j = 0; j < v.size(); ++j)
        if (m.doc_freq[i] < m.doc_freq[j]) CHECK(m.idf[i] > m.idf[j]);
  }
  SUBCASE("L2 norm is 0 or 1, entries non-negative") {
    const Dataset d = docs({"a b c", "c d"});
    const Vocabulary v = Vocabulary::build(d);
    const TfidfModel m = TfidfModel::fit(d, v);
    for (const std::string& doc : {std::string("a c d d"), std::string("zz"), std::string("")}) {
      const std::vector<double> vec = m.transform(doc, v);
      double norm = 0.0;
      for (double x : vec) {
        CHECK(x >= 0.0);
        norm += x * x;
      }
      if (norm > 0.0) CHECK(std::sqrt(norm) == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("onehot_sequence") {
  const Vocabulary v = Vocabulary::build(docs({"a b"}));
  SUBCASE("positional lookup") {
    const OneHotSequence s = onehot_sequence("b a b", v);
    CHECK(s.indices == std::vector<int>{1, 0, 1});
    CHECK(s.vector_at(0) == std::vector<double>{0.0, 1.0});
    CHECK(s.vector_at(1) == std::vector<double>{1.0, 0.0});
  }
  SUBCASE("each vector sums to exactly 1") {
    const OneHotSequence s = onehot_sequence("a b a", v);
    for (std::size_t t = 0; t < s.length(); ++t) {
      double sum = 0.0;
      for (double x : s.vector_at(t)) sum += x;
      CHECK(sum == 1.0);
    }
  }
  SUBCASE("all-OOV doc gives an empty sequence") {
    CHECK(onehot_sequence("zz yy", v).length() == 0);
  }
}

TEST_CASE("word2vec") {
  const TaxonomyMap& tax = TaxonomyMap::builtin();

  SUBCASE("degenerate one-token corpus trains to finite vectors") {
    const Dataset d = docs({"w w w w w w"});
    const Vocabulary v = Vocabulary::build(d);
    Word2VecConfig cfg;
    cfg.dim = 8;
    cfg.epochs = 3;
    const Word2VecResult r = train_word2vec(d, v, cfg);
    for (double x : r.embeddings.input_vectors) CHECK(std::isfinite(x));
    for (double x : r.embeddings.output_vectors) CHECK(std::isfinite(x));
  }
  SUBCASE("same seed, identical matrices") {
    const Dataset d = generate_synthetic(60, tax, 5);
    const Vocabulary v = Vocabulary::build(d);
    Word2VecConfig cfg;
    cfg.dim = 16;
    cfg.epochs = 2;
    cfg.seed = 9;
    const Word2VecResult a = train_word2vec(d, v, cfg);
    const Word2VecResult b = train_word2vec(d, v, cfg);
    CHECK(a.embeddings.input_vectors == b.embeddings.input_vectors);
    CHECK(a.embeddings.output_vectors == b.embeddings.output_vectors);
  }
  SUBCASE("empty corpus is an error") {
    CHECK_THROWS_AS(train_word2vec(Dataset{}, Vocabulary::build(docs({"a b"})), {}), std::invalid_argument);
  }
  SUBCASE("planted co-occurring keywords end up closer than non-co-occurring ones") {
    const Dataset d = generate_synthetic(400, tax, 21);
    const Vocabulary v = Vocabulary::build(d);
    Word2VecConfig cfg;
    cfg.dim = 32;
    cfg.epochs = 10;
    cfg.seed = 3;
    const Word2VecResult r = train_word2vec(d, v, cfg);
    const auto row = [&](const std::string& term) {
      return r.embeddings.input_row(static_cast<std::size_t>(*v.index_of(term)));
    };
    const double same_tag = cosine_similarity(row("dpkeya"), row("dpkeyb"));
    const double cross_tag = cosine_similarity(row("dpkeya"), row("geokeya"));
    CHECK(same_tag > cross_tag);

    // Per-epoch loss is finite and improves over training.
    for (double l : r.epoch_losses) CHECK(std::isfinite(l));
    CHECK(r.epoch_losses.back() < r.epoch_losses.front());
  }
}

TEST_CASE("doc2vec") {
  const TaxonomyMap& tax = TaxonomyMap::builtin();
  const Dataset d = generate_synthetic(120, tax, 8);
  const Vocabulary v = Vocabulary::build(d);
  Doc2VecConfig cfg;
  cfg.dim = 12;
  cfg.epochs = 12;
  cfg.seed = 4;
  const Doc2VecModel m = train_doc2vec(d, v, cfg);

  SUBCASE("deterministic training and loss improvement") {
    const Doc2VecModel m2 = train_doc2vec(d, v, cfg);
    CHECK(m.doc_vectors == m2.doc_vectors);
    for (double l : m.epoch_losses) CHECK(std::isfinite(l));
    CHECK(m.epoch_losses.back() < m.epoch_losses.front());
  }
  SUBCASE("identical documents infer identical vectors under one seed") {
    const std::string text = d.problems[0].text;
    const std::vector<double> a = infer_doc(m, text, v, 20, 99);
    const std::vector<double> b = infer_doc(m, text, v, 20, 99);
    CHECK(a == b);
  }
  SUBCASE("empty document returns the seed-determined initialization") {
    const std::vector<double> a = infer_doc(m, "", v, 50, 7);
    const std::vector<double> b = infer_doc(m, "", v, 50, 7);
    const std::vector<double> c = infer_doc(m, "", v, 50, 8);
    CHECK(a == b);
    CHECK(a != c);
    for (double x : a) CHECK(std::abs(x) <= 0.5 / 12.0);  // never updated
  }
  SUBCASE("re-inferring a training doc lands near its trained vector") {
    double total = 0.0;
    for (std::size_t i = 0; i < 10; ++i) {
      const std::vector<double> inferred = infer_doc(m, d.problems[i].text, v, 50, 17);
      total += cosine_similarity(inferred, m.doc_row(i));
    }
    CHECK(total / 10.0 > 0.5);
  }
  SUBCASE("documents sharing a tag cluster closer than documents that do not") {
    double intra = 0.0, inter = 0.0;
    std::size_t n_intra = 0, n_inter = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
      for (std::size_t j = i + 1; j < d.size(); ++j) {
        if (d.problems[i].tags.empty() || d.problems[j].tags.empty()) continue;
        bool shared = false;
        for (const auto& t : d.problems[i].tags)
          if (d.problems[j].has_tag(t)) shared = true;
        const double cos = cosine_similarity(m.doc_row(i), m.doc_row(j));
        if (shared) {
          intra += cos;
          ++n_intra;
        } else {
          inter += cos;
          ++n_inter;
        }
      }
    }
    REQUIRE(n_intra > 0);
    REQUIRE(n_inter > 0);
    CHECK(intra / n_intra > inter / n_inter);
  }
}

TEST_CASE("embed_sequence") {
  const Dataset d = docs({"a b"});
  const Vocabulary v = Vocabulary::build(d);
  EmbeddingMatrix e;
  e.dim = 2;
  e.input_vectors = {1.0, 2.0, 3.0, 4.0};
  e.output_vectors = {0.0, 0.0, 0.0, 0.0};

  CHECK(embed_sequence("", e, v).empty());
  CHECK(embed_sequence("a", e, v) == std::vector<std::vector<double>>{{1.0, 2.0}});
  CHECK(embed_sequence("a b a", e, v) ==
        std::vector<std::vector<double>>{{1.0, 2.0}, {3.0, 4.0}, {1.0, 2.0}});
  CHECK(embed_sequence("zz", e, v).empty());
}

TEST_CASE("embedding matrix TGEM round-trip is bit-exact") {
  EmbeddingMatrix e;
  e.dim = 3;
  e.input_vectors = {0.1, -2.5, 3e-17, 1.0, 2.0, 3.0};
  e.output_vectors = {5.0, 6.0, -0.0, 1e300, -1e-300, 42.0};
  std::stringstream ss;
  e.write(ss);
  CHECK(ss.str().substr(0, 4) == "TGEM");
  const EmbeddingMatrix back = EmbeddingMatrix::read(ss);
  CHECK(back.dim == e.dim);
  CHECK(back.input_vectors == e.input_vectors);
  CHECK(back.output_vectors == e.output_vectors);
}
