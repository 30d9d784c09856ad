#include <doctest.h>

#include <filesystem>

#include "tagpred/corpus.hpp"
#include "tagpred/errors.hpp"
#include "tagpred/rng.hpp"
#include "tagpred/taxonomy.hpp"

using namespace tagpred;

namespace {

Dataset with_tags(const std::vector<std::vector<std::string>>& tag_rows) {
  Dataset d;
  for (const auto& tags : tag_rows) {
    Problem p;
    p.text = "t";
    p.tags = tags;
    d.problems.push_back(std::move(p));
  }
  return d;
}

}  // namespace

TEST_CASE("builtin taxonomy shape") {
  const TaxonomyMap& t = TaxonomyMap::builtin();
  REQUIRE(t.final_tags().size() == 9);
  CHECK(t.final_tags()[0] == "Dynamic Programming");
  CHECK(t.final_tags()[4] == "Geometry");
  CHECK(t.final_tags()[8] == "Math and Probabilities");
  CHECK(t.index_of("Search and Binary Search") == 6);
  // Every final tag maps to itself.
  for (const auto& f : t.final_tags()) CHECK(t.rules().at(f) == f);
}

TEST_CASE("apply_taxonomy") {
  const TaxonomyMap& t = TaxonomyMap::builtin();

  SUBCASE("ternary search lands in Search and Binary Search") {
    const Dataset out = apply_taxonomy(with_tags({{"ternary search"}}), t);
    CHECK(out.problems[0].tags == std::vector<std::string>{"Search and Binary Search"});
  }
  SUBCASE("empty tag set stays empty and the problem is kept") {
    const Dataset out = apply_taxonomy(with_tags({{}}), t);
    REQUIRE(out.size() == 1);
    CHECK(out.problems[0].tags.empty());
  }
  SUBCASE("graphs, trees and dfs collapse to one label") {
    const Dataset out = apply_taxonomy(with_tags({{"graphs", "trees", "dfs"}}), t);
    CHECK(out.problems[0].tags == std::vector<std::string>{"Data Structures and Graphs"});
  }
  SUBCASE("dropped tags vanish, problems with none left are retained") {
    const Dataset out = apply_taxonomy(with_tags({{"implementation", "interactive"}}), t);
    REQUIRE(out.size() == 1);
    CHECK(out.problems[0].tags.empty());
  }
  SUBCASE("unmapped tags raise an error listing all offenders") {
    try {
      apply_taxonomy(with_tags({{"weird-tag"}, {"another-weird"}}), t);
      FAIL("expected DataError");
    } catch (const DataError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("weird-tag") != std::string::npos);
      CHECK(msg.find("another-weird") != std::string::npos);
    }
  }
  SUBCASE("idempotent under the identity rules") {
    const Dataset once = apply_taxonomy(with_tags({{"math", "greedy"}, {"dp"}}), t);
    CHECK(apply_taxonomy(once, t) == once);
  }
}

TEST_CASE("encode and decode labels") {
  const TaxonomyMap& t = TaxonomyMap::builtin();

  CHECK(encode_labels({}, t) == LabelVector{});
  LabelVector dp;
  dp.bits[0] = 1;
  CHECK(encode_labels({"Dynamic Programming"}, t) == dp);

  LabelVector geo_math;
  geo_math.bits[4] = 1;
  geo_math.bits[8] = 1;
  CHECK(encode_labels({"Geometry", "Math and Probabilities"}, t) == geo_math);

  CHECK_THROWS_AS(encode_labels({"nope"}, t), DataError);

  // decode(encode(s)) == s for subsets of the final tags.
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::string> subset;
    for (const std::string& f : t.final_tags())
      if (rng.bernoulli(0.4)) subset.push_back(f);
    CHECK(decode_labels(encode_labels(subset, t), t) == subset);
  }
}

TEST_CASE("taxonomy json round-trip and validation") {
  const TaxonomyMap& t = TaxonomyMap::builtin();
  const TaxonomyMap back = TaxonomyMap::from_json(t.to_json());
  CHECK(back.final_tags() == t.final_tags());
  CHECK(back.rules() == t.rules());

  CHECK_THROWS_AS(TaxonomyMap::from_json("{}"), DataError);
  CHECK_THROWS_AS(
      TaxonomyMap::from_json(R"({"final_tags":["A"],"rules":{"x":"Unknown"}})"), DataError);

  // null means DROP
  const TaxonomyMap small =
      TaxonomyMap::from_json(R"({"final_tags":["A"],"rules":{"x":"A","y":null}})");
  CHECK(small.rules().at("y") == std::nullopt);
}

TEST_CASE("shipped taxonomy file matches the builtin") {
  const TaxonomyMap file = TaxonomyMap::load(std::string(TAGPRED_SOURCE_DIR) + "/data/taxonomy.json");
  CHECK(file.final_tags() == TaxonomyMap::builtin().final_tags());
  CHECK(file.rules() == TaxonomyMap::builtin().rules());
}

TEST_CASE("tag_correlation") {
  SUBCASE("always co-occurring tags correlate 1") {
    const Dataset d = with_tags({{"a", "b"}, {"a", "b"}, {}, {}});
    const CorrelationMatrix m = tag_correlation(d);
    const std::size_t i = 0, j = 1;  // sorted tag order: a, b
    CHECK(m.at(i, j) == doctest::Approx(1.0));
  }
  SUBCASE("complementary tags correlate -1") {
    const Dataset d = with_tags({{"a"}, {"a"}, {"b"}, {"b"}});
    const CorrelationMatrix m = tag_correlation(d);
    CHECK(m.at(0, 1) == doctest::Approx(-1.0));
  }
  SUBCASE("independent random tags stay near 0 at n=10000") {
    Rng rng(77);
    std::vector<std::vector<std::string>> rows;
    for (int i = 0; i < 10000; ++i) {
      std::vector<std::string> tags;
      if (rng.bernoulli(0.5)) tags.push_back("a");
      if (rng.bernoulli(0.5)) tags.push_back("b");
      rows.push_back(tags);
    }
    const CorrelationMatrix m = tag_correlation(with_tags(rows));
    CHECK(std::abs(m.at(0, 1)) < 0.05);
  }
  SUBCASE("zero-variance tag: 0 off-diagonal, 1 diagonal") {
    const Dataset d = with_tags({{"always", "x"}, {"always"}});
    const CorrelationMatrix m = tag_correlation(d);
    const std::size_t a = 0;  // "always" sorts first
    CHECK(m.at(a, a) == 1.0);
    CHECK(m.at(a, 1) == 0.0);
  }
  SUBCASE("fewer than two problems is an error") {
    CHECK_THROWS_AS(tag_correlation(with_tags({{"a"}})), std::invalid_argument);
  }
  SUBCASE("symmetric, unit diagonal, entries within [-1, 1]") {
    Rng rng(13);
    std::vector<std::vector<std::string>> rows;
    for (int i = 0; i < 200; ++i) {
      std::vector<std::string> tags;
      for (int t = 0; t < 5; ++t)
        if (rng.bernoulli(0.3)) tags.push_back("tag" + std::to_string(t));
      rows.push_back(tags);
    }
    const CorrelationMatrix m = tag_correlation(with_tags(rows));
    for (std::size_t i = 0; i < m.tags.size(); ++i) {
      CHECK(m.at(i, i) == doctest::Approx(1.0));
      for (std::size_t j = 0; j < m.tags.size(); ++j) {
        CHECK(m.at(i, j) == doctest::Approx(m.at(j, i)));
        CHECK(m.at(i, j) <= 1.0 + 1e-12);
        CHECK(m.at(i, j) >= -1.0 - 1e-12);
      }
    }
  }
}

TEST_CASE("tag_frequencies") {
  SUBCASE("counts") {
    const auto freq = tag_frequencies(with_tags({{"x"}, {"x", "y"}}));
    CHECK(freq.at("x") == 2);
    CHECK(freq.at("y") == 1);
  }
  SUBCASE("empty") {
    CHECK(tag_frequencies(Dataset{}).empty());
  }
  SUBCASE("synthetic skew: most common roughly 3x least common") {
    const Dataset d = generate_synthetic(1000, TaxonomyMap::builtin(), 42);
    const auto freq = tag_frequencies(d);
    REQUIRE(freq.size() == 9);
    std::size_t lo = SIZE_MAX, hi = 0;
    for (const auto& [tag, count] : freq) {
      lo = std::min(lo, count);
      hi = std::max(hi, count);
    }
    const double ratio = static_cast<double>(hi) / static_cast<double>(lo);
    CHECK(ratio > 2.2);
    CHECK(ratio < 3.8);
  }
}
