#include "tagpred/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include <json.hpp>

#include "tagpred/errors.hpp"
#include "tagpred/preprocess.hpp"
#include "tagpred/rng.hpp"
#include "tagpred/taxonomy.hpp"

namespace tagpred {

bool Problem::has_tag(const std::string& t) const {
  return std::find(tags.begin(), tags.end(), t) != tags.end();
}

std::string to_string(Source s) {
  switch (s) {
    case Source::codeforces: return "codeforces";
    case Source::topcoder: return "topcoder";
    case Source::combined: return "combined";
    case Source::synthetic: return "synthetic";
  }
  return "combined";
}

Source source_from_string(const std::string& s) {
  if (s == "codeforces") return Source::codeforces;
  if (s == "topcoder") return Source::topcoder;
  if (s == "combined") return Source::combined;
  if (s == "synthetic") return Source::synthetic;
  throw DataError("unknown dataset source: '" + s + "'");
}

namespace {

std::vector<std::string> dedup_tags(const std::vector<std::string>& tags) {
  std::vector<std::string> out;
  std::unordered_set<std::string_view> seen;
  for (const std::string& t : tags)
    if (seen.insert(t).second) out.push_back(t);
  return out;
}

}  // namespace

Dataset dataset_from_json(const std::string& json_text, const std::string& origin) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("dataset " + origin + ": " + e.what());
  }
  if (!j.is_array()) throw DataError("dataset " + origin + ": expected a JSON array");

  Dataset d;
  d.problems.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& entry = j[i];
    const std::string at = origin + " entry " + std::to_string(i);
    if (!entry.is_object()) throw DataError(at + ": expected an object");
    if (!entry.contains("text") || !entry.at("text").is_string())
      throw DataError(at + ": missing string field \"text\"");
    if (!entry.contains("tags") || !entry.at("tags").is_array())
      throw DataError(at + ": missing array field \"tags\"");
    Problem p;
    p.text = entry.at("text").get<std::string>();
    if (entry.contains("title") && entry.at("title").is_string())
      p.text = merge_fields(entry.at("title").get<std::string>(), p.text);
    std::vector<std::string> tags;
    for (const auto& t : entry.at("tags")) {
      if (!t.is_string()) throw DataError(at + ": tags must be strings");
      tags.push_back(t.get<std::string>());
    }
    p.tags = dedup_tags(tags);
    d.problems.push_back(std::move(p));
  }
  return d;
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open dataset file: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return dataset_from_json(ss.str(), path.string());
}

std::string dataset_to_json(const Dataset& d) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const Problem& p : d.problems) {
    nlohmann::ordered_json entry;
    entry["text"] = p.text;
    entry["tags"] = p.tags;
    arr.push_back(std::move(entry));
  }
  return arr.dump(2) + "\n";
}

void save_dataset(const Dataset& d, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write dataset file: " + path.string());
  out << dataset_to_json(d);
}

StatsReport dataset_stats(const Dataset& d) {
  StatsReport r;
  r.problem_count = d.problems.size();
  if (d.problems.empty()) return r;

  double total_words = 0.0, total_tags = 0.0;
  std::map<std::string, double> tag_words;
  std::map<std::string, std::size_t> tag_counts;
  for (const Problem& p : d.problems) {
    const double words = static_cast<double>(tokenize(p.text).size());
    total_words += words;
    total_tags += static_cast<double>(p.tags.size());
    for (const std::string& t : p.tags) {
      tag_words[t] += words;
      ++tag_counts[t];
    }
  }
  const double n = static_cast<double>(d.problems.size());
  r.avg_words_per_problem = total_words / n;
  r.avg_tags_per_problem = total_tags / n;
  for (const auto& [tag, words] : tag_words)
    r.per_tag_avg_words[tag] = words / static_cast<double>(tag_counts.at(tag));
  return r;
}

std::map<std::string, double> per_tag_word_stats(const Dataset& d) {
  return dataset_stats(d).per_tag_avg_words;
}

namespace {

// Short codes used to name the planted keywords for the canonical 9 labels.
const char* kTagCodes[kNumLabels] = {"dp",  "greedy", "ds",     "str",  "geo",
                                     "brute", "search", "constr", "math"};

// Per-label sampling weights; sum is 18 so the expected tag count per problem
// is exactly 1.6 and the most common label is drawn 3x as often as the least
// common (math most frequent, geometry least, as in the source distribution).
const double kTagWeights[kNumLabels] = {2.75, 2.25, 2.5, 1.25, 1.0, 2.0, 1.75, 1.5, 3.0};

constexpr double kKeywordRateOnTag = 0.9;
constexpr double kKeywordLeakRate = 0.02;
constexpr std::size_t kFillerVocab = 150;
constexpr std::size_t kMinFiller = 30;
constexpr std::size_t kMaxFiller = 60;

std::string filler_word(std::size_t i) {
  // "qaa", "qab", ... : lowercase, 3 chars, no stopword collisions.
  std::string w = "q";
  w.push_back(static_cast<char>('a' + i / 26));
  w.push_back(static_cast<char>('a' + i % 26));
  return w;
}

}  // namespace

std::vector<std::string> synthetic_keywords(std::size_t tag_index) {
  if (tag_index >= kNumLabels) throw std::invalid_argument("synthetic_keywords: tag index out of range");
  std::vector<std::string> keys;
  for (char suffix : {'a', 'b', 'c'}) keys.push_back(std::string(kTagCodes[tag_index]) + "key" + suffix);
  return keys;
}

Dataset generate_synthetic(std::int64_t n, const TaxonomyMap& taxonomy, std::uint64_t seed) {
  if (n < 0) throw std::invalid_argument("generate_synthetic: n must be >= 0");
  const auto& finals = taxonomy.final_tags();
  if (finals.size() != kNumLabels)
    throw std::invalid_argument("generate_synthetic: taxonomy must have exactly 9 final tags");

  constexpr double kWeightSum = 18.0;
  constexpr double kMeanTags = 1.6;

  Rng rng(seed);
  Dataset d;
  d.source = Source::synthetic;
  d.problems.reserve(static_cast<std::size_t>(n));

  for (std::int64_t i = 0; i < n; ++i) {
    Problem p;
    std::array<bool, kNumLabels> on{};
    for (std::size_t k = 0; k < kNumLabels; ++k)
      on[k] = rng.bernoulli(kMeanTags * kTagWeights[k] / kWeightSum);

    std::vector<std::string> words;
    const std::size_t filler = kMinFiller + rng.uniform_index(kMaxFiller - kMinFiller + 1);
    words.reserve(filler + 8);
    for (std::size_t w = 0; w < filler; ++w) words.push_back(filler_word(rng.uniform_index(kFillerVocab)));

    for (std::size_t k = 0; k < kNumLabels; ++k) {
      const std::vector<std::string> keys = synthetic_keywords(k);
      if (on[k]) {
        // Keywords of a present tag appear as one contiguous run, so they
        // co-occur within any small context window.
        std::vector<std::string> run;
        for (const std::string& key : keys)
          if (rng.bernoulli(kKeywordRateOnTag)) run.push_back(key);
        if (!run.empty()) {
          const std::size_t pos = rng.uniform_index(words.size() + 1);
          words.insert(words.begin() + static_cast<std::ptrdiff_t>(pos), run.begin(), run.end());
        }
        p.tags.push_back(finals[k]);
      } else {
        for (const std::string& key : keys)
          if (rng.bernoulli(kKeywordLeakRate))
            words.insert(words.begin() + static_cast<std::ptrdiff_t>(rng.uniform_index(words.size() + 1)),
                         key);
      }
    }

    std::string text;
    for (const std::string& w : words) {
      if (!text.empty()) text.push_back(' ');
      text.append(w);
    }
    p.text = std::move(text);
    d.problems.push_back(std::move(p));
  }
  return d;
}

}  // namespace tagpred
