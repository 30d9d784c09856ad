#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace tagpred {

class TaxonomyMap;

// One programming challenge: merged title+description text plus its tag set.
// Tags are stored deduplicated, first occurrence first.
struct Problem {
  std::string text;
  std::vector<std::string> tags;

  bool has_tag(const std::string& t) const;
  bool operator==(const Problem&) const = default;
};

enum class Source { codeforces, topcoder, combined, synthetic };

std::string to_string(Source s);
Source source_from_string(const std::string& s);

struct Dataset {
  std::vector<Problem> problems;
  Source source = Source::combined;

  std::size_t size() const { return problems.size(); }
  bool operator==(const Dataset&) const = default;
};

struct StatsReport {
  std::size_t problem_count = 0;
  double avg_words_per_problem = 0.0;
  double avg_tags_per_problem = 0.0;
  std::map<std::string, double> per_tag_avg_words;
};

// Reads a UTF-8 JSON array of {"text": ..., "tags": [...]} objects. An
// optional "title" field is merged into the text; unknown fields are ignored.
// Malformed entries raise DataError naming the offending index.
Dataset load_dataset(const std::filesystem::path& path);

// Writes the array form with 2-space indentation, keys in the order text, tags.
void save_dataset(const Dataset& d, const std::filesystem::path& path);
std::string dataset_to_json(const Dataset& d);
Dataset dataset_from_json(const std::string& json_text, const std::string& origin = "<memory>");

StatsReport dataset_stats(const Dataset& d);

// Mean whitespace-token count over the problems carrying each tag.
std::map<std::string, double> per_tag_word_stats(const Dataset& d);

// Seeded synthetic corpus for desk-scale experiments. Tag frequencies follow a
// fixed skew (most common ~3x least common), each tag plants 3 signature
// keywords in its problems' text amid filler vocabulary, and the expected tag
// count per problem is 1.6. Pure function of (n, taxonomy, seed).
Dataset generate_synthetic(std::int64_t n, const TaxonomyMap& taxonomy, std::uint64_t seed);

// The 3 signature keywords the generator plants for final tag `tag_index`.
std::vector<std::string> synthetic_keywords(std::size_t tag_index);

}  // namespace tagpred
