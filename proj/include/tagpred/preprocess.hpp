#pragma once

#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace tagpred {

struct Dataset;

// The cleaning passes, in their default order. `steps` in CleaningConfig may
// be any subset/permutation of these; tokenization and re-joining on single
// spaces always happen last.
enum class CleanStep {
  strip_html,        // drop substrings matching the non-greedy pattern <.*?>
  strip_math,        // drop $...$ / $$...$$ spans and \command tokens
  strip_non_ascii,   // drop bytes outside 7-bit ASCII
  strip_digits,      // drop 0-9
  lowercase,         // ASCII lowercasing
  strip_punctuation, // replace non-alphanumeric, non-whitespace chars with a space
  drop_stopwords,    // drop tokens found in the stopword list
  drop_single_chars, // drop 1-character tokens
};

const std::vector<CleanStep>& default_clean_steps();

// The stopword list shipped with the repo (data/stopwords.txt), 174 entries,
// lowercase, sorted.
const std::vector<std::string>& default_stopwords();

struct CleaningConfig {
  std::size_t min_word_occurrences = 10;
  std::vector<std::string> stopwords = default_stopwords();
  std::vector<CleanStep> steps = default_clean_steps();
};

std::vector<std::string_view> tokenize(std::string_view text);

// Title and description joined by a single space; empty parts contribute nothing.
std::string merge_fields(std::string_view title, std::string_view description);

// Applies cfg.steps in order, then tokenizes and re-joins with single spaces.
// Idempotent under the default configuration.
std::string clean_text(std::string_view raw, const CleaningConfig& cfg = CleaningConfig());

// Keeps the first occurrence of each exact text, order otherwise preserved.
Dataset remove_duplicates(const Dataset& d);

// Counts token occurrences over the whole corpus and removes tokens occurring
// fewer than min_count times from every text. min_count < 1 is an error.
Dataset filter_rare_words(const Dataset& d, std::size_t min_count);

// clean_text on every problem, then duplicate removal, then rare-word
// filtering: the full pipeline in the order the data was originally prepared.
Dataset preprocess_dataset(const Dataset& d, const CleaningConfig& cfg = CleaningConfig());

}  // namespace tagpred
