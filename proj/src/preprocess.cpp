#include "tagpred/preprocess.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "tagpred/corpus.hpp"

namespace tagpred {

namespace {

// data/stopwords.txt, kept in sync by a unit test.
const char* kStopwords[] = {
    "a", "about", "above", "after", "again", "against", "ain", "all", "also", "am",
    "among", "an", "and", "any", "are", "aren", "as", "at", "be", "because",
    "been", "before", "being", "below", "between", "both", "but", "by", "can", "cannot",
    "could", "couldn", "d", "did", "didn", "do", "does", "doesn", "doing", "don",
    "down", "during", "each", "every", "few", "for", "from", "further", "had", "hadn",
    "has", "hasn", "have", "haven", "having", "he", "her", "here", "hers", "herself",
    "him", "himself", "his", "how", "however", "i", "if", "in", "into", "is",
    "isn", "it", "its", "itself", "just", "ll", "m", "ma", "many", "may",
    "me", "might", "mightn", "more", "most", "must", "mustn", "my", "myself", "needn",
    "no", "nor", "not", "now", "o", "of", "off", "often", "on", "once",
    "one", "only", "or", "other", "our", "ours", "ourselves", "out", "over", "own",
    "re", "s", "same", "shall", "shan", "she", "should", "shouldn", "since", "so",
    "some", "such", "t", "than", "that", "the", "their", "theirs", "them", "themselves",
    "then", "there", "these", "they", "this", "those", "through", "to", "too", "under",
    "until", "up", "upon", "us", "ve", "very", "via", "was", "wasn", "we",
    "were", "weren", "what", "when", "where", "which", "while", "who", "whom", "why",
    "will", "with", "within", "without", "won", "would", "wouldn", "y", "yet", "you",
    "your", "yours", "yourself", "yourselves",
};

bool is_ws(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

bool is_line_break(char c) { return c == '\n' || c == '\r'; }

// Non-greedy <.*?> with `.` not crossing line breaks: each '<' is matched to
// the first following '>' on the same line; an unmatched '<' stays.
std::string strip_html_tags(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i] == '<') {
      std::size_t j = i + 1;
      while (j < s.size() && s[j] != '>' && !is_line_break(s[j])) ++j;
      if (j < s.size() && s[j] == '>') {
        i = j + 1;
        continue;
      }
    }
    out.push_back(s[i]);
    ++i;
  }
  return out;
}

// Removes $...$ and $$...$$ spans plus backslash-command tokens (\word).
// Unterminated delimiters are left in place for the punctuation pass to eat.
std::string strip_math(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i] == '$') {
      if (i + 1 < s.size() && s[i + 1] == '$') {
        std::size_t j = s.find("$$", i + 2);
        if (j != std::string_view::npos) {
          i = j + 2;
          continue;
        }
      }
      std::size_t j = s.find('$', i + 1);
      if (j != std::string_view::npos) {
        i = j + 1;
        continue;
      }
      out.push_back(s[i]);
      ++i;
    } else if (s[i] == '\\' && i + 1 < s.size() && std::isalpha(static_cast<unsigned char>(s[i + 1]))) {
      ++i;
      while (i < s.size() && std::isalpha(static_cast<unsigned char>(s[i]))) ++i;
    } else {
      out.push_back(s[i]);
      ++i;
    }
  }
  return out;
}

std::string apply_step(std::string s, CleanStep step) {
  switch (step) {
    case CleanStep::strip_html:
      return strip_html_tags(s);
    case CleanStep::strip_math:
      return strip_math(s);
    case CleanStep::strip_non_ascii: {
      std::string out;
      out.reserve(s.size());
      for (char c : s)
        if (static_cast<unsigned char>(c) < 0x80) out.push_back(c);
      return out;
    }
    case CleanStep::strip_digits: {
      std::string out;
      out.reserve(s.size());
      for (char c : s)
        if (c < '0' || c > '9') out.push_back(c);
      return out;
    }
    case CleanStep::lowercase: {
      for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      return s;
    }
    case CleanStep::strip_punctuation: {
      for (char& c : s) {
        unsigned char u = static_cast<unsigned char>(c);
        if (!std::isalnum(u) && !is_ws(c)) c = ' ';
      }
      return s;
    }
    default:
      return s;  // token-level steps handled after tokenization
  }
}

}  // namespace

const std::vector<CleanStep>& default_clean_steps() {
  static const std::vector<CleanStep> steps = {
      CleanStep::strip_html,   CleanStep::strip_math,        CleanStep::strip_non_ascii,
      CleanStep::strip_digits, CleanStep::lowercase,         CleanStep::strip_punctuation,
      CleanStep::drop_stopwords, CleanStep::drop_single_chars,
  };
  return steps;
}

const std::vector<std::string>& default_stopwords() {
  static const std::vector<std::string> words(std::begin(kStopwords), std::end(kStopwords));
  return words;
}

std::vector<std::string_view> tokenize(std::string_view text) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_ws(text[i])) ++i;
    std::size_t start = i;
    while (i < text.size() && !is_ws(text[i])) ++i;
    if (i > start) tokens.push_back(text.substr(start, i - start));
  }
  return tokens;
}

std::string merge_fields(std::string_view title, std::string_view description) {
  if (title.empty()) return std::string(description);
  if (description.empty()) return std::string(title);
  std::string out;
  out.reserve(title.size() + 1 + description.size());
  out.append(title);
  out.push_back(' ');
  out.append(description);
  return out;
}

std::string clean_text(std::string_view raw, const CleaningConfig& cfg) {
  std::unordered_set<std::string_view> stopset;
  bool drop_stop = false, drop_single = false;
  for (CleanStep step : cfg.steps) {
    if (step == CleanStep::drop_stopwords) drop_stop = true;
    if (step == CleanStep::drop_single_chars) drop_single = true;
  }
  if (drop_stop)
    for (const std::string& w : cfg.stopwords) stopset.insert(w);

  std::string s(raw);
  for (CleanStep step : cfg.steps) s = apply_step(std::move(s), step);

  std::string out;
  out.reserve(s.size());
  for (std::string_view tok : tokenize(s)) {
    if (drop_single && tok.size() == 1) continue;
    if (drop_stop && stopset.count(tok)) continue;
    if (!out.empty()) out.push_back(' ');
    out.append(tok);
  }
  return out;
}

Dataset remove_duplicates(const Dataset& d) {
  Dataset out;
  out.source = d.source;
  out.problems.reserve(d.problems.size());
  std::unordered_set<std::string_view> seen;
  for (const Problem& p : d.problems) {
    if (seen.insert(p.text).second) out.problems.push_back(p);
  }
  return out;
}

Dataset filter_rare_words(const Dataset& d, std::size_t min_count) {
  if (min_count < 1) throw std::invalid_argument("filter_rare_words: min_count must be >= 1");
  std::unordered_map<std::string_view, std::size_t> counts;
  for (const Problem& p : d.problems)
    for (std::string_view tok : tokenize(p.text)) ++counts[tok];

  Dataset out;
  out.source = d.source;
  out.problems.reserve(d.problems.size());
  for (const Problem& p : d.problems) {
    Problem q;
    q.tags = p.tags;
    for (std::string_view tok : tokenize(p.text)) {
      if (counts.at(tok) < min_count) continue;
      if (!q.text.empty()) q.text.push_back(' ');
      q.text.append(tok);
    }
    out.problems.push_back(std::move(q));
  }
  return out;
}

Dataset preprocess_dataset(const Dataset& d, const CleaningConfig& cfg) {
  Dataset cleaned;
  cleaned.source = d.source;
  cleaned.problems.reserve(d.problems.size());
  for (const Problem& p : d.problems) {
    Problem q;
    q.text = clean_text(p.text, cfg);
    q.tags = p.tags;
    cleaned.problems.push_back(std::move(q));
  }
  return filter_rare_words(remove_duplicates(cleaned), cfg.min_word_occurrences);
}

}  // namespace tagpred
