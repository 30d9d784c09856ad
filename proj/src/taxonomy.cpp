#include "tagpred/taxonomy.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "tagpred/errors.hpp"

namespace tagpred {

namespace {

const char* kFinalTags[kNumLabels] = {
    "Dynamic Programming",
    "Greedy and Sorting",
    "Data Structures and Graphs",
    "String Operations",
    "Geometry",
    "Brute Force",
    "Search and Binary Search",
    "Constructive Algorithms",
    "Math and Probabilities",
};

}  // namespace

std::size_t LabelVector::count_ones() const {
  std::size_t n = 0;
  for (auto b : bits) n += b;
  return n;
}

TaxonomyMap::TaxonomyMap(std::vector<std::string> final_tags,
                         std::map<std::string, std::optional<std::string>> rules)
    : final_tags_(std::move(final_tags)), rules_(std::move(rules)) {
  if (final_tags_.empty()) throw std::invalid_argument("taxonomy: final_tags must be non-empty");
  std::set<std::string> distinct(final_tags_.begin(), final_tags_.end());
  if (distinct.size() != final_tags_.size())
    throw std::invalid_argument("taxonomy: final_tags must be distinct");
  for (const auto& [orig, target] : rules_) {
    if (target && !distinct.count(*target))
      throw std::invalid_argument("taxonomy: rule '" + orig + "' targets unknown final tag '" +
                                  *target + "'");
  }
}

const TaxonomyMap& TaxonomyMap::builtin() {
  static const TaxonomyMap map = [] {
    std::vector<std::string> finals(std::begin(kFinalTags), std::end(kFinalTags));
    std::map<std::string, std::optional<std::string>> rules;
    auto add = [&](std::initializer_list<const char*> origs, const char* target) {
      for (const char* o : origs) rules[o] = target ? std::optional<std::string>(target) : std::nullopt;
    };
    // Final labels map to themselves so already-mapped datasets pass through.
    for (const std::string& f : finals) rules[f] = f;
    // Platform tags (lowercase, as scraped).
    add({"dp", "dynamic programming"}, kFinalTags[0]);
    add({"greedy", "sorting", "sortings"}, kFinalTags[1]);
    add({"graphs", "trees", "dfs", "dfs and similar", "shortest path", "shortest paths",
         "data structures", "dsu"},
        kFinalTags[2]);
    add({"strings", "string manipulation", "regular expressions", "string suffix structures"},
        kFinalTags[3]);
    add({"geometry", "computational geometry"}, kFinalTags[4]);
    add({"brute force", "bruteforce"}, kFinalTags[5]);
    add({"search", "binary search", "ternary search"}, kFinalTags[6]);
    add({"constructive algorithms"}, kFinalTags[7]);
    add({"math", "probabilities", "combinatorics", "probabilities and combinatorics",
         "number theory"},
        kFinalTags[8]);
    // Intermediate 17-tag names that aggregate into a final label.
    add({"Greedy", "Sorting"}, kFinalTags[1]);
    add({"Graphs", "Data Structures"}, kFinalTags[2]);
    add({"Binary Search", "Search"}, kFinalTags[6]);
    add({"Math", "Probabilities and Combinatorics"}, kFinalTags[8]);
    // General tags dropped on purpose, plus intermediate tags whose final
    // destination the source material leaves unspecified.
    add({"implementation", "programming", "arrays", "interactive", "recursion",
         "divide and conquer", "bit manipulation", "bitmasks", "game theory", "games",
         "Recursion", "Divide and Conquer", "Bit Manipulation", "Game Theory"},
        nullptr);
    return TaxonomyMap(std::move(finals), std::move(rules));
  }();
  return map;
}

TaxonomyMap TaxonomyMap::from_json(const std::string& json_text, const std::string& origin) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("taxonomy " + origin + ": " + e.what());
  }
  if (!j.is_object() || !j.contains("final_tags") || !j.contains("rules"))
    throw DataError("taxonomy " + origin + ": expected object with final_tags and rules");
  std::vector<std::string> finals;
  for (const auto& t : j.at("final_tags")) {
    if (!t.is_string()) throw DataError("taxonomy " + origin + ": final_tags must be strings");
    finals.push_back(t.get<std::string>());
  }
  std::map<std::string, std::optional<std::string>> rules;
  for (const auto& [key, val] : j.at("rules").items()) {
    if (val.is_null())
      rules[key] = std::nullopt;
    else if (val.is_string())
      rules[key] = val.get<std::string>();
    else
      throw DataError("taxonomy " + origin + ": rule '" + key + "' must be a string or null");
  }
  try {
    return TaxonomyMap(std::move(finals), std::move(rules));
  } catch (const std::invalid_argument& e) {
    throw DataError("taxonomy " + origin + ": " + e.what());
  }
}

std::string TaxonomyMap::to_json() const {
  nlohmann::ordered_json j;
  j["final_tags"] = final_tags_;
  nlohmann::ordered_json rules = nlohmann::ordered_json::object();
  for (const auto& [orig, target] : rules_) {
    if (target)
      rules[orig] = *target;
    else
      rules[orig] = nullptr;
  }
  j["rules"] = std::move(rules);
  return j.dump(2) + "\n";
}

TaxonomyMap TaxonomyMap::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open taxonomy file: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str(), path.string());
}

void TaxonomyMap::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write taxonomy file: " + path.string());
  out << to_json();
}

std::optional<std::size_t> TaxonomyMap::index_of(const std::string& final_tag) const {
  for (std::size_t i = 0; i < final_tags_.size(); ++i)
    if (final_tags_[i] == final_tag) return i;
  return std::nullopt;
}

Dataset apply_taxonomy(const Dataset& d, const TaxonomyMap& t) {
  std::set<std::string> unmapped;
  for (const Problem& p : d.problems)
    for (const std::string& tag : p.tags)
      if (!t.rules().count(tag)) unmapped.insert(tag);
  if (!unmapped.empty()) {
    std::string msg = "unmapped tags:";
    for (const std::string& tag : unmapped) msg += " '" + tag + "'";
    throw DataError(msg);
  }

  Dataset out;
  out.source = d.source;
  out.problems.reserve(d.problems.size());
  for (const Problem& p : d.problems) {
    Problem q;
    q.text = p.text;
    std::set<std::string> mapped;
    for (const std::string& tag : p.tags) {
      const auto& target = t.rules().at(tag);
      if (target) mapped.insert(*target);
    }
    // Emit in final-tag order so output is canonical.
    for (const std::string& f : t.final_tags())
      if (mapped.count(f)) q.tags.push_back(f);
    out.problems.push_back(std::move(q));
  }
  return out;
}

LabelVector encode_labels(const std::vector<std::string>& tags, const TaxonomyMap& t) {
  LabelVector v;
  if (t.final_tags().size() != kNumLabels)
    throw std::invalid_argument("encode_labels: taxonomy must have exactly 9 final tags");
  for (const std::string& tag : tags) {
    auto idx = t.index_of(tag);
    if (!idx) throw DataError("encode_labels: unknown final tag '" + tag + "'");
    v.bits[*idx] = 1;
  }
  return v;
}

std::vector<std::string> decode_labels(const LabelVector& v, const TaxonomyMap& t) {
  std::vector<std::string> tags;
  for (std::size_t i = 0; i < kNumLabels; ++i)
    if (v.bits[i]) tags.push_back(t.final_tags().at(i));
  return tags;
}

std::vector<LabelVector> encode_dataset(const Dataset& d, const TaxonomyMap& t) {
  std::vector<LabelVector> out;
  out.reserve(d.problems.size());
  for (const Problem& p : d.problems) out.push_back(encode_labels(p.tags, t));
  return out;
}

CorrelationMatrix tag_correlation(const Dataset& d) {
  if (d.problems.size() < 2)
    throw std::invalid_argument("tag_correlation: need at least 2 problems");

  std::set<std::string> tagset;
  for (const Problem& p : d.problems)
    for (const std::string& tag : p.tags) tagset.insert(tag);

  CorrelationMatrix m;
  m.tags.assign(tagset.begin(), tagset.end());
  const std::size_t k = m.tags.size();
  const std::size_t n = d.problems.size();
  m.values.assign(k * k, 0.0);
  if (k == 0) return m;

  // Binary indicator columns, one per tag.
  std::vector<std::vector<double>> cols(k, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t r = 0; r < n; ++r)
      if (d.problems[r].has_tag(m.tags[i])) cols[i][r] = 1.0;

  std::vector<double> mean(k, 0.0), var(k, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    for (double v : cols[i]) mean[i] += v;
    mean[i] /= static_cast<double>(n);
    for (double v : cols[i]) var[i] += (v - mean[i]) * (v - mean[i]);
  }

  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i; j < k; ++j) {
      double r;
      if (i == j) {
        r = 1.0;
      } else if (var[i] == 0.0 || var[j] == 0.0) {
        r = 0.0;
      } else {
        double cov = 0.0;
        for (std::size_t t = 0; t < n; ++t) cov += (cols[i][t] - mean[i]) * (cols[j][t] - mean[j]);
        r = cov / std::sqrt(var[i] * var[j]);
      }
      m.values[i * k + j] = r;
      m.values[j * k + i] = r;
    }
  }
  return m;
}

std::map<std::string, std::size_t> tag_frequencies(const Dataset& d) {
  std::map<std::string, std::size_t> freq;
  for (const Problem& p : d.problems)
    for (const std::string& tag : p.tags) ++freq[tag];
  return freq;
}

}  // namespace tagpred
