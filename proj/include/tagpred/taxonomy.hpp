#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tagpred/corpus.hpp"

namespace tagpred {

inline constexpr std::size_t kNumLabels = 9;

// Fixed-order 9-dim binary target. Position i corresponds to
// TaxonomyMap::final_tags()[i].
struct LabelVector {
  std::array<std::uint8_t, kNumLabels> bits{};

  std::size_t count_ones() const;
  bool operator==(const LabelVector&) const = default;
};

// Maps original platform tags to the final 9 labels. A rule targeting
// std::nullopt drops the tag.
class TaxonomyMap {
 public:
  TaxonomyMap(std::vector<std::string> final_tags,
              std::map<std::string, std::optional<std::string>> rules);

  // The reconstruction shipped with the repo (data/taxonomy.json): the 9 final
  // labels plus rules covering the documented platform and intermediate tags.
  static const TaxonomyMap& builtin();

  static TaxonomyMap load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
  static TaxonomyMap from_json(const std::string& json_text, const std::string& origin = "<memory>");
  std::string to_json() const;

  const std::vector<std::string>& final_tags() const { return final_tags_; }
  const std::map<std::string, std::optional<std::string>>& rules() const { return rules_; }

  // Position of a final tag in the fixed order, if present.
  std::optional<std::size_t> index_of(const std::string& final_tag) const;

 private:
  std::vector<std::string> final_tags_;
  std::map<std::string, std::optional<std::string>> rules_;
};

// Replaces every problem's tags by their mapped final tags (drops removed,
// duplicates collapsed). Problems left with no tags are retained. Unmapped
// original tags raise DataError listing all offenders.
Dataset apply_taxonomy(const Dataset& d, const TaxonomyMap& t);

// bits[i] = 1 iff final_tags[i] is in `tags`. Unknown tags raise DataError.
LabelVector encode_labels(const std::vector<std::string>& tags, const TaxonomyMap& t);
std::vector<std::string> decode_labels(const LabelVector& v, const TaxonomyMap& t);
std::vector<LabelVector> encode_dataset(const Dataset& d, const TaxonomyMap& t);

struct CorrelationMatrix {
  std::vector<std::string> tags;
  std::vector<double> values;  // row-major tags.size() x tags.size()

  double at(std::size_t i, std::size_t j) const { return values[i * tags.size() + j]; }
};

// Pearson correlation of per-problem binary tag indicators. Zero-variance tags
// correlate 0 with everything and 1 with themselves by convention. Requires at
// least 2 problems.
CorrelationMatrix tag_correlation(const Dataset& d);

std::map<std::string, std::size_t> tag_frequencies(const Dataset& d);

}  // namespace tagpred
