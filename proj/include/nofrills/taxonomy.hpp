#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace nofrills {

struct HoiClass {
  int object;
  int interaction;
};

struct TaxonomySplit {
  std::vector<int> full;
  std::vector<int> rare;
  std::vector<int> non_rare;
};

/// HOI classes with fewer than this many training instances are "rare".
inline constexpr long kRareThreshold = 10;

/// Vocabulary of objects, interactions and HOI (object, interaction) pairs,
/// plus per-class training-instance counts for the rare/non-rare partition.
/// Immutable after construction.
class Taxonomy {
 public:
  Taxonomy(std::vector<std::string> objects,
           std::vector<std::string> interactions,
           std::vector<HoiClass> hoi_classes, std::vector<long> train_counts);

  int n_objects() const { return static_cast<int>(objects_.size()); }
  int n_interactions() const { return static_cast<int>(interactions_.size()); }
  int n_classes() const { return static_cast<int>(hoi_classes_.size()); }

  const std::vector<std::string>& objects() const { return objects_; }
  const std::vector<std::string>& interactions() const { return interactions_; }
  const std::vector<HoiClass>& hoi_classes() const { return hoi_classes_; }
  const std::vector<long>& train_counts() const { return train_counts_; }

  const HoiClass& hoi(int h) const;
  long train_count(int h) const;
  bool is_rare(int h) const { return train_count(h) < kRareThreshold; }

  /// All HOI class indices whose object component is `o`, in taxonomy order.
  const std::vector<int>& classes_for_object(int o) const;

  TaxonomySplit split() const;

  /// Index of the object class acting as the human side of every HOI triplet.
  /// By convention this is the object named "person" (or "human").
  std::optional<int> human_object() const { return human_object_; }
  int require_human_object() const;

  /// FNV-1a over the canonical JSON serialization; identifies the vocabulary
  /// for checkpoint/dataset compatibility checks.
  std::uint64_t content_hash() const;

  std::string to_json_string() const;
  static Taxonomy from_json_string(const std::string& text);
  static Taxonomy load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  /// Returns a copy with replaced train counts (used after synthetic
  /// generation, where counts are known only once the data exists).
  Taxonomy with_train_counts(std::vector<long> counts) const;

 private:
  std::vector<std::string> objects_;
  std::vector<std::string> interactions_;
  std::vector<HoiClass> hoi_classes_;
  std::vector<long> train_counts_;
  std::vector<std::vector<int>> by_object_;
  std::optional<int> human_object_;
};

}  // namespace nofrills
