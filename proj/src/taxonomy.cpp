#include "nofrills/taxonomy.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace nofrills {

using nlohmann::json;

namespace {

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

void check_unique_nonempty(const std::vector<std::string>& names,
                           const char* what) {
  std::unordered_set<std::string> seen;
  for (const std::string& n : names) {
    if (n.empty()) {
      throw std::invalid_argument(std::string("taxonomy: empty ") + what +
                                  " name");
    }
    if (!seen.insert(n).second) {
      throw std::invalid_argument(std::string("taxonomy: duplicate ") + what +
                                  " name '" + n + "'");
    }
  }
}

}  // namespace

Taxonomy::Taxonomy(std::vector<std::string> objects,
                   std::vector<std::string> interactions,
                   std::vector<HoiClass> hoi_classes,
                   std::vector<long> train_counts)
    : objects_(std::move(objects)),
      interactions_(std::move(interactions)),
      hoi_classes_(std::move(hoi_classes)),
      train_counts_(std::move(train_counts)) {
  check_unique_nonempty(objects_, "object");
  check_unique_nonempty(interactions_, "interaction");
  if (train_counts_.size() != hoi_classes_.size()) {
    throw std::invalid_argument(
        "taxonomy: train_counts size must equal number of hoi classes");
  }
  std::set<std::pair<int, int>> seen;
  for (const HoiClass& h : hoi_classes_) {
    if (h.object < 0 || h.object >= n_objects() || h.interaction < 0 ||
        h.interaction >= n_interactions()) {
      throw std::invalid_argument(
          "taxonomy: hoi class references out-of-range object or interaction");
    }
    if (!seen.insert({h.object, h.interaction}).second) {
      throw std::invalid_argument("taxonomy: duplicate hoi class (" +
                                  objects_[h.object] + ", " +
                                  interactions_[h.interaction] + ")");
    }
  }
  for (long c : train_counts_) {
    if (c < 0) {
      throw std::invalid_argument("taxonomy: negative train count");
    }
  }
  by_object_.assign(objects_.size(), {});
  for (int h = 0; h < n_classes(); ++h) {
    by_object_[hoi_classes_[h].object].push_back(h);
  }
  for (int o = 0; o < n_objects(); ++o) {
    if (objects_[o] == "person" || objects_[o] == "human") {
      human_object_ = o;
      break;
    }
  }
}

const HoiClass& Taxonomy::hoi(int h) const {
  if (h < 0 || h >= n_classes()) {
    throw std::out_of_range("taxonomy: hoi class index out of range");
  }
  return hoi_classes_[h];
}

long Taxonomy::train_count(int h) const {
  if (h < 0 || h >= n_classes()) {
    throw std::out_of_range("taxonomy: hoi class index out of range");
  }
  return train_counts_[h];
}

const std::vector<int>& Taxonomy::classes_for_object(int o) const {
  if (o < 0 || o >= n_objects()) {
    throw std::out_of_range("taxonomy: object index out of range");
  }
  return by_object_[o];
}

TaxonomySplit Taxonomy::split() const {
  TaxonomySplit s;
  for (int h = 0; h < n_classes(); ++h) {
    s.full.push_back(h);
    if (is_rare(h)) {
      s.rare.push_back(h);
    } else {
      s.non_rare.push_back(h);
    }
  }
  return s;
}

int Taxonomy::require_human_object() const {
  if (!human_object_) {
    throw std::invalid_argument(
        "taxonomy: no object named 'person' or 'human'; cannot form "
        "human-object pairs");
  }
  return *human_object_;
}

std::string Taxonomy::to_json_string() const {
  json j;
  j["objects"] = objects_;
  j["interactions"] = interactions_;
  json classes = json::array();
  for (const HoiClass& h : hoi_classes_) {
    classes.push_back(json::array(
        {objects_[h.object], interactions_[h.interaction]}));
  }
  j["hoi_classes"] = classes;
  j["train_counts"] = train_counts_;
  return j.dump(2) + "\n";
}

Taxonomy Taxonomy::from_json_string(const std::string& text) {
  json j = json::parse(text);
  std::vector<std::string> objects =
      j.at("objects").get<std::vector<std::string>>();
  std::vector<std::string> interactions =
      j.at("interactions").get<std::vector<std::string>>();
  std::unordered_map<std::string, int> obj_index, int_index;
  for (int i = 0; i < static_cast<int>(objects.size()); ++i) {
    obj_index[objects[i]] = i;
  }
  for (int i = 0; i < static_cast<int>(interactions.size()); ++i) {
    int_index[interactions[i]] = i;
  }
  std::vector<HoiClass> classes;
  for (const json& pair : j.at("hoi_classes")) {
    const std::string obj = pair.at(0).get<std::string>();
    const std::string inter = pair.at(1).get<std::string>();
    auto oi = obj_index.find(obj);
    auto ii = int_index.find(inter);
    if (oi == obj_index.end() || ii == int_index.end()) {
      throw std::invalid_argument("taxonomy: hoi class (" + obj + ", " +
                                  inter + ") names an unknown object or "
                                  "interaction");
    }
    classes.push_back({oi->second, ii->second});
  }
  std::vector<long> counts = j.at("train_counts").get<std::vector<long>>();
  return Taxonomy(std::move(objects), std::move(interactions),
                  std::move(classes), std::move(counts));
}

Taxonomy Taxonomy::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("taxonomy: cannot open " + path.string());
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_string(ss.str());
}

void Taxonomy::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("taxonomy: cannot write " + path.string());
  }
  out << to_json_string();
}

std::uint64_t Taxonomy::content_hash() const {
  return fnv1a64(to_json_string());
}

Taxonomy Taxonomy::with_train_counts(std::vector<long> counts) const {
  return Taxonomy(objects_, interactions_, hoi_classes_, std::move(counts));
}

}  // namespace nofrills
