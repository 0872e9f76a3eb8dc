#include "nofrills/checkpoint.hpp"

#include <fstream>
#include <sstream>

namespace nofrills {

using nlohmann::json;

namespace {

constexpr int kCheckpointVersion = 1;

std::string hex64(std::uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(v));
  return buf;
}

json load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw DataError("checkpoint: cannot open " + path.string());
  }
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw DataError("checkpoint: invalid manifest JSON: " +
                    std::string(e.what()));
  }
  return j;
}

}  // namespace

void save_checkpoint(FactorModel<float>& model, const Taxonomy& taxonomy,
                     const std::filesystem::path& manifest_path,
                     const json& config) {
  const auto tensors = model.state_tensors();
  std::size_t total = 0;
  json tensor_meta = json::array();
  for (const auto& t : tensors) {
    tensor_meta.push_back({{"name", t.name}, {"size", t.size}});
    total += static_cast<std::size_t>(t.size);
  }
  std::vector<float> blob;
  blob.reserve(total);
  for (const auto& t : tensors) {
    blob.insert(blob.end(), t.data, t.data + t.size);
  }

  std::filesystem::path blob_path = manifest_path;
  blob_path.replace_extension(".bin");
  write_nfhf1(blob_path, blob, 1, static_cast<std::uint32_t>(blob.size()));

  json manifest;
  manifest["format"] = "nofrills-checkpoint";
  manifest["version"] = kCheckpointVersion;
  manifest["taxonomy_hash"] = hex64(taxonomy.content_hash());
  manifest["factors"] = model.factors().to_strings();
  manifest["appearance_dim"] = model.appearance_dim();
  manifest["n_objects"] = model.n_objects();
  manifest["n_interactions"] = model.n_interactions();
  manifest["blob"] = blob_path.filename().string();
  manifest["tensors"] = tensor_meta;
  manifest["config"] = config;

  std::ofstream out(manifest_path, std::ios::binary);
  if (!out) {
    throw DataError("checkpoint: cannot write " + manifest_path.string());
  }
  out << manifest.dump(2) << '\n';
}

FactorModel<float> load_checkpoint(const std::filesystem::path& manifest_path,
                                   const Taxonomy& taxonomy) {
  const json manifest = load_manifest(manifest_path);
  try {
    if (manifest.at("format").get<std::string>() != "nofrills-checkpoint" ||
        manifest.at("version").get<int>() != kCheckpointVersion) {
      throw DataError("checkpoint: unsupported format/version in " +
                      manifest_path.string());
    }
    const int n_interactions = manifest.at("n_interactions").get<int>();
    const int n_objects = manifest.at("n_objects").get<int>();
    if (n_interactions != taxonomy.n_interactions() ||
        n_objects != taxonomy.n_objects()) {
      throw DataError(
          "checkpoint: dimension mismatch: checkpoint has |I|=" +
          std::to_string(n_interactions) + ", |O|=" +
          std::to_string(n_objects) + " but the taxonomy has |I|=" +
          std::to_string(taxonomy.n_interactions()) + ", |O|=" +
          std::to_string(taxonomy.n_objects()));
    }
    const std::string stored_hash =
        manifest.at("taxonomy_hash").get<std::string>();
    if (stored_hash != hex64(taxonomy.content_hash())) {
      throw DataError(
          "checkpoint: taxonomy hash mismatch (checkpoint was trained "
          "against a different vocabulary: " +
          stored_hash + " vs " + hex64(taxonomy.content_hash()) + ")");
    }

    FactorModel<float> model = FactorModel<float>::make(
        taxonomy,
        FactorSet::from_strings(
            manifest.at("factors").get<std::vector<std::string>>()),
        manifest.at("appearance_dim").get<int>(), /*seed=*/0);

    const auto tensors = model.state_tensors();
    const json& meta = manifest.at("tensors");
    if (meta.size() != tensors.size()) {
      throw DataError("checkpoint: tensor count mismatch in " +
                      manifest_path.string());
    }
    std::filesystem::path blob_path =
        manifest_path.parent_path() / manifest.at("blob").get<std::string>();
    const FeatureTensor blob = read_nfhf1(blob_path);
    std::size_t offset = 0;
    const float* data = blob.values.data();
    const std::size_t blob_size = static_cast<std::size_t>(blob.values.size());
    for (std::size_t i = 0; i < tensors.size(); ++i) {
      const auto& t = tensors[i];
      if (meta[i].at("name").get<std::string>() != t.name ||
          meta[i].at("size").get<Eigen::Index>() != t.size) {
        throw DataError("checkpoint: tensor layout mismatch for '" + t.name +
                        "'");
      }
      if (offset + static_cast<std::size_t>(t.size) > blob_size) {
        throw DataError("checkpoint: blob too small for tensor '" + t.name +
                        "'");
      }
      std::copy(data + offset, data + offset + t.size, t.data);
      offset += static_cast<std::size_t>(t.size);
    }
    if (offset != blob_size) {
      throw DataError("checkpoint: blob size does not match tensor layout");
    }
    return model;
  } catch (const json::exception& e) {
    throw DataError("checkpoint: malformed manifest: " +
                    std::string(e.what()));
  }
}

json read_checkpoint_config(const std::filesystem::path& manifest_path) {
  const json manifest = load_manifest(manifest_path);
  if (manifest.contains("config")) return manifest.at("config");
  return json::object();
}

}  // namespace nofrills
