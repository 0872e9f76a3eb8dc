#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>

#include "nofrills/factor_model.hpp"
#include "nofrills/taxonomy.hpp"

namespace nofrills {

/// Writes a checkpoint as a JSON manifest (tensor layout, taxonomy hash,
/// caller config) plus a sibling NFHF1 binary blob holding every state tensor
/// (parameters and batchnorm running statistics) as float32. Round-trips are
/// bit-exact.
void save_checkpoint(FactorModel<float>& model, const Taxonomy& taxonomy,
                     const std::filesystem::path& manifest_path,
                     const nlohmann::json& config = nlohmann::json::object());

/// Rebuilds the model from a manifest written by save_checkpoint. Dimension
/// mismatches against the provided taxonomy (|I|, |O|) and taxonomy hash
/// mismatches are rejected with explanatory errors; blob corruption trips the
/// NFHF1 checksum.
FactorModel<float> load_checkpoint(const std::filesystem::path& manifest_path,
                                   const Taxonomy& taxonomy);

/// The config block stored by save_checkpoint (empty object when absent).
nlohmann::json read_checkpoint_config(
    const std::filesystem::path& manifest_path);

}  // namespace nofrills
