#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>

namespace nofrills {

std::uint64_t fnv1a64_bytes(const void* data, std::size_t size);
std::uint64_t fnv1a64_file(const std::filesystem::path& path);
std::string hex16(std::uint64_t v);

/// Writes a run manifest. The body carries the resolved configuration, seed
/// and input content hashes; the timestamp lives in its own field so byte
/// comparisons can exclude it.
void write_manifest(const std::filesystem::path& path, nlohmann::json body);

}  // namespace nofrills
