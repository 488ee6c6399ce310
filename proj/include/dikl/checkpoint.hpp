#pragma once

#include <filesystem>
#include <json.hpp>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "dikl/tensor.hpp"

namespace dikl {

// Parameter persistence. A checkpoint is a JSON manifest next to a raw blob
// of little-endian float64 values; the manifest lists each tensor's name,
// shape and byte offset into the blob plus caller-supplied metadata (model
// architecture, optimizer step counts, ...). Loading is bit-exact.

struct Checkpoint {
  std::map<std::string, Tensor> tensors;
  nlohmann::json meta;
};

// Writes <manifest_path> (JSON) and a sibling blob file whose name is the
// manifest stem with a .bin extension. Both writes are atomic
// (write-to-temp, then rename).
void save_checkpoint(
    const std::filesystem::path& manifest_path,
    const std::vector<std::pair<std::string, const Tensor*>>& tensors,
    const nlohmann::json& meta);

Checkpoint load_checkpoint(const std::filesystem::path& manifest_path);

// Sample dumps: row-major little-endian float64 binary plus a JSON sidecar
// recording dim, count and the target kind. `path` names the binary file;
// the sidecar is `path` with ".json" appended.
void save_samples(const std::filesystem::path& path, const Tensor& samples,
                  const std::string& target_kind);

struct SampleDump {
  Tensor samples;
  std::string target_kind;
};

SampleDump load_samples(const std::filesystem::path& path);

}  // namespace dikl
