#include "dikl/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace dikl {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

void byteswap_doubles(std::vector<double>& v) {
  for (double& d : v) {
    std::uint64_t u;
    std::memcpy(&u, &d, 8);
    u = __builtin_bswap64(u);
    std::memcpy(&d, &u, 8);
  }
}

// Serializes `data` as little-endian float64, independent of host order.
void write_blob(const fs::path& path, std::vector<double> data) {
  if constexpr (std::endian::native == std::endian::big) {
    byteswap_doubles(data);
  }
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string());
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size() * sizeof(double)));
    if (!out) throw std::runtime_error("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::vector<double> read_blob(const fs::path& path, std::size_t count,
                              std::size_t byte_offset) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  in.seekg(static_cast<std::streamoff>(byte_offset));
  std::vector<double> data(count);
  in.read(reinterpret_cast<char*>(data.data()),
          static_cast<std::streamsize>(count * sizeof(double)));
  if (!in) throw std::runtime_error("short read from " + path.string());
  if constexpr (std::endian::native == std::endian::big) {
    byteswap_doubles(data);
  }
  return data;
}

void write_text_atomic(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string());
    out << text;
    if (!out) throw std::runtime_error("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  json j;
  in >> j;
  return j;
}

}  // namespace

void save_checkpoint(
    const fs::path& manifest_path,
    const std::vector<std::pair<std::string, const Tensor*>>& tensors,
    const json& meta) {
  fs::path blob_path = manifest_path;
  blob_path.replace_extension(".bin");

  std::vector<double> blob;
  json entries = json::array();
  std::size_t offset = 0;
  for (const auto& [name, t] : tensors) {
    entries.push_back({{"name", name},
                       {"shape", t->shape()},
                       {"offset", offset}});
    blob.insert(blob.end(), t->data(), t->data() + t->size());
    offset += t->size() * sizeof(double);
  }

  json manifest = {{"format", "dikl-checkpoint-v1"},
                   {"blob", blob_path.filename().string()},
                   {"tensors", entries},
                   {"meta", meta}};

  // Blob first so the manifest never refers to a missing file.
  write_blob(blob_path, std::move(blob));
  write_text_atomic(manifest_path, manifest.dump(2) + "\n");
}

Checkpoint load_checkpoint(const fs::path& manifest_path) {
  const json manifest = read_json(manifest_path);
  if (manifest.value("format", "") != "dikl-checkpoint-v1") {
    throw std::runtime_error("unrecognized checkpoint format in " +
                             manifest_path.string());
  }
  const fs::path blob_path =
      manifest_path.parent_path() / manifest.at("blob").get<std::string>();

  Checkpoint ckpt;
  ckpt.meta = manifest.value("meta", json::object());
  for (const json& e : manifest.at("tensors")) {
    const auto name = e.at("name").get<std::string>();
    const auto shape = e.at("shape").get<std::vector<std::size_t>>();
    const auto offset = e.at("offset").get<std::size_t>();
    std::size_t count = 1;
    for (std::size_t s : shape) count *= s;
    Tensor t(shape);
    auto data = read_blob(blob_path, count, offset);
    std::copy(data.begin(), data.end(), t.data());
    ckpt.tensors.emplace(name, std::move(t));
  }
  return ckpt;
}

void save_samples(const fs::path& path, const Tensor& samples,
                  const std::string& target_kind) {
  if (samples.rank() != 2) {
    throw std::invalid_argument("save_samples: expected a [n, dim] tensor");
  }
  write_blob(path, std::vector<double>(samples.data(),
                                       samples.data() + samples.size()));
  json sidecar = {{"dim", samples.cols()},
                  {"count", samples.rows()},
                  {"target", target_kind}};
  write_text_atomic(path.string() + ".json", sidecar.dump(2) + "\n");
}

SampleDump load_samples(const fs::path& path) {
  const json sidecar = read_json(path.string() + ".json");
  const auto dim = sidecar.at("dim").get<std::size_t>();
  const auto count = sidecar.at("count").get<std::size_t>();
  SampleDump dump;
  dump.target_kind = sidecar.at("target").get<std::string>();
  dump.samples = Tensor({count, dim});
  auto data = read_blob(path, count * dim, 0);
  std::copy(data.begin(), data.end(), dump.samples.data());
  return dump;
}

}  // namespace dikl
