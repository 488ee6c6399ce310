#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>

#include "dikl/checkpoint.hpp"
#include "dikl/rng.hpp"
#include "dikl/tensor.hpp"

using namespace dikl;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  auto dir = fs::temp_directory_path() / "dikl_ckpt_test";
  fs::create_directories(dir);
  return dir;
}

bool bit_identical(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) return false;
  return std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("checkpoint round trip is bit exact") {
  RngStream s(77, 0);
  Tensor w = randn(s, {17, 9});
  Tensor b = randn(s, {9});
  // Exercise values that lose precision when formatted as text.
  w[0] = 1.0 / 3.0;
  w[1] = 1e-308;
  w[2] = -0.1;

  auto path = temp_dir() / "model.json";
  nlohmann::json meta = {{"iteration", 42}, {"arch", {{"hidden", {4, 4}}}}};
  save_checkpoint(path, {{"w", &w}, {"b", &b}}, meta);

  Checkpoint ckpt = load_checkpoint(path);
  REQUIRE(ckpt.tensors.count("w") == 1);
  REQUIRE(ckpt.tensors.count("b") == 1);
  CHECK(bit_identical(ckpt.tensors.at("w"), w));
  CHECK(bit_identical(ckpt.tensors.at("b"), b));
  CHECK(ckpt.meta.at("iteration") == 42);
  CHECK(ckpt.meta.at("arch").at("hidden")[0] == 4);
}

TEST_CASE("saving twice with identical content gives identical files") {
  RngStream s(78, 0);
  Tensor w = randn(s, {8, 3});
  auto p1 = temp_dir() / "a.json";
  auto p2 = temp_dir() / "b.json";
  save_checkpoint(p1, {{"w", &w}}, {});
  save_checkpoint(p2, {{"w", &w}}, {});
  auto read = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  auto blob = [](fs::path p) {
    p.replace_extension(".bin");
    return p;
  };
  CHECK(read(blob(p1)) == read(blob(p2)));
}

TEST_CASE("corrupt or missing checkpoints raise") {
  auto path = temp_dir() / "broken.json";
  {
    std::ofstream out(path);
    out << "{\"format\": \"something-else\"}";
  }
  CHECK_THROWS(load_checkpoint(path));
  CHECK_THROWS(load_checkpoint(temp_dir() / "does_not_exist.json"));
}

TEST_CASE("sample dump round trip preserves data and sidecar") {
  RngStream s(79, 0);
  Tensor x = randn(s, {25, 4});
  auto path = temp_dir() / "samples.bin";
  save_samples(path, x, "manywell");
  SampleDump dump = load_samples(path);
  CHECK(dump.target_kind == "manywell");
  REQUIRE(dump.samples.rows() == 25);
  REQUIRE(dump.samples.cols() == 4);
  CHECK(bit_identical(dump.samples, x));
}
