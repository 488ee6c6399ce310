#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "dikl/config.hpp"

using namespace dikl;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string error_of(const std::string& toml) {
  try {
    parse_run_config_text(toml);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

constexpr const char* kMinimal = "[target]\nname = \"gauss1\"\n";

}  // namespace

TEST_CASE("a minimal config keeps every default") {
  RunConfig cfg = parse_run_config_text(kMinimal);
  CHECK(cfg.mode == "dikl");
  CHECK(cfg.train.target_name == "gauss1");
  CHECK(cfg.train.T == 30);
  CHECK(cfg.train.beta_max == 0.7);
  CHECK(cfg.train.n_phi == 50);
  CHECK(cfg.train.recipe.name == "mog");
  CHECK(cfg.eval.n_samples == 2000);
  CHECK(cfg.eval.repeats == 10);
  CHECK(cfg.landscape.means == std::vector<double>{-3.0, 3.0});
}

TEST_CASE("values: numbers, scientific notation, bools, arrays, comments") {
  const std::string toml =
      "# leading comment\n"
      "[target]\n"
      "name = \"mw32\"  # trailing comment\n"
      "[diffusion]\n"
      "beta_min = 1e-6\n"
      "beta_max = 0.15\n"
      "[networks]\n"
      "gen_hidden = [64, 32]\n"
      "[eval]\n"
      "metrics = [\"w2\", \"energy_tvd\"]\n"
      "dump_samples = true\n"
      "[run]\n"
      "seed = 42\n"
      "out_dir = \"runs/x # not a comment\"\n";
  RunConfig cfg = parse_run_config_text(toml);
  CHECK(cfg.train.target_name == "mw32");
  CHECK(cfg.train.beta_min == 1e-6);
  CHECK(cfg.train.beta_max == 0.15);
  CHECK(cfg.train.gen_hidden == std::vector<std::size_t>{64, 32});
  CHECK(cfg.eval.metrics == std::vector<std::string>{"w2", "energy_tvd"});
  CHECK(cfg.eval.dump_samples);
  CHECK(cfg.train.seed == 42);
  CHECK(cfg.train.out_dir == "runs/x # not a comment");
}

TEST_CASE("unknown keys and sections are rejected with the line number") {
  std::string msg = error_of("[target]\nname = \"gauss1\"\n[trainer]\nfoo = 3\n");
  CHECK(msg.find("line 4") != std::string::npos);
  CHECK(msg.find("trainer.foo") != std::string::npos);

  msg = error_of("[target]\nname = \"gauss1\"\n[nope]\nx = 1\n");
  CHECK(msg.find("line 4") != std::string::npos);
  CHECK(msg.find("nope.x") != std::string::npos);

  msg = error_of("[target]\nlabel = \"gauss1\"\n");
  CHECK(msg.find("target.label") != std::string::npos);
}

TEST_CASE("the target name is required") {
  const std::string msg = error_of("[trainer]\nn_phi = 3\n");
  CHECK(msg.find("target.name") != std::string::npos);
}

TEST_CASE("type errors name the key") {
  std::string msg =
      error_of("[target]\nname = \"gauss1\"\n[trainer]\nlr_gen = \"fast\"\n");
  CHECK(msg.find("number") != std::string::npos);
  CHECK(msg.find("trainer.lr_gen") != std::string::npos);

  msg = error_of("[target]\nname = \"gauss1\"\n[trainer]\nn_phi = 2.5\n");
  CHECK(msg.find("integer") != std::string::npos);

  msg = error_of("[target]\nname = \"gauss1\"\n[eval]\ndump_samples = 1\n");
  CHECK(msg.find("bool") != std::string::npos);
}

TEST_CASE("malformed lines are reported") {
  CHECK(error_of("[target\nname = \"g\"\n").find("line 1") !=
        std::string::npos);
  CHECK(error_of("name = \"g\"\n").find("outside") != std::string::npos);
  CHECK(error_of("[target]\nname \"g\"\n").find("key = value") !=
        std::string::npos);
  CHECK(error_of("[target]\nname = \"gauss1\"\n[networks]\n"
                 "gen_hidden = [64, \"a\"]\n")
            .find("mixed") != std::string::npos);
  CHECK(error_of("[run]\nmode = \"foo\"\n[target]\nname = \"g\"\n")
            .find("mode") != std::string::npos);
}

TEST_CASE("posterior recipe presets apply before field overrides") {
  // The override wins even when it precedes the recipe line.
  const std::string toml =
      "[target]\nname = \"mog40\"\n"
      "[posterior]\n"
      "n_importance = 77\n"
      "recipe = \"mog\"\n";
  RunConfig cfg = parse_run_config_text(toml);
  CHECK(cfg.train.recipe.init == Recipe::Init::kAis);
  CHECK(cfg.train.recipe.ais.n_importance == 77);
  CHECK(cfg.train.recipe.ais.n_steps == 15);

  const std::string bad =
      "[target]\nname = \"mog40\"\n[posterior]\nrecipe = \"nope\"\n";
  CHECK(error_of(bad).find("posterior.recipe") != std::string::npos);
}

TEST_CASE("json configs parse to the same result as toml") {
  const std::string toml =
      "[target]\nname = \"dw4\"\n"
      "[trainer]\nouter_iters = 123\nlr_gen = 0.002\n"
      "[networks]\ngen_hidden = [32, 32]\n";
  const std::string json = R"({
    "target": {"name": "dw4"},
    "trainer": {"outer_iters": 123, "lr_gen": 0.002},
    "networks": {"gen_hidden": [32, 32]}
  })";
  const RunConfig a = parse_run_config_text(toml, false);
  const RunConfig b = parse_run_config_text(json, true);
  CHECK(resolved_config_toml(a) == resolved_config_toml(b));

  CHECK_THROWS_AS(parse_run_config_text("[1, 2]", true), ConfigError);
  // Unknown keys are rejected in JSON too (no line numbers there).
  const std::string bad = R"({"target": {"name": "dw4"}, "trainer": {"x": 1}})";
  CHECK_THROWS_AS(parse_run_config_text(bad, true), ConfigError);
}

TEST_CASE("a json file is detected by extension or a leading brace") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "dikl_config_test";
  fs::create_directories(dir);
  const std::string json = R"({"target": {"name": "gauss2"}})";

  std::ofstream(dir / "a.json") << json;
  CHECK(parse_run_config(dir / "a.json").train.target_name == "gauss2");

  std::ofstream(dir / "b.toml") << json;  // brace sniffing
  CHECK(parse_run_config(dir / "b.toml").train.target_name == "gauss2");

  CHECK_THROWS_AS(parse_run_config(dir / "missing.toml"), ConfigError);
  fs::remove_all(dir);
}

TEST_CASE("resolved config text round-trips exactly for every preset") {
  for (const std::string& name : preset_names()) {
    CAPTURE(name);
    const RunConfig cfg = preset_config(name);
    const std::string text = resolved_config_toml(cfg);
    const RunConfig back = parse_run_config_text(text);
    CHECK(resolved_config_toml(back) == text);
  }
  CHECK_THROWS_AS(preset_config("mog40"), ConfigError);
}

TEST_CASE("shipped preset files stay in sync with the built-in presets") {
  const std::filesystem::path dir = DIKL_CONFIG_DIR;
  for (const std::string& name : preset_names()) {
    CAPTURE(name);
    const std::filesystem::path file = dir / (name + ".toml");
    REQUIRE(std::filesystem::exists(file));
    const RunConfig parsed = parse_run_config(file);
    CHECK(resolved_config_toml(parsed) ==
          resolved_config_toml(preset_config(name)));
  }
}

TEST_CASE("paper presets carry the published hyperparameters") {
  const RunConfig mog = preset_config("mog40_paper");
  CHECK(mog.train.T == 30);
  CHECK(mog.train.beta_min == 1e-4);
  CHECK(mog.train.beta_max == 0.7);
  CHECK(mog.train.weighting == Weighting::kInvAlpha);
  CHECK(mog.train.gen_hidden == std::vector<std::size_t>(4, 400));
  CHECK(mog.train.latent_dim == 2);
  CHECK(mog.train.n_phi == 50);
  CHECK(mog.train.lr_gen == 1e-3);
  CHECK(mog.train.lr_score == 1e-4);
  CHECK(mog.train.batch_gen == 1024);
  CHECK(mog.train.grad_clip == 10.0);
  CHECK(mog.train.recipe.init == Recipe::Init::kAis);
  CHECK(mog.train.recipe.ais.n_importance == 10);
  CHECK(mog.train.recipe.ais.n_steps == 15);
  CHECK(mog.train.recipe.ais.kernel.kind == InnerKernel::Kind::kHmc);
  CHECK(mog.train.recipe.ais.kernel.step == 1.0);
  CHECK(mog.train.recipe.refine_steps == 5);
  CHECK(mog.train.recipe.refine_step == 1e-2);

  const RunConfig mw = preset_config("mw32_paper");
  CHECK(mw.train.beta_max == 0.15);
  CHECK(mw.train.latent_dim == 32);
  CHECK(mw.train.recipe.ais.kernel.step == 0.3);
  CHECK(mw.train.recipe.refine_step == 5e-2);

  const RunConfig dw = preset_config("dw4_paper");
  CHECK(dw.train.beta_min == 1e-6);
  CHECK(dw.train.beta_max == 0.05);
  CHECK(dw.train.weighting == Weighting::kUniform);
  CHECK(dw.train.act == Activation::kRelu);
  CHECK(dw.train.recipe.ais.n_importance == 20);
  CHECK(dw.train.recipe.ais.n_steps == 10);
  CHECK(dw.train.recipe.ais.kernel.kind == InnerKernel::Kind::kMala);
  CHECK(dw.train.recipe.refine_steps == 50);
  CHECK(dw.train.recipe.refine_adaptive);

  const RunConfig lj = preset_config("lj13_paper");
  CHECK(lj.train.recipe.init == Recipe::Init::kIs);
  CHECK(lj.train.recipe.ais.n_importance == 500);
  CHECK(lj.train.recipe.refine_steps == 1000);
  CHECK(lj.train.recipe.keep_last == 500);
  CHECK(lj.train.batch_gen == 128);
}
