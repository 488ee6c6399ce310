#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "dikl/trainer.hpp"

namespace dikl {

inline constexpr const char* kVersion = "0.1.0";

// Thrown on any config problem; the message carries the file line where one
// is known ("line 12: unknown key trainer.foo").
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EvalSettings {
  std::size_t n_samples = 2000;
  std::size_t repeats = 10;
  std::vector<std::string> metrics;  // empty = every metric the target supports
  bool dump_samples = false;         // write generated samples next to metrics
};

// 1D mixture-vs-Gaussian KL landscape demo grid.
struct LandscapeSettings {
  std::vector<double> weights{0.5, 0.5};
  std::vector<double> means{-3.0, 3.0};
  std::vector<double> variances{0.01, 0.01};
  double mu_min = -4.0, mu_max = 4.0;
  std::size_t mu_points = 41;
  double sigma_min = 0.2, sigma_max = 0.2;
  std::size_t sigma_points = 1;
  // Ladder indices to evaluate; 0 means the identity kernel (no noise).
  std::vector<std::size_t> levels{0, 30};
};

// Analytic-Gaussian posterior oracle run (every sampler recipe vs the
// closed-form posterior, 3 x standard-error comparison).
struct PosteriorCheckSettings {
  std::size_t dim = 2;
  std::size_t t = 15;
  std::size_t n = 10000;
  double mala_step = 0.25;
  double hmc_step = 0.4;
  std::size_t hmc_leapfrog = 3;
};

// Everything a run needs. Sections mirror the library's modules.
struct RunConfig {
  std::string mode = "dikl";  // or "rkl-sm"
  std::size_t threads = 1;
  TrainConfig train;
  EvalSettings eval;
  LandscapeSettings landscape;
  PosteriorCheckSettings posterior_check;
};

// Parse TOML (default) or JSON (".json" extension, or a leading '{'). The
// TOML dialect is the flat subset the presets use: [section] headers,
// key = value with string/number/bool/array values, # comments. Unknown
// sections or keys are rejected with the offending line number.
RunConfig parse_run_config(const std::filesystem::path& path);
RunConfig parse_run_config_text(const std::string& text,
                                bool json = false);

// The resolved config as TOML text, every key explicit. Written next to
// run artifacts so an experiment can be replayed from its output directory.
std::string resolved_config_toml(const RunConfig& cfg);

// Built-in experiment presets: "<target>_<scale>" for target in
// {mog40, mw32, dw4, lj13} and scale in {paper, desk}. The paper scale
// mirrors the published hyperparameters; the desk scale is sized for a
// single desktop CPU core.
RunConfig preset_config(const std::string& name);
std::vector<std::string> preset_names();

}  // namespace dikl
