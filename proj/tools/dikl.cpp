// Command-line front end: train, sample, eval, landscape, posterior-check.
//
// Exit codes: 0 ok, 2 config error, 3 runtime abort, 4 oracle failure.
// Every flag with a DIKL_-prefixed environment variable can be overridden
// from the environment; explicit flags win.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dikl/checkpoint.hpp"
#include "dikl/config.hpp"
#include "dikl/eval.hpp"
#include "dikl/nets.hpp"
#include "dikl/posterior.hpp"
#include "dikl/rng.hpp"
#include "dikl/schedule.hpp"
#include "dikl/targets.hpp"
#include "dikl/tensor.hpp"
#include "dikl/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace dikl;

namespace {

std::string weighting_name(Weighting w) {
  return w == Weighting::kInvAlpha ? "inv_alpha" : "uniform";
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

// Resolved config plus a small metadata record; enough to re-run.
void write_run_artifacts(const fs::path& dir, const RunConfig& cfg,
                         const std::string& command) {
  fs::create_directories(dir);
  write_text(dir / "resolved.toml", resolved_config_toml(cfg));
  json meta = {
      {"version", kVersion},
      {"command", command},
      {"mode", cfg.mode},
      {"seed", cfg.train.seed},
      {"threads", cfg.threads},
      {"target", cfg.train.target_name},
      {"schedule",
       {{"T", cfg.train.T},
        {"beta_min", cfg.train.beta_min},
        {"beta_max", cfg.train.beta_max},
        {"weighting", weighting_name(cfg.train.weighting)}}},
      {"recipe", cfg.train.recipe.name},
  };
  write_text(dir / "run.json", meta.dump(2) + "\n");
}

struct TrainArgs {
  std::string config;
  std::uint64_t seed = 0;
  std::string out;
  std::size_t threads = 0;
  bool seed_set = false, out_set = false, threads_set = false;
};

int run_train(const TrainArgs& a) {
  RunConfig cfg = parse_run_config(a.config);
  if (a.seed_set) cfg.train.seed = a.seed;
  if (a.out_set) cfg.train.out_dir = a.out;
  if (a.threads_set) cfg.threads = a.threads;
  if (cfg.train.out_dir.empty()) {
    throw ConfigError(
        "train: no output directory (set run.out_dir or pass --out)");
  }

  write_run_artifacts(cfg.train.out_dir, cfg, "train");
  auto target = make_target(cfg.train.target_name);

  std::cout << "training " << cfg.mode << " on " << cfg.train.target_name
            << " (seed " << cfg.train.seed << ", " << cfg.train.outer_iters
            << " outer iterations) -> " << cfg.train.out_dir << "\n";

  const auto mode =
      cfg.mode == "rkl-sm" ? Trainer::Mode::kRklSm : Trainer::Mode::kDikl;
  Trainer trainer(*target, cfg.train, mode);
  const auto t0 = std::chrono::steady_clock::now();
  trainer.run([&](const MetricRow& row) {
    const bool evaluated = !std::isnan(row.early_stop_tvd);
    if (!evaluated && row.iter != cfg.train.outer_iters) return;
    std::cout << "  iter " << row.iter << "/" << cfg.train.outer_iters
              << "  inner " << row.inner_loss << "  outer " << row.outer_loss;
    if (evaluated) std::cout << "  es_tvd " << row.early_stop_tvd;
    std::cout << "  acc " << row.acceptance << "\n" << std::flush;
  });
  const std::chrono::duration<double> wall =
      std::chrono::steady_clock::now() - t0;

  RunState state = std::move(trainer).take_state();
  std::cout << "done in " << wall.count() << " s; best es_tvd "
            << state.best_metric << " at iteration " << state.best_iter
            << "\n";
  std::cout << "wrote " << cfg.train.out_dir << "/last.ckpt.json and "
            << cfg.train.out_dir << "/metrics.csv\n";
  return 0;
}

struct SampleArgs {
  std::string checkpoint, out;
  std::size_t n = 1000;
  std::uint64_t seed = 0;
};

int run_sample(const SampleArgs& a) {
  LoadedRun run = load_run(a.checkpoint);
  RngStream stream = RngStream(a.seed, 0).substream("sample");
  Tensor z = randn(stream, {a.n, run.gen.latent_dim()});

  reset_forward_pass_count();
  const auto t0 = std::chrono::steady_clock::now();
  Tensor x = run.gen.generate(z);
  const std::chrono::duration<double> wall =
      std::chrono::steady_clock::now() - t0;
  const std::uint64_t passes = forward_pass_count();

  if (!a.out.empty()) {
    if (const fs::path parent = fs::path(a.out).parent_path();
        !parent.empty()) {
      fs::create_directories(parent);
    }
  }
  save_samples(a.out, x, run.cfg.target_name);

  std::cout << "wrote " << x.rows() << " samples (dim " << x.cols() << ") to "
            << a.out << "\n";
  std::cout << "batch wall time: " << wall.count() * 1e3
            << " ms, network forward passes: " << passes << "\n";
  return 0;
}

struct EvalArgs {
  std::string checkpoint, samples, target, reference, config, out;
  std::vector<std::string> metrics;
  std::uint64_t seed = 0;
  std::size_t n = 0, repeats = 0;  // 0 = take from config or defaults
  bool seed_set = false;
};

std::vector<std::string> supported_metrics(const EnergyTarget& target) {
  std::vector<std::string> m{"w2", "energy_tvd"};
  if (target.particles()) m.push_back("distance_tvd");
  if (target.kind() == "mog") {
    m.push_back("mean_log_density");
    m.push_back("mode_coverage");
  }
  return m;
}

int run_eval(const EvalArgs& a) {
  if (a.checkpoint.empty() == a.samples.empty()) {
    throw ConfigError("eval: pass exactly one of --checkpoint or --samples");
  }

  EvalSettings settings;
  std::string target_name = a.target;
  if (!a.config.empty()) {
    RunConfig cfg = parse_run_config(a.config);
    settings = cfg.eval;
    if (target_name.empty()) target_name = cfg.train.target_name;
  }
  if (a.n > 0) settings.n_samples = a.n;
  if (a.repeats > 0) settings.repeats = a.repeats;
  if (!a.metrics.empty()) settings.metrics = a.metrics;

  LoadedRun run;
  SampleDump dump;
  if (!a.checkpoint.empty()) {
    run = load_run(a.checkpoint);
    if (a.target.empty()) target_name = run.cfg.target_name;
  } else {
    dump = load_samples(a.samples);
    if (target_name.empty()) target_name = dump.target_kind;
  }
  if (target_name.empty()) {
    throw ConfigError("eval: target unknown; pass --target");
  }
  auto target = make_target(target_name);

  std::size_t n = settings.n_samples;
  std::size_t repeats = settings.repeats;
  if (!a.samples.empty()) {
    // A fixed dump is chunked into disjoint repeats.
    if (dump.samples.cols() != target->dim()) {
      throw ConfigError("eval: sample dump dimension mismatch for target " +
                        target_name);
    }
    if (dump.samples.rows() < n) {
      n = dump.samples.rows();
      repeats = 1;
    } else {
      repeats = std::min(repeats, dump.samples.rows() / n);
    }
    if (n == 0) throw ConfigError("eval: sample dump is empty");
  }

  std::vector<std::string> metrics = settings.metrics;
  const std::vector<std::string> supported = supported_metrics(*target);
  if (metrics.empty()) {
    metrics = supported;
  } else {
    for (const auto& m : metrics) {
      if (std::find(supported.begin(), supported.end(), m) ==
          supported.end()) {
        throw ConfigError("eval: metric " + m + " unsupported for target " +
                          target_name);
      }
    }
  }

  RngStream root(a.seed, 0);
  Tensor reference;
  if (!a.reference.empty()) {
    SampleDump ref = load_samples(a.reference);
    if (ref.samples.cols() != target->dim()) {
      throw ConfigError("eval: reference dump dimension mismatch for target " +
                        target_name);
    }
    if (ref.samples.rows() < n) {
      throw ConfigError("eval: reference dump has fewer rows than n_samples");
    }
    reference = Tensor({n, target->dim()});
    std::copy(ref.samples.data(), ref.samples.data() + n * target->dim(),
              reference.data());
  } else {
    RngStream ref_stream = root.substream("reference");
    reference = ground_truth_samples(*target, n, ref_stream);
  }

  auto draw = [&](std::size_t r) {
    if (!a.checkpoint.empty()) {
      RngStream zs = root.substream("eval").substream(r);
      Tensor z = randn(zs, {n, run.gen.latent_dim()});
      return run.gen.generate(z);
    }
    Tensor chunk({n, target->dim()});
    std::copy(dump.samples.data() + r * n * target->dim(),
              dump.samples.data() + (r + 1) * n * target->dim(), chunk.data());
    return chunk;
  };

  std::cout << "eval on " << target_name << ": " << repeats << " repeats of "
            << n << " samples\n";

  std::map<std::string, std::vector<double>> values;
  Tensor first_draw;
  for (std::size_t r = 0; r < repeats; ++r) {
    Tensor x = draw(r);
    if (r == 0 && settings.dump_samples) first_draw = x;
    for (const auto& m : metrics) {
      double v = 0.0;
      if (m == "w2") {
        v = wasserstein2(x, reference);
      } else if (m == "energy_tvd") {
        v = energy_tvd(*target, x, reference);
      } else if (m == "distance_tvd") {
        v = distance_tvd(x, reference, *target->particles());
      } else if (m == "mean_log_density") {
        v = mean_log_density(*target, x);
      } else if (m == "mode_coverage") {
        v = static_cast<double>(mode_coverage(*target, x).covered);
      }
      values[m].push_back(v);
    }
  }

  json report = {{"target", target_name},
                 {"n_samples", n},
                 {"repeats", repeats},
                 {"seed", a.seed},
                 {"version", kVersion},
                 {"metrics", json::object()}};
  for (const auto& m : metrics) {
    const auto& v = values[m];
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    const double sd =
        v.size() > 1 ? std::sqrt(var / static_cast<double>(v.size() - 1))
                     : 0.0;
    std::ostringstream line;
    line << m << ": " << mean << " +/- " << sd;
    std::cout << "  " << line.str() << "\n";
    report["metrics"][m] = {{"mean", mean}, {"std", sd}, {"values", v}};
  }

  if (!a.out.empty()) {
    fs::create_directories(a.out);
    write_text(fs::path(a.out) / "eval.json", report.dump(2) + "\n");
    if (settings.dump_samples && first_draw.rank() == 2) {
      save_samples(fs::path(a.out) / "eval_samples.bin", first_draw,
                   target_name);
    }
    std::cout << "wrote " << a.out << "/eval.json\n";
  }
  return 0;
}

struct LandscapeArgs {
  std::string config, out;
};

std::vector<double> linspace(double lo, double hi, std::size_t k) {
  std::vector<double> g(k);
  for (std::size_t i = 0; i < k; ++i) {
    g[i] = k == 1 ? lo
                  : lo + (hi - lo) * static_cast<double>(i) /
                            static_cast<double>(k - 1);
  }
  return g;
}

int run_landscape(const LandscapeArgs& a) {
  RunConfig cfg = parse_run_config(a.config);
  const LandscapeSettings& L = cfg.landscape;
  if (L.weights.empty() || L.weights.size() != L.means.size() ||
      L.weights.size() != L.variances.size()) {
    throw ConfigError(
        "landscape: weights, means, variances must have equal nonzero size");
  }
  if (L.mu_points == 0 || L.sigma_points == 0 || L.levels.empty()) {
    throw ConfigError("landscape: empty grid or level list");
  }

  Mog1d target{L.weights, L.means, L.variances};
  NoiseSchedule sched = build_vp_linear(cfg.train.T, cfg.train.beta_min,
                                        cfg.train.beta_max,
                                        cfg.train.weighting);
  std::vector<NoiseLevel> levels;
  for (std::size_t idx : L.levels) {
    if (idx == 0) {
      levels.push_back({1.0, 0.0});
    } else if (idx <= sched.T) {
      levels.push_back({sched.alpha_t(idx), sched.sigma_t(idx)});
    } else {
      throw ConfigError("landscape: level " + std::to_string(idx) +
                        " exceeds diffusion.T");
    }
  }

  const std::vector<double> mu = linspace(L.mu_min, L.mu_max, L.mu_points);
  const std::vector<double> sigma =
      linspace(L.sigma_min, L.sigma_max, L.sigma_points);
  LandscapeGrid grid = kl_landscape(mu, sigma, target, levels);

  fs::create_directories(a.out);
  for (std::size_t l = 0; l < levels.size(); ++l) {
    std::ostringstream csv;
    csv << "# kl(N(mu, sigma^2) conv k || target conv k), level index "
        << L.levels[l] << " (alpha " << levels[l].alpha << ", sigma "
        << levels[l].sigma << ")\n";
    csv << "# rows: mu " << L.mu_min << ".." << L.mu_max << " ("
        << L.mu_points << "), cols: sigma " << L.sigma_min << ".."
        << L.sigma_max << " (" << L.sigma_points << ")\n";
    std::size_t best_i = 0, best_j = 0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
      for (std::size_t j = 0; j < sigma.size(); ++j) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", grid.at(l, i, j));
        csv << (j ? "," : "") << buf;
        if (grid.at(l, i, j) < grid.at(l, best_i, best_j)) {
          best_i = i;
          best_j = j;
        }
      }
      csv << "\n";
    }
    const fs::path path =
        fs::path(a.out) /
        ("landscape_level" + std::to_string(L.levels[l]) + ".csv");
    write_text(path, csv.str());
    std::cout << "level " << L.levels[l] << ": argmin mu " << mu[best_i]
              << ", sigma " << sigma[best_j] << ", kl "
              << grid.at(l, best_i, best_j) << " -> " << path.string()
              << "\n";
  }
  return 0;
}

struct PosteriorCheckArgs {
  std::string config;
  std::uint64_t seed = 7;
};

struct RecipeReport {
  std::string name;
  bool pass = true;
  std::string detail;
};

// Mean and variance of each coordinate against the analytic posterior
// N(alpha_t x_t, sigma_t^2 I), using 3 x standard-error bands. `ess` is the
// effective sample count behind the estimates.
RecipeReport moment_check(const std::string& name, const Tensor& mean,
                          const Tensor& var, const Tensor& want_mean,
                          double want_var, double ess) {
  double worst_mean = 0.0, worst_var = 0.0;
  const double se_mean = std::sqrt(want_var / ess);
  const double se_var = want_var * std::sqrt(2.0 / ess);
  for (std::size_t i = 0; i < mean.size(); ++i) {
    worst_mean =
        std::max(worst_mean, std::abs(mean[i] - want_mean[i]) / se_mean);
    worst_var = std::max(worst_var, std::abs(var[i] - want_var) / se_var);
  }
  RecipeReport rep;
  rep.name = name;
  rep.pass = worst_mean < 3.0 && worst_var < 3.0;
  std::ostringstream d;
  d << "max mean dev " << worst_mean << " SE, max var dev " << worst_var
    << " SE";
  rep.detail = d.str();
  return rep;
}

int run_posterior_check(const PosteriorCheckArgs& a) {
  RunConfig cfg;
  if (!a.config.empty()) cfg = parse_run_config(a.config);
  const PosteriorCheckSettings& S = cfg.posterior_check;
  NoiseSchedule sched = build_vp_linear(cfg.train.T, cfg.train.beta_min,
                                        cfg.train.beta_max,
                                        cfg.train.weighting);
  if (S.t < 1 || S.t > sched.T) {
    throw ConfigError("posterior_check: t outside the ladder");
  }
  if (S.n < 100) throw ConfigError("posterior_check: n too small");

  auto target = make_gauss(S.dim);
  RngStream root(a.seed, 0);
  RngStream xs = root.substream("x");
  Tensor x0 = randn(xs, {S.dim});
  Tensor eps = randn(xs, {S.dim});
  Tensor x_t({std::vector<std::size_t>{S.dim}});
  Tensor want_mean({std::vector<std::size_t>{S.dim}});
  for (std::size_t i = 0; i < S.dim; ++i) {
    x_t[i] = sched.alpha_t(S.t) * x0[i] + sched.sigma_t(S.t) * eps[i];
    want_mean[i] = sched.alpha_t(S.t) * x_t[i];
  }
  const double want_var = sched.sigma2_t(S.t);

  PosteriorProblem prob;
  prob.target = target.get();
  prob.sched = &sched;
  prob.x_t = x_t;
  prob.t = S.t;

  std::cout << "posterior check: gauss" << S.dim << ", t " << S.t << ", n "
            << S.n << ", seed " << a.seed << "\n";

  std::vector<RecipeReport> reports;

  // MALA and HMC: independent chains started at the noised point, one
  // retained draw each, so plain standard errors apply.
  auto chain_check = [&](const std::string& name, bool hmc, double step) {
    const std::size_t chains = S.n, burn = 150;
    Tensor mean({std::vector<std::size_t>{S.dim}});
    Tensor var({std::vector<std::size_t>{S.dim}});
    RngStream cs = root.substream(name);
    double acc = 0.0;
    for (std::size_t c = 0; c < chains; ++c) {
      RngStream one = cs.substream(c);
      ChainState st = make_chain(prob, x_t, step);
      for (std::size_t i = 0; i < burn; ++i) {
        if (hmc) {
          hmc_step(prob, st, one, S.hmc_leapfrog, 1.0);
        } else {
          mala_step(prob, st, one);
        }
      }
      for (std::size_t i = 0; i < S.dim; ++i) {
        mean[i] += st.x[i];
        var[i] += st.x[i] * st.x[i];
      }
      acc += st.acceptance_rate();
    }
    for (std::size_t i = 0; i < S.dim; ++i) {
      mean[i] /= static_cast<double>(chains);
      var[i] = var[i] / static_cast<double>(chains) - mean[i] * mean[i];
    }
    RecipeReport rep = moment_check(name, mean, var, want_mean, want_var,
                                    static_cast<double>(chains));
    std::ostringstream d;
    d << rep.detail << ", acceptance " << acc / static_cast<double>(chains);
    rep.detail = d.str();
    reports.push_back(rep);
  };
  chain_check("mala", false, S.mala_step);
  chain_check("hmc", true, S.hmc_step);

  // Importance-style estimates: weighted moments with effective-sample SEs.
  auto weighted_check = [&](const std::string& name, const IsResult& res) {
    Tensor mean({std::vector<std::size_t>{S.dim}});
    Tensor var({std::vector<std::size_t>{S.dim}});
    double w2 = 0.0;
    for (double w : res.weights) w2 += w * w;
    for (std::size_t k = 0; k < res.weights.size(); ++k) {
      for (std::size_t i = 0; i < S.dim; ++i) {
        mean[i] += res.weights[k] * res.samples.at(k, i);
      }
    }
    for (std::size_t k = 0; k < res.weights.size(); ++k) {
      for (std::size_t i = 0; i < S.dim; ++i) {
        const double d = res.samples.at(k, i) - mean[i];
        var[i] += res.weights[k] * d * d;
      }
    }
    const double ess = 1.0 / w2;
    RecipeReport rep = moment_check(name, mean, var, want_mean, want_var, ess);
    std::ostringstream d;
    d << rep.detail << ", ess " << ess;
    rep.detail = d.str();
    reports.push_back(rep);
  };
  {
    RngStream s = root.substream("is");
    weighted_check("is", is_weights(prob, S.n, s));
  }
  {
    AisConfig ac;
    ac.n_importance = S.n;
    ac.n_steps = 15;
    ac.kernel.kind = InnerKernel::Kind::kMala;
    ac.kernel.step = S.mala_step;
    RngStream s = root.substream("ais");
    weighted_check("ais", ais_run(prob, ac, s));
  }

  // SIR: one categorical pick from a fresh importance pool per draw.
  {
    const std::size_t draws = std::max<std::size_t>(S.n / 4, 500);
    const std::size_t pool = 256;
    Tensor mean({std::vector<std::size_t>{S.dim}});
    Tensor var({std::vector<std::size_t>{S.dim}});
    RngStream s = root.substream("sir");
    for (std::size_t d = 0; d < draws; ++d) {
      RngStream one = s.substream(d);
      IsResult res = is_weights(prob, pool, one);
      const std::size_t idx = sir_index(res.weights, one);
      for (std::size_t i = 0; i < S.dim; ++i) {
        mean[i] += res.samples.at(idx, i);
        var[i] += res.samples.at(idx, i) * res.samples.at(idx, i);
      }
    }
    for (std::size_t i = 0; i < S.dim; ++i) {
      mean[i] /= static_cast<double>(draws);
      var[i] = var[i] / static_cast<double>(draws) - mean[i] * mean[i];
    }
    reports.push_back(moment_check("sir", mean, var, want_mean, want_var,
                                   static_cast<double>(draws)));
  }

  // A one-interval annealing run must reduce to plain importance sampling
  // bit for bit when both consume identically seeded streams.
  {
    AisConfig ac;
    ac.n_importance = 512;
    ac.n_steps = 1;
    RngStream s1 = root.substream("ais1");
    RngStream s2 = root.substream("ais1");
    IsResult av = ais_run(prob, ac, s1);
    IsResult iv = is_weights(prob, 512, s2);
    bool same = av.weights == iv.weights &&
                av.samples.shape() == iv.samples.shape();
    if (same) {
      for (std::size_t i = 0; i < av.samples.size(); ++i) {
        if (av.samples[i] != iv.samples[i]) {
          same = false;
          break;
        }
      }
    }
    RecipeReport rep;
    rep.name = "ais(K=1) == is";
    rep.pass = same;
    rep.detail = same ? "bitwise identical" : "mismatch";
    reports.push_back(rep);
  }

  std::vector<std::string> failing;
  for (const auto& rep : reports) {
    std::cout << (rep.pass ? "[PASS] " : "[FAIL] ") << rep.name << ": "
              << rep.detail << "\n";
    if (!rep.pass) failing.push_back(rep.name);
  }
  if (!failing.empty()) {
    std::cerr << "posterior-check: failing recipes:";
    for (const auto& f : failing) std::cerr << " " << f;
    std::cerr << "\n";
    return 4;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"One-step neural samplers for unnormalized densities"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  TrainArgs train;
  CLI::App* cmd_train =
      app.add_subcommand("train", "Train a sampler from a config file");
  cmd_train->add_option("--config", train.config, "run config (TOML or JSON)")
      ->required();
  auto* t_seed = cmd_train->add_option("--seed", train.seed, "seed override")
                     ->envname("DIKL_SEED");
  auto* t_out = cmd_train
                    ->add_option("--out", train.out,
                                 "output directory override")
                    ->envname("DIKL_OUT");
  auto* t_thr = cmd_train
                    ->add_option("--threads", train.threads,
                                 "thread count (recorded in metadata)")
                    ->envname("DIKL_THREADS");

  SampleArgs sample;
  CLI::App* cmd_sample =
      app.add_subcommand("sample", "Draw one-step samples from a checkpoint");
  cmd_sample
      ->add_option("--checkpoint", sample.checkpoint, "checkpoint manifest")
      ->required();
  cmd_sample->add_option("--n", sample.n, "sample count (default 1000)");
  cmd_sample->add_option("--out", sample.out, "output sample dump path")
      ->required();
  cmd_sample->add_option("--seed", sample.seed, "latent seed")
      ->envname("DIKL_SEED");

  EvalArgs eval;
  CLI::App* cmd_eval = app.add_subcommand(
      "eval", "Compute metrics for a checkpoint or a sample dump");
  cmd_eval->add_option("--checkpoint", eval.checkpoint,
                       "checkpoint manifest to sample from");
  cmd_eval->add_option("--samples", eval.samples, "pre-drawn sample dump");
  cmd_eval->add_option("--target", eval.target, "target name override");
  cmd_eval->add_option("--reference", eval.reference,
                       "reference sample dump (default: fresh ground truth)");
  cmd_eval
      ->add_option("--metrics", eval.metrics,
                   "comma-separated metric list (default: all supported)")
      ->delimiter(',');
  cmd_eval->add_option("--config", eval.config, "config supplying [eval]");
  cmd_eval->add_option("--out", eval.out, "directory for eval.json");
  cmd_eval->add_option("--n", eval.n, "samples per repeat");
  cmd_eval->add_option("--repeats", eval.repeats, "repeat count");
  cmd_eval->add_option("--seed", eval.seed, "evaluation seed")
      ->envname("DIKL_SEED");

  LandscapeArgs landscape;
  CLI::App* cmd_landscape = app.add_subcommand(
      "landscape", "Write noise-convolved KL landscape grids as CSV");
  cmd_landscape->add_option("--config", landscape.config, "run config")
      ->required();
  cmd_landscape->add_option("--out", landscape.out, "output directory")
      ->required();

  PosteriorCheckArgs pc;
  CLI::App* cmd_pc = app.add_subcommand(
      "posterior-check",
      "Run every posterior sampler against the analytic Gaussian oracle");
  cmd_pc->add_option("--config", pc.config,
                     "run config supplying [posterior_check]");
  cmd_pc->add_option("--seed", pc.seed, "oracle seed")->envname("DIKL_SEED");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    train.seed_set = t_seed->count() > 0;
    train.out_set = t_out->count() > 0;
    train.threads_set = t_thr->count() > 0;
    if (cmd_train->parsed()) return run_train(train);
    if (cmd_sample->parsed()) return run_sample(sample);
    if (cmd_eval->parsed()) return run_eval(eval);
    if (cmd_landscape->parsed()) return run_landscape(landscape);
    if (cmd_pc->parsed()) return run_posterior_check(pc);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
