#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dikl/nets.hpp"
#include "dikl/optim.hpp"
#include "dikl/posterior.hpp"
#include "dikl/rng.hpp"
#include "dikl/schedule.hpp"
#include "dikl/targets.hpp"
#include "dikl/tensor.hpp"

namespace dikl {

struct EarlyStopConfig {
  std::size_t n_eval = 2000;      // generator samples per evaluation
  std::size_t mala_steps = 50;    // refinement chain length per sample
  double mala_step = 0.1;         // refinement step size
  std::size_t interval = 250;     // outer iterations between evaluations
};

struct TrainConfig {
  std::string target_name = "gauss1";  // recorded in checkpoints

  // Noise ladder.
  std::size_t T = 30;
  double beta_min = 1e-4, beta_max = 0.7;
  Weighting weighting = Weighting::kInvAlpha;

  // Architectures. latent_dim 0 means "use the target dimension".
  std::size_t latent_dim = 0;
  std::vector<std::size_t> gen_hidden{400, 400, 400, 400};
  std::vector<std::size_t> score_hidden{400, 400, 400, 400};
  Activation act = Activation::kSilu;

  std::size_t n_phi = 50;  // inner score updates per outer iteration
  std::size_t outer_iters = 1000;
  double lr_gen = 1e-3, lr_score = 1e-4;
  std::size_t batch_gen = 1024, batch_score = 1024;
  double grad_clip = 10.0;

  Recipe recipe = Recipe::mog();
  EarlyStopConfig early_stop;

  std::uint64_t seed = 0;
  std::string out_dir;  // checkpoints and metrics CSV; empty = memory only
};

struct MetricRow {
  std::size_t iter = 0;
  double inner_loss = 0.0;      // last DSM loss of the inner epoch
  double outer_loss = 0.0;      // surrogate loss value
  double early_stop_tvd = 0.0;  // NaN on iterations without an evaluation
  double refine_step = 0.0;     // posterior refinement step after adaptation
  double acceptance = 0.0;      // refinement acceptance over the batch
};

struct RunState {
  GeneratorNet gen;
  ScoreNet score;
  Adam opt_gen, opt_score;
  NoiseSchedule sched;
  std::size_t iter = 0;

  double best_metric = 0.0;  // +inf until the first evaluation
  std::size_t best_iter = 0;
  std::vector<Tensor> best_gen_params, best_score_params;

  std::vector<MetricRow> history;
  double refine_step = 0.0;  // adapted posterior step carried across iters

  RunState() = default;
  RunState(const RunState&) = delete;  // Adam aliases net parameters
  RunState& operator=(const RunState&) = delete;
  RunState(RunState&&) = default;
  RunState& operator=(RunState&&) = default;

  // Copy the best-checkpoint snapshot back into the live networks.
  void restore_best();
};

// TVD between the energy histograms of `raw` and its MALA-refined version
// (spec built from the refined set). The early-stopping criterion.
double raw_vs_refined_tvd(const EnergyTarget& target, const Tensor& raw,
                          std::size_t mala_steps, double mala_step,
                          RngStream& stream);

double early_stop_metric(const GeneratorNet& gen, const EnergyTarget& target,
                         const EarlyStopConfig& cfg, RngStream& stream);

// The nested training loop: inner denoising-score-matching epochs keep the
// score network current for the generator's own distribution, outer steps
// update the generator with the surrogate loss. Mode kRklSm swaps the outer
// objective for the reverse-KL baseline (clean score net, T = 1 ladder).
class Trainer {
 public:
  enum class Mode { kDikl, kRklSm };

  Trainer(const EnergyTarget& target, TrainConfig cfg, Mode mode);

  // N_phi score-network updates on fresh generator samples; returns the last
  // DSM loss. The generator is never touched here.
  double inner_epoch();

  // One generator update; returns the surrogate loss value. The score
  // network is never touched here.
  double outer_step();

  // inner_epoch + outer_step + metric bookkeeping for one iteration.
  void iterate();

  // Runs the remaining budget; on_metric (when set) sees every history row.
  void run(const std::function<void(const MetricRow&)>& on_metric = {});

  double evaluate_early_stop();

  RunState& state() { return state_; }
  const TrainConfig& config() const { return cfg_; }
  const EnergyTarget& target() const { return target_; }

  // Relinquish the run state (trainer is unusable afterwards).
  RunState take_state() && { return std::move(state_); }

 private:
  void record(MetricRow row);
  void snapshot_best(double metric);
  void abort_non_finite(const char* where, double value);

  const EnergyTarget& target_;
  TrainConfig cfg_;
  Mode mode_;
  RunState state_;
  NoiseSchedule clean_sched_;  // kRklSm inner ladder (T = 1)
  RngStream latents_, dsm_, noise_, posterior_, eval_;
  std::size_t outer_calls_ = 0;  // posterior substream id, one per outer step
  double last_acceptance_ = 0.0;
};

RunState train_dikl(const EnergyTarget& target, const TrainConfig& cfg,
                    const std::function<void(const MetricRow&)>& on_metric = {});
RunState train_rkl_sm(const EnergyTarget& target, const TrainConfig& cfg,
                      const std::function<void(const MetricRow&)>& on_metric = {});

// Checkpoint plumbing: both networks plus enough metadata to rebuild them.
void save_run(const std::string& path, const RunState& state,
              const TrainConfig& cfg);

struct LoadedRun {
  TrainConfig cfg;
  GeneratorNet gen;
  ScoreNet score;
  std::size_t iter = 0;
  double best_metric = 0.0;
};

LoadedRun load_run(const std::string& path);

// Append metric rows as CSV (with header when the file is fresh).
void write_metrics_csv(const std::string& path,
                       const std::vector<MetricRow>& rows);

}  // namespace dikl
