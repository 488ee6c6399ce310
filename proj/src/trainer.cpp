#include "dikl/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <utility>

#include <json.hpp>

#include "dikl/checkpoint.hpp"
#include "dikl/estimators.hpp"
#include "dikl/eval.hpp"
#include "dikl/rng.hpp"
#include "dikl/tape.hpp"

namespace dikl {
namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

void validate(const TrainConfig& cfg, const EnergyTarget& target) {
  if (cfg.T < 1 || !(cfg.beta_min > 0.0) || !(cfg.beta_max < 1.0)) {
    throw std::invalid_argument("train config: bad noise ladder");
  }
  if (cfg.batch_gen < 1 || cfg.batch_score < 1) {
    throw std::invalid_argument("train config: batch sizes must be >= 1");
  }
  if (!(cfg.lr_gen > 0.0) || !(cfg.lr_score > 0.0) || !(cfg.grad_clip > 0.0)) {
    throw std::invalid_argument("train config: rates and clip must be > 0");
  }
  if (cfg.early_stop.n_eval < 2 || cfg.early_stop.interval < 1) {
    throw std::invalid_argument("train config: bad early-stop settings");
  }
  if (cfg.recipe.init == Recipe::Init::kExactGauss &&
      target.kind() != "gauss") {
    throw std::invalid_argument(
        "train config: exact-gaussian recipe needs a gaussian target");
  }
}

std::string act_name(Activation a) {
  return a == Activation::kSilu ? "silu" : "relu";
}

Activation act_from(const std::string& s) {
  if (s == "silu") return Activation::kSilu;
  if (s == "relu") return Activation::kRelu;
  throw std::runtime_error("checkpoint: unknown activation " + s);
}

Tensor row_vector(const Tensor& m, std::size_t r) {
  auto row = m.row(r);
  return Tensor::vector(std::vector<double>(row.begin(), row.end()));
}

std::vector<Tensor> clone_params(const std::vector<const Tensor*>& ps) {
  std::vector<Tensor> out;
  out.reserve(ps.size());
  for (const Tensor* p : ps) out.push_back(*p);
  return out;
}

}  // namespace

void RunState::restore_best() {
  if (best_gen_params.empty()) return;
  gen.net().load_params(best_gen_params);
  score.net().load_params(best_score_params);
}

double raw_vs_refined_tvd(const EnergyTarget& target, const Tensor& raw,
                          std::size_t mala_steps, double mala_step,
                          RngStream& stream) {
  Tensor refined =
      mala_steps == 0
          ? raw
          : mala_refine_target(target, raw, mala_steps, mala_step, stream);
  return energy_tvd(target, raw, refined);
}

double early_stop_metric(const GeneratorNet& gen, const EnergyTarget& target,
                         const EarlyStopConfig& cfg, RngStream& stream) {
  Tensor z = randn(stream, {cfg.n_eval, gen.latent_dim()});
  Tensor raw = gen.generate(z);
  return raw_vs_refined_tvd(target, raw, cfg.mala_steps, cfg.mala_step,
                            stream);
}

Trainer::Trainer(const EnergyTarget& target, TrainConfig cfg, Mode mode)
    : target_(target), cfg_(std::move(cfg)), mode_(mode) {
  validate(cfg_, target_);
  if (cfg_.latent_dim == 0) cfg_.latent_dim = target_.dim();

  RngStream root(cfg_.seed, 0);
  latents_ = root.substream("latents");
  dsm_ = root.substream("dsm");
  noise_ = root.substream("outer_noise");
  posterior_ = root.substream("posterior");
  eval_ = root.substream("early_stop");

  state_.sched =
      build_vp_linear(cfg_.T, cfg_.beta_min, cfg_.beta_max, cfg_.weighting);
  clean_sched_ = build_clean_score_schedule();

  const auto particles = target_.particles();
  state_.gen = GeneratorNet(cfg_.latent_dim, target_.dim(), cfg_.gen_hidden,
                            cfg_.act, particles, root);
  state_.score =
      ScoreNet(target_.dim(), cfg_.score_hidden, cfg_.act, particles, root);
  state_.opt_gen = Adam(state_.gen.net().params(), cfg_.lr_gen);
  state_.opt_score = Adam(state_.score.net().params(), cfg_.lr_score);
  state_.refine_step = cfg_.recipe.refine_step;
  state_.best_metric = std::numeric_limits<double>::infinity();

  if (!cfg_.out_dir.empty()) {
    std::filesystem::create_directories(cfg_.out_dir);
  }
}

void Trainer::abort_non_finite(const char* where, double value) {
  if (!cfg_.out_dir.empty()) {
    save_run(cfg_.out_dir + "/diagnostic.ckpt.json", state_, cfg_);
  }
  throw std::runtime_error("trainer: non-finite " + std::string(where) +
                           " loss (" + std::to_string(value) +
                           ") at iteration " + std::to_string(state_.iter));
}

double Trainer::inner_epoch() {
  const NoiseSchedule& sched =
      mode_ == Mode::kRklSm ? clean_sched_ : state_.sched;
  double last = 0.0;
  for (std::size_t k = 0; k < cfg_.n_phi; ++k) {
    Tensor z = randn(latents_, {cfg_.batch_score, cfg_.latent_dim});
    Tensor x = state_.gen.generate(z);
    GradTape tape;
    std::vector<Var> params = state_.score.net().stage_params(tape);
    Var loss = dsm_loss(tape, state_.score, params, sched, x, dsm_);
    last = tape.value(loss).item();
    if (!std::isfinite(last)) abort_non_finite("score", last);
    tape.backward(loss);
    std::vector<Tensor> grads = state_.score.net().collect_grads(tape, params);
    clip_grad_norm(grads, cfg_.grad_clip);
    state_.opt_score.step(grads);
  }
  return last;
}

double Trainer::outer_step() {
  GradTape tape;
  std::vector<Var> gparams = state_.gen.net().stage_params(tape);
  Tensor z = randn(latents_, {cfg_.batch_gen, cfg_.latent_dim});
  Var x = state_.gen.generate(tape, tape.constant(z), gparams);

  Var loss;
  last_acceptance_ = 0.0;
  if (mode_ == Mode::kRklSm) {
    loss = rkl_surrogate(tape, state_.score, clean_sched_, target_, x);
  } else {
    const std::size_t t = noise_.below(state_.sched.T) + 1;
    Tensor eps = randn(noise_, {cfg_.batch_gen, target_.dim()});
    if (const auto ps = target_.particles()) {
      eps = zero_center(eps, ps->n, ps->d);
    }
    Var x_t = tape.lincomb(state_.sched.alpha_t(t), x,
                           state_.sched.sigma_t(t), tape.constant(eps));
    const Tensor& xt_val = tape.value(x_t);

    Tensor d_p({cfg_.batch_gen, target_.dim()});
    std::size_t accepts = 0, proposals = 0;
    RngStream iter_stream = posterior_.substream(++outer_calls_);
    for (std::size_t i = 0; i < cfg_.batch_gen; ++i) {
      PosteriorProblem prob;
      prob.target = &target_;
      prob.sched = &state_.sched;
      prob.x_t = row_vector(xt_val, i);
      prob.t = t;
      RngStream row_stream = iter_stream.substream(i);
      PosteriorDraws draws = sample_posterior(prob, cfg_.recipe,
                                              state_.refine_step, row_stream);
      NoisyScoreEstimate est = msi_from_scores(state_.sched, t, prob.x_t,
                                               draws.samples, draws.scores);
      std::copy(est.value.data(), est.value.data() + est.value.size(),
                d_p.row(i).begin());
      accepts += draws.accepts;
      proposals += draws.proposals;
    }
    if (proposals > 0) {
      last_acceptance_ = static_cast<double>(accepts) /
                         static_cast<double>(proposals);
      if (cfg_.recipe.refine_adaptive) {
        state_.refine_step =
            adapt_step_size(state_.refine_step, last_acceptance_);
      }
    }
    loss = dikl_surrogate(tape, state_.score, state_.sched, t, x_t, d_p);
  }

  const double lv = tape.value(loss).item();
  if (!std::isfinite(lv)) abort_non_finite("generator", lv);
  tape.backward(loss);
  std::vector<Tensor> grads = state_.gen.net().collect_grads(tape, gparams);
  clip_grad_norm(grads, cfg_.grad_clip);
  state_.opt_gen.step(grads);
  return lv;
}

double Trainer::evaluate_early_stop() {
  RngStream stream = eval_.substream(state_.iter);
  return early_stop_metric(state_.gen, target_, cfg_.early_stop, stream);
}

void Trainer::snapshot_best(double metric) {
  state_.best_metric = metric;
  state_.best_iter = state_.iter;
  state_.best_gen_params =
      clone_params(std::as_const(state_.gen).net().params());
  state_.best_score_params =
      clone_params(std::as_const(state_.score).net().params());
  if (!cfg_.out_dir.empty()) {
    save_run(cfg_.out_dir + "/best.ckpt.json", state_, cfg_);
  }
}

void Trainer::record(MetricRow row) { state_.history.push_back(row); }

void Trainer::iterate() {
  ++state_.iter;
  MetricRow row;
  row.iter = state_.iter;
  row.inner_loss = inner_epoch();
  row.outer_loss = outer_step();
  row.refine_step = state_.refine_step;
  row.acceptance = last_acceptance_;
  row.early_stop_tvd = kNan;
  if (state_.iter % cfg_.early_stop.interval == 0 ||
      state_.iter == cfg_.outer_iters) {
    const double metric = evaluate_early_stop();
    row.early_stop_tvd = metric;
    if (metric < state_.best_metric) snapshot_best(metric);
  }
  record(row);
}

void Trainer::run(const std::function<void(const MetricRow&)>& on_metric) {
  while (state_.iter < cfg_.outer_iters) {
    iterate();
    if (on_metric) on_metric(state_.history.back());
  }
  if (!cfg_.out_dir.empty()) {
    write_metrics_csv(cfg_.out_dir + "/metrics.csv", state_.history);
    save_run(cfg_.out_dir + "/last.ckpt.json", state_, cfg_);
  }
}

RunState train_dikl(const EnergyTarget& target, const TrainConfig& cfg,
                    const std::function<void(const MetricRow&)>& on_metric) {
  Trainer t(target, cfg, Trainer::Mode::kDikl);
  t.run(on_metric);
  return std::move(t).take_state();
}

RunState train_rkl_sm(const EnergyTarget& target, const TrainConfig& cfg,
                      const std::function<void(const MetricRow&)>& on_metric) {
  Trainer t(target, cfg, Trainer::Mode::kRklSm);
  t.run(on_metric);
  return std::move(t).take_state();
}

void save_run(const std::string& path, const RunState& state,
              const TrainConfig& cfg) {
  std::vector<std::pair<std::string, const Tensor*>> tensors =
      state.gen.net().named_params("gen");
  for (auto& p : state.score.net().named_params("score")) {
    tensors.push_back(p);
  }
  nlohmann::json meta;
  meta["target"] = cfg.target_name;
  meta["T"] = cfg.T;
  meta["beta_min"] = cfg.beta_min;
  meta["beta_max"] = cfg.beta_max;
  meta["weighting"] =
      cfg.weighting == Weighting::kInvAlpha ? "inv_alpha" : "uniform";
  meta["latent_dim"] = cfg.latent_dim;
  meta["data_dim"] = state.gen.out_dim();
  meta["gen_hidden"] = cfg.gen_hidden;
  meta["score_hidden"] = cfg.score_hidden;
  meta["act"] = act_name(cfg.act);
  if (const auto ps = state.gen.particles()) {
    meta["particles"] = {ps->n, ps->d};
  }
  meta["iter"] = state.iter;
  meta["best_metric"] = state.best_metric;
  meta["best_iter"] = state.best_iter;
  meta["seed"] = cfg.seed;
  save_checkpoint(path, tensors, meta);
}

LoadedRun load_run(const std::string& path) {
  Checkpoint ck = load_checkpoint(path);
  LoadedRun run;
  run.cfg.target_name = ck.meta.at("target").get<std::string>();
  run.cfg.T = ck.meta.at("T").get<std::size_t>();
  run.cfg.beta_min = ck.meta.at("beta_min").get<double>();
  run.cfg.beta_max = ck.meta.at("beta_max").get<double>();
  run.cfg.weighting = ck.meta.at("weighting").get<std::string>() == "uniform"
                          ? Weighting::kUniform
                          : Weighting::kInvAlpha;
  run.cfg.latent_dim = ck.meta.at("latent_dim").get<std::size_t>();
  run.cfg.gen_hidden = ck.meta.at("gen_hidden").get<std::vector<std::size_t>>();
  run.cfg.score_hidden =
      ck.meta.at("score_hidden").get<std::vector<std::size_t>>();
  run.cfg.act = act_from(ck.meta.at("act").get<std::string>());
  run.cfg.seed = ck.meta.value("seed", std::uint64_t{0});
  run.iter = ck.meta.value("iter", std::size_t{0});
  run.best_metric = ck.meta.value("best_metric", kNan);

  const std::size_t data_dim = ck.meta.at("data_dim").get<std::size_t>();
  std::optional<ParticleShape> particles;
  if (ck.meta.contains("particles")) {
    auto ps = ck.meta.at("particles").get<std::vector<std::size_t>>();
    particles = ParticleShape{ps.at(0), ps.at(1)};
  }

  RngStream scratch(0, 0);
  run.gen = GeneratorNet(run.cfg.latent_dim, data_dim, run.cfg.gen_hidden,
                         run.cfg.act, particles, scratch);
  run.score = ScoreNet(data_dim, run.cfg.score_hidden, run.cfg.act, particles,
                       scratch);

  auto restore = [&](Mlp& net, const std::string& prefix,
                     std::size_t layers) {
    std::vector<Tensor> values;
    for (std::size_t i = 0; i < layers; ++i) {
      values.push_back(ck.tensors.at(prefix + ".w" + std::to_string(i)));
      values.push_back(ck.tensors.at(prefix + ".b" + std::to_string(i)));
    }
    net.load_params(values);
  };
  restore(run.gen.net(), "gen", run.cfg.gen_hidden.size() + 1);
  restore(run.score.net(), "score", run.cfg.score_hidden.size() + 1);
  return run;
}

void write_metrics_csv(const std::string& path,
                       const std::vector<MetricRow>& rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write metrics csv: " + path);
  out << "iter,inner_loss,outer_loss,early_stop_tvd,refine_step,acceptance\n";
  char buf[256];
  for (const MetricRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  r.iter, r.inner_loss, r.outer_loss, r.early_stop_tvd,
                  r.refine_step, r.acceptance);
    out << buf;
  }
}

}  // namespace dikl
