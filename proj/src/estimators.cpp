#include "dikl/estimators.hpp"

#include <cstddef>
#include <stdexcept>

#include "dikl/rng.hpp"

namespace dikl {
namespace {

void check_sample_block(const Tensor& x_t, const Tensor& samples,
                        const char* who) {
  if (x_t.rows() != 1) {
    throw std::invalid_argument(std::string(who) + ": x_t must be one row");
  }
  if (samples.rows() == 0 || samples.cols() != x_t.cols()) {
    throw std::invalid_argument(std::string(who) + ": bad sample block shape");
  }
}

Tensor column_mean(const Tensor& m) {
  Tensor out(std::vector<std::size_t>{m.cols()});
  const std::size_t n = m.rows();
  for (std::size_t i = 0; i < n; ++i) {
    auto row = m.row(i);
    for (std::size_t j = 0; j < m.cols(); ++j) out.at(0, j) += row[j];
  }
  for (std::size_t j = 0; j < m.cols(); ++j) {
    out.at(0, j) /= static_cast<double>(n);
  }
  return out;
}

}  // namespace

NoisyScoreEstimate dsi_estimate(const NoiseSchedule& sched, std::size_t t,
                                const Tensor& x_t, const Tensor& samples) {
  check_sample_block(x_t, samples, "dsi_estimate");
  const double a = sched.alpha_t(t);
  const double s2 = sched.sigma2_t(t);
  Tensor m = column_mean(samples);
  NoisyScoreEstimate est;
  est.value = Tensor(std::vector<std::size_t>{x_t.cols()});
  for (std::size_t j = 0; j < x_t.cols(); ++j) {
    est.value.at(0, j) = (a * m.at(0, j) - x_t.at(0, j)) / s2;
  }
  est.kind = ScoreIdentity::kDsi;
  est.count = samples.rows();
  return est;
}

NoisyScoreEstimate tsi_from_scores(const NoiseSchedule& sched, std::size_t t,
                                   const Tensor& x_t, const Tensor& scores) {
  check_sample_block(x_t, scores, "tsi_from_scores");
  const double a = sched.alpha_t(t);
  Tensor m = column_mean(scores);
  NoisyScoreEstimate est;
  est.value = scale(m, 1.0 / a);
  est.kind = ScoreIdentity::kTsi;
  est.count = scores.rows();
  return est;
}

NoisyScoreEstimate tsi_estimate(const EnergyTarget& target,
                                const NoiseSchedule& sched, std::size_t t,
                                const Tensor& x_t, const Tensor& samples) {
  return tsi_from_scores(sched, t, x_t, target.scores(samples));
}

NoisyScoreEstimate msi_from_scores(const NoiseSchedule& sched, std::size_t t,
                                   const Tensor& x_t, const Tensor& samples,
                                   const Tensor& scores) {
  check_sample_block(x_t, samples, "msi_from_scores");
  if (scores.rows() != samples.rows() || scores.cols() != samples.cols()) {
    throw std::invalid_argument("msi_from_scores: scores/samples mismatch");
  }
  const double a = sched.alpha_t(t);
  Tensor mx = column_mean(samples);
  Tensor ms = column_mean(scores);
  NoisyScoreEstimate est;
  est.value = Tensor(std::vector<std::size_t>{x_t.cols()});
  for (std::size_t j = 0; j < x_t.cols(); ++j) {
    est.value.at(0, j) = a * (mx.at(0, j) + ms.at(0, j)) - x_t.at(0, j);
  }
  est.kind = ScoreIdentity::kMsi;
  est.count = samples.rows();
  return est;
}

NoisyScoreEstimate msi_estimate(const EnergyTarget& target,
                                const NoiseSchedule& sched, std::size_t t,
                                const Tensor& x_t, const Tensor& samples) {
  return msi_from_scores(sched, t, x_t, samples, target.scores(samples));
}

Var dsm_residual_loss(GradTape& tape, Var s, const Tensor& target) {
  const Tensor& sv = tape.value(s);
  if (sv.rows() != target.rows() || sv.cols() != target.cols()) {
    throw std::invalid_argument("dsm_residual_loss: shape mismatch");
  }
  Var diff = tape.sub(s, tape.constant(target));
  return tape.scale(tape.sumsq(diff), 1.0 / static_cast<double>(target.rows()));
}

Var dsm_loss(GradTape& tape, const ScoreNet& net, const std::vector<Var>& params,
             const NoiseSchedule& sched, const Tensor& x, RngStream& stream) {
  const std::size_t t = stream.below(sched.T) + 1;
  Tensor eps = randn(stream, {x.rows(), x.cols()});
  Tensor x_t = forward_noise(sched, x, t, eps, net.particles());
  Tensor target = kernel_score(sched, x, x_t, t);
  Var s = net.eval(tape, tape.constant(x_t), t, sched, params);
  return dsm_residual_loss(tape, s, target);
}

Var score_difference_surrogate(GradTape& tape, const Tensor& diff, Var x,
                               double weight) {
  const Tensor& xv = tape.value(x);
  if (diff.rows() != xv.rows() || diff.cols() != xv.cols()) {
    throw std::invalid_argument("score_difference_surrogate: shape mismatch");
  }
  Var inner = tape.dot(tape.constant(diff), x);
  return tape.scale(inner, weight / static_cast<double>(diff.rows()));
}

Var dikl_surrogate(GradTape& tape, const ScoreNet& net,
                   const NoiseSchedule& sched, std::size_t t, Var x_t,
                   const Tensor& d_p) {
  const Tensor& xtv = tape.value(x_t);
  Tensor s = net.eval(xtv, t, sched);
  Tensor diff = sub(s, d_p);
  return score_difference_surrogate(tape, diff, x_t, sched.w_t(t));
}

Var rkl_surrogate(GradTape& tape, const ScoreNet& clean_net,
                  const NoiseSchedule& clean_sched, const EnergyTarget& target,
                  Var x) {
  const Tensor& xv = tape.value(x);
  Tensor s = clean_net.eval(xv, 1, clean_sched);
  Tensor diff = sub(s, target.scores(xv));
  return score_difference_surrogate(tape, diff, x, 1.0);
}

NoiseSchedule build_clean_score_schedule() {
  // beta = 1e-4 makes sigma^2 = 1 - (1 - 1e-4) = 1e-4 exactly.
  return build_vp_linear(1, 1e-4, 1e-4, Weighting::kUniform);
}

}  // namespace dikl
