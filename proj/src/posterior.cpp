#include "dikl/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "dikl/rng.hpp"

namespace dikl {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// One standard normal vector, run through the coupling hook and projected to
// the zero-CoM subspace for particle targets. Every sampler draws its
// Gaussian noise through here.
Tensor draw_noise(const PosteriorProblem& prob, RngStream& stream,
                  const SamplerOptions& opts) {
  Tensor eta = randn(stream, {prob.target->dim()});
  if (opts.noise_map) opts.noise_map(eta);
  if (const auto ps = prob.target->particles()) {
    eta = zero_center(eta, ps->n, ps->d);
  }
  return eta;
}

void check_problem(const PosteriorProblem& prob) {
  if (!prob.target || !prob.sched) {
    throw std::invalid_argument("posterior: unset target or schedule");
  }
  if (prob.t < 1 || prob.t > prob.sched->T) {
    throw std::invalid_argument("posterior: t out of range");
  }
  if (!(prob.sched->sigma2_t(prob.t) > 0.0)) {
    throw std::invalid_argument("posterior: sigma_t must be positive");
  }
}

std::vector<double> normalize_log_weights(std::vector<double> logw) {
  double mx = kNegInf;
  for (double lw : logw) {
    if (std::isfinite(lw)) mx = std::max(mx, lw);
  }
  if (!std::isfinite(mx)) {
    throw std::runtime_error(
        "importance weights degenerate: all candidates have non-finite "
        "density at this noise level");
  }
  double total = 0.0;
  for (double& lw : logw) {
    lw = std::isfinite(lw) ? std::exp(lw - mx) : 0.0;
    total += lw;
  }
  for (double& lw : logw) lw /= total;
  return logw;
}

}  // namespace

PosteriorProblem PosteriorProblem::with_beta(double b) const {
  PosteriorProblem p = *this;
  p.beta = b;
  return p;
}

double PosteriorProblem::log_density(std::span<const double> x) const {
  const double a = sched->alpha_t(t), s2 = sched->sigma2_t(t);
  double quad = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = a * x[i] - x_t[i];
    quad += r * r;
  }
  return -beta * target->energy(x) - 0.5 * quad / s2;
}

double PosteriorProblem::log_density_and_score(std::span<const double> x,
                                               std::span<double> out) const {
  const double a = sched->alpha_t(t), s2 = sched->sigma2_t(t);
  const double e = target->energy_and_score(x, out);
  double quad = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = a * x[i] - x_t[i];
    quad += r * r;
    out[i] = beta * out[i] - a * r / s2;
  }
  if (const auto ps = target->particles()) {
    Tensor tmp = Tensor::vector(std::vector<double>(out.begin(), out.end()));
    tmp = zero_center(tmp, ps->n, ps->d);
    std::copy(tmp.data(), tmp.data() + tmp.size(), out.begin());
  }
  return -beta * e - 0.5 * quad / s2;
}

Tensor posterior_score(const PosteriorProblem& prob, const Tensor& x) {
  check_problem(prob);
  Tensor out = Tensor::zeros_like(x);
  prob.log_density_and_score(x.span(), out.span());
  return out;
}

ChainState make_chain(const PosteriorProblem& prob, Tensor x0, double step) {
  check_problem(prob);
  ChainState st;
  st.x = std::move(x0);
  st.score = Tensor::zeros_like(st.x);
  st.logp = prob.log_density_and_score(st.x.span(), st.score.span());
  st.step = step;
  return st;
}

void ula_step(const PosteriorProblem& prob, ChainState& state,
              RngStream& stream, const SamplerOptions& opts) {
  const double g = state.step;
  Tensor eta = draw_noise(prob, stream, opts);
  Tensor xp = lincomb(1.0, state.x, g, state.score);
  xp = lincomb(1.0, xp, std::sqrt(2.0 * g), eta);
  Tensor sp = Tensor::zeros_like(xp);
  const double lp = prob.log_density_and_score(xp.span(), sp.span());
  state.x = std::move(xp);
  state.score = std::move(sp);
  state.logp = lp;
  ++state.accepts;
  ++state.proposals;
}

void mala_step(const PosteriorProblem& prob, ChainState& state,
               RngStream& stream, const SamplerOptions& opts) {
  const double g = state.step;
  Tensor eta = draw_noise(prob, stream, opts);
  Tensor xp = lincomb(1.0, state.x, g, state.score);
  xp = lincomb(1.0, xp, std::sqrt(2.0 * g), eta);

  Tensor sp = Tensor::zeros_like(xp);
  const double lp = prob.log_density_and_score(xp.span(), sp.span());

  double log_acc = kNegInf;
  if (std::isfinite(lp)) {
    // Forward density: x' - x - g s(x) = sqrt(2g) eta.
    double qf = 0.0, qb = 0.0;
    for (std::size_t i = 0; i < xp.size(); ++i) {
      const double f = xp[i] - state.x[i] - g * state.score[i];
      const double b = state.x[i] - xp[i] - g * sp[i];
      qf += f * f;
      qb += b * b;
    }
    log_acc = (lp - state.logp) + (qf - qb) / (4.0 * g);
  }

  ++state.proposals;
  const double u = stream.uniform_open();
  if (std::log(u) < log_acc) {
    state.x = std::move(xp);
    state.score = std::move(sp);
    state.logp = lp;
    ++state.accepts;
  }
}

LeapfrogResult leapfrog(const PosteriorProblem& prob, const Tensor& x0,
                        const Tensor& p0, std::size_t steps, double dt,
                        double mass) {
  LeapfrogResult r;
  r.x = x0;
  r.p = p0;
  r.score = Tensor::zeros_like(x0);
  r.logp = prob.log_density_and_score(r.x.span(), r.score.span());
  for (std::size_t l = 0; l < steps; ++l) {
    r.p = lincomb(1.0, r.p, 0.5 * dt, r.score);
    r.x = lincomb(1.0, r.x, dt / mass, r.p);
    r.logp = prob.log_density_and_score(r.x.span(), r.score.span());
    if (!std::isfinite(r.logp)) break;  // doomed trajectory, caller rejects
    r.p = lincomb(1.0, r.p, 0.5 * dt, r.score);
  }
  return r;
}

void hmc_step(const PosteriorProblem& prob, ChainState& state,
              RngStream& stream, std::size_t leapfrog_steps, double mass,
              const SamplerOptions& opts) {
  if (leapfrog_steps < 1) {
    throw std::invalid_argument("hmc_step: need at least one leapfrog step");
  }
  if (!(mass > 0.0)) throw std::invalid_argument("hmc_step: mass must be > 0");

  Tensor p = scale(draw_noise(prob, stream, opts), std::sqrt(mass));
  const double h_old = -state.logp + 0.5 * sumsq(p) / mass;

  LeapfrogResult traj =
      leapfrog(prob, state.x, p, leapfrog_steps, state.step, mass);

  double log_acc = kNegInf;
  if (std::isfinite(traj.logp)) {
    const double h_new = -traj.logp + 0.5 * sumsq(traj.p) / mass;
    log_acc = h_old - h_new;
  }

  ++state.proposals;
  const double u = stream.uniform_open();
  if (std::log(u) < log_acc) {
    state.x = std::move(traj.x);
    state.score = std::move(traj.score);
    state.logp = traj.logp;
    ++state.accepts;
  }
}

IsResult is_weights(const PosteriorProblem& prob, std::size_t n,
                    RngStream& stream, const SamplerOptions& opts) {
  check_problem(prob);
  if (n < 1) throw std::invalid_argument("is_weights: n must be >= 1");
  const std::size_t dim = prob.target->dim();
  const double a = prob.sched->alpha_t(prob.t);
  const double sig_over_a = prob.sched->sigma_t(prob.t) / a;

  IsResult r;
  r.samples = Tensor({n, dim});
  std::vector<double> logw(n);
  for (std::size_t i = 0; i < n; ++i) {
    RngStream chain = stream.substream(i);
    Tensor eta = draw_noise(prob, chain, opts);
    auto row = r.samples.row(i);
    for (std::size_t j = 0; j < dim; ++j) {
      row[j] = prob.x_t[j] / a + sig_over_a * eta[j];
    }
    logw[i] = -prob.target->energy(row);
  }
  r.weights = normalize_log_weights(std::move(logw));
  return r;
}

std::size_t sir_index(const std::vector<double>& weights, RngStream& stream) {
  const double u = stream.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (u < acc) return i;
  }
  return weights.size() - 1;
}

Tensor sir_resample(const Tensor& samples, const std::vector<double>& weights,
                    RngStream& stream) {
  const std::size_t i = sir_index(weights, stream);
  Tensor out({samples.cols()});
  const auto row = samples.row(i);
  std::copy(row.begin(), row.end(), out.data());
  return out;
}

IsResult ais_run(const PosteriorProblem& prob, const AisConfig& cfg,
                 RngStream& stream, const SamplerOptions& opts) {
  check_problem(prob);
  if (cfg.n_importance < 1) {
    throw std::invalid_argument("ais_run: n_importance must be >= 1");
  }
  std::vector<double> ladder = cfg.ladder;
  if (ladder.empty()) {
    if (cfg.n_steps < 1) {
      throw std::invalid_argument("ais_run: n_steps must be >= 1");
    }
    ladder.resize(cfg.n_steps + 1);
    for (std::size_t k = 0; k <= cfg.n_steps; ++k) {
      ladder[k] = static_cast<double>(k) / static_cast<double>(cfg.n_steps);
    }
    // Exact 0 and 1 endpoints so K = 1 degenerates to plain IS bitwise.
    ladder.front() = 0.0;
    ladder.back() = 1.0;
  }
  if (ladder.size() < 2 || ladder.front() != 0.0 || ladder.back() != 1.0 ||
      !std::is_sorted(ladder.begin(), ladder.end()) ||
      std::adjacent_find(ladder.begin(), ladder.end()) != ladder.end()) {
    throw std::invalid_argument(
        "ais_run: ladder must be strictly increasing from 0 to 1");
  }
  const std::size_t K = ladder.size() - 1;
  const std::size_t dim = prob.target->dim();
  const double a = prob.sched->alpha_t(prob.t);
  const double sig_over_a = prob.sched->sigma_t(prob.t) / a;

  IsResult r;
  r.samples = Tensor({cfg.n_importance, dim});
  std::vector<double> logw(cfg.n_importance);

  for (std::size_t i = 0; i < cfg.n_importance; ++i) {
    RngStream chain = stream.substream(i);
    // pi_0 draw, identical to the IS proposal.
    Tensor x({dim});
    {
      Tensor eta = draw_noise(prob, chain, opts);
      for (std::size_t j = 0; j < dim; ++j) {
        x[j] = prob.x_t[j] / a + sig_over_a * eta[j];
      }
    }
    double lw = 0.0;
    for (std::size_t k = 1; k <= K; ++k) {
      lw += (ladder[k] - ladder[k - 1]) * (-prob.target->energy(x.span()));
      if (k == K) break;  // no transition after the last weight update
      PosteriorProblem level = prob.with_beta(ladder[k]);
      ChainState st = make_chain(level, std::move(x), cfg.kernel.step);
      if (cfg.kernel.kind == InnerKernel::Kind::kMala) {
        mala_step(level, st, chain, opts);
      } else {
        hmc_step(level, st, chain, cfg.kernel.leapfrog_steps, cfg.kernel.mass,
                 opts);
      }
      x = std::move(st.x);
    }
    logw[i] = lw;
    auto row = r.samples.row(i);
    std::copy(x.data(), x.data() + dim, row.begin());
  }
  r.weights = normalize_log_weights(std::move(logw));
  return r;
}

double adapt_step_size(double step, double acceptance, double low, double high,
                       double factor) {
  if (acceptance > high) return step * factor;
  if (acceptance < low) return step / factor;
  return step;
}

Recipe Recipe::mog() {
  Recipe r;
  r.name = "mog";
  r.init = Init::kAis;
  r.ais.n_importance = 10;
  r.ais.n_steps = 15;
  r.ais.kernel = {InnerKernel::Kind::kHmc, 1.0, 1, 1.0};
  r.refine_steps = 5;
  r.refine_step = 1e-2;
  r.refine_adaptive = false;
  r.keep_last = 1;
  return r;
}

Recipe Recipe::mw() {
  Recipe r = mog();
  r.name = "mw";
  r.ais.kernel.step = 0.3;
  r.refine_step = 5e-2;
  return r;
}

Recipe Recipe::dw() {
  Recipe r;
  r.name = "dw";
  r.init = Init::kAis;
  r.ais.n_importance = 20;
  r.ais.n_steps = 10;
  r.ais.kernel = {InnerKernel::Kind::kMala, 0.01, 1, 1.0};
  r.refine_steps = 50;
  r.refine_step = 0.01;
  r.refine_adaptive = true;
  r.keep_last = 1;
  return r;
}

Recipe Recipe::lj() {
  Recipe r;
  r.name = "lj";
  r.init = Init::kIs;
  r.ais.n_importance = 500;
  r.refine_steps = 1000;
  r.refine_step = 1e-4;
  r.refine_adaptive = true;
  r.keep_last = 500;
  return r;
}

Recipe Recipe::exact_gauss(std::size_t k) {
  Recipe r;
  r.name = "exact-gaussian";
  r.init = Init::kExactGauss;
  r.refine_steps = 0;
  r.refine_adaptive = false;
  r.keep_last = k;
  return r;
}

Recipe Recipe::by_name(const std::string& name) {
  if (name == "mog") return mog();
  if (name == "mw") return mw();
  if (name == "dw") return dw();
  if (name == "lj") return lj();
  if (name == "exact-gaussian") return exact_gauss();
  throw std::invalid_argument("unknown posterior recipe: " + name);
}

Tensor mala_refine_target(const EnergyTarget& target, const Tensor& X,
                          std::size_t steps, double step, RngStream& stream) {
  if (X.cols() != target.dim()) {
    throw std::invalid_argument("mala_refine_target: dimension mismatch");
  }
  if (!(step > 0.0)) {
    throw std::invalid_argument("mala_refine_target: step must be > 0");
  }
  const auto ps = target.particles();
  Tensor out = X;
  Tensor sc(std::vector<std::size_t>{target.dim()});
  Tensor sp = Tensor::zeros_like(sc);
  for (std::size_t r = 0; r < X.rows(); ++r) {
    RngStream chain = stream.substream(r);
    Tensor x = Tensor::vector(
        std::vector<double>(X.row(r).begin(), X.row(r).end()));
    double logp = -target.energy_and_score(x.span(), sc.span());
    for (std::size_t it = 0; it < steps; ++it) {
      Tensor eta = randn(chain, {target.dim()});
      if (ps) eta = zero_center(eta, ps->n, ps->d);
      Tensor xp = lincomb(1.0, x, step, sc);
      xp = lincomb(1.0, xp, std::sqrt(2.0 * step), eta);
      const double lp = -target.energy_and_score(xp.span(), sp.span());
      double log_acc = -std::numeric_limits<double>::infinity();
      if (std::isfinite(lp)) {
        double qf = 0.0, qb = 0.0;
        for (std::size_t i = 0; i < xp.size(); ++i) {
          const double f = xp[i] - x[i] - step * sc[i];
          const double b = x[i] - xp[i] - step * sp[i];
          qf += f * f;
          qb += b * b;
        }
        log_acc = (lp - logp) + (qf - qb) / (4.0 * step);
      }
      if (std::log(chain.uniform_open()) < log_acc) {
        x = std::move(xp);
        std::swap(sc, sp);
        logp = lp;
      }
    }
    std::copy(x.data(), x.data() + x.size(), out.row(r).begin());
  }
  return out;
}

PosteriorDraws sample_posterior(const PosteriorProblem& prob,
                                const Recipe& recipe, double refine_step,
                                RngStream& stream, const SamplerOptions& opts) {
  check_problem(prob);
  const std::size_t dim = prob.target->dim();
  const double a = prob.sched->alpha_t(prob.t);
  const double sig = prob.sched->sigma_t(prob.t);

  PosteriorDraws out;
  out.samples = Tensor({recipe.keep_last, dim});
  out.scores = Tensor({recipe.keep_last, dim});

  if (recipe.init == Recipe::Init::kExactGauss) {
    // Analytic posterior for a standard normal target: N(a x_t, s^2 I).
    RngStream init = stream.substream("exact_init");
    for (std::size_t k = 0; k < recipe.keep_last; ++k) {
      Tensor eta = draw_noise(prob, init, opts);
      auto row = out.samples.row(k);
      for (std::size_t j = 0; j < dim; ++j) {
        row[j] = a * prob.x_t[j] + sig * eta[j];
      }
      prob.target->score(row, out.scores.row(k));
    }
    return out;
  }

  IsResult cand;
  if (recipe.init == Recipe::Init::kIs) {
    cand = is_weights(prob, recipe.ais.n_importance, stream, opts);
  } else {
    cand = ais_run(prob, recipe.ais, stream, opts);
  }

  RngStream sir_stream = stream.substream("sir");
  Tensor x = sir_resample(cand.samples, cand.weights, sir_stream);

  if (recipe.refine_steps == 0) {
    if (recipe.keep_last != 1) {
      throw std::invalid_argument(
          "sample_posterior: keep_last > 1 needs a refinement chain");
    }
    auto row = out.samples.row(0);
    std::copy(x.data(), x.data() + dim, row.begin());
    prob.target->score(row, out.scores.row(0));
    return out;
  }

  if (recipe.keep_last > recipe.refine_steps) {
    throw std::invalid_argument(
        "sample_posterior: keep_last exceeds refinement chain length");
  }

  RngStream refine_stream = stream.substream("refine");
  ChainState st = make_chain(prob, std::move(x), refine_step);
  const double a_over_s2 = a / prob.sched->sigma2_t(prob.t);
  std::size_t written = 0;
  for (std::size_t it = 0; it < recipe.refine_steps; ++it) {
    mala_step(prob, st, refine_stream, opts);
    if (recipe.refine_steps - it <= recipe.keep_last) {
      auto srow = out.samples.row(written);
      auto crow = out.scores.row(written);
      // Recover the target score from the cached posterior score instead of
      // paying another energy evaluation:
      // -grad E = score_post + a (a x - x_t) / s^2.
      for (std::size_t j = 0; j < dim; ++j) {
        srow[j] = st.x[j];
        crow[j] = st.score[j] + a_over_s2 * (a * st.x[j] - prob.x_t[j]);
      }
      ++written;
    }
  }
  out.accepts = st.accepts;
  out.proposals = st.proposals;
  return out;
}

}  // namespace dikl
