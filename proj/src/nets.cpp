#include "dikl/nets.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>

#include "dikl/rng.hpp"

namespace dikl {

namespace {
std::atomic<std::uint64_t> g_forward_passes{0};
}  // namespace

std::uint64_t forward_pass_count() { return g_forward_passes.load(); }
void reset_forward_pass_count() { g_forward_passes.store(0); }

Mlp::Mlp(MlpConfig cfg, RngStream& stream) : cfg_(std::move(cfg)) {
  if (cfg_.in == 0 || cfg_.out == 0) {
    throw std::invalid_argument("Mlp: zero input or output dim");
  }
  std::vector<std::size_t> dims;
  dims.push_back(cfg_.in);
  dims.insert(dims.end(), cfg_.hidden.begin(), cfg_.hidden.end());
  dims.push_back(cfg_.out);

  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const std::size_t fan_in = dims[l], fan_out = dims[l + 1];
    const bool last = l + 2 == dims.size();
    Tensor w({fan_in, fan_out});
    Tensor b({fan_out});
    if (!(last && cfg_.zero_init_last)) {
      // Uniform(-k, k) with k = 1/sqrt(fan_in), the usual fan-in scaling.
      const double k = 1.0 / std::sqrt(static_cast<double>(fan_in));
      for (std::size_t i = 0; i < w.size(); ++i) {
        w[i] = k * (2.0 * stream.uniform() - 1.0);
      }
      for (std::size_t i = 0; i < b.size(); ++i) {
        b[i] = k * (2.0 * stream.uniform() - 1.0);
      }
    }
    weights_.push_back(std::move(w));
    biases_.push_back(std::move(b));
  }
}

Tensor Mlp::forward(const Tensor& x) const {
  g_forward_passes.fetch_add(1, std::memory_order_relaxed);
  Tensor h = affine(x, weights_[0], biases_[0]);
  for (std::size_t l = 1; l < weights_.size(); ++l) {
    h = cfg_.act == Activation::kSilu ? silu(h) : relu(h);
    h = affine(h, weights_[l], biases_[l]);
  }
  return h;
}

Var Mlp::forward(GradTape& tape, Var x, const std::vector<Var>& params) const {
  if (params.size() != 2 * weights_.size()) {
    throw std::invalid_argument("Mlp::forward: staged param count mismatch");
  }
  Var h = tape.affine(x, params[0], params[1]);
  for (std::size_t l = 1; l < weights_.size(); ++l) {
    h = cfg_.act == Activation::kSilu ? tape.silu(h) : tape.relu(h);
    h = tape.affine(h, params[2 * l], params[2 * l + 1]);
  }
  return h;
}

std::vector<Var> Mlp::stage_params(GradTape& tape, bool requires_grad) const {
  std::vector<Var> out;
  out.reserve(2 * weights_.size());
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    out.push_back(tape.leaf(weights_[l], requires_grad));
    out.push_back(tape.leaf(biases_[l], requires_grad));
  }
  return out;
}

std::vector<Tensor> Mlp::collect_grads(const GradTape& tape,
                                       const std::vector<Var>& params) const {
  std::vector<Tensor> out;
  out.reserve(params.size());
  for (Var v : params) out.push_back(tape.grad(v));
  return out;
}

std::vector<Tensor*> Mlp::params() {
  std::vector<Tensor*> out;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    out.push_back(&weights_[l]);
    out.push_back(&biases_[l]);
  }
  return out;
}

std::vector<const Tensor*> Mlp::params() const {
  std::vector<const Tensor*> out;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    out.push_back(&weights_[l]);
    out.push_back(&biases_[l]);
  }
  return out;
}

std::size_t Mlp::param_count() const {
  std::size_t n = 0;
  for (const auto& w : weights_) n += w.size();
  for (const auto& b : biases_) n += b.size();
  return n;
}

std::vector<std::pair<std::string, const Tensor*>> Mlp::named_params(
    const std::string& prefix) const {
  std::vector<std::pair<std::string, const Tensor*>> out;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    out.emplace_back(prefix + ".w" + std::to_string(l), &weights_[l]);
    out.emplace_back(prefix + ".b" + std::to_string(l), &biases_[l]);
  }
  return out;
}

void Mlp::load_params(const std::vector<Tensor>& values) {
  if (values.size() != 2 * weights_.size()) {
    throw std::invalid_argument("Mlp::load_params: tensor count mismatch");
  }
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    if (!values[2 * l].same_shape(weights_[l]) ||
        !values[2 * l + 1].same_shape(biases_[l])) {
      throw std::invalid_argument("Mlp::load_params: shape mismatch");
    }
    weights_[l] = values[2 * l];
    biases_[l] = values[2 * l + 1];
  }
}

GeneratorNet::GeneratorNet(std::size_t latent_dim, std::size_t out_dim,
                           std::vector<std::size_t> hidden, Activation act,
                           std::optional<ParticleShape> particles,
                           RngStream& stream)
    : latent_(latent_dim), particles_(particles) {
  RngStream init = stream.substream("generator_init");
  net_ = Mlp({latent_dim, out_dim, std::move(hidden), act, false}, init);
}

Tensor GeneratorNet::generate(const Tensor& z) const {
  Tensor x = net_.forward(z);
  if (particles_) x = zero_center(x, particles_->n, particles_->d);
  return x;
}

Var GeneratorNet::generate(GradTape& tape, Var z,
                           const std::vector<Var>& params) const {
  Var x = net_.forward(tape, z, params);
  if (particles_) x = tape.zero_center(x, particles_->n, particles_->d);
  return x;
}

ScoreNet::ScoreNet(std::size_t data_dim, std::vector<std::size_t> hidden,
                   Activation act, std::optional<ParticleShape> particles,
                   RngStream& stream)
    : data_dim_(data_dim), particles_(particles) {
  RngStream init = stream.substream("score_init");
  net_ = Mlp({data_dim + kTimeEmbedDim, data_dim, std::move(hidden), act,
              /*zero_init_last=*/true},
             init);
}

Tensor ScoreNet::time_embedding(std::size_t t, std::size_t T) const {
  // Sinusoidal features of t/T with log-spaced frequencies in [1, 1000];
  // distinct and smooth across every t in the ladder.
  const std::size_t half = kTimeEmbedDim / 2;
  const double u = static_cast<double>(t) / static_cast<double>(T);
  Tensor e({kTimeEmbedDim});
  for (std::size_t i = 0; i < half; ++i) {
    const double freq = std::pow(
        1000.0, static_cast<double>(i) / static_cast<double>(half - 1));
    e[2 * i] = std::sin(freq * u);
    e[2 * i + 1] = std::cos(freq * u);
  }
  return e;
}

Tensor ScoreNet::eval(const Tensor& x_t, std::size_t t,
                      const NoiseSchedule& sched) const {
  if (t < 1 || t > sched.T) {
    throw std::invalid_argument("ScoreNet::eval: t out of range");
  }
  const Tensor emb = tile_rows(time_embedding(t, sched.T), x_t.rows());
  Tensor s = net_.forward(concat_cols(x_t, emb));
  if (particles_) s = zero_center(s, particles_->n, particles_->d);
  return s;
}

Var ScoreNet::eval(GradTape& tape, Var x_t, std::size_t t,
                   const NoiseSchedule& sched,
                   const std::vector<Var>& params) const {
  if (t < 1 || t > sched.T) {
    throw std::invalid_argument("ScoreNet::eval: t out of range");
  }
  const std::size_t rows = tape.value(x_t).rows();
  Var emb = tape.constant(tile_rows(time_embedding(t, sched.T), rows));
  Var s = net_.forward(tape, tape.concat_cols(x_t, emb), params);
  if (particles_) s = tape.zero_center(s, particles_->n, particles_->d);
  return s;
}

}  // namespace dikl
