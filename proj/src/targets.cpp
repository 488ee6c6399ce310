#include "dikl/targets.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "dikl/rng.hpp"

namespace dikl {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

// The MoG-40 means are drawn once from this dedicated stream so every run
// sees the same benchmark instance. The seed was picked so the 40 means keep
// a minimum pairwise separation of at least 4 (component sigma is 1), which
// keeps mode assignment unambiguous.
constexpr std::uint64_t kMog40Seed = 190;

}  // namespace

double EnergyTarget::energy_and_score(std::span<const double> x,
                                      std::span<double> out) const {
  score(x, out);
  return energy(x);
}

Tensor EnergyTarget::sample_exact(std::size_t, RngStream&) const {
  throw std::logic_error(std::string(kind()) + ": no exact sampler");
}

std::vector<double> EnergyTarget::energies(const Tensor& X) const {
  std::vector<double> out(X.rows());
  for (std::size_t i = 0; i < X.rows(); ++i) out[i] = energy(X.row(i));
  return out;
}

Tensor EnergyTarget::scores(const Tensor& X) const {
  Tensor out({X.rows(), X.cols()});
  for (std::size_t i = 0; i < X.rows(); ++i) score(X.row(i), out.row(i));
  return out;
}

namespace {

class GaussTarget final : public EnergyTarget {
 public:
  explicit GaussTarget(std::size_t dim) : dim_(dim) {}

  std::size_t dim() const override { return dim_; }
  std::string_view kind() const override { return "gauss"; }

  double energy(std::span<const double> x) const override {
    double s = 0.0;
    for (double v : x) s += v * v;
    return 0.5 * s + 0.5 * static_cast<double>(dim_) * kLog2Pi;
  }

  void score(std::span<const double> x, std::span<double> out) const override {
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = -x[i];
  }

  bool has_exact_sampler() const override { return true; }

  Tensor sample_exact(std::size_t n, RngStream& stream) const override {
    return randn(stream, {n, dim_});
  }

 private:
  std::size_t dim_;
};

class MogTarget final : public EnergyTarget {
 public:
  MogTarget(Tensor means, double var)
      : means_(std::move(means)), var_(var) {
    if (means_.rank() != 2 || means_.rows() == 0) {
      throw std::invalid_argument("mog: means must be a [K, dim] tensor");
    }
    if (!(var_ > 0.0)) throw std::invalid_argument("mog: variance must be > 0");
    // log of the per-component constant w_k / (2 pi sigma^2)^{d/2}
    log_const_ = -std::log(static_cast<double>(means_.rows())) -
                 0.5 * static_cast<double>(means_.cols()) *
                     (kLog2Pi + std::log(var_));
  }

  std::size_t dim() const override { return means_.cols(); }
  std::string_view kind() const override { return "mog"; }
  const Tensor* modes() const override { return &means_; }

  double energy(std::span<const double> x) const override {
    return -logsumexp_terms(x, nullptr);
  }

  void score(std::span<const double> x, std::span<double> out) const override {
    std::vector<double> resp(means_.rows());
    logsumexp_terms(x, &resp);
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t k = 0; k < means_.rows(); ++k) {
      const auto mu = means_.row(k);
      for (std::size_t j = 0; j < x.size(); ++j) {
        out[j] += resp[k] * (mu[j] - x[j]) / var_;
      }
    }
  }

  double energy_and_score(std::span<const double> x,
                          std::span<double> out) const override {
    std::vector<double> resp(means_.rows());
    const double lse = logsumexp_terms(x, &resp);
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t k = 0; k < means_.rows(); ++k) {
      const auto mu = means_.row(k);
      for (std::size_t j = 0; j < x.size(); ++j) {
        out[j] += resp[k] * (mu[j] - x[j]) / var_;
      }
    }
    return -lse;
  }

  bool has_exact_sampler() const override { return true; }

  Tensor sample_exact(std::size_t n, RngStream& stream) const override {
    const std::size_t d = means_.cols();
    const double sigma = std::sqrt(var_);
    Tensor out({n, d});
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t k = stream.below(means_.rows());
      const auto mu = means_.row(k);
      auto row = out.row(i);
      for (std::size_t j = 0; j < d; ++j) {
        row[j] = mu[j] + sigma * stream.normal();
      }
    }
    return out;
  }

  const Tensor& means() const { return means_; }

 private:
  // Returns log p(x). When resp is non-null it is filled with the component
  // responsibilities (softmax of the per-component log terms).
  double logsumexp_terms(std::span<const double> x,
                         std::vector<double>* resp) const {
    const std::size_t K = means_.rows(), d = means_.cols();
    std::vector<double> logs(K);
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < K; ++k) {
      const auto mu = means_.row(k);
      double q = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        const double diff = x[j] - mu[j];
        q += diff * diff;
      }
      logs[k] = log_const_ - 0.5 * q / var_;
      mx = std::max(mx, logs[k]);
    }
    double s = 0.0;
    for (std::size_t k = 0; k < K; ++k) s += std::exp(logs[k] - mx);
    const double lse = mx + std::log(s);
    if (resp) {
      for (std::size_t k = 0; k < K; ++k) (*resp)[k] = std::exp(logs[k] - lse);
    }
    return lse;
  }

  Tensor means_;
  double var_;
  double log_const_;
};

class ManyWellTarget final : public EnergyTarget {
 public:
  explicit ManyWellTarget(std::size_t blocks) : blocks_(blocks) {
    if (blocks_ == 0) throw std::invalid_argument("manywell: blocks must be > 0");
    build_inverse_cdf();
  }

  std::size_t dim() const override { return 2 * blocks_; }
  std::string_view kind() const override { return "manywell"; }

  double energy(std::span<const double> x) const override {
    double e = 0.0;
    for (std::size_t b = 0; b < blocks_; ++b) {
      const double x1 = x[2 * b], x2 = x[2 * b + 1];
      e += x1 * x1 * x1 * x1 - 6.0 * x1 * x1 - 0.5 * x1 + 0.5 * x2 * x2;
    }
    return e;
  }

  void score(std::span<const double> x, std::span<double> out) const override {
    for (std::size_t b = 0; b < blocks_; ++b) {
      const double x1 = x[2 * b];
      out[2 * b] = -(4.0 * x1 * x1 * x1 - 12.0 * x1 - 0.5);
      out[2 * b + 1] = -x[2 * b + 1];
    }
  }

  bool has_exact_sampler() const override { return true; }

  Tensor sample_exact(std::size_t n, RngStream& stream) const override {
    Tensor out({n, dim()});
    for (std::size_t i = 0; i < n; ++i) {
      auto row = out.row(i);
      for (std::size_t b = 0; b < blocks_; ++b) {
        row[2 * b] = sample_x1(stream.uniform());
        row[2 * b + 1] = stream.normal();
      }
    }
    return out;
  }

 private:
  static constexpr std::size_t kGrid = 4096;
  static constexpr double kLo = -4.0, kHi = 4.0;

  static double marginal_energy(double x1) {
    return x1 * x1 * x1 * x1 - 6.0 * x1 * x1 - 0.5 * x1;
  }

  void build_inverse_cdf() {
    grid_x_.resize(kGrid);
    grid_p_.resize(kGrid);
    cdf_.resize(kGrid);
    double emin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < kGrid; ++i) {
      grid_x_[i] = kLo + (kHi - kLo) * static_cast<double>(i) /
                             static_cast<double>(kGrid - 1);
      emin = std::min(emin, marginal_energy(grid_x_[i]));
    }
    for (std::size_t i = 0; i < kGrid; ++i) {
      grid_p_[i] = std::exp(-(marginal_energy(grid_x_[i]) - emin));
    }
    cdf_[0] = 0.0;
    for (std::size_t i = 1; i < kGrid; ++i) {
      cdf_[i] = cdf_[i - 1] + 0.5 * (grid_p_[i - 1] + grid_p_[i]) *
                                  (grid_x_[i] - grid_x_[i - 1]);
    }
    const double total = cdf_.back();
    for (double& c : cdf_) c /= total;
  }

  double sample_x1(double u) const {
    const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.begin()) return grid_x_.front();
    if (it == cdf_.end()) return grid_x_.back();
    const std::size_t i = static_cast<std::size_t>(it - cdf_.begin());
    const double c0 = cdf_[i - 1], c1 = cdf_[i];
    const double f = c1 > c0 ? (u - c0) / (c1 - c0) : 0.0;
    return grid_x_[i - 1] + f * (grid_x_[i] - grid_x_[i - 1]);
  }

  std::size_t blocks_;
  std::vector<double> grid_x_, grid_p_, cdf_;
};

// Shared pair-potential machinery for the particle targets. Derived classes
// supply f(d) and f'(d) for the pair term plus an optional confinement term.
class ParticleTarget : public EnergyTarget {
 public:
  ParticleTarget(std::size_t n, std::size_t d) : n_(n), d_(d) {
    if (n < 2) throw std::invalid_argument("particle target: need n >= 2");
    if (d != 2 && d != 3) {
      throw std::invalid_argument("particle target: d must be 2 or 3");
    }
  }

  std::size_t dim() const override { return n_ * d_; }
  std::optional<ParticleShape> particles() const override {
    return ParticleShape{n_, d_};
  }

  double energy(std::span<const double> x) const override {
    return eval(x, nullptr);
  }

  void score(std::span<const double> x, std::span<double> out) const override {
    (void)eval(x, &out);
  }

  double energy_and_score(std::span<const double> x,
                          std::span<double> out) const override {
    return eval(x, &out);
  }

 protected:
  virtual double pair_value(double dist) const = 0;
  virtual double pair_slope(double dist) const = 0;
  // Confinement energy and its gradient contribution, default none.
  virtual double confinement(std::span<const double>,
                             std::span<double>* grad) const {
    (void)grad;
    return 0.0;
  }

  std::size_t n_, d_;

 private:
  // One pass over all pairs; fills -grad into *out when requested.
  double eval(std::span<const double> x, std::span<double>* out) const {
    if (out) std::fill(out->begin(), out->end(), 0.0);
    double e = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = i + 1; j < n_; ++j) {
        double q = 0.0;
        for (std::size_t k = 0; k < d_; ++k) {
          const double diff = x[i * d_ + k] - x[j * d_ + k];
          q += diff * diff;
        }
        const double dist = std::sqrt(q);
        e += pair_value(dist);
        if (out && dist > 1e-12) {
          const double g = pair_slope(dist) / dist;
          for (std::size_t k = 0; k < d_; ++k) {
            const double diff = x[i * d_ + k] - x[j * d_ + k];
            (*out)[i * d_ + k] -= g * diff;
            (*out)[j * d_ + k] += g * diff;
          }
        }
      }
    }
    e += confinement(x, out);
    return e;
  }
};

class DwParticles final : public ParticleTarget {
 public:
  DwParticles(std::size_t n, std::size_t d, DoubleWellParams p)
      : ParticleTarget(n, d), p_(p) {}

  std::string_view kind() const override { return "dw_particles"; }

 protected:
  double pair_value(double dist) const override {
    const double u = dist - p_.d0;
    return (p_.a * u + p_.b * u * u + p_.c * u * u * u * u) / (2.0 * p_.tau);
  }

  double pair_slope(double dist) const override {
    const double u = dist - p_.d0;
    return (p_.a + 2.0 * p_.b * u + 4.0 * p_.c * u * u * u) / (2.0 * p_.tau);
  }

 private:
  DoubleWellParams p_;
};

class LjParticles final : public ParticleTarget {
 public:
  LjParticles(std::size_t n, std::size_t d, LennardJonesParams p)
      : ParticleTarget(n, d), p_(p) {
    d_cut_ = p_.cutoff_frac * p_.r_m;
    v_cut_ = lj_raw(d_cut_);
    s_cut_ = lj_raw_slope(d_cut_);
  }

  std::string_view kind() const override { return "lj_particles"; }

 protected:
  double pair_value(double dist) const override {
    if (dist < d_cut_) return v_cut_ + s_cut_ * (dist - d_cut_);
    return lj_raw(dist);
  }

  double pair_slope(double dist) const override {
    if (dist < d_cut_) return s_cut_;
    return lj_raw_slope(dist);
  }

  double confinement(std::span<const double> x,
                     std::span<double>* grad) const override {
    std::vector<double> com(d_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t k = 0; k < d_; ++k) com[k] += x[i * d_ + k];
    }
    for (double& c : com) c /= static_cast<double>(n_);
    double e = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t k = 0; k < d_; ++k) {
        const double diff = x[i * d_ + k] - com[k];
        e += diff * diff;
        // The centered-coordinate cross terms cancel, so the gradient is
        // just 2 c_osc (x_i - xbar).
        if (grad) (*grad)[i * d_ + k] -= 2.0 * p_.c_osc * diff;
      }
    }
    return p_.c_osc * e;
  }

 private:
  double lj_raw(double dist) const {
    const double r6 = std::pow(p_.r_m / dist, 6);
    return p_.eps_lj / (2.0 * p_.tau) * (r6 * r6 - 2.0 * r6);
  }

  double lj_raw_slope(double dist) const {
    const double r6 = std::pow(p_.r_m / dist, 6);
    return p_.eps_lj / (2.0 * p_.tau) * (-12.0 / dist) * (r6 * r6 - r6);
  }

  LennardJonesParams p_;
  double d_cut_, v_cut_, s_cut_;
};

}  // namespace

std::unique_ptr<EnergyTarget> make_gauss(std::size_t dim) {
  return std::make_unique<GaussTarget>(dim);
}

std::unique_ptr<EnergyTarget> make_mog(Tensor means, double component_var) {
  return std::make_unique<MogTarget>(std::move(means), component_var);
}

std::unique_ptr<EnergyTarget> make_mog40() {
  RngStream stream(kMog40Seed, 0);
  RngStream means_stream = stream.substream("mog40_means");
  Tensor means({40, 2});
  for (std::size_t i = 0; i < means.size(); ++i) {
    means[i] = -40.0 + 80.0 * means_stream.uniform();
  }
  return std::make_unique<MogTarget>(std::move(means), 1.0);
}

std::unique_ptr<EnergyTarget> make_manywell(std::size_t blocks) {
  return std::make_unique<ManyWellTarget>(blocks);
}

std::unique_ptr<EnergyTarget> make_manywell32() { return make_manywell(16); }

std::unique_ptr<EnergyTarget> make_dw_particles(std::size_t n, std::size_t d,
                                                DoubleWellParams p) {
  return std::make_unique<DwParticles>(n, d, p);
}

std::unique_ptr<EnergyTarget> make_dw4() {
  return make_dw_particles(4, 2, DoubleWellParams{});
}

std::unique_ptr<EnergyTarget> make_lj_particles(std::size_t n, std::size_t d,
                                                LennardJonesParams p) {
  return std::make_unique<LjParticles>(n, d, p);
}

std::unique_ptr<EnergyTarget> make_lj13() {
  return make_lj_particles(13, 3, LennardJonesParams{});
}

std::unique_ptr<EnergyTarget> make_target(const std::string& name) {
  if (name == "mog40") return make_mog40();
  if (name == "mw32") return make_manywell32();
  if (name == "dw4") return make_dw4();
  if (name == "lj13") return make_lj13();
  if (name.rfind("gauss", 0) == 0 && name.size() > 5) {
    std::size_t pos = 0;
    const std::string digits = name.substr(5);
    const unsigned long dim = std::stoul(digits, &pos);
    if (pos == digits.size() && dim > 0) return make_gauss(dim);
  }
  throw std::invalid_argument("unknown target: " + name);
}

namespace {

// Plain MALA on the target density itself, used only for reference sampling
// of targets without an exact sampler.
Tensor mala_reference(const EnergyTarget& target, std::size_t n_samples,
                      RngStream& stream) {
  const std::size_t dim = target.dim();
  const auto pshape = target.particles();
  const std::size_t burn = 2000, thin = 20;

  std::vector<double> x(dim, 0.0), xp(dim), sc(dim), scp(dim);
  // Spread the particles out so pair potentials start finite and distinct.
  for (std::size_t i = 0; i < dim; ++i) x[i] = 0.5 * stream.normal();
  if (pshape) {
    Tensor tmp = Tensor::vector(std::vector<double>(x.begin(), x.end()));
    tmp = zero_center(tmp, pshape->n, pshape->d);
    std::copy(tmp.data(), tmp.data() + dim, x.begin());
  }

  double e = target.energy_and_score(x, sc);
  double step = 1e-3;
  Tensor out({n_samples, dim});
  std::size_t produced = 0;
  std::size_t accepted = 0, window = 0;

  for (std::size_t it = 0; produced < n_samples; ++it) {
    for (std::size_t i = 0; i < dim; ++i) {
      xp[i] = x[i] + step * sc[i] + std::sqrt(2.0 * step) * stream.normal();
    }
    const double ep = target.energy_and_score(xp, scp);
    double log_acc = e - ep;
    if (std::isfinite(ep)) {
      double qf = 0.0, qb = 0.0;
      for (std::size_t i = 0; i < dim; ++i) {
        const double f = xp[i] - x[i] - step * sc[i];
        const double b = x[i] - xp[i] - step * scp[i];
        qf += f * f;
        qb += b * b;
      }
      log_acc += (qf - qb) / (4.0 * step);
    } else {
      log_acc = -std::numeric_limits<double>::infinity();
    }
    ++window;
    if (std::log(stream.uniform_open()) < log_acc) {
      x = xp;
      sc = scp;
      e = ep;
      ++accepted;
    }
    if (it < burn && window == 100) {
      const double rate = static_cast<double>(accepted) / window;
      if (rate > 0.6) step *= 1.5;
      if (rate < 0.5) step /= 1.5;
      accepted = 0;
      window = 0;
    }
    if (it >= burn && (it - burn) % thin == 0) {
      auto row = out.row(produced);
      std::copy(x.begin(), x.end(), row.begin());
      ++produced;
    }
  }
  if (pshape) out = zero_center(out, pshape->n, pshape->d);
  return out;
}

}  // namespace

Tensor ground_truth_samples(const EnergyTarget& target, std::size_t n_samples,
                            RngStream& stream) {
  if (n_samples == 0) {
    throw std::invalid_argument("ground_truth_samples: n_samples must be > 0");
  }
  if (target.has_exact_sampler()) return target.sample_exact(n_samples, stream);
  return mala_reference(target, n_samples, stream);
}

}  // namespace dikl
