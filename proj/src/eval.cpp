#include "dikl/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "dikl/rng.hpp"

namespace dikl {
namespace {

constexpr double kLog2Pi = 1.8378770664093453;

double interp_quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

Tensor subsample_rows(const Tensor& x, std::size_t k, RngStream stream) {
  std::vector<std::size_t> idx(x.rows());
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + stream.below(idx.size() - i);
    std::swap(idx[i], idx[j]);
  }
  Tensor out({k, x.cols()});
  for (std::size_t i = 0; i < k; ++i) {
    auto src = x.row(idx[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

double sq_dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double d = a[j] - b[j];
    s += d * d;
  }
  return s;
}

struct Simpson {
  double (*f)(double, const void*);
  const void* ctx;
  int max_depth;

  double eval(double a, double fa, double b, double fb, double m, double fm,
              double whole, double tol, int depth) const {
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm, ctx), frm = f(rm, ctx);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    if (depth >= max_depth) {
      throw std::runtime_error("adaptive quadrature did not converge");
    }
    return eval(a, fa, m, fm, lm, flm, left, 0.5 * tol, depth + 1) +
           eval(m, fm, b, fb, rm, frm, right, 0.5 * tol, depth + 1);
  }

  double run(double a, double b, double tol) const {
    const double m = 0.5 * (a + b);
    const double fa = f(a, ctx), fb = f(b, ctx), fm = f(m, ctx);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return eval(a, fa, b, fb, m, fm, whole, tol, 0);
  }
};

struct KlIntegrand {
  double q_mean, q_var;
  const Mog1d* r;
};

double kl_integrand(double x, const void* ctx) {
  const auto* c = static_cast<const KlIntegrand*>(ctx);
  const double d = x - c->q_mean;
  const double lq = -0.5 * (kLog2Pi + std::log(c->q_var) + d * d / c->q_var);
  return std::exp(lq) * (lq - c->r->log_pdf(x));
}

}  // namespace

HistogramSpec HistogramSpec::from_reference(std::vector<double> values,
                                            std::size_t bins, double trim) {
  if (values.empty() || bins == 0) {
    throw std::invalid_argument("histogram: empty reference or zero bins");
  }
  std::sort(values.begin(), values.end());
  double lo = interp_quantile(values, trim);
  double hi = interp_quantile(values, 1.0 - trim);
  if (!(hi - lo > 0.0)) {  // degenerate reference: open up a unit window
    lo -= 0.5;
    hi += 0.5;
  }
  HistogramSpec spec;
  spec.edges.resize(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) {
    spec.edges[i] =
        lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins);
  }
  return spec;
}

std::vector<double> HistogramSpec::probabilities(
    const std::vector<double>& values) const {
  if (values.empty()) {
    throw std::invalid_argument("histogram: no values to bin");
  }
  std::vector<double> p(bins(), 0.0);
  for (double v : values) {
    auto it = std::upper_bound(edges.begin(), edges.end(), v);
    std::size_t b;
    if (it == edges.begin()) {
      b = 0;  // below range: clip into the first bin
    } else {
      b = std::min(static_cast<std::size_t>(it - edges.begin()) - 1,
                   bins() - 1);
    }
    p[b] += 1.0;
  }
  for (double& x : p) x /= static_cast<double>(values.size());
  return p;
}

double tvd(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size()) {
    throw std::invalid_argument("tvd: histogram size mismatch");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return 0.5 * s;
}

// Shortest augmenting path assignment with row/column potentials; exact for
// dense cost matrices.
double assignment_cost(const std::vector<double>& cost, std::size_t n) {
  if (cost.size() != n * n || n == 0) {
    throw std::invalid_argument("assignment_cost: bad matrix");
  }
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  double total = 0.0;
  for (std::size_t j = 1; j <= n; ++j) total += cost[(p[j] - 1) * n + (j - 1)];
  return total;
}

double wasserstein2(const Tensor& a, const Tensor& b, std::size_t max_n) {
  if (a.cols() != b.cols()) {
    throw std::invalid_argument("wasserstein2: dimension mismatch");
  }
  RngStream sub(889063, 0);
  Tensor aa = a.rows() > max_n
                  ? subsample_rows(a, max_n, sub.substream("w2_left"))
                  : a;
  Tensor bb = b.rows() > max_n
                  ? subsample_rows(b, max_n, sub.substream("w2_right"))
                  : b;
  const std::size_t n = aa.rows();
  if (n == 0 || bb.rows() != n) {
    throw std::invalid_argument("wasserstein2: sets must match in size");
  }
  std::vector<double> cost(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      cost[i * n + j] = sq_dist(aa.row(i), bb.row(j));
    }
  }
  return std::sqrt(assignment_cost(cost, n) / static_cast<double>(n));
}

double energy_tvd(const EnergyTarget& target, const Tensor& a, const Tensor& b,
                  const HistogramSpec& spec) {
  return tvd(spec.probabilities(target.energies(a)),
             spec.probabilities(target.energies(b)));
}

double energy_tvd(const EnergyTarget& target, const Tensor& a,
                  const Tensor& b) {
  HistogramSpec spec = HistogramSpec::from_reference(target.energies(b));
  return energy_tvd(target, a, b, spec);
}

std::vector<double> pairwise_distances(const Tensor& x, ParticleShape shape) {
  if (x.cols() != shape.n * shape.d) {
    throw std::invalid_argument("pairwise_distances: shape mismatch");
  }
  std::vector<double> out;
  out.reserve(x.rows() * shape.n * (shape.n - 1) / 2);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto row = x.row(r);
    for (std::size_t i = 0; i < shape.n; ++i) {
      for (std::size_t j = i + 1; j < shape.n; ++j) {
        double s = 0.0;
        for (std::size_t c = 0; c < shape.d; ++c) {
          const double d = row[i * shape.d + c] - row[j * shape.d + c];
          s += d * d;
        }
        out.push_back(std::sqrt(s));
      }
    }
  }
  return out;
}

double distance_tvd(const Tensor& a, const Tensor& b, ParticleShape shape,
                    const HistogramSpec& spec) {
  return tvd(spec.probabilities(pairwise_distances(a, shape)),
             spec.probabilities(pairwise_distances(b, shape)));
}

double distance_tvd(const Tensor& a, const Tensor& b, ParticleShape shape) {
  HistogramSpec spec =
      HistogramSpec::from_reference(pairwise_distances(b, shape));
  return distance_tvd(a, b, shape, spec);
}

double mean_log_density(const EnergyTarget& target, const Tensor& samples) {
  if (target.kind() != "mog") {
    throw std::invalid_argument(
        "mean_log_density: needs a normalized mixture target");
  }
  std::vector<double> e = target.energies(samples);
  double s = 0.0;
  for (double x : e) s -= x;
  return s / static_cast<double>(e.size());
}

ModeCoverage mode_coverage(const EnergyTarget& target, const Tensor& samples,
                           double min_frac) {
  const Tensor* means = target.modes();
  if (means == nullptr) {
    throw std::invalid_argument("mode_coverage: target has no modes");
  }
  ModeCoverage cov;
  cov.fractions.assign(means->rows(), 0.0);
  for (std::size_t r = 0; r < samples.rows(); ++r) {
    auto x = samples.row(r);
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < means->rows(); ++k) {
      const double d = sq_dist(x, means->row(k));
      if (d < best_d) {
        best_d = d;
        best = k;
      }
    }
    cov.fractions[best] += 1.0;
  }
  for (double& f : cov.fractions) f /= static_cast<double>(samples.rows());
  for (double f : cov.fractions) {
    if (f >= min_frac) ++cov.covered;
  }
  return cov;
}

double Mog1d::log_pdf(double x) const {
  double best = -std::numeric_limits<double>::infinity();
  std::vector<double> terms(weight.size());
  for (std::size_t k = 0; k < weight.size(); ++k) {
    const double d = x - mean[k];
    terms[k] = std::log(weight[k]) -
               0.5 * (kLog2Pi + std::log(var[k]) + d * d / var[k]);
    best = std::max(best, terms[k]);
  }
  double s = 0.0;
  for (double t : terms) s += std::exp(t - best);
  return best + std::log(s);
}

double Mog1d::pdf(double x) const { return std::exp(log_pdf(x)); }

Mog1d Mog1d::convolved(double alpha, double sigma) const {
  Mog1d out = *this;
  for (std::size_t k = 0; k < weight.size(); ++k) {
    out.mean[k] = alpha * mean[k];
    out.var[k] = alpha * alpha * var[k] + sigma * sigma;
  }
  return out;
}

std::vector<double> convolved_density_1d(const Mog1d& mog, double sigma,
                                         const std::vector<double>& grid) {
  Mog1d blurred = mog.convolved(1.0, sigma);
  std::vector<double> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) out[i] = blurred.pdf(grid[i]);
  return out;
}

LandscapeGrid kl_landscape(std::vector<double> mu_grid,
                           std::vector<double> sigma_grid, const Mog1d& target,
                           std::vector<NoiseLevel> levels, double tol,
                           int max_depth) {
  LandscapeGrid grid;
  grid.mu = std::move(mu_grid);
  grid.sigma = std::move(sigma_grid);
  grid.levels = std::move(levels);
  grid.kl.resize(grid.levels.size() * grid.mu.size() * grid.sigma.size());

  std::size_t cell = 0;
  for (std::size_t l = 0; l < grid.levels.size(); ++l) {
    const NoiseLevel& lvl = grid.levels[l];
    Mog1d noisy_target = target.convolved(lvl.alpha, lvl.sigma);
    for (std::size_t i = 0; i < grid.mu.size(); ++i) {
      for (std::size_t j = 0; j < grid.sigma.size(); ++j, ++cell) {
        KlIntegrand ctx;
        ctx.q_mean = lvl.alpha * grid.mu[i];
        ctx.q_var = lvl.alpha * lvl.alpha * grid.sigma[j] * grid.sigma[j] +
                    lvl.sigma * lvl.sigma;
        ctx.r = &noisy_target;
        const double sd = std::sqrt(ctx.q_var);
        Simpson quad{kl_integrand, &ctx, max_depth};
        double value;
        try {
          value = quad.run(ctx.q_mean - 12.0 * sd, ctx.q_mean + 12.0 * sd, tol);
        } catch (const std::runtime_error&) {
          throw std::runtime_error(
              "kl_landscape: quadrature did not converge at cell (level=" +
              std::to_string(l) + ", mu=" + std::to_string(i) +
              ", sigma=" + std::to_string(j) + ")");
        }
        grid.kl[cell] = std::max(0.0, value);
      }
    }
  }
  return grid;
}

}  // namespace dikl
