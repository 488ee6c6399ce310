#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <vector>

#include "dikl/eval.hpp"
#include "dikl/rng.hpp"
#include "dikl/targets.hpp"
#include "dikl/tensor.hpp"
#include "test_util.hpp"

using namespace dikl;

namespace {

double brute_force_w2(const Tensor& a, const Tensor& b) {
  const std::size_t n = a.rows();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      auto ra = a.row(i);
      auto rb = b.row(perm[i]);
      for (std::size_t j = 0; j < a.cols(); ++j) {
        const double d = ra[j] - rb[j];
        total += d * d;
      }
    }
    best = std::min(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return std::sqrt(best / static_cast<double>(n));
}

// Successive-shortest-path min-cost flow; an implementation independent of
// the assignment solver, used as the n = 64 oracle.
struct Mcmf {
  struct Edge {
    std::size_t to;
    double cap, cost;
    std::size_t rev;
  };
  std::vector<std::vector<Edge>> g;

  explicit Mcmf(std::size_t n) : g(n) {}

  void add(std::size_t u, std::size_t v, double cap, double cost) {
    g[u].push_back({v, cap, cost, g[v].size()});
    g[v].push_back({u, 0.0, -cost, g[u].size() - 1});
  }

  double min_cost_max_flow(std::size_t s, std::size_t t) {
    const double inf = std::numeric_limits<double>::infinity();
    double total = 0.0;
    while (true) {
      std::vector<double> dist(g.size(), inf);
      std::vector<std::size_t> pv(g.size(), 0), pe(g.size(), 0);
      std::vector<char> inq(g.size(), 0);
      std::deque<std::size_t> q{s};
      dist[s] = 0.0;
      while (!q.empty()) {
        const std::size_t u = q.front();
        q.pop_front();
        inq[u] = 0;
        for (std::size_t k = 0; k < g[u].size(); ++k) {
          const Edge& e = g[u][k];
          if (e.cap > 0.0 && dist[u] + e.cost < dist[e.to] - 1e-15) {
            dist[e.to] = dist[u] + e.cost;
            pv[e.to] = u;
            pe[e.to] = k;
            if (!inq[e.to]) {
              inq[e.to] = 1;
              q.push_back(e.to);
            }
          }
        }
      }
      if (dist[t] == inf) break;
      double push = inf;
      for (std::size_t v = t; v != s; v = pv[v]) {
        push = std::min(push, g[pv[v]][pe[v]].cap);
      }
      for (std::size_t v = t; v != s; v = pv[v]) {
        Edge& e = g[pv[v]][pe[v]];
        e.cap -= push;
        g[v][e.rev].cap += push;
      }
      total += push * dist[t];
    }
    return total;
  }
};

double flow_w2(const Tensor& a, const Tensor& b) {
  const std::size_t n = a.rows();
  Mcmf net(2 * n + 2);
  const std::size_t src = 2 * n, snk = 2 * n + 1;
  for (std::size_t i = 0; i < n; ++i) {
    net.add(src, i, 1.0, 0.0);
    net.add(n + i, snk, 1.0, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      double c = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) {
        const double d = a.at(i, k) - b.at(j, k);
        c += d * d;
      }
      net.add(i, n + j, 1.0, c);
    }
  }
  return std::sqrt(net.min_cost_max_flow(src, snk) / static_cast<double>(n));
}

std::size_t count_local_maxima(const std::vector<double>& v) {
  std::size_t c = 0;
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    if (v[i] > v[i - 1] && v[i] > v[i + 1]) ++c;
  }
  return c;
}

}  // namespace

TEST_CASE("histogram spec covers the trimmed range and clips outliers") {
  RngStream r(401, 0);
  std::vector<double> ref(2000);
  for (double& x : ref) x = r.normal();
  HistogramSpec spec = HistogramSpec::from_reference(ref, 50);
  REQUIRE(spec.bins() == 50);
  for (std::size_t i = 0; i < 50; ++i) CHECK(spec.edges[i] < spec.edges[i + 1]);

  std::vector<double> wild = ref;
  wild.push_back(1e6);
  wild.push_back(-1e6);
  std::vector<double> p = spec.probabilities(wild);
  CHECK(std::accumulate(p.begin(), p.end(), 0.0) == doctest::Approx(1.0));
  CHECK(p.front() > 0.0);
  CHECK(p.back() > 0.0);

  // Degenerate constant reference still yields a usable window.
  HistogramSpec flat = HistogramSpec::from_reference({2.0, 2.0, 2.0}, 4);
  std::vector<double> q = flat.probabilities({2.0, 2.0});
  CHECK(std::accumulate(q.begin(), q.end(), 0.0) == doctest::Approx(1.0));

  CHECK(tvd({0.5, 0.5}, {1.0, 0.0}) == doctest::Approx(0.5));
  CHECK(tvd({1.0, 0.0}, {0.0, 1.0}) == doctest::Approx(1.0));
  CHECK_THROWS_AS((void)tvd({1.0}, {0.5, 0.5}), std::invalid_argument);
}

TEST_CASE("wasserstein2 identity and two-point arithmetic") {
  RngStream r(402, 0);
  Tensor a = randn(r, {32, 2});
  CHECK(wasserstein2(a, a) == 0.0);

  Tensor x = Tensor::matrix(2, 1, {0.0, 0.0});
  Tensor y = Tensor::matrix(2, 1, {3.0, 4.0});
  CHECK(wasserstein2(x, y) == doctest::Approx(std::sqrt(12.5)));
}

TEST_CASE("wasserstein2 equals exhaustive search at small n") {
  RngStream r(403, 0);
  for (std::size_t n : {2ul, 5ul, 8ul}) {
    Tensor a = randn(r, {n, 2});
    Tensor b = randn(r, {n, 2});
    CHECK(std::abs(wasserstein2(a, b) - brute_force_w2(a, b)) < 1e-12);
  }
}

TEST_CASE("wasserstein2 equals a min-cost-flow oracle at n = 64") {
  RngStream r(404, 0);
  Tensor a = randn(r, {64, 2});
  Tensor b = add(randn(r, {64, 2}), Tensor(std::vector<std::size_t>{64, 2}, 0.7));
  CHECK(std::abs(wasserstein2(a, b) - flow_w2(a, b)) < 1e-9);
}

TEST_CASE("wasserstein2 is symmetric and obeys the triangle inequality") {
  RngStream r(405, 0);
  Tensor a = randn(r, {24, 3});
  Tensor b = scale(randn(r, {24, 3}), 1.5);
  Tensor c = add(randn(r, {24, 3}), Tensor(std::vector<std::size_t>{24, 3}, 0.8));
  const double ab = wasserstein2(a, b), ba = wasserstein2(b, a);
  const double bc = wasserstein2(b, c), ac = wasserstein2(a, c);
  CHECK(std::abs(ab - ba) < 1e-9);
  CHECK(ac <= ab + bc + 1e-9);
}

TEST_CASE("wasserstein2 subsampling is deterministic and size-checked") {
  RngStream r(406, 0);
  Tensor a = randn(r, {300, 1});
  Tensor b = randn(r, {300, 1});
  const double w1 = wasserstein2(a, b, 64);
  const double w2 = wasserstein2(a, b, 64);
  CHECK(w1 == w2);
  CHECK(w1 > 0.0);

  Tensor c = randn(r, {299, 1});
  CHECK_THROWS_AS((void)wasserstein2(a, c, 2048), std::invalid_argument);
}

TEST_CASE("energy tvd vanishes on identical sets and saturates on disjoint") {
  auto g = make_gauss(2);
  RngStream r(407, 0);
  Tensor b = randn(r, {500, 2});
  CHECK(energy_tvd(*g, b, b) == 0.0);

  Tensor far = add(randn(r, {500, 2}), Tensor(std::vector<std::size_t>{500, 2}, 100.0));
  CHECK(energy_tvd(*g, far, b) > 0.95);
}

TEST_CASE("distance tvd is translation invariant and separates point masses") {
  ParticleShape shape{4, 2};
  RngStream r(408, 0);
  Tensor a = randn(r, {300, 8});
  Tensor shifted = a;
  for (std::size_t i = 0; i < shifted.rows(); ++i) {
    auto row = shifted.row(i);
    for (std::size_t p = 0; p < 4; ++p) {
      row[p * 2] += 64.0;
      row[p * 2 + 1] -= 32.0;
    }
  }
  CHECK(distance_tvd(shifted, a, shape) == 0.0);

  // Reference configurations spread over the wells against one frozen
  // configuration: the pooled-distance histograms barely overlap.
  auto dw = make_dw4();
  Tensor ref = ground_truth_samples(*dw, 300, r);
  Tensor frozen({300, 8});
  for (std::size_t i = 0; i < 300; ++i) {
    const double cfg[8] = {1.0, 0.1, -0.9, 0.2, 0.8, -1.1, -1.0, -0.8};
    std::copy(cfg, cfg + 8, frozen.row(i).begin());
  }
  CHECK(distance_tvd(frozen, ref, shape) > 0.9);
}

TEST_CASE("mean log density matches the mixture formula and flags misuse") {
  Tensor means = Tensor::matrix(2, 2, {0.0, 0.0, 10.0, 0.0});
  auto mog = make_mog(means, 1.0);
  Tensor at_means = means;
  const double got = mean_log_density(*mog, at_means);

  auto comp = [&](double x0, double x1) {
    double s = 0.0;
    for (std::size_t k = 0; k < 2; ++k) {
      const double dx = x0 - means.at(k, 0), dy = x1 - means.at(k, 1);
      s += 0.5 * std::exp(-0.5 * (dx * dx + dy * dy)) / (2.0 * M_PI);
    }
    return std::log(s);
  };
  const double expected = 0.5 * (comp(0.0, 0.0) + comp(10.0, 0.0));
  CHECK(got == doctest::Approx(expected).epsilon(1e-12));

  Tensor far = Tensor::matrix(1, 2, {1000.0, 0.0});
  CHECK(mean_log_density(*mog, far) < -1e5);

  auto g = make_gauss(2);
  CHECK_THROWS_AS((void)mean_log_density(*g, at_means), std::invalid_argument);
}

TEST_CASE("mode coverage counts occupied mixture components") {
  auto mog40 = make_mog40();
  const Tensor* means = mog40->modes();
  REQUIRE(means != nullptr);
  REQUIRE(means->rows() == 40);

  ModeCoverage all = mode_coverage(*mog40, *means, 1.0 / 40.0);
  CHECK(all.covered == 40);

  Tensor one({25, 2});
  for (std::size_t i = 0; i < 25; ++i) {
    one.at(i, 0) = means->at(7, 0);
    one.at(i, 1) = means->at(7, 1);
  }
  ModeCoverage single = mode_coverage(*mog40, one);
  CHECK(single.covered == 1);
  CHECK(single.fractions[7] == doctest::Approx(1.0));

  RngStream r(409, 0);
  Tensor gt = mog40->sample_exact(10000, r);
  CHECK(mode_coverage(*mog40, gt).covered == 40);

  auto g = make_gauss(2);
  CHECK_THROWS_AS((void)mode_coverage(*g, one), std::invalid_argument);
}

TEST_CASE("convolved density closed form and mode merging") {
  Mog1d single{{1.0}, {0.5}, {1.0}};
  std::vector<double> grid;
  for (double x = -8.0; x <= 9.0; x += 0.01) grid.push_back(x);

  std::vector<double> same = convolved_density_1d(single, 0.0, grid);
  std::vector<double> blurred = convolved_density_1d(single, 1.0, grid);
  for (std::size_t i = 0; i < grid.size(); i += 50) {
    CHECK(same[i] == doctest::Approx(single.pdf(grid[i])).epsilon(1e-12));
    const double d = grid[i] - 0.5;
    const double n2 = std::exp(-0.25 * d * d) / std::sqrt(4.0 * M_PI);
    CHECK(blurred[i] == doctest::Approx(n2).epsilon(1e-12));
  }

  // Blurred density still integrates to 1 (trapezoid over a wide grid).
  double mass = 0.0;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    mass += 0.5 * (blurred[i] + blurred[i + 1]) * (grid[i + 1] - grid[i]);
  }
  CHECK(std::abs(mass - 1.0) < 1e-6);

  Mog1d three{{0.4, 0.3, 0.3}, {-4.0, 0.0, 5.0}, {0.09, 0.09, 0.09}};
  std::size_t prev = 4;
  for (double sigma : {0.0, 0.8, 1.8, 4.0}) {
    std::vector<double> dens = convolved_density_1d(three, sigma, grid);
    const std::size_t m = count_local_maxima(dens);
    CHECK(m <= prev);
    prev = m;
  }
  CHECK(count_local_maxima(convolved_density_1d(three, 0.0, grid)) == 3);
  CHECK(count_local_maxima(convolved_density_1d(three, 4.0, grid)) == 1);
}

TEST_CASE("kl landscape is zero exactly at a matching cell") {
  Mog1d target{{1.0}, {3.0}, {0.04}};
  LandscapeGrid grid = kl_landscape({2.5, 3.0}, {0.2}, target, {{1.0, 0.0}});
  CHECK(grid.at(0, 1, 0) <= 1e-9);
  CHECK(grid.at(0, 0, 0) > 1.0);
  for (double v : grid.kl) CHECK(v >= 0.0);
}

TEST_CASE("kl landscape turns mode-seeking into mode-covering with noise") {
  Mog1d target{{0.5, 0.5}, {-3.0, 3.0}, {0.01, 0.01}};
  std::vector<double> mu;
  for (double m = -4.0; m <= 4.0 + 1e-9; m += 0.2) mu.push_back(m);
  std::vector<NoiseLevel> levels{{1.0, 0.0}, {0.2, std::sqrt(1.0 - 0.04)}};
  LandscapeGrid grid = kl_landscape(mu, {0.1}, target, levels);

  auto argmin_mu = [&](std::size_t level) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < mu.size(); ++i) {
      if (grid.at(level, i, 0) < grid.at(level, best, 0)) best = i;
    }
    return mu[best];
  };
  CHECK(std::abs(std::abs(argmin_mu(0)) - 3.0) < 0.4);
  CHECK(std::abs(argmin_mu(1)) < 0.4);
}

TEST_CASE("kl landscape reports the failing cell on non-convergence") {
  Mog1d target{{1.0}, {0.0}, {0.01}};
  try {
    kl_landscape({2.0}, {0.05}, target, {{1.0, 0.0}}, 1e-16, 1);
    FAIL("expected the quadrature to give up");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("cell") != std::string::npos);
    CHECK(std::string(e.what()).find("mu=0") != std::string::npos);
  }
}
