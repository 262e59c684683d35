#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "ged/ged_loss.hpp"
#include "ged/rng.hpp"
#include "oracles.hpp"

using namespace ged;

namespace {

using Vec = std::vector<double>;

double euclid(const Vec& a, const Vec& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

double linear_kernel(const Vec& a, const Vec& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double gaussian_kernel(const Vec& a, const Vec& b) {
  double d = euclid(a, b);
  return std::exp(-d * d);
}

std::vector<Vec> random_batch(std::size_t n, std::size_t dim, std::uint64_t seed) {
  RngStream rng(seed);
  std::vector<Vec> out(n, Vec(dim));
  for (auto& v : out)
    for (auto& x : v) x = rng.normal();
  return out;
}

}  // namespace

TEST_CASE("kernel_to_distance identities") {
  Vec x = {1.0, -2.0, 0.5};
  Vec y = {0.0, 1.0, 2.0};
  double d = kernel_to_distance<Vec>(linear_kernel, x, y);
  CHECK(d == doctest::Approx(0.5 * euclid(x, y) * euclid(x, y)).epsilon(1e-12));

  auto constant = [](const Vec&, const Vec&) { return 3.7; };
  CHECK(kernel_to_distance<Vec>(constant, x, y) == doctest::Approx(0.0));

  CHECK(kernel_to_distance<Vec>(gaussian_kernel, x, x) == doctest::Approx(0.0));
}

TEST_CASE("mmd2_ustat agrees with a brute-force double loop") {
  auto xs = random_batch(6, 3, 1);
  auto ys = random_batch(5, 3, 2);
  double got = mmd2_ustat(xs, ys, gaussian_kernel);

  double t1 = 0.0, t2 = 0.0, t3 = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (std::size_t j = 0; j < xs.size(); ++j)
      if (i != j) t1 += gaussian_kernel(xs[i], xs[j]);
  for (std::size_t i = 0; i < ys.size(); ++i)
    for (std::size_t j = 0; j < ys.size(); ++j)
      if (i != j) t2 += gaussian_kernel(ys[i], ys[j]);
  for (const auto& x : xs)
    for (const auto& y : ys) t3 += gaussian_kernel(x, y);
  double want = t1 / 30.0 + t2 / 20.0 - 2.0 * t3 / 30.0;
  CHECK(got == doctest::Approx(want).epsilon(1e-14));
}

TEST_CASE("mmd2_ustat on the 2x2 scalar example enumerates to -0.5") {
  // X = {0,1}, Y = {0,1}, k(x,y) = x*y. Within-batch distinct pairs all
  // vanish; the cross term is -(2/(M*N)) * 1 = -1/2.
  std::vector<Vec> xs = {{0.0}, {1.0}};
  std::vector<Vec> ys = {{0.0}, {1.0}};
  double got = mmd2_ustat(xs, ys, linear_kernel);
  CHECK(got == doctest::Approx(-0.5).epsilon(1e-15));
}

TEST_CASE("mmd2_ustat batch size preconditions") {
  auto xs = random_batch(1, 2, 3);
  auto ys = random_batch(4, 2, 4);
  CHECK_THROWS_AS(mmd2_ustat(xs, ys, gaussian_kernel), std::invalid_argument);
  CHECK_THROWS_AS(mmd2_ustat(ys, xs, gaussian_kernel), std::invalid_argument);
}

TEST_CASE("mmd2_ustat is unbiased at p = q") {
  RngStream rng(5);
  double acc = 0.0, acc_sq = 0.0;
  const int trials = 3000;
  for (int t = 0; t < trials; ++t) {
    std::vector<Vec> xs(8, Vec(1)), ys(8, Vec(1));
    for (auto& v : xs) v[0] = rng.normal();
    for (auto& v : ys) v[0] = rng.normal();
    double est = mmd2_ustat(xs, ys, gaussian_kernel);
    acc += est;
    acc_sq += est * est;
  }
  double m = acc / trials;
  double se = std::sqrt((acc_sq / trials - m * m) / trials);
  CHECK(std::fabs(m) < 3.0 * se);
}

TEST_CASE("ged_population_estimate") {
  SUBCASE("zero distance gives zero") {
    auto xs = random_batch(4, 2, 6);
    auto ys = random_batch(4, 2, 7);
    auto zero = [](const Vec&, const Vec&) { return 0.0; };
    CHECK(ged_population_estimate(xs, ys, zero) == 0.0);
  }

  SUBCASE("resampling mean matches the enumerated expectation at p = q") {
    // Discrete distribution on 3 scalar points; at p = q the expectation
    // 2 E d(x,y) - E d(x,x') - E d(y,y') enumerates to exactly 0.
    oracle::Discrete p;
    p.support = {{0.0}, {1.0}, {3.0}};
    p.probs = {0.5, 0.3, 0.2};
    auto dist = [](const Vec& a, const Vec& b) { return std::fabs(a[0] - b[0]); };
    double exact = 2.0 * oracle::enumerate_pair_expect(p, p, dist) -
                   2.0 * oracle::enumerate_pair_expect(p, p, dist);
    CHECK(exact == 0.0);

    RngStream rng(8);
    auto draw = [&]() {
      double u = rng.uniform();
      return u < 0.5 ? Vec{0.0} : (u < 0.8 ? Vec{1.0} : Vec{3.0});
    };
    const int trials = 20000;
    double acc = 0.0, acc_sq = 0.0;
    for (int t = 0; t < trials; ++t) {
      std::vector<Vec> xs(4), ys(4);
      for (auto& v : xs) v = draw();
      for (auto& v : ys) v = draw();
      double est = ged_population_estimate(xs, ys, dist);
      acc += est;
      acc_sq += est * est;
    }
    double m = acc / trials;
    double se = std::sqrt((acc_sq / trials - m * m) / trials);
    CHECK(std::fabs(m - exact) < 3.0 * se);
  }

  SUBCASE("batch size preconditions") {
    auto xs = random_batch(2, 1, 9);
    std::vector<Vec> one = {{0.0}};
    auto dist = [](const Vec& a, const Vec& b) { return std::fabs(a[0] - b[0]); };
    CHECK_THROWS_AS(ged_population_estimate(xs, one, dist), std::invalid_argument);
  }
}

TEST_CASE("MMD and GED agree through kernel_to_distance for constant-diagonal kernels") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto xs = random_batch(5, 2, 100 + seed);
    auto ys = random_batch(6, 2, 200 + seed);
    double mmd = mmd2_ustat(xs, ys, gaussian_kernel);
    auto dist = [](const Vec& a, const Vec& b) {
      return kernel_to_distance<Vec>(gaussian_kernel, a, b);
    };
    double ged_est = ged_population_estimate(xs, ys, dist);
    CHECK(std::fabs(mmd - ged_est) < 1e-12);
  }
}

TEST_CASE("energy_score") {
  auto dist = [](const Vec& a, const Vec& b) { return std::fabs(a[0] - b[0]); };

  SUBCASE("deterministic model reduces to twice the attract term") {
    Vec x = {2.0}, y = {0.5};
    CHECK(energy_score(x, y, y, dist) == doctest::Approx(2.0 * 1.5));
  }

  SUBCASE("perfect sample scores zero") {
    Vec x = {1.0};
    CHECK(energy_score(x, x, x, dist) == 0.0);
  }

  SUBCASE("Monte Carlo mean matches the quadrature value for a Gaussian model") {
    const double x = 0.7, mu = 0.2, sigma = 1.3;
    double expect = 2.0 * oracle::expected_abs_gap(x, mu, sigma);
    // y - y' ~ N(0, 2 sigma^2)
    expect -= oracle::expected_abs_gap(0.0, 0.0, sigma * std::sqrt(2.0));

    RngStream rng(10);
    const int n = 1000000;
    double acc = 0.0, acc_sq = 0.0;
    for (int i = 0; i < n; ++i) {
      double y = mu + sigma * rng.normal();
      double yp = mu + sigma * rng.normal();
      double s = energy_score(Vec{x}, Vec{y}, Vec{yp}, dist);
      acc += s;
      acc_sq += s * s;
    }
    double m = acc / n;
    double se = std::sqrt((acc_sq / n - m * m) / n);
    CHECK(std::fabs(m - expect) < 3.0 * se);
  }
}

TEST_CASE("energy score with Euclidean distance is minimized at the data distribution") {
  // Expected score of model N(mu, sigma) against data N(0,1), evaluated by
  // quadrature: 2 E|x-y| - E|y-y'| with x-y ~ N(-mu, 1+sigma^2),
  // y-y' ~ N(0, 2 sigma^2). The grid minimum must sit at (0, 1).
  auto expected_score = [](double mu, double sigma) {
    double s_xy = std::sqrt(1.0 + sigma * sigma);
    double attract = oracle::expected_abs_gap(0.0, -mu, s_xy);
    double repulse = oracle::expected_abs_gap(0.0, 0.0, sigma * std::sqrt(2.0));
    return 2.0 * attract - repulse;
  };
  double best = 1e100;
  double best_mu = -10, best_sigma = -10;
  for (double mu = -0.4; mu <= 0.4001; mu += 0.2) {
    for (double sigma = 0.6; sigma <= 1.4001; sigma += 0.2) {
      double s = expected_score(mu, sigma);
      if (s < best) {
        best = s;
        best_mu = mu;
        best_sigma = sigma;
      }
    }
  }
  CHECK(best_mu == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(best_sigma == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("minibatch_ged_loss") {
  auto dist = [](const Vec& a, const Vec& b) { return std::fabs(a[0] - b[0]); };

  SUBCASE("single example without repulsive term") {
    GedLossConfig<Vec> cfg;
    cfg.repulsive = false;
    cfg.distance = dist;
    double loss = minibatch_ged_loss<Vec>({{1.0}}, {{3.0}}, {{99.0}}, cfg);
    CHECK(loss == doctest::Approx(4.0));
  }

  SUBCASE("repulsive term vanishes when both draws coincide") {
    GedLossConfig<Vec> on, off;
    on.repulsive = true;
    off.repulsive = false;
    on.distance = off.distance = dist;
    std::vector<Vec> xs = {{0.0}, {1.0}}, ys = {{2.0}, {0.5}};
    CHECK(minibatch_ged_loss(xs, ys, ys, on) ==
          doctest::Approx(minibatch_ged_loss(xs, ys, ys, off)));
  }

  SUBCASE("length mismatch is rejected") {
    GedLossConfig<Vec> cfg;
    cfg.distance = dist;
    std::vector<Vec> xs = {{0.0}}, ys = {{1.0}, {2.0}};
    CHECK_THROWS_AS(minibatch_ged_loss(xs, ys, ys, cfg), std::invalid_argument);
  }

  SUBCASE("Monte Carlo mean matches the enumerated expectation") {
    // p on 3 points, q on 2 points, both scalar.
    oracle::Discrete p, q;
    p.support = {{-1.0}, {0.0}, {2.0}};
    p.probs = {0.25, 0.5, 0.25};
    q.support = {{0.0}, {1.0}};
    q.probs = {0.6, 0.4};
    auto d = [](const Vec& a, const Vec& b) { return std::fabs(a[0] - b[0]); };
    const std::size_t batch = 3;
    double exact_per_example = 2.0 * oracle::enumerate_pair_expect(p, q, d) -
                               oracle::enumerate_pair_expect(q, q, d);
    double exact = static_cast<double>(batch) * exact_per_example;

    GedLossConfig<Vec> cfg;
    cfg.repulsive = true;
    cfg.distance = d;
    RngStream rng(11);
    auto draw = [&](const oracle::Discrete& dd) {
      double u = rng.uniform();
      double cum = 0.0;
      for (std::size_t i = 0; i < dd.probs.size(); ++i) {
        cum += dd.probs[i];
        if (u < cum) return dd.support[i];
      }
      return dd.support.back();
    };
    const int trials = 100000;
    double acc = 0.0, acc_sq = 0.0;
    for (int t = 0; t < trials; ++t) {
      std::vector<Vec> xs(batch), ys(batch), yps(batch);
      for (std::size_t i = 0; i < batch; ++i) {
        xs[i] = draw(p);
        ys[i] = draw(q);
        yps[i] = draw(q);
      }
      double est = minibatch_ged_loss(xs, ys, yps, cfg);
      acc += est;
      acc_sq += est * est;
    }
    double m = acc / trials;
    double se = std::sqrt((acc_sq / trials - m * m) / trials);
    CHECK(std::fabs(m - exact) < 3.0 * se);
  }
}

TEST_CASE("GedLossConfig::checked validates the metric handle") {
  auto xs = random_batch(8, 2, 12);
  CHECK_NOTHROW(GedLossConfig<Vec>::checked(euclid, true, xs));

  auto asym = [](const Vec& a, const Vec& b) { return a[0] - b[0] > 0 ? 1.0 : 0.5; };
  CHECK_THROWS_AS(GedLossConfig<Vec>::checked(asym, true, xs), std::invalid_argument);

  auto negative = [](const Vec&, const Vec&) { return -1.0; };
  CHECK_THROWS_AS(GedLossConfig<Vec>::checked(negative, true, xs), std::invalid_argument);
}

TEST_CASE("power_distance") {
  Vec x = {3.0, 4.0}, o = {0.0, 0.0};
  CHECK(power_distance(x, x, 2.0, 1.0) == 0.0);
  CHECK(power_distance(x, o, 2.0, 1.0) == doctest::Approx(5.0));

  RngStream rng(13);
  Vec a(5), b(5);
  for (std::size_t i = 0; i < 5; ++i) {
    a[i] = rng.normal();
    b[i] = rng.normal();
  }
  double want = 0.0;
  for (std::size_t i = 0; i < 5; ++i) want += std::fabs(a[i] - b[i]);
  CHECK(power_distance(a, b, 1.0, 1.0) == doctest::Approx(want).epsilon(1e-13));

  CHECK_THROWS_AS(power_distance(a, b, 3.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(power_distance(a, b, 2.0, 2.5), std::invalid_argument);
  CHECK_NOTHROW(power_distance(a, b, 3.0, 1.0, /*allow_improper=*/true));
}

TEST_CASE("graph loss nodes decompose exactly and match the plain loss") {
  RngStream rng(14);
  std::vector<Tensor> xs, ys, yps;
  std::vector<Vec> pxs, pys, pyps;
  for (int i = 0; i < 3; ++i) {
    Vec x(4), y(4), yp(4);
    for (int j = 0; j < 4; ++j) {
      x[j] = rng.normal();
      y[j] = rng.normal();
      yp[j] = rng.normal();
    }
    xs.push_back(Tensor::vector(x));
    ys.push_back(Tensor::vector(y));
    yps.push_back(Tensor::vector(yp));
    pxs.push_back(x);
    pys.push_back(y);
    pyps.push_back(yp);
  }
  auto nodes = minibatch_ged_loss_node(xs, ys, yps, euclidean_distance_node, true);
  CHECK(nodes.loss.item() == nodes.attract.item() - nodes.repulse.item());

  GedLossConfig<Vec> cfg;
  cfg.repulsive = true;
  cfg.distance = euclid;
  double plain = minibatch_ged_loss(pxs, pys, pyps, cfg);
  CHECK(nodes.loss.item() == doctest::Approx(plain).epsilon(1e-10));

  auto off = minibatch_ged_loss_node(xs, ys, yps, euclidean_distance_node, false);
  CHECK(off.repulse.item() == 0.0);
  CHECK(off.loss.item() == off.attract.item());
}
