#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "depbench/baselines.hpp"
#include "depbench/rng.hpp"

using namespace depbench;
using core::Sample;

namespace {

Sample independent_uniform(int n, std::uint64_t seed) {
  rng::Xoshiro256 gen(seed);
  std::vector<double> xs(n), ys(n);
  for (int i = 0; i < n; ++i) {
    xs[i] = gen.next_double();
    ys[i] = gen.next_double();
  }
  return Sample(std::move(xs), std::move(ys));
}

Sample gaussian_pair(int n, double rho, std::uint64_t seed) {
  rng::Xoshiro256 gen(seed);
  std::vector<double> xs(n), ys(n);
  for (int i = 0; i < n; ++i) {
    double z1 = gen.normal(), z2 = gen.normal();
    xs[i] = z1;
    ys[i] = rho * z1 + std::sqrt(1 - rho * rho) * z2;
  }
  return Sample(std::move(xs), std::move(ys));
}

Sample curve(int n, std::uint64_t seed, double (*f)(double)) {
  rng::Xoshiro256 gen(seed);
  std::vector<double> xs(n), ys(n);
  for (int i = 0; i < n; ++i) {
    xs[i] = gen.uniform(-1.0, 1.0);
    ys[i] = f(xs[i]);
  }
  return Sample(std::move(xs), std::move(ys));
}

}  // namespace

TEST_CASE("pearson basics") {
  Sample up({0, 1, 2, 3}, {0, 1, 2, 3});
  CHECK(baselines::pearson(up) == Catch::Approx(1.0));
  Sample down({0, 1, 2, 3}, {3, 2, 1, 0});
  CHECK(baselines::pearson(down) == Catch::Approx(-1.0));
  Sample parab({-2, -1, 0, 1, 2}, {4, 1, 0, 1, 4});
  CHECK(baselines::pearson(parab) == Catch::Approx(0.0).margin(1e-14));
  Sample constant({0, 1, 2, 3}, {5, 5, 5, 5});
  CHECK_THROWS_AS(baselines::pearson(constant), Error);
}

TEST_CASE("pearson matches the direct formula on a fixed dataset") {
  std::vector<double> x{1, 2, 4, 5, 8}, y{3, 1, 4, 2, 6};
  double mx = 4.0, my = 3.2;
  double sxy = 0, sxx = 0, syy = 0;
  for (int i = 0; i < 5; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  Sample s(x, y);
  CHECK(baselines::pearson(s) ==
        Catch::Approx(sxy / std::sqrt(sxx * syy)).epsilon(1e-14));
}

TEST_CASE("kraskov estimate is near zero on independent uniforms") {
  double acc = 0.0;
  const int seeds = 50;
  for (int i = 0; i < seeds; ++i)
    acc += baselines::kraskov_mi(independent_uniform(2000, 100 + i), 6, i);
  CHECK(std::abs(acc / seeds) < 0.05);
}

TEST_CASE("kraskov recovers the Gaussian closed form") {
  // -0.5 log(1 - rho^2), rho = 0.6
  double expected = -0.5 * std::log(1 - 0.36);
  double acc = 0.0;
  const int seeds = 5;
  for (int i = 0; i < seeds; ++i)
    acc += baselines::kraskov_mi(gaussian_pair(5000, 0.6, 313 + i), 6, i);
  CHECK(acc / seeds == Catch::Approx(expected).margin(0.05));
}

TEST_CASE("kraskov estimate grows with n on deterministic data") {
  auto near_identity = [](int n, std::uint64_t seed) {
    rng::Xoshiro256 gen(seed);
    std::vector<double> xs(n), ys(n);
    for (int i = 0; i < n; ++i) {
      xs[i] = gen.next_double();
      ys[i] = xs[i];
    }
    return Sample(std::move(xs), std::move(ys));
  };
  double small = baselines::kraskov_mi(near_identity(200, 5), 6, 1);
  double large = baselines::kraskov_mi(near_identity(2000, 5), 6, 1);
  CHECK(large > small);
  CHECK(large > 2.0);  // far beyond any smooth-density value
}

TEST_CASE("kraskov rejects invalid k") {
  CHECK_THROWS_AS(baselines::kraskov_mi(independent_uniform(10, 1), 10, 0), Error);
  CHECK_THROWS_AS(baselines::kraskov_mi(independent_uniform(10, 1), 0, 0), Error);
}

TEST_CASE("linfoot transform") {
  CHECK(baselines::linfoot(0.0) == 0.0);
  CHECK(baselines::linfoot(-0.3) == 0.0);  // negatives clamp first
  CHECK(baselines::linfoot(0.5 * std::log(2.0)) == Catch::Approx(0.5).epsilon(1e-12));
  CHECK(baselines::linfoot(std::log(2.0)) == Catch::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("dcor basics") {
  Sample up({0, 0.2, 0.5, 0.7, 1.0, 1.3}, {0, 0.2, 0.5, 0.7, 1.0, 1.3});
  CHECK(baselines::dcor(up) == Catch::Approx(1.0).epsilon(1e-12));
  Sample constant({0, 1, 2, 3}, {5, 5, 5, 5});
  CHECK(baselines::dcor(constant) == 0.0);
  CHECK_THROWS_AS(baselines::dcor(Sample({1, 2}, {3, 4})), Error);
}

TEST_CASE("dcor matches a direct double-centering computation") {
  std::vector<double> x{0.1, 0.9, 0.4, 0.7, 0.2, 0.6};
  std::vector<double> y{0.8, 0.3, 0.9, 0.1, 0.5, 0.45};
  int n = 6;
  auto center = [&](const std::vector<double>& v) {
    std::vector<std::vector<double>> a(n, std::vector<double>(n));
    std::vector<double> rm(n, 0);
    double gm = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a[i][j] = std::abs(v[i] - v[j]);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) rm[i] += a[i][j] / n;
      gm += rm[i] / n;
    }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a[i][j] += gm - rm[i] - rm[j];
    return a;
  };
  auto a = center(x), b = center(y);
  double vxy = 0, vxx = 0, vyy = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      vxy += a[i][j] * b[i][j];
      vxx += a[i][j] * a[i][j];
      vyy += b[i][j] * b[i][j];
    }
  double expected = std::sqrt(vxy / std::sqrt(vxx * vyy));
  CHECK(baselines::dcor(Sample(x, y)) == Catch::Approx(expected).epsilon(1e-12));
}

TEST_CASE("ace finds the identity transform") {
  rng::Xoshiro256 gen(2);
  std::vector<double> xs(1000), ys(1000);
  for (int i = 0; i < 1000; ++i) {
    xs[i] = gen.next_double();
    ys[i] = xs[i];
  }
  auto r = baselines::maximal_correlation_ace(Sample(std::move(xs), std::move(ys)));
  CHECK(r.value >= 0.999);
}

TEST_CASE("ace recovers functional dependence of a parabola") {
  auto s = curve(1000, 11, [](double x) { return x * x; });
  auto r = baselines::maximal_correlation_ace(s);
  CHECK(r.value >= 0.98);
}

TEST_CASE("ace stays low on independent data") {
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    auto r = baselines::maximal_correlation_ace(independent_uniform(1000, 900 + i));
    worst = std::max(worst, r.value);
  }
  CHECK(worst < 0.25);
}

TEST_CASE("ace needs enough support") {
  CHECK_THROWS_AS(baselines::maximal_correlation_ace(independent_uniform(10, 1)),
                  Error);
}

TEST_CASE("hsic rejects constant coordinates") {
  Sample constant({0, 1, 2, 3}, {5, 5, 5, 5});
  CHECK_THROWS_AS(baselines::hsic(constant), Error);
}

TEST_CASE("hsic matches a direct kernel computation on a fixed dataset") {
  std::vector<double> x{0.1, 0.9, 0.4, 0.7, 0.2};
  std::vector<double> y{0.8, 0.3, 0.9, 0.1, 0.5};
  int n = 5;
  auto median_dist = [&](const std::vector<double>& v) {
    std::vector<double> d;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) d.push_back(std::abs(v[i] - v[j]));
    std::sort(d.begin(), d.end());
    // type-7 interpolated median over 10 values
    return d[4] + 0.5 * (d[5] - d[4]);
  };
  double bx = median_dist(x), by = median_dist(y);
  auto kernel = [&](const std::vector<double>& v, double bw) {
    std::vector<std::vector<double>> k(n, std::vector<double>(n));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        k[i][j] = std::exp(-(v[i] - v[j]) * (v[i] - v[j]) / (2 * bw * bw));
    return k;
  };
  auto kx = kernel(x, bx), ky = kernel(y, by);
  // HKH via explicit centering matrix
  std::vector<std::vector<double>> h(n, std::vector<double>(n, -1.0 / n));
  for (int i = 0; i < n; ++i) h[i][i] += 1.0;
  auto mul = [&](const std::vector<std::vector<double>>& a,
                 const std::vector<std::vector<double>>& b) {
    std::vector<std::vector<double>> c(n, std::vector<double>(n, 0));
    for (int i = 0; i < n; ++i)
      for (int k2 = 0; k2 < n; ++k2)
        for (int j = 0; j < n; ++j) c[i][j] += a[i][k2] * b[k2][j];
    return c;
  };
  auto hkh = mul(mul(h, kx), h);
  double trace = 0;
  auto prod = mul(hkh, ky);
  for (int i = 0; i < n; ++i) trace += prod[i][i];
  double expected = trace / (static_cast<double>(n) * n);
  CHECK(baselines::hsic(Sample(x, y)) == Catch::Approx(expected).epsilon(1e-10));
}

TEST_CASE("hsic shrinks like 1/n on independent data") {
  auto mean_hsic = [&](int n) {
    double acc = 0;
    for (int i = 0; i < 20; ++i)
      acc += baselines::hsic(independent_uniform(n, 70 + i));
    return acc / 20;
  };
  double small = mean_hsic(100);
  double large = mean_hsic(400);
  double ratio = small / large;
  CHECK(ratio > 2.0);
  CHECK(ratio < 8.0);
}

TEST_CASE("rdc detects a line and is reproducible") {
  double acc = 0.0, lo = 1.0;
  for (int i = 0; i < 50; ++i) {
    rng::Xoshiro256 gen(40 + i);
    std::vector<double> xs(500), ys(500);
    for (int j = 0; j < 500; ++j) {
      xs[j] = gen.next_double();
      ys[j] = xs[j];
    }
    Sample s(std::move(xs), std::move(ys));
    double v = baselines::rdc(s, {}, 1000 + i);
    acc += v;
    lo = std::min(lo, v);
  }
  CHECK(acc / 50 >= 0.95);
  CHECK(lo >= 0.9);

  auto s = independent_uniform(200, 3);
  CHECK(baselines::rdc(s, {}, 42) == baselines::rdc(s, {}, 42));
}

TEST_CASE("rdc stays low on independent data") {
  double acc = 0.0;
  for (int i = 0; i < 50; ++i)
    acc += baselines::rdc(independent_uniform(500, 600 + i), {}, i);
  CHECK(acc / 50 < 0.35);
}

TEST_CASE("rdc needs more observations than features") {
  CHECK_THROWS_AS(baselines::rdc(independent_uniform(8, 1), {}, 0), Error);
}

TEST_CASE("statistics are invariant under increasing affine maps") {
  auto s = independent_uniform(120, 5);
  std::vector<double> tx(s.xs), ty(s.ys);
  for (auto& v : tx) v = 3.0 * v + 10.0;
  for (auto& v : ty) v = 0.25 * v - 2.0;
  Sample t(std::move(tx), std::move(ty));

  CHECK(baselines::pearson(t) == Catch::Approx(baselines::pearson(s)).margin(1e-12));
  CHECK(baselines::dcor(t) == Catch::Approx(baselines::dcor(s)).margin(1e-9));
  CHECK(baselines::hsic(t) == Catch::Approx(baselines::hsic(s)).margin(1e-9));
  CHECK(baselines::rdc(t, {}, 9) == Catch::Approx(baselines::rdc(s, {}, 9)).margin(1e-9));
  CHECK(baselines::maximal_correlation_ace(t).value ==
        Catch::Approx(baselines::maximal_correlation_ace(s).value).margin(1e-9));
}

TEST_CASE("rank-based statistics tolerate monotone transforms") {
  auto s = gaussian_pair(400, 0.5, 77);
  std::vector<double> tx(s.xs), ty(s.ys);
  for (auto& v : tx) v = std::exp(v);
  for (auto& v : ty) v = v * v * v;
  Sample t(std::move(tx), std::move(ty));

  // copula/rank pipelines: identical ranks give identical values
  CHECK(baselines::rdc(t, {}, 4) == Catch::Approx(baselines::rdc(s, {}, 4)).margin(1e-12));
  CHECK(baselines::maximal_correlation_ace(t).value ==
        Catch::Approx(baselines::maximal_correlation_ace(s).value).margin(0.05));
  // mutual information is a population invariant; estimates agree loosely
  double a = baselines::kraskov_mi(s, 6, 2);
  double b = baselines::kraskov_mi(t, 6, 2);
  CHECK(a == Catch::Approx(b).margin(0.1));
}

TEST_CASE("statistics are symmetric under coordinate swap") {
  auto s = gaussian_pair(300, 0.4, 123);
  Sample swapped(s.ys, s.xs);
  CHECK(baselines::pearson(swapped) == Catch::Approx(baselines::pearson(s)).margin(1e-12));
  CHECK(baselines::dcor(swapped) == Catch::Approx(baselines::dcor(s)).margin(1e-10));
  CHECK(baselines::hsic(swapped) == Catch::Approx(baselines::hsic(s)).margin(1e-10));
  CHECK(baselines::kraskov_mi(swapped, 6, 8) ==
        Catch::Approx(baselines::kraskov_mi(s, 6, 8)).margin(0.05));
}
