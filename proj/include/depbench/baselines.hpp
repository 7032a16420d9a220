#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "depbench/core.hpp"
#include "depbench/errors.hpp"
#include "depbench/rng.hpp"
#include "depbench/util.hpp"

namespace depbench::baselines {

struct AceParams {
  int max_iters = 100;
  double tol = 1e-6;
  double smoother_span = 0.1;  // fraction of n used as smoothing window
};

struct HsicParams {
  double bandwidth_quantile = 0.5;  // quantile of pairwise distances per axis
};

struct RdcParams {
  int num_features = 10;
  double scale = 0.0;  // 0 = 1 / median pairwise distance per axis
  double ridge = 1e-9;
};

struct BaselineParams {
  int kraskov_k = 6;
  AceParams ace;
  HsicParams hsic;
  RdcParams rdc;
};

inline double pearson(const core::Sample& sample) {
  return util::correlation(sample.xs, sample.ys);
}

namespace detail {

inline double digamma(double x) {
  // Recurrence into the asymptotic regime, then the standard series.
  double result = 0.0;
  while (x < 6.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  double inv = 1.0 / x, inv2 = inv * inv;
  result += std::log(x) - 0.5 * inv -
            inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 / 252.0));
  return result;
}

// Count of points j != i with |v[j] - v[i]| < eps, via the sorted copy.
inline int strict_window_count(const std::vector<double>& sorted, double center,
                               double eps) {
  auto lo = std::lower_bound(sorted.begin(), sorted.end(), center - eps);
  auto hi = std::lower_bound(sorted.begin(), sorted.end(), center + eps);
  // exclude lower boundary values exactly at distance eps
  while (lo != hi && !(*lo > center - eps)) ++lo;
  return static_cast<int>(hi - lo) - 1;
}

}  // namespace detail

// Kraskov-Stoegbauer-Grassberger estimator #1 (max-norm neighborhoods,
// digamma form). Ties are fatal to the neighbor counts, so a seeded jitter
// is always applied.
inline double kraskov_mi(const core::Sample& sample, int k,
                         std::uint64_t seed = 0) {
  int n = sample.n();
  if (k < 1 || k >= n)
    throw Error(Error::Kind::invalid_sample, "kraskov needs 1 <= k < n");
  rng::Xoshiro256 gx(rng::derive_seed(seed, "kraskov-x"));
  rng::Xoshiro256 gy(rng::derive_seed(seed, "kraskov-y"));
  std::vector<double> x = core::detail::jittered(sample.xs, gx);
  std::vector<double> y = core::detail::jittered(sample.ys, gy);

  std::vector<double> xs = x, ys = y;
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());

  // Sort points by x so the k-th neighbor search can expand a window
  // instead of scanning all pairs.
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return x[a] < x[b]; });
  std::vector<double> sx(n), sy(n);
  for (int i = 0; i < n; ++i) {
    sx[i] = x[order[i]];
    sy[i] = y[order[i]];
  }

  double acc = 0.0;
  std::vector<double> dist;
  dist.reserve(2 * k + 8);
  for (int i = 0; i < n; ++i) {
    // max-norm distance to the k-th nearest neighbor
    dist.clear();
    int left = i - 1, right = i + 1;
    double kth = std::numeric_limits<double>::infinity();
    // expand outward in x; stop once the x-gap alone exceeds the current
    // k-th best, since max-norm distance >= |dx|
    std::vector<double> best;
    best.reserve(k + 1);
    auto push = [&](double d) {
      best.insert(std::upper_bound(best.begin(), best.end(), d), d);
      if (static_cast<int>(best.size()) > k) best.pop_back();
      if (static_cast<int>(best.size()) == k) kth = best.back();
    };
    while (left >= 0 || right < n) {
      double dl = left >= 0 ? sx[i] - sx[left] : std::numeric_limits<double>::infinity();
      double dr = right < n ? sx[right] - sx[i] : std::numeric_limits<double>::infinity();
      if (dl == std::numeric_limits<double>::infinity() &&
          dr == std::numeric_limits<double>::infinity())
        break;
      if (dl <= dr) {
        if (dl > kth && static_cast<int>(best.size()) == k) {
          left = -1;
          continue;
        }
        push(std::max(dl, std::abs(sy[i] - sy[left])));
        --left;
      } else {
        if (dr > kth && static_cast<int>(best.size()) == k) {
          right = n;
          continue;
        }
        push(std::max(dr, std::abs(sy[i] - sy[right])));
        ++right;
      }
      if (static_cast<int>(best.size()) == k && dl > kth && dr > kth) break;
    }
    double eps = best.back();
    int nx = detail::strict_window_count(xs, sx[i], eps);
    int ny = detail::strict_window_count(ys, sy[i], eps);
    acc += detail::digamma(nx + 1.0) + detail::digamma(ny + 1.0);
  }
  return detail::digamma(static_cast<double>(k)) +
         detail::digamma(static_cast<double>(n)) -
         acc / static_cast<double>(n);
}

// Squared Linfoot correlation: L^2 = 1 - 2^(-2 I_bits) = 1 - exp(-2 I_nats).
inline double linfoot(double mi_nats) {
  if (mi_nats < 0.0) mi_nats = 0.0;
  return 1.0 - std::exp(-2.0 * mi_nats);
}

// Distance correlation, O(n^2) double-centered estimator.
inline double dcor(const core::Sample& sample) {
  int n = sample.n();
  if (n < 4)
    throw Error(Error::Kind::invalid_sample, "dcor needs n >= 4");
  auto centered = [n](const std::vector<double>& v) {
    std::vector<double> a(static_cast<std::size_t>(n) * n);
    std::vector<double> row_mean(n, 0.0);
    double grand = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        double d = std::abs(v[i] - v[j]);
        a[static_cast<std::size_t>(i) * n + j] = d;
        row_mean[i] += d;
      }
      row_mean[i] /= n;
      grand += row_mean[i];
    }
    grand /= n;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        a[static_cast<std::size_t>(i) * n + j] +=
            grand - row_mean[i] - row_mean[j];
    return a;
  };
  auto a = centered(sample.xs);
  auto b = centered(sample.ys);
  double vxy = 0.0, vxx = 0.0, vyy = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    vxy += a[i] * b[i];
    vxx += a[i] * a[i];
    vyy += b[i] * b[i];
  }
  if (vxx <= 0.0 || vyy <= 0.0) return 0.0;
  double r2 = vxy / std::sqrt(vxx * vyy);
  return r2 > 0.0 ? std::sqrt(r2) : 0.0;
}

struct AceResult {
  double value = 0.0;
  bool converged = false;
  int iterations = 0;
};

namespace detail {

// k-nearest-rank local mean: smooth[i] = mean of values whose conditioning
// coordinate rank falls in a window of width w centered at i (clipped).
inline std::vector<double> knn_smooth(const std::vector<double>& values_by_rank,
                                      int window) {
  int n = static_cast<int>(values_by_rank.size());
  if (window < 1) window = 1;
  if (window > n) window = n;
  std::vector<double> prefix(n + 1, 0.0);
  for (int i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + values_by_rank[i];
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) {
    int lo = i - window / 2;
    int hi = lo + window;
    if (lo < 0) {
      lo = 0;
      hi = window;
    }
    if (hi > n) {
      hi = n;
      lo = n - window;
    }
    out[i] = (prefix[hi] - prefix[lo]) / static_cast<double>(hi - lo);
  }
  return out;
}

inline void standardize(std::vector<double>& v) {
  double m = util::mean(v);
  double sd = std::sqrt(util::variance(v));
  if (sd <= 0.0) sd = 1.0;
  for (double& x : v) x = (x - m) / sd;
}

}  // namespace detail

// Maximal correlation approximated by alternating conditional expectations
// with a k-nearest-rank mean smoother.
inline AceResult maximal_correlation_ace(const core::Sample& sample,
                                         const AceParams& params = {}) {
  int n = sample.n();
  if (n < 20)
    throw Error(Error::Kind::invalid_sample, "ACE smoother needs n >= 20");
  auto ranked = core::rank_transform(sample);
  int window = std::max(2, static_cast<int>(std::lround(params.smoother_span * n)));

  // theta lives on y (indexed by y-rank), phi on x (indexed by x-rank)
  std::vector<double> theta(n), phi(n, 0.0);
  for (int r = 0; r < n; ++r) theta[r] = sample.ys[ranked.y_order[r]];
  detail::standardize(theta);

  // rank cross-maps: y-rank of the point at x-rank r, and vice versa
  std::vector<int> yrank_at_xrank(n), xrank_at_yrank(n);
  for (int i = 0; i < n; ++i) {
    yrank_at_xrank[ranked.x_rank_of[i]] = ranked.y_rank_of[i];
    xrank_at_yrank[ranked.y_rank_of[i]] = ranked.x_rank_of[i];
  }

  AceResult result;
  double prev_corr = 0.0;
  std::vector<double> buf(n);
  for (int iter = 1; iter <= params.max_iters; ++iter) {
    // phi(x) <- E[theta(y) | x]
    for (int r = 0; r < n; ++r) buf[r] = theta[yrank_at_xrank[r]];
    phi = detail::knn_smooth(buf, window);
    detail::standardize(phi);
    // theta(y) <- E[phi(x) | y]
    for (int r = 0; r < n; ++r) buf[r] = phi[xrank_at_yrank[r]];
    theta = detail::knn_smooth(buf, window);
    detail::standardize(theta);

    double num = 0.0;
    for (int r = 0; r < n; ++r) num += phi[r] * theta[yrank_at_xrank[r]];
    double corr = std::abs(num / static_cast<double>(n - 1));
    result.value = std::min(corr, 1.0);
    result.iterations = iter;
    if (std::abs(corr - prev_corr) < params.tol) {
      result.converged = true;
      break;
    }
    prev_corr = corr;
  }
  return result;
}

// Biased HSIC V-statistic with Gaussian kernels; bandwidths follow the
// configured pairwise-distance quantile on each axis.
inline double hsic(const core::Sample& sample, const HsicParams& params = {}) {
  int n = sample.n();
  if (n < 4)
    throw Error(Error::Kind::invalid_sample, "hsic needs n >= 4");
  auto bandwidth = [&](const std::vector<double>& v) {
    std::vector<double> d;
    d.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) d.push_back(std::abs(v[i] - v[j]));
    double bw = util::quantile(std::move(d), params.bandwidth_quantile);
    if (bw <= 0.0)
      throw Error(Error::Kind::degenerate_kernel,
                  "zero kernel bandwidth (constant coordinate?)");
    return bw;
  };
  double bx = bandwidth(sample.xs);
  double by = bandwidth(sample.ys);

  auto kernel = [n](const std::vector<double>& v, double bw) {
    std::vector<double> m(static_cast<std::size_t>(n) * n);
    double inv = 1.0 / (2.0 * bw * bw);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double d = v[i] - v[j];
        m[static_cast<std::size_t>(i) * n + j] = std::exp(-d * d * inv);
      }
    return m;
  };
  auto center = [n](std::vector<double>& m) {
    std::vector<double> row_mean(n, 0.0);
    double grand = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) row_mean[i] += m[static_cast<std::size_t>(i) * n + j];
      row_mean[i] /= n;
      grand += row_mean[i];
    }
    grand /= n;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        m[static_cast<std::size_t>(i) * n + j] += grand - row_mean[i] - row_mean[j];
  };
  auto kx = kernel(sample.xs, bx);
  auto ky = kernel(sample.ys, by);
  center(kx);
  center(ky);
  double trace = 0.0;
  for (std::size_t i = 0; i < kx.size(); ++i) trace += kx[i] * ky[i];
  return trace / (static_cast<double>(n) * static_cast<double>(n));
}

// Randomized dependence coefficient: copula transform, random sinusoidal
// features, largest canonical correlation.
inline double rdc(const core::Sample& sample, const RdcParams& params,
                  std::uint64_t seed) {
  int n = sample.n();
  int k = params.num_features;
  if (n <= k)
    throw Error(Error::Kind::invalid_sample, "rdc needs n > num_features");
  auto ranked = core::rank_transform(sample);
  std::vector<double> u(n), v(n);
  for (int i = 0; i < n; ++i) {
    u[i] = (ranked.x_rank_of[i] + 1.0) / n;
    v[i] = (ranked.y_rank_of[i] + 1.0) / n;
  }
  auto scale_for = [&](const std::vector<double>& w) {
    if (params.scale > 0.0) return params.scale;
    std::vector<double> d;
    d.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) d.push_back(std::abs(w[i] - w[j]));
    double med = util::quantile(std::move(d), 0.5);
    return med > 0.0 ? 1.0 / med : 1.0;
  };
  double sx = scale_for(u), sy = scale_for(v);

  rng::Xoshiro256 gen(rng::derive_seed(seed, "rdc"));
  auto features = [&](const std::vector<double>& w, double s) {
    Eigen::MatrixXd f(n, k);
    for (int j = 0; j < k; ++j) {
      double wj = s * gen.normal();
      double bj = gen.uniform(0.0, 6.283185307179586);
      for (int i = 0; i < n; ++i) f(i, j) = std::sin(wj * w[i] + bj);
    }
    // center columns
    Eigen::RowVectorXd mean = f.colwise().mean();
    f.rowwise() -= mean;
    return f;
  };
  Eigen::MatrixXd fx = features(u, sx);
  Eigen::MatrixXd fy = features(v, sy);

  Eigen::MatrixXd cxx = (fx.transpose() * fx) / n;
  Eigen::MatrixXd cyy = (fy.transpose() * fy) / n;
  Eigen::MatrixXd cxy = (fx.transpose() * fy) / n;
  cxx += params.ridge * Eigen::MatrixXd::Identity(k, k);
  cyy += params.ridge * Eigen::MatrixXd::Identity(k, k);

  Eigen::MatrixXd m = cxx.llt().solve(cxy) * cyy.llt().solve(cxy.transpose());
  Eigen::VectorXcd eig = m.eigenvalues();
  double best = 0.0;
  for (int i = 0; i < eig.size(); ++i)
    best = std::max(best, eig[i].real());
  best = std::clamp(best, 0.0, 1.0);
  return std::sqrt(best);
}

}  // namespace depbench::baselines
