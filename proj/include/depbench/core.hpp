#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "depbench/errors.hpp"
#include "depbench/rng.hpp"
#include "depbench/util.hpp"

namespace depbench::core {

// A paired bivariate sample. Values are validated once at construction;
// everything downstream may assume finiteness.
struct Sample {
  std::vector<double> xs;
  std::vector<double> ys;

  Sample(std::vector<double> x, std::vector<double> y)
      : xs(std::move(x)), ys(std::move(y)) {
    if (xs.size() != ys.size() || xs.size() < 2)
      throw Error(Error::Kind::invalid_sample,
                  "sample needs paired x/y of equal length >= 2");
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (!std::isfinite(xs[i]) || !std::isfinite(ys[i]))
        throw Error(Error::Kind::invalid_sample,
                    "sample contains a non-finite value");
    }
  }

  int n() const { return static_cast<int>(xs.size()); }
};

enum class TiePolicy { stable_index, jitter };

// Sorting permutations of a sample. order[r] = index of the r-th smallest
// value; rank_of is its inverse. Grid statistics see data only through these.
struct RankedSample {
  std::vector<int> x_order;
  std::vector<int> y_order;
  std::vector<int> x_rank_of;
  std::vector<int> y_rank_of;
  // True where a cut is allowed without splitting a run of equal values
  // (positions 0..n, in rank space; always true under jitter).
  std::vector<char> x_cut_allowed;
  std::vector<char> y_cut_allowed;

  int n() const { return static_cast<int>(x_order.size()); }
};

namespace detail {

inline std::vector<int> argsort(const std::vector<double>& v) {
  std::vector<int> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return v[a] < v[b]; });
  return order;
}

inline std::vector<double> jittered(const std::vector<double>& v,
                                    rng::Xoshiro256& gen) {
  auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  double range = *hi - *lo;
  double scale = 1e-9 * (range > 0.0 ? range : 1.0);
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    out[i] = v[i] + scale * gen.next_double();
  return out;
}

inline std::vector<char> cut_mask(const std::vector<double>& v,
                                  const std::vector<int>& order) {
  std::size_t n = v.size();
  std::vector<char> allowed(n + 1, 1);
  for (std::size_t r = 1; r < n; ++r)
    if (v[order[r - 1]] == v[order[r]]) allowed[r] = 0;
  return allowed;
}

}  // namespace detail

inline RankedSample rank_transform(const Sample& sample,
                                   TiePolicy policy = TiePolicy::stable_index,
                                   std::uint64_t jitter_seed = 0) {
  RankedSample r;
  if (policy == TiePolicy::jitter) {
    rng::Xoshiro256 gx(rng::derive_seed(jitter_seed, "jitter-x"));
    rng::Xoshiro256 gy(rng::derive_seed(jitter_seed, "jitter-y"));
    auto jx = detail::jittered(sample.xs, gx);
    auto jy = detail::jittered(sample.ys, gy);
    r.x_order = detail::argsort(jx);
    r.y_order = detail::argsort(jy);
    r.x_cut_allowed.assign(sample.xs.size() + 1, 1);
    r.y_cut_allowed.assign(sample.ys.size() + 1, 1);
  } else {
    r.x_order = detail::argsort(sample.xs);
    r.y_order = detail::argsort(sample.ys);
    r.x_cut_allowed = detail::cut_mask(sample.xs, r.x_order);
    r.y_cut_allowed = detail::cut_mask(sample.ys, r.y_order);
  }
  int n = static_cast<int>(sample.xs.size());
  r.x_rank_of.assign(n, 0);
  r.y_rank_of.assign(n, 0);
  for (int rank = 0; rank < n; ++rank) {
    r.x_rank_of[r.x_order[rank]] = rank;
    r.y_rank_of[r.y_order[rank]] = rank;
  }
  return r;
}

// Cut positions of an equipartition of n ranks into `parts` cells:
// boundaries at floor(i*n/parts), interior cuts only. Cell sizes differ by
// at most one.
inline std::vector<int> equipartition(int n, int parts) {
  if (parts < 2 || parts > n)
    throw Error(Error::Kind::invalid_resolution,
                "equipartition needs 2 <= parts <= n");
  std::vector<int> cuts;
  cuts.reserve(parts - 1);
  for (int i = 1; i < parts; ++i)
    cuts.push_back(static_cast<int>((static_cast<std::int64_t>(i) * n) / parts));
  return cuts;
}

// A grid in rank space: x_cuts (k-1 strictly increasing interior positions)
// make k columns, y_cuts make rows.
struct GridPartition {
  std::vector<int> x_cuts;
  std::vector<int> y_cuts;

  GridPartition(std::vector<int> xc, std::vector<int> yc, int n)
      : x_cuts(std::move(xc)), y_cuts(std::move(yc)) {
    validate(x_cuts, n);
    validate(y_cuts, n);
  }

  int columns() const { return static_cast<int>(x_cuts.size()) + 1; }
  int rows() const { return static_cast<int>(y_cuts.size()) + 1; }

 private:
  static void validate(const std::vector<int>& cuts, int n) {
    if (cuts.empty())
      throw Error(Error::Kind::invalid_resolution,
                  "grid needs at least 2 parts per axis");
    int prev = 0;
    for (int c : cuts) {
      if (c <= prev || c >= n)
        throw Error(Error::Kind::invalid_resolution,
                    "grid cuts must be strictly increasing inside (0,n)");
      prev = c;
    }
  }
};

struct ContingencyTable {
  int k = 0;  // columns
  int l = 0;  // rows
  int total = 0;
  std::vector<int> counts;  // row-major: counts[row * k + col]

  int at(int row, int col) const { return counts[row * k + col]; }
};

inline int cell_of(const std::vector<int>& cuts, int rank) {
  // index of the first cut > rank
  return static_cast<int>(
      std::upper_bound(cuts.begin(), cuts.end(), rank) - cuts.begin());
}

inline ContingencyTable contingency(const RankedSample& ranked,
                                    const GridPartition& grid) {
  ContingencyTable t;
  t.k = grid.columns();
  t.l = grid.rows();
  t.total = ranked.n();
  t.counts.assign(static_cast<std::size_t>(t.k) * t.l, 0);
  for (int i = 0; i < ranked.n(); ++i) {
    int col = cell_of(grid.x_cuts, ranked.x_rank_of[i]);
    int row = cell_of(grid.y_cuts, ranked.y_rank_of[i]);
    ++t.counts[row * t.k + col];
  }
  return t;
}

// Mutual information of the empirical cell distribution, in nats, with the
// 0 log 0 = 0 convention. Computed in integer-count space:
//   n*I = sum_cells m log m - sum_cols m log m - sum_rows m log m + n log n
inline double mutual_information(const ContingencyTable& t) {
  if (t.total < 1)
    throw Error(Error::Kind::invalid_sample, "empty contingency table");
  std::vector<int> row_sum(t.l, 0), col_sum(t.k, 0);
  double cells = 0.0;
  for (int r = 0; r < t.l; ++r) {
    for (int c = 0; c < t.k; ++c) {
      int m = t.at(r, c);
      row_sum[r] += m;
      col_sum[c] += m;
      cells += util::xlogx(static_cast<double>(m));
    }
  }
  double rows = 0.0, cols = 0.0;
  for (int m : row_sum) rows += util::xlogx(static_cast<double>(m));
  for (int m : col_sum) cols += util::xlogx(static_cast<double>(m));
  double n = static_cast<double>(t.total);
  double mi = (cells - rows - cols + util::xlogx(n)) / n;
  return mi < 0.0 ? 0.0 : mi;
}

}  // namespace depbench::core
