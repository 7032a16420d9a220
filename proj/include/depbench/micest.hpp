#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "depbench/core.hpp"
#include "depbench/errors.hpp"

namespace depbench::micest {

struct MicParams {
  double alpha = 0.6;
  int c = 5;
  std::optional<int> b_override;
  core::TiePolicy tie_policy = core::TiePolicy::stable_index;
  std::uint64_t jitter_seed = 0;

  // Maximal grid budget B(n) = floor(n^alpha), floored at 4 so the (2,2)
  // entry always exists. Samples below four points cannot host any grid.
  int budget(int n) const {
    if (n < 4)
      throw Error(Error::Kind::invalid_budget,
                  "budget undefined: need n >= 4 for a 2x2 grid");
    if (b_override) {
      if (*b_override < 4)
        throw Error(Error::Kind::invalid_budget,
                    "explicit budget must be at least 4");
      return *b_override;
    }
    if (!(alpha > 0.0) || alpha > 1.0)
      throw Error(Error::Kind::invalid_budget, "alpha must lie in (0,1]");
    int b = static_cast<int>(std::floor(std::pow(static_cast<double>(n), alpha)));
    return std::max(b, 4);
  }
};

struct MatrixEntry {
  int k = 0;  // columns
  int l = 0;  // rows
  double value = 0.0;  // normalized to [0,1]
};

// Sample equicharacteristic matrix: one entry per (k,l) with k,l >= 2 and
// k*l <= budget, ordered by (k*l, k) so reductions are deterministic.
struct EquicharMatrix {
  int budget = 0;
  std::vector<MatrixEntry> entries;

  const MatrixEntry* find(int k, int l) const {
    for (const auto& e : entries)
      if (e.k == k && e.l == l) return &e;
    return nullptr;
  }
};

struct MicResult {
  double mic_e = 0.0;
  double tic_e = 0.0;
  std::pair<int, int> argmax_grid{0, 0};
  EquicharMatrix matrix;
};

namespace detail {

// One axis-optimization problem: points live at positions 0..n-1 of the
// free axis (already sorted); row_of[pos] is the fixed-axis cell of the
// point at free-axis rank pos.
struct AxisProblem {
  int n = 0;
  int rows = 0;
  const std::vector<int>* row_of = nullptr;      // size n
  const std::vector<char>* cut_allowed = nullptr;  // size n+1
  const std::vector<double>* xlx = nullptr;        // xlogx(0..n)
  double row_marginal_xlx = 0.0;                   // sum_r xlogx(row total)
};

inline std::vector<double> xlx_table(int n) {
  std::vector<double> t(n + 1);
  t[0] = 0.0;
  for (int m = 1; m <= n; ++m)
    t[m] = static_cast<double>(m) * std::log(static_cast<double>(m));
  return t;
}

// Candidate cut positions for a target of `parts` cells on the free axis:
// boundaries of a rank-space equipartition into `parts`, snapped forward so
// no candidate splits a run of equal values.
inline std::vector<int> candidate_positions(int n, int parts,
                                            const std::vector<char>& allowed) {
  std::vector<int> cand;
  cand.reserve(parts + 1);
  for (int i = 0; i <= parts; ++i) {
    int b = static_cast<int>((static_cast<std::int64_t>(i) * n) / parts);
    while (b < n && !allowed[b]) ++b;
    if (cand.empty() || cand.back() != b) cand.push_back(b);
  }
  if (cand.back() != n) cand.push_back(n);
  return cand;
}

// Optimal-partition dynamic program. Returns, for t = 1..max_parts, the
// maximum of I over grids using exactly t columns with cuts drawn from the
// candidate set (values in nats). Entries beyond the number of candidate
// cells repeat the last achievable value: extra columns would be empty and
// empty columns never change I.
inline std::vector<double> optimize_axis(const AxisProblem& problem,
                                         int max_parts, int c) {
  if (c < 1)
    throw Error(Error::Kind::invalid_coarseness,
                "coarseness c must be a positive integer");
  if (max_parts < 1)
    throw Error(Error::Kind::invalid_resolution, "need at least one column");
  const int n = problem.n;
  const auto& row_of = *problem.row_of;
  const auto& xlx = *problem.xlx;

  std::vector<int> cand =
      candidate_positions(n, c * max_parts, *problem.cut_allowed);
  const int cells = static_cast<int>(cand.size()) - 1;

  // Per-row counts cumulated over candidate cells.
  const int rows = problem.rows;
  std::vector<int> prefix(static_cast<std::size_t>(cells + 1) * rows, 0);
  for (int cell = 0; cell < cells; ++cell) {
    int* cur = &prefix[static_cast<std::size_t>(cell + 1) * rows];
    const int* prev = &prefix[static_cast<std::size_t>(cell) * rows];
    for (int r = 0; r < rows; ++r) cur[r] = prev[r];
    for (int pos = cand[cell]; pos < cand[cell + 1]; ++pos) ++cur[row_of[pos]];
  }

  // score(s,e) = sum_r m_r log m_r - m log m for the column spanning
  // candidate cells (s, e]; I decomposes as a sum of these per column.
  std::vector<double> score(static_cast<std::size_t>(cells + 1) * (cells + 1),
                            0.0);
  for (int s = 0; s < cells; ++s) {
    const int* ps = &prefix[static_cast<std::size_t>(s) * rows];
    for (int e = s + 1; e <= cells; ++e) {
      const int* pe = &prefix[static_cast<std::size_t>(e) * rows];
      double acc = 0.0;
      for (int r = 0; r < rows; ++r) acc += xlx[pe[r] - ps[r]];
      score[static_cast<std::size_t>(s) * (cells + 1) + e] =
          acc - xlx[cand[e] - cand[s]];
    }
  }

  const int reachable = std::min(max_parts, cells);
  std::vector<double> best(cells + 1), next(cells + 1);
  for (int e = 1; e <= cells; ++e) best[e] = score[e];

  std::vector<double> out(static_cast<std::size_t>(max_parts) + 1, 0.0);
  auto to_information = [&](double f) {
    double mi = (f + xlx[n] - problem.row_marginal_xlx) /
                static_cast<double>(n);
    return mi < 0.0 ? 0.0 : mi;
  };
  out[1] = to_information(best[cells]);
  for (int t = 2; t <= reachable; ++t) {
    for (int e = t; e <= cells; ++e) {
      double m = -1e300;
      for (int s = t - 1; s < e; ++s) {
        double v = best[s] + score[static_cast<std::size_t>(s) * (cells + 1) + e];
        if (v > m) m = v;
      }
      next[e] = m;
    }
    std::swap(best, next);
    out[t] = to_information(best[cells]);
  }
  for (int t = reachable + 1; t <= max_parts; ++t) out[t] = out[reachable];
  return out;
}

// Row assignment for each free-axis position given an equipartition of the
// other axis into `parts` cells. Boundaries snap forward past runs of equal
// values: tied coordinates are never separable, so constant data yields a
// single row (and zero information) instead of an artifactual split.
inline std::vector<int> rows_by_free_rank(const core::RankedSample& ranked,
                                          bool free_axis_is_x, int parts) {
  int n = ranked.n();
  const auto& allowed =
      free_axis_is_x ? ranked.y_cut_allowed : ranked.x_cut_allowed;
  std::vector<int> cuts;
  cuts.reserve(parts - 1);
  for (int raw : core::equipartition(n, parts)) {
    int b = raw;
    while (b < n && !allowed[b]) ++b;
    if (b < n && (cuts.empty() || cuts.back() != b)) cuts.push_back(b);
  }
  std::vector<int> row_of(n);
  for (int i = 0; i < n; ++i) {
    int free_rank = free_axis_is_x ? ranked.x_rank_of[i] : ranked.y_rank_of[i];
    int fixed_rank = free_axis_is_x ? ranked.y_rank_of[i] : ranked.x_rank_of[i];
    row_of[free_rank] = core::cell_of(cuts, fixed_rank);
  }
  return row_of;
}

inline double row_marginal_xlx(const std::vector<int>& row_of, int rows,
                               const std::vector<double>& xlx) {
  std::vector<int> totals(rows, 0);
  for (int r : row_of) ++totals[r];
  double acc = 0.0;
  for (int m : totals) acc += xlx[m];
  return acc;
}

// I*(D, parts, [fixed_parts]): optimize the free axis into `parts` cells
// against an equipartition of the other axis. Result in nats.
inline double optimal_axis_information(const core::RankedSample& ranked,
                                       bool free_axis_is_x, int parts,
                                       int fixed_parts, int c,
                                       const std::vector<double>& xlx) {
  AxisProblem problem;
  problem.n = ranked.n();
  problem.rows = fixed_parts;
  auto row_of = rows_by_free_rank(ranked, free_axis_is_x, fixed_parts);
  problem.row_of = &row_of;
  problem.cut_allowed =
      free_axis_is_x ? &ranked.x_cut_allowed : &ranked.y_cut_allowed;
  problem.xlx = &xlx;
  problem.row_marginal_xlx = row_marginal_xlx(row_of, fixed_parts, xlx);
  return optimize_axis(problem, parts, c)[parts];
}

}  // namespace detail

// Values I*(D, k, [rows]) in nats for k = 2..max_k: the best k-column grids
// against the fixed row partition, with candidate cuts drawn from a
// c*max_k rank-space equipartition of the x axis.
inline std::vector<double> optimize_columns(const core::RankedSample& ranked,
                                            const std::vector<int>& y_cuts,
                                            int max_k, int c) {
  if (max_k < 2)
    throw Error(Error::Kind::invalid_resolution, "max_k must be >= 2");
  int n = ranked.n();
  auto xlx = detail::xlx_table(n);
  detail::AxisProblem problem;
  problem.n = n;
  problem.rows = static_cast<int>(y_cuts.size()) + 1;
  std::vector<int> row_of(n);
  for (int i = 0; i < n; ++i)
    row_of[ranked.x_rank_of[i]] = core::cell_of(y_cuts, ranked.y_rank_of[i]);
  problem.row_of = &row_of;
  problem.cut_allowed = &ranked.x_cut_allowed;
  problem.xlx = &xlx;
  problem.row_marginal_xlx =
      detail::row_marginal_xlx(row_of, problem.rows, xlx);
  auto all = detail::optimize_axis(problem, max_k, c);
  return std::vector<double>(all.begin() + 2, all.end());
}

namespace detail {

// Entries live in [0,1]; values a rounding error away from 1 are snapped so
// perfect dependence reports exactly 1 (and the argmax tie-break fires
// deterministically on noiseless data).
inline double normalize_entry(double value) {
  if (value < 0.0) return 0.0;
  if (std::abs(value - 1.0) <= 1e-12 || value > 1.0) return 1.0;
  return value;
}

}  // namespace detail

// The sample equicharacteristic matrix. Each (k,l) entry equipartitions the
// axis with more cells and optimizes the other; the diagonal, where the
// definition is ambiguous, takes the better of both orientations so the
// statistic is exactly symmetric under coordinate swap. Entries are
// normalized by log min(k,l) and depend only on (k,l,c) — never on the
// budget — so enlarging B adds entries without disturbing existing ones.
inline EquicharMatrix equichar_matrix(const core::Sample& sample,
                                      const MicParams& params) {
  int n = sample.n();
  int b = params.budget(n);
  auto ranked =
      core::rank_transform(sample, params.tie_policy, params.jitter_seed);
  auto xlx = detail::xlx_table(n);

  EquicharMatrix m;
  m.budget = b;
  // k <= l: equipartition y into l rows, optimize x into k columns.
  for (int l = 2; l <= std::min(b / 2, n); ++l) {
    int kmax = std::min({l, b / l, n});
    if (kmax < 2) continue;
    for (int k = 2; k <= kmax; ++k) {
      double info =
          detail::optimal_axis_information(ranked, true, k, l, params.c, xlx);
      if (k == l)
        info = std::max(info, detail::optimal_axis_information(
                                  ranked, false, l, k, params.c, xlx));
      m.entries.push_back(
          {k, l,
           detail::normalize_entry(info / std::log(static_cast<double>(k)))});
    }
  }
  // k > l: equipartition x into k columns, optimize y into l rows.
  for (int k = 3; k <= std::min(b / 2, n); ++k) {
    int lmax = std::min({k - 1, b / k, n});
    if (lmax < 2) continue;
    for (int l = 2; l <= lmax; ++l) {
      double info =
          detail::optimal_axis_information(ranked, false, l, k, params.c, xlx);
      m.entries.push_back(
          {k, l,
           detail::normalize_entry(info / std::log(static_cast<double>(l)))});
    }
  }
  std::sort(m.entries.begin(), m.entries.end(),
            [](const MatrixEntry& a, const MatrixEntry& b2) {
              if (a.k * a.l != b2.k * b2.l) return a.k * a.l < b2.k * b2.l;
              if (a.k != b2.k) return a.k < b2.k;
              return a.l < b2.l;
            });
  return m;
}

// MIC_e is the maximum of the matrix, TIC_e the sum; the argmax tie-break
// (smallest k*l, then smallest k) falls out of the entry ordering.
inline MicResult mic_result(const core::Sample& sample, const MicParams& params) {
  MicResult r;
  r.matrix = equichar_matrix(sample, params);
  double best = -1.0, sum = 0.0;
  for (const auto& e : r.matrix.entries) {
    sum += e.value;
    if (e.value > best) {
      best = e.value;
      r.argmax_grid = {e.k, e.l};
    }
  }
  r.mic_e = best;
  r.tic_e = sum;
  return r;
}

inline double mic_e(const core::Sample& sample, const MicParams& params) {
  return mic_result(sample, params).mic_e;
}

inline double tic_e(const core::Sample& sample, const MicParams& params) {
  return mic_result(sample, params).tic_e;
}

// APPROX-MIC, the classic heuristic baseline: maximizes the sample
// characteristic matrix by trying both orientations for every (k,l) —
// equipartition one axis, DP-optimize the other — and taking the larger.
inline double approx_mic(const core::Sample& sample, const MicParams& params) {
  int n = sample.n();
  int b = params.budget(n);
  auto ranked =
      core::rank_transform(sample, params.tie_policy, params.jitter_seed);
  auto xlx = detail::xlx_table(n);

  double best = 0.0;
  for (int l = 2; l <= std::min(b / 2, n); ++l) {
    int kmax = std::min(b / l, n);
    for (int k = 2; k <= kmax; ++k) {
      double via_x =
          detail::optimal_axis_information(ranked, true, k, l, params.c, xlx);
      double via_y =
          detail::optimal_axis_information(ranked, false, l, k, params.c, xlx);
      double value = detail::normalize_entry(
          std::max(via_x, via_y) /
          std::log(static_cast<double>(std::min(k, l))));
      if (value > best) best = value;
    }
  }
  return best;
}

namespace detail {

inline double enumerate_free_axis(const core::RankedSample& ranked,
                                  bool free_axis_is_x, int parts,
                                  int fixed_parts) {
  int n = ranked.n();
  auto xlx = xlx_table(n);
  auto row_of = rows_by_free_rank(ranked, free_axis_is_x, fixed_parts);
  double row_xlx = row_marginal_xlx(row_of, fixed_parts, xlx);
  const auto& allowed =
      free_axis_is_x ? ranked.x_cut_allowed : ranked.y_cut_allowed;

  std::vector<int> positions;
  for (int pos = 1; pos < n; ++pos)
    if (allowed[pos]) positions.push_back(pos);
  int m = static_cast<int>(positions.size());
  int need = parts - 1;
  if (need > m) need = m;
  if (need < 1) return 0.0;

  // Walk all (need)-subsets of cut positions in lexicographic order.
  std::vector<int> idx(need);
  for (int i = 0; i < need; ++i) idx[i] = i;
  std::vector<int> counts;
  double best = 0.0;
  for (;;) {
    counts.assign(static_cast<std::size_t>(need + 1) * fixed_parts, 0);
    for (int pos = 0; pos < n; ++pos) {
      int col = 0;
      while (col < need && pos >= positions[idx[col]]) ++col;
      ++counts[static_cast<std::size_t>(col) * fixed_parts + row_of[pos]];
    }
    double f = 0.0;
    for (int colcell = 0; colcell <= need; ++colcell) {
      int total = 0;
      double acc = 0.0;
      for (int r = 0; r < fixed_parts; ++r) {
        int v = counts[static_cast<std::size_t>(colcell) * fixed_parts + r];
        total += v;
        acc += xlx[v];
      }
      f += acc - xlx[total];
    }
    double mi = (f + xlx[n] - row_xlx) / static_cast<double>(n);
    if (mi > best) best = mi;

    int i = need - 1;
    while (i >= 0 && idx[i] == m - need + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (int j = i + 1; j < need; ++j) idx[j] = idx[j - 1] + 1;
  }
  return best;
}

}  // namespace detail

// Exhaustive-search oracle for the equicharacteristic matrix: for each
// (k,l) within the budget, the mandated axis is equipartitioned and every
// admissible cut subset on the free axis is tried. Deliberately independent
// of the DP above; guarded against combinatorial blowup.
inline EquicharMatrix brute_force_equichar(const core::Sample& sample, int b,
                                           core::TiePolicy policy =
                                               core::TiePolicy::stable_index) {
  int n = sample.n();
  if (n > 14 || b > 8)
    throw Error(Error::Kind::oracle_too_large,
                "exhaustive oracle limited to n <= 14 and B <= 8");
  if (b < 4)
    throw Error(Error::Kind::invalid_budget, "budget must be at least 4");
  auto ranked = core::rank_transform(sample, policy);

  EquicharMatrix m;
  m.budget = b;
  for (int k = 2; k <= b / 2 && k <= n; ++k) {
    for (int l = 2; k * l <= b && l <= n; ++l) {
      double info;
      if (k < l)
        info = detail::enumerate_free_axis(ranked, true, k, l);
      else if (k > l)
        info = detail::enumerate_free_axis(ranked, false, l, k);
      else
        info = std::max(detail::enumerate_free_axis(ranked, true, k, l),
                        detail::enumerate_free_axis(ranked, false, l, k));
      double norm = std::log(static_cast<double>(std::min(k, l)));
      m.entries.push_back({k, l, detail::normalize_entry(info / norm)});
    }
  }
  std::sort(m.entries.begin(), m.entries.end(),
            [](const MatrixEntry& a, const MatrixEntry& b2) {
              if (a.k * a.l != b2.k * b2.l) return a.k * a.l < b2.k * b2.l;
              if (a.k != b2.k) return a.k < b2.k;
              return a.l < b2.l;
            });
  return m;
}

inline double brute_force_mic_e(const core::Sample& sample, int b) {
  auto m = brute_force_equichar(sample, b);
  double best = 0.0;
  for (const auto& e : m.entries) best = std::max(best, e.value);
  return best;
}

// -------------------------------------------------------------------------
// Parameter presets. Rows are (n, alpha, c); alpha is interpolated linearly
// in log10(n) between rows, c is taken from the nearest row in log scale,
// and values clamp to the table edges.

namespace presets {

struct MicPreset {
  double alpha;
  int c;
};

struct PresetRow {
  int n;
  double alpha;
  int c;
};

inline MicPreset lookup(const std::vector<PresetRow>& table, int n) {
  if (n <= table.front().n) return {table.front().alpha, table.front().c};
  if (n >= table.back().n) return {table.back().alpha, table.back().c};
  for (std::size_t i = 1; i < table.size(); ++i) {
    if (n <= table[i].n) {
      const auto& a = table[i - 1];
      const auto& b = table[i];
      if (n == b.n) return {b.alpha, b.c};
      double t = (std::log10(static_cast<double>(n)) -
                  std::log10(static_cast<double>(a.n))) /
                 (std::log10(static_cast<double>(b.n)) -
                  std::log10(static_cast<double>(a.n)));
      double alpha = a.alpha + t * (b.alpha - a.alpha);
      int c = t < 0.5 ? a.c : b.c;
      return {alpha, c};
    }
  }
  return {table.back().alpha, table.back().c};
}

inline MicPreset equitability_mic(int n) {
  static const std::vector<PresetRow> table = {
      {250, 0.75, 15}, {500, 0.80, 5}, {5000, 0.65, 3}};
  return lookup(table, n);
}

inline MicPreset equitability_tic(int n) {
  static const std::vector<PresetRow> table = {
      {250, 0.80, 3}, {500, 0.80, 3}, {5000, 0.70, 3}};
  return lookup(table, n);
}

// Optimal independence-testing parameters selected by average area under
// the power curve.
inline MicPreset power_mic(int n) {
  static const std::vector<PresetRow> table = {{100, 0.48, 5}, {500, 0.35, 5}};
  return lookup(table, n);
}

inline MicPreset power_tic(int n) {
  static const std::vector<PresetRow> table = {{100, 0.50, 5}, {500, 0.38, 5}};
  return lookup(table, n);
}

inline MicPreset power_approx_mic(int n) {
  static const std::vector<PresetRow> table = {{100, 0.40, 5}, {500, 0.30, 5}};
  return lookup(table, n);
}

enum class RuntimePreset { power, fast_equitability, equitability };

inline MicPreset runtime(RuntimePreset preset, int n) {
  static const std::vector<PresetRow> power_table = {
      {50, 0.54, 5},  {100, 0.48, 5},  {500, 0.36, 5},
      {1000, 0.32, 5}, {5000, 0.26, 5}, {10000, 0.24, 5}};
  static const std::vector<PresetRow> fast_equit_table = {
      {50, 0.75, 3},  {100, 0.70, 2},  {500, 0.65, 1},
      {1000, 0.60, 1}, {5000, 0.50, 1}, {10000, 0.45, 1}};
  static const std::vector<PresetRow> equit_table = {
      {50, 0.85, 5},  {100, 0.80, 5},  {500, 0.80, 5},
      {1000, 0.75, 4}, {5000, 0.65, 1}, {10000, 0.60, 1}};
  switch (preset) {
    case RuntimePreset::power:
      return lookup(power_table, n);
    case RuntimePreset::fast_equitability:
      return lookup(fast_equit_table, n);
    case RuntimePreset::equitability:
      return lookup(equit_table, n);
  }
  throw Error(Error::Kind::internal, "unknown runtime preset");
}

}  // namespace presets

}  // namespace depbench::micest
