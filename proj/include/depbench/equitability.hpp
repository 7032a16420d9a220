#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "depbench/datagen.hpp"
#include "depbench/errors.hpp"
#include "depbench/parallel.hpp"
#include "depbench/registry.hpp"
#include "depbench/rng.hpp"
#include "depbench/util.hpp"

namespace depbench::equitability {

struct EquitabilityDesign {
  datagen::NoiseGrid grid = datagen::NoiseGrid::equitability(41);
  int reps = 500;
  int n = 500;
  double quantile_lo = 0.05;
  double quantile_hi = 0.95;
  std::string suite_name = "equitability";
  datagen::SamplingModel model;

  void validate() const {
    if (reps < 2) throw Error(Error::Kind::usage, "design needs reps >= 2");
    if (!(quantile_lo < quantile_hi) || quantile_lo < 0.0 || quantile_hi > 1.0)
      throw Error(Error::Kind::usage, "quantile pair must be ordered inside [0,1]");
  }
};

// Scores are evaluated through this hook so tests can wrap or replace
// registry statistics; registry ids adapt via scorer_for.
using ScoreFn =
    std::function<double(const core::Sample&, const registry::StatContext&)>;

inline ScoreFn scorer_for(const registry::StatSpec& spec) {
  return [spec](const core::Sample& s, const registry::StatContext& ctx) {
    return registry::evaluate(spec.id, s, spec.params, ctx);
  };
}

// All raw replicate scores for one statistic across (function, R^2 level);
// NaN marks a dropped replicate.
struct ScoreArchive {
  std::string statistic;
  EquitabilityDesign design;
  std::vector<std::string> function_ids;
  std::vector<double> r2_grid;
  std::vector<std::vector<std::vector<double>>> scores;  // [fn][level][rep]
  std::uint64_t master_seed = 0;
  int dropped = 0;
};

struct ReliableEnvelope {
  std::vector<std::string> function_ids;
  std::vector<double> r2_grid;
  std::vector<std::vector<double>> lo, hi;  // [fn][level]
  std::vector<double> pooled_lo, pooled_hi;
  bool normalized = false;  // scores min-max rescaled to [0,1] first
  double norm_min = 0.0, norm_max = 1.0;
  bool monotone_pooled_hi = true;
};

inline ScoreArchive estimate_scores(const ScoreFn& scorer,
                                    const std::string& statistic_label,
                                    const EquitabilityDesign& design,
                                    std::uint64_t master_seed,
                                    unsigned workers = 1) {
  design.validate();
  ScoreArchive archive;
  archive.statistic = statistic_label;
  archive.design = design;
  archive.master_seed = master_seed;
  archive.r2_grid = design.grid.r2_values;
  auto fns = datagen::suite(design.suite_name, design.model);
  for (const auto& f : fns) archive.function_ids.push_back(f.id);

  std::size_t levels = design.grid.r2_values.size();
  archive.scores.assign(
      fns.size(), std::vector<std::vector<double>>(
                      levels, std::vector<double>(design.reps, 0.0)));
  std::vector<int> dropped_per_task(fns.size() * levels, 0);

  parallel::parallel_for(
      fns.size() * levels, workers, [&](std::size_t task) {
        std::size_t fi = task / levels;
        std::size_t li = task % levels;
        double target = design.grid.r2_values[li];
        auto inst = datagen::instance_for_r2(fns[fi], design.model, target);
        registry::StatContext ctx;
        ctx.population_r2 = target;
        for (int rep = 0; rep < design.reps; ++rep) {
          std::uint64_t seed = rng::derive_seed(
              master_seed, fns[fi].id,
              static_cast<std::uint64_t>(design.model.index()), li,
              static_cast<std::uint64_t>(rep));
          auto sample = datagen::sample(inst, design.n, seed);
          ctx.seed = rng::mix(seed, 0x57a7ULL);
          try {
            archive.scores[fi][li][rep] = scorer(sample, ctx);
          } catch (const Error&) {
            archive.scores[fi][li][rep] = std::numeric_limits<double>::quiet_NaN();
            ++dropped_per_task[task];
          }
        }
      });
  for (int d : dropped_per_task) archive.dropped += d;
  double total = static_cast<double>(fns.size() * levels) * design.reps;
  if (archive.dropped > 0.01 * total)
    throw Error(Error::Kind::envelope_integrity,
                "more than 1% of replicates failed for " + statistic_label);
  return archive;
}

// Per-function central intervals plus the pooled reliable envelope.
// Statistics whose scores leave [0,1] are min-max normalized first so the
// interpretable-interval y axis stays bounded; R^2-axis diameters are
// unaffected by this monotone rescale.
inline ReliableEnvelope build_envelope(const ScoreArchive& archive) {
  ReliableEnvelope env;
  env.function_ids = archive.function_ids;
  env.r2_grid = archive.r2_grid;

  double smin = std::numeric_limits<double>::infinity();
  double smax = -std::numeric_limits<double>::infinity();
  for (const auto& per_fn : archive.scores)
    for (const auto& per_level : per_fn)
      for (double s : per_level)
        if (!std::isnan(s)) {
          smin = std::min(smin, s);
          smax = std::max(smax, s);
        }
  if (smin < -1e-9 || smax > 1.0 + 1e-9) {
    env.normalized = true;
    env.norm_min = smin;
    env.norm_max = smax > smin ? smax : smin + 1.0;
  }
  auto rescale = [&](double s) {
    return env.normalized ? (s - env.norm_min) / (env.norm_max - env.norm_min) : s;
  };

  std::size_t fns = archive.scores.size();
  std::size_t levels = archive.r2_grid.size();
  env.lo.assign(fns, std::vector<double>(levels, 0.0));
  env.hi.assign(fns, std::vector<double>(levels, 0.0));
  env.pooled_lo.assign(levels, std::numeric_limits<double>::infinity());
  env.pooled_hi.assign(levels, -std::numeric_limits<double>::infinity());
  for (std::size_t f = 0; f < fns; ++f) {
    for (std::size_t l = 0; l < levels; ++l) {
      std::vector<double> clean;
      clean.reserve(archive.scores[f][l].size());
      for (double s : archive.scores[f][l])
        if (!std::isnan(s)) clean.push_back(rescale(s));
      if (clean.empty())
        throw Error(Error::Kind::envelope_integrity,
                    "no surviving replicates in one envelope cell");
      env.lo[f][l] = util::quantile(clean, archive.design.quantile_lo);
      env.hi[f][l] = util::quantile(std::move(clean), archive.design.quantile_hi);
      env.pooled_lo[l] = std::min(env.pooled_lo[l], env.lo[f][l]);
      env.pooled_hi[l] = std::max(env.pooled_hi[l], env.hi[f][l]);
    }
  }
  for (std::size_t l = 1; l < levels; ++l)
    if (env.pooled_hi[l] < env.pooled_hi[l - 1]) env.monotone_pooled_hi = false;
  return env;
}

struct Interval {
  bool empty = true;
  double lo = 0.0;
  double hi = 0.0;
  double diameter() const { return empty ? 0.0 : hi - lo; }
};

// Smallest interval of grid R^2 values whose reliable intervals contain y.
inline Interval interpretable_interval(const ReliableEnvelope& env, double y) {
  Interval out;
  for (std::size_t l = 0; l < env.r2_grid.size(); ++l) {
    if (env.pooled_lo[l] <= y && y <= env.pooled_hi[l]) {
      if (out.empty) {
        out.empty = false;
        out.lo = out.hi = env.r2_grid[l];
      } else {
        out.lo = std::min(out.lo, env.r2_grid[l]);
        out.hi = std::max(out.hi, env.r2_grid[l]);
      }
    }
  }
  return out;
}

struct EquitabilityReport {
  std::string statistic;
  double worst_diameter = 0.0;
  double worst_y = 0.0;
  Interval worst_interval;
  double average_diameter = 0.0;
  std::vector<double> y_grid;
  std::vector<double> diameters;
  bool normalized = false;
  bool monotone_pooled_hi = true;
  // 1/d convention; infinity when every interval is degenerate
  double equitability() const {
    return worst_diameter > 0.0 ? 1.0 / worst_diameter
                                : std::numeric_limits<double>::infinity();
  }
};

inline EquitabilityReport equitability_report(const ReliableEnvelope& env,
                                              const std::string& statistic_label,
                                              int y_points = 201) {
  EquitabilityReport report;
  report.statistic = statistic_label;
  report.normalized = env.normalized;
  report.monotone_pooled_hi = env.monotone_pooled_hi;
  double sum = 0.0;
  for (int i = 0; i < y_points; ++i) {
    double y = static_cast<double>(i) / (y_points - 1);
    auto interval = interpretable_interval(env, y);
    double d = interval.diameter();
    report.y_grid.push_back(y);
    report.diameters.push_back(d);
    sum += d;
    if (d > report.worst_diameter) {
      report.worst_diameter = d;
      report.worst_y = y;
      report.worst_interval = interval;
    }
  }
  report.average_diameter = sum / y_points;
  return report;
}

enum class Aggregation { worst_case, average };

struct PowerSurface {
  std::vector<double> grid;                // shared null/alternative R^2 axis
  std::vector<std::vector<double>> power;  // [x0 null][x1 alternative]
  double level = 0.05;
  Aggregation aggregation = Aggregation::worst_case;
  int reps = 0;

  // mean over null rows of the area under the power curve (max 0.5 when the
  // grid spans [0,1])
  double average_area() const {
    if (grid.size() < 2) return 0.0;
    double acc = 0.0;
    for (const auto& row : power) {
      double area = 0.0;
      for (std::size_t i = 1; i < grid.size(); ++i)
        area += 0.5 * (row[i] + row[i - 1]) * (grid[i] - grid[i - 1]);
      acc += area;
    }
    return acc / static_cast<double>(power.size());
  }
};

// For each null strength x0 the composite-null critical value is the max
// over functions of the (1-level) score quantile at x0; power at x1 is the
// aggregated fraction of scores exceeding it.
inline PowerSurface power_surface(const ScoreArchive& archive, double level,
                                  Aggregation aggregation) {
  PowerSurface surface;
  surface.grid = archive.r2_grid;
  surface.level = level;
  surface.aggregation = aggregation;
  surface.reps = archive.design.reps;
  std::size_t levels = archive.r2_grid.size();
  std::size_t fns = archive.scores.size();

  std::vector<double> critical(levels, -std::numeric_limits<double>::infinity());
  for (std::size_t x0 = 0; x0 < levels; ++x0) {
    for (std::size_t f = 0; f < fns; ++f) {
      std::vector<double> clean;
      for (double s : archive.scores[f][x0])
        if (!std::isnan(s)) clean.push_back(s);
      critical[x0] =
          std::max(critical[x0], util::quantile(std::move(clean), 1.0 - level));
    }
  }
  surface.power.assign(levels, std::vector<double>(levels, 0.0));
  for (std::size_t x0 = 0; x0 < levels; ++x0) {
    for (std::size_t x1 = 0; x1 < levels; ++x1) {
      double agg = aggregation == Aggregation::worst_case
                       ? std::numeric_limits<double>::infinity()
                       : 0.0;
      for (std::size_t f = 0; f < fns; ++f) {
        int above = 0, total = 0;
        for (double s : archive.scores[f][x1]) {
          if (std::isnan(s)) continue;
          ++total;
          if (s > critical[x0]) ++above;
        }
        double p = total > 0 ? static_cast<double>(above) / total : 0.0;
        if (aggregation == Aggregation::worst_case)
          agg = std::min(agg, p);
        else
          agg += p;
      }
      surface.power[x0][x1] =
          aggregation == Aggregation::worst_case ? agg : agg / fns;
    }
  }
  return surface;
}

}  // namespace depbench::equitability
