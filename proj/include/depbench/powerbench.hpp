#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "depbench/datagen.hpp"
#include "depbench/equitability.hpp"
#include "depbench/errors.hpp"
#include "depbench/parallel.hpp"
#include "depbench/registry.hpp"
#include "depbench/rng.hpp"
#include "depbench/util.hpp"

namespace depbench::powerbench {

enum class NullMechanism {
  permute,   // shuffle y against x within a fresh alternative sample
  resample,  // bootstrap both marginals independently with replacement
};

struct PowerDesign {
  int n = 500;
  int reps = 1000;
  double level = 0.05;
  datagen::NoiseGrid grid = datagen::NoiseGrid::power(100);
  // Power analyses run the Simon-Tibshirani setting: the eight benchmark
  // relationships under U_X[Ny].
  datagen::SamplingModel model{datagen::Marginal::uniform_x,
                               datagen::NoisePlacement::y_only};
  std::string suite_name = "power";
  NullMechanism null_mechanism = NullMechanism::permute;

  void validate() const {
    if (reps < 100)
      throw Error(Error::Kind::usage, "power design needs reps >= 100");
    if (!(level > 0.0) || level >= 0.5)
      throw Error(Error::Kind::usage, "test level must lie in (0, 0.5)");
  }
};

inline core::Sample null_sample(const core::Sample& alt, NullMechanism mechanism,
                                std::uint64_t seed) {
  int n = alt.n();
  rng::Xoshiro256 gen(seed);
  std::vector<double> xs(alt.xs), ys(alt.ys);
  if (mechanism == NullMechanism::permute) {
    for (int i = n - 1; i > 0; --i) {
      int j = static_cast<int>(gen.below(static_cast<std::uint64_t>(i) + 1));
      std::swap(ys[i], ys[j]);
    }
  } else {
    for (int i = 0; i < n; ++i)
      xs[i] = alt.xs[gen.below(static_cast<std::uint64_t>(n))];
    for (int i = 0; i < n; ++i)
      ys[i] = alt.ys[gen.below(static_cast<std::uint64_t>(n))];
  }
  return core::Sample(std::move(xs), std::move(ys));
}

// Empirical right-tail threshold of a statistic over `reps` null draws: the
// ceil((1-level)(reps+1))-th order statistic, so a fresh null draw exceeds
// it with probability ~level.
inline double critical_value(
    const equitability::ScoreFn& scorer,
    const std::function<core::Sample(std::uint64_t)>& null_generator, int reps,
    double level, std::uint64_t seed) {
  std::vector<double> scores;
  scores.reserve(reps);
  for (int r = 0; r < reps; ++r) {
    std::uint64_t s = rng::derive_seed(seed, "null", static_cast<std::uint64_t>(r));
    auto sample = null_generator(s);
    registry::StatContext ctx;
    ctx.seed = rng::mix(s, 0x57a7ULL);
    ctx.population_r2 = 0.0;
    scores.push_back(scorer(sample, ctx));
  }
  return util::upper_order_statistic(std::move(scores), level);
}

struct PowerCurve {
  std::string relationship;
  std::vector<double> r2;     // per level, in grid order (noise increasing)
  std::vector<double> power;
  std::vector<double> mc_se;
};

// Simon-Tibshirani protocol: at every noise level, each alternative
// replicate is paired with a same-marginals null replicate; power is the
// fraction of alternative scores above that level's null critical value.
inline PowerCurve power_curve(const equitability::ScoreFn& scorer,
                              const datagen::FunctionSpec& fn,
                              const PowerDesign& design,
                              std::uint64_t master_seed, unsigned workers = 1) {
  design.validate();
  std::size_t levels = design.grid.r2_values.size();
  PowerCurve curve;
  curve.relationship = fn.id;
  curve.r2 = design.grid.r2_values;
  curve.power.assign(levels, 0.0);
  curve.mc_se.assign(levels, 0.0);

  parallel::parallel_for(levels, workers, [&](std::size_t li) {
    double target = design.grid.r2_values[li];
    auto inst = datagen::instance_for_r2(fn, design.model, target);
    std::vector<double> alt_scores(design.reps), null_scores(design.reps);
    for (int rep = 0; rep < design.reps; ++rep) {
      std::uint64_t seed = rng::derive_seed(
          master_seed, fn.id, static_cast<std::uint64_t>(design.model.index()),
          li, static_cast<std::uint64_t>(rep));
      auto alt = datagen::sample(inst, design.n, seed);
      registry::StatContext ctx;
      ctx.seed = rng::mix(seed, 0x57a7ULL);
      ctx.population_r2 = target;
      alt_scores[rep] = scorer(alt, ctx);
      auto null = null_sample(alt, design.null_mechanism,
                              rng::mix(seed, 0x9011ULL));
      registry::StatContext nctx;
      nctx.seed = rng::mix(seed, 0x57a8ULL);
      nctx.population_r2 = 0.0;
      null_scores[rep] = scorer(null, nctx);
    }
    double cv = util::upper_order_statistic(null_scores, design.level);
    int above = 0;
    for (double s : alt_scores)
      if (s > cv) ++above;
    double p = static_cast<double>(above) / design.reps;
    curve.power[li] = p;
    curve.mc_se[li] = std::sqrt(std::max(p * (1.0 - p), 1e-12) / design.reps);
  });
  return curve;
}

enum class AucAxis { noise_index, r2 };

// Trapezoidal area under the power curve, normalized by axis span to [0,1].
inline double auc_power(const PowerCurve& curve, AucAxis axis) {
  std::size_t m = curve.power.size();
  if (m < 2) throw Error(Error::Kind::usage, "curve needs >= 2 levels");
  double area = 0.0, span = 0.0;
  if (axis == AucAxis::noise_index) {
    for (std::size_t i = 1; i < m; ++i)
      area += 0.5 * (curve.power[i] + curve.power[i - 1]);
    span = static_cast<double>(m - 1);
  } else {
    std::vector<std::size_t> order(m);
    for (std::size_t i = 0; i < m; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return curve.r2[a] < curve.r2[b];
    });
    for (std::size_t i = 1; i < m; ++i) {
      double dr = curve.r2[order[i]] - curve.r2[order[i - 1]];
      area += 0.5 * (curve.power[order[i]] + curve.power[order[i - 1]]) * dr;
    }
    span = curve.r2[order.back()] - curve.r2[order.front()];
  }
  return span > 0.0 ? area / span : 0.0;
}

// Smallest grid R^2 with power >= threshold there and at every larger grid
// R^2 (the monotone-envelope rule); +infinity when never reached.
inline double min_r2_for_power(const PowerCurve& curve, double threshold) {
  if (!(threshold > 0.0) || threshold >= 1.0)
    throw Error(Error::Kind::usage, "power threshold must lie in (0,1)");
  std::size_t m = curve.power.size();
  std::vector<std::size_t> order(m);
  for (std::size_t i = 0; i < m; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return curve.r2[a] > curve.r2[b];
  });
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t idx : order) {
    if (curve.power[idx] >= threshold)
      best = curve.r2[idx];
    else
      break;
  }
  return best;
}

struct PowerSummary {
  double auc_noise = 0.0;
  double auc_r2 = 0.0;
  std::map<double, double> min_r2_at;  // power threshold -> R^2

  double min_r2_at_half() const {
    auto it = min_r2_at.find(0.5);
    return it == min_r2_at.end() ? std::numeric_limits<double>::infinity()
                                 : it->second;
  }
};

inline PowerSummary summarize(const PowerCurve& curve,
                              const std::vector<double>& thresholds = {
                                  0.1, 0.25, 0.5, 0.75, 0.95}) {
  PowerSummary s;
  s.auc_noise = auc_power(curve, AucAxis::noise_index);
  s.auc_r2 = auc_power(curve, AucAxis::r2);
  for (double t : thresholds) s.min_r2_at[t] = min_r2_for_power(curve, t);
  return s;
}

// curves/summaries for one statistic across the whole relationship suite
struct StatisticPowerResult {
  std::string statistic;
  std::vector<PowerCurve> curves;
  std::map<std::string, PowerSummary> summaries;  // by relationship id
};

inline StatisticPowerResult run_power(const registry::StatSpec& spec,
                                      const PowerDesign& design,
                                      std::uint64_t master_seed,
                                      unsigned workers = 1) {
  StatisticPowerResult out;
  out.statistic = spec.display();
  auto scorer = equitability::scorer_for(spec);
  auto fns = datagen::suite(design.suite_name, design.model);
  for (const auto& fn : fns) {
    auto curve = power_curve(scorer, fn, design, master_seed, workers);
    out.summaries[fn.id] = summarize(curve);
    out.curves.push_back(std::move(curve));
  }
  return out;
}

struct RankingEntry {
  std::string statistic;
  double avg_auc_noise = 0.0;
  double worst_auc_noise = 0.0;
  double avg_auc_r2 = 0.0;
  double worst_auc_r2 = 0.0;
  double avg_min_r2 = 0.0;
  double detection_threshold = 0.0;  // max over relationships of min R^2 @ 50%
};

struct RankingTable {
  std::vector<RankingEntry> entries;  // sorted by avg_auc_noise descending
  std::vector<std::string> order_by_auc_noise;
  std::vector<std::string> order_by_detection_threshold;  // ascending
};

inline RankingTable rank_methods(const std::vector<StatisticPowerResult>& results) {
  RankingTable table;
  for (const auto& r : results) {
    RankingEntry e;
    e.statistic = r.statistic;
    e.worst_auc_noise = std::numeric_limits<double>::infinity();
    e.worst_auc_r2 = std::numeric_limits<double>::infinity();
    double n = static_cast<double>(r.summaries.size());
    for (const auto& [rel, s] : r.summaries) {
      e.avg_auc_noise += s.auc_noise / n;
      e.avg_auc_r2 += s.auc_r2 / n;
      e.avg_min_r2 += s.min_r2_at_half() / n;
      e.worst_auc_noise = std::min(e.worst_auc_noise, s.auc_noise);
      e.worst_auc_r2 = std::min(e.worst_auc_r2, s.auc_r2);
      e.detection_threshold = std::max(e.detection_threshold, s.min_r2_at_half());
    }
    table.entries.push_back(e);
  }
  auto by_auc = table.entries;
  std::stable_sort(by_auc.begin(), by_auc.end(),
                   [](const RankingEntry& a, const RankingEntry& b) {
                     return a.avg_auc_noise > b.avg_auc_noise;
                   });
  for (const auto& e : by_auc) table.order_by_auc_noise.push_back(e.statistic);
  auto by_thr = table.entries;
  std::stable_sort(by_thr.begin(), by_thr.end(),
                   [](const RankingEntry& a, const RankingEntry& b) {
                     return a.detection_threshold < b.detection_threshold;
                   });
  for (const auto& e : by_thr)
    table.order_by_detection_threshold.push_back(e.statistic);
  table.entries = std::move(by_auc);
  return table;
}

struct SweepPoint {
  double param_value = 0.0;
  std::map<std::string, PowerSummary> summaries;
  double avg_auc_noise = 0.0;
  double worst_auc_noise = 0.0;
  double avg_min_r2 = 0.0;
};

struct SweepResult {
  std::string statistic;
  std::string param_name;
  std::vector<SweepPoint> points;
  double optimal_by_auc = 0.0;     // param value maximizing avg AUC
  double optimal_by_min_r2 = 0.0;  // param value minimizing avg min R^2
};

inline SweepResult parameter_sweep(const registry::StatSpec& base,
                                   const std::string& param_name,
                                   const std::vector<double>& values,
                                   const PowerDesign& design,
                                   std::uint64_t master_seed,
                                   unsigned workers = 1) {
  if (values.empty())
    throw Error(Error::Kind::usage, "sweep needs at least one parameter value");
  SweepResult sweep;
  sweep.statistic = base.display();
  sweep.param_name = param_name;
  double best_auc = -1.0, best_min = std::numeric_limits<double>::infinity();
  for (double v : values) {
    registry::StatSpec spec = base;
    spec.params[param_name] = v;
    auto result = run_power(spec, design, master_seed, workers);
    SweepPoint point;
    point.param_value = v;
    point.summaries = result.summaries;
    point.worst_auc_noise = std::numeric_limits<double>::infinity();
    double n = static_cast<double>(result.summaries.size());
    for (const auto& [rel, s] : result.summaries) {
      point.avg_auc_noise += s.auc_noise / n;
      point.avg_min_r2 += s.min_r2_at_half() / n;
      point.worst_auc_noise = std::min(point.worst_auc_noise, s.auc_noise);
    }
    if (point.avg_auc_noise > best_auc) {
      best_auc = point.avg_auc_noise;
      sweep.optimal_by_auc = v;
    }
    if (point.avg_min_r2 < best_min) {
      best_min = point.avg_min_r2;
      sweep.optimal_by_min_r2 = v;
    }
    sweep.points.push_back(std::move(point));
  }
  return sweep;
}

struct ParetoPoint {
  std::string label;
  double avg_power = 0.0;              // higher is better
  double worst_case_equitability = 0;  // interpretable diameter; lower is better
};

// Non-dominated subset under (power up, diameter down), sorted by power.
inline std::vector<ParetoPoint> pareto_front(std::vector<ParetoPoint> points) {
  if (points.empty())
    throw Error(Error::Kind::usage, "pareto front needs at least one point");
  std::vector<ParetoPoint> front;
  for (const auto& p : points) {
    bool dominated = false;
    for (const auto& q : points) {
      bool weakly = q.avg_power >= p.avg_power &&
                    q.worst_case_equitability <= p.worst_case_equitability;
      bool strictly = q.avg_power > p.avg_power ||
                      q.worst_case_equitability < p.worst_case_equitability;
      if (weakly && strictly) {
        dominated = true;
        break;
      }
    }
    if (!dominated) front.push_back(p);
  }
  std::stable_sort(front.begin(), front.end(),
                   [](const ParetoPoint& a, const ParetoPoint& b) {
                     return a.avg_power < b.avg_power;
                   });
  return front;
}

enum class RuntimeInput { independent_uniform, noiseless_line };

struct RuntimeRow {
  std::string statistic;
  int n = 0;
  RuntimeInput input = RuntimeInput::independent_uniform;
  int reps = 0;
  double mean_seconds = 0.0;
  double sd_seconds = 0.0;
  bool resolution_warning = false;
};

inline const char* runtime_input_name(RuntimeInput in) {
  return in == RuntimeInput::independent_uniform ? "independent-uniform"
                                                 : "noiseless-line";
}

// Wall-clock protocol: per (statistic, n, input) the statistic runs on
// pre-generated fresh samples, warmup calls excluded, single-threaded.
inline RuntimeRow runtime_bench_one(const registry::StatSpec& spec, int n,
                                    RuntimeInput input, int reps,
                                    std::uint64_t seed, int warmup = 5) {
  auto scorer = equitability::scorer_for(spec);
  auto make = [&](std::uint64_t s) {
    rng::Xoshiro256 gen(s);
    std::vector<double> xs(n), ys(n);
    for (int i = 0; i < n; ++i) xs[i] = gen.next_double();
    if (input == RuntimeInput::independent_uniform)
      for (int i = 0; i < n; ++i) ys[i] = gen.next_double();
    else
      ys = xs;
    return core::Sample(std::move(xs), std::move(ys));
  };
  std::vector<core::Sample> samples;
  samples.reserve(warmup + reps);
  for (int r = 0; r < warmup + reps; ++r)
    samples.push_back(make(rng::derive_seed(seed, "runtime",
                                            static_cast<std::uint64_t>(r))));
  registry::StatContext ctx;
  volatile double sink = 0.0;
  std::vector<double> seconds;
  seconds.reserve(reps);
  for (int r = 0; r < warmup + reps; ++r) {
    ctx.seed = static_cast<std::uint64_t>(r) + 1;
    auto t0 = std::chrono::steady_clock::now();
    sink = sink + scorer(samples[r], ctx);
    auto t1 = std::chrono::steady_clock::now();
    if (r >= warmup)
      seconds.push_back(std::chrono::duration<double>(t1 - t0).count());
  }
  RuntimeRow row;
  row.statistic = spec.display();
  row.n = n;
  row.input = input;
  row.reps = reps;
  row.mean_seconds = util::mean(seconds);
  row.sd_seconds = std::sqrt(util::variance(seconds));
  row.resolution_warning = row.mean_seconds < 1e-6;
  return row;
}

inline std::vector<RuntimeRow> runtime_bench(
    const std::vector<registry::StatSpec>& specs, const std::vector<int>& ns,
    int reps, std::uint64_t seed,
    const std::vector<RuntimeInput>& inputs = {
        RuntimeInput::independent_uniform, RuntimeInput::noiseless_line}) {
  std::vector<RuntimeRow> rows;
  for (const auto& spec : specs)
    for (int n : ns)
      for (auto input : inputs)
        rows.push_back(runtime_bench_one(spec, n, input, reps, seed));
  return rows;
}

}  // namespace depbench::powerbench
