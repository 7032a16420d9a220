#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "depbench/baselines.hpp"
#include "depbench/core.hpp"
#include "depbench/errors.hpp"
#include "depbench/micest.hpp"

namespace depbench::registry {

// Flat key=value parameter map; the contract the CLI and the benchmark
// modules program against.
using ParamMap = std::map<std::string, double>;

// Side information a benchmark harness can provide. Ordinary statistics
// ignore it; the oracle statistic used to validate the harness reads the
// true population R^2 from here.
struct StatContext {
  std::uint64_t seed = 0;
  std::optional<double> population_r2;
};

struct StatisticDef {
  std::string id;
  ParamMap defaults;
  bool needs_context = false;
  std::function<double(const core::Sample&, const ParamMap&, const StatContext&)>
      eval;
};

namespace detail {

inline double get(const ParamMap& params, const std::string& key, double fallback) {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

inline micest::MicParams mic_params(const ParamMap& p, double alpha_default,
                                    double c_default) {
  micest::MicParams mp;
  mp.alpha = get(p, "alpha", alpha_default);
  mp.c = static_cast<int>(get(p, "c", c_default));
  double b = get(p, "b", 0.0);
  if (b > 0.0) mp.b_override = static_cast<int>(b);
  return mp;
}

}  // namespace detail

inline const std::vector<StatisticDef>& all_statistics() {
  static const std::vector<StatisticDef> defs = [] {
    std::vector<StatisticDef> v;
    v.push_back({"pearson", {}, false,
                 [](const core::Sample& s, const ParamMap&, const StatContext&) {
                   return baselines::pearson(s);
                 }});
    v.push_back({"mic_e",
                 {{"alpha", 0.6}, {"c", 5}, {"b", 0}},
                 false,
                 [](const core::Sample& s, const ParamMap& p, const StatContext&) {
                   return micest::mic_e(s, detail::mic_params(p, 0.6, 5));
                 }});
    v.push_back({"tic_e",
                 {{"alpha", 0.6}, {"c", 5}, {"b", 0}},
                 false,
                 [](const core::Sample& s, const ParamMap& p, const StatContext&) {
                   return micest::tic_e(s, detail::mic_params(p, 0.6, 5));
                 }});
    v.push_back({"mic_approx",
                 {{"alpha", 0.6}, {"c", 5}, {"b", 0}},
                 false,
                 [](const core::Sample& s, const ParamMap& p, const StatContext&) {
                   return micest::approx_mic(s, detail::mic_params(p, 0.6, 5));
                 }});
    v.push_back({"mi_kraskov",
                 {{"k", 6}, {"as_linfoot", 0}},
                 false,
                 [](const core::Sample& s, const ParamMap& p, const StatContext& ctx) {
                   double mi = baselines::kraskov_mi(
                       s, static_cast<int>(detail::get(p, "k", 6)), ctx.seed);
                   if (detail::get(p, "as_linfoot", 0) != 0)
                     return baselines::linfoot(mi);
                   return mi;
                 }});
    v.push_back({"dcor", {}, false,
                 [](const core::Sample& s, const ParamMap&, const StatContext&) {
                   return baselines::dcor(s);
                 }});
    v.push_back({"maxcorr_ace",
                 {{"max_iters", 100}, {"tol", 1e-6}, {"span", 0.1}},
                 false,
                 [](const core::Sample& s, const ParamMap& p, const StatContext&) {
                   baselines::AceParams ap;
                   ap.max_iters = static_cast<int>(detail::get(p, "max_iters", 100));
                   ap.tol = detail::get(p, "tol", 1e-6);
                   ap.smoother_span = detail::get(p, "span", 0.1);
                   return baselines::maximal_correlation_ace(s, ap).value;
                 }});
    v.push_back({"hsic",
                 {{"bandwidth_quantile", 0.5}},
                 false,
                 [](const core::Sample& s, const ParamMap& p, const StatContext&) {
                   baselines::HsicParams hp;
                   hp.bandwidth_quantile = detail::get(p, "bandwidth_quantile", 0.5);
                   return baselines::hsic(s, hp);
                 }});
    v.push_back({"rdc",
                 {{"k", 10}, {"scale", 0}, {"ridge", 1e-9}},
                 false,
                 [](const core::Sample& s, const ParamMap& p, const StatContext& ctx) {
                   baselines::RdcParams rp;
                   rp.num_features = static_cast<int>(detail::get(p, "k", 10));
                   rp.scale = detail::get(p, "scale", 0);
                   rp.ridge = detail::get(p, "ridge", 1e-9);
                   return baselines::rdc(s, rp, ctx.seed);
                 }});
    // Extension slots: the algorithms live in their own publications; the
    // registry reserves the ids so third parties can plug them in.
    v.push_back({"hhg", {}, false,
                 [](const core::Sample&, const ParamMap&, const StatContext&) -> double {
                   throw Error(Error::Kind::not_implemented,
                               "hhg is a registry extension slot; no built-in implementation");
                 }});
    v.push_back({"sddp", {}, false,
                 [](const core::Sample&, const ParamMap&, const StatContext&) -> double {
                   throw Error(Error::Kind::not_implemented,
                               "sddp is a registry extension slot; no built-in implementation");
                 }});
    // Benchmark-validation statistic: echoes the generating R^2. Only
    // usable where the harness supplies context.
    v.push_back({"_oracle_r2", {}, true,
                 [](const core::Sample&, const ParamMap&, const StatContext& ctx) {
                   if (!ctx.population_r2)
                     throw Error(Error::Kind::usage,
                                 "_oracle_r2 needs generator context");
                   return *ctx.population_r2;
                 }});
    return v;
  }();
  return defs;
}

inline std::vector<std::string> statistic_ids(bool include_hidden = false) {
  std::vector<std::string> ids;
  for (const auto& d : all_statistics())
    if (include_hidden || d.id[0] != '_') ids.push_back(d.id);
  return ids;
}

inline const StatisticDef& find_statistic(const std::string& id) {
  for (const auto& d : all_statistics())
    if (d.id == id) return d;
  std::string valid;
  for (const auto& name : statistic_ids()) {
    if (!valid.empty()) valid += ", ";
    valid += name;
  }
  throw Error(Error::Kind::unknown_statistic,
              "unknown statistic '" + id + "'; valid ids: " + valid);
}

inline double evaluate(const std::string& id, const core::Sample& sample,
                       const ParamMap& overrides = {},
                       const StatContext& ctx = {}) {
  const auto& def = find_statistic(id);
  ParamMap params = def.defaults;
  for (const auto& [k, v] : overrides) params[k] = v;
  return def.eval(sample, params, ctx);
}

// A statistic plus pinned parameters, as benchmarks consume them.
struct StatSpec {
  std::string id;
  ParamMap params;
  std::string label;  // e.g. "mic_e(alpha=0.3)"; defaults to id

  std::string display() const { return label.empty() ? id : label; }
};

}  // namespace depbench::registry
