#pragma once

#include <CLI11.hpp>
#include <cctype>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "depbench/equitability.hpp"
#include "depbench/io.hpp"
#include "depbench/parallel.hpp"
#include "depbench/powerbench.hpp"
#include "depbench/registry.hpp"
#include "depbench/scan.hpp"
#include "depbench/svg.hpp"

namespace depbench::cli {

using nlohmann::json;

namespace detail {

inline int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case Error::Kind::usage:
    case Error::Kind::unknown_statistic:
    case Error::Kind::unknown_suite:
    case Error::Kind::not_implemented:
    case Error::Kind::invalid_coarseness:
    case Error::Kind::oracle_too_large:
      return 1;
    case Error::Kind::parse_error:
    case Error::Kind::io_error:
    case Error::Kind::invalid_sample:
    case Error::Kind::invalid_resolution:
    case Error::Kind::invalid_budget:
    case Error::Kind::undefined_correlation:
    case Error::Kind::degenerate_kernel:
    case Error::Kind::infinite_noise:
    case Error::Kind::calibration_failure:
    case Error::Kind::envelope_integrity:
      return 2;
    default:
      return 3;
  }
}

// statistic spec grammar: id[:key=value]* — e.g. mic_e:alpha=0.3:c=5
inline registry::StatSpec parse_stat_spec(const std::string& text) {
  registry::StatSpec spec;
  std::stringstream ss(text);
  std::string part;
  bool first = true;
  std::string label_params;
  while (std::getline(ss, part, ':')) {
    if (first) {
      spec.id = part;
      first = false;
      continue;
    }
    auto eq = part.find('=');
    if (eq == std::string::npos)
      throw Error(Error::Kind::usage,
                  "statistic parameter must be key=value; got '" + part + "'");
    bool ok = false;
    double v = util::parse_double(part.substr(eq + 1), ok);
    if (!ok)
      throw Error(Error::Kind::usage,
                  "cannot parse parameter value in '" + part + "'");
    spec.params[part.substr(0, eq)] = v;
    if (!label_params.empty()) label_params += ",";
    label_params += part;
  }
  if (spec.id.empty())
    throw Error(Error::Kind::usage, "empty statistic spec");
  registry::find_statistic(spec.id);  // validates the id
  if (!label_params.empty()) spec.label = spec.id + "(" + label_params + ")";
  return spec;
}

inline std::vector<registry::StatSpec> parse_stat_list(const std::string& text) {
  std::vector<registry::StatSpec> specs;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) specs.push_back(parse_stat_spec(item));
  }
  if (specs.empty())
    throw Error(Error::Kind::usage, "no statistics requested");
  return specs;
}

inline std::string file_safe(const std::string& label) {
  std::string out;
  for (char c : label)
    out.push_back(std::isalnum(static_cast<unsigned char>(c)) || c == '.' ||
                          c == '-' || c == '_'
                      ? c
                      : '_');
  return out;
}

inline std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    bool ok = false;
    double v = util::parse_double(item, ok);
    if (!ok)
      throw Error(Error::Kind::usage, "cannot parse number '" + item + "'");
    out.push_back(v);
  }
  return out;
}

inline std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  for (double v : parse_double_list(text)) out.push_back(static_cast<int>(v));
  return out;
}

// Two-column x,y CSV; a leading non-numeric row is treated as a header.
inline core::Sample read_pairs(std::istream& in) {
  std::vector<double> xs, ys;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = io::split_csv_row(line);
    if (fields.size() != 2)
      throw Error(Error::Kind::parse_error,
                  "line " + std::to_string(line_no) + ": expected 2 columns, got " +
                      std::to_string(fields.size()));
    bool okx = false, oky = false;
    double x = util::parse_double(fields[0], okx);
    double y = util::parse_double(fields[1], oky);
    if (!okx || !oky) {
      if (line_no == 1) continue;  // header row
      throw Error(Error::Kind::parse_error,
                  "line " + std::to_string(line_no) + ": cannot parse '" + line + "'");
    }
    xs.push_back(x);
    ys.push_back(y);
  }
  if (xs.size() < 2)
    throw Error(Error::Kind::parse_error, "need at least 2 data rows");
  return core::Sample(std::move(xs), std::move(ys));
}

inline json params_json(const registry::ParamMap& params) {
  json j = json::object();
  for (const auto& [k, v] : params) j[k] = v;
  return j;
}

inline json stat_spec_json(const registry::StatSpec& spec) {
  return json{{"id", spec.id},
              {"params", params_json(spec.params)},
              {"label", spec.display()}};
}

inline const char* palette(std::size_t i) {
  static const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                 "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
                                 "#bcbd22", "#17becf", "#aec7e8", "#ffbb78",
                                 "#98df8a", "#ff9896", "#c5b0d5", "#c49c94",
                                 "#f7b6d2", "#c7c7c7", "#dbdb8d", "#9edae5",
                                 "#393b79"};
  return colors[i % (sizeof(colors) / sizeof(colors[0]))];
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Shared run options and manifest.

struct CommonOptions {
  std::uint64_t seed = 0;
  std::string out_dir = "depbench_out";
  unsigned workers = 0;  // 0 = host parallelism
  std::string scale = "desk";

  unsigned resolved_workers() const {
    return workers == 0 ? parallel::default_workers() : workers;
  }
  bool desk() const { return scale == "desk"; }
};

inline void write_manifest(const std::filesystem::path& dir,
                           const std::string& command, const json& config) {
  json manifest{{"command", command},
                {"config", config},
                {"format_version", 1},
                {"notes",
                 "primary outputs are byte-reproducible for a fixed config and "
                 "seed; svg files may embed a version comment and runtime "
                 "tables report wall-clock times"}};
  io::write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Serialization of result objects.

inline json envelope_json(const equitability::ReliableEnvelope& env,
                          const equitability::ScoreArchive& archive) {
  json j;
  j["statistic"] = archive.statistic;
  j["model"] = archive.design.model.label();
  j["suite"] = archive.design.suite_name;
  j["n"] = archive.design.n;
  j["reps"] = archive.design.reps;
  j["quantiles"] = {archive.design.quantile_lo, archive.design.quantile_hi};
  j["master_seed"] = archive.master_seed;
  j["dropped"] = archive.dropped;
  j["r2_grid"] = env.r2_grid;
  j["functions"] = env.function_ids;
  j["lo"] = env.lo;
  j["hi"] = env.hi;
  j["pooled_lo"] = env.pooled_lo;
  j["pooled_hi"] = env.pooled_hi;
  j["normalized"] = env.normalized;
  if (env.normalized) {
    j["norm_min"] = env.norm_min;
    j["norm_max"] = env.norm_max;
  }
  j["monotone_pooled_hi"] = env.monotone_pooled_hi;
  return j;
}

inline json report_json(const equitability::EquitabilityReport& report) {
  json j;
  j["statistic"] = report.statistic;
  j["worst_diameter"] = report.worst_diameter;
  j["worst_y"] = report.worst_y;
  j["worst_interval"] =
      report.worst_interval.empty
          ? json(nullptr)
          : json{{"lo", report.worst_interval.lo}, {"hi", report.worst_interval.hi}};
  j["average_diameter"] = report.average_diameter;
  if (report.worst_diameter > 0.0)
    j["equitability"] = 1.0 / report.worst_diameter;
  else
    j["equitability"] = "perfect";
  j["y_points"] = report.y_grid.size();
  j["normalized"] = report.normalized;
  j["monotone_pooled_hi"] = report.monotone_pooled_hi;
  return j;
}

inline json surface_json(const equitability::PowerSurface& surface) {
  json j;
  j["grid"] = surface.grid;
  j["power"] = surface.power;
  j["level"] = surface.level;
  j["aggregation"] = surface.aggregation == equitability::Aggregation::worst_case
                         ? "worst-case"
                         : "average";
  j["reps"] = surface.reps;
  j["average_area"] = surface.average_area();
  return j;
}

inline std::string archive_csv(const equitability::ScoreArchive& archive) {
  std::string out = "statistic_id,function_id,model,r2_index,replicate,score\n";
  std::string model = archive.design.model.label();
  for (std::size_t f = 0; f < archive.function_ids.size(); ++f) {
    for (std::size_t l = 0; l < archive.r2_grid.size(); ++l) {
      for (std::size_t r = 0; r < archive.scores[f][l].size(); ++r) {
        double s = archive.scores[f][l][r];
        out += archive.statistic + "," + archive.function_ids[f] + "," + model +
               "," + std::to_string(l) + "," + std::to_string(r) + ",";
        if (!std::isnan(s)) out += util::format_double(s);
        out += "\n";
      }
    }
  }
  return out;
}

inline std::string envelope_svg(const equitability::ReliableEnvelope& env,
                                const equitability::EquitabilityReport& report,
                                const std::string& title) {
  svg::Canvas canvas(640, 420);
  canvas.set_axes(0.0, 1.0, 0.0, 1.0);
  canvas.axes("R^2", title);
  for (std::size_t f = 0; f < env.function_ids.size(); ++f)
    canvas.band(env.r2_grid, env.lo[f], env.hi[f], detail::palette(f), 0.18);
  canvas.polyline(env.r2_grid, env.pooled_lo, "#555555", 1.0);
  canvas.polyline(env.r2_grid, env.pooled_hi, "#555555", 1.0);
  if (!report.worst_interval.empty) {
    double y = report.worst_y;
    canvas.line(canvas.px(report.worst_interval.lo), canvas.py(y),
                canvas.px(report.worst_interval.hi), canvas.py(y), "#d62728", 2.5);
  }
  canvas.text(60, 20,
              title + "  worst=" + util::format_double(report.worst_diameter) +
                  " avg=" + util::format_double(report.average_diameter),
              12);
  return canvas.finish();
}

inline std::string surface_svg(const equitability::PowerSurface& surface,
                               const std::string& title) {
  std::size_t m = surface.grid.size();
  svg::Canvas canvas(520, 520);
  canvas.set_axes(0.0, 1.0, 0.0, 1.0);
  canvas.axes("alternative R^2 (x1)", "null R^2 (x0)");
  double cell_w = (canvas.px(1.0) - canvas.px(0.0)) / m;
  double cell_h = (canvas.py(0.0) - canvas.py(1.0)) / m;
  for (std::size_t x0 = 0; x0 < m; ++x0)
    for (std::size_t x1 = 0; x1 < m; ++x1)
      canvas.rect(canvas.px(0.0) + x1 * cell_w,
                  canvas.py(1.0) + (m - 1 - x0) * cell_h, cell_w + 0.5,
                  cell_h + 0.5, svg::Canvas::heat_color(surface.power[x0][x1]));
  canvas.text(60, 20,
              title + "  avg_area=" + util::format_double(surface.average_area()),
              12);
  return canvas.finish();
}

inline std::string curves_svg(const std::vector<powerbench::PowerCurve>& curves,
                              const std::string& title) {
  svg::Canvas canvas(640, 420);
  canvas.set_axes(0.0, 1.0, 0.0, 1.0);
  canvas.axes("R^2", "power");
  for (std::size_t i = 0; i < curves.size(); ++i) {
    canvas.polyline(curves[i].r2, curves[i].power, detail::palette(i), 1.6);
    canvas.text(520, 32 + 14 * static_cast<double>(i), curves[i].relationship, 10);
    canvas.line(500, 28 + 14 * static_cast<double>(i), 516,
                28 + 14 * static_cast<double>(i), detail::palette(i), 2.0);
  }
  canvas.text(60, 20, title, 12);
  return canvas.finish();
}

inline std::string pareto_svg(const std::vector<powerbench::ParetoPoint>& points,
                              const std::vector<powerbench::ParetoPoint>& front,
                              const std::string& title) {
  svg::Canvas canvas(520, 420);
  double max_d = 0.0;
  for (const auto& p : points) max_d = std::max(max_d, p.worst_case_equitability);
  canvas.set_axes(0.0, 1.0, 0.0, std::max(1.0, max_d * 1.05));
  canvas.axes("average power (AUC)", "worst-case interpretable diameter");
  for (std::size_t i = 0; i < points.size(); ++i) {
    canvas.circle(canvas.px(points[i].avg_power),
                  canvas.py(points[i].worst_case_equitability), 4,
                  detail::palette(i));
    canvas.text(canvas.px(points[i].avg_power) + 6,
                canvas.py(points[i].worst_case_equitability) - 4,
                points[i].label, 9);
  }
  std::vector<double> fx, fy;
  for (const auto& p : front) {
    fx.push_back(p.avg_power);
    fy.push_back(p.worst_case_equitability);
  }
  if (fx.size() > 1) canvas.polyline(fx, fy, "#d62728", 1.2);
  canvas.text(60, 20, title, 12);
  return canvas.finish();
}

inline std::string sweep_svg(const powerbench::SweepResult& sweep,
                             const std::string& title) {
  svg::Canvas canvas(640, 420);
  double lo = sweep.points.front().param_value;
  double hi = sweep.points.back().param_value;
  if (hi <= lo) hi = lo + 1.0;
  canvas.set_axes(lo, hi, 0.0, 1.0);
  canvas.axes(sweep.param_name, "area under power curve");
  // per-relationship traces plus the average in black
  std::vector<std::string> rels;
  for (const auto& [rel, s] : sweep.points.front().summaries) rels.push_back(rel);
  for (std::size_t ri = 0; ri < rels.size(); ++ri) {
    std::vector<double> xs, ys;
    for (const auto& pt : sweep.points) {
      xs.push_back(pt.param_value);
      ys.push_back(pt.summaries.at(rels[ri]).auc_noise);
    }
    canvas.polyline(xs, ys, detail::palette(ri), 1.0);
  }
  std::vector<double> xs, ys;
  for (const auto& pt : sweep.points) {
    xs.push_back(pt.param_value);
    ys.push_back(pt.avg_auc_noise);
  }
  canvas.polyline(xs, ys, "#000000", 2.2);
  canvas.line(canvas.px(sweep.optimal_by_auc), canvas.py(0.0),
              canvas.px(sweep.optimal_by_auc), canvas.py(1.0), "#888888", 1.0);
  canvas.text(60, 20, title, 12);
  return canvas.finish();
}

inline json summary_json(const powerbench::PowerSummary& s) {
  json thresholds = json::object();
  for (const auto& [t, v] : s.min_r2_at)
    thresholds[util::format_double(t)] =
        std::isfinite(v) ? json(v) : json(nullptr);
  return json{{"auc_noise", s.auc_noise},
              {"auc_r2", s.auc_r2},
              {"min_r2_at", thresholds}};
}

inline json ranking_json(const powerbench::RankingTable& table) {
  json entries = json::array();
  for (const auto& e : table.entries) {
    entries.push_back(
        {{"statistic", e.statistic},
         {"avg_auc_noise", e.avg_auc_noise},
         {"worst_auc_noise", e.worst_auc_noise},
         {"avg_auc_r2", e.avg_auc_r2},
         {"worst_auc_r2", e.worst_auc_r2},
         {"avg_min_r2", std::isfinite(e.avg_min_r2) ? json(e.avg_min_r2) : json(nullptr)},
         {"detection_threshold", std::isfinite(e.detection_threshold)
                                     ? json(e.detection_threshold)
                                     : json(nullptr)}});
  }
  return json{{"entries", entries},
              {"order_by_auc_noise", table.order_by_auc_noise},
              {"order_by_detection_threshold", table.order_by_detection_threshold}};
}

inline std::string curve_csv(const powerbench::PowerCurve& curve) {
  std::string out = "r2,power,mc_se\n";
  for (std::size_t i = 0; i < curve.r2.size(); ++i)
    out += util::format_double(curve.r2[i]) + "," +
           util::format_double(curve.power[i]) + "," +
           util::format_double(curve.mc_se[i]) + "\n";
  return out;
}

inline std::string runtime_csv(const std::vector<powerbench::RuntimeRow>& rows) {
  std::string out =
      "statistic,n,input,reps,mean_seconds,sd_seconds,resolution_warning\n";
  for (const auto& r : rows)
    out += r.statistic + "," + std::to_string(r.n) + "," +
           powerbench::runtime_input_name(r.input) + "," + std::to_string(r.reps) +
           "," + util::format_double(r.mean_seconds) + "," +
           util::format_double(r.sd_seconds) + "," +
           (r.resolution_warning ? "1" : "0") + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Subcommand implementations.

namespace detail {

struct EquitabilityFlags {
  std::string stats = "mic_e";
  std::string model = "E_fX[Ny]";
  int levels = -1;
  int reps = -1;
  int n = -1;
  std::string quantiles = "0.05,0.95";
  int y_points = 201;
  std::string aggregation = "worst-case";
  std::string suite = "equitability";
};

inline equitability::EquitabilityDesign make_equit_design(
    const EquitabilityFlags& flags, const CommonOptions& common) {
  equitability::EquitabilityDesign design;
  int levels = flags.levels > 0 ? flags.levels : (common.desk() ? 11 : 41);
  design.grid = datagen::NoiseGrid::equitability(levels);
  design.reps = flags.reps > 0 ? flags.reps : (common.desk() ? 100 : 500);
  design.n = flags.n > 0 ? flags.n : 500;
  auto q = parse_double_list(flags.quantiles);
  if (q.size() != 2)
    throw Error(Error::Kind::usage, "--quantiles needs lo,hi");
  design.quantile_lo = q[0];
  design.quantile_hi = q[1];
  design.model = datagen::parse_model(flags.model);
  design.suite_name = flags.suite;
  return design;
}

struct PowerFlags {
  std::string stats = "tic_e";
  int levels = -1;
  int reps = -1;
  int n = -1;
  double level = 0.05;
  std::string null_mechanism = "permute";
};

inline powerbench::PowerDesign make_power_design(const PowerFlags& flags,
                                                 const CommonOptions& common) {
  powerbench::PowerDesign design;
  design.n = flags.n > 0 ? flags.n : (common.desk() ? 100 : 500);
  design.reps = flags.reps > 0 ? flags.reps : (common.desk() ? 200 : 1000);
  int levels = flags.levels > 0 ? flags.levels : (common.desk() ? 10 : 100);
  design.grid = datagen::NoiseGrid::power(levels);
  design.level = flags.level;
  if (flags.null_mechanism == "permute")
    design.null_mechanism = powerbench::NullMechanism::permute;
  else if (flags.null_mechanism == "resample")
    design.null_mechanism = powerbench::NullMechanism::resample;
  else
    throw Error(Error::Kind::usage, "--null must be permute or resample");
  return design;
}

inline json equit_design_json(const equitability::EquitabilityDesign& d) {
  return json{{"suite", d.suite_name},
              {"model", d.model.label()},
              {"levels", d.grid.r2_values.size()},
              {"reps", d.reps},
              {"n", d.n},
              {"quantiles", {d.quantile_lo, d.quantile_hi}}};
}

inline json power_design_json(const powerbench::PowerDesign& d) {
  return json{{"suite", d.suite_name},
              {"model", d.model.label()},
              {"levels", d.grid.r2_values.size()},
              {"reps", d.reps},
              {"n", d.n},
              {"level", d.level},
              {"null", d.null_mechanism == powerbench::NullMechanism::permute
                           ? "permute"
                           : "resample"}};
}

}  // namespace detail

inline int cmd_compute(const std::string& input, const std::string& stats,
                       bool as_json, const CommonOptions& common,
                       std::istream& stdin_stream, std::ostream& out,
                       std::ostream& err) {
  auto specs = detail::parse_stat_list(stats);
  core::Sample sample = [&] {
    if (input == "-") return detail::read_pairs(stdin_stream);
    std::ifstream f(input);
    if (!f) throw Error(Error::Kind::io_error, "cannot open " + input);
    return detail::read_pairs(f);
  }();

  json scores = json::object();
  bool failed = false;
  auto t0 = std::chrono::steady_clock::now();
  for (const auto& spec : specs) {
    registry::StatContext ctx;
    ctx.seed = common.seed;
    try {
      double v = registry::evaluate(spec.id, sample, spec.params, ctx);
      scores[spec.display()] = v;
      if (!as_json)
        out << spec.display() << "\t" << util::format_double(v) << "\n";
    } catch (const Error& e) {
      failed = true;
      scores[spec.display()] = nullptr;
      err << "error [" << spec.display() << "]: " << e.what() << "\n";
    }
  }
  double elapsed = std::chrono::duration<double>(
                       std::chrono::steady_clock::now() - t0).count();
  if (as_json) {
    json j{{"n", sample.n()}, {"elapsed_seconds", elapsed}, {"scores", scores}};
    json p = json::object();
    for (const auto& spec : specs) p[spec.display()] = detail::params_json(spec.params);
    j["params"] = p;
    out << j.dump(2) << "\n";
  } else {
    out << "# n=" << sample.n() << " elapsed_seconds=" << util::format_double(elapsed)
        << "\n";
  }
  return failed ? 2 : 0;
}

inline int cmd_gen(const std::string& function_id, const std::string& model_text,
                   int n, double r2, double sigma_x, double sigma_y,
                   const std::string& out_file, const std::string& list_suite,
                   const CommonOptions& common, std::ostream& out) {
  auto model = datagen::parse_model(model_text);
  if (!list_suite.empty()) {
    json fns = json::array();
    for (const auto& f : datagen::suite(list_suite, model))
      fns.push_back({{"id", f.id},
                     {"domain", {f.lo, f.hi}},
                     {"excluded_under_xnoise", f.excluded_under_xnoise},
                     {"circle", f.is_circle}});
    out << json{{"suite", list_suite}, {"model", model.label()},
                {"functions", fns}}
               .dump(2)
        << "\n";
    return 0;
  }
  // function ids are unique across the two suites with identical overlaps
  std::vector<datagen::FunctionSpec> universe = datagen::equitability_functions();
  for (auto& f : datagen::power_functions()) {
    bool seen = false;
    for (const auto& g : universe)
      if (g.id == f.id) seen = true;
    if (!seen) universe.push_back(std::move(f));
  }
  const auto& fn = datagen::find_function(universe, function_id);
  datagen::RelationshipInstance inst;
  if (r2 >= 0.0) {
    inst = datagen::instance_for_r2(fn, model, r2);
  } else {
    inst.function = fn;
    inst.model = model;
    inst.sigma_x = model.has_x_noise() ? sigma_x : 0.0;
    inst.sigma_y = model.has_y_noise() ? sigma_y : 0.0;
  }
  auto sample = datagen::sample(inst, n, common.seed);
  std::string csv = "x,y\n";
  for (int i = 0; i < n; ++i)
    csv += util::format_double(sample.xs[i]) + "," +
           util::format_double(sample.ys[i]) + "\n";
  if (out_file.empty() || out_file == "-") {
    out << csv;
  } else {
    io::write_file(out_file, csv);
  }
  return 0;
}

inline int cmd_equitability(const detail::EquitabilityFlags& flags,
                            const CommonOptions& common, std::ostream& out) {
  auto design = detail::make_equit_design(flags, common);
  auto specs = detail::parse_stat_list(flags.stats);
  auto aggregation = flags.aggregation == "average"
                         ? equitability::Aggregation::average
                         : equitability::Aggregation::worst_case;
  std::filesystem::path dir(common.out_dir);
  io::ensure_dir(dir);

  json stats_manifest = json::array();
  for (const auto& spec : specs) {
    auto archive = equitability::estimate_scores(
        equitability::scorer_for(spec), spec.display(), design, common.seed,
        common.resolved_workers());
    auto env = equitability::build_envelope(archive);
    auto report =
        equitability::equitability_report(env, spec.display(), flags.y_points);
    auto surface = equitability::power_surface(archive, 0.05, aggregation);
    std::string tag = detail::file_safe(spec.display());
    io::write_file(dir / ("archive_" + tag + ".csv"), archive_csv(archive));
    io::write_file(dir / ("envelope_" + tag + ".json"),
                   envelope_json(env, archive).dump(2) + "\n");
    io::write_file(dir / ("report_" + tag + ".json"),
                   report_json(report).dump(2) + "\n");
    io::write_file(dir / ("envelope_" + tag + ".svg"),
                   envelope_svg(env, report, spec.display()));
    io::write_file(dir / ("surface_" + tag + ".json"),
                   surface_json(surface).dump(2) + "\n");
    io::write_file(dir / ("surface_" + tag + ".svg"),
                   surface_svg(surface, spec.display()));
    stats_manifest.push_back(detail::stat_spec_json(spec));
    out << spec.display() << ": worst-case diameter "
        << util::format_double(report.worst_diameter) << ", average "
        << util::format_double(report.average_diameter) << "\n";
  }
  write_manifest(dir, "equitability",
                 json{{"design", detail::equit_design_json(design)},
                      {"statistics", stats_manifest},
                      {"seed", common.seed},
                      {"scale", common.scale},
                      {"workers", common.resolved_workers()},
                      {"y_points", flags.y_points},
                      {"aggregation", flags.aggregation},
                      {"desk_factors",
                       "desk scale reduces the 41-level/500-rep design to 11 "
                       "levels and 100 reps"}});
  return 0;
}

inline int cmd_power(const detail::PowerFlags& flags, const CommonOptions& common,
                     std::ostream& out) {
  auto design = detail::make_power_design(flags, common);
  auto specs = detail::parse_stat_list(flags.stats);
  std::filesystem::path dir(common.out_dir);
  io::ensure_dir(dir);

  std::vector<powerbench::StatisticPowerResult> results;
  json summaries = json::object();
  for (const auto& spec : specs) {
    auto result = powerbench::run_power(spec, design, common.seed,
                                        common.resolved_workers());
    std::string tag = detail::file_safe(spec.display());
    json per_rel = json::object();
    for (const auto& curve : result.curves) {
      io::write_file(dir / ("power_" + tag + "_" + curve.relationship + ".csv"),
                     curve_csv(curve));
      per_rel[curve.relationship] = summary_json(result.summaries.at(curve.relationship));
    }
    io::write_file(dir / ("curves_" + tag + ".svg"),
                   curves_svg(result.curves, spec.display()));
    summaries[spec.display()] = per_rel;
    results.push_back(std::move(result));
  }
  auto ranking = powerbench::rank_methods(results);
  io::write_file(dir / "ranking.json", ranking_json(ranking).dump(2) + "\n");
  io::write_file(dir / "summaries.json", summaries.dump(2) + "\n");
  json stats_manifest = json::array();
  for (const auto& spec : specs) stats_manifest.push_back(detail::stat_spec_json(spec));
  write_manifest(dir, "power",
                 json{{"design", detail::power_design_json(design)},
                      {"statistics", stats_manifest},
                      {"seed", common.seed},
                      {"scale", common.scale},
                      {"workers", common.resolved_workers()},
                      {"desk_factors",
                       "desk scale reduces the 100-level/1000-rep n=500 design "
                       "to 10 levels, 200 reps, n=100"}});
  for (const auto& e : ranking.entries)
    out << e.statistic << ": avg AUC " << util::format_double(e.avg_auc_noise)
        << ", detection threshold "
        << util::format_double(e.detection_threshold) << "\n";
  return 0;
}

inline int cmd_sweep(const std::string& stat, const std::string& param,
                     const std::string& values, const detail::PowerFlags& flags,
                     const CommonOptions& common, std::ostream& out) {
  auto design = detail::make_power_design(flags, common);
  auto base = detail::parse_stat_spec(stat);
  auto vals = detail::parse_double_list(values);
  auto sweep = powerbench::parameter_sweep(base, param, vals, design, common.seed,
                                           common.resolved_workers());
  std::filesystem::path dir(common.out_dir);
  io::ensure_dir(dir);
  json points = json::array();
  for (const auto& pt : sweep.points) {
    json rels = json::object();
    for (const auto& [rel, s] : pt.summaries) rels[rel] = summary_json(s);
    points.push_back({{"value", pt.param_value},
                      {"avg_auc_noise", pt.avg_auc_noise},
                      {"worst_auc_noise", pt.worst_auc_noise},
                      {"avg_min_r2", std::isfinite(pt.avg_min_r2)
                                         ? json(pt.avg_min_r2)
                                         : json(nullptr)},
                      {"relationships", rels}});
  }
  json j{{"statistic", sweep.statistic},
         {"param", sweep.param_name},
         {"points", points},
         {"optimal_by_auc", sweep.optimal_by_auc},
         {"optimal_by_min_r2", sweep.optimal_by_min_r2}};
  io::write_file(dir / "sweep.json", j.dump(2) + "\n");
  io::write_file(dir / "sweep.svg", sweep_svg(sweep, sweep.statistic));
  write_manifest(dir, "sweep",
                 json{{"design", detail::power_design_json(design)},
                      {"statistic", stat},
                      {"param", param},
                      {"values", vals},
                      {"seed", common.seed},
                      {"scale", common.scale},
                      {"workers", common.resolved_workers()}});
  out << "optimal " << param << " by AUC: "
      << util::format_double(sweep.optimal_by_auc) << "\n";
  return 0;
}

inline int cmd_runtime(const std::string& stats, const std::string& ns_text,
                       int reps, const CommonOptions& common, std::ostream& out) {
  auto specs = detail::parse_stat_list(stats);
  auto ns = detail::parse_int_list(ns_text);
  auto rows = powerbench::runtime_bench(specs, ns, reps, common.seed);
  std::filesystem::path dir(common.out_dir);
  io::ensure_dir(dir);
  io::write_file(dir / "runtime.csv", runtime_csv(rows));
  json stats_manifest = json::array();
  for (const auto& spec : specs) stats_manifest.push_back(detail::stat_spec_json(spec));
  write_manifest(dir, "runtime",
                 json{{"statistics", stats_manifest},
                      {"ns", ns},
                      {"reps", reps},
                      {"seed", common.seed},
                      {"protocol", "5 warmup calls excluded; single-threaded"}});
  out << runtime_csv(rows);
  return 0;
}

inline int cmd_pareto(const std::string& stat, const std::string& param,
                      const std::string& values,
                      const detail::PowerFlags& power_flags,
                      const detail::EquitabilityFlags& equit_flags,
                      const CommonOptions& common, std::ostream& out) {
  auto power_design = detail::make_power_design(power_flags, common);
  auto equit_design = detail::make_equit_design(equit_flags, common);
  auto base = detail::parse_stat_spec(stat);
  auto vals = detail::parse_double_list(values);
  if (vals.empty()) throw Error(Error::Kind::usage, "--values is empty");

  std::vector<powerbench::ParetoPoint> points;
  for (double v : vals) {
    registry::StatSpec spec = base;
    spec.params[param] = v;
    spec.label = base.id + "(" + param + "=" + util::format_double(v) + ")";
    auto power = powerbench::run_power(spec, power_design, common.seed,
                                       common.resolved_workers());
    double avg = 0.0;
    for (const auto& [rel, s] : power.summaries)
      avg += s.auc_noise / static_cast<double>(power.summaries.size());
    auto archive = equitability::estimate_scores(
        equitability::scorer_for(spec), spec.display(), equit_design,
        common.seed, common.resolved_workers());
    auto report = equitability::equitability_report(
        equitability::build_envelope(archive), spec.display());
    points.push_back({spec.display(), avg, report.worst_diameter});
  }
  auto front = powerbench::pareto_front(points);
  std::filesystem::path dir(common.out_dir);
  io::ensure_dir(dir);
  json jpoints = json::array();
  for (const auto& p : points) {
    bool on_front = false;
    for (const auto& f : front) on_front |= f.label == p.label;
    jpoints.push_back({{"label", p.label},
                       {"avg_power", p.avg_power},
                       {"worst_case_equitability", p.worst_case_equitability},
                       {"on_front", on_front}});
  }
  json jfront = json::array();
  for (const auto& f : front) jfront.push_back(f.label);
  io::write_file(dir / "pareto.json",
                 json{{"points", jpoints}, {"front", jfront}}.dump(2) + "\n");
  io::write_file(dir / "pareto.svg", pareto_svg(points, front, base.id));
  write_manifest(dir, "pareto",
                 json{{"statistic", stat},
                      {"param", param},
                      {"values", vals},
                      {"power_design", detail::power_design_json(power_design)},
                      {"equitability_design", detail::equit_design_json(equit_design)},
                      {"seed", common.seed},
                      {"scale", common.scale},
                      {"workers", common.resolved_workers()}});
  out << "front size: " << front.size() << " of " << points.size() << " points\n";
  return 0;
}

inline int cmd_scan(const std::string& input, scan::ScanParams params,
                    const scan::LoadOptions& load_options,
                    const CommonOptions& common, std::ostream& out) {
  params.workers = common.resolved_workers();
  auto matrix = scan::load_matrix(std::filesystem::path(input), load_options);
  auto report = scan::scan_matrix(matrix, params);
  std::filesystem::path dir(common.out_dir);
  io::ensure_dir(dir);
  io::write_file(dir / "report.csv", scan::report_csv(report));
  json excluded = json::array();
  for (const auto& e : report.excluded)
    excluded.push_back({{"pair", e.col_i + ":" + e.col_j},
                        {"n_effective", e.n_effective}});
  json meta{{"params",
             json{{"tic_alpha", report.params.tic_alpha},
                  {"tic_c", report.params.tic_c},
                  {"mic_alpha", report.params.mic_alpha},
                  {"mic_c", report.params.mic_c},
                  {"fdr_q", report.params.fdr_q},
                  {"null_reps", report.params.null_reps},
                  {"seed", report.params.seed},
                  {"min_pairs", report.params.min_pairs}}},
            {"columns", matrix.names},
            {"rows", matrix.rows},
            {"warnings", matrix.warnings},
            {"excluded", excluded},
            {"null_table_digests", report.null_table_digests}};
  io::write_file(dir / "scan_meta.json", meta.dump(2) + "\n");
  write_manifest(dir, "scan",
                 json{{"input", input},
                      {"params", meta["params"]},
                      {"seed", common.seed},
                      {"workers", common.resolved_workers()}});
  int significant = 0;
  for (const auto& r : report.pairs)
    if (r.significant) ++significant;
  out << report.pairs.size() << " pairs scanned, " << significant
      << " significant at q <= " << util::format_double(report.params.fdr_q)
      << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// Argument wiring.

inline int run(std::vector<std::string> args, std::istream& stdin_stream,
               std::ostream& out, std::ostream& err) {
  CLI::App app{"depbench: dependence-measure estimators and benchmarks"};
  app.require_subcommand(1);

  CommonOptions common;
  app.add_option("--seed", common.seed, "master seed")->capture_default_str();
  app.add_option("--out", common.out_dir, "output directory")
      ->capture_default_str();
  app.add_option("--workers", common.workers,
                 "worker threads (0 = host parallelism)")
      ->capture_default_str();
  app.add_option("--scale", common.scale, "benchmark scale preset")
      ->check(CLI::IsMember({"desk", "paper"}))
      ->capture_default_str();

  // config file: flat key=value lines; command-line flags win
  app.set_config("--config", "", "flat key=value config file");

  auto* compute = app.add_subcommand("compute", "score statistics on x,y pairs");
  compute->fallthrough();
  std::string compute_input = "-";
  std::string compute_stats;
  bool compute_json = false;
  compute->add_option("--input", compute_input, "CSV file of x,y pairs or - for stdin")
      ->capture_default_str();
  compute->add_option("--stats", compute_stats,
                      "comma-separated statistic specs, e.g. mic_e:alpha=0.6,pearson")
      ->required();
  compute->add_flag("--json", compute_json, "emit a JSON object");

  auto* gen = app.add_subcommand("gen", "generate a sample from a relationship");
  gen->fallthrough();
  std::string gen_function, gen_model = "U_X[Ny]", gen_out, gen_list_suite;
  int gen_n = 500;
  double gen_r2 = -1.0, gen_sx = 0.0, gen_sy = 0.0;
  gen->add_option("--function", gen_function, "function id, e.g. line");
  gen->add_option("--list-suite", gen_list_suite,
                  "emit the suite manifest as JSON instead of sampling");
  gen->add_option("--model", gen_model, "sampling model, e.g. E_fX[Ny]")
      ->capture_default_str();
  gen->add_option("--n", gen_n, "sample size")->capture_default_str();
  gen->add_option("--r2", gen_r2, "target population R^2 (overrides sigmas)");
  gen->add_option("--sigma-x", gen_sx, "x noise amplitude in sd units");
  gen->add_option("--sigma-y", gen_sy, "y noise amplitude in sd units");
  gen->add_option("--out-file", gen_out, "write CSV here instead of stdout");

  auto* equit = app.add_subcommand("equitability",
                                   "reliable envelopes and interpretable intervals");
  equit->fallthrough();
  detail::EquitabilityFlags eq_flags;
  equit->add_option("--stats", eq_flags.stats, "statistic specs")
      ->capture_default_str();
  equit->add_option("--model", eq_flags.model, "sampling model")
      ->capture_default_str();
  equit->add_option("--levels", eq_flags.levels, "R^2 grid size (default 11 desk / 41 paper)");
  equit->add_option("--reps", eq_flags.reps, "replicates per cell (default 100 desk / 500 paper)");
  equit->add_option("--n", eq_flags.n, "sample size (default 500)");
  equit->add_option("--quantiles", eq_flags.quantiles, "envelope quantile pair")
      ->capture_default_str();
  equit->add_option("--y-points", eq_flags.y_points, "interpretable-interval y grid")
      ->capture_default_str();
  equit->add_option("--aggregation", eq_flags.aggregation,
                    "power-surface aggregation over alternatives")
      ->check(CLI::IsMember({"worst-case", "average"}))
      ->capture_default_str();

  auto* power = app.add_subcommand("power", "power against independence");
  power->fallthrough();
  detail::PowerFlags pw_flags;
  power->add_option("--stats", pw_flags.stats, "statistic specs")
      ->capture_default_str();
  power->add_option("--levels", pw_flags.levels, "noise levels (default 10 desk / 100 paper)");
  power->add_option("--reps", pw_flags.reps, "replicates per hypothesis (default 200 desk / 1000 paper)");
  power->add_option("--n", pw_flags.n, "sample size (default 100 desk / 500 paper)");
  power->add_option("--level", pw_flags.level, "test level alpha")
      ->capture_default_str();
  power->add_option("--null", pw_flags.null_mechanism,
                    "null mechanism: permute or resample")
      ->capture_default_str();

  auto* sweep = app.add_subcommand("sweep", "parameter sweep over a power design");
  sweep->fallthrough();
  std::string sweep_stat = "mic_e", sweep_param = "alpha", sweep_values;
  detail::PowerFlags sw_flags;
  sweep->add_option("--stat", sweep_stat, "base statistic spec")
      ->capture_default_str();
  sweep->add_option("--sweep-param", sweep_param, "parameter axis name")
      ->capture_default_str();
  sweep->add_option("--values", sweep_values, "comma-separated parameter values")
      ->required();
  sweep->add_option("--levels", sw_flags.levels, "noise levels");
  sweep->add_option("--reps", sw_flags.reps, "replicates per hypothesis");
  sweep->add_option("--n", sw_flags.n, "sample size");
  sweep->add_option("--level", sw_flags.level, "test level alpha")
      ->capture_default_str();
  sweep->add_option("--null", sw_flags.null_mechanism, "null mechanism")
      ->capture_default_str();

  auto* runtime = app.add_subcommand("runtime", "wall-clock benchmark");
  runtime->fallthrough();
  std::string rt_stats = "pearson,mic_e,tic_e";
  std::string rt_ns = "100,1000";
  int rt_reps = 100;
  runtime->add_option("--stats", rt_stats, "statistic specs")
      ->capture_default_str();
  runtime->add_option("--ns", rt_ns, "comma-separated sample sizes")
      ->capture_default_str();
  runtime->add_option("--reps", rt_reps, "timed calls per row")
      ->capture_default_str();

  auto* pareto = app.add_subcommand("pareto", "power-equitability front");
  pareto->fallthrough();
  std::string pa_stat = "mic_e", pa_param = "alpha", pa_values;
  detail::PowerFlags pa_power;
  detail::EquitabilityFlags pa_equit;
  pareto->add_option("--stat", pa_stat, "base statistic spec")
      ->capture_default_str();
  pareto->add_option("--sweep-param", pa_param, "parameter axis name")
      ->capture_default_str();
  pareto->add_option("--values", pa_values, "comma-separated parameter values")
      ->required();
  pareto->add_option("--power-n", pa_power.n, "power design sample size");
  pareto->add_option("--power-reps", pa_power.reps, "power design replicates");
  pareto->add_option("--power-levels", pa_power.levels, "power design levels");
  pareto->add_option("--equit-n", pa_equit.n, "equitability design sample size");
  pareto->add_option("--equit-reps", pa_equit.reps, "equitability design replicates");
  pareto->add_option("--equit-levels", pa_equit.levels, "equitability design levels");
  pareto->add_option("--equit-model", pa_equit.model, "equitability model")
      ->capture_default_str();

  auto* scan_cmd = app.add_subcommand("scan", "all-pairs TIC_e screen + MIC_e rank");
  scan_cmd->fallthrough();
  std::string scan_input;
  scan::ScanParams scan_params;
  scan::LoadOptions load_options;
  scan_cmd->add_option("--input", scan_input, "matrix CSV with header")->required();
  scan_cmd->add_option("--q", scan_params.fdr_q, "BH false-discovery level")
      ->capture_default_str();
  scan_cmd->add_option("--tic-alpha", scan_params.tic_alpha,
                       "screening alpha (0 = power preset)");
  scan_cmd->add_option("--tic-c", scan_params.tic_c, "screening c (0 = preset)");
  scan_cmd->add_option("--mic-alpha", scan_params.mic_alpha,
                       "ranking alpha (0 = equitability preset)");
  scan_cmd->add_option("--mic-c", scan_params.mic_c, "ranking c (0 = preset)");
  scan_cmd->add_option("--null-reps", scan_params.null_reps, "null-table size")
      ->capture_default_str();
  scan_cmd->add_option("--min-pairs", scan_params.min_pairs,
                       "minimum complete observations per pair")
      ->capture_default_str();
  scan_cmd->add_flag("--strict", load_options.strict,
                     "fail on non-numeric cells instead of skipping columns");

  std::vector<const char*> argv;
  std::string prog = "depbench";
  argv.push_back(prog.c_str());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    // help requests exit 0; every other parse problem is a usage error
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (compute->parsed())
      return cmd_compute(compute_input, compute_stats, compute_json, common,
                         stdin_stream, out, err);
    if (gen->parsed()) {
      if (gen_list_suite.empty() && gen_function.empty())
        throw Error(Error::Kind::usage, "gen needs --function or --list-suite");
      return cmd_gen(gen_function, gen_model, gen_n, gen_r2, gen_sx, gen_sy,
                     gen_out, gen_list_suite, common, out);
    }
    if (equit->parsed()) return cmd_equitability(eq_flags, common, out);
    if (power->parsed()) return cmd_power(pw_flags, common, out);
    if (sweep->parsed())
      return cmd_sweep(sweep_stat, sweep_param, sweep_values, sw_flags, common, out);
    if (runtime->parsed()) return cmd_runtime(rt_stats, rt_ns, rt_reps, common, out);
    if (pareto->parsed())
      return cmd_pareto(pa_stat, pa_param, pa_values, pa_power, pa_equit, common, out);
    if (scan_cmd->parsed()) {
      scan_params.seed = common.seed;
      return cmd_scan(scan_input, scan_params, load_options, common, out);
    }
    err << "no subcommand given\n";
    return 1;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return detail::exit_code_for(e);
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 3;
  }
}

inline int run_main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(std::move(args), std::cin, std::cout, std::cerr);
}

}  // namespace depbench::cli
