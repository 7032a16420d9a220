#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "depbench/core.hpp"
#include "depbench/errors.hpp"
#include "depbench/rng.hpp"
#include "depbench/util.hpp"

namespace depbench::datagen {

struct FunctionSpec {
  std::string id;
  std::function<double(double)> f;
  double lo = 0.0;
  double hi = 1.0;
  bool excluded_under_xnoise = false;
  bool is_circle = false;
};

enum class Marginal { even_curve, even_x, uniform_curve, uniform_x };
enum class NoisePlacement { y_only, x_and_y, x_only };

struct SamplingModel {
  Marginal marginal = Marginal::even_curve;
  NoisePlacement noise = NoisePlacement::y_only;

  bool has_x_noise() const { return noise != NoisePlacement::y_only; }
  bool has_y_noise() const { return noise != NoisePlacement::x_only; }

  int index() const {
    return static_cast<int>(marginal) * 3 + static_cast<int>(noise);
  }

  std::string label() const {
    static const char* margins[] = {"E_fX", "E_X", "U_fX", "U_X"};
    static const char* noises[] = {"Ny", "Nx,Ny", "Nx"};
    return std::string(margins[static_cast<int>(marginal)]) + "[" +
           noises[static_cast<int>(noise)] + "]";
  }
};

inline SamplingModel parse_model(const std::string& text) {
  auto open = text.find('[');
  auto close = text.find(']');
  if (open == std::string::npos || close == std::string::npos || close < open)
    throw Error(Error::Kind::parse_error,
                "model must look like E_fX[Ny]; got '" + text + "'");
  std::string m = text.substr(0, open);
  std::string nz = text.substr(open + 1, close - open - 1);
  SamplingModel model;
  if (m == "E_fX") model.marginal = Marginal::even_curve;
  else if (m == "E_X") model.marginal = Marginal::even_x;
  else if (m == "U_fX") model.marginal = Marginal::uniform_curve;
  else if (m == "U_X") model.marginal = Marginal::uniform_x;
  else
    throw Error(Error::Kind::parse_error, "unknown marginal '" + m + "'");
  if (nz == "Ny") model.noise = NoisePlacement::y_only;
  else if (nz == "Nx,Ny" || nz == "NxNy") model.noise = NoisePlacement::x_and_y;
  else if (nz == "Nx") model.noise = NoisePlacement::x_only;
  else
    throw Error(Error::Kind::parse_error, "unknown noise placement '" + nz + "'");
  return model;
}

// ---------------------------------------------------------------------------
// Function suites.

inline std::vector<FunctionSpec> equitability_functions() {
  const double pi = 3.14159265358979323846;
  std::vector<FunctionSpec> fns;
  auto add = [&](std::string id, double lo, double hi, bool excluded,
                 std::function<double(double)> f) {
    fns.push_back({std::move(id), std::move(f), lo, hi, excluded, false});
  };
  add("cosine_high_freq", 0, 1, false, [pi](double x) { return std::cos(14 * pi * x); });
  add("cosine_nonfourier_low", 0, 1, false, [pi](double x) { return std::cos(7 * pi * x); });
  add("cosine_varying_med", 0, 1, false, [pi](double x) { return std::sin(5 * pi * x * (1 + x)); });
  add("cubic", -1.3, 1.1, false, [](double x) { return 4 * x * x * x + x * x - 4 * x; });
  add("cubic_ystretched", -1.3, 1.1, false, [](double x) { return 41 * (4 * x * x * x + x * x - 4 * x); });
  add("exp_10x", 0, 10, true, [](double x) { return std::pow(10.0, x); });
  add("exp_2x", 0, 10, false, [](double x) { return std::pow(2.0, x); });
  add("l_shaped", 0, 1, true, [](double x) { return x <= 99.0 / 100.0 ? x / 99.0 : 1.0; });
  add("line", 0, 1, false, [](double x) { return x; });
  add("linper_high", 0, 1, false, [](double x) {
    return std::sin(10.6 * (2 * x - 1)) / 10.0 + 11.0 / 10.0 * (2 * x - 1);
  });
  add("linper_high2", 0, 1, false, [](double x) {
    return std::sin(10.6 * (2 * x - 1)) / 5.0 + 11.0 / 10.0 * (2 * x - 1);
  });
  add("linper_low", 0, 1, false, [](double x) {
    return std::sin(4 * (2 * x - 1)) / 5.0 + 11.0 / 10.0 * (2 * x - 1);
  });
  add("linper_med", 0, 1, false, [pi](double x) { return std::sin(10 * pi * x) + x; });
  add("lopsided_l", 0, 1, true, [](double x) {
    if (x < 1.0 / 200.0) return 200.0 * x;
    if (x < 1.0 / 100.0) return -198.0 * x + 199.0 / 100.0;
    return -x / 99.0 + 1.0 / 99.0;
  });
  add("parabola", -0.5, 0.5, false, [](double x) { return 4 * x * x; });
  add("sigmoid", 0, 1, true, [](double x) {
    if (x <= 49.0 / 100.0) return 0.0;
    if (x <= 51.0 / 100.0) return 50.0 * (x - 0.5) + 0.5;
    return 1.0;
  });
  add("sine_high_freq", 0, 1, false, [pi](double x) { return std::sin(16 * pi * x); });
  add("sine_low_freq", 0, 1, false, [pi](double x) { return std::sin(8 * pi * x); });
  add("sine_nonfourier_low", 0, 1, false, [pi](double x) { return std::sin(9 * pi * x); });
  add("sine_varying_med", 0, 1, false, [pi](double x) { return std::sin(6 * pi * x * (1 + x)); });
  add("spike", 0, 1, true, [](double x) {
    if (x < 1.0 / 20.0) return 20.0 * x;
    if (x < 1.0 / 10.0) return -18.0 * x + 19.0 / 10.0;
    return -x / 9.0 + 1.0 / 9.0;
  });
  return fns;
}

inline std::vector<FunctionSpec> power_functions() {
  const double pi = 3.14159265358979323846;
  std::vector<FunctionSpec> fns;
  auto add = [&](std::string id, double lo, double hi, bool circle,
                 std::function<double(double)> f) {
    fns.push_back({std::move(id), std::move(f), lo, hi, false, circle});
  };
  add("line", 0, 1, false, [](double x) { return x; });
  add("quadratic", -0.5, 0.5, false, [](double x) { return 4 * x * x; });
  add("cubic_centered", 0, 1, false, [](double x) {
    double t = x - 1.0 / 3.0;
    return 128 * t * t * t - 48 * t * t * t - 12 * t;
  });
  add("sine_8periods", 0, 1, false, [pi](double x) { return std::sin(16 * pi * x); });
  add("sine_2periods", 0, 1, false, [pi](double x) { return std::sin(4 * pi * x); });
  add("fourth_root", 0, 1, false, [](double x) { return std::pow(std::max(x, 0.0), 0.25); });
  add("circle", 0, 1, true, [](double x) {
    double t = 2 * x - 1;
    return std::sqrt(std::max(0.0, 1.0 - t * t));
  });
  add("step", 0, 1, false, [](double x) { return x <= 0.5 ? 0.0 : 1.0; });
  return fns;
}

// Functions 6, 8, 14, 16 and 21 of the equitability suite leave the suite
// whenever noise touches the independent variable or points are not sampled
// along the curve.
inline std::vector<FunctionSpec> suite(const std::string& name,
                                       const SamplingModel& model) {
  if (name == "power") return power_functions();
  if (name != "equitability")
    throw Error(Error::Kind::unknown_suite, "unknown suite '" + name + "'");
  auto fns = equitability_functions();
  bool curve_marginal = model.marginal == Marginal::even_curve ||
                        model.marginal == Marginal::uniform_curve;
  if (model.has_x_noise() || !curve_marginal) {
    std::vector<FunctionSpec> kept;
    for (auto& f : fns)
      if (!f.excluded_under_xnoise) kept.push_back(std::move(f));
    return kept;
  }
  return fns;
}

inline const FunctionSpec& find_function(const std::vector<FunctionSpec>& fns,
                                         const std::string& id) {
  for (const auto& f : fns)
    if (f.id == id) return f;
  throw Error(Error::Kind::unknown_suite, "unknown function id '" + id + "'");
}

// ---------------------------------------------------------------------------
// Cached per-function geometry: arc-length table and marginal moments.

namespace detail {

constexpr int kArcKnots = 100000;
constexpr int kMomentKnots = 1000000;

struct CurveInfo {
  std::vector<double> arc_x;    // knot positions
  std::vector<double> arc_cum;  // cumulative arc length at knots
  double arc_total = 0.0;
  // moments of X and f(X) under the x-uniform and arc-length marginals
  double sd_x_flat = 1.0, sd_y_flat = 1.0, var_y_flat = 1.0;
  double sd_x_arc = 1.0, sd_y_arc = 1.0, var_y_arc = 1.0;
  // circle only: second moment of the full two-branch y marginal
  double sd_y_full = 1.0;
};

inline CurveInfo build_curve_info(const FunctionSpec& fn) {
  CurveInfo info;
  const int k = kArcKnots;
  info.arc_x.resize(k + 1);
  info.arc_cum.resize(k + 1);
  double prev_y = fn.f(fn.lo);
  info.arc_x[0] = fn.lo;
  info.arc_cum[0] = 0.0;
  double step = (fn.hi - fn.lo) / k;
  for (int i = 1; i <= k; ++i) {
    double x = fn.lo + i * step;
    double y = fn.f(x);
    // a jump discontinuity shows up as a near-vertical segment whose length
    // approaches the jump height, which is exactly what we want
    info.arc_cum[i] =
        info.arc_cum[i - 1] + std::sqrt(step * step + (y - prev_y) * (y - prev_y));
    info.arc_x[i] = x;
    prev_y = y;
  }
  info.arc_total = info.arc_cum.back();

  auto moments = [&](bool arc_weighted) {
    double sw = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, syy = 0.0;
    const int m = arc_weighted ? kArcKnots : kMomentKnots;
    for (int i = 0; i < m; ++i) {
      double w, x;
      if (arc_weighted) {
        w = info.arc_cum[i + 1] - info.arc_cum[i];
        x = 0.5 * (info.arc_x[i] + info.arc_x[i + 1]);
      } else {
        w = 1.0;
        x = fn.lo + (i + 0.5) * (fn.hi - fn.lo) / m;
      }
      double y = fn.f(x);
      sw += w;
      sx += w * x;
      sy += w * y;
      sxx += w * x * x;
      syy += w * y * y;
    }
    double mx = sx / sw, my = sy / sw;
    double vx = std::max(0.0, sxx / sw - mx * mx);
    double vy = std::max(0.0, syy / sw - my * my);
    return std::array<double, 4>{std::sqrt(vx), std::sqrt(vy), vy,
                                 syy / sw};
  };
  auto flat = moments(false);
  info.sd_x_flat = flat[0];
  info.sd_y_flat = flat[1];
  info.var_y_flat = flat[2];
  auto arc = moments(true);
  info.sd_x_arc = arc[0];
  info.sd_y_arc = arc[1];
  info.var_y_arc = arc[2];
  if (fn.is_circle) {
    // two symmetric branches: mean 0, variance = E[f^2]
    info.sd_y_full = std::sqrt(flat[3]);
  } else {
    info.sd_y_full = info.sd_y_flat;
  }
  return info;
}

inline const CurveInfo& curve_info(const FunctionSpec& fn) {
  static std::mutex mutex;
  static std::map<std::string, std::unique_ptr<CurveInfo>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(fn.id);
  if (it == cache.end()) {
    it = cache.emplace(fn.id, std::make_unique<CurveInfo>(build_curve_info(fn)))
             .first;
  }
  return *it->second;
}

inline bool curve_marginal(Marginal m) {
  return m == Marginal::even_curve || m == Marginal::uniform_curve;
}

inline double invert_arc(const CurveInfo& info, double target) {
  if (target <= 0.0) return info.arc_x.front();
  if (target >= info.arc_total) return info.arc_x.back();
  auto it = std::upper_bound(info.arc_cum.begin(), info.arc_cum.end(), target);
  std::size_t j = static_cast<std::size_t>(it - info.arc_cum.begin()) - 1;
  double seg = info.arc_cum[j + 1] - info.arc_cum[j];
  if (seg <= 0.0) return info.arc_x[j];
  double frac = (target - info.arc_cum[j]) / seg;
  return info.arc_x[j] + frac * (info.arc_x[j + 1] - info.arc_x[j]);
}

inline double sd_x_for(const FunctionSpec& fn, Marginal m) {
  const auto& info = curve_info(fn);
  return curve_marginal(m) ? info.sd_x_arc : info.sd_x_flat;
}

inline double sd_y_noise_scale(const FunctionSpec& fn, Marginal m) {
  const auto& info = curve_info(fn);
  if (fn.is_circle) return info.sd_y_full;
  return curve_marginal(m) ? info.sd_y_arc : info.sd_y_flat;
}

inline double var_f(const FunctionSpec& fn, Marginal m) {
  const auto& info = curve_info(fn);
  return curve_marginal(m) ? info.var_y_arc : info.var_y_flat;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Noise levels and relationship instances.

struct NoiseGrid {
  std::vector<double> r2_values;

  // 41 evenly spaced R^2 values across [0,1] by default.
  static NoiseGrid equitability(int levels = 41) {
    if (levels < 2) throw Error(Error::Kind::usage, "need at least 2 levels");
    NoiseGrid g;
    for (int i = 0; i < levels; ++i)
      g.r2_values.push_back(static_cast<double>(i) / (levels - 1));
    return g;
  }

  // 100 levels from R^2 = 1 down to 10^-2.5, evenly spaced in log10(R^2).
  static NoiseGrid power(int levels = 100) {
    if (levels < 2) throw Error(Error::Kind::usage, "need at least 2 levels");
    NoiseGrid g;
    for (int i = 0; i < levels; ++i) {
      double log_r2 = -2.5 * static_cast<double>(i) / (levels - 1);
      g.r2_values.push_back(std::pow(10.0, log_r2));
    }
    return g;
  }
};

// sigma(R^2) = sqrt(var(f(X)) (1/R^2 - 1)), in raw units of f; only valid
// when noise enters the dependent coordinate alone.
inline double sigma_for_r2(const FunctionSpec& fn, Marginal marginal, double r2) {
  if (r2 <= 0.0)
    throw Error(Error::Kind::infinite_noise,
                "R^2 = 0 needs infinite noise; use the pure-noise instance");
  if (r2 > 1.0)
    throw Error(Error::Kind::usage, "R^2 must lie in (0,1]");
  if (r2 == 1.0) return 0.0;
  return std::sqrt(detail::var_f(fn, marginal) * (1.0 / r2 - 1.0));
}

struct RelationshipInstance {
  FunctionSpec function;
  SamplingModel model;
  // noise amplitudes in per-axis standard-deviation units
  double sigma_x = 0.0;
  double sigma_y = 0.0;
  std::optional<double> target_r2;
  bool pure_noise = false;
  mutable std::optional<double> cached_population_r2;
};

inline std::pair<double, double> noise_ratios(NoisePlacement p) {
  switch (p) {
    case NoisePlacement::y_only: return {0.0, 1.0};
    case NoisePlacement::x_and_y: return {1.0, 1.0};
    case NoisePlacement::x_only: return {1.0, 0.0};
  }
  throw Error(Error::Kind::internal, "bad placement");
}

// Binary search for the single noise amplitude (in sd units, split across
// axes by the placement ratios) reaching a target population R^2, using the
// sample R^2 of one large common-random-numbers sample.
struct CalibrationResult {
  double sigma_x = 0.0;
  double sigma_y = 0.0;
  double achieved_r2 = 1.0;
  int steps = 0;
};

inline CalibrationResult calibrate_noise(const FunctionSpec& fn,
                                         const SamplingModel& model,
                                         double target_r2, double tol = 1e-3,
                                         int n_cal = 100000,
                                         int max_steps = 60) {
  if (target_r2 <= 0.0)
    throw Error(Error::Kind::infinite_noise, "cannot calibrate to R^2 = 0");
  if (target_r2 > 1.0)
    throw Error(Error::Kind::usage, "target R^2 must lie in (0,1]");
  auto [rx, ry] = noise_ratios(model.noise);
  if (target_r2 == 1.0) return {0.0, 0.0, 1.0, 0};

  const auto& info = detail::curve_info(fn);
  double sdx = detail::sd_x_for(fn, model.marginal);
  double sdy = detail::sd_y_noise_scale(fn, model.marginal);

  // Common random numbers keep R^2(a) smooth and monotone in a.
  rng::Xoshiro256 gen(rng::derive_seed(0xCA11B8A7E5EEDULL, fn.id,
                                       static_cast<std::uint64_t>(model.index())));
  std::vector<double> x(n_cal), z1(n_cal), z2(n_cal), fx(n_cal);
  bool curve = detail::curve_marginal(model.marginal);
  for (int i = 0; i < n_cal; ++i) {
    double t = (i + 0.5) / n_cal;
    x[i] = curve ? detail::invert_arc(info, t * info.arc_total)
                 : fn.lo + t * (fn.hi - fn.lo);
    z1[i] = gen.normal();
    z2[i] = gen.normal();
    fx[i] = fn.f(x[i]);
  }

  auto achieved = [&](double a) {
    std::vector<double> u(n_cal), v(n_cal);
    for (int i = 0; i < n_cal; ++i) {
      u[i] = fn.f(x[i] + a * rx * sdx * z1[i]);
      v[i] = fx[i] + a * ry * sdy * z2[i];
    }
    double c = util::correlation(u, v);
    return c * c;
  };

  double lo = 0.0, hi = 10.0;
  double g_hi = achieved(hi);
  std::vector<std::pair<double, double>> trace{{lo, 1.0}, {hi, g_hi}};
  if (g_hi > target_r2)
    throw Error(Error::Kind::calibration_failure,
                "R^2 at maximum amplitude is " + util::format_double(g_hi) +
                    " > target " + util::format_double(target_r2));
  CalibrationResult result;
  double a = hi, g = g_hi;
  for (int step = 1; step <= max_steps; ++step) {
    a = 0.5 * (lo + hi);
    g = achieved(a);
    trace.emplace_back(a, g);
    result.steps = step;
    if (std::abs(g - target_r2) < tol) break;
    if (g > target_r2) lo = a; else hi = a;
    if (hi - lo < 1e-12) break;
  }
  // monotonicity assertion over the search trace: with common random
  // numbers the achieved R^2 must fall as the amplitude grows; wiggle below
  // the calibration tolerance is Monte-Carlo dust and cannot affect the
  // bisection, so only larger reversals fail
  std::sort(trace.begin(), trace.end());
  for (std::size_t i = 1; i < trace.size(); ++i) {
    if (trace[i].first > trace[i - 1].first &&
        trace[i].second >= trace[i - 1].second + tol)
      throw Error(Error::Kind::calibration_failure,
                  "achieved R^2 is not strictly decreasing in the amplitude");
  }
  if (std::abs(g - target_r2) >= tol)
    throw Error(Error::Kind::calibration_failure,
                "calibration did not reach target " +
                    util::format_double(target_r2) + "; achieved " +
                    util::format_double(g));
  result.sigma_x = a * rx;
  result.sigma_y = a * ry;
  result.achieved_r2 = g;
  return result;
}

inline RelationshipInstance instance_for_r2(const FunctionSpec& fn,
                                            const SamplingModel& model,
                                            double r2) {
  RelationshipInstance inst;
  inst.function = fn;
  inst.model = model;
  inst.target_r2 = r2;
  if (r2 <= 0.0) {
    inst.pure_noise = true;
    return inst;
  }
  if (r2 >= 1.0) return inst;
  if (model.noise == NoisePlacement::y_only) {
    double raw = sigma_for_r2(fn, model.marginal, r2);
    inst.sigma_y = raw / detail::sd_y_noise_scale(fn, model.marginal);
  } else {
    auto cal = calibrate_noise(fn, model, r2);
    inst.sigma_x = cal.sigma_x;
    inst.sigma_y = cal.sigma_y;
  }
  return inst;
}

// Draw a sample. The uniform/normal stream is consumed in a fixed order
// (base X, circle branch signs, x noise, y noise), so a seed pins the data.
inline core::Sample sample(const RelationshipInstance& inst, int n,
                           std::uint64_t seed) {
  if (n < 2) throw Error(Error::Kind::invalid_sample, "need n >= 2");
  const auto& fn = inst.function;
  const auto& info = detail::curve_info(fn);
  rng::Xoshiro256 gen(seed);

  std::vector<double> x(n);
  switch (inst.model.marginal) {
    case Marginal::even_x:
      for (int i = 0; i < n; ++i)
        x[i] = fn.lo + (fn.hi - fn.lo) * static_cast<double>(i) / (n - 1);
      break;
    case Marginal::uniform_x:
      for (int i = 0; i < n; ++i) x[i] = gen.uniform(fn.lo, fn.hi);
      break;
    case Marginal::even_curve:
      if (fn.is_circle)
        throw Error(Error::Kind::usage, "curve marginals unsupported for circle");
      for (int i = 0; i < n; ++i)
        x[i] = detail::invert_arc(
            info, info.arc_total * static_cast<double>(i) / (n - 1));
      break;
    case Marginal::uniform_curve:
      if (fn.is_circle)
        throw Error(Error::Kind::usage, "curve marginals unsupported for circle");
      for (int i = 0; i < n; ++i)
        x[i] = detail::invert_arc(info, gen.uniform(0.0, info.arc_total));
      break;
  }

  std::vector<double> y(n);
  if (fn.is_circle) {
    for (int i = 0; i < n; ++i) {
      double sign = gen.next_double() < 0.5 ? -1.0 : 1.0;
      y[i] = sign * fn.f(x[i]);
    }
  } else {
    for (int i = 0; i < n; ++i) y[i] = fn.f(x[i]);
  }

  double sdx = detail::sd_x_for(fn, inst.model.marginal);
  double sdy = detail::sd_y_noise_scale(fn, inst.model.marginal);
  std::vector<double> out_x = x, out_y = y;
  if (inst.pure_noise) {
    // the R^2 = 0 end of a grid: noised coordinates become pure noise
    if (inst.model.has_x_noise())
      for (int i = 0; i < n; ++i) out_x[i] = sdx * gen.normal();
    if (inst.model.has_y_noise())
      for (int i = 0; i < n; ++i) out_y[i] = sdy * gen.normal();
    return core::Sample(std::move(out_x), std::move(out_y));
  }
  if (inst.model.has_x_noise() && inst.sigma_x > 0.0)
    for (int i = 0; i < n; ++i) out_x[i] = x[i] + inst.sigma_x * sdx * gen.normal();
  if (inst.model.has_y_noise() && inst.sigma_y > 0.0)
    for (int i = 0; i < n; ++i) out_y[i] = y[i] + inst.sigma_y * sdy * gen.normal();
  return core::Sample(std::move(out_x), std::move(out_y));
}

// R^2 of a noisy circle: the mean of the two R^2 values of the half-circle
// relationships; the halves agree by symmetry.
inline double circle_r2(const FunctionSpec& fn, double sigma_y_sd_units) {
  if (!fn.is_circle)
    throw Error(Error::Kind::usage, "circle_r2 needs the circle relationship");
  const auto& info = detail::curve_info(fn);
  double raw = sigma_y_sd_units * info.sd_y_full;
  double var_half = info.var_y_flat;  // f is the upper branch
  double top = var_half / (var_half + raw * raw);
  double bottom = top;
  return 0.5 * (top + bottom);
}

// Monte-Carlo population R^2: the squared correlation between f(X + eps)
// and f(X) + eps' on a large fixed-seed sample (grid-based for the even
// marginals). Cached on the instance.
inline double population_r2(const RelationshipInstance& inst) {
  if (inst.cached_population_r2) return *inst.cached_population_r2;
  double value;
  if (inst.pure_noise) {
    value = 0.0;
  } else if (inst.sigma_x == 0.0 && inst.sigma_y == 0.0) {
    value = 1.0;
  } else if (inst.function.is_circle) {
    value = circle_r2(inst.function, inst.sigma_y);
  } else {
    const auto& fn = inst.function;
    const auto& info = detail::curve_info(fn);
    const int n = 100000;
    bool curve = detail::curve_marginal(inst.model.marginal);
    double sdx = detail::sd_x_for(fn, inst.model.marginal);
    double sdy = detail::sd_y_noise_scale(fn, inst.model.marginal);
    rng::Xoshiro256 gen(rng::derive_seed(0x9090E57A7E5EEDULL, fn.id,
                                         static_cast<std::uint64_t>(inst.model.index())));
    std::vector<double> u(n), v(n);
    for (int i = 0; i < n; ++i) {
      double t = (i + 0.5) / n;
      double x = curve ? detail::invert_arc(info, t * info.arc_total)
                       : fn.lo + t * (fn.hi - fn.lo);
      double fx = fn.f(x);
      u[i] = inst.sigma_x > 0.0 ? fn.f(x + inst.sigma_x * sdx * gen.normal()) : fx;
      v[i] = inst.sigma_y > 0.0 ? fx + inst.sigma_y * sdy * gen.normal() : fx;
    }
    double c = util::correlation(u, v);
    value = c * c;
  }
  inst.cached_population_r2 = value;
  return value;
}

}  // namespace depbench::datagen
