#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "depbench/errors.hpp"

namespace depbench::util {

inline double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

// Empirical quantile, linear interpolation between order statistics
// (R type 7). q in [0,1]; data need not be sorted.
inline double quantile(std::vector<double> data, double q) {
  if (data.empty()) throw Error(Error::Kind::internal, "quantile of empty set");
  std::sort(data.begin(), data.end());
  if (q <= 0.0) return data.front();
  if (q >= 1.0) return data.back();
  double pos = q * static_cast<double>(data.size() - 1);
  std::size_t lo = static_cast<std::size_t>(pos);
  double frac = pos - static_cast<double>(lo);
  if (lo + 1 >= data.size()) return data.back();
  return data[lo] * (1.0 - frac) + data[lo + 1] * frac;
}

// Upper-tail critical value for a right-tailed level-alpha test from null
// scores: the ceil((1-alpha)(R+1))-th order statistic, so a fresh null draw
// exceeds it with probability ~alpha under exchangeability.
inline double upper_order_statistic(std::vector<double> null_scores, double alpha) {
  if (null_scores.empty())
    throw Error(Error::Kind::internal, "critical value of empty null sample");
  std::sort(null_scores.begin(), null_scores.end());
  std::size_t r = null_scores.size();
  std::size_t k = static_cast<std::size_t>(
      std::ceil((1.0 - alpha) * static_cast<double>(r + 1)));
  if (k < 1) k = 1;
  if (k > r) k = r;
  return null_scores[k - 1];
}

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

inline double variance(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

inline double correlation(const std::vector<double>& x, const std::vector<double>& y) {
  std::size_t n = x.size();
  if (n != y.size() || n < 2)
    throw Error(Error::Kind::internal, "correlation needs paired data");
  double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0)
    throw Error(Error::Kind::undefined_correlation,
                "correlation undefined for a constant coordinate");
  return sxy / std::sqrt(sxx * syy);
}

// Shortest round-trip decimal rendering; the one float format used in every
// CSV the toolkit emits.
inline std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

inline double parse_double(std::string_view s, bool& ok) {
  double v = 0.0;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  ok = (ec == std::errc() && ptr == end);
  return v;
}

}  // namespace depbench::util
