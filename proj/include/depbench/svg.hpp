#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "depbench/util.hpp"

namespace depbench::svg {

// Hand-rolled SVG emission: axes, polylines, bands and heat-map rects are
// all this toolkit needs, so there is no plotting dependency.
class Canvas {
 public:
  Canvas(double width, double height) : width_(width), height_(height) {
    body_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
          << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " "
          << height << "\">\n";
    body_ << "<!-- depbench plot -->\n";
    body_ << "<rect width=\"" << width << "\" height=\"" << height
          << "\" fill=\"white\"/>\n";
  }

  void set_axes(double x_min, double x_max, double y_min, double y_max,
                double margin = 46.0) {
    x_min_ = x_min; x_max_ = x_max; y_min_ = y_min; y_max_ = y_max;
    margin_ = margin;
  }

  double px(double x) const {
    return margin_ + (x - x_min_) / (x_max_ - x_min_) * (width_ - 2 * margin_);
  }
  double py(double y) const {
    return height_ - margin_ -
           (y - y_min_) / (y_max_ - y_min_) * (height_ - 2 * margin_);
  }

  void axes(const std::string& x_label, const std::string& y_label, int ticks = 5) {
    line(px(x_min_), py(y_min_), px(x_max_), py(y_min_), "#333", 1.0);
    line(px(x_min_), py(y_min_), px(x_min_), py(y_max_), "#333", 1.0);
    for (int i = 0; i <= ticks; ++i) {
      double fx = x_min_ + (x_max_ - x_min_) * i / ticks;
      double fy = y_min_ + (y_max_ - y_min_) * i / ticks;
      line(px(fx), py(y_min_), px(fx), py(y_min_) + 4, "#333", 1.0);
      text(px(fx) - 10, py(y_min_) + 16, trim_num(fx), 10);
      line(px(x_min_) - 4, py(fy), px(x_min_), py(fy), "#333", 1.0);
      text(px(x_min_) - 38, py(fy) + 3, trim_num(fy), 10);
    }
    text(px((x_min_ + x_max_) / 2) - 20, height_ - 8, x_label, 11);
    body_ << "<text x=\"12\" y=\"" << py((y_min_ + y_max_) / 2)
          << "\" font-size=\"11\" transform=\"rotate(-90 12 "
          << py((y_min_ + y_max_) / 2) << ")\">" << escape(y_label)
          << "</text>\n";
  }

  void line(double x1, double y1, double x2, double y2, const std::string& color,
            double w) {
    body_ << "<line x1=\"" << x1 << "\" y1=\"" << y1 << "\" x2=\"" << x2
          << "\" y2=\"" << y2 << "\" stroke=\"" << color << "\" stroke-width=\""
          << w << "\"/>\n";
  }

  void polyline(const std::vector<double>& xs, const std::vector<double>& ys,
                const std::string& color, double w) {
    body_ << "<polyline fill=\"none\" stroke=\"" << color
          << "\" stroke-width=\"" << w << "\" points=\"";
    for (std::size_t i = 0; i < xs.size(); ++i)
      body_ << px(xs[i]) << "," << py(ys[i]) << " ";
    body_ << "\"/>\n";
  }

  // Shaded band between lo and hi along xs.
  void band(const std::vector<double>& xs, const std::vector<double>& lo,
            const std::vector<double>& hi, const std::string& color,
            double opacity) {
    body_ << "<polygon fill=\"" << color << "\" fill-opacity=\"" << opacity
          << "\" stroke=\"none\" points=\"";
    for (std::size_t i = 0; i < xs.size(); ++i)
      body_ << px(xs[i]) << "," << py(hi[i]) << " ";
    for (std::size_t i = xs.size(); i-- > 0;)
      body_ << px(xs[i]) << "," << py(lo[i]) << " ";
    body_ << "\"/>\n";
  }

  void rect(double x, double y, double w, double h, const std::string& fill) {
    body_ << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << w
          << "\" height=\"" << h << "\" fill=\"" << fill << "\"/>\n";
  }

  void circle(double x, double y, double r, const std::string& fill) {
    body_ << "<circle cx=\"" << x << "\" cy=\"" << y << "\" r=\"" << r
          << "\" fill=\"" << fill << "\"/>\n";
  }

  void text(double x, double y, const std::string& s, int size) {
    body_ << "<text x=\"" << x << "\" y=\"" << y << "\" font-size=\"" << size
          << "\">" << escape(s) << "</text>\n";
  }

  // value in [0,1] -> white..red ramp used by the heat maps
  static std::string heat_color(double v) {
    v = std::clamp(v, 0.0, 1.0);
    int g = static_cast<int>(std::lround(255.0 * (1.0 - v)));
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#ff%02x%02x", g, g);
    return std::string(buf);
  }

  std::string finish() {
    body_ << "</svg>\n";
    return body_.str();
  }

 private:
  static std::string trim_num(double v) {
    std::string s = util::format_double(std::round(v * 1000.0) / 1000.0);
    return s;
  }
  static std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
      switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        default: out.push_back(c);
      }
    }
    return out;
  }

  double width_, height_;
  double x_min_ = 0, x_max_ = 1, y_min_ = 0, y_max_ = 1, margin_ = 46;
  std::ostringstream body_;
};

}  // namespace depbench::svg
