#include "grip/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>

namespace grip::svg {

namespace {

constexpr int kMarginLeft = 60;
constexpr int kMarginRight = 20;
constexpr int kMarginTop = 40;
constexpr int kMarginBottom = 40;

const char* kSeriesPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                "#9467bd", "#ff7f0e", "#8c564b"};
const char* kStepPalette[] = {"#e41a1c", "#377eb8", "#4daf4a", "#984ea3"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

void append(std::string& out, const char* format, ...)
    __attribute__((format(printf, 2, 3)));

void append(std::string& out, const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  out += buf;
}

}  // namespace

std::string render_profiles(std::span<const profiles::ProfileSeries> series,
                            const ChartOptions& options) {
  if (series.empty()) throw EmptyInput("nothing to plot");

  double x_max = 1.0;
  double y_max = 1.0;
  for (const auto& s : series) {
    for (const auto& p : s.points) {
      x_max = std::max(x_max, static_cast<double>(p.window_index + 1));
      y_max = std::max(y_max, p.value_mv);
    }
    for (const auto& b : s.step_boundaries) {
      x_max = std::max(x_max, b.window_pos);
    }
  }
  y_max *= 1.05;

  const double plot_w = options.width - kMarginLeft - kMarginRight;
  const double plot_h = options.height - kMarginTop - kMarginBottom;
  auto sx = [&](double x) { return kMarginLeft + x / x_max * plot_w; };
  auto sy = [&](double y) { return kMarginTop + (1.0 - y / y_max) * plot_h; };

  std::string out;
  append(out,
         "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" "
         "viewBox=\"0 0 %d %d\">\n",
         options.width, options.height, options.width, options.height);
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  append(out, "<text x=\"%d\" y=\"24\" font-family=\"sans-serif\" "
              "font-size=\"16\">%s</text>\n",
         kMarginLeft, options.title.c_str());

  // Axes.
  append(out,
         "<line x1=\"%s\" y1=\"%s\" x2=\"%s\" y2=\"%s\" stroke=\"black\"/>\n",
         fmt(sx(0)).c_str(), fmt(sy(0)).c_str(), fmt(sx(x_max)).c_str(),
         fmt(sy(0)).c_str());
  append(out,
         "<line x1=\"%s\" y1=\"%s\" x2=\"%s\" y2=\"%s\" stroke=\"black\"/>\n",
         fmt(sx(0)).c_str(), fmt(sy(0)).c_str(), fmt(sx(0)).c_str(),
         fmt(sy(y_max)).c_str());
  for (int tick = 0; tick <= 4; ++tick) {
    const double y = y_max * tick / 4.0;
    append(out,
           "<text x=\"%d\" y=\"%s\" font-family=\"sans-serif\" font-size=\"10\" "
           "text-anchor=\"end\">%s</text>\n",
           kMarginLeft - 6, fmt(sy(y) + 3).c_str(), fmt(y).c_str());
  }
  append(out,
         "<text x=\"%s\" y=\"%d\" font-family=\"sans-serif\" font-size=\"10\" "
         "text-anchor=\"middle\">window</text>\n",
         fmt(kMarginLeft + plot_w / 2).c_str(), options.height - 8);

  // Step boundaries from the first series that carries them (they describe
  // the shared task timeline).
  for (const auto& s : series) {
    if (s.step_boundaries.empty()) continue;
    for (const auto& b : s.step_boundaries) {
      const char* color = kStepPalette[(b.step - 1) & 3];
      append(out,
             "<line x1=\"%s\" y1=\"%s\" x2=\"%s\" y2=\"%s\" stroke=\"%s\" "
             "stroke-dasharray=\"4 3\"/>\n",
             fmt(sx(b.window_pos)).c_str(), fmt(sy(0)).c_str(),
             fmt(sx(b.window_pos)).c_str(), fmt(sy(y_max)).c_str(), color);
    }
    break;
  }

  std::size_t color_index = 0;
  for (const auto& s : series) {
    const char* color = kSeriesPalette[color_index % 6];
    std::string points;
    for (const auto& p : s.points) {
      // Plot each window at its center.
      const double x = static_cast<double>(p.window_index) + 0.5;
      points += fmt(sx(x));
      points += ',';
      points += fmt(sy(p.value_mv));
      points += ' ';
    }
    if (!points.empty()) points.pop_back();
    append(out,
           "<polyline fill=\"none\" stroke=\"%s\" stroke-width=\"1.5\" "
           "points=\"%s\"/>\n",
           color, points.c_str());
    append(out,
           "<text x=\"%d\" y=\"%d\" font-family=\"sans-serif\" font-size=\"12\" "
           "fill=\"%s\">S%d</text>\n",
           options.width - kMarginRight - 40,
           kMarginTop + 14 * static_cast<int>(color_index), color, s.sensor_id);
    ++color_index;
  }

  out += "</svg>\n";
  return out;
}

}  // namespace grip::svg
