#include "gridloc/plot.hpp"

#include <algorithm>

#include <fmt/core.h>

#include "gridloc/error.hpp"
#include "gridloc/stats.hpp"

namespace gridloc {

namespace {

constexpr double kWidth = 640, kHeight = 400;
constexpr double kLeft = 60, kRight = 20, kTop = 20, kBottom = 50;

struct Frame {
  double x_max = 1.0;
  double px(double x) const { return kLeft + (x - 1.0) / std::max(x_max - 1.0, 1.0) * (kWidth - kLeft - kRight); }
  static double py(double y) { return kHeight - kBottom - y * (kHeight - kTop - kBottom); }
};

void fit_line(std::string& svg, const Frame& f, const RunMetrics& m, const char* color) {
  if (m.rows.size() < 2) return;
  const auto xs = m.steps();
  const auto ys = m.accuracies();
  const LineFit fit = linfit(xs, ys);
  const double x0 = xs.front(), x1 = xs.back();
  svg += fmt::format(R"(<line class="fit" x1="{:.2f}" y1="{:.2f}" x2="{:.2f}" y2="{:.2f}" stroke="{}" stroke-width="2"/>)"
                     "\n",
                     f.px(x0), Frame::py(fit.slope * x0 + fit.intercept), f.px(x1), Frame::py(fit.slope * x1 + fit.intercept),
                     color);
}

}  // namespace

std::string plot_svg(const RunMetrics& dqn, const RunMetrics& baseline) {
  if (dqn.rows.empty() && baseline.rows.empty()) throw UsageError("plot_svg: no data");
  Frame f;
  for (const auto* m : {&dqn, &baseline})
    for (const auto& r : m->rows) f.x_max = std::max(f.x_max, static_cast<double>(r.step));

  std::string svg = fmt::format(
      R"(<svg xmlns="http://www.w3.org/2000/svg" width="{0}" height="{1}" viewBox="0 0 {0} {1}">)"
      "\n<rect width=\"{0}\" height=\"{1}\" fill=\"white\"/>\n",
      kWidth, kHeight);
  const double x_axis = Frame::py(0.0);
  svg += fmt::format(R"(<line x1="{0}" y1="{1:.2f}" x2="{2}" y2="{1:.2f}" stroke="black"/>)"
                     "\n",
                     kLeft, x_axis, kWidth - kRight);
  svg += fmt::format(R"(<line x1="{0}" y1="{1}" x2="{0}" y2="{2:.2f}" stroke="black"/>)"
                     "\n",
                     kLeft, kTop, x_axis);
  for (int i = 0; i <= 4; ++i) {
    const double y = i / 4.0;
    svg += fmt::format(R"(<text x="{:.2f}" y="{:.2f}" font-size="10" text-anchor="end">{:.2f}</text>)"
                       "\n",
                       kLeft - 6, Frame::py(y) + 3, y);
  }
  svg += fmt::format(R"(<text x="{:.2f}" y="{:.2f}" font-size="12" text-anchor="middle">training time</text>)"
                     "\n",
                     (kLeft + kWidth - kRight) / 2, kHeight - 15);
  svg += fmt::format(
      R"svg(<text x="15" y="{0:.2f}" font-size="12" text-anchor="middle" transform="rotate(-90 15 {0:.2f})">test accuracy</text>)svg"
      "\n",
      (kTop + x_axis) / 2);

  for (const auto& r : dqn.rows)
    svg += fmt::format(R"(<circle cx="{:.2f}" cy="{:.2f}" r="3" fill="blue"/>)"
                       "\n",
                       f.px(r.step), Frame::py(r.test_accuracy));
  for (const auto& r : baseline.rows) {
    const double cx = f.px(r.step), cy = Frame::py(r.test_accuracy);
    svg += fmt::format(R"(<polygon class="diamond" points="{:.2f},{:.2f} {:.2f},{:.2f} {:.2f},{:.2f} {:.2f},{:.2f}" fill="black"/>)"
                       "\n",
                       cx, cy - 4, cx + 4, cy, cx, cy + 4, cx - 4, cy);
  }
  fit_line(svg, f, dqn, "red");
  fit_line(svg, f, baseline, "green");
  svg += "</svg>\n";
  return svg;
}

void plot_svg(const RunMetrics& dqn, const RunMetrics& baseline, const std::filesystem::path& out) {
  write_text_file(out, plot_svg(dqn, baseline));
}

}  // namespace gridloc
