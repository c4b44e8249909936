#include "cartography/render.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include <fmt/format.h>

#include "cartography/error.hpp"

namespace cartography::render {
namespace {

constexpr double kGlyphRadius = 3.5;

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string header(std::string_view title) {
  std::string s = fmt::format(
      "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{0}\" height=\"{1}\" "
      "viewBox=\"0 0 {0} {1}\">\n"
      "<rect x=\"0\" y=\"0\" width=\"{0}\" height=\"{1}\" fill=\"#ffffff\"/>\n",
      kCanvasWidth, kCanvasHeight);
  if (!title.empty()) {
    s += fmt::format(
        "<text x=\"{:.2f}\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\" "
        "text-anchor=\"middle\">{}</text>\n",
        kPlotLeft + kPlotWidth / 2, xml_escape(title));
  }
  return s;
}

std::string frame() {
  return fmt::format(
      "<rect class=\"frame\" x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" "
      "fill=\"none\" stroke=\"#000000\" stroke-width=\"1\"/>\n",
      kPlotLeft, kPlotTop, kPlotWidth, kPlotHeight);
}

std::string x_tick(double px, std::string_view label) {
  const double y = kPlotTop + kPlotHeight;
  return fmt::format(
      "<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\" stroke=\"#000000\"/>"
      "<text x=\"{0:.2f}\" y=\"{3:.2f}\" font-family=\"sans-serif\" font-size=\"11\" "
      "text-anchor=\"middle\">{4}</text>\n",
      px, y, y + 5, y + 18, label);
}

std::string y_tick(double py, std::string_view label) {
  return fmt::format(
      "<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{2:.2f}\" y2=\"{1:.2f}\" stroke=\"#000000\"/>"
      "<text x=\"{3:.2f}\" y=\"{4:.2f}\" font-family=\"sans-serif\" font-size=\"11\" "
      "text-anchor=\"end\">{5}</text>\n",
      kPlotLeft - 5, py, kPlotLeft, kPlotLeft - 8, py + 4, label);
}

std::string axis_labels(std::string_view x, std::string_view y) {
  return fmt::format(
      "<text x=\"{:.2f}\" y=\"{:.2f}\" font-family=\"sans-serif\" font-size=\"13\" "
      "text-anchor=\"middle\">{}</text>\n"
      "<text x=\"{:.2f}\" y=\"{:.2f}\" font-family=\"sans-serif\" font-size=\"13\" "
      "text-anchor=\"middle\" transform=\"rotate(-90 {:.2f} {:.2f})\">{}</text>\n",
      kPlotLeft + kPlotWidth / 2, kPlotTop + kPlotHeight + 40, x, 22.0,
      kPlotTop + kPlotHeight / 2, 22.0, kPlotTop + kPlotHeight / 2, y);
}

std::string_view tag_name(std::optional<HeuristicTag> tag) {
  return tag ? to_string(*tag) : std::string_view("untagged");
}

std::string circle(std::string_view cls, double cx, double cy, std::string_view color) {
  return fmt::format(
      "<circle class=\"{}\" cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"{}\" fill=\"{}\" "
      "fill-opacity=\"0.75\"/>\n",
      cls, cx, cy, kGlyphRadius, color);
}

std::string cross(std::string_view cls, double cx, double cy, std::string_view color) {
  const double r = kGlyphRadius;
  return fmt::format(
      "<path class=\"{}\" transform=\"translate({:.2f},{:.2f})\" "
      "d=\"M{},{}L{},{}M{},{}L{},{}\" stroke=\"{}\" stroke-width=\"1.5\" fill=\"none\"/>\n",
      cls, cx, cy, -r, -r, r, r, -r, r, r, -r, color);
}

std::string map_legend() {
  std::string s = "<g class=\"legend\">\n";
  const double x = kPlotLeft + kPlotWidth + 30;
  double y = kPlotTop + 10;
  for (HeuristicTag tag : {HeuristicTag::support, HeuristicTag::contradict, HeuristicTag::none}) {
    s += fmt::format(
        "<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"10\" height=\"10\" fill=\"{}\"/>"
        "<text x=\"{:.2f}\" y=\"{:.2f}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n",
        x, y - 9, tag_color(tag), x + 16, y, to_string(tag));
    y += 20;
  }
  y += 10;
  s += circle("legend-marker", x + 5, y - 4, "#000000");
  s += fmt::format(
      "<text x=\"{:.2f}\" y=\"{:.2f}\" font-family=\"sans-serif\" font-size=\"12\">"
      "in-distribution</text>\n",
      x + 16, y);
  y += 20;
  s += cross("legend-marker", x + 5, y - 4, "#000000");
  s += fmt::format(
      "<text x=\"{:.2f}\" y=\"{:.2f}\" font-family=\"sans-serif\" font-size=\"12\">OOD</text>\n",
      x + 16, y);
  s += "</g>\n";
  return s;
}

double uniform01(std::mt19937_64& gen) { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }

}  // namespace

void MapStyle::check() const {
  if (!(sample_fraction > 0.0 && sample_fraction <= 1.0)) {
    throw ComputeError(fmt::format("sample_fraction must be in (0, 1], got {}", sample_fraction));
  }
}

std::string_view tag_color(std::optional<HeuristicTag> tag) {
  if (!tag) return "#7f7f7f";
  switch (*tag) {
    case HeuristicTag::support: return "#2ca02c";
    case HeuristicTag::contradict: return "#1f77b4";
    case HeuristicTag::none: return "#7f7f7f";
  }
  return "#7f7f7f";
}

std::string_view stratum_color(Stratum stratum) {
  switch (stratum) {
    case Stratum::train: return "#1f77b4";
    case Stratum::eval_in_distribution: return "#ff7f0e";
    case Stratum::eval_ood: return "#2ca02c";
  }
  return "#000000";
}

double map_x(double variability) { return kPlotLeft + variability / kMaxVariability * kPlotWidth; }

double map_y(double confidence) { return kPlotTop + (1.0 - confidence) * kPlotHeight; }

std::vector<size_t> subsample(size_t n, double fraction, uint64_t seed) {
  const auto keep = static_cast<size_t>(std::llround(fraction * static_cast<double>(n)));
  std::vector<size_t> picked;
  picked.reserve(keep);
  if (keep >= n) {
    for (size_t i = 0; i < n; ++i) picked.push_back(i);
    return picked;
  }
  // Selection sampling: each index is taken with probability
  // (still needed) / (still available), which yields exactly `keep` picks.
  std::mt19937_64 gen(seed);
  for (size_t i = 0; i < n && picked.size() < keep; ++i) {
    const double available = static_cast<double>(n - i);
    const double needed = static_cast<double>(keep - picked.size());
    if (available * uniform01(gen) < needed) picked.push_back(i);
  }
  return picked;
}

std::string map_svg(std::span<const dynamics::CartographyPoint> points, const MapStyle& style,
                    std::string_view title) {
  style.check();
  if (points.empty()) throw ComputeError("render_map: no points to plot");

  std::string s = header(title);
  s += frame();
  for (int i = 0; i <= 5; ++i) s += x_tick(map_x(i * 0.1), fmt::format("{:.1f}", i * 0.1));
  for (int i = 0; i <= 5; ++i) s += y_tick(map_y(i * 0.2), fmt::format("{:.1f}", i * 0.2));
  s += axis_labels("variability", "confidence");

  s += "<g class=\"points\">\n";
  for (size_t i : subsample(points.size(), style.sample_fraction, style.seed)) {
    const auto& p = points[i];
    const double cx = map_x(p.variability);
    const double cy = map_y(p.confidence);
    const auto tag = tag_name(p.heuristic_tag);
    const auto color = tag_color(p.heuristic_tag);
    if (p.distribution == Distribution::ood) {
      s += cross(fmt::format("glyph ood {}", tag), cx, cy, color);
    } else {
      s += circle(fmt::format("glyph in_distribution {}", tag), cx, cy, color);
    }
  }
  s += "</g>\n";
  s += map_legend();
  s += "</svg>\n";
  return s;
}

void render_map(std::span<const dynamics::CartographyPoint> points, const MapStyle& style,
                const std::filesystem::path& out, std::string_view title) {
  write_text_file(out, map_svg(points, style, title));
}

std::string trends_svg(std::span<const correlation::CorrelationSeries> series,
                       std::string_view title) {
  int max_epoch = 0;
  bool any_defined = false;
  for (const auto& line : series) {
    for (const auto& p : line.points) {
      max_epoch = std::max(max_epoch, p.epoch);
      any_defined = any_defined || p.rho.has_value();
    }
  }
  if (!any_defined) throw ComputeError("render_trends: every correlation point is undefined");

  const auto px = [&](int epoch) {
    if (max_epoch <= 1) return kPlotLeft + kPlotWidth / 2;
    return kPlotLeft + (epoch - 1) * kPlotWidth / (max_epoch - 1);
  };
  const auto py = [](double rho) { return kPlotTop + (1.0 - rho) / 2.0 * kPlotHeight; };

  std::string s = header(title);
  s += frame();
  s += fmt::format(
      "<line class=\"zero\" x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" "
      "stroke=\"#999999\" stroke-dasharray=\"4 3\"/>\n",
      kPlotLeft, py(0.0), kPlotLeft + kPlotWidth, py(0.0));
  for (int e = 1; e <= max_epoch; ++e) s += x_tick(px(e), std::to_string(e));
  for (int i = -2; i <= 2; ++i) s += y_tick(py(i * 0.5), fmt::format("{:.1f}", i * 0.5));
  s += axis_labels("epoch", "rho");

  bool mixed = false;
  for (const auto& line : series) {
    mixed = mixed || line.class_filter != series.front().class_filter ||
            line.measure != series.front().measure;
  }

  std::string legend = "<g class=\"legend\">\n";
  double legend_y = kPlotTop + 10;
  for (const auto& line : series) {
    const auto color = stratum_color(line.stratum);
    const auto name = to_string(line.stratum);
    s += fmt::format("<g class=\"series {}\">\n", name);
    std::vector<std::pair<double, double>> run;
    const auto flush = [&] {
      if (run.size() == 1) {
        s += fmt::format(
            "<circle class=\"dot {}\" cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"3\" fill=\"{}\"/>\n", name,
            run[0].first, run[0].second, color);
      } else if (run.size() > 1) {
        std::string coords;
        for (const auto& [x, y] : run) {
          if (!coords.empty()) coords += ' ';
          coords += fmt::format("{:.2f},{:.2f}", x, y);
        }
        s += fmt::format(
            "<polyline class=\"trend {}\" points=\"{}\" fill=\"none\" stroke=\"{}\" "
            "stroke-width=\"2\"/>\n",
            name, coords, color);
      }
      run.clear();
    };
    for (const auto& p : line.points) {
      if (p.rho) {
        run.emplace_back(px(p.epoch), py(*p.rho));
      } else {
        flush();
      }
    }
    flush();
    s += "</g>\n";

    std::string label(name);
    if (mixed) {
      label += fmt::format(" ({}, {})", to_string(line.class_filter), to_string(line.measure));
    }
    const double x = kPlotLeft + kPlotWidth + 20;
    legend += fmt::format(
        "<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"{}\" "
        "stroke-width=\"2\"/><text x=\"{:.2f}\" y=\"{:.2f}\" font-family=\"sans-serif\" "
        "font-size=\"12\">{}</text>\n",
        x, legend_y - 4, x + 18, legend_y - 4, color, x + 24, legend_y, xml_escape(label));
    legend_y += 20;
  }
  legend += "</g>\n";
  s += legend;
  s += "</svg>\n";
  return s;
}

void render_trends(std::span<const correlation::CorrelationSeries> series,
                   const std::filesystem::path& out, std::string_view title) {
  write_text_file(out, trends_svg(series, title));
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw OutputError(fmt::format("cannot write {}", path.string()));
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.close();
  if (!out) throw OutputError(fmt::format("failed writing {}", path.string()));
}

}  // namespace cartography::render
