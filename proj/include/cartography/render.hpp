#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cartography/correlation.hpp"
#include "cartography/dynamics.hpp"

namespace cartography::render {

// Colors and markers are fixed: support green, contradict blue, none gray;
// in-distribution circle, OOD cross. Only the subsampling is configurable.
struct MapStyle {
  double sample_fraction = 1.0;
  uint64_t seed = 0;

  void check() const;  // throws ComputeError unless fraction is in (0, 1]
};

std::string_view tag_color(std::optional<HeuristicTag> tag);
std::string_view stratum_color(Stratum stratum);

// Plot geometry shared by both chart kinds (SVG user units).
inline constexpr double kPlotLeft = 70.0;
inline constexpr double kPlotTop = 40.0;
inline constexpr double kPlotWidth = 480.0;
inline constexpr double kPlotHeight = 400.0;
inline constexpr double kCanvasWidth = 760.0;
inline constexpr double kCanvasHeight = 500.0;
inline constexpr double kMaxVariability = 0.5;

// Map axes: x variability [0, 0.5], y confidence [0, 1] (top is 1).
double map_x(double variability);
double map_y(double confidence);

// Indices of round(fraction * n) items chosen uniformly without replacement,
// ascending. Deterministic for a given seed.
std::vector<size_t> subsample(size_t n, double fraction, uint64_t seed);

// Cartography scatter for one epoch and split. Throws ComputeError on empty input.
std::string map_svg(std::span<const dynamics::CartographyPoint> points, const MapStyle& style,
                    std::string_view title);
void render_map(std::span<const dynamics::CartographyPoint> points, const MapStyle& style,
                const std::filesystem::path& out, std::string_view title = "");

// One line per series over epochs; rho on [-1, 1]. Undefined points break the
// line and isolated defined points become dots. Throws ComputeError when no
// series has a defined point.
std::string trends_svg(std::span<const correlation::CorrelationSeries> series,
                       std::string_view title);
void render_trends(std::span<const correlation::CorrelationSeries> series,
                   const std::filesystem::path& out, std::string_view title = "");

// Writes `content` to `path`; throws OutputError on failure.
void write_text_file(const std::filesystem::path& path, std::string_view content);

}  // namespace cartography::render
