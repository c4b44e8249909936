#include "cartography/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>

#include "cartography/csv.hpp"
#include "cartography/error.hpp"

namespace cartography::correlation {

void PearsonAccumulator::add(double x, double y) {
  ++n_;
  const long double n = static_cast<long double>(n_);
  const long double dx = x - mean_x_;
  const long double dy = y - mean_y_;
  mean_x_ += dx / n;
  mean_y_ += dy / n;
  sxx_ += dx * (x - mean_x_);
  syy_ += dy * (y - mean_y_);
  sxy_ += dx * (y - mean_y_);
}

std::optional<double> PearsonAccumulator::value() const {
  if (n_ < 2 || sxx_ == 0 || syy_ == 0) return std::nullopt;
  const long double r = sxy_ / std::sqrt(sxx_ * syy_);
  return std::clamp(static_cast<double>(r), -1.0, 1.0);
}

std::optional<double> pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    throw ComputeError(fmt::format("pearson: length mismatch ({} vs {})", xs.size(), ys.size()));
  }
  PearsonAccumulator acc;
  for (size_t i = 0; i < xs.size(); ++i) acc.add(xs[i], ys[i]);
  return acc.value();
}

CorrelationPoint correlation_at_epoch(const ingest::Corpus& corpus,
                                      const heuristics::AnnotationSet& annotations,
                                      const dynamics::StatsGrid& grid, int epoch, Stratum stratum,
                                      ClassFilter class_filter, Measure measure) {
  PearsonAccumulator acc;
  for (size_t i = 0; i < corpus.samples.size(); ++i) {
    const Sample& s = corpus.samples[i];
    if (stratum_of(s) != stratum || !matches(class_filter, s.gold_label)) continue;
    const auto* stats = grid.at(epoch, i);
    const auto* annotation = annotations.find(i);
    if (!stats || !annotation) continue;
    acc.add(measure == Measure::m1 ? annotation->m1 : annotation->m2, stats->confidence());
  }
  return {epoch, stratum, class_filter, measure, acc.value(), acc.count()};
}

namespace {

std::vector<CorrelationSeries> empty_series(int max_epoch, std::span<const Measure> measures) {
  std::vector<CorrelationSeries> out;
  for (Measure m : measures) {
    for (Stratum s : kAllStrata) {
      for (ClassFilter c : kAllClassFilters) {
        CorrelationSeries series{s, c, m, {}};
        series.points.resize(static_cast<size_t>(std::max(max_epoch, 0)));
        out.push_back(std::move(series));
      }
    }
  }
  return out;
}

}  // namespace

std::vector<CorrelationSeries> all_series_serial(const ingest::Corpus& corpus,
                                                 const heuristics::AnnotationSet& annotations,
                                                 const dynamics::StatsGrid& grid,
                                                 std::span<const Measure> measures) {
  auto out = empty_series(corpus.max_epoch, measures);
  for (auto& series : out) {
    for (int e = 1; e <= corpus.max_epoch; ++e) {
      series.points[static_cast<size_t>(e - 1)] = correlation_at_epoch(
          corpus, annotations, grid, e, series.stratum, series.class_filter, series.measure);
    }
  }
  return out;
}

std::vector<CorrelationSeries> all_series(const ingest::Corpus& corpus,
                                          const heuristics::AnnotationSet& annotations,
                                          const dynamics::StatsGrid& grid,
                                          std::span<const Measure> measures) {
  auto out = empty_series(corpus.max_epoch, measures);
  const auto epochs = static_cast<std::ptrdiff_t>(std::max(corpus.max_epoch, 0));
  const auto cells = static_cast<std::ptrdiff_t>(out.size()) * epochs;
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t k = 0; k < cells; ++k) {
    auto& series = out[static_cast<size_t>(k / epochs)];
    const int epoch = static_cast<int>(k % epochs) + 1;
    series.points[static_cast<size_t>(epoch - 1)] = correlation_at_epoch(
        corpus, annotations, grid, epoch, series.stratum, series.class_filter, series.measure);
  }
  return out;
}

void write_correlations_csv(std::ostream& out, std::span<const CorrelationSeries> series) {
  csv::write_row(out, {"epoch", "stratum", "class_filter", "measure", "rho", "n"});
  for (const auto& s : series) {
    for (const auto& p : s.points) {
      csv::write_row(out, {std::to_string(p.epoch), std::string(to_string(p.stratum)),
                           std::string(to_string(p.class_filter)),
                           std::string(to_string(p.measure)), p.rho ? csv::real(*p.rho) : "",
                           std::to_string(p.n)});
    }
  }
}

}  // namespace cartography::correlation
