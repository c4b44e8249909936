#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "cartography/dynamics.hpp"
#include "cartography/heuristics.hpp"
#include "cartography/ingest.hpp"
#include "cartography/types.hpp"

namespace cartography::correlation {

// Streaming Pearson product-moment coefficient. Co-moments are accumulated
// Welford-style in extended precision.
class PearsonAccumulator {
 public:
  void add(double x, double y);
  size_t count() const { return n_; }
  // Undefined (nullopt) when fewer than two pairs or either variance is zero.
  // Clamped to [-1, 1].
  std::optional<double> value() const;

 private:
  size_t n_ = 0;
  long double mean_x_ = 0, mean_y_ = 0;
  long double sxx_ = 0, syy_ = 0, sxy_ = 0;
};

// Throws ComputeError on length mismatch.
std::optional<double> pearson(std::span<const double> xs, std::span<const double> ys);

struct CorrelationPoint {
  int epoch = 0;
  Stratum stratum = Stratum::train;
  ClassFilter class_filter = ClassFilter::all;
  Measure measure = Measure::m2;
  std::optional<double> rho;
  size_t n = 0;
};

struct CorrelationSeries {
  Stratum stratum = Stratum::train;
  ClassFilter class_filter = ClassFilter::all;
  Measure measure = Measure::m2;
  std::vector<CorrelationPoint> points;  // epochs 1..max_epoch
};

// rho(measure, confidence at `epoch`) over the samples of one stratum and
// class that have both an annotation and stats at that epoch.
CorrelationPoint correlation_at_epoch(const ingest::Corpus& corpus,
                                      const heuristics::AnnotationSet& annotations,
                                      const dynamics::StatsGrid& grid, int epoch, Stratum stratum,
                                      ClassFilter class_filter, Measure measure);

// 3 strata x 3 class filters x |measures| series, ordered measure-major, then
// stratum, then class filter.
std::vector<CorrelationSeries> all_series(const ingest::Corpus& corpus,
                                          const heuristics::AnnotationSet& annotations,
                                          const dynamics::StatsGrid& grid,
                                          std::span<const Measure> measures);
std::vector<CorrelationSeries> all_series_serial(const ingest::Corpus& corpus,
                                                 const heuristics::AnnotationSet& annotations,
                                                 const dynamics::StatsGrid& grid,
                                                 std::span<const Measure> measures);

// Long-form CSV: epoch, stratum, class_filter, measure, rho, n. Undefined rho
// is an empty cell. Rows follow series order, epochs ascending.
void write_correlations_csv(std::ostream& out, std::span<const CorrelationSeries> series);

}  // namespace cartography::correlation
