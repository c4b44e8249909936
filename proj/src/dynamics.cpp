#include "cartography/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>

#include "cartography/csv.hpp"
#include "cartography/error.hpp"

namespace cartography::dynamics {

void RegionConfig::check() const {
  if (!(tau_v > 0.0 && tau_v <= 0.5)) {
    throw ComputeError(fmt::format("tau_v must be in (0, 0.5], got {}", tau_v));
  }
  if (!(tau_mu > 0.0 && tau_mu < 1.0)) {
    throw ComputeError(fmt::format("tau_mu must be in (0, 1), got {}", tau_mu));
  }
}

double TrajectoryStats::confidence() const { return std::clamp(mean, 0.0, 1.0); }

double TrajectoryStats::variability() const {
  if (count == 0) return 0.0;
  // The population std of values in [0,1] never exceeds 0.5.
  return std::min(std::sqrt(sum_sq_dev / count), 0.5);
}

TrajectoryStats update_trajectory(const std::optional<TrajectoryStats>& prev, double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ComputeError(fmt::format("probability {} outside [0,1]", p));
  }
  TrajectoryStats next = prev.value_or(TrajectoryStats{});
  next.count += 1;
  const double delta = p - next.mean;
  next.mean += delta / next.count;
  next.sum_sq_dev += delta * (p - next.mean);
  return next;
}

Region classify_region(double confidence, double variability, const RegionConfig& config) {
  if (variability >= config.tau_v) return Region::ambiguous;
  return confidence >= config.tau_mu ? Region::easy_to_learn : Region::hard_to_learn;
}

StatsGrid::StatsGrid(size_t samples, int max_epoch)
    : samples_(samples),
      max_epoch_(max_epoch),
      cells_(samples * static_cast<size_t>(std::max(max_epoch, 0))) {}

const TrajectoryStats* StatsGrid::at(int epoch, size_t sample) const {
  if (epoch < 1 || epoch > max_epoch_ || sample >= samples_) return nullptr;
  const auto& c = cells_[static_cast<size_t>(epoch - 1) * samples_ + sample];
  return c.count == epoch ? &c : nullptr;
}

TrajectoryStats& StatsGrid::cell(int epoch, size_t sample) {
  return cells_[static_cast<size_t>(epoch - 1) * samples_ + sample];
}

namespace {

void fold_one(const std::vector<double>& trajectory, size_t sample, StatsGrid& grid) {
  std::optional<TrajectoryStats> running;
  for (size_t e = 0; e < trajectory.size(); ++e) {
    running = update_trajectory(running, trajectory[e]);
    grid.cell(static_cast<int>(e) + 1, sample) = *running;
  }
}

CartographyPoint make_point(const Sample& s, size_t index, int epoch, const TrajectoryStats& stats,
                            const RegionConfig& config,
                            const heuristics::AnnotationSet& annotations) {
  CartographyPoint p;
  p.sample_id = s.id;
  p.epoch = epoch;
  p.confidence = stats.confidence();
  p.variability = stats.variability();
  p.region = classify_region(p.confidence, p.variability, config);
  if (const auto* a = annotations.find(index)) p.heuristic_tag = a->tag;
  p.distribution = s.distribution;
  p.split = s.split;
  return p;
}

}  // namespace

StatsGrid fold_trajectories_serial(const ingest::Trajectories& trajectories) {
  StatsGrid grid(trajectories.values.size(), trajectories.max_epoch);
  for (size_t i = 0; i < trajectories.values.size(); ++i) {
    fold_one(trajectories.values[i], i, grid);
  }
  return grid;
}

StatsGrid fold_trajectories(const ingest::Trajectories& trajectories) {
  StatsGrid grid(trajectories.values.size(), trajectories.max_epoch);
  const auto n = static_cast<std::ptrdiff_t>(trajectories.values.size());
  // update_trajectory cannot throw here: ingestion already range-checked p.
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    fold_one(trajectories.values[static_cast<size_t>(i)], static_cast<size_t>(i), grid);
  }
  return grid;
}

std::vector<CartographyPoint> points_at(const ingest::Corpus& corpus, const StatsGrid& grid,
                                        int epoch, const RegionConfig& config,
                                        const heuristics::AnnotationSet& annotations) {
  std::vector<CartographyPoint> points;
  for (size_t i = 0; i < corpus.samples.size(); ++i) {
    if (const auto* stats = grid.at(epoch, i)) {
      points.push_back(make_point(corpus.samples[i], i, epoch, *stats, config, annotations));
    }
  }
  return points;
}

std::vector<CartographyPoint> snapshot_epoch(const ingest::Corpus& corpus, int epoch,
                                             const RegionConfig& config,
                                             const heuristics::AnnotationSet& annotations) {
  if (epoch < 1 || epoch > corpus.max_epoch) {
    throw ComputeError(fmt::format("epoch {} outside 1..{}", epoch, corpus.max_epoch));
  }
  const auto trajectories = ingest::trajectories_of(corpus);
  std::vector<CartographyPoint> points;
  for (size_t i = 0; i < corpus.samples.size(); ++i) {
    const auto& traj = trajectories.values[i];
    if (traj.size() < static_cast<size_t>(epoch)) continue;
    std::optional<TrajectoryStats> stats;
    for (int e = 0; e < epoch; ++e) stats = update_trajectory(stats, traj[static_cast<size_t>(e)]);
    points.push_back(make_point(corpus.samples[i], i, epoch, *stats, config, annotations));
  }
  return points;
}

std::vector<std::vector<CartographyPoint>> all_snapshots(
    const ingest::Corpus& corpus, const RegionConfig& config,
    const heuristics::AnnotationSet& annotations) {
  const StatsGrid grid = fold_trajectories(ingest::trajectories_of(corpus));
  std::vector<std::vector<CartographyPoint>> out;
  out.reserve(static_cast<size_t>(corpus.max_epoch));
  for (int e = 1; e <= corpus.max_epoch; ++e) {
    out.push_back(points_at(corpus, grid, e, config, annotations));
  }
  return out;
}

void write_dynamics_csv(std::ostream& out,
                        const std::vector<std::vector<CartographyPoint>>& snapshots) {
  csv::write_row(out, {"sample_id", "split", "distribution", "epoch", "confidence", "variability",
                       "region", "heuristic_tag"});
  for (const auto& points : snapshots) {
    for (const auto& p : points) {
      csv::write_row(out, {p.sample_id, std::string(to_string(p.split)),
                           std::string(to_string(p.distribution)), std::to_string(p.epoch),
                           csv::real(p.confidence), csv::real(p.variability),
                           std::string(to_string(p.region)),
                           p.heuristic_tag ? std::string(to_string(*p.heuristic_tag)) : ""});
    }
  }
}

}  // namespace cartography::dynamics
