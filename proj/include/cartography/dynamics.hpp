#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cartography/heuristics.hpp"
#include "cartography/ingest.hpp"
#include "cartography/types.hpp"

namespace cartography::dynamics {

// Region thresholds. The defaults are a reproducibility choice; the regions
// themselves are only described qualitatively.
struct RegionConfig {
  double tau_v = 0.25;
  double tau_mu = 0.5;

  // Throws ComputeError unless 0 < tau_v <= 0.5 and 0 < tau_mu < 1.
  void check() const;
};

// Running confidence/variability of one sample after `count` epochs.
// mean and sum_sq_dev are the single-pass accumulators (running mean and
// running sum of squared deviations); confidence() and variability() are the
// population statistics over epochs 1..count.
struct TrajectoryStats {
  int count = 0;
  double mean = 0.0;
  double sum_sq_dev = 0.0;

  double confidence() const;
  double variability() const;
};

// Folds probability p of the next epoch into prev (absent for epoch 1).
// Throws ComputeError if p is outside [0,1].
TrajectoryStats update_trajectory(const std::optional<TrajectoryStats>& prev, double p);

// Ambiguous iff variability >= tau_v; otherwise easy iff confidence >= tau_mu.
Region classify_region(double confidence, double variability, const RegionConfig& config);

struct CartographyPoint {
  std::string sample_id;
  int epoch = 0;
  double confidence = 0.0;
  double variability = 0.0;
  Region region = Region::hard_to_learn;
  std::optional<HeuristicTag> heuristic_tag;  // absent when the sample failed annotation
  Distribution distribution = Distribution::in_distribution;
  Split split = Split::train;
};

// Stats for every (epoch, sample) pair; cells of samples that were not logged
// at an epoch are empty.
class StatsGrid {
 public:
  StatsGrid() = default;
  StatsGrid(size_t samples, int max_epoch);

  size_t samples() const { return samples_; }
  int max_epoch() const { return max_epoch_; }

  const TrajectoryStats* at(int epoch, size_t sample) const;
  TrajectoryStats& cell(int epoch, size_t sample);

 private:
  size_t samples_ = 0;
  int max_epoch_ = 0;
  std::vector<TrajectoryStats> cells_;  // epoch-major
};

// One incremental pass per sample over its trajectory. The OpenMP version
// splits samples across threads and is bitwise identical to the serial one.
StatsGrid fold_trajectories(const ingest::Trajectories& trajectories);
StatsGrid fold_trajectories_serial(const ingest::Trajectories& trajectories);

// Points of all samples with stats at `epoch`, in corpus order.
std::vector<CartographyPoint> points_at(const ingest::Corpus& corpus, const StatsGrid& grid,
                                        int epoch, const RegionConfig& config,
                                        const heuristics::AnnotationSet& annotations);

// Direct computation for one epoch: folds each trajectory prefix 1..epoch.
// Throws ComputeError if epoch is outside 1..max_epoch.
std::vector<CartographyPoint> snapshot_epoch(const ingest::Corpus& corpus, int epoch,
                                             const RegionConfig& config,
                                             const heuristics::AnnotationSet& annotations);

// All epochs 1..max_epoch in one incremental pass; element e - 1 equals
// snapshot_epoch(corpus, e, ...).
std::vector<std::vector<CartographyPoint>> all_snapshots(
    const ingest::Corpus& corpus, const RegionConfig& config,
    const heuristics::AnnotationSet& annotations);

// Long-form CSV: sample_id, split, distribution, epoch, confidence,
// variability, region, heuristic_tag. Rows epoch-major.
void write_dynamics_csv(std::ostream& out,
                        const std::vector<std::vector<CartographyPoint>>& snapshots);

}  // namespace cartography::dynamics
