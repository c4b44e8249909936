#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cartography/correlation.hpp"
#include "cartography/dynamics.hpp"
#include "cartography/heuristics.hpp"
#include "cartography/ingest.hpp"
#include "cartography/render.hpp"

namespace cartography::pipeline {

// Mirrors the CLI flags one-to-one.
struct RunConfig {
  std::vector<std::filesystem::path> datasets;  // merged dataset files
  std::optional<std::filesystem::path> train;   // role files
  std::optional<std::filesystem::path> eval_in;
  std::optional<std::filesystem::path> eval_ood;
  std::vector<std::filesystem::path> predictions;
  std::filesystem::path out_dir;
  dynamics::RegionConfig region;
  render::MapStyle style;
  std::vector<Measure> measures{Measure::m2};
  std::vector<int> map_epochs;  // empty: final epoch only

  // Throws Error(usage) for missing inputs or invalid settings.
  void check() const;
};

struct InputFile {
  std::string role;  // dataset, train, eval_in_distribution, eval_ood, predictions
  std::filesystem::path path;
};

std::vector<InputFile> input_files(const RunConfig& config);

// Loads every dataset file (checking role files agree with their samples'
// split/distribution) and the prediction logs.
ingest::Corpus load_corpus(const RunConfig& config);

// Loading plus validate(); empty result means the inputs are valid.
std::vector<ingest::Violation> run_validate(const RunConfig& config);

struct Analysis {
  ingest::Corpus corpus;
  heuristics::AnnotationSet annotations;
  dynamics::StatsGrid grid;
};

// Loads, validates (IngestError listing violations) and computes annotations
// and the stats grid.
Analysis analyze(const RunConfig& config);

// Each writer puts fixed file names under config.out_dir and returns them
// relative to it.
std::vector<std::string> write_heuristics(const Analysis& a, const RunConfig& config);
std::vector<std::string> write_dynamics(const Analysis& a, const RunConfig& config);
std::vector<std::string> write_correlations(const Analysis& a, const RunConfig& config);
std::vector<std::string> write_maps(const Analysis& a, const RunConfig& config);

// Full pipeline: all of the above plus manifest.json.
std::vector<std::string> run_report(const RunConfig& config);

std::string manifest_json(const RunConfig& config, const Analysis& a,
                          const std::vector<std::string>& outputs);

}  // namespace cartography::pipeline
