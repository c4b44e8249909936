#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cartography/types.hpp"

namespace cartography::ingest {

// In-memory analysis corpus. predictions[e - 1] holds the records of epoch e,
// ordered like `samples`. Built by the loaders; treat as immutable afterwards.
struct Corpus {
  std::vector<Sample> samples;
  std::vector<std::vector<PredictionRecord>> predictions;
  int max_epoch = 0;
};

struct Violation {
  std::string sample_id;
  std::string rule;
  std::string detail;

  bool operator==(const Violation&) const = default;
};

// Dataset JSON-lines. Throws IngestError citing "<source>:<line>" and the field.
std::vector<Sample> parse_dataset(std::istream& in, std::string_view source = "<stream>");
std::vector<Sample> load_dataset(const std::filesystem::path& path);

// Predictions JSON-lines, one record per line. Only per-line checks happen here
// (shape, types, p_true range); cross-record checks live in assemble_predictions.
std::vector<PredictionRecord> parse_prediction_records(std::istream& in,
                                                       std::string_view source = "<stream>");

struct PredictionLog {
  std::vector<std::vector<PredictionRecord>> by_epoch;
  int max_epoch = 0;
};

// Resolves ids, rejects duplicate (sample_id, epoch) and trajectory gaps, and
// orders records canonically. Input order does not matter.
PredictionLog assemble_predictions(std::vector<PredictionRecord> records,
                                   std::span<const Sample> samples);

PredictionLog load_predictions(const std::filesystem::path& path, std::span<const Sample> samples);
PredictionLog load_predictions(std::span<const std::filesystem::path> paths,
                               std::span<const Sample> samples);

Corpus make_corpus(std::vector<Sample> samples, PredictionLog log);

// Every invariant violation of the corpus; empty means valid. Never throws.
std::vector<Violation> validate(const Corpus& corpus);

// Canonical serialization: fixed key order, one object per line, predictions
// epoch-major in sample order. Loading canonical files and writing them back
// reproduces the same bytes.
void write_dataset(std::ostream& out, std::span<const Sample> samples);
void write_predictions(std::ostream& out, const Corpus& corpus);

// Dense per-sample probability trajectories, indexed like corpus.samples.
// values[i][e - 1] is p_true at epoch e; shorter vectors mean the sample
// stopped being logged.
struct Trajectories {
  std::vector<std::vector<double>> values;
  int max_epoch = 0;
};

Trajectories trajectories_of(const Corpus& corpus);

}  // namespace cartography::ingest
