#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cartography/error.hpp"
#include "cartography/types.hpp"

namespace cartography::synth {

struct InvalidSpec : Error {
  explicit InvalidSpec(const std::string& what) : Error(ErrorKind::usage, what) {}
};

// Synthetic corpus with planted statistics. Terminal confidence of a sample is
//   0.5 + slope * (m2 - 0.375) + noise_scale * z,  z ~ N(0, 1),
// clamped to [0, 1]; the line crosses 0.5 between m2 grid points so no
// noiseless sample sits on the default confidence threshold.
struct SynthSpec {
  size_t n_train = 2000;
  size_t n_eval_in = 500;
  size_t n_eval_ood = 500;
  int epochs = 8;
  uint64_t seed = 7;
  double planted_slope = 0.6;
  double noise_scale = 0.05;
  size_t vocabulary_size = 64;
  // Slope used for OOD eval samples instead of planted_slope.
  std::optional<double> ood_slope;

  // Throws InvalidSpec.
  void check() const;
  size_t total() const { return n_train + n_eval_in + n_eval_ood; }
};

inline constexpr size_t kHypothesisWords = 4;

struct GeneratedSample {
  Sample sample;
  size_t premise_words = 0;  // distinct words in the premise
  size_t shared_words = 0;   // hypothesis words that also occur in the premise
  double terminal_confidence = 0.0;
  std::vector<double> trajectory;  // p_true for epochs 1..epochs
};

// Sample `index` (train first, then in-distribution eval, then OOD eval),
// computed from (seed, index) alone.
GeneratedSample generate_sample(const SynthSpec& spec, size_t index);

// Canonical dataset and predictions JSON-lines plus the oracle JSON-lines
// ({"kind": "tag" | "trajectory" | "correlation", ...}) computed by direct
// two-pass formulas.
void generate(const SynthSpec& spec, std::ostream& dataset, std::ostream& predictions,
              std::ostream& oracle);

struct GeneratedFiles {
  std::filesystem::path dataset;
  std::filesystem::path predictions;
  std::filesystem::path oracle;
};

GeneratedFiles generate(const SynthSpec& spec, const std::filesystem::path& out_dir);

struct VerifyReport {
  bool passed = false;
  size_t checked = 0;
  std::string message;  // first divergence, or a summary on success
};

inline constexpr double kStatsTolerance = 1e-9;

// Compares pipeline CSVs (dynamics, annotations, correlations) to the oracle.
// Values within kStatsTolerance; regions and tags exactly. Throws IngestError
// when a CSV header does not match its schema.
VerifyReport verify(std::istream& oracle, std::istream& dynamics_csv,
                    std::istream& annotations_csv, std::istream& correlations_csv);
VerifyReport verify(const std::filesystem::path& oracle, const std::filesystem::path& outputs_dir);

}  // namespace cartography::synth
