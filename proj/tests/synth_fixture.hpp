#pragma once

#include <filesystem>

#include "cartography/pipeline.hpp"
#include "cartography/synth.hpp"

namespace fixtures {

struct SynthRun {
  cartography::synth::GeneratedFiles files;
  cartography::pipeline::RunConfig config;
};

// Generates `spec` under dir/in and runs the full report into dir/out.
inline SynthRun synth_report(const cartography::synth::SynthSpec& spec,
                             const std::filesystem::path& dir,
                             std::vector<cartography::Measure> measures = {cartography::Measure::m1,
                                                                           cartography::Measure::m2}) {
  SynthRun run;
  run.files = cartography::synth::generate(spec, dir / "in");
  run.config.datasets = {run.files.dataset};
  run.config.predictions = {run.files.predictions};
  run.config.out_dir = dir / "out";
  run.config.measures = std::move(measures);
  cartography::pipeline::run_report(run.config);
  return run;
}

}  // namespace fixtures
