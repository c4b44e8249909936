// cartography: training-dynamics cartography, lexical-overlap tagging and
// correlation trends from per-epoch prediction logs.

#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "cartography/error.hpp"
#include "cartography/pipeline.hpp"
#include "cartography/synth.hpp"

namespace {

using namespace cartography;

struct AnalysisFlags {
  pipeline::RunConfig config;
  std::vector<std::string> measures{"m2"};
  std::string config_file;
};

void add_analysis_options(CLI::App* cmd, AnalysisFlags& f, bool needs_out) {
  auto& c = f.config;
  cmd->add_option("--dataset", c.datasets, "Merged dataset JSON-lines (repeatable)");
  cmd->add_option("--train", c.train, "Training-set dataset file");
  cmd->add_option("--eval-in", c.eval_in, "In-distribution evaluation dataset file");
  cmd->add_option("--eval-ood", c.eval_ood, "OOD evaluation dataset file");
  cmd->add_option("--predictions", c.predictions, "Per-epoch predictions JSON-lines (repeatable)");
  if (needs_out) cmd->add_option("--out", c.out_dir, "Output directory");
  cmd->add_option("--tau-v", c.region.tau_v, "Variability threshold for the ambiguous region")
      ->capture_default_str();
  cmd->add_option("--tau-mu", c.region.tau_mu, "Confidence threshold easy/hard")
      ->capture_default_str();
  cmd->add_option("--sample-fraction", c.style.sample_fraction, "Fraction of points drawn on maps")
      ->capture_default_str();
  cmd->add_option("--seed", c.style.seed, "Seed for map subsampling")->capture_default_str();
  cmd->add_option("--measures", f.measures, "Overlap measures to correlate (m1, m2)")
      ->delimiter(',')
      ->check(CLI::IsMember({"m1", "m2"}))
      ->capture_default_str();
  cmd->add_option("--epochs", c.map_epochs, "Epochs to map (default: final epoch)")->delimiter(',');
  cmd->add_option("--config", f.config_file, "JSON file with flag values (keys are flag names)");
}

// Applies a JSON config: keys are long flag names; the command line wins.
void apply_json_config(CLI::App* cmd, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::usage, fmt::format("cannot open config {}", path));
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::usage, fmt::format("config {}: {}", path, e.what()));
  }
  if (!j.is_object()) throw Error(ErrorKind::usage, fmt::format("config {}: expected an object", path));
  for (const auto& [key, value] : j.items()) {
    if (key == "config") throw Error(ErrorKind::usage, "config files cannot nest --config");
    CLI::Option* opt = nullptr;
    try {
      opt = cmd->get_option("--" + key);
    } catch (const CLI::OptionNotFound&) {
      throw Error(ErrorKind::usage, fmt::format("config {}: unknown key \"{}\"", path, key));
    }
    if (opt->count() > 0) continue;
    std::vector<std::string> results;
    const auto as_text = [](const nlohmann::json& v) {
      return v.is_string() ? v.get<std::string>() : v.dump();
    };
    if (value.is_array()) {
      for (const auto& v : value) results.push_back(as_text(v));
    } else {
      results.push_back(as_text(value));
    }
    try {
      opt->add_result(results);
      opt->run_callback();
    } catch (const CLI::Error& e) {
      throw Error(ErrorKind::usage, fmt::format("config {}: key \"{}\": {}", path, key, e.what()));
    }
  }
}

void finalize(CLI::App* cmd, AnalysisFlags& f, bool needs_out) {
  if (!f.config_file.empty()) apply_json_config(cmd, f.config_file);
  f.config.measures.clear();
  for (const auto& m : f.measures) {
    auto parsed = parse_measure(m);
    if (!parsed) throw Error(ErrorKind::usage, fmt::format("unknown measure \"{}\"", m));
    if (std::find(f.config.measures.begin(), f.config.measures.end(), *parsed) ==
        f.config.measures.end()) {
      f.config.measures.push_back(*parsed);
    }
  }
  if (needs_out && f.config.out_dir.empty()) throw Error(ErrorKind::usage, "--out is required");
  f.config.check();
}

void print_outputs(const pipeline::RunConfig& config, const std::vector<std::string>& names) {
  for (const auto& n : names) std::cout << (config.out_dir / n).string() << '\n';
}

void warn_failures(const pipeline::Analysis& a) {
  for (const auto& f : a.annotations.failures) {
    std::cerr << fmt::format("warning: sample {} not annotated: {}\n", f.sample_id, f.reason);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Training-dynamics cartography and lexical-overlap correlation analysis"};
  app.require_subcommand(1);

  AnalysisFlags validate_flags, dynamics_flags, heuristics_flags, correlate_flags, map_flags,
      report_flags;
  auto* validate = app.add_subcommand("validate", "Check dataset and prediction files");
  add_analysis_options(validate, validate_flags, false);
  auto* dynamics_cmd = app.add_subcommand("dynamics", "Write per-epoch confidence/variability CSV");
  add_analysis_options(dynamics_cmd, dynamics_flags, true);
  auto* heuristics_cmd = app.add_subcommand("heuristics", "Write m1/m2 and heuristic tags CSV");
  add_analysis_options(heuristics_cmd, heuristics_flags, true);
  auto* correlate = app.add_subcommand("correlate", "Write correlation CSV and trend charts");
  add_analysis_options(correlate, correlate_flags, true);
  auto* map = app.add_subcommand("map", "Render cartography maps");
  add_analysis_options(map, map_flags, true);
  auto* report = app.add_subcommand("report", "Run the whole pipeline and write a manifest");
  add_analysis_options(report, report_flags, true);

  synth::SynthSpec spec;
  std::filesystem::path synth_out;
  std::optional<double> ood_slope;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic corpus with an oracle");
  synth_cmd->add_option("--out", synth_out, "Output directory")->required();
  synth_cmd->add_option("--n-train", spec.n_train)->capture_default_str();
  synth_cmd->add_option("--n-eval-in", spec.n_eval_in)->capture_default_str();
  synth_cmd->add_option("--n-eval-ood", spec.n_eval_ood)->capture_default_str();
  synth_cmd->add_option("--epochs", spec.epochs)->capture_default_str();
  synth_cmd->add_option("--seed", spec.seed)->capture_default_str();
  synth_cmd->add_option("--slope", spec.planted_slope, "Planted m2 -> confidence slope")
      ->capture_default_str();
  synth_cmd->add_option("--ood-slope", ood_slope, "Slope for OOD samples (default: --slope)");
  synth_cmd->add_option("--noise", spec.noise_scale)->capture_default_str();
  synth_cmd->add_option("--vocab", spec.vocabulary_size)->capture_default_str();

  std::filesystem::path oracle_path, outputs_dir;
  auto* verify = app.add_subcommand("verify", "Compare pipeline outputs with a synth oracle");
  verify->add_option("--oracle", oracle_path)->required();
  verify->add_option("--outputs", outputs_dir, "Directory written by report")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return static_cast<int>(ErrorKind::usage);
  }

  try {
    if (validate->parsed()) {
      finalize(validate, validate_flags, false);
      const auto violations = pipeline::run_validate(validate_flags.config);
      for (const auto& v : violations) {
        std::cerr << fmt::format("violation: {} [{}] {}\n", v.sample_id, v.rule, v.detail);
      }
      if (!violations.empty()) return static_cast<int>(ErrorKind::ingest);
      std::cout << "ok\n";
    } else if (report->parsed()) {
      finalize(report, report_flags, true);
      print_outputs(report_flags.config, pipeline::run_report(report_flags.config));
    } else if (synth_cmd->parsed()) {
      spec.ood_slope = ood_slope;
      const auto files = synth::generate(spec, synth_out);
      std::cout << files.dataset.string() << '\n'
                << files.predictions.string() << '\n'
                << files.oracle.string() << '\n';
    } else if (verify->parsed()) {
      const auto result = synth::verify(oracle_path, outputs_dir);
      std::cout << (result.passed ? "PASS: " : "FAIL: ") << result.message << '\n';
      return result.passed ? 0 : static_cast<int>(ErrorKind::compute);
    } else {
      const std::pair<CLI::App*, AnalysisFlags*> commands[] = {
          {dynamics_cmd, &dynamics_flags},
          {heuristics_cmd, &heuristics_flags},
          {correlate, &correlate_flags},
          {map, &map_flags}};
      for (auto [cmd, flags] : commands) {
        if (!cmd->parsed()) continue;
        finalize(cmd, *flags, true);
        const auto analysis = pipeline::analyze(flags->config);
        warn_failures(analysis);
        std::vector<std::string> written;
        if (cmd == dynamics_cmd) written = pipeline::write_dynamics(analysis, flags->config);
        if (cmd == heuristics_cmd) written = pipeline::write_heuristics(analysis, flags->config);
        if (cmd == correlate) written = pipeline::write_correlations(analysis, flags->config);
        if (cmd == map) written = pipeline::write_maps(analysis, flags->config);
        print_outputs(flags->config, written);
      }
    }
  } catch (const Error& e) {
    std::cerr << fmt::format("error ({}): {}\n",
                             e.kind() == ErrorKind::usage    ? "usage"
                             : e.kind() == ErrorKind::ingest ? "ingest"
                             : e.kind() == ErrorKind::compute ? "compute"
                                                              : "output",
                             e.what());
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error (compute): " << e.what() << '\n';
    return static_cast<int>(ErrorKind::compute);
  }
  return 0;
}
