#include "cartography/pipeline.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>

#include <fmt/format.h>
#include <json.hpp>

#include "cartography/checksum.hpp"
#include "cartography/error.hpp"

namespace cartography::pipeline {
namespace {

void ensure_out_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw OutputError(fmt::format("cannot create {}: {}", dir.string(), ec.message()));
}

std::vector<Sample> load_role(const std::filesystem::path& path, Split split,
                              Distribution distribution, std::string_view role) {
  auto samples = ingest::load_dataset(path);
  for (const auto& s : samples) {
    if (s.split != split || s.distribution != distribution) {
      throw IngestError(fmt::format("{}: sample \"{}\" is {}/{} but the file was given as {}",
                                    path.string(), s.id, to_string(s.split),
                                    to_string(s.distribution), role));
    }
  }
  return samples;
}

std::vector<int> epochs_to_map(const RunConfig& config, int max_epoch) {
  if (config.map_epochs.empty()) return {max_epoch};
  for (int e : config.map_epochs) {
    if (e < 1 || e > max_epoch) {
      throw Error(ErrorKind::usage,
                  fmt::format("epoch {} to map is outside 1..{}", e, max_epoch));
    }
  }
  return config.map_epochs;
}

template <typename Writer>
std::string write_output(const RunConfig& config, const std::string& name, Writer&& writer) {
  std::ostringstream out;
  writer(out);
  render::write_text_file(config.out_dir / name, out.str());
  return name;
}

}  // namespace

void RunConfig::check() const {
  if (datasets.empty() && !train && !eval_in && !eval_ood) {
    throw Error(ErrorKind::usage, "no dataset given (--dataset or --train/--eval-in/--eval-ood)");
  }
  if (predictions.empty()) throw Error(ErrorKind::usage, "no predictions file given");
  if (measures.empty()) throw Error(ErrorKind::usage, "at least one measure is required");
  try {
    region.check();
    style.check();
  } catch (const ComputeError& e) {
    throw Error(ErrorKind::usage, e.what());
  }
}

std::vector<InputFile> input_files(const RunConfig& config) {
  std::vector<InputFile> files;
  for (const auto& p : config.datasets) files.push_back({"dataset", p});
  if (config.train) files.push_back({"train", *config.train});
  if (config.eval_in) files.push_back({"eval_in_distribution", *config.eval_in});
  if (config.eval_ood) files.push_back({"eval_ood", *config.eval_ood});
  for (const auto& p : config.predictions) files.push_back({"predictions", p});
  return files;
}

ingest::Corpus load_corpus(const RunConfig& config) {
  std::vector<Sample> samples;
  const auto append = [&](std::vector<Sample> part) {
    samples.insert(samples.end(), std::make_move_iterator(part.begin()),
                   std::make_move_iterator(part.end()));
  };
  for (const auto& p : config.datasets) append(ingest::load_dataset(p));
  if (config.train) append(load_role(*config.train, Split::train, Distribution::in_distribution, "train"));
  if (config.eval_in) {
    append(load_role(*config.eval_in, Split::eval, Distribution::in_distribution, "eval_in_distribution"));
  }
  if (config.eval_ood) append(load_role(*config.eval_ood, Split::eval, Distribution::ood, "eval_ood"));

  std::unordered_set<std::string_view> ids;
  for (const auto& s : samples) {
    if (!ids.insert(s.id).second) {
      throw IngestError(fmt::format("duplicate id \"{}\" across dataset files", s.id));
    }
  }
  auto log = ingest::load_predictions(config.predictions, samples);
  return ingest::make_corpus(std::move(samples), std::move(log));
}

std::vector<ingest::Violation> run_validate(const RunConfig& config) {
  return ingest::validate(load_corpus(config));
}

Analysis analyze(const RunConfig& config) {
  config.check();
  Analysis a;
  a.corpus = load_corpus(config);
  if (auto violations = ingest::validate(a.corpus); !violations.empty()) {
    std::string msg = fmt::format("{} validation violation(s):", violations.size());
    for (const auto& v : violations) msg += fmt::format("\n  {} [{}] {}", v.sample_id, v.rule, v.detail);
    throw IngestError(msg);
  }
  epochs_to_map(config, a.corpus.max_epoch);
  a.annotations = heuristics::annotate_corpus(a.corpus.samples);
  a.grid = dynamics::fold_trajectories(ingest::trajectories_of(a.corpus));
  return a;
}

std::vector<std::string> write_heuristics(const Analysis& a, const RunConfig& config) {
  ensure_out_dir(config.out_dir);
  return {write_output(config, "annotations.csv",
                       [&](std::ostream& out) { heuristics::write_annotations_csv(out, a.annotations); })};
}

std::vector<std::string> write_dynamics(const Analysis& a, const RunConfig& config) {
  ensure_out_dir(config.out_dir);
  std::vector<std::vector<dynamics::CartographyPoint>> snapshots;
  for (int e = 1; e <= a.corpus.max_epoch; ++e) {
    snapshots.push_back(dynamics::points_at(a.corpus, a.grid, e, config.region, a.annotations));
  }
  return {write_output(config, "dynamics.csv",
                       [&](std::ostream& out) { dynamics::write_dynamics_csv(out, snapshots); })};
}

std::vector<std::string> write_correlations(const Analysis& a, const RunConfig& config) {
  ensure_out_dir(config.out_dir);
  const auto series = correlation::all_series(a.corpus, a.annotations, a.grid, config.measures);
  std::vector<std::string> written{write_output(config, "correlations.csv", [&](std::ostream& out) {
    correlation::write_correlations_csv(out, series);
  })};

  for (Measure m : config.measures) {
    for (ClassFilter c : kAllClassFilters) {
      std::vector<correlation::CorrelationSeries> lines;
      for (const auto& s : series) {
        if (s.measure == m && s.class_filter == c) lines.push_back(s);
      }
      const bool any = std::any_of(lines.begin(), lines.end(), [](const auto& s) {
        return std::any_of(s.points.begin(), s.points.end(), [](const auto& p) { return p.rho.has_value(); });
      });
      if (!any) continue;
      const auto name = fmt::format("trends_{}_{}.svg", to_string(m), to_string(c));
      render::render_trends(lines, config.out_dir / name,
                            fmt::format("rho({}, confidence), {} samples", to_string(m), to_string(c)));
      written.push_back(name);
    }
  }
  return written;
}

std::vector<std::string> write_maps(const Analysis& a, const RunConfig& config) {
  ensure_out_dir(config.out_dir);
  std::vector<std::string> written;
  for (int e : epochs_to_map(config, a.corpus.max_epoch)) {
    const auto points = dynamics::points_at(a.corpus, a.grid, e, config.region, a.annotations);
    for (Split split : {Split::train, Split::eval}) {
      std::vector<dynamics::CartographyPoint> subset;
      for (const auto& p : points) {
        if (p.split == split) subset.push_back(p);
      }
      if (subset.empty()) continue;
      const auto name = fmt::format("map_{}_e{}.svg", to_string(split), e);
      render::render_map(subset, config.style, config.out_dir / name,
                         fmt::format("{} cartography, epoch {}", to_string(split), e));
      written.push_back(name);
    }
  }
  return written;
}

std::string manifest_json(const RunConfig& config, const Analysis& a,
                          const std::vector<std::string>& outputs) {
  nlohmann::ordered_json m;
  m["tool"] = "cartography";
  m["command"] = "report";
  auto& inputs = m["inputs"] = nlohmann::ordered_json::array();
  for (const auto& f : input_files(config)) {
    inputs.push_back({{"role", f.role}, {"path", f.path.string()}, {"sha256", sha256_file(f.path)}});
  }
  auto& cfg = m["config"];
  cfg["tau_v"] = config.region.tau_v;
  cfg["tau_mu"] = config.region.tau_mu;
  cfg["sample_fraction"] = config.style.sample_fraction;
  cfg["seed"] = config.style.seed;
  cfg["measures"] = nlohmann::ordered_json::array();
  for (Measure x : config.measures) cfg["measures"].push_back(to_string(x));
  cfg["map_epochs"] = epochs_to_map(config, a.corpus.max_epoch);
  cfg["correlation"] = "pearson";
  cfg["variability"] = "population_std";
  m["corpus"] = {{"samples", a.corpus.samples.size()}, {"max_epoch", a.corpus.max_epoch}};
  auto& failures = m["annotation_failures"] = nlohmann::ordered_json::array();
  for (const auto& f : a.annotations.failures) {
    failures.push_back({{"sample_id", f.sample_id}, {"reason", f.reason}});
  }
  m["outputs"] = outputs;
  return m.dump(2) + "\n";
}

std::vector<std::string> run_report(const RunConfig& config) {
  const Analysis a = analyze(config);
  std::vector<std::string> outputs;
  for (auto&& part : {write_heuristics(a, config), write_dynamics(a, config),
                      write_correlations(a, config), write_maps(a, config)}) {
    outputs.insert(outputs.end(), part.begin(), part.end());
  }
  render::write_text_file(config.out_dir / "manifest.json", manifest_json(config, a, outputs));
  outputs.push_back("manifest.json");
  return outputs;
}

}  // namespace cartography::pipeline
