// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "cartography/correlation.hpp"
#include "cartography/dynamics.hpp"
#include "cartography/heuristics.hpp"
#include "cartography/pipeline.hpp"
#include "cartography/render.hpp"
#include "cartography/synth.hpp"
#include "fixtures.hpp"
#include "map_fixture.hpp"
#include "oracles.hpp"

using namespace cartography;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool passed;
  std::string detail;
};

Outcome ok(std::string detail) { return {true, std::move(detail)}; }
Outcome fail(std::string detail) { return {false, std::move(detail)}; }

int shell(const std::string& args) {
  const std::string cmd = std::string(CARTOGRAPHY_BIN) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

// synth + report through the command-line tool.
bool cli_synth_report(const synth::SynthSpec& spec, const fs::path& dir, const fs::path& out) {
  std::string args = fmt::format(
      "synth --out {} --n-train {} --n-eval-in {} --n-eval-ood {} --epochs {} --seed {} --slope {} "
      "--noise {}",
      q(dir / "in"), spec.n_train, spec.n_eval_in, spec.n_eval_ood, spec.epochs, spec.seed,
      spec.planted_slope, spec.noise_scale);
  if (spec.ood_slope) args += fmt::format(" --ood-slope {}", *spec.ood_slope);
  if (!fs::exists(dir / "in" / "oracle.jsonl") && shell(args) != 0) return false;
  return shell(fmt::format("report --dataset {} --predictions {} --measures m1,m2 --out {}",
                           q(dir / "in" / "dataset.jsonl"), q(dir / "in" / "predictions.jsonl"),
                           q(out))) == 0;
}

pipeline::Analysis analyze_dir(const fs::path& dir) {
  pipeline::RunConfig config;
  config.datasets = {dir / "in" / "dataset.jsonl"};
  config.predictions = {dir / "in" / "predictions.jsonl"};
  return pipeline::analyze(config);
}

Outcome judge_actor_example() {
  const auto support = heuristics::tag_heuristic(
      fixtures::sample("a", "The judge was paid by the actor.", "The actor paid the judge.",
                       GoldLabel::entailment));
  const auto contradict = heuristics::tag_heuristic(
      fixtures::sample("b", "The actor was paid by the judge.", "The actor paid the judge.",
                       GoldLabel::non_entailment));
  if (support.m2 != 1.0 || contradict.m2 != 1.0) return fail("m2 is not 1");
  if (support.tag != HeuristicTag::support) return fail("first pair not support");
  if (contradict.tag != HeuristicTag::contradict) return fail("second pair not contradict");
  if (support.m1 != 4.0 / 6.0) return fail(fmt::format("m1 = {}", support.m1));
  return ok("m2 = 1, support/contradict, m1 = 4/6");
}

Outcome trajectory_oracle() {
  std::mt19937_64 rng(20240601);
  double worst = 0.0;
  for (int t = 0; t < 10000; ++t) {
    const auto values = oracle::random_probabilities(rng, 1 + rng() % 50);
    std::optional<dynamics::TrajectoryStats> stats;
    for (size_t e = 1; e <= values.size(); ++e) {
      stats = dynamics::update_trajectory(stats, values[e - 1]);
      const auto expected = oracle::two_pass(values, e);
      worst = std::max({worst, std::abs(stats->confidence() - expected.mean),
                        std::abs(stats->variability() - expected.std)});
    }
  }
  if (worst > 1e-9) return fail(fmt::format("max deviation {:.3e}", worst));
  return ok(fmt::format("10000 trajectories, max deviation {:.3e}", worst));
}

Outcome variability_bound() {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 10000; ++t) {
    const size_t n = 1 + rng() % 50;
    std::vector<double> values(n);
    // Mix uniform draws with extreme 0/1 values to probe the upper bound.
    for (auto& v : values) v = rng() % 3 == 0 ? static_cast<double>(rng() % 2) : u(rng);
    std::optional<dynamics::TrajectoryStats> stats;
    for (double v : values) {
      stats = dynamics::update_trajectory(stats, v);
      const double s = stats->variability();
      if (!(s >= 0.0 && s <= 0.5)) return fail(fmt::format("variability {} out of range", s));
    }
    const double c = u(rng);
    std::optional<dynamics::TrajectoryStats> flat;
    for (size_t e = 0; e < n; ++e) {
      flat = dynamics::update_trajectory(flat, c);
      if (flat->variability() != 0.0) return fail(fmt::format("constant {} gives non-zero", c));
    }
  }
  return ok("10000 trajectories in [0, 0.5], constants exactly 0");
}

Outcome pearson_oracle() {
  std::mt19937_64 rng(77);
  size_t undefined = 0;
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const size_t n = 1 + rng() % 500;
    auto xs = oracle::random_probabilities(rng, n);
    auto ys = oracle::random_probabilities(rng, n);
    if (t % 20 == 0) std::fill(xs.begin(), xs.end(), 0.75);
    if (t % 20 == 1) std::fill(ys.begin(), ys.end(), 0.0);
    const auto expected = oracle::pearson(xs, ys);
    const auto got = correlation::pearson(xs, ys);
    if (expected.has_value() != got.has_value()) return fail(fmt::format("definedness differs, trial {}", t));
    if (!got) {
      ++undefined;
      continue;
    }
    worst = std::max(worst, std::abs(*got - *expected));
  }
  if (worst > 1e-9) return fail(fmt::format("max deviation {:.3e}", worst));
  return ok(fmt::format("1000 pairs ({} undefined), max deviation {:.3e}", undefined, worst));
}

Outcome end_to_end(const fs::path& root) {
  synth::SynthSpec spec;  // 2000 / 500 / 500, 8 epochs
  const auto dir = root / "e2e";
  if (!cli_synth_report(spec, dir, dir / "out")) return fail("synth or report exited non-zero");
  const auto report = synth::verify(dir / "in" / "oracle.jsonl", dir / "out");
  if (!report.passed) return fail(report.message);

  auto exact = spec;
  exact.noise_scale = 0.0;
  const auto exact_dir = root / "e2e_noiseless";
  if (!cli_synth_report(exact, exact_dir, exact_dir / "out")) return fail("noiseless run failed");
  const auto a = analyze_dir(exact_dir);
  for (Stratum s : kAllStrata) {
    for (ClassFilter c : kAllClassFilters) {
      const auto p = correlation::correlation_at_epoch(a.corpus, a.annotations, a.grid, exact.epochs,
                                                       s, c, Measure::m2);
      if (!p.rho || *p.rho != 1.0) {
        return fail(fmt::format("noiseless rho {} {} = {}", to_string(s), to_string(c),
                                p.rho ? fmt::format("{:.17g}", *p.rho) : "undefined"));
      }
    }
  }
  return ok(fmt::format("{}; noiseless final-epoch rho == 1 in all strata", report.message));
}

Outcome divergence(const fs::path& root) {
  synth::SynthSpec spec;
  spec.n_train = 1000;
  spec.n_eval_in = 500;
  spec.n_eval_ood = 500;
  spec.planted_slope = 0.6;
  spec.ood_slope = -0.6;
  const auto dir = root / "divergence";
  if (!cli_synth_report(spec, dir, dir / "out")) return fail("synth or report exited non-zero");
  const auto report = synth::verify(dir / "in" / "oracle.jsonl", dir / "out");
  if (!report.passed) return fail(report.message);

  std::optional<double> oracle_in, oracle_ood;
  std::ifstream in(dir / "in" / "oracle.jsonl");
  std::string line;
  while (std::getline(in, line)) {
    const auto rec = nlohmann::json::parse(line);
    if (rec["kind"] != "correlation" || rec["epoch"] != spec.epochs || rec["measure"] != "m2" ||
        rec["class_filter"] != "entailment" || rec["rho"].is_null()) {
      continue;
    }
    if (rec["stratum"] == "eval_in_distribution") oracle_in = rec["rho"].get<double>();
    if (rec["stratum"] == "eval_ood") oracle_ood = rec["rho"].get<double>();
  }
  if (!oracle_in || !oracle_ood) return fail("oracle lacks final-epoch eval correlations");

  const auto a = analyze_dir(dir);
  const auto at = [&](Stratum s) {
    return correlation::correlation_at_epoch(a.corpus, a.annotations, a.grid, spec.epochs, s,
                                             ClassFilter::entailment, Measure::m2).rho;
  };
  const auto rho_in = at(Stratum::eval_in_distribution);
  const auto rho_ood = at(Stratum::eval_ood);
  if (!rho_in || !rho_ood) return fail("pipeline correlation undefined");
  if (std::abs(*rho_in - *oracle_in) > 1e-9 || std::abs(*rho_ood - *oracle_ood) > 1e-9) {
    return fail("pipeline differs from oracle");
  }
  const double gap = std::abs(*rho_ood - *rho_in);
  if (gap <= 0.5) return fail(fmt::format("|rho_ood - rho_in| = {:.4f}", gap));
  return ok(fmt::format("rho_in {:.4f}, rho_ood {:.4f}, gap {:.4f}", *rho_in, *rho_ood, gap));
}

Outcome determinism(const fs::path& root) {
  synth::SynthSpec spec;
  spec.n_train = 500;
  spec.n_eval_in = 200;
  spec.n_eval_ood = 200;
  const auto dir = root / "determinism";
  if (!cli_synth_report(spec, dir, dir / "run1") || !cli_synth_report(spec, dir, dir / "run2")) {
    return fail("report exited non-zero");
  }
  size_t compared = 0;
  for (const auto& entry : fs::directory_iterator(dir / "run1")) {
    const auto ext = entry.path().extension();
    if (ext != ".csv" && ext != ".svg") continue;
    const auto other = dir / "run2" / entry.path().filename();
    if (fixtures::read_file(entry.path()) != fixtures::read_file(other)) {
      return fail(entry.path().filename().string() + " differs");
    }
    ++compared;
  }
  if (compared == 0) return fail("no outputs compared");
  return ok(fmt::format("{} CSV/SVG files byte-identical", compared));
}

Outcome map_conventions() {
  const auto svg = render::map_svg(fixtures::golden_map_points(), {}, "fixture");
  const auto golden = fixtures::read_file(fs::path(TEST_GOLDEN_DIR) / "map_fixture.svg");
  if (golden.empty()) return fail("golden file missing");
  if (svg != golden) return fail("rendered map differs from golden");
  const std::pair<const char*, const char*> required[] = {
      {"<circle class=\"glyph in_distribution support\"", "fill=\"#2ca02c\""},
      {"<circle class=\"glyph in_distribution contradict\"", "fill=\"#1f77b4\""},
      {"<circle class=\"glyph in_distribution none\"", "fill=\"#7f7f7f\""},
      {"<path class=\"glyph ood support\"", "stroke=\"#2ca02c\""},
      {"<path class=\"glyph ood contradict\"", "stroke=\"#1f77b4\""},
      {"<path class=\"glyph ood untagged\"", "stroke=\"#7f7f7f\""},
  };
  for (const auto& [glyph, color] : required) {
    const auto pos = svg.find(glyph);
    if (pos == std::string::npos) return fail(std::string("missing ") + glyph);
    const auto end = svg.find('\n', pos);
    if (svg.substr(pos, end - pos).find(color) == std::string::npos) {
      return fail(std::string(glyph) + " lacks " + color);
    }
  }
  return ok("golden match; green/blue/gray circles and crosses present");
}

}  // namespace

int main() {
  const auto root = fixtures::temp_dir("acceptance");
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"judge/actor example overlap and tags", judge_actor_example},
      {"incremental trajectory stats match two-pass oracle", trajectory_oracle},
      {"variability bound", variability_bound},
      {"streaming Pearson matches two-pass oracle", pearson_oracle},
      {"end-to-end synth verification", [&] { return end_to_end(root); }},
      {"OOD vs in-distribution divergence", [&] { return divergence(root); }},
      {"report determinism", [&] { return determinism(root); }},
      {"map conventions against golden SVG", map_conventions},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = check();
    } catch (const std::exception& e) {
      outcome = fail(std::string("exception: ") + e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << (outcome.passed ? "PASS" : "FAIL") << "  " << name << " (" << outcome.detail
              << ", " << fmt::format("{:.1f}s", secs) << ")\n";
    failures += outcome.passed ? 0 : 1;
  }
  std::cout << fmt::format("{}/{} criteria passed\n", std::size(criteria) - failures, std::size(criteria));
  return failures == 0 ? 0 : 1;
}
