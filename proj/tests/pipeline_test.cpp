#include <fmt/format.h>
#include <gtest/gtest.h>
#include <json.hpp>

#include "cartography/checksum.hpp"
#include "cartography/error.hpp"
#include "cartography/pipeline.hpp"
#include "fixtures.hpp"
#include "synth_fixture.hpp"

using namespace cartography;
using namespace cartography::pipeline;
namespace fs = std::filesystem;

namespace {

synth::SynthSpec small_spec() {
  synth::SynthSpec spec;
  spec.n_train = 80;
  spec.n_eval_in = 30;
  spec.n_eval_ood = 30;
  spec.epochs = 8;
  return spec;
}

std::string dataset_line(const std::string& id, const std::string& split, const std::string& dist) {
  return fmt::format(R"({{"id":"{}","premise":"a b c","hypothesis":"a b","gold_label":"entailment","split":"{}","distribution":"{}"}})",
                     id, split, dist) + "\n";
}

std::string prediction_line(const std::string& id, int epoch, double p) {
  return fmt::format(R"({{"sample_id":"{}","epoch":{},"p_true":{}}})", id, epoch, p) + "\n";
}

}  // namespace

TEST(Pipeline, ReportVerifiesAgainstOracle) {
  const auto dir = fixtures::temp_dir("pipeline_report");
  const auto run = fixtures::synth_report(small_spec(), dir);
  const auto report = synth::verify(run.files.oracle, run.config.out_dir);
  EXPECT_TRUE(report.passed) << report.message;
  for (const char* name : {"annotations.csv", "dynamics.csv", "correlations.csv", "manifest.json",
                           "map_train_e8.svg", "map_eval_e8.svg", "trends_m2_all.svg"}) {
    EXPECT_TRUE(fs::exists(run.config.out_dir / name)) << name;
  }
}

TEST(Pipeline, StagesComposeToReport) {
  const auto dir = fixtures::temp_dir("pipeline_compose");
  const auto run = fixtures::synth_report(small_spec(), dir);
  auto staged = run.config;
  staged.out_dir = dir / "staged";
  const auto a = analyze(staged);
  std::vector<std::string> names;
  for (auto&& part : {write_heuristics(a, staged), write_dynamics(a, staged),
                      write_correlations(a, staged), write_maps(a, staged)}) {
    names.insert(names.end(), part.begin(), part.end());
  }
  for (const auto& name : names) {
    EXPECT_EQ(fixtures::read_file(staged.out_dir / name), fixtures::read_file(run.config.out_dir / name))
        << name;
  }
}

TEST(Pipeline, Deterministic) {
  const auto dir = fixtures::temp_dir("pipeline_determinism");
  const auto run = fixtures::synth_report(small_spec(), dir);
  auto again = run.config;
  again.out_dir = dir / "again";
  const auto names = run_report(again);
  for (const auto& name : names) {
    if (name == "manifest.json") continue;
    EXPECT_EQ(fixtures::read_file(again.out_dir / name), fixtures::read_file(run.config.out_dir / name))
        << name;
  }
}

TEST(Pipeline, SelectedEpochsGiveOneMapPerSplit) {
  const auto dir = fixtures::temp_dir("pipeline_epochs");
  const auto files = synth::generate(small_spec(), dir / "in");
  RunConfig config;
  config.datasets = {files.dataset};
  config.predictions = {files.predictions};
  config.out_dir = dir / "out";
  config.map_epochs = {2, 8};
  const auto maps = write_maps(analyze(config), config);
  EXPECT_EQ(maps, (std::vector<std::string>{"map_train_e2.svg", "map_eval_e2.svg",
                                            "map_train_e8.svg", "map_eval_e8.svg"}));
}

TEST(Pipeline, MapEpochOutOfRangeIsUsageError) {
  const auto dir = fixtures::temp_dir("pipeline_bad_epoch");
  const auto files = synth::generate(small_spec(), dir / "in");
  RunConfig config;
  config.datasets = {files.dataset};
  config.predictions = {files.predictions};
  config.out_dir = dir / "out";
  config.map_epochs = {9};
  try {
    analyze(config);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::usage);
  }
}

TEST(Pipeline, MissingInputsAreUsageErrors) {
  RunConfig config;
  EXPECT_THROW(config.check(), Error);
  config.datasets = {"d.jsonl"};
  EXPECT_THROW(config.check(), Error);
  config.predictions = {"p.jsonl"};
  EXPECT_NO_THROW(config.check());
  config.region.tau_v = -1;
  EXPECT_THROW(config.check(), Error);
}

TEST(Pipeline, RoleFileMismatch) {
  const auto dir = fixtures::temp_dir("pipeline_roles");
  fixtures::write_file(dir / "train.jsonl", dataset_line("a", "eval", "in_distribution"));
  fixtures::write_file(dir / "p.jsonl", prediction_line("a", 1, 0.5));
  RunConfig config;
  config.train = dir / "train.jsonl";
  config.predictions = {dir / "p.jsonl"};
  config.out_dir = dir / "out";
  EXPECT_THROW(load_corpus(config), IngestError);
}

TEST(Pipeline, RoleFilesMerge) {
  const auto dir = fixtures::temp_dir("pipeline_role_merge");
  fixtures::write_file(dir / "train.jsonl", dataset_line("a", "train", "in_distribution"));
  fixtures::write_file(dir / "in.jsonl", dataset_line("b", "eval", "in_distribution"));
  fixtures::write_file(dir / "ood.jsonl", dataset_line("c", "eval", "ood"));
  fixtures::write_file(dir / "p.jsonl", prediction_line("a", 1, 0.5) + prediction_line("b", 1, 0.25) +
                                            prediction_line("c", 1, 0.75));
  RunConfig config;
  config.train = dir / "train.jsonl";
  config.eval_in = dir / "in.jsonl";
  config.eval_ood = dir / "ood.jsonl";
  config.predictions = {dir / "p.jsonl"};
  const auto corpus = load_corpus(config);
  ASSERT_EQ(corpus.samples.size(), 3u);
  EXPECT_EQ(stratum_of(corpus.samples[2]), Stratum::eval_ood);
}

TEST(Pipeline, DuplicateIdsAcrossFiles) {
  const auto dir = fixtures::temp_dir("pipeline_dup");
  fixtures::write_file(dir / "a.jsonl", dataset_line("x", "train", "in_distribution"));
  fixtures::write_file(dir / "b.jsonl", dataset_line("x", "eval", "ood"));
  fixtures::write_file(dir / "p.jsonl", prediction_line("x", 1, 0.5));
  RunConfig config;
  config.datasets = {dir / "a.jsonl", dir / "b.jsonl"};
  config.predictions = {dir / "p.jsonl"};
  EXPECT_THROW(load_corpus(config), IngestError);
}

TEST(Pipeline, TrainOodFailsValidation) {
  const auto dir = fixtures::temp_dir("pipeline_train_ood");
  fixtures::write_file(dir / "d.jsonl", dataset_line("x", "train", "ood"));
  fixtures::write_file(dir / "p.jsonl", prediction_line("x", 1, 0.5));
  RunConfig config;
  config.datasets = {dir / "d.jsonl"};
  config.predictions = {dir / "p.jsonl"};
  config.out_dir = dir / "out";
  const auto violations = run_validate(config);
  ASSERT_EQ(violations.size(), 1u);
  EXPECT_EQ(violations[0].rule, "train_in_distribution");
  EXPECT_THROW(run_report(config), IngestError);
  EXPECT_FALSE(fs::exists(config.out_dir / "manifest.json"));
}

TEST(Pipeline, ManifestRecordsInputsConfigAndOutputs) {
  const auto dir = fixtures::temp_dir("pipeline_manifest");
  const auto run = fixtures::synth_report(small_spec(), dir);
  const auto m = nlohmann::json::parse(fixtures::read_file(run.config.out_dir / "manifest.json"));
  ASSERT_EQ(m["inputs"].size(), 2u);
  EXPECT_EQ(m["inputs"][0]["role"], "dataset");
  EXPECT_EQ(m["inputs"][0]["sha256"], sha256_file(run.files.dataset));
  EXPECT_EQ(m["inputs"][1]["sha256"], sha256_file(run.files.predictions));
  EXPECT_EQ(m["config"]["tau_v"], 0.25);
  EXPECT_EQ(m["config"]["tau_mu"], 0.5);
  EXPECT_EQ(m["config"]["correlation"], "pearson");
  EXPECT_EQ(m["config"]["map_epochs"], nlohmann::json::array({8}));
  EXPECT_EQ(m["corpus"]["samples"], 140);
  EXPECT_EQ(m["corpus"]["max_epoch"], 8);
  EXPECT_TRUE(m["annotation_failures"].empty());
  for (const auto& name : m["outputs"]) {
    EXPECT_TRUE(fs::exists(run.config.out_dir / name.get<std::string>())) << name;
  }
}

TEST(Pipeline, AnnotationFailuresAreListed) {
  const auto dir = fixtures::temp_dir("pipeline_annotation_failure");
  fixtures::write_file(
      dir / "d.jsonl",
      dataset_line("ok", "train", "in_distribution") +
          R"({"id":"bad","premise":"a b","hypothesis":"?? !!","gold_label":"entailment","split":"train","distribution":"in_distribution"})"
          "\n");
  fixtures::write_file(dir / "p.jsonl", prediction_line("ok", 1, 0.5) + prediction_line("bad", 1, 0.5));
  RunConfig config;
  config.datasets = {dir / "d.jsonl"};
  config.predictions = {dir / "p.jsonl"};
  config.out_dir = dir / "out";
  run_report(config);
  const auto m = nlohmann::json::parse(fixtures::read_file(config.out_dir / "manifest.json"));
  ASSERT_EQ(m["annotation_failures"].size(), 1u);
  EXPECT_EQ(m["annotation_failures"][0]["sample_id"], "bad");
  EXPECT_NE(fixtures::read_file(config.out_dir / "dynamics.csv").find("bad,train,in_distribution,1,0.500000000,0.000000000,easy_to_learn,\n"),
            std::string::npos);
}

TEST(Sha256, KnownDigest) {
  const auto dir = fixtures::temp_dir("sha");
  fixtures::write_file(dir / "abc", "abc");
  EXPECT_EQ(sha256_file(dir / "abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_THROW(sha256_file(dir / "missing"), Error);
}
