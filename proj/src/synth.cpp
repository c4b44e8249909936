#include "cartography/synth.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <ostream>
#include <tuple>

#include <fmt/format.h>
#include <json.hpp>

#include "cartography/csv.hpp"

namespace cartography::synth {
namespace {

using ordered_json = nlohmann::ordered_json;

// Default region thresholds; oracle regions are computed against these.
constexpr double kTauMu = 0.5;
constexpr double kTauV = 0.25;
constexpr double kThresholdMargin = 1e-6;
constexpr int kMaxAttempts = 100;

enum Stream : uint64_t {
  kLabel = 1,
  kShared,
  kPremiseLength,
  kWords,
  kShuffle,
  kNoise,
  kAmplitude,
  kDeviation,
};

uint64_t splitmix(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Counter-based uniform in [0, 1): a pure function of its four keys.
double draw(uint64_t seed, uint64_t index, uint64_t stream, uint64_t counter) {
  const uint64_t h = splitmix(seed ^ splitmix(index ^ splitmix(stream ^ splitmix(counter))));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

size_t draw_index(uint64_t seed, uint64_t index, uint64_t stream, uint64_t counter, size_t n) {
  return std::min(n - 1, static_cast<size_t>(draw(seed, index, stream, counter) * n));
}

std::string sentence(const std::vector<size_t>& words) {
  std::string s;
  for (size_t i = 0; i < words.size(); ++i) {
    if (i) s += ' ';
    s += fmt::format("{}{}", i == 0 ? "Tok" : "tok", words[i]);
  }
  return s + ".";
}

struct PrefixStats {
  double confidence;
  double variability;
};

// Direct two-pass population mean and standard deviation of values[0..count).
PrefixStats two_pass(const std::vector<double>& values, size_t count) {
  double sum = 0.0;
  for (size_t i = 0; i < count; ++i) sum += values[i];
  const double mean = sum / static_cast<double>(count);
  double sq = 0.0;
  for (size_t i = 0; i < count; ++i) sq += (values[i] - mean) * (values[i] - mean);
  return {mean, std::sqrt(sq / static_cast<double>(count))};
}

std::string_view region_name(const PrefixStats& s) {
  if (s.variability >= kTauV) return "ambiguous";
  return s.confidence >= kTauMu ? "easy_to_learn" : "hard_to_learn";
}

bool near_threshold(const std::vector<double>& trajectory) {
  for (size_t e = 1; e <= trajectory.size(); ++e) {
    const auto s = two_pass(trajectory, e);
    if (std::abs(s.confidence - kTauMu) < kThresholdMargin ||
        std::abs(s.variability - kTauV) < kThresholdMargin) {
      return true;
    }
  }
  return false;
}

// Two-pass Pearson; undefined when n < 2 or either sequence is constant.
std::optional<double> naive_pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
  const size_t n = xs.size();
  if (n < 2) return std::nullopt;
  const auto constant = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
  };
  if (constant(xs) || constant(ys)) return std::nullopt;
  long double mx = 0, my = 0;
  for (size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  long double sxy = 0, sxx = 0, syy = 0;
  for (size_t i = 0; i < n; ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  const double r = static_cast<double>(sxy / std::sqrt(sxx * syy));
  return std::clamp(r, -1.0, 1.0);
}

Stratum stratum_of_index(const SynthSpec& spec, size_t index) {
  if (index < spec.n_train) return Stratum::train;
  if (index < spec.n_train + spec.n_eval_in) return Stratum::eval_in_distribution;
  return Stratum::eval_ood;
}

}  // namespace

void SynthSpec::check() const {
  if (epochs < 1) throw InvalidSpec(fmt::format("epochs must be >= 1, got {}", epochs));
  if (vocabulary_size < 10) {
    throw InvalidSpec(fmt::format(
        "vocabulary_size must be >= 10 to build 4-word hypotheses over 4..6-word premises, got {}",
        vocabulary_size));
  }
  if (!(noise_scale >= 0.0) || !std::isfinite(noise_scale)) {
    throw InvalidSpec(fmt::format("noise_scale must be >= 0, got {}", noise_scale));
  }
  if (!std::isfinite(planted_slope) || (ood_slope && !std::isfinite(*ood_slope))) {
    throw InvalidSpec("planted slopes must be finite");
  }
}

GeneratedSample generate_sample(const SynthSpec& spec, size_t index) {
  const uint64_t seed = spec.seed;
  const Stratum stratum = stratum_of_index(spec, index);

  GeneratedSample g;
  Sample& s = g.sample;
  switch (stratum) {
    case Stratum::train:
      s.id = fmt::format("train-{:06d}", index);
      s.split = Split::train;
      s.distribution = Distribution::in_distribution;
      break;
    case Stratum::eval_in_distribution:
      s.id = fmt::format("in-{:06d}", index - spec.n_train);
      s.split = Split::eval;
      s.distribution = Distribution::in_distribution;
      break;
    case Stratum::eval_ood:
      s.id = fmt::format("ood-{:06d}", index - spec.n_train - spec.n_eval_in);
      s.split = Split::eval;
      s.distribution = Distribution::ood;
      break;
  }
  s.gold_label = draw(seed, index, kLabel, 0) < 0.5 ? GoldLabel::entailment
                                                    : GoldLabel::non_entailment;

  g.shared_words = draw_index(seed, index, kShared, 0, kHypothesisWords + 1);
  g.premise_words = 4 + draw_index(seed, index, kPremiseLength, 0, 3);

  // Partial Fisher-Yates: the first premise_words picks form the premise, the
  // next ones are words the premise does not contain.
  std::vector<size_t> vocab(spec.vocabulary_size);
  std::iota(vocab.begin(), vocab.end(), size_t{0});
  const size_t needed = g.premise_words + (kHypothesisWords - g.shared_words);
  for (size_t j = 0; j < needed; ++j) {
    const size_t k = j + draw_index(seed, index, kWords, j, vocab.size() - j);
    std::swap(vocab[j], vocab[k]);
  }
  std::vector<size_t> premise(vocab.begin(), vocab.begin() + static_cast<long>(g.premise_words));
  std::vector<size_t> hypothesis(premise.begin(), premise.begin() + static_cast<long>(g.shared_words));
  hypothesis.insert(hypothesis.end(), vocab.begin() + static_cast<long>(g.premise_words),
                    vocab.begin() + static_cast<long>(needed));
  for (size_t j = hypothesis.size(); j > 1; --j) {
    std::swap(hypothesis[j - 1], hypothesis[draw_index(seed, index, kShuffle, j, j)]);
  }
  s.premise = sentence(premise);
  s.hypothesis = sentence(hypothesis);

  const double m2 = static_cast<double>(g.shared_words) / static_cast<double>(kHypothesisWords);
  const double slope =
      stratum == Stratum::eval_ood && spec.ood_slope ? *spec.ood_slope : spec.planted_slope;
  const auto epochs = static_cast<size_t>(spec.epochs);

  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    const uint64_t a = static_cast<uint64_t>(attempt) << 32;
    double z = 0.0;
    if (spec.noise_scale > 0.0) {
      const double u1 = 1.0 - draw(seed, index, kNoise, a);
      const double u2 = draw(seed, index, kNoise, a + 1);
      z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }
    const double c = std::clamp(0.5 + slope * (m2 - 0.375) + spec.noise_scale * z, 0.0, 1.0);

    // Zero-mean deviations around c, scaled so every value stays in [0, 1].
    std::vector<double> dev(epochs, 0.0);
    if (epochs > 1) {
      double mean = 0.0;
      for (size_t e = 0; e < epochs; ++e) {
        dev[e] = 2.0 * draw(seed, index, kDeviation, a + e) - 1.0;
        mean += dev[e];
      }
      mean /= static_cast<double>(epochs);
      double max_abs = 0.0;
      for (double& d : dev) {
        d -= mean;
        max_abs = std::max(max_abs, std::abs(d));
      }
      const double amplitude = 0.2 + 0.8 * draw(seed, index, kAmplitude, a);
      const double scale = max_abs > 0.0 ? amplitude * std::min(c, 1.0 - c) / max_abs : 0.0;
      for (double& d : dev) d *= scale;
    }
    g.trajectory.assign(epochs, 0.0);
    for (size_t e = 0; e < epochs; ++e) g.trajectory[e] = std::clamp(c + dev[e], 0.0, 1.0);
    g.terminal_confidence = c;
    if (!near_threshold(g.trajectory)) return g;
  }
  throw ComputeError(fmt::format(
      "synth: sample {} keeps landing on a region threshold; use a non-zero slope or noise", s.id));
}

void generate(const SynthSpec& spec, std::ostream& dataset, std::ostream& predictions,
              std::ostream& oracle) {
  spec.check();
  std::vector<GeneratedSample> samples;
  samples.reserve(spec.total());
  for (size_t i = 0; i < spec.total(); ++i) samples.push_back(generate_sample(spec, i));

  for (const auto& g : samples) {
    ordered_json obj;
    obj["id"] = g.sample.id;
    obj["premise"] = g.sample.premise;
    obj["hypothesis"] = g.sample.hypothesis;
    obj["gold_label"] = to_string(g.sample.gold_label);
    obj["split"] = to_string(g.sample.split);
    obj["distribution"] = to_string(g.sample.distribution);
    dataset << obj.dump() << '\n';
  }
  for (int e = 1; e <= spec.epochs; ++e) {
    for (const auto& g : samples) {
      ordered_json obj;
      obj["sample_id"] = g.sample.id;
      obj["epoch"] = e;
      obj["p_true"] = g.trajectory[static_cast<size_t>(e - 1)];
      predictions << obj.dump() << '\n';
    }
  }

  // Oracle: tags come from the construction counts, not from tokenization.
  std::vector<double> m1(samples.size()), m2(samples.size());
  for (size_t i = 0; i < samples.size(); ++i) {
    const auto& g = samples[i];
    m1[i] = static_cast<double>(g.shared_words) / static_cast<double>(g.premise_words);
    m2[i] = static_cast<double>(g.shared_words) / static_cast<double>(kHypothesisWords);
    const bool present = g.shared_words == kHypothesisWords;
    const bool entailed = g.sample.gold_label == GoldLabel::entailment;
    ordered_json obj;
    obj["kind"] = "tag";
    obj["sample_id"] = g.sample.id;
    obj["m1"] = m1[i];
    obj["m2"] = m2[i];
    obj["tag"] = !present ? "none" : entailed ? "support" : "contradict";
    oracle << obj.dump() << '\n';
  }

  std::vector<std::vector<double>> confidence(static_cast<size_t>(spec.epochs),
                                              std::vector<double>(samples.size()));
  for (int e = 1; e <= spec.epochs; ++e) {
    for (size_t i = 0; i < samples.size(); ++i) {
      const auto stats = two_pass(samples[i].trajectory, static_cast<size_t>(e));
      confidence[static_cast<size_t>(e - 1)][i] = stats.confidence;
      ordered_json obj;
      obj["kind"] = "trajectory";
      obj["sample_id"] = samples[i].sample.id;
      obj["epoch"] = e;
      obj["confidence"] = stats.confidence;
      obj["variability"] = stats.variability;
      obj["region"] = region_name(stats);
      oracle << obj.dump() << '\n';
    }
  }

  // With no samples the logs carry no epochs at all, so neither does the oracle.
  const int oracle_epochs = samples.empty() ? 0 : spec.epochs;
  for (Measure measure : {Measure::m1, Measure::m2}) {
    const auto& xs_all = measure == Measure::m1 ? m1 : m2;
    for (Stratum stratum : kAllStrata) {
      for (ClassFilter filter : kAllClassFilters) {
        for (int e = 1; e <= oracle_epochs; ++e) {
          std::vector<double> xs, ys;
          for (size_t i = 0; i < samples.size(); ++i) {
            if (stratum_of_index(spec, i) != stratum) continue;
            if (!matches(filter, samples[i].sample.gold_label)) continue;
            xs.push_back(xs_all[i]);
            ys.push_back(confidence[static_cast<size_t>(e - 1)][i]);
          }
          const auto rho = naive_pearson(xs, ys);
          ordered_json obj;
          obj["kind"] = "correlation";
          obj["epoch"] = e;
          obj["stratum"] = to_string(stratum);
          obj["class_filter"] = to_string(filter);
          obj["measure"] = to_string(measure);
          obj["rho"] = rho ? ordered_json(*rho) : ordered_json(nullptr);
          obj["n"] = xs.size();
          oracle << obj.dump() << '\n';
        }
      }
    }
  }
}

GeneratedFiles generate(const SynthSpec& spec, const std::filesystem::path& out_dir) {
  spec.check();
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw OutputError(fmt::format("cannot create {}: {}", out_dir.string(), ec.message()));
  GeneratedFiles files{out_dir / "dataset.jsonl", out_dir / "predictions.jsonl",
                       out_dir / "oracle.jsonl"};
  std::ofstream dataset(files.dataset, std::ios::binary);
  std::ofstream predictions(files.predictions, std::ios::binary);
  std::ofstream oracle(files.oracle, std::ios::binary);
  if (!dataset || !predictions || !oracle) {
    throw OutputError(fmt::format("cannot write synth files under {}", out_dir.string()));
  }
  generate(spec, dataset, predictions, oracle);
  dataset.close();
  predictions.close();
  oracle.close();
  if (!dataset || !predictions || !oracle) {
    throw OutputError(fmt::format("failed writing synth files under {}", out_dir.string()));
  }
  return files;
}

// ---- verification ----------------------------------------------------------

namespace {

struct DynamicsRow {
  double confidence;
  double variability;
  std::string region;
  std::string tag;
};

struct AnnotationRow {
  double m1;
  double m2;
  std::string tag;
};

struct CorrelationRow {
  std::optional<double> rho;
  size_t n;
};

using CorrelationKey = std::tuple<int, std::string, std::string, std::string>;

double parse_real(const std::string& s, std::string_view what) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw IngestError(fmt::format("verify: {} is not a number: \"{}\"", what, s));
  }
  return v;
}

long parse_int(const std::string& s, std::string_view what) {
  long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw IngestError(fmt::format("verify: {} is not an integer: \"{}\"", what, s));
  }
  return v;
}

std::vector<std::vector<std::string>> read_table(std::istream& in, std::string_view name,
                                                 const std::vector<std::string>& header) {
  auto rows = csv::parse(in);
  if (rows.empty() || rows.front() != header) {
    throw IngestError(fmt::format("verify: {} header does not match its schema", name));
  }
  rows.erase(rows.begin());
  for (const auto& r : rows) {
    if (r.size() != header.size()) {
      throw IngestError(fmt::format("verify: {} row with {} fields, expected {}", name, r.size(),
                                    header.size()));
    }
  }
  return rows;
}

VerifyReport fail(size_t checked, std::string message) { return {false, checked, std::move(message)}; }

bool close(double a, double b) { return std::abs(a - b) <= kStatsTolerance; }

}  // namespace

VerifyReport verify(std::istream& oracle, std::istream& dynamics_csv,
                    std::istream& annotations_csv, std::istream& correlations_csv) {
  std::map<std::pair<std::string, int>, DynamicsRow> dynamics;
  for (auto& r : read_table(dynamics_csv, "dynamics.csv",
                            {"sample_id", "split", "distribution", "epoch", "confidence",
                             "variability", "region", "heuristic_tag"})) {
    const int epoch = static_cast<int>(parse_int(r[3], "epoch"));
    dynamics[{r[0], epoch}] = {parse_real(r[4], "confidence"), parse_real(r[5], "variability"),
                               r[6], r[7]};
  }
  std::map<std::string, AnnotationRow> annotations;
  for (auto& r : read_table(annotations_csv, "annotations.csv", {"sample_id", "m1", "m2", "tag"})) {
    annotations[r[0]] = {parse_real(r[1], "m1"), parse_real(r[2], "m2"), r[3]};
  }
  std::map<CorrelationKey, CorrelationRow> correlations;
  std::vector<std::string> measures_present;
  for (auto& r : read_table(correlations_csv, "correlations.csv",
                            {"epoch", "stratum", "class_filter", "measure", "rho", "n"})) {
    CorrelationRow row;
    if (!r[4].empty()) row.rho = parse_real(r[4], "rho");
    row.n = static_cast<size_t>(parse_int(r[5], "n"));
    correlations[{static_cast<int>(parse_int(r[0], "epoch")), r[1], r[2], r[3]}] = row;
    if (std::find(measures_present.begin(), measures_present.end(), r[3]) == measures_present.end()) {
      measures_present.push_back(r[3]);
    }
  }

  std::map<std::string, std::string> oracle_tags;
  size_t checked = 0;
  size_t trajectory_records = 0;
  size_t correlation_records = 0;
  std::string line;
  size_t lineno = 0;
  while (std::getline(oracle, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw IngestError(fmt::format("verify: oracle line {}: {}", lineno, e.what()));
    }
    const std::string kind = rec.value("kind", "");
    try {
      if (kind == "tag") {
        const auto id = rec.at("sample_id").get<std::string>();
        const auto expected_tag = rec.at("tag").get<std::string>();
        oracle_tags[id] = expected_tag;
        auto it = annotations.find(id);
        if (it == annotations.end()) {
          return fail(checked, fmt::format("coverage: no annotation for sample {}", id));
        }
        for (const char* m : {"m1", "m2"}) {
          const double want = rec.at(m).get<double>();
          const double got = std::string_view(m) == "m1" ? it->second.m1 : it->second.m2;
          if (!close(got, want)) {
            return fail(checked, fmt::format("sample {}: {} {} differs from oracle {}", id, m,
                                             got, want));
          }
        }
        if (it->second.tag != expected_tag) {
          return fail(checked, fmt::format("sample {}: tag {} differs from oracle {}", id,
                                           it->second.tag, expected_tag));
        }
      } else if (kind == "trajectory") {
        ++trajectory_records;
        const auto id = rec.at("sample_id").get<std::string>();
        const int epoch = rec.at("epoch").get<int>();
        auto it = dynamics.find({id, epoch});
        if (it == dynamics.end()) {
          return fail(checked,
                      fmt::format("coverage: no dynamics row for sample {} epoch {}", id, epoch));
        }
        const auto& row = it->second;
        const double conf = rec.at("confidence").get<double>();
        const double var = rec.at("variability").get<double>();
        if (!close(row.confidence, conf)) {
          return fail(checked, fmt::format("sample {} epoch {}: confidence {} differs from oracle {}",
                                           id, epoch, row.confidence, conf));
        }
        if (!close(row.variability, var)) {
          return fail(checked,
                      fmt::format("sample {} epoch {}: variability {} differs from oracle {}", id,
                                  epoch, row.variability, var));
        }
        const auto region = rec.at("region").get<std::string>();
        if (row.region != region) {
          return fail(checked, fmt::format("sample {} epoch {}: region {} differs from oracle {}",
                                           id, epoch, row.region, region));
        }
        if (auto tag = oracle_tags.find(id); tag != oracle_tags.end() && row.tag != tag->second) {
          return fail(checked, fmt::format("sample {} epoch {}: heuristic_tag {} differs from oracle {}",
                                           id, epoch, row.tag, tag->second));
        }
      } else if (kind == "correlation") {
        const auto measure = rec.at("measure").get<std::string>();
        if (measures_present.empty()) return fail(checked, "coverage: correlations.csv has no rows");
        if (std::find(measures_present.begin(), measures_present.end(), measure) ==
            measures_present.end()) {
          continue;
        }
        ++correlation_records;
        const CorrelationKey key{rec.at("epoch").get<int>(), rec.at("stratum").get<std::string>(),
                                 rec.at("class_filter").get<std::string>(), measure};
        const auto label = fmt::format("correlation epoch {} {} {} {}", std::get<0>(key),
                                       std::get<1>(key), std::get<2>(key), measure);
        auto it = correlations.find(key);
        if (it == correlations.end()) return fail(checked, "coverage: no row for " + label);
        const auto n = rec.at("n").get<size_t>();
        if (it->second.n != n) {
          return fail(checked, fmt::format("{}: n {} differs from oracle {}", label, it->second.n, n));
        }
        const auto& want = rec.at("rho");
        const auto& got = it->second.rho;
        if (want.is_null() != !got.has_value()) {
          return fail(checked, fmt::format("{}: rho {} but oracle {}", label,
                                           got ? fmt::format("{}", *got) : "undefined",
                                           want.is_null() ? "undefined" : want.dump()));
        }
        if (got && !close(*got, want.get<double>())) {
          return fail(checked, fmt::format("{}: rho {} differs from oracle {}", label, *got,
                                           want.get<double>()));
        }
      } else {
        throw IngestError(fmt::format("verify: oracle line {}: unknown kind \"{}\"", lineno, kind));
      }
    } catch (const nlohmann::json::exception& e) {
      throw IngestError(fmt::format("verify: oracle line {}: {}", lineno, e.what()));
    }
    ++checked;
  }

  if (dynamics.size() != trajectory_records) {
    return fail(checked, fmt::format("coverage: dynamics.csv has {} rows, oracle has {}",
                                     dynamics.size(), trajectory_records));
  }
  if (annotations.size() != oracle_tags.size()) {
    return fail(checked, fmt::format("coverage: annotations.csv has {} rows, oracle has {}",
                                     annotations.size(), oracle_tags.size()));
  }
  if (correlations.size() != correlation_records) {
    return fail(checked, fmt::format("coverage: correlations.csv has {} rows, oracle has {}",
                                     correlations.size(), correlation_records));
  }
  return {true, checked, fmt::format("verified {} oracle records", checked)};
}

VerifyReport verify(const std::filesystem::path& oracle, const std::filesystem::path& outputs_dir) {
  const auto open = [](const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IngestError(fmt::format("verify: cannot open {}", p.string()));
    return in;
  };
  auto o = open(oracle);
  auto d = open(outputs_dir / "dynamics.csv");
  auto a = open(outputs_dir / "annotations.csv");
  auto c = open(outputs_dir / "correlations.csv");
  return verify(o, d, a, c);
}

}  // namespace cartography::synth
