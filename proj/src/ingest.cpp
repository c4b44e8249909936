#include "cartography/ingest.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>
#include <json.hpp>

#include "cartography/error.hpp"
#include "text.hpp"

namespace cartography::ingest {
namespace {

using nlohmann::json;

constexpr std::string_view kDatasetKeys[] = {"id",    "premise",     "hypothesis", "gold_label",
                                             "split", "distribution"};
constexpr std::string_view kPredictionKeys[] = {"sample_id", "epoch", "p_true"};

[[noreturn]] void fail(std::string_view source, size_t line, std::string_view msg) {
  throw IngestError(fmt::format("{}:{}: {}", source, line, msg));
}

template <size_t N>
json parse_object(const std::string& line, std::string_view source, size_t lineno,
                  const std::string_view (&keys)[N]) {
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::parse_error& e) {
    fail(source, lineno, fmt::format("malformed JSON: {}", e.what()));
  }
  if (!obj.is_object()) fail(source, lineno, "expected a JSON object");
  for (std::string_view key : keys) {
    if (!obj.contains(key)) fail(source, lineno, fmt::format("missing field \"{}\"", key));
  }
  if (obj.size() != N) {
    for (const auto& item : obj.items()) {
      bool known = false;
      for (std::string_view key : keys) known = known || item.key() == key;
      if (!known) fail(source, lineno, fmt::format("unexpected field \"{}\"", item.key()));
    }
  }
  return obj;
}

std::string string_field(const json& obj, std::string_view key, std::string_view source,
                         size_t lineno) {
  const json& v = obj.at(std::string(key));
  if (!v.is_string()) fail(source, lineno, fmt::format("field \"{}\": expected a string", key));
  return v.get<std::string>();
}

template <typename E>
E enum_field(const json& obj, std::string_view key, std::optional<E> (*parse)(std::string_view),
             std::string_view source, size_t lineno) {
  std::string raw = string_field(obj, key, source, lineno);
  auto value = parse(raw);
  if (!value) fail(source, lineno, fmt::format("field \"{}\": unknown value \"{}\"", key, raw));
  return *value;
}

// Reads lines, dropping a trailing '\r' and skipping empty lines.
template <typename F>
void for_each_line(std::istream& in, F&& f) {
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    f(line, lineno);
  }
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError(fmt::format("cannot open {}", path.string()));
  return in;
}

std::unordered_map<std::string_view, size_t> index_by_id(std::span<const Sample> samples) {
  std::unordered_map<std::string_view, size_t> index;
  index.reserve(samples.size());
  for (size_t i = 0; i < samples.size(); ++i) index.emplace(samples[i].id, i);
  return index;
}

}  // namespace

std::vector<Sample> parse_dataset(std::istream& in, std::string_view source) {
  std::vector<Sample> samples;
  std::unordered_set<std::string> seen;
  for_each_line(in, [&](const std::string& line, size_t lineno) {
    json obj = parse_object(line, source, lineno, kDatasetKeys);
    Sample s;
    s.id = string_field(obj, "id", source, lineno);
    s.premise = string_field(obj, "premise", source, lineno);
    s.hypothesis = string_field(obj, "hypothesis", source, lineno);
    s.gold_label = enum_field(obj, "gold_label", &parse_gold_label, source, lineno);
    s.split = enum_field(obj, "split", &parse_split, source, lineno);
    s.distribution = enum_field(obj, "distribution", &parse_distribution, source, lineno);
    if (s.id.empty()) fail(source, lineno, "field \"id\": empty");
    if (text::is_blank(s.premise)) fail(source, lineno, "field \"premise\": empty text");
    if (text::is_blank(s.hypothesis)) fail(source, lineno, "field \"hypothesis\": empty text");
    if (!seen.insert(s.id).second) {
      fail(source, lineno, fmt::format("field \"id\": duplicate id \"{}\"", s.id));
    }
    samples.push_back(std::move(s));
  });
  return samples;
}

std::vector<Sample> load_dataset(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_dataset(in, path.string());
}

std::vector<PredictionRecord> parse_prediction_records(std::istream& in, std::string_view source) {
  std::vector<PredictionRecord> records;
  for_each_line(in, [&](const std::string& line, size_t lineno) {
    json obj = parse_object(line, source, lineno, kPredictionKeys);
    PredictionRecord r;
    r.sample_id = string_field(obj, "sample_id", source, lineno);
    const json& epoch = obj.at("epoch");
    if (!epoch.is_number_integer()) fail(source, lineno, "field \"epoch\": expected an integer");
    const bool in_range = epoch.is_number_unsigned()
                              ? epoch.get<uint64_t>() >= 1 && epoch.get<uint64_t>() <= 1'000'000'000
                              : epoch.get<int64_t>() >= 1 && epoch.get<int64_t>() <= 1'000'000'000;
    if (!in_range) {
      fail(source, lineno, fmt::format("field \"epoch\": out of range ({})", epoch.dump()));
    }
    r.epoch = epoch.get<int>();
    const json& p = obj.at("p_true");
    if (!p.is_number()) fail(source, lineno, "field \"p_true\": expected a number");
    r.p_true = p.get<double>();
    if (!(r.p_true >= 0.0 && r.p_true <= 1.0)) {
      fail(source, lineno, fmt::format("field \"p_true\": {} outside [0,1]", p.dump()));
    }
    records.push_back(std::move(r));
  });
  return records;
}

PredictionLog assemble_predictions(std::vector<PredictionRecord> records,
                                   std::span<const Sample> samples) {
  auto index = index_by_id(samples);
  // Per-sample dense slots, sized lazily by the largest epoch seen.
  std::vector<std::vector<std::optional<double>>> slots(samples.size());
  int max_epoch = 0;
  for (auto& r : records) {
    auto it = index.find(r.sample_id);
    if (it == index.end()) {
      throw IngestError(fmt::format("unresolved sample_id \"{}\" at epoch {}", r.sample_id, r.epoch));
    }
    if (r.epoch < 1) {
      throw IngestError(fmt::format("sample \"{}\": epoch {} < 1", r.sample_id, r.epoch));
    }
    if (!(r.p_true >= 0.0 && r.p_true <= 1.0)) {
      throw IngestError(
          fmt::format("sample \"{}\" epoch {}: p_true {} outside [0,1]", r.sample_id, r.epoch, r.p_true));
    }
    auto& slot = slots[it->second];
    if (slot.size() < static_cast<size_t>(r.epoch)) slot.resize(static_cast<size_t>(r.epoch));
    auto& cell = slot[static_cast<size_t>(r.epoch - 1)];
    if (cell) {
      throw IngestError(
          fmt::format("duplicate prediction for sample \"{}\" at epoch {}", r.sample_id, r.epoch));
    }
    cell = r.p_true;
    max_epoch = std::max(max_epoch, r.epoch);
  }

  for (size_t i = 0; i < samples.size(); ++i) {
    for (size_t e = 0; e < slots[i].size(); ++e) {
      if (!slots[i][e]) {
        throw IngestError(fmt::format("trajectory gap for sample \"{}\": missing epoch {} (has epoch {})",
                                      samples[i].id, e + 1, slots[i].size()));
      }
    }
  }

  PredictionLog log;
  log.max_epoch = max_epoch;
  log.by_epoch.resize(static_cast<size_t>(max_epoch));
  for (int e = 1; e <= max_epoch; ++e) {
    auto& row = log.by_epoch[static_cast<size_t>(e - 1)];
    for (size_t i = 0; i < samples.size(); ++i) {
      if (slots[i].size() >= static_cast<size_t>(e)) {
        row.push_back({samples[i].id, e, *slots[i][static_cast<size_t>(e - 1)]});
      }
    }
  }
  return log;
}

PredictionLog load_predictions(const std::filesystem::path& path, std::span<const Sample> samples) {
  return load_predictions(std::span(&path, 1), samples);
}

PredictionLog load_predictions(std::span<const std::filesystem::path> paths,
                               std::span<const Sample> samples) {
  std::vector<PredictionRecord> records;
  for (const auto& path : paths) {
    auto in = open_input(path);
    auto part = parse_prediction_records(in, path.string());
    records.insert(records.end(), std::make_move_iterator(part.begin()),
                   std::make_move_iterator(part.end()));
  }
  return assemble_predictions(std::move(records), samples);
}

Corpus make_corpus(std::vector<Sample> samples, PredictionLog log) {
  Corpus c;
  c.samples = std::move(samples);
  c.predictions = std::move(log.by_epoch);
  c.max_epoch = log.max_epoch;
  return c;
}

std::vector<Violation> validate(const Corpus& corpus) {
  std::vector<Violation> out;
  std::unordered_map<std::string_view, size_t> index;
  for (size_t i = 0; i < corpus.samples.size(); ++i) {
    const Sample& s = corpus.samples[i];
    if (!index.emplace(s.id, i).second) {
      out.push_back({s.id, "unique_id", "id appears more than once"});
    }
    if (text::is_blank(s.premise)) out.push_back({s.id, "non_empty_text", "premise is empty"});
    if (text::is_blank(s.hypothesis)) out.push_back({s.id, "non_empty_text", "hypothesis is empty"});
    if (s.split == Split::train && s.distribution != Distribution::in_distribution) {
      out.push_back({s.id, "train_in_distribution", "train-split sample tagged ood"});
    }
  }

  if (corpus.max_epoch != static_cast<int>(corpus.predictions.size())) {
    out.push_back({"", "max_epoch",
                   fmt::format("max_epoch {} but {} epochs of predictions", corpus.max_epoch,
                               corpus.predictions.size())});
  }

  // last[i] = number of consecutive epochs 1..k seen for sample i so far.
  std::vector<int> last(corpus.samples.size(), 0);
  std::vector<bool> broken(corpus.samples.size(), false);
  for (size_t e = 0; e < corpus.predictions.size(); ++e) {
    const int epoch = static_cast<int>(e) + 1;
    std::unordered_set<std::string_view> seen_this_epoch;
    for (const auto& r : corpus.predictions[e]) {
      if (!(r.p_true >= 0.0 && r.p_true <= 1.0)) {
        out.push_back({r.sample_id, "p_true_range",
                       fmt::format("p_true {} outside [0,1] at epoch {}", r.p_true, r.epoch)});
      }
      if (r.epoch != epoch) {
        out.push_back({r.sample_id, "epoch_index",
                       fmt::format("record with epoch {} filed under epoch {}", r.epoch, epoch)});
      }
      if (!seen_this_epoch.insert(r.sample_id).second) {
        out.push_back({r.sample_id, "unique_prediction",
                       fmt::format("duplicate prediction at epoch {}", epoch)});
        continue;
      }
      auto it = index.find(r.sample_id);
      if (it == index.end()) {
        out.push_back({r.sample_id, "resolved_sample_id", "no sample with this id"});
        continue;
      }
      const size_t i = it->second;
      if (last[i] != epoch - 1 && !broken[i]) {
        broken[i] = true;
        out.push_back({r.sample_id, "dense_trajectory",
                       fmt::format("has epoch {} but not epoch {}", epoch, last[i] + 1)});
      }
      last[i] = epoch;
    }
  }
  return out;
}

void write_dataset(std::ostream& out, std::span<const Sample> samples) {
  for (const auto& s : samples) {
    nlohmann::ordered_json obj;
    obj["id"] = s.id;
    obj["premise"] = s.premise;
    obj["hypothesis"] = s.hypothesis;
    obj["gold_label"] = to_string(s.gold_label);
    obj["split"] = to_string(s.split);
    obj["distribution"] = to_string(s.distribution);
    out << obj.dump() << '\n';
  }
}

void write_predictions(std::ostream& out, const Corpus& corpus) {
  for (const auto& epoch : corpus.predictions) {
    for (const auto& r : epoch) {
      nlohmann::ordered_json obj;
      obj["sample_id"] = r.sample_id;
      obj["epoch"] = r.epoch;
      obj["p_true"] = r.p_true;
      out << obj.dump() << '\n';
    }
  }
}

Trajectories trajectories_of(const Corpus& corpus) {
  auto index = index_by_id(corpus.samples);
  Trajectories t;
  t.max_epoch = corpus.max_epoch;
  t.values.resize(corpus.samples.size());
  for (size_t e = 0; e < corpus.predictions.size(); ++e) {
    for (const auto& r : corpus.predictions[e]) {
      auto it = index.find(r.sample_id);
      if (it == index.end()) throw IngestError(fmt::format("unresolved sample_id \"{}\"", r.sample_id));
      auto& traj = t.values[it->second];
      if (traj.size() != e) {
        throw IngestError(
            fmt::format("trajectory of \"{}\" is not dense at epoch {}", r.sample_id, e + 1));
      }
      traj.push_back(r.p_true);
    }
  }
  return t;
}

}  // namespace cartography::ingest
