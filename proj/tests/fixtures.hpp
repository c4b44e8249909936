#pragma once

#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "cartography/ingest.hpp"
#include "cartography/types.hpp"

namespace fixtures {

using cartography::Distribution;
using cartography::GoldLabel;
using cartography::Sample;
using cartography::Split;

inline Sample sample(std::string id, std::string premise, std::string hypothesis,
                     GoldLabel label = GoldLabel::entailment, Split split = Split::train,
                     Distribution dist = Distribution::in_distribution) {
  return {std::move(id), std::move(premise), std::move(hypothesis), label, split, dist};
}

// Corpus whose sample i has trajectories[i] (ragged lengths allowed).
inline cartography::ingest::Corpus corpus_with(std::vector<Sample> samples,
                                               const std::vector<std::vector<double>>& trajectories) {
  std::vector<cartography::PredictionRecord> records;
  for (size_t i = 0; i < samples.size(); ++i) {
    for (size_t e = 0; e < trajectories[i].size(); ++e) {
      records.push_back({samples[i].id, static_cast<int>(e) + 1, trajectories[i][e]});
    }
  }
  auto log = cartography::ingest::assemble_predictions(records, samples);
  return cartography::ingest::make_corpus(std::move(samples), std::move(log));
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("cartography_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline size_t count_occurrences(const std::string& haystack, const std::string& needle) {
  size_t n = 0;
  for (size_t pos = haystack.find(needle); pos != std::string::npos;
       pos = haystack.find(needle, pos + needle.size())) {
    ++n;
  }
  return n;
}

}  // namespace fixtures
