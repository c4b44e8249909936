#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cartography/error.hpp"
#include "cartography/types.hpp"

namespace cartography::heuristics {

// Deduplicated, normalized word set of one sentence. `tokens` is sorted.
// source_length counts the normalized tokens before deduplication.
struct TokenSet {
  std::vector<std::string> tokens;
  size_t source_length = 0;

  size_t size() const { return tokens.size(); }
  bool empty() const { return tokens.empty(); }
  bool contains(std::string_view token) const;
};

struct TokenizeError : ComputeError {
  using ComputeError::ComputeError;
};

// Splits on Unicode whitespace, lowercases, strips leading/trailing
// non-alphanumerics and drops tokens that end up empty. Stopwords are kept.
// Throws TokenizeError when nothing survives.
TokenSet tokenize(std::string_view text);

// Exact |a ∩ b| over the deduplicated sets.
size_t intersection_size(const TokenSet& a, const TokenSet& b);

// |s1 ∩ s2| / |s2|: share of hypothesis words found in the premise.
double overlap_m2(const TokenSet& premise, const TokenSet& hypothesis);
// |s1 ∩ s2| / |s1|: share of premise words found in the hypothesis.
double overlap_m1(const TokenSet& premise, const TokenSet& hypothesis);

struct HeuristicAnnotation {
  std::string sample_id;
  double m1 = 0.0;
  double m2 = 0.0;
  HeuristicTag tag = HeuristicTag::none;

  bool operator==(const HeuristicAnnotation&) const = default;
};

// The lexical-overlap heuristic is present iff every hypothesis word occurs in
// the premise (m2 == 1). Present + entailment is support, present +
// non_entailment is contradict, absent is none.
HeuristicAnnotation tag_heuristic(const Sample& sample);

struct AnnotationFailure {
  std::string sample_id;
  std::string reason;
};

// by_sample is aligned with the input samples; a sample whose text fails to
// tokenize has no annotation and is listed in failures instead.
struct AnnotationSet {
  std::vector<std::optional<HeuristicAnnotation>> by_sample;
  std::vector<AnnotationFailure> failures;

  const HeuristicAnnotation* find(size_t sample_index) const {
    if (sample_index >= by_sample.size() || !by_sample[sample_index]) return nullptr;
    return &*by_sample[sample_index];
  }
};

AnnotationSet annotate_corpus(std::span<const Sample> samples);
AnnotationSet annotate_corpus_serial(std::span<const Sample> samples);

// CSV with columns sample_id, m1, m2, tag; annotated samples only.
void write_annotations_csv(std::ostream& out, const AnnotationSet& annotations);

}  // namespace cartography::heuristics
