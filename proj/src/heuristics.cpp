#include "cartography/heuristics.hpp"

#include <algorithm>
#include <ostream>

#include <fmt/format.h>

#include "cartography/csv.hpp"
#include "text.hpp"

namespace cartography::heuristics {
namespace {

std::optional<std::string> normalize_token(std::u32string_view raw) {
  size_t begin = 0;
  size_t end = raw.size();
  while (begin < end && !text::is_alnum(raw[begin])) ++begin;
  while (end > begin && !text::is_alnum(raw[end - 1])) --end;
  if (begin == end) return std::nullopt;
  std::u32string lowered(raw.substr(begin, end - begin));
  for (char32_t& c : lowered) c = text::to_lower(c);
  return text::encode_utf8(lowered);
}

std::optional<HeuristicAnnotation> try_tag(const Sample& sample, std::string* reason) {
  try {
    return tag_heuristic(sample);
  } catch (const TokenizeError& e) {
    *reason = e.what();
    return std::nullopt;
  }
}

}  // namespace

bool TokenSet::contains(std::string_view token) const {
  return std::binary_search(tokens.begin(), tokens.end(), token);
}

TokenSet tokenize(std::string_view input) {
  const std::u32string cps = text::decode_utf8(input);
  TokenSet out;
  size_t i = 0;
  while (i < cps.size()) {
    while (i < cps.size() && text::is_whitespace(cps[i])) ++i;
    size_t start = i;
    while (i < cps.size() && !text::is_whitespace(cps[i])) ++i;
    if (start == i) continue;
    if (auto token = normalize_token(std::u32string_view(cps).substr(start, i - start))) {
      out.tokens.push_back(std::move(*token));
      ++out.source_length;
    }
  }
  if (out.tokens.empty()) {
    throw TokenizeError(fmt::format("text has no tokens after normalization: \"{}\"", input));
  }
  std::sort(out.tokens.begin(), out.tokens.end());
  out.tokens.erase(std::unique(out.tokens.begin(), out.tokens.end()), out.tokens.end());
  return out;
}

size_t intersection_size(const TokenSet& a, const TokenSet& b) {
  size_t n = 0;
  auto x = a.tokens.begin();
  auto y = b.tokens.begin();
  while (x != a.tokens.end() && y != b.tokens.end()) {
    if (*x < *y) {
      ++x;
    } else if (*y < *x) {
      ++y;
    } else {
      ++n;
      ++x;
      ++y;
    }
  }
  return n;
}

double overlap_m2(const TokenSet& premise, const TokenSet& hypothesis) {
  if (hypothesis.empty()) throw ComputeError("m2 undefined: empty hypothesis token set");
  return static_cast<double>(intersection_size(premise, hypothesis)) /
         static_cast<double>(hypothesis.size());
}

double overlap_m1(const TokenSet& premise, const TokenSet& hypothesis) {
  if (premise.empty()) throw ComputeError("m1 undefined: empty premise token set");
  return static_cast<double>(intersection_size(premise, hypothesis)) /
         static_cast<double>(premise.size());
}

HeuristicAnnotation tag_heuristic(const Sample& sample) {
  const TokenSet premise = tokenize(sample.premise);
  const TokenSet hypothesis = tokenize(sample.hypothesis);
  const size_t shared = intersection_size(premise, hypothesis);

  HeuristicAnnotation a;
  a.sample_id = sample.id;
  a.m1 = static_cast<double>(shared) / static_cast<double>(premise.size());
  a.m2 = static_cast<double>(shared) / static_cast<double>(hypothesis.size());
  if (shared == hypothesis.size()) {
    a.tag = sample.gold_label == GoldLabel::entailment ? HeuristicTag::support
                                                        : HeuristicTag::contradict;
  } else {
    a.tag = HeuristicTag::none;
  }
  return a;
}

AnnotationSet annotate_corpus_serial(std::span<const Sample> samples) {
  AnnotationSet out;
  out.by_sample.resize(samples.size());
  for (size_t i = 0; i < samples.size(); ++i) {
    std::string reason;
    out.by_sample[i] = try_tag(samples[i], &reason);
    if (!out.by_sample[i]) out.failures.push_back({samples[i].id, std::move(reason)});
  }
  return out;
}

AnnotationSet annotate_corpus(std::span<const Sample> samples) {
  AnnotationSet out;
  out.by_sample.resize(samples.size());
  std::vector<std::string> reasons(samples.size());
  const auto n = static_cast<std::ptrdiff_t>(samples.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    out.by_sample[i] = try_tag(samples[i], &reasons[i]);
  }
  for (size_t i = 0; i < samples.size(); ++i) {
    if (!out.by_sample[i]) out.failures.push_back({samples[i].id, std::move(reasons[i])});
  }
  return out;
}

void write_annotations_csv(std::ostream& out, const AnnotationSet& annotations) {
  csv::write_row(out, {"sample_id", "m1", "m2", "tag"});
  for (const auto& a : annotations.by_sample) {
    if (!a) continue;
    csv::write_row(out, {a->sample_id, csv::real(a->m1), csv::real(a->m2),
                         std::string(to_string(a->tag))});
  }
}

}  // namespace cartography::heuristics
