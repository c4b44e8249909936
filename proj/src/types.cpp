#include "cartography/types.hpp"

#include <array>
#include <utility>

namespace cartography {
namespace {

template <typename E, size_t N>
using Names = std::array<std::pair<E, std::string_view>, N>;

constexpr Names<GoldLabel, 2> kGoldLabels{{{GoldLabel::entailment, "entailment"},
                                           {GoldLabel::non_entailment, "non_entailment"}}};
constexpr Names<Split, 2> kSplits{{{Split::train, "train"}, {Split::eval, "eval"}}};
constexpr Names<Distribution, 2> kDistributions{
    {{Distribution::in_distribution, "in_distribution"}, {Distribution::ood, "ood"}}};
constexpr Names<Region, 3> kRegions{{{Region::easy_to_learn, "easy_to_learn"},
                                     {Region::hard_to_learn, "hard_to_learn"},
                                     {Region::ambiguous, "ambiguous"}}};
constexpr Names<HeuristicTag, 3> kTags{{{HeuristicTag::support, "support"},
                                        {HeuristicTag::contradict, "contradict"},
                                        {HeuristicTag::none, "none"}}};
constexpr Names<Stratum, 3> kStrata{{{Stratum::train, "train"},
                                     {Stratum::eval_in_distribution, "eval_in_distribution"},
                                     {Stratum::eval_ood, "eval_ood"}}};
constexpr Names<ClassFilter, 3> kClassFilters{{{ClassFilter::all, "all"},
                                               {ClassFilter::entailment, "entailment"},
                                               {ClassFilter::non_entailment, "non_entailment"}}};
constexpr Names<Measure, 2> kMeasures{{{Measure::m1, "m1"}, {Measure::m2, "m2"}}};

template <typename E, size_t N>
std::string_view name_of(const Names<E, N>& names, E v) {
  for (const auto& [value, name] : names) {
    if (value == v) return name;
  }
  return "?";
}

template <typename E, size_t N>
std::optional<E> value_of(const Names<E, N>& names, std::string_view s) {
  for (const auto& [value, name] : names) {
    if (name == s) return value;
  }
  return std::nullopt;
}

}  // namespace

std::string_view to_string(GoldLabel v) { return name_of(kGoldLabels, v); }
std::string_view to_string(Split v) { return name_of(kSplits, v); }
std::string_view to_string(Distribution v) { return name_of(kDistributions, v); }
std::string_view to_string(Region v) { return name_of(kRegions, v); }
std::string_view to_string(HeuristicTag v) { return name_of(kTags, v); }
std::string_view to_string(Stratum v) { return name_of(kStrata, v); }
std::string_view to_string(ClassFilter v) { return name_of(kClassFilters, v); }
std::string_view to_string(Measure v) { return name_of(kMeasures, v); }

std::optional<GoldLabel> parse_gold_label(std::string_view s) { return value_of(kGoldLabels, s); }
std::optional<Split> parse_split(std::string_view s) { return value_of(kSplits, s); }
std::optional<Distribution> parse_distribution(std::string_view s) {
  return value_of(kDistributions, s);
}
std::optional<Region> parse_region(std::string_view s) { return value_of(kRegions, s); }
std::optional<HeuristicTag> parse_heuristic_tag(std::string_view s) { return value_of(kTags, s); }
std::optional<Stratum> parse_stratum(std::string_view s) { return value_of(kStrata, s); }
std::optional<ClassFilter> parse_class_filter(std::string_view s) {
  return value_of(kClassFilters, s);
}
std::optional<Measure> parse_measure(std::string_view s) { return value_of(kMeasures, s); }

Stratum stratum_of(const Sample& s) {
  if (s.split == Split::train) return Stratum::train;
  return s.distribution == Distribution::ood ? Stratum::eval_ood : Stratum::eval_in_distribution;
}

bool matches(ClassFilter filter, GoldLabel label) {
  switch (filter) {
    case ClassFilter::all:
      return true;
    case ClassFilter::entailment:
      return label == GoldLabel::entailment;
    case ClassFilter::non_entailment:
      return label == GoldLabel::non_entailment;
  }
  return false;
}

}  // namespace cartography
