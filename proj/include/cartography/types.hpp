#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cartography {

enum class GoldLabel { entailment, non_entailment };
enum class Split { train, eval };
enum class Distribution { in_distribution, ood };

enum class Region { easy_to_learn, hard_to_learn, ambiguous };
enum class HeuristicTag { support, contradict, none };

// Table 1 roles: one training set and two evaluation sets.
enum class Stratum { train, eval_in_distribution, eval_ood };
enum class ClassFilter { all, entailment, non_entailment };
enum class Measure { m1, m2 };

std::string_view to_string(GoldLabel v);
std::string_view to_string(Split v);
std::string_view to_string(Distribution v);
std::string_view to_string(Region v);
std::string_view to_string(HeuristicTag v);
std::string_view to_string(Stratum v);
std::string_view to_string(ClassFilter v);
std::string_view to_string(Measure v);

std::optional<GoldLabel> parse_gold_label(std::string_view s);
std::optional<Split> parse_split(std::string_view s);
std::optional<Distribution> parse_distribution(std::string_view s);
std::optional<Region> parse_region(std::string_view s);
std::optional<HeuristicTag> parse_heuristic_tag(std::string_view s);
std::optional<Stratum> parse_stratum(std::string_view s);
std::optional<ClassFilter> parse_class_filter(std::string_view s);
std::optional<Measure> parse_measure(std::string_view s);

inline constexpr Stratum kAllStrata[] = {Stratum::train, Stratum::eval_in_distribution,
                                         Stratum::eval_ood};
inline constexpr ClassFilter kAllClassFilters[] = {ClassFilter::all, ClassFilter::entailment,
                                                   ClassFilter::non_entailment};

struct Sample {
  std::string id;
  std::string premise;
  std::string hypothesis;
  GoldLabel gold_label = GoldLabel::entailment;
  Split split = Split::train;
  Distribution distribution = Distribution::in_distribution;

  bool operator==(const Sample&) const = default;
};

Stratum stratum_of(const Sample& s);
bool matches(ClassFilter filter, GoldLabel label);

// p_true is the probability the model assigned to the gold label at `epoch` (1-based).
struct PredictionRecord {
  std::string sample_id;
  int epoch = 1;
  double p_true = 0.0;

  bool operator==(const PredictionRecord&) const = default;
};

}  // namespace cartography
