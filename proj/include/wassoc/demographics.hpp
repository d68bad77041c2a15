#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wassoc/corpus_io.hpp"

namespace wassoc {

enum class Attribute { gender, specialization, location };

std::string_view to_string(Attribute a);
Attribute parse_attribute(std::string_view token);

// Grouping label of a respondent, or nullopt when the attribute is missing
// (unknown gender, empty specialization/location). Specialization and
// location labels are case-folded.
std::optional<std::string> attribute_label(const Respondent& r, Attribute a);

struct AgeRange {
  int min = 0;
  int max = 0;
  bool operator==(const AgeRange&) const = default;
};

// Conjunction of attribute predicates. An unset predicate accepts everything;
// a respondent without an age never satisfies an age predicate.
struct SliceSpec {
  std::optional<std::set<Gender>> genders;
  std::optional<std::set<std::string>> specializations;  // case-folded
  std::optional<std::set<std::string>> locations;        // case-folded
  std::optional<AgeRange> age;

  bool is_universal() const { return !genders && !specializations && !locations && !age; }
  bool matches(const Respondent& r) const;
  // The spec accepting exactly what both accept.
  SliceSpec conjoin(const SliceSpec& other) const;

  // Parses "gender=f|m,specialization=chemistry,location=moscow,age=18-26".
  // An empty string is the universal slice. Throws Error.
  static SliceSpec parse(std::string_view filter);

  bool operator==(const SliceSpec&) const = default;
};

// Records whose respondent satisfies `spec`, in input order. Throws Error
// naming the first unresolvable respondent id.
AssociationSet slice(const AssociationSet& set, const RespondentTable& table, const SliceSpec& spec);

using RecordMetric = std::function<double(const AssociationRecord&)>;

// Mean of `metric` over each respondent's records, keyed by respondent id.
std::map<std::string, double> respondent_means(const AssociationSet& set, const RecordMetric& metric);

struct GroupStats {
  std::string label;
  std::vector<double> values;  // one per respondent, ordered by respondent id
  double mean = 0.0;
  std::size_t count = 0;
};

// Averages `metric` within each respondent, then groups respondents by
// `attribute`. Respondents whose attribute is missing are left out.
// Throws Error on an empty set or an unresolvable respondent id.
std::map<std::string, GroupStats> per_respondent_metric(const AssociationSet& set,
                                                        const RespondentTable& table,
                                                        const RecordMetric& metric,
                                                        Attribute attribute);

// Half-sum of the two gender means.
double gender_normalized(double male_mean, double female_mean);
// Same, reading the "male" and "female" groups of a gender grouping. Throws
// Error when either group is missing.
double gender_normalized(const std::map<std::string, GroupStats>& by_gender);

// Two-sided permutation test on the difference of means:
// p = (1 + #{|perm diff| >= |observed diff|}) / (1 + iterations).
// Iteration i draws from its own stream derived from (seed, i).
// Throws Error when a group is empty or iterations is 0.
double permutation_test(std::span<const double> group_a, std::span<const double> group_b,
                        std::size_t iterations, std::uint64_t seed);

}  // namespace wassoc
