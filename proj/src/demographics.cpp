#include "wassoc/demographics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <random>

namespace wassoc {

std::string_view to_string(Attribute a) {
  switch (a) {
    case Attribute::gender: return "gender";
    case Attribute::specialization: return "specialization";
    case Attribute::location: return "location";
  }
  return "?";
}

Attribute parse_attribute(std::string_view token) {
  if (token == "gender") return Attribute::gender;
  if (token == "specialization") return Attribute::specialization;
  if (token == "location") return Attribute::location;
  throw Error("unknown attribute \"" + std::string(token) +
              "\" (expected gender, specialization or location)");
}

std::optional<std::string> attribute_label(const Respondent& r, Attribute a) {
  switch (a) {
    case Attribute::gender:
      if (r.gender == Gender::unknown) return std::nullopt;
      return std::string(to_string(r.gender));
    case Attribute::specialization:
      if (r.specialization.empty()) return std::nullopt;
      return fold_case(r.specialization);
    case Attribute::location:
      if (r.location.empty()) return std::nullopt;
      return fold_case(r.location);
  }
  return std::nullopt;
}

bool SliceSpec::matches(const Respondent& r) const {
  if (genders && !genders->contains(r.gender)) return false;
  if (specializations && !specializations->contains(fold_case(r.specialization))) return false;
  if (locations && !locations->contains(fold_case(r.location))) return false;
  if (age) {
    if (!r.age || *r.age < age->min || *r.age > age->max) return false;
  }
  return true;
}

namespace {

template <typename T>
std::optional<std::set<T>> intersect(const std::optional<std::set<T>>& a,
                                     const std::optional<std::set<T>>& b) {
  if (!a) return b;
  if (!b) return a;
  std::set<T> out;
  std::set_intersection(a->begin(), a->end(), b->begin(), b->end(), std::inserter(out, out.end()));
  return out;
}

int parse_age(std::string_view text) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size() || value < 0) {
    throw Error("bad age \"" + std::string(text) + "\" in filter");
  }
  return value;
}

std::vector<std::string_view> split_on(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

}  // namespace

SliceSpec SliceSpec::conjoin(const SliceSpec& other) const {
  SliceSpec out;
  out.genders = intersect(genders, other.genders);
  out.specializations = intersect(specializations, other.specializations);
  out.locations = intersect(locations, other.locations);
  if (age && other.age) {
    out.age = AgeRange{std::max(age->min, other.age->min), std::min(age->max, other.age->max)};
  } else {
    out.age = age ? age : other.age;
  }
  return out;
}

SliceSpec SliceSpec::parse(std::string_view filter) {
  SliceSpec spec;
  filter = trim_spaces(filter);
  if (filter.empty()) return spec;
  for (std::string_view clause : split_on(filter, ',')) {
    clause = trim_spaces(clause);
    std::size_t eq = clause.find('=');
    if (eq == std::string_view::npos) {
      throw Error("filter clause \"" + std::string(clause) + "\" is not key=value");
    }
    std::string_view key = trim_spaces(clause.substr(0, eq));
    std::string_view value = trim_spaces(clause.substr(eq + 1));
    if (value.empty()) throw Error("filter clause \"" + std::string(clause) + "\" has no value");

    auto values = [&] {
      std::set<std::string> out;
      for (std::string_view v : split_on(value, '|')) out.insert(std::string(trim_spaces(v)));
      return out;
    };
    auto duplicate = [&] { return Error("filter key \"" + std::string(key) + "\" given twice"); };

    if (key == "gender") {
      if (spec.genders) throw duplicate();
      std::set<Gender> gs;
      for (const auto& v : values()) gs.insert(parse_gender(v));
      spec.genders = std::move(gs);
    } else if (key == "specialization") {
      if (spec.specializations) throw duplicate();
      std::set<std::string> folded;
      for (const auto& v : values()) folded.insert(fold_case(v));
      spec.specializations = std::move(folded);
    } else if (key == "location") {
      if (spec.locations) throw duplicate();
      std::set<std::string> folded;
      for (const auto& v : values()) folded.insert(fold_case(v));
      spec.locations = std::move(folded);
    } else if (key == "age") {
      if (spec.age) throw duplicate();
      std::size_t dash = value.find('-');
      if (dash == std::string_view::npos) {
        int a = parse_age(value);
        spec.age = AgeRange{a, a};
      } else {
        spec.age = AgeRange{parse_age(trim_spaces(value.substr(0, dash))),
                            parse_age(trim_spaces(value.substr(dash + 1)))};
      }
      if (spec.age->min > spec.age->max) throw Error("empty age range in filter");
    } else {
      throw Error("unknown filter key \"" + std::string(key) + "\"");
    }
  }
  return spec;
}

AssociationSet slice(const AssociationSet& set, const RespondentTable& table, const SliceSpec& spec) {
  AssociationSet out;
  for (const auto& record : set) {
    const Respondent& r = table.at(record.respondent_id);
    if (spec.matches(r)) out.add(record);
  }
  return out;
}

std::map<std::string, double> respondent_means(const AssociationSet& set, const RecordMetric& metric) {
  std::map<std::string, std::pair<double, std::size_t>> acc;
  for (const auto& record : set) {
    auto& [sum, n] = acc[record.respondent_id];
    sum += metric(record);
    ++n;
  }
  std::map<std::string, double> out;
  for (const auto& [id, a] : acc) out.emplace(id, a.first / static_cast<double>(a.second));
  return out;
}

std::map<std::string, GroupStats> per_respondent_metric(const AssociationSet& set,
                                                        const RespondentTable& table,
                                                        const RecordMetric& metric,
                                                        Attribute attribute) {
  if (set.empty()) throw DegenerateDataError("cannot aggregate an empty association set");
  std::map<std::string, GroupStats> groups;
  for (const auto& [id, value] : respondent_means(set, metric)) {
    std::optional<std::string> label = attribute_label(table.at(id), attribute);
    if (!label) continue;
    GroupStats& g = groups[*label];
    g.label = *label;
    g.values.push_back(value);
  }
  for (auto& [label, g] : groups) {
    g.count = g.values.size();
    double sum = 0.0;
    for (double v : g.values) sum += v;
    g.mean = sum / static_cast<double>(g.count);
  }
  return groups;
}

double gender_normalized(double male_mean, double female_mean) { return (male_mean + female_mean) / 2.0; }

double gender_normalized(const std::map<std::string, GroupStats>& by_gender) {
  auto male = by_gender.find(std::string(to_string(Gender::male)));
  auto female = by_gender.find(std::string(to_string(Gender::female)));
  if (male == by_gender.end() || female == by_gender.end()) {
    throw DegenerateDataError("gender normalization needs both male and female respondents");
  }
  return gender_normalized(male->second.mean, female->second.mean);
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Uniform integer in [0, bound) by rejection, independent of the standard
// library's distribution implementation.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

double mean_of(std::span<const double> v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

}  // namespace

double permutation_test(std::span<const double> group_a, std::span<const double> group_b,
                        std::size_t iterations, std::uint64_t seed) {
  if (group_a.empty() || group_b.empty()) throw Error("permutation test needs two non-empty groups");
  if (iterations == 0) throw Error("permutation test needs at least one iteration");

  const double observed = std::abs(mean_of(group_a) - mean_of(group_b));
  // Relative slack so that permutations reproducing the observed split in a
  // different summation order still count as "at least as extreme".
  const double slack = 1e-12 * std::max(1.0, observed);

  // The pooled sample is sorted and the smaller group is drawn first, so the
  // p-value does not depend on group labels or on order within a group.
  std::vector<double> pooled(group_a.begin(), group_a.end());
  pooled.insert(pooled.end(), group_b.begin(), group_b.end());
  std::sort(pooled.begin(), pooled.end());
  const std::size_t n_a = std::min(group_a.size(), group_b.size());
  const std::uint64_t stream_base = splitmix64(seed);

  std::vector<double> work(pooled.size());
  std::size_t extreme = 0;
  for (std::size_t i = 0; i < iterations; ++i) {
    std::mt19937_64 rng(splitmix64(stream_base ^ splitmix64(i)));
    std::copy(pooled.begin(), pooled.end(), work.begin());
    // Partial Fisher-Yates: only the first n_a slots need to be random.
    for (std::size_t k = 0; k < n_a; ++k) {
      std::size_t j = k + static_cast<std::size_t>(bounded(rng, work.size() - k));
      std::swap(work[k], work[j]);
    }
    std::span<const double> all(work);
    double diff = std::abs(mean_of(all.first(n_a)) - mean_of(all.subspan(n_a)));
    if (diff >= observed - slack) ++extreme;
  }
  return static_cast<double>(1 + extreme) / static_cast<double>(1 + iterations);
}

}  // namespace wassoc
