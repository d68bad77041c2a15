#include "wassoc/scoring.hpp"

#include <cmath>

namespace wassoc {

std::set<TokenSeq> candidate_ngrams(const AssociationRecord& record, const LemmaDictionary& dict) {
  std::set<TokenSeq> out;
  TokenSeq response = split_tokens(record.response);
  if (response.empty() || response.size() > 2) return out;

  TokenSeq response_lemma = response;
  for (auto& t : response_lemma) t = dict.lemmatize(t);

  const std::array<std::string, 2> stimulus_forms = {record.stimulus, dict.lemmatize(record.stimulus)};
  const std::array<const TokenSeq*, 2> response_forms = {&response, &response_lemma};

  for (const auto& stim : stimulus_forms) {
    for (const TokenSeq* resp : response_forms) {
      TokenSeq forward;
      forward.push_back(stim);
      forward.insert(forward.end(), resp->begin(), resp->end());
      out.insert(std::move(forward));

      TokenSeq backward(resp->begin(), resp->end());
      backward.push_back(stim);
      out.insert(std::move(backward));
    }
  }
  return out;
}

MatchResult match_frequency(const AssociationRecord& record, const NgramTable& table,
                            const LemmaDictionary& dict) {
  MatchResult result;
  result.record = &record;
  for (const TokenSeq& candidate : candidate_ngrams(record, dict)) {
    std::uint64_t f = table.lookup(candidate);
    // Strict comparison keeps the first (smallest) candidate among ties.
    if (f > result.matched_frequency) {
      result.matched_frequency = f;
      result.matched_candidate = candidate;
    }
  }
  if (result.matched_frequency > 0) {
    result.log_contribution = std::log(static_cast<double>(result.matched_frequency));
  }
  return result;
}

double pairwise_sum(std::span<const double> values) {
  constexpr std::size_t kBlock = 8;
  if (values.size() <= kBlock) {
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum;
  }
  std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

ScoreReport syntagmatic_score(const AssociationSet& set, const NgramTable& table,
                              const LemmaDictionary& dict) {
  if (set.empty()) throw DegenerateDataError("cannot score an empty association set");
  std::vector<double> contributions;
  contributions.reserve(set.size());
  ScoreReport report;
  for (const auto& record : set) {
    MatchResult m = match_frequency(record, table, dict);
    contributions.push_back(m.log_contribution);
    if (m.matched_frequency > 0) ++report.matched_count;
  }
  report.s = pairwise_sum(contributions);
  report.total_responses = set.size();
  report.match_rate_percent =
      100.0 * static_cast<double>(report.matched_count) / static_cast<double>(report.total_responses);
  report.mean_log_contribution = report.s / static_cast<double>(report.total_responses);
  return report;
}

RelationSet classify_relation(const AssociationRecord& record, const ThesaurusIndex& thesaurus,
                              const LemmaDictionary& dict) {
  return thesaurus.query(dict.lemmatize(record.stimulus), dict.lemmatize_phrase(record.response));
}

double RelationProfile::percent(RelationType t) const {
  return total_responses == 0 ? 0.0
                              : 100.0 * static_cast<double>(count(t)) / static_cast<double>(total_responses);
}

double RelationProfile::unclassified_percent() const {
  return total_responses == 0
             ? 0.0
             : 100.0 * static_cast<double>(unclassified()) / static_cast<double>(total_responses);
}

RelationProfile relation_profile(const AssociationSet& set, const ThesaurusIndex& thesaurus,
                                 const LemmaDictionary& dict) {
  if (set.empty()) throw DegenerateDataError("cannot profile an empty association set");
  RelationProfile profile;
  profile.total_responses = set.size();
  for (const auto& record : set) {
    RelationSet types = classify_relation(record, thesaurus, dict);
    if (types.empty()) continue;
    ++profile.classified;
    for (RelationType t : types.types()) ++profile.counts[static_cast<std::size_t>(t)];
  }
  return profile;
}

void to_json(nlohmann::json& j, const ScoreReport& report) {
  j = nlohmann::json{{"s", report.s},
                     {"total", report.total_responses},
                     {"matched", report.matched_count},
                     {"match_rate_pct", report.match_rate_percent},
                     {"mean_log", report.mean_log_contribution}};
}

void to_json(nlohmann::json& j, const RelationProfile& profile) {
  nlohmann::json counts = nlohmann::json::object();
  nlohmann::json pcts = nlohmann::json::object();
  for (RelationType t : kAllRelationTypes) {
    counts[std::string(to_string(t))] = profile.count(t);
    pcts[std::string(to_string(t))] = profile.percent(t);
  }
  j = nlohmann::json{{"total", profile.total_responses},
                     {"counts", counts},
                     {"pcts", pcts},
                     {"unclassified", profile.unclassified()},
                     {"unclassified_pct", profile.unclassified_percent()}};
}

}  // namespace wassoc
