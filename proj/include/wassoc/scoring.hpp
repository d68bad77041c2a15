#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "wassoc/corpus_io.hpp"

namespace wassoc {

using TokenSeq = std::vector<std::string>;

// Candidate ngrams for one association: {forward, backward} x stimulus
// {as-is, lemma} x response {as-is, lemma}. Single-token responses give
// bigrams, two-token responses give trigrams with the response kept as a
// contiguous unit, longer responses give nothing. The set is deduplicated and
// ordered lexicographically.
std::set<TokenSeq> candidate_ngrams(const AssociationRecord& record, const LemmaDictionary& dict);

struct MatchResult {
  const AssociationRecord* record = nullptr;
  std::uint64_t matched_frequency = 0;
  // Lexicographically smallest candidate reaching matched_frequency.
  std::optional<TokenSeq> matched_candidate;
  // ln(matched_frequency), or 0 when unmatched.
  double log_contribution = 0.0;
};

MatchResult match_frequency(const AssociationRecord& record, const NgramTable& table,
                            const LemmaDictionary& dict);

// Syntagmatic score summary. `s` is the sum of natural-log contributions.
struct ScoreReport {
  double s = 0.0;
  std::size_t total_responses = 0;
  std::size_t matched_count = 0;
  double match_rate_percent = 0.0;
  double mean_log_contribution = 0.0;
};

// Throws Error on an empty set.
ScoreReport syntagmatic_score(const AssociationSet& set, const NgramTable& table,
                              const LemmaDictionary& dict);

// Relations linking the lemmatized pair, read from the stimulus's side.
// Multi-token responses are looked up as their full lemmatized phrase.
RelationSet classify_relation(const AssociationRecord& record, const ThesaurusIndex& thesaurus,
                              const LemmaDictionary& dict);

// Per-type counts over responses. A pair can carry several types, so the
// percentages are not a partition.
struct RelationProfile {
  std::size_t total_responses = 0;
  std::array<std::size_t, kRelationTypeCount> counts{};
  std::size_t classified = 0;

  std::size_t count(RelationType t) const { return counts[static_cast<std::size_t>(t)]; }
  double percent(RelationType t) const;
  std::size_t unclassified() const { return total_responses - classified; }
  double unclassified_percent() const;
};

// Throws Error on an empty set.
RelationProfile relation_profile(const AssociationSet& set, const ThesaurusIndex& thesaurus,
                                 const LemmaDictionary& dict);

// Pairwise (cascade) summation; result depends only on the input order.
double pairwise_sum(std::span<const double> values);

void to_json(nlohmann::json& j, const ScoreReport& report);
void to_json(nlohmann::json& j, const RelationProfile& profile);

}  // namespace wassoc
