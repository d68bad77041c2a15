#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "wassoc/text.hpp"

namespace wassoc {

// Token normalization applied by every loader: NFC + lowercase when enabled.
// Respondent ids are opaque and never normalized.
struct LoadOptions {
  bool normalize = true;
};

// One stimulus -> response event.
struct AssociationRecord {
  std::string respondent_id;
  std::string stimulus;  // single token
  std::string response;  // one or more tokens joined by single spaces

  bool operator==(const AssociationRecord&) const = default;
};

// Records in file order. Duplicates are kept: repeated reactions are signal.
class AssociationSet {
 public:
  using const_iterator = std::vector<AssociationRecord>::const_iterator;

  AssociationSet() = default;

  // Validates the record (non-empty whitespace-free stimulus, non-empty
  // response) and canonicalizes response spacing. Throws Error.
  void add(AssociationRecord record);

  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const AssociationRecord& operator[](std::size_t i) const { return records_[i]; }
  const_iterator begin() const { return records_.begin(); }
  const_iterator end() const { return records_.end(); }
  std::span<const AssociationRecord> records() const { return records_; }

  bool operator==(const AssociationSet&) const = default;

 private:
  std::vector<AssociationRecord> records_;
};

enum class Gender { male, female, unknown };

std::string_view to_string(Gender g);
// Accepts the file tokens m/f/u and the long names. Throws Error otherwise.
Gender parse_gender(std::string_view token);

struct Respondent {
  std::string id;
  Gender gender = Gender::unknown;
  std::string specialization;
  std::optional<int> age;
  std::string location;

  bool operator==(const Respondent&) const = default;
};

class RespondentTable {
 public:
  // Throws Error on a duplicate id.
  void add(Respondent respondent);

  const Respondent* find(std::string_view id) const;
  // Throws Error naming the id when absent.
  const Respondent& at(std::string_view id) const;
  bool contains(std::string_view id) const { return find(id) != nullptr; }
  std::size_t size() const { return entries_.size(); }

  // Sorted by id.
  const std::map<std::string, Respondent, std::less<>>& entries() const { return entries_; }

 private:
  std::map<std::string, Respondent, std::less<>> entries_;
};

// Corpus frequencies for token sequences of length 1..3. Absent sequences
// have frequency 0.
class NgramTable {
 public:
  static constexpr std::size_t kMaxOrder = 3;

  // Adds to any existing count. Throws Error on bad order or zero count.
  void add(std::span<const std::string> tokens, std::uint64_t count);
  std::uint64_t lookup(std::span<const std::string> tokens) const;
  std::size_t size() const { return counts_.size(); }

 private:
  std::unordered_map<std::string, std::uint64_t> counts_;
};

// Surface -> lemma map. Every lemma must be a fixed point (maps to itself or
// is absent), so lemmatize is idempotent.
class LemmaDictionary {
 public:
  // Throws Error when the surface is already mapped to a different lemma.
  void add(std::string surface, std::string lemma);
  // Checks the fixed-point invariant. Throws Error naming the offending lemma.
  void validate() const;

  // Identity outside the dictionary.
  std::string lemmatize(std::string_view surface) const;
  // Lemmatizes each space-separated token.
  std::string lemmatize_phrase(std::string_view phrase) const;

  std::size_t size() const { return entries_.size(); }

 private:
  std::unordered_map<std::string, std::string> entries_;
};

enum class RelationType : std::uint8_t {
  synonymy,
  antonymy,
  hypernymy,
  hyponymy,
  meronymy,
  holonymy,
  cause_effect,
  domain,
};

inline constexpr std::size_t kRelationTypeCount = 8;
inline constexpr std::array<RelationType, kRelationTypeCount> kAllRelationTypes = {
    RelationType::synonymy,  RelationType::antonymy, RelationType::hypernymy,
    RelationType::hyponymy,  RelationType::meronymy, RelationType::holonymy,
    RelationType::cause_effect, RelationType::domain,
};

std::string_view to_string(RelationType t);
RelationType parse_relation_type(std::string_view token);
// The type that holds for (b, a) when `t` holds for (a, b).
RelationType inverse(RelationType t);

class RelationSet {
 public:
  void insert(RelationType t) { bits_ |= bit(t); }
  bool contains(RelationType t) const { return (bits_ & bit(t)) != 0; }
  bool empty() const { return bits_ == 0; }
  std::size_t size() const;
  std::vector<RelationType> types() const;
  RelationSet& operator|=(RelationSet other) {
    bits_ |= other.bits_;
    return *this;
  }
  bool operator==(const RelationSet&) const = default;

 private:
  static std::uint8_t bit(RelationType t) { return static_cast<std::uint8_t>(1u << static_cast<unsigned>(t)); }
  std::uint8_t bits_ = 0;
};

struct RelationTriple {
  std::string first;
  std::string second;
  RelationType type;

  bool operator==(const RelationTriple&) const = default;
};

// (a, b, t) reads "a stands in relation t to b": (Russia, country, hyponymy)
// says Russia is a hyponym of country. Every added triple also makes the
// inverse (b, a, inverse(t)) queryable.
class ThesaurusIndex {
 public:
  void add(std::string first, std::string second, RelationType type);
  RelationSet query(std::string_view first, std::string_view second) const;

  // Triples as loaded, in file order.
  const std::vector<RelationTriple>& triples() const { return triples_; }

 private:
  std::map<std::pair<std::string, std::string>, RelationSet> relations_;
  std::vector<RelationTriple> triples_;
};

AssociationSet load_associations(const std::filesystem::path& path,
                                 const RespondentTable* respondents = nullptr,
                                 const LoadOptions& options = {});
RespondentTable load_respondents(const std::filesystem::path& path);
NgramTable load_ngram_table(const std::filesystem::path& path, const LoadOptions& options = {});
LemmaDictionary load_lemma_dict(const std::filesystem::path& path, const LoadOptions& options = {});
ThesaurusIndex load_thesaurus(const std::filesystem::path& path, const LoadOptions& options = {});

// Same TSV layout load_associations reads.
void write_associations(std::ostream& out, const AssociationSet& set);

}  // namespace wassoc
