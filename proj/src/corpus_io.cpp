#include "wassoc/corpus_io.hpp"

#include <bit>
#include <charconv>
#include <fstream>
#include <functional>
#include <ostream>

namespace wassoc {

namespace {

std::string ngram_key(std::span<const std::string> tokens) { return join_tokens(tokens); }

// Calls `handle(fields, line_number)` for every non-blank, non-comment line.
// Any Error escaping `handle` is rethrown as a LoadError carrying the line.
void for_each_row(const std::filesystem::path& path,
                  const std::function<void(std::vector<std::string>&)>& handle) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError(path.string(), 0, "cannot open file");
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (line.front() == '#') continue;
    try {
      if (!is_valid_utf8(line)) throw Error("invalid UTF-8");
      std::vector<std::string> fields = split_fields(line);
      for (auto& f : fields) f = std::string(trim_spaces(f));
      handle(fields);
    } catch (const LoadError&) {
      throw;
    } catch (const Error& e) {
      throw LoadError(path.string(), line_number, e.what());
    }
  }
}

void expect_fields(const std::vector<std::string>& fields, std::size_t n) {
  if (fields.size() != n) {
    throw Error("expected " + std::to_string(n) + " tab-separated fields, got " +
                std::to_string(fields.size()));
  }
}

std::string normalized(std::string_view text, const LoadOptions& options) {
  return options.normalize ? normalize_token(text) : std::string(text);
}

std::string normalized_phrase(std::string_view text, const LoadOptions& options) {
  std::vector<std::string> tokens = split_tokens(text);
  for (auto& t : tokens) t = normalized(t, options);
  return join_tokens(tokens);
}

}  // namespace

// ---------------------------------------------------------------------------
// AssociationSet

void AssociationSet::add(AssociationRecord record) {
  if (record.stimulus.empty()) throw Error("empty stimulus");
  if (has_whitespace(record.stimulus)) {
    throw Error("stimulus \"" + record.stimulus + "\" contains whitespace");
  }
  if (record.response.find('\t') != std::string::npos) throw Error("response contains a tab");
  std::vector<std::string> tokens = split_tokens(record.response);
  if (tokens.empty()) throw Error("empty response");
  record.response = join_tokens(tokens);
  records_.push_back(std::move(record));
}

// ---------------------------------------------------------------------------
// Respondents

std::string_view to_string(Gender g) {
  switch (g) {
    case Gender::male: return "male";
    case Gender::female: return "female";
    case Gender::unknown: return "unknown";
  }
  return "unknown";
}

Gender parse_gender(std::string_view token) {
  if (token == "m" || token == "male") return Gender::male;
  if (token == "f" || token == "female") return Gender::female;
  if (token == "u" || token == "unknown") return Gender::unknown;
  throw Error("unknown gender token \"" + std::string(token) + "\" (expected m, f or u)");
}

void RespondentTable::add(Respondent respondent) {
  if (respondent.id.empty()) throw Error("empty respondent id");
  std::string id = respondent.id;
  auto [it, inserted] = entries_.emplace(std::move(id), std::move(respondent));
  if (!inserted) throw Error("duplicate respondent id \"" + it->first + "\"");
}

const Respondent* RespondentTable::find(std::string_view id) const {
  auto it = entries_.find(id);
  return it == entries_.end() ? nullptr : &it->second;
}

const Respondent& RespondentTable::at(std::string_view id) const {
  const Respondent* r = find(id);
  if (r == nullptr) throw Error("unknown respondent id \"" + std::string(id) + "\"");
  return *r;
}

// ---------------------------------------------------------------------------
// NgramTable

void NgramTable::add(std::span<const std::string> tokens, std::uint64_t count) {
  if (tokens.empty() || tokens.size() > kMaxOrder) {
    throw Error("ngram must have 1 to 3 tokens, got " + std::to_string(tokens.size()));
  }
  for (const auto& t : tokens) {
    if (t.empty() || has_whitespace(t)) throw Error("malformed ngram token \"" + t + "\"");
  }
  if (count == 0) throw Error("ngram count must be positive");
  counts_[ngram_key(tokens)] += count;
}

std::uint64_t NgramTable::lookup(std::span<const std::string> tokens) const {
  if (tokens.empty() || tokens.size() > kMaxOrder) return 0;
  auto it = counts_.find(ngram_key(tokens));
  return it == counts_.end() ? 0 : it->second;
}

// ---------------------------------------------------------------------------
// LemmaDictionary

void LemmaDictionary::add(std::string surface, std::string lemma) {
  if (surface.empty() || lemma.empty()) throw Error("empty surface or lemma");
  if (has_whitespace(surface) || has_whitespace(lemma)) {
    throw Error("surface and lemma must be single tokens");
  }
  auto [it, inserted] = entries_.emplace(std::move(surface), lemma);
  if (!inserted && it->second != lemma) {
    throw Error("surface \"" + it->first + "\" maps to both \"" + it->second + "\" and \"" +
                lemma + "\"");
  }
}

void LemmaDictionary::validate() const {
  for (const auto& [surface, lemma] : entries_) {
    auto it = entries_.find(lemma);
    if (it != entries_.end() && it->second != lemma) {
      throw Error("lemma \"" + lemma + "\" (of \"" + surface + "\") is itself mapped to \"" +
                  it->second + "\"");
    }
  }
}

std::string LemmaDictionary::lemmatize(std::string_view surface) const {
  auto it = entries_.find(std::string(surface));
  return it == entries_.end() ? std::string(surface) : it->second;
}

std::string LemmaDictionary::lemmatize_phrase(std::string_view phrase) const {
  std::vector<std::string> tokens = split_tokens(phrase);
  for (auto& t : tokens) t = lemmatize(t);
  return join_tokens(tokens);
}

// ---------------------------------------------------------------------------
// Thesaurus

std::string_view to_string(RelationType t) {
  switch (t) {
    case RelationType::synonymy: return "synonymy";
    case RelationType::antonymy: return "antonymy";
    case RelationType::hypernymy: return "hypernymy";
    case RelationType::hyponymy: return "hyponymy";
    case RelationType::meronymy: return "meronymy";
    case RelationType::holonymy: return "holonymy";
    case RelationType::cause_effect: return "cause_effect";
    case RelationType::domain: return "domain";
  }
  return "?";
}

RelationType parse_relation_type(std::string_view token) {
  for (RelationType t : kAllRelationTypes) {
    if (to_string(t) == token) return t;
  }
  throw Error("unknown relation type \"" + std::string(token) + "\"");
}

RelationType inverse(RelationType t) {
  switch (t) {
    case RelationType::hypernymy: return RelationType::hyponymy;
    case RelationType::hyponymy: return RelationType::hypernymy;
    case RelationType::meronymy: return RelationType::holonymy;
    case RelationType::holonymy: return RelationType::meronymy;
    default: return t;
  }
}

std::size_t RelationSet::size() const { return static_cast<std::size_t>(std::popcount(bits_)); }

std::vector<RelationType> RelationSet::types() const {
  std::vector<RelationType> out;
  for (RelationType t : kAllRelationTypes) {
    if (contains(t)) out.push_back(t);
  }
  return out;
}

void ThesaurusIndex::add(std::string first, std::string second, RelationType type) {
  if (first.empty() || second.empty()) throw Error("empty lemma in relation");
  relations_[{first, second}].insert(type);
  relations_[{second, first}].insert(inverse(type));
  triples_.push_back({std::move(first), std::move(second), type});
}

RelationSet ThesaurusIndex::query(std::string_view first, std::string_view second) const {
  auto it = relations_.find({std::string(first), std::string(second)});
  return it == relations_.end() ? RelationSet{} : it->second;
}

// ---------------------------------------------------------------------------
// Loaders

AssociationSet load_associations(const std::filesystem::path& path,
                                 const RespondentTable* respondents,
                                 const LoadOptions& options) {
  AssociationSet set;
  for_each_row(path, [&](std::vector<std::string>& f) {
    expect_fields(f, 3);
    if (f[0].empty()) throw Error("empty respondent id");
    if (f[1].empty()) throw Error("empty stimulus");
    if (split_tokens(f[2]).empty()) throw Error("empty response");
    if (respondents != nullptr && !respondents->contains(f[0])) {
      throw Error("unknown respondent id \"" + f[0] + "\"");
    }
    set.add({f[0], normalized(f[1], options), normalized_phrase(f[2], options)});
  });
  return set;
}

RespondentTable load_respondents(const std::filesystem::path& path) {
  RespondentTable table;
  for_each_row(path, [&](std::vector<std::string>& f) {
    expect_fields(f, 5);
    Respondent r;
    r.id = f[0];
    r.gender = parse_gender(f[1]);
    r.specialization = f[2];
    if (!f[3].empty()) {
      int age = 0;
      auto [ptr, ec] = std::from_chars(f[3].data(), f[3].data() + f[3].size(), age);
      if (ec != std::errc{} || ptr != f[3].data() + f[3].size() || age < 0) {
        throw Error("age \"" + f[3] + "\" is not a non-negative integer");
      }
      r.age = age;
    }
    r.location = f[4];
    table.add(std::move(r));
  });
  return table;
}

NgramTable load_ngram_table(const std::filesystem::path& path, const LoadOptions& options) {
  NgramTable table;
  for_each_row(path, [&](std::vector<std::string>& f) {
    expect_fields(f, 2);
    std::vector<std::string> tokens = split_tokens(f[0]);
    for (auto& t : tokens) t = normalized(t, options);
    std::uint64_t count = 0;
    auto [ptr, ec] = std::from_chars(f[1].data(), f[1].data() + f[1].size(), count);
    if (f[1].empty() || ec != std::errc{} || ptr != f[1].data() + f[1].size()) {
      throw Error("count \"" + f[1] + "\" is not a positive integer");
    }
    table.add(tokens, count);
  });
  return table;
}

LemmaDictionary load_lemma_dict(const std::filesystem::path& path, const LoadOptions& options) {
  LemmaDictionary dict;
  for_each_row(path, [&](std::vector<std::string>& f) {
    expect_fields(f, 2);
    dict.add(normalized(f[0], options), normalized(f[1], options));
  });
  try {
    dict.validate();
  } catch (const Error& e) {
    throw LoadError(path.string(), 0, e.what());
  }
  return dict;
}

ThesaurusIndex load_thesaurus(const std::filesystem::path& path, const LoadOptions& options) {
  ThesaurusIndex index;
  for_each_row(path, [&](std::vector<std::string>& f) {
    expect_fields(f, 3);
    RelationType type = parse_relation_type(f[2]);
    std::string a = normalized_phrase(f[0], options);
    std::string b = normalized_phrase(f[1], options);
    if (a.empty() || b.empty()) throw Error("empty lemma in relation");
    index.add(std::move(a), std::move(b), type);
  });
  return index;
}

void write_associations(std::ostream& out, const AssociationSet& set) {
  for (const auto& r : set) {
    out << r.respondent_id << '\t' << r.stimulus << '\t' << r.response << '\n';
  }
}

}  // namespace wassoc
