#include "wassoc/embedding.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>

namespace wassoc {

namespace {

// PPMI values at or below this are treated as zero and not stored.
constexpr double kPpmiFloor = 1e-12;

std::uint32_t index_of(const std::vector<std::string>& sorted, std::string_view token) {
  auto it = std::lower_bound(sorted.begin(), sorted.end(), token);
  if (it == sorted.end() || *it != token) return UINT32_MAX;
  return static_cast<std::uint32_t>(it - sorted.begin());
}

bool sorted_unique(const std::vector<std::string>& v) {
  return std::adjacent_find(v.begin(), v.end(), std::greater_equal<>()) == v.end();
}

}  // namespace

std::string_view to_string(CountMode m) { return m == CountMode::directional ? "directional" : "symmetric"; }

CountMode parse_count_mode(std::string_view token) {
  if (token == "directional") return CountMode::directional;
  if (token == "symmetric") return CountMode::symmetric;
  throw Error("unknown count mode \"" + std::string(token) + "\" (expected symmetric or directional)");
}

// ---------------------------------------------------------------------------
// Counting

CooccurrenceCounts CooccurrenceCounts::from_cells(std::vector<std::string> rows, std::vector<std::string> cols,
                                                  std::vector<CountCell> cells, CountMode mode) {
  if (!sorted_unique(rows) || !sorted_unique(cols)) {
    throw Error("co-occurrence vocabularies must be sorted and unique");
  }
  for (const auto& c : cells) {
    if (c.row >= rows.size() || c.col >= cols.size()) throw Error("co-occurrence cell index out of range");
    if (c.count == 0) throw Error("co-occurrence counts must be positive");
  }
  std::sort(cells.begin(), cells.end(), [](const CountCell& a, const CountCell& b) {
    return std::tie(a.row, a.col) < std::tie(b.row, b.col);
  });
  std::vector<CountCell> merged;
  for (const auto& c : cells) {
    if (!merged.empty() && merged.back().row == c.row && merged.back().col == c.col) {
      merged.back().count += c.count;
    } else {
      merged.push_back(c);
    }
  }
  CooccurrenceCounts out;
  out.rows_ = std::move(rows);
  out.cols_ = std::move(cols);
  out.cells_ = std::move(merged);
  out.mode_ = mode;
  return out;
}

std::uint64_t CooccurrenceCounts::count(std::string_view word, std::string_view context) const {
  std::uint32_t r = index_of(rows_, word);
  std::uint32_t c = index_of(cols_, context);
  if (r == UINT32_MAX || c == UINT32_MAX) return 0;
  auto it = std::lower_bound(cells_.begin(), cells_.end(), std::pair{r, c},
                             [](const CountCell& cell, const std::pair<std::uint32_t, std::uint32_t>& key) {
                               return std::tie(cell.row, cell.col) < std::tie(key.first, key.second);
                             });
  return (it != cells_.end() && it->row == r && it->col == c) ? it->count : 0;
}

CooccurrenceCounts build_cooccurrence(const AssociationSet& set, CountMode mode, std::uint64_t threshold,
                                      const LemmaDictionary& dict) {
  std::map<std::pair<std::string, std::string>, std::uint64_t> pairs;
  for (const auto& record : set) {
    std::string word = dict.lemmatize(record.stimulus);
    std::string context = dict.lemmatize_phrase(record.response);
    if (mode == CountMode::symmetric) ++pairs[{context, word}];
    ++pairs[{std::move(word), std::move(context)}];
  }

  std::map<std::string, std::uint64_t> row_totals;
  std::map<std::string, std::uint64_t> col_totals;
  for (const auto& [key, n] : pairs) {
    row_totals[key.first] += n;
    col_totals[key.second] += n;
  }
  std::vector<std::string> rows;
  std::vector<std::string> cols;
  for (const auto& [w, n] : row_totals) {
    if (n >= threshold) rows.push_back(w);
  }
  for (const auto& [c, n] : col_totals) {
    if (n >= threshold) cols.push_back(c);
  }

  std::vector<CountCell> cells;
  for (const auto& [key, n] : pairs) {
    std::uint32_t r = index_of(rows, key.first);
    std::uint32_t c = index_of(cols, key.second);
    if (r != UINT32_MAX && c != UINT32_MAX) cells.push_back({r, c, n});
  }
  return CooccurrenceCounts::from_cells(std::move(rows), std::move(cols), std::move(cells), mode);
}

// ---------------------------------------------------------------------------
// PPMI

double PpmiMatrix::value(std::string_view word, std::string_view context) const {
  std::uint32_t r = index_of(rows_, word);
  std::uint32_t c = index_of(cols_, context);
  if (r == UINT32_MAX || c == UINT32_MAX) return 0.0;
  for (const auto& cell : cells_) {
    if (cell.row == r && cell.col == c) return cell.value;
  }
  return 0.0;
}

Eigen::MatrixXd PpmiMatrix::to_dense() const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows_.size()),
                                            static_cast<Eigen::Index>(cols_.size()));
  for (const auto& cell : cells_) m(cell.row, cell.col) = cell.value;
  return m;
}

PpmiMatrix ppmi(const CooccurrenceCounts& counts, double alpha, double shift) {
  if (counts.empty()) throw DegenerateDataError("PPMI of empty co-occurrence counts");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw Error("smoothing exponent must lie in (0, 1]");
  if (!(shift >= 1.0)) throw Error("shift must be at least 1");

  std::vector<double> row_sum(counts.rows().size(), 0.0);
  std::vector<double> col_sum(counts.cols().size(), 0.0);
  for (const auto& cell : counts.cells()) {
    row_sum[cell.row] += static_cast<double>(cell.count);
    col_sum[cell.col] += static_cast<double>(cell.count);
  }
  std::vector<double> col_smoothed(col_sum.size(), 0.0);
  double smoothed_total = 0.0;
  for (std::size_t c = 0; c < col_sum.size(); ++c) {
    col_smoothed[c] = std::pow(col_sum[c], alpha);
    smoothed_total += col_smoothed[c];
  }
  const double log_shift = std::log(shift);

  PpmiMatrix m;
  m.rows_ = counts.rows();
  m.cols_ = counts.cols();
  m.alpha_ = alpha;
  m.shift_ = shift;
  for (const auto& cell : counts.cells()) {
    double ratio = static_cast<double>(cell.count) * smoothed_total / (row_sum[cell.row] * col_smoothed[cell.col]);
    double v = std::log(ratio) - log_shift;
    if (v > kPpmiFloor) m.cells_.push_back({cell.row, cell.col, v});
  }
  return m;
}

// ---------------------------------------------------------------------------
// Embedding space

EmbeddingSpace::EmbeddingSpace(std::vector<std::string> words, RowMatrix vectors, double eig_weight,
                               std::uint64_t seed)
    : words_(std::move(words)), vectors_(std::move(vectors)), eig_weight_(eig_weight), seed_(seed) {
  if (static_cast<std::size_t>(vectors_.rows()) != words_.size()) {
    throw Error("embedding has " + std::to_string(vectors_.rows()) + " vectors for " +
                std::to_string(words_.size()) + " words");
  }
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (!index_.emplace(words_[i], i).second) throw Error("duplicate embedding word \"" + words_[i] + "\"");
  }
}

bool EmbeddingSpace::contains(std::string_view word) const { return index_.contains(std::string(word)); }

std::size_t EmbeddingSpace::index(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end()) throw Error("\"" + std::string(word) + "\" is out of vocabulary");
  return it->second;
}

namespace {

std::string format_value(double v) {
  if (v == 0.0) v = 0.0;  // drop the sign of negative zero
  char buf[32];
  int n = std::snprintf(buf, sizeof buf, "%.9g", v);
  return std::string(buf, static_cast<std::size_t>(n));
}

std::string shortest(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

template <typename T>
T parse_number(std::string_view text, const char* what) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
    throw Error(std::string("bad ") + what + " \"" + std::string(text) + "\" in embedding file");
  }
  return value;
}

}  // namespace

void EmbeddingSpace::save(std::ostream& out) const {
  out << "dim " << dim() << ' ' << shortest(eig_weight_) << ' ' << seed_ << '\n';
  for (std::size_t i = 0; i < words_.size(); ++i) {
    out << words_[i];
    for (Eigen::Index j = 0; j < vectors_.cols(); ++j) out << '\t' << format_value(vectors_(static_cast<Eigen::Index>(i), j));
    out << '\n';
  }
}

EmbeddingSpace EmbeddingSpace::load(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error("embedding file is empty");
  std::vector<std::string> header = split_tokens(line);
  if (header.size() != 4 || header[0] != "dim") throw Error("embedding header must read \"dim <d> <p> <seed>\"");
  const auto d = parse_number<std::size_t>(header[1], "dimension");
  const auto p = parse_number<double>(header[2], "eigenvalue weight");
  const auto seed = parse_number<std::uint64_t>(header[3], "seed");

  std::vector<std::string> words;
  std::vector<double> values;
  std::size_t line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields = split_fields(line);
    if (fields.size() != d + 1) {
      throw Error("embedding line " + std::to_string(line_number) + " has " + std::to_string(fields.size() - 1) +
                  " values, expected " + std::to_string(d));
    }
    words.push_back(fields[0]);
    for (std::size_t j = 1; j <= d; ++j) values.push_back(parse_number<double>(fields[j], "value"));
  }
  RowMatrix vectors(static_cast<Eigen::Index>(words.size()), static_cast<Eigen::Index>(d));
  std::copy(values.begin(), values.end(), vectors.data());
  return EmbeddingSpace(std::move(words), std::move(vectors), p, seed);
}

EmbeddingSpace factorize(const PpmiMatrix& m, std::size_t d, double p, std::uint64_t seed, SvdMethod method) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error("eigenvalue weight must lie in [0, 1]");
  TruncatedSvd svd = truncated_svd(m, d, seed, method);
  const double largest = svd.s.size() > 0 ? svd.s(0) : 0.0;
  const double tol = largest * static_cast<double>(std::max(m.rows().size(), m.cols().size())) *
                     std::numeric_limits<double>::epsilon();
  Eigen::VectorXd weights(svd.s.size());
  for (Eigen::Index j = 0; j < svd.s.size(); ++j) {
    weights(j) = svd.s(j) > tol ? std::pow(svd.s(j), p) : 0.0;
  }
  RowMatrix vectors = svd.u * weights.asDiagonal();
  return EmbeddingSpace(m.rows(), std::move(vectors), p, seed);
}

NeighborList nearest_neighbors(const EmbeddingSpace& space, std::string_view query, std::size_t n) {
  const std::size_t q = space.index(query);
  const RowMatrix& v = space.vectors();
  const auto qv = v.row(static_cast<Eigen::Index>(q));
  const double qn = qv.norm();

  NeighborList all;
  all.reserve(space.size());
  for (std::size_t i = 0; i < space.size(); ++i) {
    if (i == q) continue;
    const auto row = v.row(static_cast<Eigen::Index>(i));
    const double rn = row.norm();
    double sim = 0.0;
    if (qn > 0.0 && rn > 0.0) sim = std::clamp(qv.dot(row) / (qn * rn), -1.0, 1.0);
    all.push_back({space.words()[i], sim});
  }
  const std::size_t k = std::min(n, all.size());
  auto better = [](const Neighbor& a, const Neighbor& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return a.word < b.word;
  };
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(), better);
  all.resize(k);
  return all;
}

// ---------------------------------------------------------------------------
// Pipelines

void EmbeddingConfig::validate() const {
  if (dim == 0) throw Error("embedding dimension must be positive");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw Error("smoothing exponent must lie in (0, 1]");
  if (!(shift >= 1.0)) throw Error("shift must be at least 1");
  if (!(eig_weight >= 0.0 && eig_weight <= 1.0)) throw Error("eigenvalue weight must lie in [0, 1]");
  if (threshold == 0) throw Error("token threshold must be positive");
}

EmbeddingSpace build_space(const AssociationSet& set, const LemmaDictionary& dict, const EmbeddingConfig& config) {
  config.validate();
  if (set.empty()) throw DegenerateDataError("no associations to embed");
  CooccurrenceCounts counts = build_cooccurrence(set, config.mode, config.threshold, dict);
  if (counts.empty()) {
    throw DegenerateDataError("no co-occurrences survive the token threshold of " + std::to_string(config.threshold));
  }
  PpmiMatrix m = ppmi(counts, config.alpha, config.shift);
  if (m.empty()) throw DegenerateDataError("PPMI matrix has no positive cells");
  const std::size_t smaller = std::min(m.rows().size(), m.cols().size());
  if (smaller < config.dim) {
    throw DegenerateDataError("vocabulary of " + std::to_string(m.rows().size()) + " x " +
                              std::to_string(m.cols().size()) + " is too small for dimension " +
                              std::to_string(config.dim));
  }
  return factorize(m, config.dim, config.eig_weight, config.seed, config.svd);
}

PersonalizedModels build_personalized_models(const AssociationSet& set, const RespondentTable& respondents,
                                             Attribute attribute, const LemmaDictionary& dict,
                                             const EmbeddingConfig& config) {
  config.validate();
  if (set.empty()) throw DegenerateDataError("no associations to embed");

  std::map<std::string, AssociationSet> slices;
  std::size_t unlabeled = 0;
  for (const auto& record : set) {
    std::optional<std::string> label = attribute_label(respondents.at(record.respondent_id), attribute);
    if (!label) {
      ++unlabeled;
      continue;
    }
    slices[*label].add(record);
  }

  PersonalizedModels out;
  out.baseline = build_space(set, dict, config);
  if (unlabeled > 0) {
    out.warnings.push_back(std::to_string(unlabeled) + " records have no " + std::string(to_string(attribute)) +
                           " and only enter the baseline");
  }
  if (slices.size() < 2) {
    out.warnings.push_back("attribute " + std::string(to_string(attribute)) + " has " +
                           std::to_string(slices.size()) + " value(s)");
  }
  for (const auto& [label, subset] : slices) {
    try {
      out.models.emplace(label, build_space(subset, dict, config));
    } catch (const DegenerateDataError& e) {
      out.skipped.emplace(label, e.what());
    }
  }
  return out;
}

}  // namespace wassoc
