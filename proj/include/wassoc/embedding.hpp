#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "wassoc/corpus_io.hpp"
#include "wassoc/demographics.hpp"

namespace wassoc {

// directional: each pair counts (stimulus, response).
// symmetric: each pair also counts the mirrored (response, stimulus) event.
enum class CountMode { directional, symmetric };

std::string_view to_string(CountMode m);
CountMode parse_count_mode(std::string_view token);

struct CountCell {
  std::uint32_t row;
  std::uint32_t col;
  std::uint64_t count;
};

// Sparse word x context counts. Vocabularies are sorted; cells are sorted by
// (row, col) and strictly positive.
class CooccurrenceCounts {
 public:
  CooccurrenceCounts() = default;

  // Takes cells as given (no threshold pruning). Duplicate cells are summed.
  // Throws Error on out-of-range indices, zero counts or unsorted vocabularies.
  static CooccurrenceCounts from_cells(std::vector<std::string> rows, std::vector<std::string> cols,
                                       std::vector<CountCell> cells, CountMode mode);

  const std::vector<std::string>& rows() const { return rows_; }
  const std::vector<std::string>& cols() const { return cols_; }
  const std::vector<CountCell>& cells() const { return cells_; }
  CountMode mode() const { return mode_; }
  bool empty() const { return cells_.empty(); }

  // 0 when either token or the cell is absent.
  std::uint64_t count(std::string_view word, std::string_view context) const;

 private:
  std::vector<std::string> rows_;
  std::vector<std::string> cols_;
  std::vector<CountCell> cells_;
  CountMode mode_ = CountMode::symmetric;
};

// Counts lemmatized (stimulus, response) events; multi-token responses are
// single atomic contexts. A row (column) token survives only if its row
// (column) total is at least `threshold`; pruning happens once, after
// counting. The result may be empty.
CooccurrenceCounts build_cooccurrence(const AssociationSet& set, CountMode mode,
                                      std::uint64_t threshold, const LemmaDictionary& dict);

struct PpmiCell {
  std::uint32_t row;
  std::uint32_t col;
  double value;
};

// Positive shifted PMI with context distribution smoothing:
//   value = max(0, ln(#(w,c) * sum_c' #(c')^alpha / (#(w) * #(c)^alpha)) - ln(shift))
// Only cells above zero are stored.
class PpmiMatrix {
 public:
  const std::vector<std::string>& rows() const { return rows_; }
  const std::vector<std::string>& cols() const { return cols_; }
  const std::vector<PpmiCell>& cells() const { return cells_; }
  double alpha() const { return alpha_; }
  double shift() const { return shift_; }
  bool empty() const { return cells_.empty(); }

  // 0 for absent cells.
  double value(std::string_view word, std::string_view context) const;
  Eigen::MatrixXd to_dense() const;

 private:
  friend PpmiMatrix ppmi(const CooccurrenceCounts&, double, double);
  std::vector<std::string> rows_;
  std::vector<std::string> cols_;
  std::vector<PpmiCell> cells_;
  double alpha_ = 1.0;
  double shift_ = 1.0;
};

// Throws Error on empty counts, alpha outside (0, 1] or shift < 1.
PpmiMatrix ppmi(const CooccurrenceCounts& counts, double alpha, double shift);

enum class SvdMethod {
  automatic,   // exact when min(rows, cols) <= kExactSvdLimit, randomized above
  exact,
  randomized,  // oversampling 10, 2 power iterations
};

inline constexpr std::size_t kExactSvdLimit = 2000;

// Rank-d factors with M ~= u * diag(s) * v^T. Singular values descending;
// every column of u has its largest-magnitude entry positive (first such
// entry on ties), and v is flipped to match.
struct TruncatedSvd {
  Eigen::MatrixXd u;
  Eigen::VectorXd s;
  Eigen::MatrixXd v;
};

// Throws Error when d is 0 or exceeds min(rows, cols).
TruncatedSvd truncated_svd(const PpmiMatrix& m, std::size_t d, std::uint64_t seed,
                           SvdMethod method = SvdMethod::automatic);

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Word -> dense vector map, one row per word.
class EmbeddingSpace {
 public:
  EmbeddingSpace() = default;
  // Throws Error when the vector count does not match the word count or a
  // word is repeated.
  EmbeddingSpace(std::vector<std::string> words, RowMatrix vectors, double eig_weight, std::uint64_t seed);

  std::size_t dim() const { return static_cast<std::size_t>(vectors_.cols()); }
  std::size_t size() const { return words_.size(); }
  double eig_weight() const { return eig_weight_; }
  std::uint64_t seed() const { return seed_; }
  const std::vector<std::string>& words() const { return words_; }
  const RowMatrix& vectors() const { return vectors_; }

  bool contains(std::string_view word) const;
  // Row index of `word`; throws Error when out of vocabulary.
  std::size_t index(std::string_view word) const;

  // Text format: header "dim <d> <p> <seed>", then one line per word:
  // word \t v1 \t ... \t vd, values with 9 significant digits.
  void save(std::ostream& out) const;
  static EmbeddingSpace load(std::istream& in);

 private:
  std::vector<std::string> words_;
  RowMatrix vectors_;
  double eig_weight_ = 0.5;
  std::uint64_t seed_ = 0;
  std::unordered_map<std::string, std::size_t> index_;
};

// Word vectors U_d * S_d^p over the matrix rows. Directions with a zero
// singular value (d above the matrix rank) get zero columns for every p.
EmbeddingSpace factorize(const PpmiMatrix& m, std::size_t d, double p, std::uint64_t seed,
                         SvdMethod method = SvdMethod::automatic);

struct Neighbor {
  std::string word;
  double similarity;
};
using NeighborList = std::vector<Neighbor>;

// Top-n by cosine similarity, descending, ties broken by word; the query is
// excluded. Zero vectors have similarity 0 to everything. Throws Error when
// the query is out of vocabulary.
NeighborList nearest_neighbors(const EmbeddingSpace& space, std::string_view query, std::size_t n);

struct EmbeddingConfig {
  std::size_t dim = 100;
  double alpha = 0.75;
  double shift = 1.0;
  double eig_weight = 0.5;
  std::uint64_t threshold = 5;
  std::uint64_t seed = 42;
  CountMode mode = CountMode::symmetric;
  SvdMethod svd = SvdMethod::automatic;

  // Throws Error describing the first invalid parameter.
  void validate() const;
};

// counts -> PPMI -> factorization. Throws Error when pruning leaves nothing or
// the surviving vocabulary is smaller than config.dim.
EmbeddingSpace build_space(const AssociationSet& set, const LemmaDictionary& dict,
                           const EmbeddingConfig& config);

struct PersonalizedModels {
  EmbeddingSpace baseline;
  std::map<std::string, EmbeddingSpace> models;
  std::map<std::string, std::string> skipped;  // label -> reason
  std::vector<std::string> warnings;
};

// One space per attribute value plus a baseline on the whole set. Slices that
// cannot support a space are listed in `skipped`. Throws Error on an empty
// set, an unresolvable respondent or when the baseline itself cannot be built.
PersonalizedModels build_personalized_models(const AssociationSet& set, const RespondentTable& respondents,
                                             Attribute attribute, const LemmaDictionary& dict,
                                             const EmbeddingConfig& config);

}  // namespace wassoc
