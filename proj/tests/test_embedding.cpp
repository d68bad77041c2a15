#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "oracles.hpp"
#include "test_support.hpp"
#include "wassoc/embedding.hpp"

using namespace wassoc;

namespace {

std::vector<std::string> names(const char* prefix, std::size_t n) {
  std::vector<std::string> out;
  // Zero-padded so lexicographic order equals index order.
  for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::string(i < 10 ? "0" : "") + std::to_string(i));
  return out;
}

CooccurrenceCounts dense_counts(const std::vector<std::vector<std::uint64_t>>& m) {
  std::vector<CountCell> cells;
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t j = 0; j < m[i].size(); ++j) {
      if (m[i][j]) cells.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), m[i][j]});
    }
  }
  return CooccurrenceCounts::from_cells(names("w", m.size()), names("c", m[0].size()), cells, CountMode::directional);
}

AssociationSet pairs(std::initializer_list<std::pair<const char*, const char*>> list) {
  AssociationSet set;
  for (const auto& [s, r] : list) set.add({"r", s, r});
  return set;
}

// A fixed 6x5 count matrix with a full-rank PPMI.
CooccurrenceCounts fixture_counts() {
  return dense_counts({{9, 1, 0, 2, 0}, {1, 7, 3, 0, 1}, {0, 2, 8, 1, 0}, {3, 0, 1, 6, 2}, {0, 1, 0, 2, 9}, {2, 0, 4, 0, 1}});
}

double relative_error(const TruncatedSvd& f, const Eigen::MatrixXd& m) {
  Eigen::MatrixXd approx = f.u * f.s.asDiagonal() * f.v.transpose();
  return (approx - m).norm() / m.norm();
}

EmbeddingSpace hand_space(std::vector<std::string> words, std::vector<std::vector<double>> rows) {
  RowMatrix v(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) v(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return EmbeddingSpace(std::move(words), std::move(v), 0.5, 42);
}

std::vector<std::string> ranked_words(const NeighborList& list) {
  std::vector<std::string> out;
  for (const auto& n : list) out.push_back(n.word);
  return out;
}

}  // namespace

TEST_CASE("build_cooccurrence") {
  AssociationSet set = pairs({{"a", "b"}, {"a", "b"}, {"a", "c"}});
  LemmaDictionary dict;

  CooccurrenceCounts directional = build_cooccurrence(set, CountMode::directional, 1, dict);
  CHECK(directional.count("a", "b") == 2);
  CHECK(directional.count("a", "c") == 1);
  CHECK(directional.count("b", "a") == 0);

  CooccurrenceCounts symmetric = build_cooccurrence(set, CountMode::symmetric, 1, dict);
  CHECK(symmetric.count("a", "b") == 2);
  CHECK(symmetric.count("b", "a") == 2);
  CHECK(symmetric.count("c", "a") == 1);
  for (const auto& cell : symmetric.cells()) {
    CHECK(cell.count > 0);
    CHECK(symmetric.count(symmetric.cols()[cell.col], symmetric.rows()[cell.row]) == cell.count);
  }

  CooccurrenceCounts pruned = build_cooccurrence(set, CountMode::directional, 3, dict);
  CHECK(pruned.rows() == std::vector<std::string>{"a"});
  CHECK(pruned.empty());

  SUBCASE("lemmatized keys and atomic phrases") {
    LemmaDictionary d;
    d.add("days", "day");
    CooccurrenceCounts c = build_cooccurrence(pairs({{"days", "good days"}}), CountMode::directional, 1, d);
    CHECK(c.count("day", "good day") == 1);
    CHECK(c.count("day", "good") == 0);
  }
}

TEST_CASE("ppmi examples") {
  PpmiMatrix diag = ppmi(dense_counts({{10, 0}, {0, 10}}), 1.0, 1.0);
  REQUIRE(diag.cells().size() == 2);
  CHECK(diag.value("w00", "c00") == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(diag.value("w01", "c01") == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(diag.value("w00", "c01") == 0.0);

  CHECK(ppmi(dense_counts({{5, 5}, {5, 5}}), 1.0, 1.0).empty());
  CHECK(ppmi(dense_counts({{10, 0}, {0, 10}}), 1.0, 2.0).empty());

  CHECK_THROWS_AS(ppmi(CooccurrenceCounts{}, 1.0, 1.0), Error);
  CHECK_THROWS_AS(ppmi(dense_counts({{1}}), 0.0, 1.0), Error);
  CHECK_THROWS_AS(ppmi(dense_counts({{1}}), 1.0, 0.5), Error);
}

TEST_CASE("ppmi matches the dense oracle on random count matrices") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<std::size_t> dim(1, 10);
  std::uniform_int_distribution<std::uint64_t> value(0, 20);
  std::bernoulli_distribution sparse(0.4);
  const double alphas[] = {1.0, 0.75};
  const double shifts[] = {1.0, 2.0, 5.0};
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t r = dim(rng), c = dim(rng);
    std::vector<std::vector<std::uint64_t>> m(r, std::vector<std::uint64_t>(c, 0));
    bool any = false;
    for (auto& row : m) {
      for (auto& x : row) {
        x = sparse(rng) ? 0 : value(rng);
        any = any || x;
      }
    }
    if (!any) m[0][0] = 1;
    double alpha = alphas[trial % 2];
    double shift = shifts[trial % 3];
    PpmiMatrix sparse_result = ppmi(dense_counts(m), alpha, shift);
    auto dense = oracle::dense_ppmi(m, alpha, shift);
    Eigen::MatrixXd got = sparse_result.to_dense();
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = 0; j < c; ++j) {
        CHECK(std::abs(got(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) - dense[i][j]) <= 1e-9);
        ++checked;
      }
    }
    for (const auto& cell : sparse_result.cells()) CHECK(cell.value > 0.0);
  }
  CHECK(checked > 0);
}

TEST_CASE("ppmi with alpha 1 is invariant to scaling every count") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::uint64_t> value(0, 12);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::vector<std::uint64_t>> m(6, std::vector<std::uint64_t>(5));
    for (auto& row : m) {
      for (auto& x : row) x = value(rng);
    }
    m[0][0] += 1;
    auto scaled = m;
    for (auto& row : scaled) {
      for (auto& x : row) x *= 7;
    }
    Eigen::MatrixXd a = ppmi(dense_counts(m), 1.0, 1.0).to_dense();
    Eigen::MatrixXd b = ppmi(dense_counts(scaled), 1.0, 1.0).to_dense();
    CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("truncated_svd") {
  PpmiMatrix m = ppmi(fixture_counts(), 1.0, 1.0);
  Eigen::MatrixXd dense = m.to_dense();
  const std::size_t full = std::min(m.rows().size(), m.cols().size());

  SUBCASE("full rank reconstructs the matrix") {
    CHECK(relative_error(truncated_svd(m, full, 42), dense) < 1e-6);
  }
  SUBCASE("error is non-increasing in d") {
    double previous = std::numeric_limits<double>::infinity();
    for (std::size_t d : {std::size_t{1}, std::size_t{2}, std::size_t{4}, full}) {
      double e = relative_error(truncated_svd(m, d, 42), dense);
      CHECK(e <= previous + 1e-12);
      previous = e;
    }
  }
  SUBCASE("sign convention") {
    TruncatedSvd f = truncated_svd(m, full, 42);
    for (Eigen::Index k = 0; k < f.u.cols(); ++k) {
      Eigen::Index at = 0;
      f.u.col(k).cwiseAbs().maxCoeff(&at);
      CHECK(f.u(at, k) > 0.0);
    }
    for (Eigen::Index k = 1; k < f.s.size(); ++k) CHECK(f.s(k) <= f.s(k - 1));
  }
  SUBCASE("randomized agrees with exact") {
    TruncatedSvd exact = truncated_svd(m, 3, 42, SvdMethod::exact);
    TruncatedSvd randomized = truncated_svd(m, 3, 42, SvdMethod::randomized);
    CHECK((exact.s - randomized.s).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((exact.u - randomized.u).cwiseAbs().maxCoeff() < 1e-6);
  }
  SUBCASE("rank limits") {
    CHECK_THROWS_AS(truncated_svd(m, 0, 42), Error);
    CHECK_THROWS_AS(truncated_svd(m, full + 1, 42), Error);
  }
}

TEST_CASE("factorize") {
  SUBCASE("diagonal matrix gives orthogonal vectors scaled by singular values") {
    PpmiMatrix m = ppmi(dense_counts({{10, 0, 0}, {0, 20, 0}, {0, 0, 30}}), 1.0, 1.0);
    EmbeddingSpace space = factorize(m, 3, 1.0, 42);
    const RowMatrix& v = space.vectors();
    for (Eigen::Index i = 0; i < 3; ++i) {
      // Singular values of a diagonal matrix are its absolute diagonal.
      double expected = m.value(m.rows()[static_cast<std::size_t>(i)], m.cols()[static_cast<std::size_t>(i)]);
      CHECK(v.row(i).norm() == doctest::Approx(expected).epsilon(1e-12));
      for (Eigen::Index j = i + 1; j < 3; ++j) CHECK(std::abs(v.row(i).dot(v.row(j))) < 1e-12);
    }
  }
  SUBCASE("directions beyond the rank are zero padded") {
    // Rank 1: every row is proportional.
    PpmiMatrix m = ppmi(dense_counts({{4, 1, 1}, {1, 4, 1}, {1, 1, 4}}), 1.0, 1.0);
    EmbeddingSpace space = factorize(m, 3, 0.0, 42);
    CHECK(space.dim() == 3);
    CHECK(std::isfinite(space.vectors().norm()));
  }
  SUBCASE("deterministic for a fixed seed") {
    PpmiMatrix m = ppmi(fixture_counts(), 0.75, 1.0);
    std::ostringstream a, b;
    factorize(m, 3, 0.5, 7).save(a);
    factorize(m, 3, 0.5, 7).save(b);
    CHECK(a.str() == b.str());
    std::ostringstream r1, r2;
    factorize(m, 3, 0.5, 7, SvdMethod::randomized).save(r1);
    factorize(m, 3, 0.5, 7, SvdMethod::randomized).save(r2);
    CHECK(r1.str() == r2.str());
  }
}

TEST_CASE("nearest_neighbors") {
  SUBCASE("duplicate vector ranks first") {
    EmbeddingSpace s = hand_space({"w", "w2", "x"}, {{1, 2}, {1, 2}, {2, -1}});
    NeighborList nn = nearest_neighbors(s, "w", 5);
    REQUIRE(nn.size() == 2);
    CHECK(nn[0].word == "w2");
    CHECK(nn[0].similarity == doctest::Approx(1.0));
  }
  SUBCASE("angle oracle") {
    const double rad = std::numbers::pi / 180.0;
    EmbeddingSpace s = hand_space({"q", "ten", "ninety"},
                                  {{1, 0}, {std::cos(10 * rad), std::sin(10 * rad)}, {0, 1}});
    NeighborList nn = nearest_neighbors(s, "q", 10);
    CHECK(ranked_words(nn) == std::vector<std::string>{"ten", "ninety"});
    CHECK(nn[0].similarity == doctest::Approx(oracle::cosine({1, 0}, {std::cos(10 * rad), std::sin(10 * rad)})));
    CHECK(nn[1].similarity == doctest::Approx(0.0));
    CHECK(nearest_neighbors(s, "q", 1).size() == 1);
  }
  SUBCASE("ties are broken by word") {
    EmbeddingSpace s = hand_space({"q", "b", "a", "c"}, {{1, 0}, {0, 1}, {0, 1}, {0, -1}});
    CHECK(ranked_words(nearest_neighbors(s, "q", 3)) == std::vector<std::string>{"a", "b", "c"});
  }
  SUBCASE("zero vectors and out of vocabulary") {
    EmbeddingSpace s = hand_space({"q", "z", "y"}, {{1, 1}, {0, 0}, {-1, -1}});
    NeighborList nn = nearest_neighbors(s, "q", 2);
    CHECK(nn[0].word == "z");
    CHECK(nn[0].similarity == 0.0);
    CHECK(nn[1].similarity == doctest::Approx(-1.0));
    CHECK_THROWS_AS(nearest_neighbors(s, "missing", 2), Error);
  }
  SUBCASE("ranking is invariant to uniform scaling") {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> g(0.0, 1.0);
    RowMatrix v(12, 4);
    for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] = g(rng);
    std::vector<std::string> words = names("w", 12);
    EmbeddingSpace base(words, v, 0.5, 1);
    EmbeddingSpace scaled(words, RowMatrix(v * 3.5), 0.5, 1);
    for (const auto& w : words) {
      CHECK(ranked_words(nearest_neighbors(base, w, 11)) == ranked_words(nearest_neighbors(scaled, w, 11)));
    }
  }
}

TEST_CASE("embedding files round trip") {
  PpmiMatrix m = ppmi(fixture_counts(), 0.75, 1.0);
  EmbeddingSpace space = factorize(m, 3, 0.5, 42);
  std::ostringstream out;
  space.save(out);
  CHECK(out.str().rfind("dim 3 0.5 42\n", 0) == 0);
  std::istringstream in(out.str());
  EmbeddingSpace loaded = EmbeddingSpace::load(in);
  CHECK(loaded.words() == space.words());
  CHECK((loaded.vectors() - space.vectors()).cwiseAbs().maxCoeff() < 1e-8);
  for (const auto& w : space.words()) {
    CHECK(ranked_words(nearest_neighbors(loaded, w, 5)) == ranked_words(nearest_neighbors(space, w, 5)));
  }
  std::ostringstream again;
  loaded.save(again);
  CHECK(again.str() == out.str());

  std::istringstream bad("dim 2 0.5 42\nw\t1\n");
  CHECK_THROWS_AS(EmbeddingSpace::load(bad), Error);
}

TEST_CASE("EmbeddingConfig::validate") {
  EmbeddingConfig c;
  CHECK_NOTHROW(c.validate());
  c.dim = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = EmbeddingConfig{};
  c.alpha = 1.5;
  CHECK_THROWS_AS(c.validate(), Error);
  c = EmbeddingConfig{};
  c.eig_weight = -0.1;
  CHECK_THROWS_AS(c.validate(), Error);
}

namespace {

struct GenderData {
  AssociationSet set;
  RespondentTable table;
};

GenderData load_gender_data(bool identical) {
  testing::TempDir dir;
  auto data = testing::synthetic_gender_dataset(identical);
  GenderData g;
  g.table = load_respondents(testing::write_file(dir / "resp.tsv", data.respondents));
  g.set = load_associations(testing::write_file(dir / "assoc.tsv", data.associations));
  return g;
}

EmbeddingConfig small_config() {
  EmbeddingConfig c;
  c.dim = 8;
  c.threshold = 1;
  return c;
}

}  // namespace

TEST_CASE("personalized models") {
  SUBCASE("balanced genders give two slices and a baseline") {
    GenderData g = load_gender_data(false);
    PersonalizedModels pm = build_personalized_models(g.set, g.table, Attribute::gender, LemmaDictionary{}, small_config());
    CHECK(pm.models.size() == 2);
    CHECK(pm.models.count("male") == 1);
    CHECK(pm.models.count("female") == 1);
    CHECK(pm.baseline.size() > 0);
    CHECK(pm.skipped.empty());

    auto male = ranked_words(nearest_neighbors(pm.models.at("male"), "red", 5));
    auto female = ranked_words(nearest_neighbors(pm.models.at("female"), "red", 5));
    CHECK(male != female);
    CHECK(male[0] == "danger");
    CHECK(female[0] == "beauty");
  }
  SUBCASE("identical slices give identical rankings") {
    GenderData g = load_gender_data(true);
    PersonalizedModels pm = build_personalized_models(g.set, g.table, Attribute::gender, LemmaDictionary{}, small_config());
    REQUIRE(pm.models.size() == 2);
    for (const auto& w : pm.models.at("male").words()) {
      CHECK(ranked_words(nearest_neighbors(pm.models.at("male"), w, 10)) ==
            ranked_words(nearest_neighbors(pm.models.at("female"), w, 10)));
    }
  }
  SUBCASE("a slice below the threshold is skipped") {
    GenderData g = load_gender_data(false);
    g.table.add({"lonely", Gender::unknown, "history", 30, "Asha"});
    g.set.add({"lonely", "quartz", "crystal"});
    EmbeddingConfig c = small_config();
    c.threshold = 2;
    PersonalizedModels pm = build_personalized_models(g.set, g.table, Attribute::specialization, LemmaDictionary{}, c);
    CHECK(pm.models.count("physics") == 1);
    CHECK(pm.skipped.count("history") == 1);
  }
  SUBCASE("single-valued attribute warns") {
    GenderData g = load_gender_data(false);
    PersonalizedModels pm =
        build_personalized_models(g.set, g.table, Attribute::location, LemmaDictionary{}, small_config());
    CHECK(pm.models.size() == 1);
    CHECK_FALSE(pm.warnings.empty());
  }
}
