#include <random>

#include <Eigen/QR>
#include <Eigen/SVD>
#include <Eigen/SparseCore>

#include "wassoc/embedding.hpp"

namespace wassoc {

namespace {

constexpr Eigen::Index kOversampling = 10;
constexpr int kPowerIterations = 2;

Eigen::SparseMatrix<double> to_sparse(const PpmiMatrix& m) {
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(m.cells().size());
  for (const auto& c : m.cells()) triplets.emplace_back(c.row, c.col, c.value);
  Eigen::SparseMatrix<double> s(static_cast<Eigen::Index>(m.rows().size()),
                                static_cast<Eigen::Index>(m.cols().size()));
  s.setFromTriplets(triplets.begin(), triplets.end());
  return s;
}

Eigen::MatrixXd orthonormal_basis(const Eigen::MatrixXd& y) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(y);
  return qr.householderQ() * Eigen::MatrixXd::Identity(y.rows(), y.cols());
}

// Randomized range finder with power iterations, then an exact SVD of the
// small projected matrix.
TruncatedSvd randomized_svd(const PpmiMatrix& m, Eigen::Index d, std::uint64_t seed) {
  const Eigen::SparseMatrix<double> a = to_sparse(m);
  const Eigen::Index l = std::min<Eigen::Index>(d + kOversampling, std::min(a.rows(), a.cols()));

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd omega(a.cols(), l);
  for (Eigen::Index j = 0; j < l; ++j) {
    for (Eigen::Index i = 0; i < a.cols(); ++i) omega(i, j) = gauss(rng);
  }

  Eigen::MatrixXd q = orthonormal_basis(a * omega);
  for (int it = 0; it < kPowerIterations; ++it) {
    Eigen::MatrixXd z = orthonormal_basis(a.transpose() * q);
    q = orthonormal_basis(a * z);
  }
  Eigen::MatrixXd b = q.transpose() * a;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(b, Eigen::ComputeThinU | Eigen::ComputeThinV);

  TruncatedSvd out;
  out.u = (q * svd.matrixU()).leftCols(d);
  out.s = svd.singularValues().head(d);
  out.v = svd.matrixV().leftCols(d);
  return out;
}

TruncatedSvd exact_svd(const PpmiMatrix& m, Eigen::Index d) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(m.to_dense(), Eigen::ComputeThinU | Eigen::ComputeThinV);
  TruncatedSvd out;
  out.u = svd.matrixU().leftCols(d);
  out.s = svd.singularValues().head(d);
  out.v = svd.matrixV().leftCols(d);
  return out;
}

void fix_signs(TruncatedSvd& svd) {
  for (Eigen::Index j = 0; j < svd.u.cols(); ++j) {
    Eigen::Index best = 0;
    double best_abs = -1.0;
    for (Eigen::Index i = 0; i < svd.u.rows(); ++i) {
      double a = std::abs(svd.u(i, j));
      if (a > best_abs) {
        best_abs = a;
        best = i;
      }
    }
    if (svd.u(best, j) < 0.0) {
      svd.u.col(j) *= -1.0;
      svd.v.col(j) *= -1.0;
    }
  }
}

}  // namespace

TruncatedSvd truncated_svd(const PpmiMatrix& m, std::size_t d, std::uint64_t seed, SvdMethod method) {
  const std::size_t smaller = std::min(m.rows().size(), m.cols().size());
  if (d == 0) throw Error("SVD rank must be positive");
  if (d > smaller) {
    throw Error("SVD rank " + std::to_string(d) + " exceeds the smaller matrix dimension " + std::to_string(smaller));
  }
  if (method == SvdMethod::automatic) {
    method = smaller <= kExactSvdLimit ? SvdMethod::exact : SvdMethod::randomized;
  }
  TruncatedSvd out = method == SvdMethod::exact ? exact_svd(m, static_cast<Eigen::Index>(d))
                                                 : randomized_svd(m, static_cast<Eigen::Index>(d), seed);
  fix_signs(out);
  return out;
}

}  // namespace wassoc
