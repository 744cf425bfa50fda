#include "hetnet/numerics.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>
#include <string>

#include "hetnet/errors.hpp"

namespace hetnet::numerics {

namespace {

double rank_threshold(const RVector& singular_values, Eigen::Index rows,
                      Eigen::Index cols, double tol) {
  const double sigma_max =
      singular_values.size() > 0 ? singular_values.maxCoeff() : 0.0;
  return tol * static_cast<double>(std::max(rows, cols)) * sigma_max;
}

int count_above(const RVector& values, double threshold) {
  int rank = 0;
  for (Eigen::Index k = 0; k < values.size(); ++k) {
    if (values[k] > threshold) ++rank;
  }
  return rank;
}

struct Pivot {
  Eigen::Index row = 0;
  double magnitude = 0.0;
  Complex rotation{1.0, 0.0};  // unit modulus; makes the pivot real positive
};

Pivot column_pivot(const CMatrix& columns, Eigen::Index c) {
  Eigen::Index pivot = 0;
  double best = -1.0;
  for (Eigen::Index r = 0; r < columns.rows(); ++r) {
    // Relative margin keeps the pivot stable when two entries differ only by
    // rounding.
    const double mag = std::abs(columns(r, c));
    if (mag > best * (1.0 + 1e-12)) {
      best = mag;
      pivot = r;
    }
  }
  if (best <= 0.0) return {};
  return {pivot, best, std::conj(columns(pivot, c)) / best};
}

// Rotates column c by its pivot factor and pins the pivot to exactly real,
// which the multiplication alone leaves off by rounding.
Complex rotate_column(CMatrix& columns, Eigen::Index c) {
  const Pivot p = column_pivot(columns, c);
  columns.col(c) *= p.rotation;
  if (p.magnitude > 0.0) columns(p.row, c) = Complex(p.magnitude, 0.0);
  return p.rotation;
}

}  // namespace

void normalize_column_phases(CMatrix& columns) {
  for (Eigen::Index c = 0; c < columns.cols(); ++c) {
    rotate_column(columns, c);
  }
}

int numerical_rank(const CMatrix& a, double tol) {
  if (a.size() == 0) return 0;
  Eigen::JacobiSVD<CMatrix> svd(a);
  return count_above(svd.singularValues(),
                     rank_threshold(svd.singularValues(), a.rows(), a.cols(), tol));
}

CMatrix nullspace(const CMatrix& a, double tol) {
  if (a.rows() < 1 || a.cols() < 1) {
    throw DimensionMismatch("nullspace: matrix must have at least one row and column");
  }
  if (!(tol > 0.0)) {
    throw PreconditionViolation("nullspace: tolerance must be positive");
  }
  Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeFullV);
  const RVector& sv = svd.singularValues();
  const int rank = count_above(sv, rank_threshold(sv, a.rows(), a.cols(), tol));
  const Eigen::Index dim = a.cols() - rank;
  if (dim == 0) {
    throw EmptyNullspace("nullspace: matrix of size " + std::to_string(a.rows()) +
                         "x" + std::to_string(a.cols()) + " has full column rank");
  }
  CMatrix basis = svd.matrixV().rightCols(dim);
  normalize_column_phases(basis);
  return basis;
}

CMatrix smallest_eigvecs(const CMatrix& a, int m) {
  if (a.rows() != a.cols()) {
    throw DimensionMismatch("smallest_eigvecs: matrix must be square");
  }
  if (m < 1 || m > a.rows()) {
    throw DimensionMismatch("smallest_eigvecs: requested " + std::to_string(m) +
                            " eigenvectors of a " + std::to_string(a.rows()) +
                            "x" + std::to_string(a.cols()) + " matrix");
  }
  assert(hermitian_defect(a) <= 1e-10);
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(a);
  if (eig.info() != Eigen::Success) {
    throw SingularSystem("smallest_eigvecs: eigendecomposition failed");
  }
  CMatrix vecs = eig.eigenvectors().leftCols(m);
  normalize_column_phases(vecs);
  return vecs.adjoint();
}

SvdTriplets top_singular_triplets(const CMatrix& a, int k) {
  const auto full = std::min(a.rows(), a.cols());
  if (k < 1 || k > full) {
    throw DimensionMismatch("top_singular_triplets: k out of range");
  }
  Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  SvdTriplets out;
  out.values = svd.singularValues().head(k);
  out.right = svd.matrixV().leftCols(k);
  out.left = svd.matrixU().leftCols(k);
  for (int c = 0; c < k; ++c) {
    // Same rotation on both sides keeps A v = s u.
    out.left.col(c) *= rotate_column(out.right, c);
  }
  return out;
}

CMatrix dominant_right_singular_vectors(const CMatrix& a, int m) {
  if (m < 1 || m > a.cols()) {
    throw DimensionMismatch("dominant_right_singular_vectors: m out of range");
  }
  if (m <= std::min(a.rows(), a.cols())) {
    return top_singular_triplets(a, m).right;
  }
  Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeFullV);
  CMatrix v = svd.matrixV().leftCols(m);
  normalize_column_phases(v);
  return v;
}

CMatrix hermitian_sqrt(const CMatrix& a) {
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(a);
  RVector roots = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * roots.asDiagonal() * eig.eigenvectors().adjoint();
}

CMatrix hermitian_solve(const CMatrix& a, const CMatrix& b) {
  if (a.rows() != a.cols() || a.rows() != b.rows()) {
    throw DimensionMismatch("hermitian_solve: incompatible dimensions");
  }
  Eigen::LLT<CMatrix> llt(a);
  if (llt.info() != Eigen::Success) {
    throw SingularSystem("hermitian_solve: matrix is not positive definite");
  }
  return llt.solve(b);
}

CMatrix psd_solve(const CMatrix& a, const CMatrix& b, double rcond) {
  if (a.rows() != a.cols() || a.rows() != b.rows()) {
    throw DimensionMismatch("psd_solve: incompatible dimensions");
  }
  Eigen::LLT<CMatrix> llt(a);
  if (llt.info() == Eigen::Success) {
    const CMatrix x = llt.solve(b);
    if (x.allFinite()) return x;
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(a);
  const RVector& d = eig.eigenvalues();
  const double top = d.cwiseAbs().maxCoeff();
  if (top == 0.0) return CMatrix::Zero(a.cols(), b.cols());
  if (d.minCoeff() < -1e-10 * top) {
    throw SingularSystem("psd_solve: matrix is indefinite");
  }
  RVector inv(d.size());
  for (Eigen::Index k = 0; k < d.size(); ++k) inv(k) = d(k) > rcond * top ? 1.0 / d(k) : 0.0;
  const CMatrix& u = eig.eigenvectors();
  return u * inv.asDiagonal() * (u.adjoint() * b);
}

CMatrix hermitian_inverse(const CMatrix& a) {
  return hermitian_solve(a, CMatrix::Identity(a.rows(), a.cols()));
}

double hermitian_defect(const CMatrix& a) {
  const double scale = a.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  return (a - a.adjoint()).cwiseAbs().maxCoeff() / scale;
}

double condition_number_db(const CMatrix& a) {
  Eigen::JacobiSVD<CMatrix> svd(a);
  const RVector& sv = svd.singularValues();
  return 20.0 * std::log10(sv[0] / sv[sv.size() - 1]);
}

WaterFillResult water_fill(std::span<const double> gains, double noise,
                           double budget) {
  if (gains.empty()) {
    throw PreconditionViolation("water_fill: no channels");
  }
  if (!(noise > 0.0) || !(budget > 0.0)) {
    throw PreconditionViolation("water_fill: noise and budget must be positive");
  }
  const std::size_t n = gains.size();
  std::vector<double> floor(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (!(gains[k] > 0.0)) {
      throw PreconditionViolation("water_fill: gains must be positive");
    }
    floor[k] = noise / (gains[k] * gains[k]);
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return floor[x] < floor[y]; });

  // Drop the weakest channel until the waterline clears every active floor.
  std::size_t active = n;
  double waterline = 0.0;
  while (active > 0) {
    double sum = budget;
    for (std::size_t k = 0; k < active; ++k) sum += floor[order[k]];
    waterline = sum / static_cast<double>(active);
    if (waterline > floor[order[active - 1]]) break;
    --active;
  }

  WaterFillResult result;
  result.waterline = waterline;
  result.allocations.assign(n, 0.0);
  for (std::size_t k = 0; k < active; ++k) {
    result.allocations[order[k]] = waterline - floor[order[k]];
  }
  return result;
}

double water_fill_rate(std::span<const double> gains, double noise,
                       std::span<const double> allocations) {
  double rate = 0.0;
  for (std::size_t k = 0; k < gains.size(); ++k) {
    rate += std::log2(1.0 + gains[k] * gains[k] * allocations[k] / noise);
  }
  return rate;
}

}  // namespace hetnet::numerics
