#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace hetnet {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

namespace numerics {

inline constexpr double kDefaultRankTol = 1e-10;

/// Orthonormal basis of null(A).
///
/// Columns come from the trailing right singular vectors of A (singular values
/// in descending order). A singular value counts toward the numerical rank
/// when it exceeds `tol * max(rows, cols) * sigma_max`. Each returned column is
/// rotated so that its largest-magnitude entry is real and positive.
///
/// Throws EmptyNullspace when A has full column rank.
CMatrix nullspace(const CMatrix& a, double tol = kDefaultRankTol);

/// Numerical rank under the same threshold rule as nullspace().
int numerical_rank(const CMatrix& a, double tol = kDefaultRankTol);

/// m x n matrix whose rows are the conjugate-transposed eigenvectors of the
/// m smallest eigenvalues of the Hermitian matrix A (ascending order).
CMatrix smallest_eigvecs(const CMatrix& a, int m);

/// n x m matrix of the m dominant right singular vectors of A.
CMatrix dominant_right_singular_vectors(const CMatrix& a, int m);

struct SvdTriplets {
  CMatrix left;     // rows x k
  RVector values;   // k, descending
  CMatrix right;    // cols x k
};

/// Top-k singular triplets with the deterministic phase convention applied to
/// the right singular vectors (left vectors follow so that A v = s u holds).
SvdTriplets top_singular_triplets(const CMatrix& a, int k);

/// Principal square root of a Hermitian positive semidefinite matrix.
CMatrix hermitian_sqrt(const CMatrix& a);

/// Solves A X = B for Hermitian positive definite A. Throws SingularSystem if
/// the Cholesky factorization fails.
CMatrix hermitian_solve(const CMatrix& a, const CMatrix& b);

CMatrix hermitian_inverse(const CMatrix& a);

/// Solve for Hermitian positive semidefinite A: Cholesky when it succeeds,
/// otherwise the eigendecomposition pseudo-inverse that drops eigenvalues at
/// or below rcond * lambda_max. Throws SingularSystem if A is indefinite.
CMatrix psd_solve(const CMatrix& a, const CMatrix& b, double rcond = 1e-15);

/// Largest |A - A^*| relative to max|A| (0 for the zero matrix).
double hermitian_defect(const CMatrix& a);

/// Rotates each column so its largest-magnitude entry is real positive.
void normalize_column_phases(CMatrix& columns);

/// Condition number in dB, 20 log10(sigma_max / sigma_min).
double condition_number_db(const CMatrix& a);

struct WaterFillResult {
  std::vector<double> allocations;
  double waterline = 0.0;
};

/// Capacity water-filling: maximizes sum log2(1 + g_k^2 p_k / noise) subject
/// to sum p_k = budget, p_k >= 0.
WaterFillResult water_fill(std::span<const double> gains, double noise,
                           double budget);

double water_fill_rate(std::span<const double> gains, double noise,
                       std::span<const double> allocations);

}  // namespace numerics
}  // namespace hetnet
