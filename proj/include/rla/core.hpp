#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rla/types.hpp"

namespace rla {

template <Scalar S>
class LinearOperator;

template <Scalar S>
struct QRFactors
{
    Mat<S> Q;
    Mat<S> R;
};

/// Householder QR with r_jj >= 0. Economy mode returns min(m,n) columns of Q.
template <Scalar S>
QRFactors<S> householder_qr(const Mat<S>& A, bool economy = true);

/// Double Gram-Schmidt. Columns whose residual drops below tol * ||Y||_F are discarded.
template <Scalar S>
Mat<S> orthonormalize(const Mat<S>& Y, Real tol = 1e-10);

template <Scalar S>
struct PivotedQRFactors
{
    Mat<S> Q;                       ///< m x r
    Mat<S> R;                       ///< r x n, original column order; R(:, perm) is upper triangular
    std::vector<Index> perm;        ///< pivot order; the first r entries are the selected columns
    std::vector<Real> diag_profile; ///< |r_jj|, weakly decreasing
    Index rank = 0;                 ///< number of Householder steps taken
};

/**
 * Businger-Golub column-pivoted Householder QR.
 *
 * Column norms are recomputed from the trailing block at every step (no
 * downdating). Ties go to the lowest position. Stops once the trailing
 * Frobenius norm is <= tol, or after max_rank steps.
 */
template <Scalar S>
PivotedQRFactors<S> pivoted_qr(const Mat<S>& A, std::optional<Real> tol = std::nullopt,
                               std::optional<Index> max_rank = std::nullopt);

template <Scalar S>
struct SmallSVD
{
    Mat<S> U;
    RealVec sigma;
    Mat<S> V;
};

/// Thin SVD (LAPACK gesvd). First nonzero entry of each U column is real and positive.
template <Scalar S>
SmallSVD<S> small_svd(const Mat<S>& B);

/// Singular values only.
template <Scalar S>
RealVec singular_values(const Mat<S>& B);

template <Scalar S>
struct SmallEig
{
    Mat<S> V;
    RealVec lambda;
};

/// Eigendecomposition of (B + B*)/2, sorted by descending |lambda| (ties: larger value first).
template <Scalar S>
SmallEig<S> small_eig_hermitian(const Mat<S>& B);

/// Upper triangular C with B = C*C. Throws NotPsdError below -1e-12 ||B||.
template <Scalar S>
Mat<S> cholesky(const Mat<S>& B);

/// Minimum-norm minimizer of ||AX - B||_F via pivoted QR and a complete orthogonal decomposition.
template <Scalar S>
Mat<S> least_squares(const Mat<S>& A, const Mat<S>& B, Real rcond = 1e-12);

/// Solves X C = B for upper triangular C. Zero pivots give zero columns of X.
template <Scalar S>
Mat<S> solve_upper_right(const Mat<S>& B, const Mat<S>& C);

/// Power method on A*A from a Gaussian start; returns the running max of ||A x_k||.
template <Scalar S>
Real spectral_norm_estimate(const LinearOperator<S>& op, int iters, std::uint64_t seed);

/// Exact spectral norm via small_svd.
template <Scalar S>
Real spectral_norm(const Mat<S>& A);

template <Scalar S>
Real matrix_norm(const Mat<S>& A, Norm norm)
{
    return norm == Norm::spectral ? spectral_norm(A) : A.norm();
}

/// Scales each column of U (and V) so its first non-negligible entry is real positive.
template <Scalar S>
void normalize_column_signs(Mat<S>& U, Mat<S>* V = nullptr);

} // namespace rla
