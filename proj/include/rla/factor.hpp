#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "rla/linear_operator.hpp"
#include "rla/types.hpp"

namespace rla {

template <Scalar S>
struct PartialSVD
{
    Mat<S> U;
    RealVec sigma;
    Mat<S> V;

    Index rank() const { return sigma.size(); }
    Mat<S> reconstruct() const { return U * sigma.cast<S>().asDiagonal() * V.adjoint(); }
};

template <Scalar S>
struct PartialEig
{
    Mat<S> U;
    RealVec lambda;

    Index rank() const { return lambda.size(); }
    Mat<S> reconstruct() const { return U * lambda.cast<S>().asDiagonal() * U.adjoint(); }
};

template <Scalar S>
struct PartialQR
{
    Mat<S> Q;
    Mat<S> R;
};

enum class IdSide { row, column };

/**
 * Interpolative decomposition.
 *
 * Row form: M ~= X M(J,:), X is m x k with X(J,:) = I.
 * Column form: M ~= M(:,J) X, X is k x n with X(:,J) = I.
 */
template <Scalar S>
struct InterpolativeDecomp
{
    std::vector<Index> J;
    Mat<S> X;
    IdSide side = IdSide::row;
    int swaps = 0;
};

template <Scalar S>
struct NystromFactors
{
    Mat<S> F;
};

template <Scalar S>
struct NystromResult
{
    PartialEig<S> eig;
    NystromFactors<S> factors;
    bool fallback = false; ///< Cholesky of Q*AQ failed; eigenvalue clamping was used
};

template <Scalar S>
struct SampleBundle
{
    Mat<S> Omega;
    Mat<S> Y;
    Mat<S> Q;
    std::optional<Mat<S>> Omega_tilde;
    std::optional<Mat<S>> Y_tilde;
    std::optional<Mat<S>> Q_tilde;
};

enum class OnePassBasis { samples, leading_singular_vectors };

struct OnePassDiagnostics
{
    Real tau_min = 0.0; ///< smallest singular value of Q*Omega
    Real cond = 0.0;
    bool ill_conditioned = false; ///< cond > 1e12
    OnePassBasis basis = OnePassBasis::samples;
};

template <Scalar S>
struct OnePassEig
{
    PartialEig<S> eig;
    OnePassDiagnostics diag;
};

/// Largest swap count allowed in ID refinement: ceil(3 k ln n), at least k + 1.
Index id_swap_cap(Index k, Index n);

/// Row ID of M with k rows, refined until max |x_ij| <= 2.
template <Scalar S>
InterpolativeDecomp<S> row_id(const Mat<S>& M, Index k);

/// Column ID of M with k columns.
template <Scalar S>
InterpolativeDecomp<S> column_id(const Mat<S>& M, Index k);

template <Scalar S>
struct TwoSidedId
{
    std::vector<Index> rows;
    std::vector<Index> cols;
    Mat<S> W; ///< m x k, from the row side
    Mat<S> Z; ///< k x n, from the column side
};

/// A ~= W A(I,J) Z.
template <Scalar S>
TwoSidedId<S> two_sided_id(const Mat<S>& A, Index k);

/// B = Q*A (one adjoint pass), small SVD, U = Q U_B.
template <Scalar S>
PartialSVD<S> direct_svd(const LinearOperator<S>& A, const Mat<S>& Q);

/// SVD from a row ID of Q (or the raw sample matrix Y) and the extracted rows A(J,:).
template <Scalar S>
PartialSVD<S> svd_via_row_extraction(const Mat<S>& A, const Mat<S>& QorY);

/// Relative mismatch |<Ax,y> - <x,Ay>| on one random pair (two matvecs).
template <Scalar S>
Real hermitian_mismatch(const LinearOperator<S>& A, std::uint64_t seed);

/// B = Q*AQ, eig, U = QV. Throws DomainError if the probe says A is not Hermitian.
template <Scalar S>
PartialEig<S> direct_eig_hermitian(const LinearOperator<S>& A, const Mat<S>& Q);

/// Row ID of Q; X = VR; Z = R A(J,J) R*; eig of Z; U = VW.
template <Scalar S>
PartialEig<S> eig_via_row_extraction(const Mat<S>& A, const Mat<S>& Q);

/// Nystrom: B1 = AQ, B2 = Q*B1 = C*C, F = B1 C^{-1}, F = U S V*, lambda = s^2.
/// With strict set, a failed Cholesky raises NotPsdError instead of falling back.
template <Scalar S>
NystromResult<S> eig_nystrom(const LinearOperator<S>& A, const Mat<S>& Q, bool strict = false);

/// Hermitian eigendecomposition from Omega, Y = A Omega alone.
/// `k` is used only with leading_singular_vectors (0 keeps all).
template <Scalar S>
OnePassEig<S> eig_one_pass(const SampleBundle<S>& bundle, OnePassBasis basis = OnePassBasis::samples,
                           Index k = 0);

/// Unknowns allowed in the single-pass general solve.
inline constexpr Index kOnePassCap = 250000;

/// General single-pass SVD from Y = A Omega and Y~ = A* Omega~.
template <Scalar S>
PartialSVD<S> svd_one_pass_general(const SampleBundle<S>& bundle);

template <Scalar S>
PartialSVD<S> truncate_rank(const PartialSVD<S>& f, Index k);

template <Scalar S>
PartialEig<S> truncate_rank(const PartialEig<S>& f, Index k);

enum class CbTarget { qr, svd, id };

template <Scalar S>
using CbResult = std::variant<PartialQR<S>, PartialSVD<S>, InterpolativeDecomp<S>>;

template <Scalar S>
PartialQR<S> convert_cb_qr(const Mat<S>& C, const Mat<S>& B);

template <Scalar S>
PartialSVD<S> convert_cb_svd(const Mat<S>& C, const Mat<S>& B);

/// Column ID B ~= B(:,J) X, which is also a column ID of CB.
template <Scalar S>
InterpolativeDecomp<S> convert_cb_id(const Mat<S>& C, const Mat<S>& B);

template <Scalar S>
CbResult<S> convert_cb(const Mat<S>& C, const Mat<S>& B, CbTarget target);

/// Omega = gaussian(n, ell, derive_seed(seed, 1)); Y = A Omega; Q = orthonormalize(Y).
template <Scalar S>
SampleBundle<S> make_bundle(const LinearOperator<S>& A, Index ell, std::uint64_t seed);

/// Adds Omega~ = gaussian(m, ell_tilde, derive_seed(seed, 2)) and Y~ = A* Omega~.
template <Scalar S>
SampleBundle<S> make_bundle_general(const LinearOperator<S>& A, Index ell, Index ell_tilde, std::uint64_t seed);

/// Fills Q (and Q~) from the sample matrices.
template <Scalar S>
void finalize_bundle(SampleBundle<S>& bundle);

} // namespace rla
