#pragma once

#include <cstdint>
#include <vector>

#include "rla/bounds.hpp"
#include "rla/types.hpp"

namespace rla {

/// Running mean (Neumaier-compensated sum) and variance (Welford update).
class RunningStats
{
public:
    void add(Real x);
    std::int64_t count() const { return n_; }
    Real mean() const;
    Real variance() const; ///< unbiased
    Real std_error() const;

private:
    static void kahan(Real& sum, Real& comp, Real x);
    std::int64_t n_ = 0;
    Real sum_ = 0.0, c_ = 0.0;
    Real wmean_ = 0.0, m2_ = 0.0;
};

/// ||(I - QQ*) A|| from the explicit residual matrix.
template <Scalar S>
Real exact_projection_error(const Mat<S>& A, const Mat<S>& Q, Norm norm);

/// sigma_{j+1} (spectral) or (sum_{i>j} sigma_i^2)^{1/2} (Frobenius).
template <Scalar S>
Real optimal_error(const Mat<S>& A, Index j, Norm norm);

enum class SpectrumKind { exact_rank, power_decay, exp_decay, flat, custom };

struct SyntheticSpec
{
    Index m = 0;
    Index n = 0;
    SpectrumKind kind = SpectrumKind::exp_decay;
    Index rank = 0;      ///< exact_rank: sigma_j = 1/j for j <= rank, else 0
    Real alpha = 1.0;    ///< power_decay: sigma_j = j^{-alpha}
    Real rho = 0.5;      ///< exp_decay: sigma_j = rho^j
    Index count = 0;     ///< flat: sigma_j = 1 for j <= count, then `level`
    Real level = 0.0;
    RealVec values;      ///< custom: used verbatim (padded with zeros)
    std::uint64_t seed = 0;
};

/// The prescribed singular values (length min(m,n)).
RealVec synthetic_spectrum(const SyntheticSpec& spec);

struct SyntheticMatrix
{
    RealMat A;
    SpectrumView spectrum;
    RealMat U;
    RealMat V;
};

/// A = U diag(sigma) V* with Haar U, V.
SyntheticMatrix synthetic_matrix(const SyntheticSpec& spec);

/// Real symmetric A = U diag(lambda) U* with Haar U (lambda may be signed).
RealMat synthetic_hermitian(const RealVec& lambda, std::uint64_t seed, RealMat* U_out = nullptr);

/// Log-kernel single-layer operator between concentric circles (radii 2 and 1), unit spectral norm.
RealMat laplace_bie_matrix(Index n_nodes);

struct PinvStats
{
    Real mean_fro_sq = 0.0;
    Real mean_spec = 0.0;
    Real se_fro_sq = 0.0;
    Real se_spec = 0.0;
    std::vector<Real> fro_sq; ///< per-trial ||G^+||_F^2
    std::vector<Real> spec;   ///< per-trial ||G^+||
};

/// Statistics of the pseudo-inverse of k x (k+p) standard Gaussian matrices.
PinvStats monte_carlo_pinv_norms(Index k, Index p, int trials, std::uint64_t seed);

struct ScaledGaussStats
{
    Real mean_fro_sq = 0.0;
    Real mean_spec = 0.0;
    Real se_fro_sq = 0.0;
    Real se_spec = 0.0;
};

/// Statistics of ||S G T|| for standard Gaussian G.
ScaledGaussStats monte_carlo_scaled_gauss(const RealMat& S, const RealMat& T, int trials, std::uint64_t seed);

/// Principal angles in ascending order, computed from both sines and cosines.
template <Scalar S>
RealVec principal_angles(const Mat<S>& Q1, const Mat<S>& Q2);

} // namespace rla
