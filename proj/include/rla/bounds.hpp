#pragma once

#include <optional>
#include <string>

#include "rla/types.hpp"

namespace rla {

/// Singular values sigma_1 >= sigma_2 >= ... >= 0, possibly partial.
struct SpectrumView
{
    RealVec sigma;
    Index m = 0;
    Index n = 0;

    /// Throws DomainError unless sorted descending and nonnegative.
    void validate() const;
    /// sigma_{j} with 1-based j; 0 beyond the stored list.
    Real at(Index j) const;
    /// (sum_{j>k} sigma_j^{2 power})^{1/2}
    Real tail(Index k, int power = 1) const;
};

struct BoundParams
{
    Index k = 0;
    Index p = 0;
    int q = 0;
    Index ell = 0;
    Real t = 0.0;
    Real u = 0.0;
};

struct BoundReport
{
    std::string name;
    Real value = 0.0;
    BoundParams params;
    std::optional<Real> failure_prob;
    bool order_only = false; ///< failure_prob carries an unknown constant (taken as 1)
    bool guaranteed = true;  ///< false when a hypothesis of the bound is not met
};

/// sqrt(||S2||^2 + ||S2 W2 W1^+||^2) for S2 = diag(sigma2). W1 must have full row rank.
Real det_bound_rhs(const RealVec& sigma2, const RealMat& Omega1, const RealMat& Omega2, Norm norm);
Real det_bound_rhs(const RealVec& sigma2, const CplxMat& Omega1, const CplxMat& Omega2, Norm norm);

/// (1 + k/(p-1))^{1/2} tail_k. Requires p >= 2.
Real gauss_mean_frobenius(Index k, Index p, const SpectrumView& s);

/// (1 + sqrt(k/(p-1))) sigma_{k+1} + e sqrt(k+p)/p tail_k. Requires k, p >= 2.
Real gauss_mean_spectral(Index k, Index p, const SpectrumView& s);

/// Deviation bounds with parameters t, u >= 1. Requires p >= 4.
BoundReport gauss_deviation(Index k, Index p, const SpectrumView& s, Real t, Real u, Norm norm);

/// Closed forms with t = e, u = sqrt(2p) (first) and t = p, u = sqrt(2p log p) (second).
BoundReport gauss_deviation_simplified_e(Index k, Index p, const SpectrumView& s);
BoundReport gauss_deviation_simplified_p(Index k, Index p, const SpectrumView& s);

/// Average spectral error of the q-step power scheme.
Real power_scheme_bound(Index k, Index p, int q, const SpectrumView& s);

/// 4 [sqrt(k) + sqrt(8 ln(kn))]^2 ln k, unrounded.
Real srft_min_samples_exact(Index k, Index n);

/// ceil of srft_min_samples_exact. Throws DomainError for k < 2 or when the result exceeds n.
Index srft_sample_size(Index k, Index n);

/// Same as srft_sample_size but clamped to n instead of throwing.
Index srft_sample_size_capped(Index k, Index n);

/// sqrt(1 + 7n/ell) times sigma_{k+1} (spectral) or tail_k (Frobenius); failure 1/k, order only.
BoundReport srft_error_bound(Index n, Index ell, Index k, const SpectrumView& s, Norm norm);

/// 1 + sqrt(1 + 4k(n-k)).
Real id_amplification(Index k, Index n);

/// [1 + 4 sqrt(k+p)/(p-1) sqrt(min(m,n))] sigma_{k+1}.
Real intro_mean_bound(Index k, Index p, Index m, Index n, Real sigma_k1);

/// [1 + 11 sqrt(k+p) sqrt(min(m,n))] sigma_{k+1}, failure 6 p^{-p}.
BoundReport intro_deviation_bound(Index k, Index p, Index m, Index n, Real sigma_k1);

/// [1 + 4 sqrt(2 min(m,n)/(k-1))]^{1/(2q+1)} sigma_{k+1}, for 2k samples.
Real intro_power_bound(Index k, int q, Index m, Index n, Real sigma_k1);

/// sigma_{k+1} + intro_power_bound: the truncated rank-k form.
Real intro_truncation_bound(Index k, int q, Index m, Index n, Real sigma_k1);

} // namespace rla
