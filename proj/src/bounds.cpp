#include "rla/bounds.hpp"

#include <cmath>
#include <numbers>

#include "rla/core.hpp"
#include "rla/error.hpp"

namespace rla {

namespace {

constexpr Real kE = std::numbers::e;

void require_p(Index p, Index min_p, const char* who)
{
    if (p < min_p)
        throw DomainError(std::string(who) + ": oversampling p must be >= " + std::to_string(min_p));
}

template <Scalar S>
Real det_bound_impl(const RealVec& sigma2, const Mat<S>& Omega1, const Mat<S>& Omega2, Norm norm)
{
    if (Omega2.rows() != sigma2.size())
        throw DomainError("det_bound_rhs: Omega2 rows must match the tail length");
    if (Omega1.cols() != Omega2.cols())
        throw DomainError("det_bound_rhs: Omega1 and Omega2 need the same column count");
    const Mat<S> S2 = sigma2.template cast<S>().asDiagonal();
    const Real base = matrix_norm<S>(S2, norm);
    if (Omega1.rows() == 0)
        return base;
    const SmallSVD<S> sv = small_svd<S>(Omega1);
    const Real smax = sv.sigma(0);
    const Real smin = sv.sigma(sv.sigma.size() - 1);
    if (Omega1.rows() > Omega1.cols() || !(smin > 1e-12 * smax))
        throw DomainError("det_bound_rhs: Omega1 is not numerically full row rank");
    // W1^+ = V diag(1/s) U*
    const Mat<S> pinv = sv.V * sv.sigma.cwiseInverse().template cast<S>().asDiagonal() * sv.U.adjoint();
    const Real pert = matrix_norm<S>(Mat<S>(S2 * Omega2 * pinv), norm);
    return std::sqrt(base * base + pert * pert);
}

} // namespace

void SpectrumView::validate() const
{
    for (Index j = 0; j < sigma.size(); ++j) {
        if (!(sigma(j) >= 0.0))
            throw DomainError("spectrum entries must be nonnegative");
        if (j > 0 && sigma(j) > sigma(j - 1))
            throw DomainError("spectrum must be sorted in decreasing order");
    }
}

Real SpectrumView::at(Index j) const
{
    return (j >= 1 && j <= sigma.size()) ? sigma(j - 1) : 0.0;
}

Real SpectrumView::tail(Index k, int power) const
{
    Real acc = 0.0;
    for (Index j = k; j < sigma.size(); ++j)
        acc += std::pow(sigma(j), 2.0 * power);
    return std::sqrt(acc);
}

Real det_bound_rhs(const RealVec& sigma2, const RealMat& Omega1, const RealMat& Omega2, Norm norm)
{
    return det_bound_impl<Real>(sigma2, Omega1, Omega2, norm);
}

Real det_bound_rhs(const RealVec& sigma2, const CplxMat& Omega1, const CplxMat& Omega2, Norm norm)
{
    return det_bound_impl<Complex>(sigma2, Omega1, Omega2, norm);
}

Real gauss_mean_frobenius(Index k, Index p, const SpectrumView& s)
{
    require_p(p, 2, "gauss_mean_frobenius");
    s.validate();
    return std::sqrt(1.0 + static_cast<Real>(k) / static_cast<Real>(p - 1)) * s.tail(k);
}

Real gauss_mean_spectral(Index k, Index p, const SpectrumView& s)
{
    require_p(p, 2, "gauss_mean_spectral");
    if (k < 2)
        throw DomainError("gauss_mean_spectral: k must be >= 2");
    s.validate();
    const Real kk = static_cast<Real>(k);
    const Real pp = static_cast<Real>(p);
    return (1.0 + std::sqrt(kk / (pp - 1.0))) * s.at(k + 1) + kE * std::sqrt(kk + pp) / pp * s.tail(k);
}

BoundReport gauss_deviation(Index k, Index p, const SpectrumView& s, Real t, Real u, Norm norm)
{
    require_p(p, 4, "gauss_deviation");
    if (t < 1.0 || u < 1.0)
        throw DomainError("gauss_deviation: t and u must be >= 1");
    s.validate();
    const Real kk = static_cast<Real>(k);
    const Real pp = static_cast<Real>(p);
    const Real sk1 = s.at(k + 1);
    const Real tail = s.tail(k);
    const Real c = kE * std::sqrt(kk + pp) / (pp + 1.0);
    BoundReport r;
    r.params = {k, p, 0, k + p, t, u};
    if (norm == Norm::frobenius) {
        r.name = "gauss_deviation_frobenius";
        r.value = (1.0 + t * std::sqrt(12.0 * kk / pp)) * tail + u * t * c * sk1;
        r.failure_prob = 5.0 * std::pow(t, -pp) + 2.0 * std::exp(-u * u / 2.0);
    } else {
        r.name = "gauss_deviation_spectral";
        r.value = ((1.0 + t * std::sqrt(12.0 * kk / pp)) * sk1 + t * c * tail) + u * t * c * sk1;
        r.failure_prob = 5.0 * std::pow(t, -pp) + std::exp(-u * u / 2.0);
    }
    return r;
}

BoundReport gauss_deviation_simplified_e(Index k, Index p, const SpectrumView& s)
{
    require_p(p, 4, "gauss_deviation_simplified_e");
    s.validate();
    const Real kk = static_cast<Real>(k);
    const Real pp = static_cast<Real>(p);
    BoundReport r;
    r.name = "gauss_deviation_simplified_e";
    r.params = {k, p, 0, k + p, kE, std::sqrt(2.0 * pp)};
    r.value = (1.0 + 17.0 * std::sqrt(1.0 + kk / pp)) * s.at(k + 1) + 8.0 * std::sqrt(kk + pp) / (pp + 1.0) * s.tail(k);
    r.failure_prob = 6.0 * std::exp(-pp);
    return r;
}

BoundReport gauss_deviation_simplified_p(Index k, Index p, const SpectrumView& s)
{
    require_p(p, 4, "gauss_deviation_simplified_p");
    s.validate();
    const Real kk = static_cast<Real>(k);
    const Real pp = static_cast<Real>(p);
    BoundReport r;
    r.name = "gauss_deviation_simplified_p";
    r.params = {k, p, 0, k + p, pp, std::sqrt(2.0 * pp * std::log(pp))};
    r.value = (1.0 + 8.0 * std::sqrt((kk + pp) * pp * std::log(pp))) * s.at(k + 1) +
              3.0 * std::sqrt(kk + pp) * s.tail(k);
    r.failure_prob = 6.0 * std::pow(pp, -pp);
    return r;
}

Real power_scheme_bound(Index k, Index p, int q, const SpectrumView& s)
{
    require_p(p, 2, "power_scheme_bound");
    if (q < 0)
        throw DomainError("power_scheme_bound: q must be >= 0");
    s.validate();
    const Real kk = static_cast<Real>(k);
    const Real pp = static_cast<Real>(p);
    const Real e = 2.0 * q + 1.0;
    const Real inner = (1.0 + std::sqrt(kk / (pp - 1.0))) * std::pow(s.at(k + 1), e) +
                       kE * std::sqrt(kk + pp) / pp * s.tail(k, 2 * q + 1);
    return std::pow(inner, 1.0 / e);
}

Real srft_min_samples_exact(Index k, Index n)
{
    if (k < 2)
        throw DomainError("srft_sample_size: k must be >= 2");
    if (n < 1)
        throw DomainError("srft_sample_size: n must be positive");
    const Real kk = static_cast<Real>(k);
    const Real br = std::sqrt(kk) + std::sqrt(8.0 * std::log(kk * static_cast<Real>(n)));
    return 4.0 * br * br * std::log(kk);
}

Index srft_sample_size(Index k, Index n)
{
    const auto ell = static_cast<Index>(std::ceil(srft_min_samples_exact(k, n)));
    if (ell > n)
        throw DomainError("srft_sample_size: required " + std::to_string(ell) + " samples exceed n = " +
                          std::to_string(n));
    return ell;
}

Index srft_sample_size_capped(Index k, Index n)
{
    return std::min<Index>(n, static_cast<Index>(std::ceil(srft_min_samples_exact(k, n))));
}

BoundReport srft_error_bound(Index n, Index ell, Index k, const SpectrumView& s, Norm norm)
{
    if (ell < 1 || ell > n)
        throw DomainError("srft_error_bound: need 1 <= ell <= n");
    s.validate();
    BoundReport r;
    r.name = norm == Norm::spectral ? "srft_spectral" : "srft_frobenius";
    r.params = {k, ell - k, 0, ell, 0.0, 0.0};
    const Real f = std::sqrt(1.0 + 7.0 * static_cast<Real>(n) / static_cast<Real>(ell));
    r.value = f * (norm == Norm::spectral ? s.at(k + 1) : s.tail(k));
    r.order_only = true;
    if (k >= 2) {
        r.failure_prob = 1.0 / static_cast<Real>(k);
        r.guaranteed = static_cast<Real>(ell) >= srft_min_samples_exact(k, n);
    } else {
        r.guaranteed = false;
    }
    return r;
}

Real id_amplification(Index k, Index n)
{
    if (k < 0 || k > n)
        throw DomainError("id_amplification: need 0 <= k <= n");
    return 1.0 + std::sqrt(1.0 + 4.0 * static_cast<Real>(k) * static_cast<Real>(n - k));
}

Real intro_mean_bound(Index k, Index p, Index m, Index n, Real sigma_k1)
{
    require_p(p, 2, "intro_mean_bound");
    const Real mn = static_cast<Real>(std::min(m, n));
    return (1.0 + 4.0 * std::sqrt(static_cast<Real>(k + p)) / static_cast<Real>(p - 1) * std::sqrt(mn)) * sigma_k1;
}

BoundReport intro_deviation_bound(Index k, Index p, Index m, Index n, Real sigma_k1)
{
    require_p(p, 2, "intro_deviation_bound");
    const Real mn = static_cast<Real>(std::min(m, n));
    BoundReport r;
    r.name = "intro_deviation";
    r.params = {k, p, 0, k + p, 0.0, 0.0};
    r.value = (1.0 + 11.0 * std::sqrt(static_cast<Real>(k + p)) * std::sqrt(mn)) * sigma_k1;
    r.failure_prob = 6.0 * std::pow(static_cast<Real>(p), -static_cast<Real>(p));
    return r;
}

Real intro_power_bound(Index k, int q, Index m, Index n, Real sigma_k1)
{
    if (k < 2)
        throw DomainError("intro_power_bound: k must be >= 2");
    const Real mn = static_cast<Real>(std::min(m, n));
    const Real br = 1.0 + 4.0 * std::sqrt(2.0 * mn / static_cast<Real>(k - 1));
    return std::pow(br, 1.0 / (2.0 * q + 1.0)) * sigma_k1;
}

Real intro_truncation_bound(Index k, int q, Index m, Index n, Real sigma_k1)
{
    return sigma_k1 + intro_power_bound(k, q, m, n, sigma_k1);
}

} // namespace rla
