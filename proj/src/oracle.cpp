#include "rla/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rla/core.hpp"
#include "rla/error.hpp"
#include "rla/linear_operator.hpp"
#include "rla/random.hpp"

namespace rla {

void RunningStats::kahan(Real& sum, Real& comp, Real x)
{
    const Real t = sum + x;
    if (std::abs(sum) >= std::abs(x))
        comp += (sum - t) + x;
    else
        comp += (x - t) + sum;
    sum = t;
}

void RunningStats::add(Real x)
{
    ++n_;
    kahan(sum_, c_, x);
    const Real d = x - wmean_;
    wmean_ += d / static_cast<Real>(n_);
    m2_ += d * (x - wmean_);
}

Real RunningStats::mean() const
{
    return n_ > 0 ? (sum_ + c_) / static_cast<Real>(n_) : 0.0;
}

Real RunningStats::variance() const
{
    if (n_ < 2)
        return 0.0;
    return std::max(0.0, m2_ / static_cast<Real>(n_ - 1));
}

Real RunningStats::std_error() const
{
    return n_ > 0 ? std::sqrt(variance() / static_cast<Real>(n_)) : 0.0;
}

template <Scalar S>
Real exact_projection_error(const Mat<S>& A, const Mat<S>& Q, Norm norm)
{
    Mat<S> R = A;
    if (Q.cols() > 0) {
        if (Q.rows() != A.rows())
            throw DomainError("exact_projection_error: Q has wrong row count");
        const Mat<S> C = Q.adjoint() * A;
        R.noalias() -= Q * C;
    }
    if (norm == Norm::frobenius) {
        Real acc = 0.0;
        for (Index j = 0; j < R.cols(); ++j)
            for (Index i = 0; i < R.rows(); ++i)
                acc += std::norm(R(i, j));
        return std::sqrt(acc);
    }
    return spectral_norm<S>(R);
}

template <Scalar S>
Real optimal_error(const Mat<S>& A, Index j, Norm norm)
{
    const RealVec s = singular_values<S>(A);
    if (norm == Norm::spectral)
        return j < s.size() ? s(j) : 0.0;
    Real acc = 0.0;
    for (Index i = j; i < s.size(); ++i)
        acc += s(i) * s(i);
    return std::sqrt(acc);
}

RealVec synthetic_spectrum(const SyntheticSpec& spec)
{
    const Index r = std::min(spec.m, spec.n);
    RealVec s = RealVec::Zero(r);
    for (Index j = 1; j <= r; ++j) {
        const Real jj = static_cast<Real>(j);
        Real v = 0.0;
        switch (spec.kind) {
        case SpectrumKind::exact_rank: v = j <= spec.rank ? 1.0 / jj : 0.0; break;
        case SpectrumKind::power_decay: v = std::pow(jj, -spec.alpha); break;
        case SpectrumKind::exp_decay: v = std::pow(spec.rho, jj); break;
        case SpectrumKind::flat: v = j <= spec.count ? 1.0 : spec.level; break;
        case SpectrumKind::custom: v = j <= spec.values.size() ? spec.values(j - 1) : 0.0; break;
        }
        s(j - 1) = v;
    }
    return s;
}

SyntheticMatrix synthetic_matrix(const SyntheticSpec& spec)
{
    if (spec.m < 1 || spec.n < 1)
        throw DomainError("synthetic_matrix: dimensions must be positive");
    SyntheticMatrix out;
    out.spectrum.sigma = synthetic_spectrum(spec);
    out.spectrum.m = spec.m;
    out.spectrum.n = spec.n;
    out.spectrum.validate();
    const Index r = out.spectrum.sigma.size();
    out.U = ortho_matrix(spec.m, r, derive_seed(spec.seed, 101));
    out.V = ortho_matrix(spec.n, r, derive_seed(spec.seed, 102));
    out.A = out.U * out.spectrum.sigma.asDiagonal() * out.V.transpose();
    return out;
}

RealMat synthetic_hermitian(const RealVec& lambda, std::uint64_t seed, RealMat* U_out)
{
    const Index n = lambda.size();
    const RealMat U = ortho_matrix(n, n, derive_seed(seed, 103));
    RealMat A = U * lambda.asDiagonal() * U.transpose();
    A = ((A + A.transpose()) / 2.0).eval();
    if (U_out != nullptr)
        *U_out = U;
    return A;
}

RealMat laplace_bie_matrix(Index n_nodes)
{
    if (n_nodes < 4)
        throw DomainError("laplace_bie_matrix: need at least 4 nodes");
    const Real h = 2.0 * std::numbers::pi / static_cast<Real>(n_nodes);
    RealMat A(n_nodes, n_nodes);
    for (Index i = 0; i < n_nodes; ++i) {
        const Real ti = h * static_cast<Real>(i);
        const Real xi = 2.0 * std::cos(ti);
        const Real yi = 2.0 * std::sin(ti);
        for (Index j = 0; j < n_nodes; ++j) {
            const Real tj = h * static_cast<Real>(j);
            // unit circle: arc-length weight equals h
            A(i, j) = std::log(std::hypot(xi - std::cos(tj), yi - std::sin(tj))) * h;
        }
    }
    const DenseOperator<Real> op(A);
    const Real rough = spectral_norm_estimate<Real>(op, 30, 0x1A9ULL);
    if (rough > 0.0)
        A /= rough;
    A /= spectral_norm<Real>(A);
    return A;
}

PinvStats monte_carlo_pinv_norms(Index k, Index p, int trials, std::uint64_t seed)
{
    if (p < 2)
        throw DomainError("monte_carlo_pinv_norms: p must be >= 2");
    if (k < 1 || trials < 1)
        throw DomainError("monte_carlo_pinv_norms: k and trials must be positive");
    PinvStats out;
    RunningStats fro, spec;
    for (int t = 0; t < trials; ++t) {
        const RealMat G = gaussian_matrix(k, k + p, derive_seed(seed, static_cast<std::uint64_t>(t)));
        const RealVec s = singular_values<Real>(G);
        const Real f = s.cwiseInverse().squaredNorm();
        const Real sp = 1.0 / s(s.size() - 1);
        fro.add(f);
        spec.add(sp);
        out.fro_sq.push_back(f);
        out.spec.push_back(sp);
    }
    out.mean_fro_sq = fro.mean();
    out.mean_spec = spec.mean();
    out.se_fro_sq = fro.std_error();
    out.se_spec = spec.std_error();
    return out;
}

ScaledGaussStats monte_carlo_scaled_gauss(const RealMat& S, const RealMat& T, int trials, std::uint64_t seed)
{
    if (trials < 1)
        throw DomainError("monte_carlo_scaled_gauss: trials must be positive");
    RunningStats fro, spec;
    for (int t = 0; t < trials; ++t) {
        const RealMat G = gaussian_matrix(S.cols(), T.rows(), derive_seed(seed, static_cast<std::uint64_t>(t)));
        const RealMat M = S * G * T;
        fro.add(M.squaredNorm());
        spec.add(spectral_norm<Real>(M));
    }
    return {fro.mean(), spec.mean(), fro.std_error(), spec.std_error()};
}

template <Scalar S>
RealVec principal_angles(const Mat<S>& Q1, const Mat<S>& Q2)
{
    if (Q1.rows() != Q2.rows())
        throw DomainError("principal_angles: bases live in different spaces");
    const Mat<S>& A = Q1.cols() >= Q2.cols() ? Q1 : Q2;
    const Mat<S>& B = Q1.cols() >= Q2.cols() ? Q2 : Q1;
    const Index k = B.cols();
    if (k == 0)
        return RealVec(0);
    const Mat<S> C = A.adjoint() * B;
    const RealVec cosv = singular_values<S>(C); // descending
    const RealVec sinv = singular_values<S>(Mat<S>(B - A * C));
    RealVec ang(k);
    for (Index i = 0; i < k; ++i) {
        const Real c = std::clamp(cosv(i), 0.0, 1.0);
        const Real s = std::clamp(sinv(k - 1 - i), 0.0, 1.0); // ascending
        ang(i) = std::clamp(std::atan2(s, c), 0.0, std::numbers::pi / 2.0);
    }
    std::sort(ang.data(), ang.data() + k);
    return ang;
}

template Real exact_projection_error<Real>(const RealMat&, const RealMat&, Norm);
template Real exact_projection_error<Complex>(const CplxMat&, const CplxMat&, Norm);
template Real optimal_error<Real>(const RealMat&, Index, Norm);
template Real optimal_error<Complex>(const CplxMat&, Index, Norm);
template RealVec principal_angles<Real>(const RealMat&, const RealMat&);
template RealVec principal_angles<Complex>(const CplxMat&, const CplxMat&);

} // namespace rla
