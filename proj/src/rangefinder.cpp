#include "rla/rangefinder.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rla/core.hpp"
#include "rla/error.hpp"
#include "rla/random.hpp"

namespace rla {

namespace {

const Real kSqrt2OverPi = std::sqrt(2.0 / std::numbers::pi);

template <Scalar S>
void check_ell(const LinearOperator<S>& A, Index ell)
{
    if (ell < 1 || ell > std::min(A.rows(), A.cols()))
        throw DomainError("range finder: need 1 <= ell <= min(m, n), got ell = " + std::to_string(ell));
}

} // namespace

template <Scalar S>
RangeBasis<S> randomized_range_finder(const LinearOperator<S>& A, Index ell, std::uint64_t seed, Real tol)
{
    check_ell(A, ell);
    const Mat<S> Omega = to_field<S>(gaussian_matrix(A.cols(), ell, seed));
    const Mat<S> Y = A.apply(Omega);
    RangeBasis<S> b;
    b.Q = orthonormalize<S>(Y, tol);
    b.samples_used = ell;
    b.passes = 1;
    b.spec = {SketchKind::gaussian, ell, 0, seed};
    if (b.Q.cols() == 0)
        b.est_error = 0.0;
    return b;
}

template <Scalar S>
Real posterior_error_estimate(const LinearOperator<S>& A, const Mat<S>& Q, int r, Real alpha, std::uint64_t seed)
{
    if (r < 1)
        throw DomainError("posterior_error_estimate: r must be >= 1");
    if (!(alpha > 1.0))
        throw DomainError("posterior_error_estimate: alpha must exceed 1");
    if (Q.cols() > 0 && Q.rows() != A.rows())
        throw DomainError("posterior_error_estimate: Q has wrong row count");
    const Mat<S> W = to_field<S>(gaussian_matrix(A.cols(), r, seed));
    Mat<S> Z = A.apply(W);
    if (Q.cols() > 0)
        Z.noalias() -= Q * (Q.adjoint() * Z);
    return alpha * kSqrt2OverPi * Z.colwise().norm().maxCoeff();
}

// ---------------------------------------------------------------- adaptive

template <Scalar S>
AdaptiveRangeFinder<S>::AdaptiveRangeFinder(const LinearOperator<S>& A, Real eps, int r, std::uint64_t seed,
                                             Index block, Real alpha)
    : A_(A), alpha_(alpha), r_(r), seed_(seed), block_(block), limit_(std::min(A.rows(), A.cols()))
{
    if (!(eps > 0.0))
        throw DomainError("adaptive range finder: eps must be positive");
    if (r < 1)
        throw DomainError("adaptive range finder: r must be >= 1");
    if (block < 1)
        throw DomainError("adaptive range finder: block must be >= 1");
    threshold_ = eps / (alpha_ * kSqrt2OverPi);
    Qbuf_.resize(A.rows(), 0);
    for (int i = 0; i < r_; ++i)
        window_.push_back(fresh_probe());
    log_.push_back({0, max_probe_norm()});
}

template <Scalar S>
Vec<S> AdaptiveRangeFinder<S>::raw_sample(Index t)
{
    if (t < reserve_start_ || t >= reserve_start_ + reserve_.cols()) {
        const Index n = A_.cols();
        CounterRng rng(seed_);
        RealMat W(n, block_);
        for (Index c = 0; c < block_; ++c)
            for (Index i = 0; i < n; ++i)
                W(i, c) = rng.normal_at(static_cast<std::uint64_t>((t + c) * n + i));
        reserve_ = A_.apply(to_field<S>(W));
        reserve_start_ = t;
    }
    return reserve_.col(t - reserve_start_);
}

template <Scalar S>
Vec<S> AdaptiveRangeFinder<S>::fresh_probe()
{
    Vec<S> y = raw_sample(next_probe_++);
    if (j_ > 0)
        y.noalias() -= Qbuf_ * (Qbuf_.adjoint() * y);
    return y;
}

template <Scalar S>
Real AdaptiveRangeFinder<S>::max_probe_norm() const
{
    Real mx = 0.0;
    for (const auto& y : window_)
        mx = std::max(mx, y.norm());
    return mx;
}

template <Scalar S>
bool AdaptiveRangeFinder<S>::step()
{
    if (converged() || saturated())
        return false;
    Vec<S> y = std::move(window_.front());
    window_.pop_front();
    if (j_ > 0)
        y.noalias() -= Qbuf_ * (Qbuf_.adjoint() * y);
    const Real ny = y.norm();
    if (ny == 0.0) {
        window_.push_back(fresh_probe());
        return true;
    }
    const Vec<S> q = y / ny;
    Qbuf_.conservativeResize(Eigen::NoChange, j_ + 1);
    Qbuf_.col(j_) = q;
    ++j_;
    for (auto& w : window_)
        w -= q * q.dot(w);
    window_.push_back(fresh_probe());
    log_.push_back({j_, max_probe_norm()});
    return true;
}

template <Scalar S>
void AdaptiveRangeFinder<S>::run()
{
    while (step()) {
    }
}

template <Scalar S>
RangeBasis<S> AdaptiveRangeFinder<S>::result() const
{
    RangeBasis<S> b;
    b.Q = Qbuf_.leftCols(j_);
    b.samples_used = next_probe_;
    b.passes = 1;
    b.est_error = alpha_ * kSqrt2OverPi * max_probe_norm();
    b.spec = {SketchKind::gaussian, j_, 0, seed_};
    b.saturated = saturated();
    return b;
}

template <Scalar S>
RangeBasis<S> adaptive_range_finder(const LinearOperator<S>& A, Real eps, int r, std::uint64_t seed, Index block)
{
    AdaptiveRangeFinder<S> f(A, eps, r, seed, block);
    f.run();
    return f.result();
}

// ---------------------------------------------------------------- power schemes

template <Scalar S>
RangeBasis<S> power_iteration_range(const LinearOperator<S>& A, Index ell, int q, std::uint64_t seed, Real tol)
{
    check_ell(A, ell);
    if (q < 0)
        throw DomainError("power iteration: q must be >= 0");
    const Mat<S> Omega = to_field<S>(gaussian_matrix(A.cols(), ell, seed));
    Mat<S> Y = A.apply(Omega);
    for (int i = 0; i < q; ++i)
        Y = A.apply(A.apply_adjoint(Y));
    RangeBasis<S> b;
    b.Q = orthonormalize<S>(Y, tol);
    b.samples_used = ell;
    b.passes = 2 * q + 1;
    b.spec = {SketchKind::gaussian, ell, q, seed};
    if (b.Q.cols() == 0)
        b.est_error = 0.0;
    return b;
}

template <Scalar S>
RangeBasis<S> subspace_iteration_range(const LinearOperator<S>& A, Index ell, int q, std::uint64_t seed)
{
    check_ell(A, ell);
    if (q < 0)
        throw DomainError("subspace iteration: q must be >= 0");
    const Mat<S> Omega = to_field<S>(gaussian_matrix(A.cols(), ell, seed));
    Mat<S> Q = householder_qr<S>(A.apply(Omega)).Q;
    for (int i = 0; i < q; ++i) {
        const Mat<S> Qt = householder_qr<S>(A.apply_adjoint(Q)).Q;
        Q = householder_qr<S>(A.apply(Qt)).Q;
    }
    RangeBasis<S> b;
    b.Q = std::move(Q);
    b.samples_used = ell;
    b.passes = 2 * q + 1;
    b.spec = {SketchKind::gaussian, ell, q, seed};
    return b;
}

// ---------------------------------------------------------------- structured

template <Scalar S>
CplxMat structured_sample(const Mat<S>& A, Index ell, std::uint64_t seed, SketchKind kind)
{
    switch (kind) {
    case SketchKind::srft: return SrftOperator(A.cols(), ell, seed).apply_rows(A);
    case SketchKind::gsrft: return GsrftOperator(A.cols(), ell, seed).apply_rows(A);
    default: throw DomainError("structured_sample: kind must be srft or gsrft");
    }
}

template <Scalar S>
CplxMat structured_sample_dense(const Mat<S>& A, Index ell, std::uint64_t seed, SketchKind kind)
{
    switch (kind) {
    case SketchKind::srft: return A.template cast<Complex>() * SrftOperator(A.cols(), ell, seed).dense();
    case SketchKind::gsrft: return A.template cast<Complex>() * GsrftOperator(A.cols(), ell, seed).dense();
    default: throw DomainError("structured_sample_dense: kind must be srft or gsrft");
    }
}

template <Scalar S>
RangeBasis<Complex> fast_range_finder(const Mat<S>& A, Index ell, std::uint64_t seed, SketchKind kind, Real tol)
{
    if (ell < 1)
        throw DomainError("fast range finder: ell must be >= 1");
    RangeBasis<Complex> b;
    b.Q = orthonormalize<Complex>(structured_sample(A, ell, seed, kind), tol);
    b.samples_used = ell;
    b.passes = 1;
    b.spec = {kind, ell, 0, seed};
    if (b.Q.cols() == 0)
        b.est_error = 0.0;
    return b;
}

template <Scalar S>
RangeBasis<Complex> structured_fixed_precision(const Mat<S>& A, Real eps, int r, std::uint64_t seed,
                                               SketchKind kind)
{
    if (!(eps > 0.0))
        throw DomainError("structured fixed precision: eps must be positive");
    const CplxMat Ac = A.template cast<Complex>();
    const DenseOperator<Complex> op(Ac);
    const Index n = A.cols();
    Index ell = std::min<Index>(32, n);
    std::int64_t passes = 0;
    for (;;) {
        RangeBasis<Complex> b = fast_range_finder(A, ell, seed, kind);
        passes += 1;
        b.est_error = posterior_error_estimate<Complex>(op, b.Q, r, 10.0, derive_seed(seed, 0xE57));
        b.passes = passes;
        if (*b.est_error <= eps || ell == n) {
            b.saturated = *b.est_error > eps;
            return b;
        }
        ell = std::min<Index>(2 * ell, n);
    }
}

#define RLA_INSTANTIATE(S)                                                                                   \
    template RangeBasis<S> randomized_range_finder<S>(const LinearOperator<S>&, Index, std::uint64_t, Real); \
    template Real posterior_error_estimate<S>(const LinearOperator<S>&, const Mat<S>&, int, Real,           \
                                              std::uint64_t);                                                \
    template class AdaptiveRangeFinder<S>;                                                                   \
    template RangeBasis<S> adaptive_range_finder<S>(const LinearOperator<S>&, Real, int, std::uint64_t,      \
                                                    Index);                                                  \
    template RangeBasis<S> power_iteration_range<S>(const LinearOperator<S>&, Index, int, std::uint64_t,     \
                                                    Real);                                                   \
    template RangeBasis<S> subspace_iteration_range<S>(const LinearOperator<S>&, Index, int, std::uint64_t); \
    template CplxMat structured_sample<S>(const Mat<S>&, Index, std::uint64_t, SketchKind);                  \
    template CplxMat structured_sample_dense<S>(const Mat<S>&, Index, std::uint64_t, SketchKind);            \
    template RangeBasis<Complex> fast_range_finder<S>(const Mat<S>&, Index, std::uint64_t, SketchKind, Real);\
    template RangeBasis<Complex> structured_fixed_precision<S>(const Mat<S>&, Real, int, std::uint64_t,      \
                                                               SketchKind);

RLA_INSTANTIATE(Real)
RLA_INSTANTIATE(Complex)

#undef RLA_INSTANTIATE

} // namespace rla
