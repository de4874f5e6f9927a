#include "rla/sketch.hpp"

#include <cmath>
#include <numbers>

#include "rla/error.hpp"
#include "rla/random.hpp"

namespace rla {

namespace {

enum StreamTag : std::uint64_t {
    tag_d = 11,
    tag_picks = 12,
    tag_d1 = 13,
    tag_d2 = 14,
    tag_theta = 15,
    tag_theta1 = 16,
};

CplxVec unimodular(Index n, std::uint64_t seed)
{
    CounterRng rng(seed);
    CplxVec d(n);
    for (Index j = 0; j < n; ++j)
        d(j) = std::polar(1.0, 2.0 * std::numbers::pi * rng.uniform_at(static_cast<std::uint64_t>(j)));
    return d;
}

GivensChain random_chain(Index n, std::uint64_t seed)
{
    GivensChain c;
    CounterRng rng(derive_seed(seed, 1));
    c.perm = random_permutation(n, rng);
    CounterRng angles(derive_seed(seed, 2));
    c.theta.resize(std::max<Index>(n - 1, 0));
    for (Index j = 0; j + 1 < n; ++j)
        c.theta(j) = 2.0 * std::numbers::pi * angles.uniform_at(static_cast<std::uint64_t>(j));
    return c;
}

void check_dims(Index n, Index ell)
{
    if (n < 1 || ell < 1)
        throw DomainError("sketch dimensions must be positive");
    if (ell > n)
        throw DomainError("sample count exceeds dimension");
}

std::vector<Index> draw_picks(Index n, Index ell, std::uint64_t seed)
{
    CounterRng rng(seed);
    return sample_without_replacement(n, ell, rng);
}

} // namespace

std::string to_string(SketchKind kind)
{
    switch (kind) {
    case SketchKind::gaussian: return "gauss";
    case SketchKind::ortho: return "ortho";
    case SketchKind::srft: return "srft";
    case SketchKind::gsrft: return "gsrft";
    }
    return "unknown";
}

SketchKind parse_sketch_kind(std::string_view name)
{
    if (name == "gauss" || name == "gaussian")
        return SketchKind::gaussian;
    if (name == "ortho")
        return SketchKind::ortho;
    if (name == "srft")
        return SketchKind::srft;
    if (name == "gsrft")
        return SketchKind::gsrft;
    throw DomainError("unknown sketch kind '" + std::string(name) + "'");
}

// ---------------------------------------------------------------- SRFT

SrftOperator::SrftOperator(Index n, Index ell, std::uint64_t seed)
    : n_(n), ell_(ell), scale_(0.0), plan_((check_dims(n, ell), n))
{
    scale_ = std::sqrt(static_cast<Real>(n) / static_cast<Real>(ell));
    d_ = unimodular(n, derive_seed(seed, tag_d));
    picks_ = draw_picks(n, ell, derive_seed(seed, tag_picks));
}

template <Scalar S>
CplxMat SrftOperator::apply_rows(const Mat<S>& A) const
{
    if (A.cols() != n_)
        throw DomainError("srft apply: A has " + std::to_string(A.cols()) + " columns, expected " +
                          std::to_string(n_));
    const Index m = A.rows();
    CplxMat Y(m, ell_);
    CplxVec x(n_);
    for (Index i = 0; i < m; ++i) {
        for (Index j = 0; j < n_; ++j)
            x(j) = A(i, j) * d_(j);
        plan_.transform(x.data());
        for (Index j = 0; j < ell_; ++j)
            Y(i, j) = scale_ * x(picks_[static_cast<std::size_t>(j)]);
    }
    ops_ += static_cast<std::uint64_t>(m) * static_cast<std::uint64_t>(6 * n_ + 2 * ell_);
    return Y;
}

CplxMat SrftOperator::dense() const
{
    const CplxMat F = dft_matrix(n_);
    CplxMat Omega(n_, ell_);
    for (Index j = 0; j < ell_; ++j)
        Omega.col(j) = scale_ * d_.asDiagonal() * F.col(picks_[static_cast<std::size_t>(j)]);
    return Omega;
}

// ---------------------------------------------------------------- GSRFT

void apply_givens_chain(const GivensChain& chain, Complex* x, Complex* tmp)
{
    const auto n = static_cast<Index>(chain.perm.size());
    for (Index r = 0; r < n; ++r)
        tmp[chain.perm[static_cast<std::size_t>(r)]] = x[r];
    // v G(i,i+1;t): v_i <- c v_i - s v_{i+1}, v_{i+1} <- s v_i + c v_{i+1}
    for (Index i = 0; i + 1 < n; ++i) {
        const Real c = std::cos(chain.theta(i));
        const Real s = std::sin(chain.theta(i));
        const Complex a = tmp[i];
        const Complex b = tmp[i + 1];
        tmp[i] = c * a - s * b;
        tmp[i + 1] = s * a + c * b;
    }
    std::copy(tmp, tmp + n, x);
}

RealMat givens_chain_matrix(const GivensChain& chain)
{
    const auto n = static_cast<Index>(chain.perm.size());
    RealMat Theta = RealMat::Zero(n, n);
    for (Index r = 0; r < n; ++r)
        Theta(r, chain.perm[static_cast<std::size_t>(r)]) = 1.0;
    for (Index i = 0; i + 1 < n; ++i) {
        RealMat G = RealMat::Identity(n, n);
        const Real c = std::cos(chain.theta(i));
        const Real s = std::sin(chain.theta(i));
        G(i, i) = c;
        G(i, i + 1) = s;
        G(i + 1, i) = -s;
        G(i + 1, i + 1) = c;
        Theta = Theta * G;
    }
    return Theta;
}

GsrftOperator::GsrftOperator(Index n, Index ell, std::uint64_t seed)
    : n_(n), ell_(ell), scale_(0.0), plan_((check_dims(n, ell), n))
{
    scale_ = std::sqrt(static_cast<Real>(n) / static_cast<Real>(ell));
    d_ = unimodular(n, derive_seed(seed, tag_d));
    d1_ = unimodular(n, derive_seed(seed, tag_d1));
    d2_ = unimodular(n, derive_seed(seed, tag_d2));
    theta_ = random_chain(n, derive_seed(seed, tag_theta));
    theta1_ = random_chain(n, derive_seed(seed, tag_theta1));
    picks_ = draw_picks(n, ell, derive_seed(seed, tag_picks));
}

GsrftOperator GsrftOperator::degenerate(Index n, Index ell, std::uint64_t seed)
{
    GsrftOperator g(n, ell, seed);
    for (GivensChain* c : {&g.theta_, &g.theta1_}) {
        for (Index r = 0; r < n; ++r)
            c->perm[static_cast<std::size_t>(r)] = r;
        c->theta.setZero();
    }
    return g;
}

void GsrftOperator::transform_row(Complex* x, Complex* tmp) const
{
    for (Index j = 0; j < n_; ++j)
        x[j] *= d2_(j);
    apply_givens_chain(theta1_, x, tmp);
    for (Index j = 0; j < n_; ++j)
        x[j] *= d1_(j);
    apply_givens_chain(theta_, x, tmp);
    for (Index j = 0; j < n_; ++j)
        x[j] *= d_(j);
    plan_.transform(x);
}

template <Scalar S>
CplxMat GsrftOperator::apply_rows(const Mat<S>& A) const
{
    if (A.cols() != n_)
        throw DomainError("gsrft apply: A has " + std::to_string(A.cols()) + " columns, expected " +
                          std::to_string(n_));
    const Index m = A.rows();
    CplxMat Y(m, ell_);
    CplxVec x(n_);
    CplxVec tmp(n_);
    for (Index i = 0; i < m; ++i) {
        for (Index j = 0; j < n_; ++j)
            x(j) = A(i, j);
        transform_row(x.data(), tmp.data());
        for (Index j = 0; j < ell_; ++j)
            Y(i, j) = scale_ * x(picks_[static_cast<std::size_t>(j)]);
    }
    // three diagonals (6 flops each) and two chains (12 flops per rotation)
    ops_ += static_cast<std::uint64_t>(m) * static_cast<std::uint64_t>(18 * n_ + 24 * (n_ - 1) + 2 * ell_);
    return Y;
}

CplxMat GsrftOperator::dense() const
{
    const CplxMat F = dft_matrix(n_);
    CplxMat M = d2_.asDiagonal() * givens_chain_matrix(theta1_).cast<Complex>();
    M = M * d1_.asDiagonal();
    M = M * givens_chain_matrix(theta_).cast<Complex>();
    M = M * d_.asDiagonal();
    M = M * F;
    CplxMat Omega(n_, ell_);
    for (Index j = 0; j < ell_; ++j)
        Omega.col(j) = scale_ * M.col(picks_[static_cast<std::size_t>(j)]);
    return Omega;
}

// ---------------------------------------------------------------- dense kinds

template <Scalar S>
Mat<S> dense_test_matrix(SketchKind kind, Index n, Index ell, std::uint64_t seed)
{
    switch (kind) {
    case SketchKind::gaussian: return to_field<S>(gaussian_matrix(n, ell, seed));
    case SketchKind::ortho: return to_field<S>(ortho_matrix(n, ell, seed));
    default: throw DomainError("dense_test_matrix: structured kinds have no real dense form");
    }
}

template CplxMat SrftOperator::apply_rows<Real>(const RealMat&) const;
template CplxMat SrftOperator::apply_rows<Complex>(const CplxMat&) const;
template CplxMat GsrftOperator::apply_rows<Real>(const RealMat&) const;
template CplxMat GsrftOperator::apply_rows<Complex>(const CplxMat&) const;
template RealMat dense_test_matrix<Real>(SketchKind, Index, Index, std::uint64_t);
template CplxMat dense_test_matrix<Complex>(SketchKind, Index, Index, std::uint64_t);

} // namespace rla
