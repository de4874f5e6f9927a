#include "rla/factor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rla/core.hpp"
#include "rla/error.hpp"
#include "rla/random.hpp"
#include "rla/rangefinder.hpp"

namespace rla {

namespace {

template <Scalar S>
Mat<S> select_cols(const Mat<S>& A, const std::vector<Index>& idx)
{
    Mat<S> out(A.rows(), static_cast<Index>(idx.size()));
    for (std::size_t c = 0; c < idx.size(); ++c)
        out.col(static_cast<Index>(c)) = A.col(idx[c]);
    return out;
}

template <Scalar S>
Mat<S> select_rows(const Mat<S>& A, const std::vector<Index>& idx)
{
    Mat<S> out(static_cast<Index>(idx.size()), A.cols());
    for (std::size_t r = 0; r < idx.size(); ++r)
        out.row(static_cast<Index>(r)) = A.row(idx[r]);
    return out;
}

// Back-substitution R T = B that zeroes the rows of T belonging to negligible pivots.
template <Scalar S>
Mat<S> truncated_upper_solve(const Mat<S>& R, const Mat<S>& B)
{
    const Index k = R.rows();
    Real dmax = 0.0;
    for (Index i = 0; i < k; ++i)
        dmax = std::max(dmax, std::abs(R(i, i)));
    const Real cut = 1e-13 * dmax;
    Mat<S> T = Mat<S>::Zero(k, B.cols());
    for (Index i = k - 1; i >= 0; --i) {
        if (std::abs(R(i, i)) <= cut)
            continue;
        Eigen::Matrix<S, 1, Eigen::Dynamic> row = B.row(i);
        if (i + 1 < k)
            row.noalias() -= R.row(i).tail(k - i - 1) * T.bottomRows(k - i - 1);
        T.row(i) = row / R(i, i);
    }
    return T;
}

// Interpolation coefficients T with Mt(:,Jc) ~= Mt(:,J) T.
template <Scalar S>
Mat<S> id_coefficients(const Mat<S>& Mt, const std::vector<Index>& J, const std::vector<Index>& Jc)
{
    const Index k = static_cast<Index>(J.size());
    if (k == 0 || Jc.empty())
        return Mat<S>::Zero(k, static_cast<Index>(Jc.size()));
    const QRFactors<S> f = householder_qr<S>(select_cols(Mt, J));
    const Mat<S> R12 = f.Q.adjoint() * select_cols(Mt, Jc);
    return truncated_upper_solve<S>(f.R.topLeftCorner(k, k), R12);
}

template <Scalar S>
void require_same_rows(const LinearOperator<S>& A, const Mat<S>& Q, const char* who)
{
    if (Q.rows() != A.rows())
        throw DomainError(std::string(who) + ": Q has " + std::to_string(Q.rows()) + " rows, A has " +
                          std::to_string(A.rows()));
}

template <Scalar S>
PartialEig<S> eig_from_core(const Mat<S>& basis, const Mat<S>& core)
{
    const SmallEig<S> e = small_eig_hermitian<S>(core);
    return {basis * e.V, e.lambda};
}

} // namespace

Index id_swap_cap(Index k, Index n)
{
    const double c = 3.0 * static_cast<double>(k) * std::log(static_cast<double>(std::max<Index>(n, 2)));
    return std::max<Index>(k + 1, static_cast<Index>(std::ceil(c)));
}

template <Scalar S>
InterpolativeDecomp<S> row_id(const Mat<S>& M, Index k)
{
    const Index m = M.rows();
    if (m == 0 || M.cols() == 0)
        throw DomainError("row_id: empty matrix");
    if (k < 0 || k > std::min(m, M.cols()))
        throw DomainError("row_id: k must lie in [0, min(m, n)]");
    const Mat<S> Mt = M.adjoint();
    InterpolativeDecomp<S> id;
    id.side = IdSide::row;
    std::vector<Index> J, Jc;
    if (k > 0) {
        const PivotedQRFactors<S> p = pivoted_qr<S>(Mt, std::nullopt, k);
        J.assign(p.perm.begin(), p.perm.begin() + k);
        Jc.assign(p.perm.begin() + k, p.perm.end());
    } else {
        for (Index i = 0; i < m; ++i)
            Jc.push_back(i);
    }
    Mat<S> T = id_coefficients<S>(Mt, J, Jc);

    const Index cap = id_swap_cap(k, m);
    while (T.size() > 0) {
        Index a = 0, b = 0;
        const Real worst = T.cwiseAbs().maxCoeff(&a, &b);
        if (worst <= 2.0)
            break;
        if (id.swaps >= cap)
            throw NumericalError("row_id: refinement exceeded " + std::to_string(cap) + " swaps");
        std::swap(J[static_cast<std::size_t>(a)], Jc[static_cast<std::size_t>(b)]);
        ++id.swaps;
        T = id_coefficients<S>(Mt, J, Jc);
    }

    id.J = J;
    id.X = Mat<S>::Zero(m, k);
    for (Index i = 0; i < k; ++i)
        id.X(J[static_cast<std::size_t>(i)], i) = S(1);
    for (std::size_t c = 0; c < Jc.size(); ++c)
        id.X.row(Jc[c]) = T.col(static_cast<Index>(c)).adjoint();
    return id;
}

template <Scalar S>
InterpolativeDecomp<S> column_id(const Mat<S>& M, Index k)
{
    InterpolativeDecomp<S> id = row_id<S>(Mat<S>(M.adjoint()), k);
    id.X = id.X.adjoint().eval();
    id.side = IdSide::column;
    return id;
}

template <Scalar S>
TwoSidedId<S> two_sided_id(const Mat<S>& A, Index k)
{
    const InterpolativeDecomp<S> c = column_id<S>(A, k);
    const InterpolativeDecomp<S> r = row_id<S>(select_cols(A, c.J), k);
    return {r.J, c.J, r.X, c.X};
}

template <Scalar S>
PartialSVD<S> direct_svd(const LinearOperator<S>& A, const Mat<S>& Q)
{
    require_same_rows(A, Q, "direct_svd");
    if (Q.cols() > std::min(A.rows(), A.cols()))
        throw DomainError("direct_svd: Q has more columns than min(m, n)");
    if (Q.cols() == 0)
        return {Mat<S>(A.rows(), 0), RealVec(0), Mat<S>(A.cols(), 0)};
    const Mat<S> B = A.apply_adjoint(Q).adjoint();
    const SmallSVD<S> s = small_svd<S>(B);
    return {Q * s.U, s.sigma, s.V};
}

template <Scalar S>
PartialSVD<S> svd_via_row_extraction(const Mat<S>& A, const Mat<S>& QorY)
{
    if (QorY.rows() != A.rows())
        throw DomainError("svd_via_row_extraction: basis row count differs from A");
    const Index k = QorY.cols();
    if (k == 0)
        return {Mat<S>(A.rows(), 0), RealVec(0), Mat<S>(A.cols(), 0)};
    if (k > std::min(A.rows(), A.cols()))
        throw DomainError("svd_via_row_extraction: too many basis columns");
    const InterpolativeDecomp<S> id = row_id<S>(QorY, k);
    const Mat<S> AJ = select_rows(A, id.J);
    const QRFactors<S> wr = householder_qr<S>(AJ.adjoint()); // A(J,:) = R* W*
    const Mat<S> Z = id.X * wr.R.adjoint();
    const SmallSVD<S> s = small_svd<S>(Z);
    return {s.U, s.sigma, wr.Q * s.V};
}

template <Scalar S>
Real hermitian_mismatch(const LinearOperator<S>& A, std::uint64_t seed)
{
    if (A.rows() != A.cols())
        return 1.0;
    Mat<S> xy = to_field<S>(gaussian_matrix(A.cols(), 2, seed));
    if constexpr (is_complex_v<S>)
        xy.imag() = gaussian_matrix(A.cols(), 2, derive_seed(seed, 1));
    const Mat<S> Axy = A.apply(xy);
    const S lhs = Axy.col(1).dot(xy.col(0)); // <A x, y> with y as first slot
    const S rhs = xy.col(1).dot(Axy.col(0));
    const Real scale = Axy.col(0).norm() * xy.col(1).norm() + xy.col(0).norm() * Axy.col(1).norm();
    return scale > 0.0 ? std::abs(lhs - rhs) / scale : 0.0;
}

template <Scalar S>
PartialEig<S> direct_eig_hermitian(const LinearOperator<S>& A, const Mat<S>& Q)
{
    require_same_rows(A, Q, "direct_eig_hermitian");
    if (A.rows() != A.cols())
        throw DomainError("direct_eig_hermitian: A must be square");
    if (hermitian_mismatch(A, 0x5EEDBEEFULL) > 1e-8)
        throw DomainError("direct_eig_hermitian: operator is not Hermitian");
    if (Q.cols() == 0)
        return {Mat<S>(A.rows(), 0), RealVec(0)};
    const Mat<S> AQ = A.apply(Q);
    return eig_from_core<S>(Q, Q.adjoint() * AQ);
}

template <Scalar S>
PartialEig<S> eig_via_row_extraction(const Mat<S>& A, const Mat<S>& Q)
{
    if (A.rows() != A.cols())
        throw DomainError("eig_via_row_extraction: A must be square");
    if (Q.rows() != A.rows())
        throw DomainError("eig_via_row_extraction: basis row count differs from A");
    const Index k = Q.cols();
    if (k == 0)
        return {Mat<S>(A.rows(), 0), RealVec(0)};
    const InterpolativeDecomp<S> id = row_id<S>(Q, k);
    const QRFactors<S> vr = householder_qr<S>(id.X);
    const Mat<S> AJJ = select_cols(select_rows(A, id.J), id.J);
    const Mat<S> Z = vr.R * AJJ * vr.R.adjoint();
    return eig_from_core<S>(vr.Q, Z);
}

template <Scalar S>
NystromResult<S> eig_nystrom(const LinearOperator<S>& A, const Mat<S>& Q, bool strict)
{
    require_same_rows(A, Q, "eig_nystrom");
    if (A.rows() != A.cols())
        throw DomainError("eig_nystrom: A must be square");
    NystromResult<S> out;
    if (Q.cols() == 0) {
        out.eig = {Mat<S>(A.rows(), 0), RealVec(0)};
        out.factors.F = Mat<S>(A.rows(), 0);
        return out;
    }
    const Mat<S> B1 = A.apply(Q);
    Mat<S> B2 = Q.adjoint() * B1;
    B2 = ((B2 + B2.adjoint()) / Real(2)).eval();
    try {
        const Mat<S> C = cholesky<S>(B2);
        out.factors.F = solve_upper_right<S>(B1, C);
    } catch (const NotPsdError&) {
        if (strict)
            throw;
        // Pseudo-inverse square root of the clamped spectrum of B2.
        out.fallback = true;
        const SmallEig<S> e = small_eig_hermitian<S>(B2);
        const Real cut = 1e-12 * std::max(std::abs(e.lambda(0)), Real(0));
        Mat<S> W = e.V;
        for (Index j = 0; j < W.cols(); ++j) {
            const Real lam = e.lambda(j);
            W.col(j) *= lam > cut ? S(1.0 / std::sqrt(lam)) : S(0);
        }
        out.factors.F = B1 * W;
    }
    const SmallSVD<S> s = small_svd<S>(out.factors.F);
    out.eig = {s.U, s.sigma.array().square().matrix()};
    return out;
}

template <Scalar S>
OnePassEig<S> eig_one_pass(const SampleBundle<S>& bundle, OnePassBasis basis, Index k)
{
    const Mat<S>& Omega = bundle.Omega;
    const Mat<S>& Y = bundle.Y;
    if (Omega.cols() != Y.cols() || Omega.rows() != Y.rows())
        throw DomainError("eig_one_pass: Hermitian bundle needs square A, Omega and Y of equal shape");
    OnePassEig<S> out;
    out.diag.basis = basis;
    Mat<S> Q;
    if (basis == OnePassBasis::samples) {
        Q = bundle.Q.rows() == Y.rows() ? bundle.Q : orthonormalize<S>(Y, kOrthTol);
    } else {
        const SmallSVD<S> s = small_svd<S>(Y);
        Index keep = k > 0 ? std::min<Index>(k, s.sigma.size()) : s.sigma.size();
        const Real cut = kOrthTol * (s.sigma.size() > 0 ? s.sigma(0) : 0.0);
        while (keep > 0 && s.sigma(keep - 1) <= cut)
            --keep;
        Q = s.U.leftCols(keep);
    }
    if (Q.cols() == 0) {
        out.eig = {Mat<S>(Y.rows(), 0), RealVec(0)};
        return out;
    }
    const Mat<S> M = Q.adjoint() * Omega; // k x ell
    const Mat<S> R = Q.adjoint() * Y;
    const RealVec tau = singular_values<S>(M);
    out.diag.tau_min = tau(tau.size() - 1);
    out.diag.cond = out.diag.tau_min > 0.0 ? tau(0) / out.diag.tau_min : std::numeric_limits<Real>::infinity();
    out.diag.ill_conditioned = out.diag.cond > 1e12;
    // B M = R  <=>  M* B* = R*
    const Mat<S> Bt = least_squares<S>(M.adjoint(), R.adjoint());
    const Mat<S> B = Bt.adjoint();
    out.eig = eig_from_core<S>(Q, (B + B.adjoint()) / Real(2));
    return out;
}

template <Scalar S>
PartialSVD<S> svd_one_pass_general(const SampleBundle<S>& bundle)
{
    if (!bundle.Omega_tilde || !bundle.Y_tilde)
        throw DomainError("svd_one_pass_general: bundle lacks the adjoint-side sketch");
    const Mat<S>& Omega = bundle.Omega;
    const Mat<S>& Y = bundle.Y;
    const Mat<S>& Omt = *bundle.Omega_tilde;
    const Mat<S>& Yt = *bundle.Y_tilde;
    const Mat<S> Q = bundle.Q.rows() == Y.rows() ? bundle.Q : orthonormalize<S>(Y, kOrthTol);
    const Mat<S> Qt = bundle.Q_tilde ? *bundle.Q_tilde : orthonormalize<S>(Yt, kOrthTol);
    const Index k = Q.cols();
    const Index kt = Qt.cols();
    if (k * kt > kOnePassCap)
        throw DomainError("svd_one_pass_general: " + std::to_string(k * kt) +
                          " unknowns exceed the single-pass cap; use the two-pass path");
    if (k == 0 || kt == 0)
        return {Mat<S>(Y.rows(), 0), RealVec(0), Mat<S>(Yt.rows(), 0)};

    // min ||B M1 - R1||^2 + ||M2 B - R2||^2 with
    //   M1 = Qt* Omega, R1 = Q* Y, M2 = (Q* Omt)*, R2 = (Qt* Yt)*.
    // Normal equations: (M2* M2) B + B (M1 M1*) = R1 M1* + M2* R2.
    const Mat<S> M1 = Qt.adjoint() * Omega;
    const Mat<S> R1 = Q.adjoint() * Y;
    const Mat<S> M2 = (Q.adjoint() * Omt).adjoint();
    const Mat<S> R2 = (Qt.adjoint() * Yt).adjoint();
    const Mat<S> P = M2.adjoint() * M2;
    const Mat<S> N = M1 * M1.adjoint();
    const Mat<S> C = R1 * M1.adjoint() + M2.adjoint() * R2;
    const SmallEig<S> ep = small_eig_hermitian<S>(P);
    const SmallEig<S> en = small_eig_hermitian<S>(N);
    Mat<S> Bh = ep.V.adjoint() * C * en.V;
    const Real scale = std::max(ep.lambda.cwiseAbs().maxCoeff(), en.lambda.cwiseAbs().maxCoeff());
    for (Index i = 0; i < k; ++i)
        for (Index j = 0; j < kt; ++j) {
            const Real den = ep.lambda(i) + en.lambda(j);
            Bh(i, j) = den > 1e-14 * scale ? Bh(i, j) / den : S(0);
        }
    const Mat<S> B = ep.V * Bh * en.V.adjoint();
    const SmallSVD<S> s = small_svd<S>(B);
    return {Q * s.U, s.sigma, Qt * s.V};
}

template <Scalar S>
PartialSVD<S> truncate_rank(const PartialSVD<S>& f, Index k)
{
    if (k < 0 || k > f.rank())
        throw DomainError("truncate_rank: k exceeds current rank");
    return {f.U.leftCols(k), f.sigma.head(k), f.V.leftCols(k)};
}

template <Scalar S>
PartialEig<S> truncate_rank(const PartialEig<S>& f, Index k)
{
    if (k < 0 || k > f.rank())
        throw DomainError("truncate_rank: k exceeds current rank");
    std::vector<Index> order(static_cast<std::size_t>(f.rank()));
    for (Index i = 0; i < f.rank(); ++i)
        order[static_cast<std::size_t>(i)] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return std::abs(f.lambda(a)) > std::abs(f.lambda(b)); });
    PartialEig<S> out{Mat<S>(f.U.rows(), k), RealVec(k)};
    for (Index i = 0; i < k; ++i) {
        out.U.col(i) = f.U.col(order[static_cast<std::size_t>(i)]);
        out.lambda(i) = f.lambda(order[static_cast<std::size_t>(i)]);
    }
    return out;
}

template <Scalar S>
PartialQR<S> convert_cb_qr(const Mat<S>& C, const Mat<S>& B)
{
    if (C.cols() != B.rows())
        throw DomainError("convert_cb: inner dimensions differ");
    const QRFactors<S> f1 = householder_qr<S>(C);
    const QRFactors<S> f2 = householder_qr<S>(Mat<S>(f1.R * B));
    return {f1.Q * f2.Q, f2.R};
}

template <Scalar S>
PartialSVD<S> convert_cb_svd(const Mat<S>& C, const Mat<S>& B)
{
    if (C.cols() != B.rows())
        throw DomainError("convert_cb: inner dimensions differ");
    const QRFactors<S> f1 = householder_qr<S>(C);
    const SmallSVD<S> s = small_svd<S>(Mat<S>(f1.R * B));
    return {f1.Q * s.U, s.sigma, s.V};
}

template <Scalar S>
InterpolativeDecomp<S> convert_cb_id(const Mat<S>& C, const Mat<S>& B)
{
    if (C.cols() != B.rows())
        throw DomainError("convert_cb: inner dimensions differ");
    return column_id<S>(B, std::min(B.rows(), B.cols()));
}

template <Scalar S>
CbResult<S> convert_cb(const Mat<S>& C, const Mat<S>& B, CbTarget target)
{
    switch (target) {
    case CbTarget::qr: return convert_cb_qr<S>(C, B);
    case CbTarget::svd: return convert_cb_svd<S>(C, B);
    case CbTarget::id: return convert_cb_id<S>(C, B);
    }
    throw DomainError("convert_cb: unknown target");
}

template <Scalar S>
void finalize_bundle(SampleBundle<S>& bundle)
{
    bundle.Q = orthonormalize<S>(bundle.Y, kOrthTol);
    if (bundle.Y_tilde)
        bundle.Q_tilde = orthonormalize<S>(*bundle.Y_tilde, kOrthTol);
}

template <Scalar S>
SampleBundle<S> make_bundle(const LinearOperator<S>& A, Index ell, std::uint64_t seed)
{
    if (ell < 1 || ell > A.cols())
        throw DomainError("make_bundle: need 1 <= ell <= n");
    SampleBundle<S> b;
    b.Omega = to_field<S>(gaussian_matrix(A.cols(), ell, derive_seed(seed, 1)));
    b.Y = A.apply(b.Omega);
    finalize_bundle(b);
    return b;
}

template <Scalar S>
SampleBundle<S> make_bundle_general(const LinearOperator<S>& A, Index ell, Index ell_tilde, std::uint64_t seed)
{
    SampleBundle<S> b = make_bundle(A, ell, seed);
    if (ell_tilde < 1 || ell_tilde > A.rows())
        throw DomainError("make_bundle_general: need 1 <= ell_tilde <= m");
    b.Omega_tilde = to_field<S>(gaussian_matrix(A.rows(), ell_tilde, derive_seed(seed, 2)));
    b.Y_tilde = A.apply_adjoint(*b.Omega_tilde);
    finalize_bundle(b);
    return b;
}

#define RLA_INSTANTIATE(S)                                                                                  \
    template InterpolativeDecomp<S> row_id<S>(const Mat<S>&, Index);                                        \
    template InterpolativeDecomp<S> column_id<S>(const Mat<S>&, Index);                                     \
    template TwoSidedId<S> two_sided_id<S>(const Mat<S>&, Index);                                           \
    template PartialSVD<S> direct_svd<S>(const LinearOperator<S>&, const Mat<S>&);                          \
    template PartialSVD<S> svd_via_row_extraction<S>(const Mat<S>&, const Mat<S>&);                         \
    template Real hermitian_mismatch<S>(const LinearOperator<S>&, std::uint64_t);                           \
    template PartialEig<S> direct_eig_hermitian<S>(const LinearOperator<S>&, const Mat<S>&);                \
    template PartialEig<S> eig_via_row_extraction<S>(const Mat<S>&, const Mat<S>&);                         \
    template NystromResult<S> eig_nystrom<S>(const LinearOperator<S>&, const Mat<S>&, bool);                \
    template OnePassEig<S> eig_one_pass<S>(const SampleBundle<S>&, OnePassBasis, Index);                    \
    template PartialSVD<S> svd_one_pass_general<S>(const SampleBundle<S>&);                                 \
    template PartialSVD<S> truncate_rank<S>(const PartialSVD<S>&, Index);                                   \
    template PartialEig<S> truncate_rank<S>(const PartialEig<S>&, Index);                                   \
    template PartialQR<S> convert_cb_qr<S>(const Mat<S>&, const Mat<S>&);                                   \
    template PartialSVD<S> convert_cb_svd<S>(const Mat<S>&, const Mat<S>&);                                 \
    template InterpolativeDecomp<S> convert_cb_id<S>(const Mat<S>&, const Mat<S>&);                         \
    template CbResult<S> convert_cb<S>(const Mat<S>&, const Mat<S>&, CbTarget);                             \
    template void finalize_bundle<S>(SampleBundle<S>&);                                                     \
    template SampleBundle<S> make_bundle<S>(const LinearOperator<S>&, Index, std::uint64_t);                \
    template SampleBundle<S> make_bundle_general<S>(const LinearOperator<S>&, Index, Index, std::uint64_t);

RLA_INSTANTIATE(Real)
RLA_INSTANTIATE(Complex)

#undef RLA_INSTANTIATE

} // namespace rla
