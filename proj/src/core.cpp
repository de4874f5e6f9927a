#include "rla/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "rla/error.hpp"
#include "rla/linear_operator.hpp"
#include "rla/random.hpp"

namespace rla {

namespace {

template <Scalar S>
S unit_phase(const S& x)
{
    const Real a = std::abs(x);
    if (a == 0.0)
        return S(1);
    return x / a;
}

template <Scalar S>
S conj_of(const S& x)
{
    if constexpr (is_complex_v<S>)
        return std::conj(x);
    else
        return x;
}

// Reflector H = I - tau w w* with w(0) = 1 and H x = beta e1.
template <Scalar S>
struct Reflector
{
    Vec<S> w;
    Real tau = 0.0;
    S beta = S(0);
};

template <Scalar S>
Reflector<S> make_reflector(const Vec<S>& x)
{
    Reflector<S> h;
    const Index len = x.size();
    h.w = Vec<S>::Zero(len);
    h.w(0) = S(1);
    const Real xnorm = x.norm();
    if (xnorm == 0.0)
        return h;
    const S alpha = x(0);
    h.beta = -unit_phase(alpha) * xnorm;
    Vec<S> u = x;
    u(0) -= h.beta;
    const Real uu = u.squaredNorm();
    if (uu == 0.0) {
        h.beta = alpha;
        return h;
    }
    const S u0 = u(0);
    h.tau = 2.0 * std::norm(u0) / uu;
    h.w = u / u0;
    return h;
}

template <Scalar S, typename Block>
void apply_reflector_left(const Reflector<S>& h, Block&& W)
{
    if (h.tau == 0.0)
        return;
    const Eigen::Matrix<S, 1, Eigen::Dynamic> t = h.w.adjoint() * W;
    W.noalias() -= (S(h.tau) * h.w) * t;
}

} // namespace

template <Scalar S>
void normalize_column_signs(Mat<S>& U, Mat<S>* V)
{
    for (Index j = 0; j < U.cols(); ++j) {
        const Real cn = U.col(j).norm();
        if (cn == 0.0)
            continue;
        for (Index i = 0; i < U.rows(); ++i) {
            if (std::abs(U(i, j)) > 1e-10 * cn) {
                const S ph = unit_phase(U(i, j));
                const S c = conj_of(ph);
                U.col(j) *= c;
                if (V != nullptr && j < V->cols())
                    V->col(j) *= c;
                break;
            }
        }
    }
}

template <Scalar S>
QRFactors<S> householder_qr(const Mat<S>& A, bool economy)
{
    const Index m = A.rows();
    const Index n = A.cols();
    if (m == 0 || n == 0)
        throw DomainError("householder_qr: empty matrix");
    const Index r = std::min(m, n);
    Eigen::HouseholderQR<Mat<S>> qr(A);
    QRFactors<S> f;
    const Index qcols = economy ? r : m;
    f.Q = qr.householderQ() * Mat<S>::Identity(m, qcols);
    f.R = qr.matrixQR().topRows(qcols).template triangularView<Eigen::Upper>();
    for (Index j = 0; j < r; ++j) {
        const S ph = unit_phase(f.R(j, j));
        if (ph != S(1)) {
            f.R.row(j) *= conj_of(ph);
            f.Q.col(j) *= ph;
        }
    }
    return f;
}

template <Scalar S>
Mat<S> orthonormalize(const Mat<S>& Y, Real tol)
{
    if (Y.rows() == 0 || Y.cols() == 0)
        throw DomainError("orthonormalize: empty matrix");
    if (tol < 0.0)
        throw DomainError("orthonormalize: negative tolerance");
    const Index m = Y.rows();
    const Real cutoff = tol * Y.norm();
    Mat<S> Q(m, std::min(m, Y.cols()));
    Index kept = 0;
    for (Index j = 0; j < Y.cols() && kept < m; ++j) {
        Vec<S> v = Y.col(j);
        for (int pass = 0; pass < 2; ++pass) {
            if (kept > 0) {
                const Vec<S> c = Q.leftCols(kept).adjoint() * v;
                v.noalias() -= Q.leftCols(kept) * c;
            }
        }
        const Real nv = v.norm();
        if (nv <= cutoff || nv == 0.0)
            continue;
        Q.col(kept++) = v / nv;
    }
    return Q.leftCols(kept);
}

template <Scalar S>
PivotedQRFactors<S> pivoted_qr(const Mat<S>& A, std::optional<Real> tol, std::optional<Index> max_rank)
{
    const Index m = A.rows();
    const Index n = A.cols();
    if (m == 0 || n == 0)
        throw DomainError("pivoted_qr: empty matrix");
    Index kmax = std::min(m, n);
    if (max_rank)
        kmax = std::clamp<Index>(*max_rank, 0, kmax);

    Mat<S> W = A;
    PivotedQRFactors<S> f;
    f.perm.resize(static_cast<std::size_t>(n));
    std::iota(f.perm.begin(), f.perm.end(), Index{0});
    std::vector<Reflector<S>> hs;

    for (Index j = 0; j < kmax; ++j) {
        Index best = j;
        Real best_norm = -1.0;
        Real rem_sq = 0.0;
        for (Index c = j; c < n; ++c) {
            const Real cn = W.col(c).tail(m - j).squaredNorm();
            rem_sq += cn;
            if (cn > best_norm) {
                best_norm = cn;
                best = c;
            }
        }
        if (tol && std::sqrt(rem_sq) <= *tol)
            break;
        if (best != j) {
            W.col(j).swap(W.col(best));
            std::swap(f.perm[static_cast<std::size_t>(j)], f.perm[static_cast<std::size_t>(best)]);
        }
        Reflector<S> h = make_reflector<S>(W.col(j).tail(m - j));
        W(j, j) = h.beta;
        W.col(j).tail(m - j - 1).setZero();
        if (j + 1 < n)
            apply_reflector_left(h, W.bottomRightCorner(m - j, n - j - 1));
        hs.push_back(std::move(h));
    }

    const Index r = static_cast<Index>(hs.size());
    f.rank = r;
    f.Q = Mat<S>::Identity(m, r);
    for (Index j = r - 1; j >= 0; --j)
        apply_reflector_left(hs[static_cast<std::size_t>(j)], f.Q.bottomRows(m - j));

    Mat<S> Rp = W.topRows(r).template triangularView<Eigen::Upper>();
    for (Index j = 0; j < r; ++j) {
        const S ph = unit_phase(Rp(j, j));
        if (ph != S(1)) {
            Rp.row(j) *= conj_of(ph);
            f.Q.col(j) *= ph;
        }
        f.diag_profile.push_back(std::abs(Rp(j, j)));
    }
    f.R.resize(r, n);
    for (Index c = 0; c < n; ++c)
        f.R.col(f.perm[static_cast<std::size_t>(c)]) = Rp.col(c);
    return f;
}

template <Scalar S>
SmallSVD<S> small_svd(const Mat<S>& B)
{
    const Index m = B.rows();
    const Index n = B.cols();
    if (m == 0 || n == 0)
        throw DomainError("small_svd: empty matrix");
    if (!B.allFinite())
        throw NumericalError("small_svd: non-finite input");
    const Index r = std::min(m, n);
    Mat<S> a = B;
    SmallSVD<S> out;
    out.sigma.resize(r);
    out.U.resize(m, r);
    Mat<S> vt(r, n);
    std::vector<Real> superb(static_cast<std::size_t>(std::max<Index>(r, 2)));
    lapack_int info = 0;
    if constexpr (is_complex_v<S>) {
        info = LAPACKE_zgesvd(LAPACK_COL_MAJOR, 'S', 'S', static_cast<lapack_int>(m), static_cast<lapack_int>(n),
                              a.data(), static_cast<lapack_int>(m), out.sigma.data(), out.U.data(),
                              static_cast<lapack_int>(m), vt.data(), static_cast<lapack_int>(r), superb.data());
    } else {
        info = LAPACKE_dgesvd(LAPACK_COL_MAJOR, 'S', 'S', static_cast<lapack_int>(m), static_cast<lapack_int>(n),
                              a.data(), static_cast<lapack_int>(m), out.sigma.data(), out.U.data(),
                              static_cast<lapack_int>(m), vt.data(), static_cast<lapack_int>(r), superb.data());
    }
    if (info > 0)
        throw NumericalError("small_svd: QR iteration did not converge (" + std::to_string(info) +
                             " superdiagonals)");
    if (info < 0)
        throw NumericalError("small_svd: invalid argument " + std::to_string(-info));
    out.V = vt.adjoint();
    normalize_column_signs(out.U, &out.V);
    return out;
}

template <Scalar S>
RealVec singular_values(const Mat<S>& B)
{
    const Index m = B.rows();
    const Index n = B.cols();
    if (m == 0 || n == 0)
        return RealVec();
    if (!B.allFinite())
        throw NumericalError("singular_values: non-finite input");
    const Index r = std::min(m, n);
    Mat<S> a = B;
    RealVec s(r);
    std::vector<Real> superb(static_cast<std::size_t>(std::max<Index>(r, 2)));
    lapack_int info = 0;
    if constexpr (is_complex_v<S>) {
        info = LAPACKE_zgesvd(LAPACK_COL_MAJOR, 'N', 'N', static_cast<lapack_int>(m), static_cast<lapack_int>(n),
                              a.data(), static_cast<lapack_int>(m), s.data(), nullptr, 1, nullptr, 1,
                              superb.data());
    } else {
        info = LAPACKE_dgesvd(LAPACK_COL_MAJOR, 'N', 'N', static_cast<lapack_int>(m), static_cast<lapack_int>(n),
                              a.data(), static_cast<lapack_int>(m), s.data(), nullptr, 1, nullptr, 1,
                              superb.data());
    }
    if (info != 0)
        throw NumericalError("singular_values: gesvd failed with info " + std::to_string(info));
    return s;
}

template <Scalar S>
SmallEig<S> small_eig_hermitian(const Mat<S>& B)
{
    const Index n = B.rows();
    if (n == 0 || B.cols() != n)
        throw DomainError("small_eig_hermitian: matrix must be square and nonempty");
    if (!B.allFinite())
        throw NumericalError("small_eig_hermitian: non-finite input");
    Mat<S> a = (B + B.adjoint()) / Real(2);
    RealVec w(n);
    lapack_int info = 0;
    if constexpr (is_complex_v<S>)
        info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'U', static_cast<lapack_int>(n), a.data(),
                              static_cast<lapack_int>(n), w.data());
    else
        info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'U', static_cast<lapack_int>(n), a.data(),
                              static_cast<lapack_int>(n), w.data());
    if (info > 0)
        throw NumericalError("small_eig_hermitian: eigensolver did not converge");
    if (info < 0)
        throw NumericalError("small_eig_hermitian: invalid argument " + std::to_string(-info));

    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index x, Index y) {
        const Real ax = std::abs(w(x));
        const Real ay = std::abs(w(y));
        if (ax != ay)
            return ax > ay;
        return w(x) > w(y);
    });
    SmallEig<S> out;
    out.V.resize(n, n);
    out.lambda.resize(n);
    for (Index j = 0; j < n; ++j) {
        out.V.col(j) = a.col(order[static_cast<std::size_t>(j)]);
        out.lambda(j) = w(order[static_cast<std::size_t>(j)]);
    }
    normalize_column_signs<S>(out.V);
    return out;
}

template <Scalar S>
Mat<S> cholesky(const Mat<S>& B)
{
    const Index n = B.rows();
    if (n == 0 || B.cols() != n)
        throw DomainError("cholesky: matrix must be square and nonempty");
    const Real t = 1e-12 * B.norm();
    Mat<S> C = Mat<S>::Zero(n, n);
    for (Index j = 0; j < n; ++j) {
        Real d = std::real(B(j, j));
        for (Index i = 0; i < j; ++i)
            d -= std::norm(C(i, j));
        if (d < -t)
            throw NotPsdError("cholesky pivot " + std::to_string(d) + " at index " + std::to_string(j));
        if (d <= t)
            continue; // semidefinite direction: zero row
        const Real cjj = std::sqrt(d);
        C(j, j) = S(cjj);
        for (Index k = j + 1; k < n; ++k) {
            S s = B(j, k);
            for (Index i = 0; i < j; ++i)
                s -= conj_of(C(i, j)) * C(i, k);
            C(j, k) = s / cjj;
        }
    }
    return C;
}

template <Scalar S>
Mat<S> solve_upper_right(const Mat<S>& B, const Mat<S>& C)
{
    const Index k = C.rows();
    if (C.cols() != k || B.cols() != k)
        throw DomainError("solve_upper_right: dimension mismatch");
    Mat<S> X = Mat<S>::Zero(B.rows(), k);
    for (Index j = 0; j < k; ++j) {
        if (C(j, j) == S(0))
            continue;
        Vec<S> v = B.col(j);
        for (Index i = 0; i < j; ++i)
            v -= X.col(i) * C(i, j);
        X.col(j) = v / C(j, j);
    }
    return X;
}

template <Scalar S>
Mat<S> least_squares(const Mat<S>& A, const Mat<S>& B, Real rcond)
{
    if (A.rows() != B.rows())
        throw DomainError("least_squares: row mismatch");
    const Index n = A.cols();
    const PivotedQRFactors<S> f = pivoted_qr<S>(A);
    Index r = 0;
    if (!f.diag_profile.empty()) {
        const Real cut = rcond * f.diag_profile.front();
        while (r < f.rank && f.diag_profile[static_cast<std::size_t>(r)] > cut)
            ++r;
    }
    Mat<S> X = Mat<S>::Zero(n, B.cols());
    if (r == 0)
        return X;
    Mat<S> M(r, n);
    for (Index c = 0; c < n; ++c)
        M.col(c) = f.R.col(f.perm[static_cast<std::size_t>(c)]).head(r);
    // M = L* Z*, so the minimum-norm solution lies in range(Z).
    const QRFactors<S> zl = householder_qr<S>(M.adjoint());
    const Mat<S> rhs = f.Q.leftCols(r).adjoint() * B;
    const Mat<S> w = zl.R.topLeftCorner(r, r).adjoint().template triangularView<Eigen::Lower>().solve(rhs);
    const Mat<S> y = zl.Q.leftCols(r) * w;
    for (Index c = 0; c < n; ++c)
        X.row(f.perm[static_cast<std::size_t>(c)]) = y.row(c);
    return X;
}

template <Scalar S>
Real spectral_norm_estimate(const LinearOperator<S>& op, int iters, std::uint64_t seed)
{
    if (iters < 1)
        throw DomainError("spectral_norm_estimate: iters must be >= 1");
    Mat<S> x = to_field<S>(gaussian_matrix(op.cols(), 1, seed));
    x /= x.norm();
    Real est = 0.0;
    for (int it = 0; it < iters; ++it) {
        const Mat<S> y = op.apply(x);
        est = std::max(est, y.norm());
        const Mat<S> z = op.apply_adjoint(y);
        const Real nz = z.norm();
        if (nz == 0.0)
            break;
        x = z / nz;
    }
    return est;
}

template <Scalar S>
Real spectral_norm(const Mat<S>& A)
{
    if (A.size() == 0)
        return 0.0;
    return singular_values<S>(A)(0);
}

template <Scalar S>
Real adjoint_mismatch(const LinearOperator<S>& op, int samples, std::uint64_t seed)
{
    Real worst = 0.0;
    for (int s = 0; s < samples; ++s) {
        const std::uint64_t k = derive_seed(seed, static_cast<std::uint64_t>(s));
        Mat<S> x = to_field<S>(gaussian_matrix(op.cols(), 1, derive_seed(k, 1)));
        Mat<S> y = to_field<S>(gaussian_matrix(op.rows(), 1, derive_seed(k, 2)));
        if constexpr (is_complex_v<S>) {
            x.imag() = gaussian_matrix(op.cols(), 1, derive_seed(k, 3));
            y.imag() = gaussian_matrix(op.rows(), 1, derive_seed(k, 4));
        }
        const Mat<S> ax = op.apply(x);
        const Mat<S> aty = op.apply_adjoint(y);
        const S lhs = (y.adjoint() * ax)(0, 0);
        const S rhs = (aty.adjoint() * x)(0, 0);
        const Real scale = ax.norm() * y.norm() + x.norm() * aty.norm();
        if (scale > 0.0)
            worst = std::max(worst, std::abs(lhs - rhs) / scale);
    }
    return worst;
}

#define RLA_INSTANTIATE(S)                                                                                    \
    template void normalize_column_signs<S>(Mat<S>&, Mat<S>*);                                                \
    template QRFactors<S> householder_qr<S>(const Mat<S>&, bool);                                             \
    template Mat<S> orthonormalize<S>(const Mat<S>&, Real);                                                   \
    template PivotedQRFactors<S> pivoted_qr<S>(const Mat<S>&, std::optional<Real>, std::optional<Index>);     \
    template SmallSVD<S> small_svd<S>(const Mat<S>&);                                                         \
    template RealVec singular_values<S>(const Mat<S>&);                                                       \
    template SmallEig<S> small_eig_hermitian<S>(const Mat<S>&);                                               \
    template Mat<S> cholesky<S>(const Mat<S>&);                                                               \
    template Mat<S> solve_upper_right<S>(const Mat<S>&, const Mat<S>&);                                       \
    template Mat<S> least_squares<S>(const Mat<S>&, const Mat<S>&, Real);                                     \
    template Real spectral_norm_estimate<S>(const LinearOperator<S>&, int, std::uint64_t);                    \
    template Real spectral_norm<S>(const Mat<S>&);                                                            \
    template Real adjoint_mismatch<S>(const LinearOperator<S>&, int, std::uint64_t);

RLA_INSTANTIATE(Real)
RLA_INSTANTIATE(Complex)

#undef RLA_INSTANTIATE

} // namespace rla
