#include <gtest/gtest.h>

#include "reference.hpp"
#include "rla/core.hpp"
#include "rla/error.hpp"
#include "rla/linear_operator.hpp"
#include "rla/random.hpp"

using namespace rla;

namespace {

RealMat mat(std::initializer_list<std::initializer_list<double>> rows)
{
    RealMat A(static_cast<Index>(rows.size()), static_cast<Index>(rows.begin()->size()));
    Index i = 0;
    for (const auto& r : rows) {
        Index j = 0;
        for (double v : r)
            A(i, j++) = v;
        ++i;
    }
    return A;
}

CplxMat complex_gaussian(Index m, Index n, std::uint64_t seed)
{
    CplxMat A(m, n);
    A.real() = gaussian_matrix(m, n, derive_seed(seed, 1));
    A.imag() = gaussian_matrix(m, n, derive_seed(seed, 2));
    return A;
}

} // namespace

// ---------------------------------------------------------------- householder_qr

TEST(HouseholderQr, IdentityGivesIdentity)
{
    const auto f = householder_qr<Real>(RealMat::Identity(3, 3));
    EXPECT_LE((f.Q - RealMat::Identity(3, 3)).norm(), 1e-15);
    EXPECT_LE((f.R - RealMat::Identity(3, 3)).norm(), 1e-15);
}

TEST(HouseholderQr, ThreeFourColumn)
{
    const auto f = householder_qr<Real>(mat({{3}, {4}}));
    EXPECT_NEAR(f.R(0, 0), 5.0, 1e-15);
    EXPECT_NEAR(f.Q(0, 0), 0.6, 1e-15);
    EXPECT_NEAR(f.Q(1, 0), 0.8, 1e-15);
}

TEST(HouseholderQr, SeededRandomReconstruction)
{
    const RealMat A = gaussian_matrix(8, 5, 1);
    const auto f = householder_qr<Real>(A);
    EXPECT_LE((f.Q * f.R - A).norm(), 1e-13 * A.norm());
    EXPECT_LE((f.Q.transpose() * f.Q - RealMat::Identity(5, 5)).norm(), 1e-13);
    for (Index j = 0; j < 5; ++j)
        EXPECT_GE(f.R(j, j), 0.0);
}

TEST(HouseholderQr, FullModeIsSquare)
{
    const RealMat A = gaussian_matrix(7, 3, 2);
    const auto f = householder_qr<Real>(A, false);
    EXPECT_EQ(f.Q.cols(), 7);
    EXPECT_EQ(f.R.rows(), 7);
    EXPECT_LE((f.Q * f.R - A).norm(), 1e-13 * A.norm());
}

TEST(HouseholderQr, PropertyOnRandomShapes)
{
    CounterRng dims(2718);
    for (int t = 0; t < 1000; ++t) {
        const Index m = 1 + static_cast<Index>(dims.next_below(64));
        const Index n = 1 + static_cast<Index>(dims.next_below(64));
        const auto seed = static_cast<std::uint64_t>(t);
        if (t % 2 == 0) {
            const RealMat A = gaussian_matrix(m, n, seed);
            const auto f = householder_qr<Real>(A);
            const Index c = f.Q.cols();
            ASSERT_LE((f.Q.transpose() * f.Q - RealMat::Identity(c, c)).norm(), 1e-12 * static_cast<double>(c));
            ASSERT_LE((f.Q * f.R - A).norm(), 1e-12 * A.norm());
        } else {
            const CplxMat A = complex_gaussian(m, n, seed);
            const auto f = householder_qr<Complex>(A);
            const Index c = f.Q.cols();
            ASSERT_LE((f.Q.adjoint() * f.Q - CplxMat::Identity(c, c)).norm(), 1e-12 * static_cast<double>(c));
            ASSERT_LE((f.Q * f.R - A).norm(), 1e-12 * A.norm());
            for (Index j = 0; j < std::min(m, n); ++j)
                ASSERT_LE(std::abs(f.R(j, j).imag()), 1e-13 * A.norm());
        }
    }
}

// ---------------------------------------------------------------- orthonormalize

TEST(Orthonormalize, CollinearColumnsCollapse)
{
    const RealMat Q = orthonormalize<Real>(mat({{1, 2}, {0, 0}}), 1e-10);
    ASSERT_EQ(Q.cols(), 1);
    EXPECT_NEAR(std::abs(Q(0, 0)), 1.0, 1e-15);
    EXPECT_NEAR(Q(1, 0), 0.0, 1e-15);
}

TEST(Orthonormalize, IdentityUpToSign)
{
    const RealMat Q = orthonormalize<Real>(RealMat::Identity(4, 4), 1e-10);
    ASSERT_EQ(Q.cols(), 4);
    EXPECT_LE((Q.cwiseAbs() - RealMat::Identity(4, 4)).norm(), 1e-15);
}

TEST(Orthonormalize, DropsANearlyDependentColumn)
{
    RealMat Y = gaussian_matrix(100, 10, 3);
    Y.col(1) = 1e-14 * Y.col(0);
    const RealMat Q = orthonormalize<Real>(Y, 1e-10);
    // rank oracle: count singular values above 1e-10 * ||Y||_F
    const ref::RVec s = ref::singular_values(ref::RMat(Y));
    const auto expected = (s.array() > 1e-10 * Y.norm()).count();
    EXPECT_EQ(expected, 9);
    EXPECT_EQ(Q.cols(), expected);
    EXPECT_LE((Q.transpose() * Q - RealMat::Identity(9, 9)).norm(), 1e-13);
}

TEST(Orthonormalize, ZeroInputGivesEmptyBasis)
{
    EXPECT_EQ(orthonormalize<Real>(RealMat::Zero(5, 3), 1e-10).cols(), 0);
}

TEST(Orthonormalize, RangeIsContainedInTheInputRange)
{
    const RealMat Y = gaussian_matrix(30, 4, 8) * gaussian_matrix(4, 7, 9);
    const RealMat Q = orthonormalize<Real>(Y, 1e-10);
    EXPECT_EQ(Q.cols(), 4);
    EXPECT_LE((Y - Q * (Q.transpose() * Y)).norm(), 1e-12 * Y.norm());
}

// ---------------------------------------------------------------- pivoted_qr

TEST(PivotedQr, PicksTheLargerColumnFirst)
{
    const auto f = pivoted_qr<Real>(mat({{1, 3}, {0, 4}}));
    ASSERT_EQ(f.perm.size(), 2u);
    EXPECT_EQ(f.perm[0], 1);
    EXPECT_EQ(f.perm[1], 0);
    EXPECT_NEAR(f.diag_profile[0], 5.0, 1e-15);
}

TEST(PivotedQr, TiesGoToTheLowestIndex)
{
    const auto f = pivoted_qr<Real>(RealMat::Identity(2, 2));
    EXPECT_EQ(f.perm[0], 0);
    EXPECT_EQ(f.perm[1], 1);
    EXPECT_LE((f.R - RealMat::Identity(2, 2)).norm(), 1e-15);
}

TEST(PivotedQr, RankOneTrailingPivotVanishes)
{
    const auto f = pivoted_qr<Real>(mat({{1, 2}, {2, 4}}), 0.0);
    ASSERT_GE(f.diag_profile.size(), 1u);
    if (f.diag_profile.size() > 1)
        EXPECT_LE(f.diag_profile[1], 1e-14 * f.diag_profile[0]);
}

TEST(PivotedQr, ToleranceHaltsEarly)
{
    const RealMat A = gaussian_matrix(20, 3, 4) * gaussian_matrix(3, 15, 5);
    const auto f = pivoted_qr<Real>(A, 1e-10 * A.norm());
    EXPECT_EQ(f.rank, 3);
    EXPECT_LE((f.Q * f.R - A).norm(), 1e-10 * A.norm());
}

TEST(PivotedQr, PropertyOnRandomShapes)
{
    CounterRng dims(31415);
    for (int t = 0; t < 1000; ++t) {
        const Index m = 1 + static_cast<Index>(dims.next_below(64));
        const Index n = 1 + static_cast<Index>(dims.next_below(64));
        const RealMat A = gaussian_matrix(m, n, static_cast<std::uint64_t>(t) + 5000);
        const auto f = pivoted_qr<Real>(A);
        const Index c = f.Q.cols();
        ASSERT_LE((f.Q.transpose() * f.Q - RealMat::Identity(c, c)).norm(), 1e-12 * static_cast<double>(c));
        ASSERT_LE((f.Q * f.R - A).norm(), 1e-12 * A.norm());
        for (std::size_t j = 1; j < f.diag_profile.size(); ++j)
            ASSERT_LE(f.diag_profile[j], f.diag_profile[j - 1] * (1.0 + 1e-14));
        // R(:, perm) upper triangular
        for (Index c2 = 0; c2 < static_cast<Index>(f.perm.size()); ++c2)
            for (Index r = c2 + 1; r < f.R.rows(); ++r)
                ASSERT_EQ(f.R(r, f.perm[static_cast<std::size_t>(c2)]), 0.0);
    }
}

TEST(PivotedQr, ComplexReconstruction)
{
    const CplxMat A = complex_gaussian(12, 9, 77);
    const auto f = pivoted_qr<Complex>(A);
    EXPECT_LE((f.Q * f.R - A).norm(), 1e-13 * A.norm());
    for (std::size_t j = 1; j < f.diag_profile.size(); ++j)
        EXPECT_LE(f.diag_profile[j], f.diag_profile[j - 1] * (1.0 + 1e-14));
}

// ---------------------------------------------------------------- small_svd

TEST(SmallSvd, Diagonal)
{
    const auto f = small_svd<Real>(mat({{3, 0}, {0, 1}}));
    EXPECT_NEAR(f.sigma(0), 3.0, 1e-15);
    EXPECT_NEAR(f.sigma(1), 1.0, 1e-15);
}

TEST(SmallSvd, Swap)
{
    const auto f = small_svd<Real>(mat({{0, 1}, {1, 0}}));
    EXPECT_NEAR(f.sigma(0), 1.0, 1e-15);
    EXPECT_NEAR(f.sigma(1), 1.0, 1e-15);
}

TEST(SmallSvd, GoldenRatioShear)
{
    const auto f = small_svd<Real>(mat({{1, 1}, {0, 1}}));
    // eigenvalues of A*A are (3 +- sqrt 5)/2
    EXPECT_NEAR(f.sigma(0), std::sqrt((3.0 + std::sqrt(5.0)) / 2.0), 1e-9);
    EXPECT_NEAR(f.sigma(1), std::sqrt((3.0 - std::sqrt(5.0)) / 2.0), 1e-9);
    EXPECT_NEAR(f.sigma(0), 1.6180339887, 1e-9);
    EXPECT_NEAR(f.sigma(1), 0.6180339887, 1e-9);
}

TEST(SmallSvd, MatchesJacobiEigenvaluesOfTheGram)
{
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const RealMat A = gaussian_matrix(10, 7, seed);
        const RealVec s = singular_values<Real>(A);
        const ref::Eigh e = ref::jacobi_eigh(A.transpose() * A);
        for (Index i = 0; i < 7; ++i)
            ASSERT_NEAR(s(i), std::sqrt(e.values(i)), 1e-9 * s(i));
    }
}

TEST(SmallSvd, ReconstructionAndSigns)
{
    const CplxMat B = complex_gaussian(9, 6, 3);
    const auto f = small_svd<Complex>(B);
    const CplxMat R = f.U * f.sigma.cast<Complex>().asDiagonal() * f.V.adjoint();
    EXPECT_LE(ref::spectral_norm(ref::CMat(R - B)), 1e-12 * 9 * f.sigma(0));
    for (Index j = 0; j < f.U.cols(); ++j) {
        Index i = 0;
        while (std::abs(f.U(i, j)) <= 1e-10 * f.U.col(j).norm())
            ++i;
        EXPECT_GT(f.U(i, j).real(), 0.0);
        EXPECT_NEAR(f.U(i, j).imag(), 0.0, 1e-14);
    }
    for (Index j = 1; j < f.sigma.size(); ++j)
        EXPECT_GE(f.sigma(j - 1), f.sigma(j));
}

TEST(SmallSvd, NonFiniteInputIsAnError)
{
    RealMat B = RealMat::Ones(3, 3);
    B(1, 1) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(small_svd<Real>(B), NumericalError);
}

// ---------------------------------------------------------------- small_eig_hermitian

TEST(SmallEig, MagnitudeOrder)
{
    const auto f = small_eig_hermitian<Real>(mat({{2, 0}, {0, -5}}));
    EXPECT_NEAR(f.lambda(0), -5.0, 1e-15);
    EXPECT_NEAR(f.lambda(1), 2.0, 1e-15);
    EXPECT_LE((f.V.cwiseAbs() - mat({{0, 1}, {1, 0}})).norm(), 1e-15);
}

TEST(SmallEig, EqualMagnitudesDescendingValue)
{
    const auto f = small_eig_hermitian<Real>(mat({{0, 1}, {1, 0}}));
    EXPECT_NEAR(f.lambda(0), 1.0, 1e-15);
    EXPECT_NEAR(f.lambda(1), -1.0, 1e-15);
}

TEST(SmallEig, RecoversAConstructedSpectrum)
{
    const RealMat Q = ortho_matrix(6, 6, 21);
    RealVec d(6);
    d << 6, 5, 4, 3, 2, 1;
    const RealMat B = Q * d.asDiagonal() * Q.transpose();
    const auto f = small_eig_hermitian<Real>(B);
    for (Index i = 0; i < 6; ++i)
        EXPECT_NEAR(f.lambda(i), d(i), 1e-10);
    EXPECT_LE((f.V.transpose() * f.V - RealMat::Identity(6, 6)).norm(), 1e-13);
}

TEST(SmallEig, ComplexHermitianAgreesWithJacobiOnTheEmbedding)
{
    const CplxMat G = complex_gaussian(5, 5, 4);
    const CplxMat H = G + G.adjoint();
    const auto f = small_eig_hermitian<Complex>(H);
    ref::RMat E(10, 10);
    E << H.real(), -H.imag(), H.imag(), H.real();
    const ref::Eigh e = ref::jacobi_eigh(E);
    std::vector<double> mine(f.lambda.data(), f.lambda.data() + 5);
    std::sort(mine.begin(), mine.end(), std::greater<>());
    for (int i = 0; i < 5; ++i)
        EXPECT_NEAR(mine[static_cast<std::size_t>(i)], e.values(2 * i), 1e-10);
}

// ---------------------------------------------------------------- cholesky

TEST(Cholesky, HandElimination)
{
    const RealMat C = cholesky<Real>(mat({{4, 2}, {2, 2}}));
    EXPECT_LE((C - mat({{2, 1}, {0, 1}})).norm(), 1e-15);
}

TEST(Cholesky, Identity)
{
    EXPECT_LE((cholesky<Real>(RealMat::Identity(5, 5)) - RealMat::Identity(5, 5)).norm(), 1e-15);
}

TEST(Cholesky, IndefiniteIsNotPsd)
{
    try {
        (void)cholesky<Real>(mat({{1, 2}, {2, 1}}));
        FAIL() << "expected NotPsdError";
    } catch (const NotPsdError& e) {
        EXPECT_NE(std::string(e.what()).find("not PSD"), std::string::npos);
    }
}

TEST(Cholesky, SemidefiniteIsClamped)
{
    const RealMat G = gaussian_matrix(6, 3, 8);
    const RealMat B = G * G.transpose();
    const RealMat C = cholesky<Real>(B);
    EXPECT_LE((C.transpose() * C - B).norm(), 1e-12 * B.norm() * 10);
}

TEST(Cholesky, ComplexReconstruction)
{
    const CplxMat G = complex_gaussian(6, 6, 12);
    const CplxMat B = G.adjoint() * G;
    const CplxMat C = cholesky<Complex>(B);
    EXPECT_LE(ref::spectral_norm(ref::CMat(C.adjoint() * C - B)), 1e-12 * ref::spectral_norm(ref::CMat(B)));
    for (Index i = 0; i < 6; ++i)
        for (Index j = 0; j < i; ++j)
            EXPECT_EQ(C(i, j), Complex(0.0));
}

// ---------------------------------------------------------------- least_squares

TEST(LeastSquares, IdentitySystem)
{
    const RealMat B = gaussian_matrix(4, 3, 1);
    EXPECT_LE((least_squares<Real>(RealMat::Identity(4, 4), B) - B).norm(), 1e-14);
}

TEST(LeastSquares, MeanOfObservations)
{
    const RealMat X = least_squares<Real>(mat({{1}, {1}}), mat({{0}, {2}}));
    EXPECT_NEAR(X(0, 0), 1.0, 1e-15);
}

TEST(LeastSquares, ConsistentSystem)
{
    const RealMat A = gaussian_matrix(20, 5, 2);
    const RealMat X0 = gaussian_matrix(5, 3, 3);
    EXPECT_LE((least_squares<Real>(A, RealMat(A * X0)) - X0).norm(), 1e-11);
}

TEST(LeastSquares, NormalEquationStationarity)
{
    for (std::uint64_t s = 0; s < 100; ++s) {
        const RealMat A = gaussian_matrix(15, 6, s);
        const RealMat B = gaussian_matrix(15, 2, s + 1000);
        const RealMat X = least_squares<Real>(A, B);
        ASSERT_LE((A.transpose() * (A * X - B)).norm(), 1e-10 * A.norm() * B.norm());
    }
}

TEST(LeastSquares, MinimumNormOnRankDeficiency)
{
    // wide system: the minimum-norm solution lies in the row space of A
    const RealMat A = gaussian_matrix(3, 8, 4);
    const RealMat B = gaussian_matrix(3, 1, 5);
    const RealMat X = least_squares<Real>(A, B);
    EXPECT_LE((A * X - B).norm(), 1e-12);
    const RealMat P = A.transpose() * (A * A.transpose()).inverse() * A;
    EXPECT_LE((P * X - X).norm(), 1e-12);
}

// ---------------------------------------------------------------- operators and norms

TEST(SpectralNormEstimate, DominantValue)
{
    RealMat A = RealMat::Zero(3, 3);
    A(0, 0) = 5;
    A(1, 1) = 1;
    const DenseOperator<Real> op(A);
    EXPECT_NEAR(spectral_norm_estimate<Real>(op, 50, 1), 5.0, 1e-8);
}

TEST(SpectralNormEstimate, ZeroOperator)
{
    const RealMat A = RealMat::Zero(3, 3);
    const DenseOperator<Real> op(A);
    EXPECT_EQ(spectral_norm_estimate<Real>(op, 10, 1), 0.0);
}

TEST(SpectralNormEstimate, LowerBoundOnCloseValues)
{
    const RealMat U = ortho_matrix(8, 2, 1);
    const RealMat V = ortho_matrix(8, 2, 2);
    RealVec s(2);
    s << 1.0, 0.999;
    const RealMat A = U * s.asDiagonal() * V.transpose();
    const DenseOperator<Real> op(A);
    const double v = spectral_norm_estimate<Real>(op, 6, 3);
    EXPECT_GE(v, 0.999);
    EXPECT_LE(v, 1.0 + 1e-15);
}

TEST(SpectralNormEstimate, MonotoneInIterations)
{
    const RealMat A = gaussian_matrix(20, 15, 9);
    const DenseOperator<Real> op(A);
    double prev = 0.0;
    for (int it = 1; it <= 20; ++it) {
        const double v = spectral_norm_estimate<Real>(op, it, 4);
        EXPECT_GE(v, prev);
        prev = v;
    }
}

TEST(LinearOperator, AdjointConsistencyOfEveryWrapper)
{
    const RealMat A = gaussian_matrix(9, 6, 1);
    const DenseOperator<Real> dense(A);
    EXPECT_LE(adjoint_mismatch<Real>(dense, 20, 2), 1e-10);

    const CplxMat Ac = complex_gaussian(7, 5, 3);
    const DenseOperator<Complex> dense_c(Ac);
    EXPECT_LE(adjoint_mismatch<Complex>(dense_c, 20, 2), 1e-10);

    Eigen::SparseMatrix<Real> S(9, 6);
    S.insert(0, 0) = 1.5;
    S.insert(3, 2) = -2.0;
    S.insert(8, 5) = 0.5;
    S.makeCompressed();
    const SparseOperator<Real> sparse(S);
    EXPECT_LE(adjoint_mismatch<Real>(sparse, 20, 2), 1e-10);

    const FunctionOperator<Real> fn(
        9, 6, [&](const RealMat& X) { return RealMat(A * X); },
        [&](const RealMat& Y) { return RealMat(A.transpose() * Y); });
    EXPECT_LE(adjoint_mismatch<Real>(fn, 20, 2), 1e-10);
}

TEST(LinearOperator, CountsPassesAndColumns)
{
    const RealMat A = gaussian_matrix(9, 6, 1);
    const DenseOperator<Real> op(A);
    (void)op.apply(RealMat::Ones(6, 3));
    (void)op.apply_adjoint(RealMat::Ones(9, 2));
    EXPECT_EQ(op.counters().passes, 2);
    EXPECT_EQ(op.counters().matvecs, 3);
    EXPECT_EQ(op.counters().adjoint_matvecs, 2);
    EXPECT_EQ(op.counters().scalar_ops, 9 * 6 * 5);
    EXPECT_THROW(op.apply(RealMat::Ones(5, 1)), DomainError);
}

TEST(SpectralNorm, AgreesWithTheJacobiReference)
{
    const RealMat A = gaussian_matrix(13, 11, 6);
    EXPECT_NEAR(spectral_norm<Real>(A), ref::spectral_norm(ref::RMat(A)), 1e-12 * spectral_norm<Real>(A));
}
