#pragma once

#include <cstdint>
#include <functional>
#include <utility>

#include <Eigen/SparseCore>

#include "rla/error.hpp"
#include "rla/types.hpp"

namespace rla {

struct OpCounters
{
    std::int64_t matvecs = 0;         ///< columns pushed through apply
    std::int64_t adjoint_matvecs = 0; ///< columns pushed through apply_adjoint
    std::int64_t passes = 0;          ///< block applications (each reads A once)
    std::int64_t scalar_ops = 0;      ///< multiply-adds, where the operator can tell
};

/**
 * Abstract matrix accessed only through products.
 *
 * apply/apply_adjoint take a block of vectors; every call is one pass over
 * the operator's data and is accounted in the counters.
 */
template <Scalar S>
class LinearOperator
{
public:
    virtual ~LinearOperator() = default;

    virtual Index rows() const = 0;
    virtual Index cols() const = 0;

    Mat<S> apply(const Mat<S>& X) const
    {
        if (X.rows() != cols())
            throw DomainError("apply: dimension mismatch");
        ++counters_.passes;
        counters_.matvecs += X.cols();
        return do_apply(X);
    }

    Mat<S> apply_adjoint(const Mat<S>& Y) const
    {
        if (Y.rows() != rows())
            throw DomainError("apply_adjoint: dimension mismatch");
        ++counters_.passes;
        counters_.adjoint_matvecs += Y.cols();
        return do_apply_adjoint(Y);
    }

    const OpCounters& counters() const { return counters_; }
    void reset_counters() const { counters_ = {}; }

    /// Dense copy of the operator (A applied to the identity; not counted).
    Mat<S> to_dense() const { return do_apply(Mat<S>::Identity(cols(), cols())); }

protected:
    virtual Mat<S> do_apply(const Mat<S>& X) const = 0;
    virtual Mat<S> do_apply_adjoint(const Mat<S>& Y) const = 0;

    mutable OpCounters counters_;
};

/// Non-owning view of a dense matrix.
template <Scalar S>
class DenseOperator final : public LinearOperator<S>
{
public:
    explicit DenseOperator(const Mat<S>& A) : A_(&A) {}

    Index rows() const override { return A_->rows(); }
    Index cols() const override { return A_->cols(); }
    const Mat<S>& matrix() const { return *A_; }

protected:
    Mat<S> do_apply(const Mat<S>& X) const override
    {
        this->counters_.scalar_ops += A_->rows() * A_->cols() * X.cols();
        return (*A_) * X;
    }
    Mat<S> do_apply_adjoint(const Mat<S>& Y) const override
    {
        this->counters_.scalar_ops += A_->rows() * A_->cols() * Y.cols();
        return A_->adjoint() * Y;
    }

private:
    const Mat<S>* A_;
};

/// Non-owning view of a sparse matrix.
template <Scalar S>
class SparseOperator final : public LinearOperator<S>
{
public:
    using Sparse = Eigen::SparseMatrix<S>;

    explicit SparseOperator(const Sparse& A) : A_(&A) {}

    Index rows() const override { return A_->rows(); }
    Index cols() const override { return A_->cols(); }

protected:
    Mat<S> do_apply(const Mat<S>& X) const override
    {
        this->counters_.scalar_ops += A_->nonZeros() * X.cols();
        return (*A_) * X;
    }
    Mat<S> do_apply_adjoint(const Mat<S>& Y) const override
    {
        this->counters_.scalar_ops += A_->nonZeros() * Y.cols();
        return A_->adjoint() * Y;
    }

private:
    const Sparse* A_;
};

/// Implicit operator from a pair of callables.
template <Scalar S>
class FunctionOperator final : public LinearOperator<S>
{
public:
    using Fn = std::function<Mat<S>(const Mat<S>&)>;

    FunctionOperator(Index m, Index n, Fn apply, Fn adjoint)
        : m_(m), n_(n), apply_(std::move(apply)), adjoint_(std::move(adjoint)) {}

    Index rows() const override { return m_; }
    Index cols() const override { return n_; }

protected:
    Mat<S> do_apply(const Mat<S>& X) const override { return apply_(X); }
    Mat<S> do_apply_adjoint(const Mat<S>& Y) const override { return adjoint_(Y); }

private:
    Index m_, n_;
    Fn apply_, adjoint_;
};

/// Max over `samples` random pairs of |<Ax,y> - <x,A*y>| / (||Ax|| ||y|| + ||x|| ||A*y||).
template <Scalar S>
Real adjoint_mismatch(const LinearOperator<S>& op, int samples, std::uint64_t seed);

} // namespace rla
