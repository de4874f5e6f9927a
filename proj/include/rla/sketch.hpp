#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "rla/fft.hpp"
#include "rla/types.hpp"

namespace rla {

enum class SketchKind { gaussian, ortho, srft, gsrft };

std::string to_string(SketchKind kind);
SketchKind parse_sketch_kind(std::string_view name);

struct SketchSpec
{
    SketchKind kind = SketchKind::gaussian;
    Index ell = 0;
    int power_q = 0;
    std::uint64_t seed = 0;
};

/**
 * Subsampled random Fourier transform Omega = sqrt(n/ell) D F R.
 *
 * D has i.i.d. uniform unit-modulus entries, F is the unitary DFT and R keeps
 * ell coordinates drawn without replacement.
 */
class SrftOperator
{
public:
    SrftOperator(Index n, Index ell, std::uint64_t seed);

    Index n() const { return n_; }
    Index ell() const { return ell_; }
    Real scale() const { return scale_; }
    const CplxVec& d() const { return d_; }
    const std::vector<Index>& picks() const { return picks_; }

    /// Y = A Omega, one FFT per row of A.
    template <Scalar S>
    CplxMat apply_rows(const Mat<S>& A) const;

    /// Explicit n x ell test matrix.
    CplxMat dense() const;

    std::uint64_t op_count() const { return ops_ + plan_.op_count(); }
    void reset_ops() const
    {
        ops_ = 0;
        plan_.reset_ops();
    }

private:
    Index n_, ell_;
    Real scale_;
    CplxVec d_;
    std::vector<Index> picks_;
    FftPlan plan_;
    mutable std::uint64_t ops_ = 0;
};

/// One chain Theta = Pi G(1,2;t_1) ... G(n-1,n;t_{n-1}).
struct GivensChain
{
    std::vector<Index> perm; ///< Pi(r, perm[r]) = 1
    RealVec theta;           ///< n-1 angles
};

/**
 * Givens-chain SRFT, Omega = sqrt(n/ell) D'' Theta' D' Theta D F R.
 */
class GsrftOperator
{
public:
    GsrftOperator(Index n, Index ell, std::uint64_t seed);

    /// Test hook: all angles zero and both permutations the identity.
    static GsrftOperator degenerate(Index n, Index ell, std::uint64_t seed);

    Index n() const { return n_; }
    Index ell() const { return ell_; }
    Real scale() const { return scale_; }
    const CplxVec& d() const { return d_; }
    const CplxVec& d1() const { return d1_; }
    const CplxVec& d2() const { return d2_; }
    const GivensChain& theta() const { return theta_; }
    const GivensChain& theta1() const { return theta1_; }
    const std::vector<Index>& picks() const { return picks_; }

    template <Scalar S>
    CplxMat apply_rows(const Mat<S>& A) const;

    CplxMat dense() const;

    std::uint64_t op_count() const { return ops_ + plan_.op_count(); }
    void reset_ops() const
    {
        ops_ = 0;
        plan_.reset_ops();
    }

private:
    void transform_row(Complex* x, Complex* tmp) const;

    Index n_, ell_;
    Real scale_;
    CplxVec d_, d1_, d2_;
    GivensChain theta_, theta1_;
    std::vector<Index> picks_;
    FftPlan plan_;
    mutable std::uint64_t ops_ = 0;
};

/// Applies x <- x Theta to a row vector in O(n).
void apply_givens_chain(const GivensChain& chain, Complex* x, Complex* tmp);

/// Explicit Theta for the dense oracle path.
RealMat givens_chain_matrix(const GivensChain& chain);

/// Random n x ell Gaussian or Haar test matrix, in the field S.
template <Scalar S>
Mat<S> dense_test_matrix(SketchKind kind, Index n, Index ell, std::uint64_t seed);

} // namespace rla
