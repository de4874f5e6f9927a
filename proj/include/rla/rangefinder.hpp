#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "rla/linear_operator.hpp"
#include "rla/sketch.hpp"
#include "rla/types.hpp"

namespace rla {

template <Scalar S>
struct RangeBasis
{
    Mat<S> Q;
    Index samples_used = 0;
    std::int64_t passes = 0;
    std::optional<Real> est_error;
    SketchSpec spec;
    bool saturated = false;
};

/// Default numerical-rank cutoff used when orthonormalizing sample matrices.
inline constexpr Real kOrthTol = 1e-10;

/// Y = A Omega with Omega = gaussian_matrix(n, ell, seed); Q = orthonormalize(Y).
template <Scalar S>
RangeBasis<S> randomized_range_finder(const LinearOperator<S>& A, Index ell, std::uint64_t seed,
                                      Real tol = kOrthTol);

/// alpha sqrt(2/pi) max_i ||(I - QQ*) A w_i|| over r Gaussian probes drawn from seed.
template <Scalar S>
Real posterior_error_estimate(const LinearOperator<S>& A, const Mat<S>& Q, int r, Real alpha,
                              std::uint64_t seed);

/// One row of the adaptive finder's log: basis size and the largest pending probe norm.
struct AdaptiveLogEntry
{
    Index basis_size;
    Real max_probe_norm;
};

/**
 * Adaptive randomized range finder driven one basis vector at a time.
 *
 * Keeps a window of r residual probes. Each step pops the oldest probe,
 * reprojects it against the current basis, appends it, draws a replacement
 * probe and downdates the rest of the window. Raw samples A w are drawn
 * `block` at a time; the probe sequence does not depend on the block size.
 */
template <Scalar S>
class AdaptiveRangeFinder
{
public:
    AdaptiveRangeFinder(const LinearOperator<S>& A, Real eps, int r, std::uint64_t seed, Index block = 8,
                        Real alpha = 10.0);

    Real threshold() const { return threshold_; }
    Real max_probe_norm() const;
    bool converged() const { return max_probe_norm() <= threshold_; }
    bool saturated() const { return j_ >= limit_; }
    Index basis_size() const { return j_; }
    Index probes_consumed() const { return next_probe_; }
    const Mat<S>& basis() const { return Qbuf_; }
    const std::vector<AdaptiveLogEntry>& log() const { return log_; }

    /// One pass of the while loop. Returns false when stopped.
    bool step();
    void run();
    RangeBasis<S> result() const;

private:
    Vec<S> raw_sample(Index t);
    Vec<S> fresh_probe();

    const LinearOperator<S>& A_;
    Real threshold_;
    Real alpha_;
    int r_;
    std::uint64_t seed_;
    Index block_;
    Index limit_;
    Mat<S> Qbuf_;
    Index j_ = 0;
    std::deque<Vec<S>> window_;
    Mat<S> reserve_;
    Index reserve_start_ = 0;
    Index next_probe_ = 0;
    std::vector<AdaptiveLogEntry> log_;
};

template <Scalar S>
RangeBasis<S> adaptive_range_finder(const LinearOperator<S>& A, Real eps, int r, std::uint64_t seed,
                                    Index block = 8);

/// Y = (AA*)^q A Omega by alternating applications, then one orthonormalization.
template <Scalar S>
RangeBasis<S> power_iteration_range(const LinearOperator<S>& A, Index ell, int q, std::uint64_t seed,
                                    Real tol = kOrthTol);

/// Same as power_iteration_range with a QR after every application of A or A*.
template <Scalar S>
RangeBasis<S> subspace_iteration_range(const LinearOperator<S>& A, Index ell, int q, std::uint64_t seed);

/// Structured-sketch finder: Y = A Omega through the row-wise FFT path.
template <Scalar S>
RangeBasis<Complex> fast_range_finder(const Mat<S>& A, Index ell, std::uint64_t seed,
                                      SketchKind kind = SketchKind::srft, Real tol = kOrthTol);

/// Sample matrix of fast_range_finder without orthonormalization.
template <Scalar S>
CplxMat structured_sample(const Mat<S>& A, Index ell, std::uint64_t seed, SketchKind kind);

/// Reference path: explicit dense Omega, same draw as fast_range_finder.
template <Scalar S>
CplxMat structured_sample_dense(const Mat<S>& A, Index ell, std::uint64_t seed, SketchKind kind);

/// Fixed-precision structured sketching: ell = 32, 64, ... (capped at n) until the estimate is <= eps.
template <Scalar S>
RangeBasis<Complex> structured_fixed_precision(const Mat<S>& A, Real eps, int r, std::uint64_t seed,
                                               SketchKind kind = SketchKind::srft);

} // namespace rla
