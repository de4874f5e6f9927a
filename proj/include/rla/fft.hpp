#pragma once

#include <cstdint>
#include <vector>

#include "rla/types.hpp"

namespace rla {

/**
 * Unitary forward DFT of a fixed length n:
 *   y_q = n^{-1/2} sum_p x_p exp(-2 pi i p q / n).
 *
 * Powers of two use an iterative radix-2 transform; other lengths go through
 * Bluestein's chirp-z identity on a padded power-of-two grid. Real flops are
 * tallied in an instrumented counter.
 */
class FftPlan
{
public:
    explicit FftPlan(Index n);

    Index size() const { return n_; }

    /// In place on n contiguous values.
    void transform(Complex* x) const;

    std::uint64_t op_count() const { return ops_; }
    void reset_ops() const { ops_ = 0; }

private:
    void radix2(Complex* x, Index len, const std::vector<Complex>& tw, bool inverse) const;

    Index n_;
    bool pow2_;
    Index len_; // radix-2 length actually used (n, or the Bluestein padding)
    std::vector<Complex> twiddle_;
    std::vector<Complex> chirp_;     // exp(-i pi j^2 / n), j < n
    std::vector<Complex> chirp_hat_; // FFT of the conjugate chirp kernel
    mutable std::vector<Complex> work_;
    mutable std::uint64_t ops_ = 0;
};

/// Unitary DFT of an arbitrary-length vector.
CplxVec dft(const CplxVec& v);

/// Explicit n x n unitary DFT matrix, entries n^{-1/2} exp(-2 pi i p q / n).
CplxMat dft_matrix(Index n);

} // namespace rla
