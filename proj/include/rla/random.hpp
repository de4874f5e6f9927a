#pragma once

#include <cstdint>
#include <vector>

#include "rla/types.hpp"

namespace rla {

/// Mixes (seed, tag) into a new seed; used to key independent streams.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag);

/// Counter-based generator: draw i of stream (seed) is a pure function of (seed, i).
///
/// The sequential interface simply walks the counter, so a stream can be
/// replayed from any offset without state.
class CounterRng
{
public:
    explicit CounterRng(std::uint64_t seed, std::uint64_t counter = 0)
        : key_(seed), counter_(counter) {}

    std::uint64_t bits_at(std::uint64_t i) const;
    /// Uniform on the open interval (0, 1).
    double uniform_at(std::uint64_t i) const;
    /// Standard normal from draws 2i and 2i+1 (Box-Muller, cosine branch).
    double normal_at(std::uint64_t i) const;

    std::uint64_t next_bits() { return bits_at(counter_++); }
    double next_uniform() { return uniform_at(counter_++); }
    double next_normal();
    /// Uniform integer in [0, bound).
    std::uint64_t next_below(std::uint64_t bound);

    std::uint64_t counter() const { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_;
};

/// n x ell matrix of i.i.d. N(0,1); entry (i,j) is normal number j*n+i of the seed's stream.
RealMat gaussian_matrix(Index n, Index ell, std::uint64_t seed);

/// Haar-distributed n x ell matrix with orthonormal columns (QR of a Gaussian, r_jj > 0).
RealMat ortho_matrix(Index n, Index ell, std::uint64_t seed);

/// Haar-distributed complex orthonormal columns.
CplxMat ortho_matrix_complex(Index n, Index ell, std::uint64_t seed);

/// Uniform random permutation of 0..n-1 (Fisher-Yates).
std::vector<Index> random_permutation(Index n, CounterRng& rng);

/// First ell entries of a Fisher-Yates shuffle: ell distinct indices in [0, n).
std::vector<Index> sample_without_replacement(Index n, Index ell, CounterRng& rng);

} // namespace rla
