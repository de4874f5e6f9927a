#include "rla/random.hpp"

#include <cmath>
#include <numbers>

#include "rla/core.hpp"
#include "rla/error.hpp"

namespace rla {

namespace {

std::uint64_t splitmix(std::uint64_t z)
{
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

} // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag)
{
    return splitmix(splitmix(seed) ^ (tag * 0xD1B54A32D192ED03ULL + 0x2545F4914F6CDD1DULL));
}

std::uint64_t CounterRng::bits_at(std::uint64_t i) const
{
    // Two rounds so that neighbouring keys and counters decorrelate.
    return splitmix(splitmix(key_ ^ 0x6A09E667F3BCC909ULL) + splitmix(i));
}

double CounterRng::uniform_at(std::uint64_t i) const
{
    // 53 random bits, shifted off zero.
    return (static_cast<double>(bits_at(i) >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal_at(std::uint64_t i) const
{
    const double u1 = uniform_at(2 * i);
    const double u2 = uniform_at(2 * i + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double CounterRng::next_normal()
{
    const double u1 = uniform_at(counter_++);
    const double u2 = uniform_at(counter_++);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t CounterRng::next_below(std::uint64_t bound)
{
    if (bound == 0)
        throw DomainError("next_below: empty range");
    // Rejection sampling removes modulo bias.
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    for (;;) {
        const std::uint64_t x = next_bits();
        if (x < limit)
            return x % bound;
    }
}

RealMat gaussian_matrix(Index n, Index ell, std::uint64_t seed)
{
    if (n < 1 || ell < 1)
        throw DomainError("gaussian_matrix: dimensions must be positive");
    CounterRng rng(seed);
    RealMat G(n, ell);
    Real* p = G.data();
    const auto total = static_cast<std::uint64_t>(n * ell);
    for (std::uint64_t i = 0; i < total; ++i)
        p[i] = rng.normal_at(i);
    return G;
}

RealMat ortho_matrix(Index n, Index ell, std::uint64_t seed)
{
    if (ell > n)
        throw DomainError("ortho_matrix: ell exceeds n");
    return householder_qr<Real>(gaussian_matrix(n, ell, seed)).Q;
}

CplxMat ortho_matrix_complex(Index n, Index ell, std::uint64_t seed)
{
    if (ell > n)
        throw DomainError("ortho_matrix_complex: ell exceeds n");
    CplxMat G(n, ell);
    G.real() = gaussian_matrix(n, ell, derive_seed(seed, 1));
    G.imag() = gaussian_matrix(n, ell, derive_seed(seed, 2));
    return householder_qr<Complex>(G).Q;
}

std::vector<Index> random_permutation(Index n, CounterRng& rng)
{
    return sample_without_replacement(n, n, rng);
}

std::vector<Index> sample_without_replacement(Index n, Index ell, CounterRng& rng)
{
    if (ell < 0 || ell > n)
        throw DomainError("sample count exceeds dimension");
    std::vector<Index> idx(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i)
        idx[static_cast<std::size_t>(i)] = i;
    for (Index i = 0; i < ell; ++i) {
        const auto j = i + static_cast<Index>(rng.next_below(static_cast<std::uint64_t>(n - i)));
        std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    }
    idx.resize(static_cast<std::size_t>(ell));
    return idx;
}

} // namespace rla
