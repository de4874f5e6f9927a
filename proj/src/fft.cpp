#include "rla/fft.hpp"

#include <cmath>
#include <numbers>

#include "rla/error.hpp"

namespace rla {

namespace {

constexpr std::uint64_t kMulFlops = 6;
constexpr std::uint64_t kAddFlops = 2;

bool is_pow2(Index n) { return n > 0 && (n & (n - 1)) == 0; }

Index next_pow2(Index n)
{
    Index p = 1;
    while (p < n)
        p <<= 1;
    return p;
}

std::vector<Complex> make_twiddles(Index len)
{
    std::vector<Complex> tw(static_cast<std::size_t>(len / 2));
    for (Index k = 0; k < len / 2; ++k) {
        const double a = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(len);
        tw[static_cast<std::size_t>(k)] = Complex(std::cos(a), std::sin(a));
    }
    return tw;
}

} // namespace

FftPlan::FftPlan(Index n) : n_(n), pow2_(is_pow2(n))
{
    if (n < 1)
        throw DomainError("FftPlan: length must be positive");
    if (pow2_) {
        len_ = n;
        twiddle_ = make_twiddles(len_);
        return;
    }
    len_ = next_pow2(2 * n - 1);
    twiddle_ = make_twiddles(len_);
    chirp_.resize(static_cast<std::size_t>(n));
    const auto two_n = static_cast<std::uint64_t>(2 * n);
    for (Index j = 0; j < n; ++j) {
        // j^2 mod 2n keeps the phase argument small.
        const std::uint64_t jj = (static_cast<std::uint64_t>(j) * static_cast<std::uint64_t>(j)) % two_n;
        const double a = -std::numbers::pi * static_cast<double>(jj) / static_cast<double>(n);
        chirp_[static_cast<std::size_t>(j)] = Complex(std::cos(a), std::sin(a));
    }
    chirp_hat_.assign(static_cast<std::size_t>(len_), Complex(0.0));
    chirp_hat_[0] = std::conj(chirp_[0]);
    for (Index j = 1; j < n; ++j) {
        chirp_hat_[static_cast<std::size_t>(j)] = std::conj(chirp_[static_cast<std::size_t>(j)]);
        chirp_hat_[static_cast<std::size_t>(len_ - j)] = std::conj(chirp_[static_cast<std::size_t>(j)]);
    }
    radix2(chirp_hat_.data(), len_, twiddle_, false);
    ops_ = 0;
    work_.resize(static_cast<std::size_t>(len_));
}

void FftPlan::radix2(Complex* x, Index len, const std::vector<Complex>& tw, bool inverse) const
{
    // bit reversal
    for (Index i = 1, j = 0; i < len; ++i) {
        Index bit = len >> 1;
        for (; j & bit; bit >>= 1)
            j ^= bit;
        j ^= bit;
        if (i < j)
            std::swap(x[i], x[j]);
    }
    std::uint64_t butterflies = 0;
    for (Index half = 1; half < len; half <<= 1) {
        const Index stride = len / (2 * half);
        for (Index start = 0; start < len; start += 2 * half) {
            for (Index k = 0; k < half; ++k) {
                Complex w = tw[static_cast<std::size_t>(k * stride)];
                if (inverse)
                    w = std::conj(w);
                const Complex t = w * x[start + k + half];
                x[start + k + half] = x[start + k] - t;
                x[start + k] += t;
                ++butterflies;
            }
        }
    }
    ops_ += butterflies * (kMulFlops + 2 * kAddFlops);
}

void FftPlan::transform(Complex* x) const
{
    const double unit = 1.0 / std::sqrt(static_cast<double>(n_));
    if (pow2_) {
        radix2(x, n_, twiddle_, false);
        for (Index i = 0; i < n_; ++i)
            x[i] *= unit;
        ops_ += static_cast<std::uint64_t>(n_) * kAddFlops;
        return;
    }
    // Bluestein: X_k = w_k sum_j (x_j w_j) conj(w_{k-j}), w_j = exp(-i pi j^2 / n).
    std::fill(work_.begin(), work_.end(), Complex(0.0));
    for (Index j = 0; j < n_; ++j)
        work_[static_cast<std::size_t>(j)] = x[j] * chirp_[static_cast<std::size_t>(j)];
    radix2(work_.data(), len_, twiddle_, false);
    for (Index j = 0; j < len_; ++j)
        work_[static_cast<std::size_t>(j)] *= chirp_hat_[static_cast<std::size_t>(j)];
    radix2(work_.data(), len_, twiddle_, true);
    const double inv_len = 1.0 / static_cast<double>(len_);
    for (Index k = 0; k < n_; ++k)
        x[k] = work_[static_cast<std::size_t>(k)] * chirp_[static_cast<std::size_t>(k)] * (inv_len * unit);
    ops_ += static_cast<std::uint64_t>(n_) * (2 * kMulFlops + kAddFlops) +
            static_cast<std::uint64_t>(len_) * kMulFlops;
}

CplxVec dft(const CplxVec& v)
{
    FftPlan plan(v.size());
    CplxVec out = v;
    plan.transform(out.data());
    return out;
}

CplxMat dft_matrix(Index n)
{
    CplxMat F(n, n);
    const double unit = 1.0 / std::sqrt(static_cast<double>(n));
    for (Index p = 0; p < n; ++p)
        for (Index q = 0; q < n; ++q) {
            const auto pq = (static_cast<std::uint64_t>(p) * static_cast<std::uint64_t>(q)) %
                            static_cast<std::uint64_t>(n);
            const double a = -2.0 * std::numbers::pi * static_cast<double>(pq) / static_cast<double>(n);
            F(p, q) = Complex(std::cos(a), std::sin(a)) * unit;
        }
    return F;
}

} // namespace rla
