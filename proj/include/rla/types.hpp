#pragma once

#include <complex>
#include <concepts>
#include <cstdint>

#include <Eigen/Dense>

namespace rla {

using Real    = double;
using Complex = std::complex<double>;
using Index   = Eigen::Index;

/// The two scalar fields every kernel is instantiated for.
template <typename S>
concept Scalar = std::same_as<S, Real> || std::same_as<S, Complex>;

template <typename S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

template <typename S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

using RealMat = Mat<Real>;
using RealVec = Vec<Real>;
using CplxMat = Mat<Complex>;
using CplxVec = Vec<Complex>;

template <typename S>
inline constexpr bool is_complex_v = std::same_as<S, Complex>;

enum class Norm { spectral, frobenius };

/// Casts a real or complex matrix into the field S (real targets drop the imaginary part).
template <Scalar S, typename Derived>
Mat<S> to_field(const Eigen::MatrixBase<Derived>& x)
{
    using In = typename Derived::Scalar;
    if constexpr (std::same_as<In, S>)
        return x;
    else if constexpr (is_complex_v<S>)
        return x.template cast<Complex>();
    else
        return x.real();
}

} // namespace rla
