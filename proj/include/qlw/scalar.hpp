#ifndef QLW_SCALAR_HPP
#define QLW_SCALAR_HPP

#include <cmath>
#include <limits>
#include <numbers>

#include <boost/multiprecision/cpp_bin_float.hpp>

namespace qlw
{
    /// IEEE binary128 emulated in software. The covector algebra near θ = 0
    /// cancels terms of order s^-5 down to s^-3, which exhausts double precision
    /// well before s = 1e-4.
    using Extended = boost::multiprecision::cpp_bin_float_quad;

    template <typename T>
    inline T pi_v()
    {
        if constexpr (std::is_floating_point_v<T>)
            return std::numbers::pi_v<T>;
        else
            return boost::math::constants::pi<T>();
    }

    template <typename T>
    inline double to_double(const T& x)
    {
        return static_cast<double>(x);
    }

    template <typename T>
    inline T epsilon_of()
    {
        return std::numeric_limits<T>::epsilon();
    }

    /// Real cube root valid for any sign.
    template <typename T>
    inline T real_cbrt(const T& x)
    {
        using std::abs;
        using std::pow;
        if (x == 0)
            return T(0);
        T a = abs(x);
        T r = pow(a, T(1) / T(3));
        // two Newton steps recover the last bits lost by pow
        for (int i = 0; i < 2; ++i)
            r -= (r * r * r - a) / (3 * r * r);
        return x < 0 ? -r : r;
    }
} // namespace qlw

#endif
