#ifndef QLW_LIGHTCONE_HPP
#define QLW_LIGHTCONE_HPP

// Minkowski covector algebra in 1+3 dimensions, signature (-,+,+,+).

#include <array>
#include <cmath>
#include <cstddef>

#include "qlw/error.hpp"
#include "qlw/scalar.hpp"

namespace qlw
{
    template <typename T = double>
    struct Covector4
    {
        std::array<T, 4> c{};

        Covector4() = default;
        Covector4(T z0, T z1, T z2, T z3) : c{z0, z1, z2, z3} {}

        T& operator[](std::size_t i) { return c[i]; }
        const T& operator[](std::size_t i) const { return c[i]; }

        Covector4& operator+=(const Covector4& o)
        {
            for (std::size_t i = 0; i < 4; ++i)
                c[i] += o.c[i];
            return *this;
        }

        friend Covector4 operator+(Covector4 a, const Covector4& b) { return a += b; }

        friend Covector4 operator*(const T& s, Covector4 a)
        {
            for (auto& x : a.c)
                x *= s;
            return a;
        }

        /// Euclidean norm squared of the components.
        T norm2() const
        {
            T s = 0;
            for (const auto& x : c)
                s += x * x;
            return s;
        }

        template <typename U>
        Covector4<U> cast() const
        {
            return {U(c[0]), U(c[1]), U(c[2]), U(c[3])};
        }
    };

    /// <a, b>_{g*} = -a0 b0 + a1 b1 + a2 b2 + a3 b3
    template <typename T>
    T minkowski_pair(const Covector4<T>& a, const Covector4<T>& b)
    {
        return -a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3];
    }

    inline constexpr double kLightlikeTol = 1e-10;

    template <typename T>
    bool is_lightlike(const Covector4<T>& z, double tol = kLightlikeTol)
    {
        using std::abs;
        return abs(minkowski_pair(z, z)) <= T(tol) * z.norm2();
    }

    template <typename T>
    bool is_future_lightlike(const Covector4<T>& z, double tol = kLightlikeTol)
    {
        return is_lightlike(z, tol) && z[0] < 0;
    }

    /// Four lightlike covectors zeta^(j) = alpha_j * base_j summing to
    /// zeta = (-1, 0, cos phi, sin phi), parametrised by a small angle theta.
    template <typename T = double>
    struct QuadrupleConfig
    {
        T phi{};
        T theta{};
        std::array<Covector4<T>, 4> base{};
        std::array<T, 4> alphas{};
        Covector4<T> zeta{};
        std::array<Covector4<T>, 4> parts{};
    };

    template <typename T = double>
    QuadrupleConfig<T> build_quadruple(const T& phi, const T& theta)
    {
        using std::abs;
        using std::cos;
        using std::sin;
        if (!(abs(theta) < pi_v<T>() / 2))
            fail(ErrorKind::DegenerateAngle, "|theta| must be below pi/2");
        const T ct = cos(theta);
        const T st = sin(theta);
        if (st == 0 || ct == 1)
            fail(ErrorKind::DegenerateAngle, "theta too close to zero");
        // 1 - cos(theta) without cancellation
        const T sh = sin(theta / 2);
        const T cm1 = -2 * sh * sh;
        const T cp = cos(phi);
        const T sp = sin(phi);

        QuadrupleConfig<T> q;
        q.phi = phi;
        q.theta = theta;
        q.zeta = {T(-1), T(0), cp, sp};
        q.base[0] = {T(-1), T(1), T(0), T(0)};
        q.base[1] = {T(-1), ct, st * sp, -st * cp};
        q.base[2] = {T(-1), ct, -st * sp, st * cp};
        q.base[3] = {T(-1), ct, st * cp, st * sp};
        const T a2 = -(cm1 + st) / (2 * cm1 * st);
        q.alphas = {ct / cm1, a2, a2, T(1) / st};
        for (std::size_t j = 0; j < 4; ++j)
            q.parts[j] = q.alphas[j] * q.base[j];
        return q;
    }

    namespace detail
    {
        template <typename T>
        T null_sum_tol()
        {
            return T(1e3) * epsilon_of<T>();
        }

        template <typename T>
        T zero_ratio(const Covector4<T>& w)
        {
            using std::abs;
            const T den = minkowski_pair(w, w);
            if (abs(den) <= null_sum_tol<T>() * w.norm2())
                fail(ErrorKind::NullSum, "sum of covectors is (numerically) lightlike");
            return w[0] * w[0] / den;
        }
    } // namespace detail

    /// (a0 + b0)^2 / |a + b|^2_{g*}
    template <typename T>
    T pair_ratio(const Covector4<T>& a, const Covector4<T>& b)
    {
        return detail::zero_ratio(a + b);
    }

    /// (a0 + b0 + c0)^2 / |a + b + c|^2_{g*}
    template <typename T>
    T triple_ratio(const Covector4<T>& a, const Covector4<T>& b, const Covector4<T>& c)
    {
        return detail::zero_ratio(a + b + c);
    }
} // namespace qlw

#endif
