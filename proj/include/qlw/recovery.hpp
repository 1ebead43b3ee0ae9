#ifndef QLW_RECOVERY_HPP
#define QLW_RECOVERY_HPP

// Recovery of the nonlinearity coefficients from symbol-level measurements.

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <utility>

#include "qlw/error.hpp"
#include "qlw/interaction.hpp"
#include "qlw/lightcone.hpp"
#include "qlw/scalar.hpp"

namespace qlw
{
    /// Three quadruples at theta_k with sin(theta_k) = r^k sin(theta_1), k = 0, 1, 2.
    template <typename T = Extended>
    std::array<QuadrupleConfig<T>, 3> recovery_scheme(const T& theta1, const T& r, const T& phi = T(0))
    {
        using std::asin;
        using std::sin;
        if (!(r > 0 && r < 1))
            fail(ErrorKind::DegenerateAngle, "scheme ratio r must lie in (0, 1)");
        std::array<QuadrupleConfig<T>, 3> out;
        T factor = 1;
        for (int k = 0; k < 3; ++k)
        {
            out[k] = build_quadruple<T>(phi, asin(factor * sin(theta1)));
            factor *= r;
        }
        return out;
    }

    namespace detail
    {
        template <typename T>
        using Mat3 = std::array<std::array<T, 3>, 3>;

        template <typename T>
        T det3(const Mat3<T>& m)
        {
            return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                   m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
        }

        /// |det| / prod(row norms) after scaling every column to unit max-norm.
        template <typename T>
        T equilibrated_hadamard_ratio(Mat3<T> m)
        {
            using std::abs;
            using std::sqrt;
            for (int c = 0; c < 3; ++c)
            {
                T mx = 0;
                for (int r = 0; r < 3; ++r)
                    mx = std::max<T>(mx, abs(m[r][c]));
                if (mx == 0)
                    return T(0);
                for (int r = 0; r < 3; ++r)
                    m[r][c] /= mx;
            }
            T prod = 1;
            for (int r = 0; r < 3; ++r)
                prod *= sqrt(m[r][0] * m[r][0] + m[r][1] * m[r][1] + m[r][2] * m[r][2]);
            return abs(det3(m)) / prod;
        }

        /// Gaussian elimination with partial pivoting.
        template <typename T>
        std::array<T, 3> solve3(Mat3<T> a, std::array<T, 3> b)
        {
            using std::abs;
            for (int c = 0; c < 3; ++c)
            {
                int piv = c;
                for (int r = c + 1; r < 3; ++r)
                    if (abs(a[r][c]) > abs(a[piv][c]))
                        piv = r;
                std::swap(a[c], a[piv]);
                std::swap(b[c], b[piv]);
                for (int r = c + 1; r < 3; ++r)
                {
                    const T f = a[r][c] / a[c][c];
                    for (int k = c; k < 3; ++k)
                        a[r][k] -= f * a[c][k];
                    b[r] -= f * b[c];
                }
            }
            std::array<T, 3> x{};
            for (int r = 2; r >= 0; --r)
            {
                T s = b[r];
                for (int k = r + 1; k < 3; ++k)
                    s -= a[r][k] * x[k];
                x[r] = s / a[r][r];
            }
            return x;
        }
    } // namespace detail

    struct DeterminantResult
    {
        double det;
        double leading; // 21 / (2 s^4 r^7), s = sin(theta1 / 2)
    };

    /// Determinant of the rows (c(theta_k), d(theta_k), 1) of the three-angle
    /// scheme, evaluated directly (no factored form).
    template <typename T = Extended>
    DeterminantResult recovery_determinant(const T& theta1, const T& r, const T& phi = T(0))
    {
        using std::pow;
        using std::sin;
        const auto qs = recovery_scheme<T>(theta1, r, phi);
        detail::Mat3<T> m;
        for (int k = 0; k < 3; ++k)
            m[k] = {coeff_C(qs[k]), coeff_D(qs[k]), T(1)};
        const T s = sin(theta1 / 2);
        const T leading = T(21) / (2 * pow(s, 4) * pow(r, 7));
        return {to_double(detail::det3(m)), to_double(leading)};
    }

    /// Default conditioning floor on the column-equilibrated Hadamard ratio.
    template <typename T>
    T default_conditioning_floor()
    {
        return T(1e4) * epsilon_of<T>();
    }

    template <typename T>
    struct LowerSystemSolution
    {
        T beta2_cubed{};
        T beta2_beta3{};
        T beta4{};
        T hadamard_ratio{};
    };

    /// Solves the rows (-C_k, D_k, -1) . (beta2^3, beta2 beta3, beta4) = m_k.
    template <typename T>
    LowerSystemSolution<T> solve_lower_system(const std::array<Measurement<T>, 3>& ms,
                                              const T& floor = default_conditioning_floor<T>())
    {
        detail::Mat3<T> a;
        std::array<T, 3> b;
        for (int k = 0; k < 3; ++k)
        {
            a[k] = {-ms[k].C, ms[k].D, T(-1)};
            b[k] = ms[k].value;
        }
        const T ratio = detail::equilibrated_hadamard_ratio(a);
        if (!(ratio >= floor))
            fail(ErrorKind::SingularSystem, "recovery system below conditioning floor (ratio " +
                                                std::to_string(to_double(ratio)) + ")");
        // equilibrate columns before elimination
        std::array<T, 3> scale{};
        for (int c = 0; c < 3; ++c)
        {
            using std::abs;
            T mx = 0;
            for (int r = 0; r < 3; ++r)
                mx = std::max<T>(mx, abs(a[r][c]));
            scale[c] = mx;
            for (int r = 0; r < 3; ++r)
                a[r][c] /= mx;
        }
        auto x = detail::solve3(a, b);
        return {x[0] / scale[0], x[1] / scale[1], x[2] / scale[2], ratio};
    }

    struct LowerRecovery
    {
        double beta2 = 0.0;
        double beta3 = 0.0;
        double beta4 = 0.0;
        double condition = 0.0; // equilibrated Hadamard ratio of the system
        bool used_three_wave = false;
    };

    inline constexpr double kBeta2Threshold = 1e-6;

    /// beta2 is the real cube root of the first unknown; beta3 comes from the
    /// second unknown when |beta2| is above the threshold and from the
    /// three-wave measurement (value = coeff2 beta2^2 - 6 beta3) otherwise.
    template <typename T>
    LowerRecovery recover_lower(const std::array<Measurement<T>, 3>& ms,
                                const std::optional<Measurement<T>>& three_wave = std::nullopt,
                                double beta2_threshold = kBeta2Threshold,
                                const T& floor = default_conditioning_floor<T>())
    {
        using std::abs;
        const auto sol = solve_lower_system(ms, floor);
        LowerRecovery out;
        const T b2 = real_cbrt(sol.beta2_cubed);
        out.beta2 = to_double(b2);
        out.beta4 = to_double(sol.beta4);
        out.condition = to_double(sol.hadamard_ratio);
        if (abs(b2) > T(beta2_threshold))
        {
            out.beta3 = to_double(sol.beta2_beta3 / b2);
        }
        else
        {
            if (!three_wave)
                fail(ErrorKind::NeedThreeWave, "beta2 vanishes; beta3 needs the third-order measurement");
            out.beta3 = to_double((three_wave->C * b2 * b2 - three_wave->value) / 6);
            out.used_three_wave = true;
        }
        return out;
    }

    template <typename T>
    LowerRecovery recover_lower(const std::array<Measurement<T>, 3>& ms, const Measurement<T>& three_wave,
                                double beta2_threshold = kBeta2Threshold,
                                const T& floor = default_conditioning_floor<T>())
    {
        return recover_lower(ms, std::optional<Measurement<T>>(three_wave), beta2_threshold, floor);
    }

    /// Three-wave measurement carrying its beta2^2 coefficient in C.
    template <typename T>
    Measurement<T> three_wave_measurement(const NonlinearityProfile& beta, const std::array<Covector4<T>, 3>& z,
                                          std::string config_id = {})
    {
        Measurement<T> m = three_wave_oracle(beta, z, std::move(config_id));
        m.C = coeff_Q3(z, 1.0, 0.0);
        return m;
    }

    inline double higher_order_factor(int n)
    {
        return static_cast<double>(n) * (n - 1) * (n - 2);
    }

    /// Forward model of the (N-3, 1, 1, 1) measurement once lower orders are removed.
    inline double higher_measurement(int n, double beta_n)
    {
        if (n < 5)
            fail(ErrorKind::BadOrder, "higher-order recovery starts at N = 5");
        return higher_order_factor(n) * beta_n;
    }

    template <typename T>
    double recover_higher(int n, const Measurement<T>& m)
    {
        if (n < 5)
            fail(ErrorKind::BadOrder, "higher-order recovery starts at N = 5");
        return to_double(m.value / T(higher_order_factor(n)));
    }

    inline double recover_higher(int n, double value)
    {
        Measurement<double> m;
        m.value = value;
        m.order_pattern = {n - 3, 1, 1, 1};
        return recover_higher(n, m);
    }
} // namespace qlw

#endif
