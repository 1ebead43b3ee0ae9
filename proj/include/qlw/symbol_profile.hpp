#ifndef QLW_SYMBOL_PROFILE_HPP
#define QLW_SYMBOL_PROFILE_HPP

// Numeric fiber profiles of principal symbols and their m-fold convolution.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "qlw/error.hpp"

namespace qlw
{
    /// Samples at origin + i * step. order is the conormal order mu and
    /// vanish_order the Piriou vanishing order k(mu) + 1; both are bookkeeping only.
    struct SymbolProfile
    {
        std::vector<double> samples;
        double step = 1.0;
        double origin = 0.0;
        double order = -2.0;
        int vanish_order = 1;

        double position(std::size_t i) const { return origin + step * static_cast<double>(i); }

        double mass() const
        {
            double m = 0.0;
            for (double v : samples)
                m += v;
            return m * step;
        }

        double mean() const
        {
            double m0 = 0.0, m1 = 0.0;
            for (std::size_t i = 0; i < samples.size(); ++i)
            {
                m0 += samples[i];
                m1 += samples[i] * position(i);
            }
            return m1 / m0;
        }

        double variance() const
        {
            const double mu = mean();
            double m0 = 0.0, m2 = 0.0;
            for (std::size_t i = 0; i < samples.size(); ++i)
            {
                const double d = position(i) - mu;
                m0 += samples[i];
                m2 += samples[i] * d * d;
            }
            return m2 / m0;
        }
    };

    /// k(mu) is the integer with -mu - 2 <= k < -mu - 1 (defined for mu < -1).
    inline int piriou_k(double mu)
    {
        if (!(mu < -1.0))
            fail(ErrorKind::BadOrder, "Piriou classes need order below -1");
        return static_cast<int>(std::ceil(-mu - 2.0));
    }

    inline double power_order(double mu, int m)
    {
        return mu + (m - 1) * (mu + 1.5);
    }

    inline constexpr std::size_t kDefaultProfileCap = 1u << 22;

    namespace detail
    {
        inline std::vector<double> convolve(const std::vector<double>& a, const std::vector<double>& b, double step)
        {
            std::vector<double> out(a.size() + b.size() - 1, 0.0);
            for (std::size_t i = 0; i < a.size(); ++i)
            {
                if (a[i] == 0.0)
                    continue;
                for (std::size_t j = 0; j < b.size(); ++j)
                    out[i + j] += a[i] * b[j];
            }
            for (double& v : out)
                v *= step;
            return out;
        }
    } // namespace detail

    /// Principal symbol of the m-th power: (2 pi)^-(m-1) times the m-fold
    /// convolution of p with itself. The sample grid grows to hold the support.
    inline SymbolProfile convolve_profiles(const SymbolProfile& p, int m, std::size_t cap = kDefaultProfileCap)
    {
        if (m < 2)
            fail(ErrorKind::BadOrder, "convolution power must be at least 2");
        if (!(p.step > 0.0) || p.samples.empty())
            fail(ErrorKind::BadOrder, "profile needs positive step and samples");
        const std::size_t needed = static_cast<std::size_t>(m) * (p.samples.size() - 1) + 1;
        if (needed > cap)
            fail(ErrorKind::GridOverflow, "convolution support exceeds the profile cap");

        SymbolProfile out = p;
        for (int k = 1; k < m; ++k)
        {
            out.samples = detail::convolve(out.samples, p.samples, p.step);
            out.origin += p.origin;
        }
        const double scale = std::pow(2.0 * std::numbers::pi, -(m - 1));
        for (double& v : out.samples)
            v *= scale;
        out.order = power_order(p.order, m);
        out.vanish_order = out.order < -1.0 ? piriou_k(out.order) + 1 : 0;
        return out;
    }
} // namespace qlw

#endif
