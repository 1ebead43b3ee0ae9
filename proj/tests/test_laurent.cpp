#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "qlw/interaction.hpp"
#include "qlw/laurent.hpp"

using namespace qlw;

namespace
{
    std::vector<LaurentSample> sample(double lo, double hi, int n, auto&& f)
    {
        std::vector<LaurentSample> out;
        for (double s : log_grid(lo, hi, n))
            out.push_back({s, f(s)});
        return out;
    }

    /// c(theta(s)) and d(theta(s)) with s = sin(theta / 2)
    std::vector<LaurentSample> series_samples(bool want_c, double lo, double hi, int n, double phi = 0.4)
    {
        return sample(lo, hi, n, [&](double s) {
            const Extended se(s);
            const auto q = build_quadruple<Extended>(Extended(phi), 2 * asin(se));
            return to_double(want_c ? coeff_C(q) : coeff_D(q));
        });
    }
} // namespace

TEST(LaurentCoeffs, ExactInverse)
{
    auto pts = sample(1e-3, 1e-1, 20, [](double s) { return 1.0 / s; });
    const auto fit = laurent_coeffs(pts, {-1, 0});
    EXPECT_NEAR(fit.coefficient(-1), 1.0, 1e-10);
    EXPECT_NEAR(fit.coefficient(0), 0.0, 1e-10);
    EXPECT_LT(fit.residual, 1e-12);
}

TEST(LaurentCoeffs, ExactOnRandomLaurentPolynomials)
{
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(-3, 3);
    const std::vector<int> orders{-3, -2, -1, 0, 1};
    for (int n = 0; n < 20; ++n)
    {
        std::vector<double> c(orders.size());
        for (auto& x : c)
            x = u(rng);
        c[0] += c[0] >= 0 ? 0.5 : -0.5; // keep the leading term away from zero
        auto pts = sample(1e-3, 1e-1, 30, [&](double s) {
            double v = 0;
            for (std::size_t k = 0; k < orders.size(); ++k)
                v += c[k] * std::pow(s, orders[k]);
            return v;
        });
        const auto fit = laurent_coeffs(pts, orders);
        for (std::size_t k = 0; k < orders.size(); ++k)
            EXPECT_NEAR(fit.coefficients[k], c[k], 1e-7 * std::max(1.0, std::abs(c[k])))
                << "order " << orders[k];
    }
}

TEST(LaurentCoeffs, Preconditions)
{
    auto few = sample(1e-3, 1e-1, 3, [](double s) { return s; });
    EXPECT_THROW(laurent_coeffs(few, {-1, 0}), Error);
    auto narrow = sample(1e-2, 2e-2, 10, [](double s) { return s; });
    EXPECT_THROW(laurent_coeffs(narrow, {-1, 0}), Error);
    // two identical columns make the design matrix singular
    auto pts = sample(1e-3, 1e-1, 10, [](double s) { return s; });
    try
    {
        laurent_coeffs(pts, {1, 1});
        FAIL();
    }
    catch (const Error& e)
    {
        EXPECT_EQ(e.kind(), ErrorKind::IllConditioned);
    }
}

TEST(LaurentCoeffs, SeriesOfC)
{
    const auto fit = laurent_coeffs(series_samples(true, 1e-4, 1e-2, 40), {-3, -2, -1, 0});
    EXPECT_NEAR(fit.coefficient(-3), -2.0, 2e-3);
    EXPECT_NEAR(fit.coefficient(-2), 14.0, 14e-3);
    EXPECT_NEAR(fit.coefficient(-1), 10.0, 10e-3);
}

TEST(LaurentCoeffs, SeriesOfD)
{
    const auto fit = laurent_coeffs(series_samples(false, 1e-4, 1e-2, 40), {-3, -2, -1, 0});
    EXPECT_NEAR(fit.coefficient(-3), 1.5, 1.5e-3);
    EXPECT_NEAR(fit.coefficient(-2), -10.5, 10.5e-3);
    EXPECT_NEAR(fit.coefficient(-1), -2.25, 2.25e-3);
}

TEST(LaurentCoeffs, CombinationLeadingSeven)
{
    auto c = series_samples(true, 1e-4, 1e-2, 40);
    auto d = series_samples(false, 1e-4, 1e-2, 40);
    std::vector<LaurentSample> g;
    for (std::size_t i = 0; i < c.size(); ++i)
        g.push_back({c[i].s, c[i].value + 4.0 / 3.0 * d[i].value});
    const auto fit = laurent_coeffs(g, {-3, -2, -1, 0});
    EXPECT_NEAR(fit.coefficient(-1), 7.0, 7e-3);
    EXPECT_NEAR(fit.coefficient(-3), 0.0, 1e-6);
    EXPECT_NEAR(fit.coefficient(-2), 0.0, 1e-4);
}
