#ifndef QLW_LAURENT_HPP
#define QLW_LAURENT_HPP

#include <algorithm>
#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qlw/error.hpp"

namespace qlw
{
    struct LaurentSample
    {
        double s;
        double value;
    };

    /// Truncated Laurent model value ≈ sum_k coefficients[k] * s^orders[k].
    struct LaurentFit
    {
        std::vector<int> orders;
        std::vector<double> coefficients;
        double residual = 0.0;       // max relative misfit over s_grid
        double condition = 0.0;      // of the column-scaled weighted design matrix
        std::vector<double> s_grid;

        double coefficient(int order) const
        {
            auto it = std::find(orders.begin(), orders.end(), order);
            if (it == orders.end())
                fail(ErrorKind::BadOrder, "order not part of the fit");
            return coefficients[static_cast<std::size_t>(it - orders.begin())];
        }

        double operator()(double s) const
        {
            double v = 0.0;
            for (std::size_t k = 0; k < orders.size(); ++k)
                v += coefficients[k] * std::pow(s, orders[k]);
            return v;
        }
    };

    inline constexpr double kDefaultMaxCondition = 1e12;

    /// Least-squares fit of a finite Laurent polynomial in s, every sample
    /// weighted by 1/|value| so that the relative misfit is minimised.
    inline LaurentFit laurent_coeffs(std::span<const LaurentSample> samples, std::span<const int> orders,
                                     double max_condition = kDefaultMaxCondition)
    {
        const auto n = static_cast<Eigen::Index>(samples.size());
        const auto p = static_cast<Eigen::Index>(orders.size());
        if (p == 0)
            fail(ErrorKind::IllConditioned, "no orders requested");
        if (n < p + 2)
            fail(ErrorKind::IllConditioned, "need at least |orders| + 2 samples");

        double smin = samples.front().s, smax = samples.front().s;
        for (const auto& sm : samples)
        {
            if (!(sm.s > 0.0))
                fail(ErrorKind::IllConditioned, "sample points must be positive");
            smin = std::min(smin, sm.s);
            smax = std::max(smax, sm.s);
        }
        if (smax < 10.0 * smin)
            fail(ErrorKind::IllConditioned, "samples must span at least one decade");

        Eigen::MatrixXd a(n, p);
        Eigen::VectorXd b(n);
        for (Eigen::Index i = 0; i < n; ++i)
        {
            const auto& sm = samples[static_cast<std::size_t>(i)];
            const double w = sm.value != 0.0 ? 1.0 / std::abs(sm.value) : 1.0;
            for (Eigen::Index k = 0; k < p; ++k)
                a(i, k) = w * std::pow(sm.s, orders[static_cast<std::size_t>(k)]);
            b(i) = w * sm.value;
        }
        Eigen::VectorXd scale = a.colwise().norm().transpose();
        for (Eigen::Index k = 0; k < p; ++k)
            a.col(k) /= scale(k);

        Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const auto& sv = svd.singularValues();
        const double cond = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : INFINITY;
        if (!(cond <= max_condition))
            fail(ErrorKind::IllConditioned, "Laurent design matrix condition number " + std::to_string(cond));
        Eigen::VectorXd x = svd.solve(b);

        LaurentFit fit;
        fit.orders.assign(orders.begin(), orders.end());
        fit.condition = cond;
        for (Eigen::Index k = 0; k < p; ++k)
            fit.coefficients.push_back(x(k) / scale(k));
        for (const auto& sm : samples)
        {
            fit.s_grid.push_back(sm.s);
            const double model = fit(sm.s);
            const double den = sm.value != 0.0 ? std::abs(sm.value) : 1.0;
            fit.residual = std::max(fit.residual, std::abs(model - sm.value) / den);
        }
        return fit;
    }

    inline LaurentFit laurent_coeffs(const std::vector<LaurentSample>& samples, const std::vector<int>& orders,
                                     double max_condition = kDefaultMaxCondition)
    {
        return laurent_coeffs(std::span<const LaurentSample>(samples), std::span<const int>(orders), max_condition);
    }

    /// count points log-spaced on [lo, hi]
    inline std::vector<double> log_grid(double lo, double hi, int count)
    {
        std::vector<double> g;
        g.reserve(static_cast<std::size_t>(count));
        const double a = std::log(lo), b = std::log(hi);
        for (int i = 0; i < count; ++i)
            g.push_back(std::exp(a + (b - a) * i / (count - 1)));
        return g;
    }
} // namespace qlw

#endif
