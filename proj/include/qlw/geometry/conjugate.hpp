#ifndef QLW_GEOMETRY_CONJUGATE_HPP
#define QLW_GEOMETRY_CONJUGATE_HPP

// First conjugate point along a spatial geodesic of g0 = c^{-2} |dx|^2 from
// the variational equations of the ray system, started with J(0) = 0 and
// J'(0) normal to the geodesic. The parameter is g0-length.

#include <cmath>
#include <optional>
#include <tuple>

#include <Eigen/SVD>

#include "qlw/error.hpp"
#include "qlw/geometry/metric.hpp"

namespace qlw::geo
{
    struct ConjugateOptions
    {
        double ds = 1e-3;
        double max_length = 10.0;
        double jacobi_scale = 1.0; // scales every initial derivative
        double double_root_tol = 1e-2;
    };

    namespace detail
    {
        /// State: x (d), zeta (d), X (d x k), Z (d x k), column-major, with
        /// k = d - 1 Jacobi fields.
        inline Vec jacobi_rhs(const Metric& m, const Vec& y)
        {
            const int d = m.dim, k = d - 1;
            const Vec x = y.head(d), z = y.segment(d, d);
            const auto sp = m.speed.eval(0, x, true);
            const double z2 = z.squaredNorm();
            Vec f(y.size());
            f.head(d) = sp.c * sp.c * z;
            f.segment(d, d) = -sp.c * z2 * sp.grad;
            const Mat dcg = sp.grad * sp.grad.transpose() + sp.c * sp.hess; // d(c grad c)/dx
            for (int j = 0; j < k; ++j)
            {
                const Vec X = y.segment(2 * d + j * d, d);
                const Vec Z = y.segment(2 * d + k * d + j * d, d);
                f.segment(2 * d + j * d, d) = 2 * sp.c * z * sp.grad.dot(X) + sp.c * sp.c * Z;
                f.segment(2 * d + k * d + j * d, d) = -z2 * dcg * X - 2 * sp.c * sp.grad * z.dot(Z);
            }
            return f;
        }

        /// det[v_hat, X] (sign-carrying), the smallest singular value of the
        /// normal projection of X and the largest column norm of X.
        inline std::tuple<double, double, double> jacobi_monitor(const Metric& m, const Vec& y)
        {
            const int d = m.dim, k = d - 1;
            const double c = m.speed.value(0, y.head(d));
            const Vec v = (c * c * y.segment(d, d)).normalized();
            Mat X(d, k);
            for (int j = 0; j < k; ++j)
                X.col(j) = y.segment(2 * d + j * d, d);
            Mat A(d, d);
            A.col(0) = v;
            A.rightCols(k) = X;
            const double scale = X.colwise().norm().maxCoeff();
            const Mat P = (Mat::Identity(d, d) - v * v.transpose()) * X;
            Eigen::JacobiSVD<Mat> svd(P);
            return {A.determinant(), svd.singularValues().minCoeff(), scale};
        }
    } // namespace detail

    /// First parameter where a normal Jacobi field with J(0) = 0 vanishes
    /// again, or nothing within max_length.
    inline std::optional<double> conjugate_time(const Metric& m, const Vec& x0, const Vec& dir,
                                                const ConjugateOptions& opt = {})
    {
        m.validate();
        if (m.dim == 1)
            fail(ErrorKind::UnsupportedDim, "no conjugate points in one spatial dimension");
        if (m.speed.time_dependent())
            fail(ErrorKind::UnsupportedMetric, "conjugate points need a time-independent speed");
        const int d = m.dim, k = d - 1;
        const Vec u = dir.normalized();
        // orthonormal basis of u-perp
        Mat E(d, k);
        {
            Eigen::JacobiSVD<Mat> svd(Mat(u.transpose()), Eigen::ComputeFullV);
            E = svd.matrixV().rightCols(k);
        }
        Vec y = Vec::Zero(2 * d + 2 * k * d);
        const double c0 = m.speed.value(0, x0);
        y.head(d) = x0;
        y.segment(d, d) = u / c0;
        for (int j = 0; j < k; ++j)
            y.segment(2 * d + k * d + j * d, d) = opt.jacobi_scale * E.col(j) / c0;

        auto step = [&](const Vec& s, double h) {
            const Vec k1 = detail::jacobi_rhs(m, s);
            const Vec k2 = detail::jacobi_rhs(m, s + 0.5 * h * k1);
            const Vec k3 = detail::jacobi_rhs(m, s + 0.5 * h * k2);
            const Vec k4 = detail::jacobi_rhs(m, s + h * k3);
            return Vec(s + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4));
        };

        // skip the trivial zero at s = 0
        double s = opt.ds;
        y = step(y, opt.ds);
        // sigma_min is measured against the largest field size seen so far,
        // since at a double root every field vanishes at once
        auto [det_prev, sig_prev, peak] = detail::jacobi_monitor(m, y);
        sig_prev /= peak;
        double sig_prev2 = sig_prev;
        while (s < opt.max_length)
        {
            const double h = std::min(opt.ds, opt.max_length - s);
            const Vec y_next = step(y, h);
            if (!y_next.allFinite())
                fail(ErrorKind::NonFiniteField, "Jacobi fields blew up");
            auto [det, sig, size] = detail::jacobi_monitor(m, y_next);
            peak = std::max(peak, size);
            sig /= peak;
            if (det == 0.0 || (det > 0) != (det_prev > 0))
                return s + h * det_prev / (det_prev - det);
            // even-multiplicity zero: local minimum of the normalised sigma_min
            if (k > 1 && sig_prev < sig_prev2 && sig_prev <= sig && sig_prev < opt.double_root_tol)
            {
                const double a = sig_prev2, b = sig_prev, c = sig;
                const double den = a - 2 * b + c;
                return s + (den > 0 ? opt.ds * 0.5 * (a - c) / den : 0.0);
            }
            sig_prev2 = sig_prev;
            sig_prev = sig;
            det_prev = det;
            y = y_next;
            s += h;
        }
        return std::nullopt;
    }
} // namespace qlw::geo

#endif
