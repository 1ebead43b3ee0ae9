#ifndef QLW_GEOMETRY_METRIC_HPP
#define QLW_GEOMETRY_METRIC_HPP

// Product-type Lorentzian metrics g = -dt^2 + c^{-2}(t, x') |dx'|^2 on R x Omega
// with Omega a box, a ball or all of R^d. Points are (t, x'), covectors
// (zeta_0, zeta'); the dual metric is diag(-1, c^2, ..., c^2).

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "qlw/error.hpp"

namespace qlw::geo
{
    using Vec = Eigen::VectorXd;
    using Mat = Eigen::MatrixXd;

    enum class SpeedKind
    {
        Constant,
        Lens,    // c0 (1 + A exp(-|x - xc|^2 / (2 sigma^2)))
        Fisheye, // c0 (1 + |x - xc|^2) / 2; round sphere for c0 = 1
    };

    struct SpeedSample
    {
        double c = 1.0;
        double ct = 0.0;
        Vec grad;
        Mat hess;
    };

    struct SpeedModel
    {
        SpeedKind kind = SpeedKind::Constant;
        double c0 = 1.0;
        double amplitude = 0.0;
        Vec center;
        double sigma = 0.2;
        // optional time modulation c *= 1 + time_amplitude sin(time_omega t)
        double time_amplitude = 0.0;
        double time_omega = 0.0;

        bool time_dependent() const { return time_amplitude != 0.0 && time_omega != 0.0; }
        bool is_constant() const { return kind == SpeedKind::Constant && !time_dependent(); }

        double value(double t, const Vec& x) const
        {
            double c = c0;
            if (kind == SpeedKind::Lens)
                c = c0 * (1 + amplitude * std::exp(-(x - centre(x)).squaredNorm() / (2 * sigma * sigma)));
            else if (kind == SpeedKind::Fisheye)
                c = c0 * (1 + (x - centre(x)).squaredNorm()) / 2;
            return time_dependent() ? c * (1 + time_amplitude * std::sin(time_omega * t)) : c;
        }

        SpeedSample eval(double t, const Vec& x, bool hessian = false) const
        {
            const Eigen::Index d = x.size();
            SpeedSample s;
            s.grad = Vec::Zero(d);
            if (hessian)
                s.hess = Mat::Zero(d, d);
            double c = c0;
            if (kind == SpeedKind::Lens)
            {
                const Vec r = x - centre(x);
                const double e = amplitude * std::exp(-r.squaredNorm() / (2 * sigma * sigma));
                const double s2 = sigma * sigma;
                c = c0 * (1 + e);
                s.grad = -c0 * e / s2 * r;
                if (hessian)
                    s.hess = c0 * e * (r * r.transpose() / (s2 * s2) - Mat::Identity(d, d) / s2);
            }
            else if (kind == SpeedKind::Fisheye)
            {
                const Vec r = x - centre(x);
                c = c0 * (1 + r.squaredNorm()) / 2;
                s.grad = c0 * r;
                if (hessian)
                    s.hess = c0 * Mat::Identity(d, d);
            }
            s.c = c;
            if (time_dependent())
            {
                const double m = 1 + time_amplitude * std::sin(time_omega * t);
                s.c = c * m;
                s.ct = c * time_amplitude * time_omega * std::cos(time_omega * t);
                s.grad *= m;
                if (hessian)
                    s.hess *= m;
            }
            return s;
        }

    private:
        Vec centre(const Vec& x) const { return center.size() == x.size() ? center : Vec::Zero(x.size()); }
    };

    enum class DomainKind
    {
        Unbounded,
        Box,
        Ball,
    };

    /// Spatial domain described by a signed distance phi (negative inside)
    /// and its outward unit normal.
    struct Domain
    {
        DomainKind kind = DomainKind::Unbounded;
        Vec lo, hi;    // box
        Vec center;    // ball
        double radius = 1.0;

        static Domain box(Vec lo, Vec hi) { return {DomainKind::Box, std::move(lo), std::move(hi), {}, 0.0}; }
        static Domain ball(Vec c, double r) { return {DomainKind::Ball, {}, {}, std::move(c), r}; }
        static Domain interval(double a, double b)
        {
            return box(Vec::Constant(1, a), Vec::Constant(1, b));
        }

        bool bounded() const { return kind != DomainKind::Unbounded; }

        double phi(const Vec& x) const
        {
            if (kind == DomainKind::Box)
            {
                double m = -std::numeric_limits<double>::infinity();
                for (Eigen::Index i = 0; i < x.size(); ++i)
                    m = std::max({m, lo[i] - x[i], x[i] - hi[i]});
                return m;
            }
            if (kind == DomainKind::Ball)
                return (x - center).norm() - radius;
            return -std::numeric_limits<double>::infinity();
        }

        Vec normal(const Vec& x) const
        {
            Vec n = Vec::Zero(x.size());
            if (kind == DomainKind::Box)
            {
                double m = -std::numeric_limits<double>::infinity();
                Eigen::Index face = 0;
                double sign = 1;
                for (Eigen::Index i = 0; i < x.size(); ++i)
                {
                    if (lo[i] - x[i] > m)
                    {
                        m = lo[i] - x[i];
                        face = i;
                        sign = -1;
                    }
                    if (x[i] - hi[i] > m)
                    {
                        m = x[i] - hi[i];
                        face = i;
                        sign = 1;
                    }
                }
                n[face] = sign;
            }
            else if (kind == DomainKind::Ball)
                n = (x - center).normalized();
            return n;
        }

        /// Axis-aligned bounding box; unbounded domains have none.
        std::pair<Vec, Vec> bounds() const
        {
            if (kind == DomainKind::Box)
                return {lo, hi};
            if (kind == DomainKind::Ball)
                return {center.array() - radius, center.array() + radius};
            fail(ErrorKind::SchemaError, "unbounded domain has no bounding box");
        }
    };

    struct Metric
    {
        int dim = 1;
        SpeedModel speed;
        Domain domain;

        void validate() const
        {
            if (dim < 1 || dim > 3)
                fail(ErrorKind::UnsupportedDim, "spatial dimension must be 1, 2 or 3");
            if (!(speed.c0 > 0))
                fail(ErrorKind::SchemaError, "speed scale must be positive");
            if (speed.kind == SpeedKind::Lens && !(speed.amplitude > -1 && speed.sigma > 0))
                fail(ErrorKind::SchemaError, "lens needs amplitude > -1 and sigma > 0");
            if (std::abs(speed.time_amplitude) >= 1)
                fail(ErrorKind::SchemaError, "time modulation must keep c positive");
            if (domain.kind == DomainKind::Box &&
                (domain.lo.size() != dim || domain.hi.size() != dim || (domain.hi - domain.lo).minCoeff() <= 0))
                fail(ErrorKind::SchemaError, "box bounds must match the dimension and be increasing");
            if (domain.kind == DomainKind::Ball && (domain.center.size() != dim || !(domain.radius > 0)))
                fail(ErrorKind::SchemaError, "ball needs a centre of the right dimension and positive radius");
        }

        static Metric flat(int dim, Domain dom = {}, double c = 1.0)
        {
            Metric m;
            m.dim = dim;
            m.speed.c0 = c;
            m.domain = std::move(dom);
            return m;
        }

        /// b(x, zeta) = g^{ij} zeta_i zeta_j = -zeta_0^2 + c^2 |zeta'|^2
        double hamiltonian(const Vec& x, const Vec& z) const
        {
            const double c = speed.value(x[0], x.tail(dim));
            return -z[0] * z[0] + c * c * z.tail(dim).squaredNorm();
        }

        /// Tangent vector of the bicharacteristic of b / 2 (the raised covector, up to sign in time).
        Vec velocity(const Vec& x, const Vec& z) const
        {
            const double c = speed.value(x[0], x.tail(dim));
            Vec v(dim + 1);
            v[0] = -z[0];
            v.tail(dim) = c * c * z.tail(dim);
            return v;
        }
    };

    /// Spacetime point (t, x').
    inline Vec point(double t, const Vec& xs)
    {
        Vec x(xs.size() + 1);
        x[0] = t;
        x.tail(xs.size()) = xs;
        return x;
    }

    inline Vec vec(std::initializer_list<double> v)
    {
        Vec out(static_cast<Eigen::Index>(v.size()));
        Eigen::Index i = 0;
        for (double x : v)
            out[i++] = x;
        return out;
    }
} // namespace qlw::geo

#endif
