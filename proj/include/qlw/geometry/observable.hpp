#ifndef QLW_GEOMETRY_OBSERVABLE_HPP
#define QLW_GEOMETRY_OBSERVABLE_HPP

// Observable points: for x0' in Omega, the shortest spatial geodesic to the
// boundary (length l, foot p') gives q = (eps + l, x0') on the null geodesic
// from (eps, p') that returns to (2 l + eps, p').

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "qlw/error.hpp"
#include "qlw/geometry/bichar.hpp"
#include "qlw/geometry/causal.hpp"

namespace qlw::geo
{
    struct NontrappingReport
    {
        int samples = 0;
        int exited = 0;
        double max_length = 0; // longest g0-length before exit
        bool nontrapping() const { return exited == samples; }
    };

    namespace detail
    {
        /// Unit vectors: +-1 in d = 1, equally spaced angles in d = 2, a
        /// Fibonacci sphere in d = 3.
        inline std::vector<Vec> sphere_directions(int d, int count)
        {
            std::vector<Vec> out;
            if (d == 1)
                return {vec({-1.0}), vec({1.0})};
            for (int i = 0; i < count; ++i)
            {
                if (d == 2)
                {
                    const double a = 2 * std::numbers::pi * i / count;
                    out.push_back(vec({std::cos(a), std::sin(a)}));
                }
                else
                {
                    const double z = 1 - (2.0 * i + 1) / count;
                    const double r = std::sqrt(1 - z * z);
                    const double a = i * std::numbers::pi * (3 - std::sqrt(5.0));
                    out.push_back(vec({r * std::cos(a), r * std::sin(a), z}));
                }
            }
            return out;
        }

        /// Travel time to the boundary along the spatial geodesic from x in
        /// direction dir, or NaN if none within max_len. Fills the foot point
        /// and the arriving spatial covector.
        inline double time_to_boundary(const Metric& m, const Vec& x, const Vec& dir, double max_len, double ds,
                                       Vec* foot = nullptr, Vec* arriving = nullptr)
        {
            TraceOptions o;
            o.ds = ds;
            o.max_s = max_len;
            o.reflect = false;
            o.stop_at_exit = true;
            const auto p = trace_bichar(m, point(0, x), null_covector(m, point(0, x), dir), o);
            if (!p.exited)
                return std::numeric_limits<double>::quiet_NaN();
            if (foot)
                *foot = p.back().x.tail(m.dim);
            if (arriving)
                *arriving = p.back().zeta.tail(m.dim);
            return p.exit_time;
        }
    } // namespace detail

    /// Empirical nontrapping check: geodesics launched inward from sampled
    /// boundary points must leave again within g0-length T.
    inline NontrappingReport check_nontrapping(const Metric& m, double T, int samples = 200, double ds = 2e-3,
                                               unsigned seed = 7)
    {
        m.validate();
        if (!m.domain.bounded())
            fail(ErrorKind::SchemaError, "nontrapping check needs a bounded domain");
        NontrappingReport rep;
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> u(0, 1);
        const auto [lo, hi] = m.domain.bounds();
        for (int i = 0; i < samples; ++i)
        {
            Vec x(m.dim);
            if (m.domain.kind == DomainKind::Ball)
            {
                Vec g(m.dim);
                std::normal_distribution<double> nd;
                for (int k = 0; k < m.dim; ++k)
                    g[k] = nd(rng);
                x = m.domain.center + m.domain.radius * g.normalized();
            }
            else
            {
                for (int k = 0; k < m.dim; ++k)
                    x[k] = lo[k] + u(rng) * (hi[k] - lo[k]);
                const int axis = static_cast<int>(u(rng) * m.dim) % m.dim;
                x[axis] = u(rng) < 0.5 ? lo[axis] : hi[axis];
            }
            Vec dir = -m.domain.normal(x);
            if (m.dim >= 2)
            {
                // tilt the inward normal by up to 70 degrees
                Vec t(m.dim);
                std::normal_distribution<double> nd;
                for (int k = 0; k < m.dim; ++k)
                    t[k] = nd(rng);
                t -= t.dot(dir) * dir;
                if (t.norm() > 0)
                {
                    const double a = (2 * u(rng) - 1) * 70 * std::numbers::pi / 180;
                    dir = std::cos(a) * dir + std::sin(a) * t.normalized();
                }
            }
            ++rep.samples;
            const double len = detail::time_to_boundary(m, x, dir, T, ds);
            if (std::isfinite(len))
            {
                ++rep.exited;
                rep.max_length = std::max(rep.max_length, len);
            }
            else
                rep.max_length = std::max(rep.max_length, T);
        }
        return rep;
    }

    struct ObservableOptions
    {
        double T = 2.0;
        double epsilon = 0.1;
        double ds = 1e-3;
        int directions = 72;
        int nontrapping_samples = 200;
        double check_tol = 1e-6;
    };

    struct ObservablePoint
    {
        Vec q;
        BicharPath gamma1; // from (eps, p') to q
        BicharPath gamma2; // from q back to the boundary
        double epsilon = 0;
        double length = 0; // s0 - s1
        Vec foot;          // p'
        Vec exit_point;
        bool certified = false;
        NontrappingReport nontrapping;
    };

    inline ObservablePoint observable_point(const Metric& m, const Vec& x0, const ObservableOptions& opt = {})
    {
        m.validate();
        if (!m.domain.bounded())
            fail(ErrorKind::SchemaError, "observable points need a bounded domain");
        if (x0.size() != m.dim || !(m.domain.phi(x0) <= 0))
            fail(ErrorKind::SchemaError, "x0 must be a point of the closed domain");
        if (m.speed.time_dependent())
            fail(ErrorKind::UnsupportedMetric, "observable points need a time-independent speed");
        if (!(opt.epsilon > 0 && opt.T > 0))
            fail(ErrorKind::SchemaError, "epsilon and T must be positive");

        ObservablePoint out;
        out.epsilon = opt.epsilon;
        out.nontrapping = check_nontrapping(m, opt.T, m.dim == 1 ? 2 : opt.nontrapping_samples);

        // shortest geodesic to the boundary within length T / 2
        double ell = std::numeric_limits<double>::infinity();
        Vec dir0, foot, arriving;
        if (m.speed.is_constant() && m.domain.kind == DomainKind::Box)
        {
            for (int k = 0; k < m.dim; ++k)
                for (int side = 0; side < 2; ++side)
                {
                    const double dist = side == 0 ? x0[k] - m.domain.lo[k] : m.domain.hi[k] - x0[k];
                    if (dist / m.speed.c0 < ell)
                    {
                        ell = dist / m.speed.c0;
                        dir0 = Vec::Zero(m.dim);
                        dir0[k] = side == 0 ? -1 : 1;
                        foot = x0;
                        foot[k] = side == 0 ? m.domain.lo[k] : m.domain.hi[k];
                    }
                }
            arriving = dir0 / m.speed.c0;
        }
        else
        {
            for (const Vec& dir : detail::sphere_directions(m.dim, opt.directions))
            {
                Vec f, a;
                const double len = detail::time_to_boundary(m, x0, dir, opt.T / 2, opt.ds, &f, &a);
                if (std::isfinite(len) && len < ell)
                {
                    ell = len;
                    dir0 = dir;
                    foot = f;
                    arriving = a;
                }
            }
        }
        if (!(ell <= opt.T / 2))
            fail(ErrorKind::Trapped, "no boundary point within g0-length T/2");
        if (!out.nontrapping.nontrapping())
            fail(ErrorKind::Trapped, "sampled geodesics stay inside for length T");
        if (!(2 * ell + opt.epsilon < opt.T))
            fail(ErrorKind::TimeBudget, "2 (s0 - s1) + eps must stay below T");

        out.length = ell;
        out.foot = foot;
        out.q = point(opt.epsilon + ell, x0);

        // incoming geodesic from (eps, p') and outgoing one back to the boundary
        Vec z1(m.dim + 1);
        z1[0] = -1;
        z1.tail(m.dim) = -arriving;
        TraceOptions o;
        o.ds = opt.ds;
        o.reflect = false;
        o.max_s = ell;
        out.gamma1 = trace_bichar(m, point(opt.epsilon, foot), z1, o);
        o.max_s = opt.T;
        o.stop_at_exit = true;
        out.gamma2 = trace_bichar(m, out.q, null_covector(m, out.q, dir0), o);

        const Vec end1 = out.gamma1.back().x;
        const bool hits_q = (end1 - out.q).norm() <= opt.check_tol;
        const bool exits = out.gamma2.exited && std::abs(out.gamma2.exit_time - (2 * ell + opt.epsilon)) <= opt.check_tol;
        out.exit_point = out.gamma2.back().x;
        const bool on_boundary = std::abs(m.domain.phi(foot)) <= opt.check_tol &&
                                 std::abs(m.domain.phi(out.exit_point.tail(m.dim))) <= opt.check_tol;
        const bool in_window = opt.epsilon > 0 && out.exit_point[0] < opt.T;
        const double band = 10 * opt.check_tol;
        const bool causal = causally_precedes(causal_relation(m, out.gamma1.samples.front().x, out.q, band)) &&
                            causally_precedes(causal_relation(m, out.q, out.exit_point, band));
        out.certified = hits_q && exits && on_boundary && in_window && causal;
        return out;
    }
} // namespace qlw::geo

#endif
