#ifndef QLW_GEOMETRY_CAUSAL_HPP
#define QLW_GEOMETRY_CAUSAL_HPP

// Causal relations for time-independent speeds: x <= y iff d_{g0}(x', y') <= t_y - t_x.
// d_{g0} is exact for constant c (convex domains), a quadrature of 1/c in one
// dimension, and otherwise a grid Dijkstra estimate refined by Newton shooting.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <queue>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "qlw/error.hpp"
#include "qlw/geometry/bichar.hpp"
#include "qlw/geometry/metric.hpp"

namespace qlw::geo
{
    enum class Relation
    {
        Timelike, // x << y
        Causal,   // x <= y on the null boundary
        None,
    };

    inline const char* to_string(Relation r)
    {
        switch (r)
        {
        case Relation::Timelike: return "timelike";
        case Relation::Causal: return "causal";
        default: return "none";
        }
    }

    struct DistanceOptions
    {
        int resolution = 81;    // grid nodes per axis for Dijkstra
        bool refine = true;     // Newton shooting correction
        double shoot_tol = 1e-10;
        int shoot_steps = 400;
    };

    namespace detail
    {
        /// Travel time 1/c along a straight segment, Simpson's rule.
        inline double segment_cost(const SpeedModel& c, const Vec& a, const Vec& b)
        {
            const double len = (b - a).norm();
            return len * (1 / c.value(0, a) + 4 / c.value(0, 0.5 * (a + b)) + 1 / c.value(0, b)) / 6;
        }

        inline std::vector<std::vector<int>> neighbour_offsets(int d)
        {
            const int r = d == 2 ? 2 : 1;
            std::vector<std::vector<int>> out;
            std::vector<int> k(d, -r);
            while (true)
            {
                int g = 0;
                for (int v : k)
                    g = std::gcd(g, std::abs(v));
                if (g == 1)
                    out.push_back(k);
                int i = 0;
                while (i < d && k[i] == r)
                    k[i++] = -r;
                if (i == d)
                    break;
                ++k[i];
            }
            return out;
        }

        /// Spatial geodesic of g0 from x with unit direction dir, integrated to
        /// g0-length S as the null bicharacteristic with zeta_0 = -1.
        inline Vec shoot(const Metric& m, const Vec& x, const Vec& dir, double S, int steps)
        {
            const int n = m.dim + 1;
            Vec y(2 * n);
            y << point(0, x), null_covector(m, point(0, x), dir);
            const double h = S / steps;
            for (int i = 0; i < steps; ++i)
                y = rk4(m, y, h);
            return y.segment(1, m.dim);
        }

        inline Vec direction(int d, const Vec& a)
        {
            if (d == 2)
                return vec({std::cos(a[0]), std::sin(a[0])});
            return vec({std::sin(a[0]) * std::cos(a[1]), std::sin(a[0]) * std::sin(a[1]), std::cos(a[0])});
        }

        inline Vec angles(int d, const Vec& dir)
        {
            const Vec u = dir.normalized();
            if (d == 2)
                return vec({std::atan2(u[1], u[0])});
            return vec({std::acos(std::clamp(u[2], -1.0, 1.0)), std::atan2(u[1], u[0])});
        }

        /// Newton shooting on (angles, length); returns NaN when it fails.
        inline double shoot_distance(const Metric& m, const Vec& a, const Vec& b, double guess,
                                     const DistanceOptions& opt)
        {
            const int d = m.dim;
            Vec p(d);
            p.head(d - 1) = angles(d, b - a);
            p[d - 1] = guess;
            if ((b - a).norm() == 0)
                return 0;
            for (int it = 0; it < 30; ++it)
            {
                const Vec r = shoot(m, a, direction(d, p.head(d - 1)), p[d - 1], opt.shoot_steps) - b;
                if (r.norm() < opt.shoot_tol)
                    return p[d - 1];
                Mat J(d, d);
                for (int j = 0; j < d; ++j)
                {
                    const double h = 1e-7 * std::max(1.0, std::abs(p[j]));
                    Vec pp = p, pm = p;
                    pp[j] += h;
                    pm[j] -= h;
                    J.col(j) = (shoot(m, a, direction(d, pp.head(d - 1)), pp[d - 1], opt.shoot_steps) -
                                shoot(m, a, direction(d, pm.head(d - 1)), pm[d - 1], opt.shoot_steps)) /
                               (2 * h);
                }
                const Vec dp = J.colPivHouseholderQr().solve(-r);
                if (!dp.allFinite())
                    return std::numeric_limits<double>::quiet_NaN();
                p += dp;
                if (p[d - 1] <= 0)
                    return std::numeric_limits<double>::quiet_NaN();
            }
            return std::numeric_limits<double>::quiet_NaN();
        }
    } // namespace detail

    /// Graph approximation of d_{g0}(source, .) over a uniform grid of the
    /// domain's bounding box; computed once and queried read-only.
    class DistanceField
    {
    public:
        DistanceField(const Metric& m, const Vec& source, int resolution) : m_(m), source_(source), n_(resolution)
        {
            const int d = m.dim;
            if (d < 2)
                fail(ErrorKind::UnsupportedDim, "graph distances are for d >= 2");
            if (m.domain.bounded())
                std::tie(lo_, hi_) = m.domain.bounds();
            else
                fail(ErrorKind::SchemaError, "graph distances need a bounded domain");
            h_ = (hi_ - lo_) / (n_ - 1);
            std::size_t total = 1;
            for (int i = 0; i < d; ++i)
                total *= n_;
            dist_.assign(total, std::numeric_limits<double>::infinity());
            inside_.assign(total, 0);
            for (std::size_t k = 0; k < total; ++k)
                inside_[k] = m.domain.phi(node(k)) <= 1e-12;

            using Item = std::pair<double, std::size_t>;
            std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
            for (std::size_t k : nearby(source))
            {
                dist_[k] = detail::segment_cost(m.speed, source, node(k));
                pq.push({dist_[k], k});
            }
            const auto offsets = detail::neighbour_offsets(d);
            while (!pq.empty())
            {
                auto [dk, k] = pq.top();
                pq.pop();
                if (dk > dist_[k])
                    continue;
                const auto idx = multi(k);
                const Vec xk = node(k);
                for (const auto& off : offsets)
                {
                    std::vector<int> j = idx;
                    bool ok = true;
                    for (int i = 0; i < d && ok; ++i)
                    {
                        j[i] += off[i];
                        ok = j[i] >= 0 && j[i] < n_;
                    }
                    if (!ok)
                        continue;
                    const std::size_t kj = flat(j);
                    if (!inside_[kj])
                        continue;
                    const double nd = dk + detail::segment_cost(m.speed, xk, node(kj));
                    if (nd < dist_[kj])
                    {
                        dist_[kj] = nd;
                        pq.push({nd, kj});
                    }
                }
            }
        }

        double to(const Vec& y) const
        {
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t k : nearby(y))
                best = std::min(best, dist_[k] + detail::segment_cost(m_.speed, node(k), y));
            return best;
        }

        const Vec& source() const { return source_; }

    private:
        Vec node(std::size_t k) const
        {
            const auto idx = multi(k);
            Vec x(m_.dim);
            for (int i = 0; i < m_.dim; ++i)
                x[i] = lo_[i] + idx[i] * h_[i];
            return x;
        }

        std::vector<int> multi(std::size_t k) const
        {
            std::vector<int> idx(m_.dim);
            for (int i = 0; i < m_.dim; ++i)
            {
                idx[i] = static_cast<int>(k % n_);
                k /= n_;
            }
            return idx;
        }

        std::size_t flat(const std::vector<int>& idx) const
        {
            std::size_t k = 0;
            for (int i = m_.dim - 1; i >= 0; --i)
                k = k * n_ + idx[i];
            return k;
        }

        /// Inside nodes within two cells of y.
        std::vector<std::size_t> nearby(const Vec& y) const
        {
            std::vector<std::size_t> out;
            std::vector<int> lo(m_.dim), hi(m_.dim);
            for (int i = 0; i < m_.dim; ++i)
            {
                const double u = (y[i] - lo_[i]) / h_[i];
                lo[i] = std::max(0, static_cast<int>(std::floor(u)) - 1);
                hi[i] = std::min(n_ - 1, static_cast<int>(std::ceil(u)) + 1);
            }
            std::vector<int> idx = lo;
            while (true)
            {
                const std::size_t k = flat(idx);
                if (inside_[k])
                    out.push_back(k);
                int i = 0;
                while (i < m_.dim && idx[i] == hi[i])
                {
                    idx[i] = lo[i];
                    ++i;
                }
                if (i == m_.dim)
                    break;
                ++idx[i];
            }
            return out;
        }

        Metric m_;
        Vec source_;
        int n_;
        Vec lo_, hi_, h_;
        std::vector<double> dist_;
        std::vector<char> inside_;
    };

    /// d_{g0}(a, b) for a time-independent speed.
    inline double spatial_distance(const Metric& m, const Vec& a, const Vec& b, const DistanceOptions& opt = {})
    {
        m.validate();
        if (m.speed.time_dependent())
            fail(ErrorKind::UnsupportedMetric, "causal relations need a time-independent speed");
        if (m.speed.is_constant())
            return (b - a).norm() / m.speed.c0;
        if (m.dim == 1)
        {
            const auto f = [&](double x) { return 1 / m.speed.value(0, Vec::Constant(1, x)); };
            const double lo = std::min(a[0], b[0]), hi = std::max(a[0], b[0]);
            return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, lo, hi, 15, 1e-14);
        }
        const double graph = DistanceField(m, a, opt.resolution).to(b);
        if (!opt.refine)
            return graph;
        const double shot = detail::shoot_distance(m, a, b, graph, opt);
        // the graph path is never shorter than the geodesic; reject other branches
        return std::isfinite(shot) && shot <= graph * 1.02 ? shot : graph;
    }

    inline Relation classify(double dist, double dt, double tol)
    {
        if (std::abs(dist - dt) <= tol)
            return Relation::Causal;
        return dist < dt ? Relation::Timelike : Relation::None;
    }

    /// Relation of y to x: timelike if d < dt, causal within tol of the null
    /// boundary, none otherwise.
    inline Relation causal_relation(const Metric& m, const Vec& x, const Vec& y, double tol = 1e-9,
                                    const DistanceOptions& opt = {})
    {
        if (x.size() != m.dim + 1 || y.size() != m.dim + 1)
            fail(ErrorKind::SchemaError, "points must have d + 1 components");
        const double dist = spatial_distance(m, x.tail(m.dim), y.tail(m.dim), opt);
        return classify(dist, y[0] - x[0], tol);
    }

    inline bool causally_precedes(Relation r) { return r != Relation::None; }
} // namespace qlw::geo

#endif
