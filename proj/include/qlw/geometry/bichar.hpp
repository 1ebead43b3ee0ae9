#ifndef QLW_GEOMETRY_BICHAR_HPP
#define QLW_GEOMETRY_BICHAR_HPP

// Null bicharacteristics of b = g^{ij} zeta_i zeta_j integrated with RK4 in the
// flow parameter s of b / 2, with transversal reflection at the boundary
// (tangential momentum kept, normal momentum flipped).

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <string>
#include <vector>

#include "qlw/error.hpp"
#include "qlw/geometry/metric.hpp"

namespace qlw::geo
{
    enum class Mark
    {
        None,
        Entry,
        Exit,
        Reflection,
    };

    inline const char* to_string(Mark m)
    {
        switch (m)
        {
        case Mark::Entry: return "entry";
        case Mark::Exit: return "exit";
        case Mark::Reflection: return "reflection";
        default: return "";
        }
    }

    struct BicharSample
    {
        double s = 0;
        Vec x;
        Vec zeta;
        Vec v; // dx/ds
        Mark mark = Mark::None;
    };

    struct BicharEvent
    {
        Mark kind = Mark::None;
        double s = 0;
        Vec x;
        Vec incident;
        Vec reflected; // equals incident for entries and exits
    };

    struct BicharPath
    {
        int dim = 1;
        std::vector<BicharSample> samples;
        std::vector<BicharEvent> events;
        double hamiltonian_drift = 0;     // max |b|
        double relative_drift = 0;        // max |b| / |zeta|^2
        double entry_time = std::numeric_limits<double>::quiet_NaN(); // first time inside M
        double exit_time = std::numeric_limits<double>::quiet_NaN();  // first boundary hit from inside
        bool exited = false;

        double s_begin() const { return samples.front().s; }
        double s_end() const { return samples.back().s; }
        const BicharSample& back() const { return samples.back(); }

        /// Cubic Hermite interpolation of x(s) and dx/ds between samples.
        std::pair<Vec, Vec> at(double s) const
        {
            if (samples.size() == 1)
                return {samples[0].x, samples[0].v};
            s = std::clamp(s, s_begin(), s_end());
            std::size_t lo = 0, hi = samples.size() - 1;
            while (hi - lo > 1)
            {
                const std::size_t mid = (lo + hi) / 2;
                (samples[mid].s <= s ? lo : hi) = mid;
            }
            // skip the zero-length segment at a reflection
            while (hi + 1 < samples.size() && samples[hi].s == samples[lo].s)
            {
                ++lo;
                ++hi;
            }
            const auto& a = samples[lo];
            const auto& b = samples[hi];
            const double h = b.s - a.s;
            if (h <= 0)
                return {a.x, a.v};
            const double u = (s - a.s) / h;
            const double h00 = (1 + 2 * u) * (1 - u) * (1 - u), h10 = u * (1 - u) * (1 - u);
            const double h01 = u * u * (3 - 2 * u), h11 = u * u * (u - 1);
            const Vec x = h00 * a.x + h10 * h * a.v + h01 * b.x + h11 * h * b.v;
            const double d00 = 6 * u * u - 6 * u, d10 = 3 * u * u - 4 * u + 1;
            const double d01 = -d00, d11 = 3 * u * u - 2 * u;
            const Vec v = (d00 * a.x + d01 * b.x) / h + d10 * a.v + d11 * b.v;
            return {x, v};
        }
    };

    struct TraceOptions
    {
        double ds = 1e-3;
        double max_s = 1.0;
        bool reflect = true;
        bool stop_at_exit = false;
        double lightlike_tol = 1e-8;  // |b| <= tol |zeta|^2 at the start
        double event_tol = 1e-12;     // bisection width in s
        double glancing_tol = 1e-6;   // |<v', nu>| / |v'| below this is glancing
        std::size_t max_events = 10000;
    };

    namespace detail
    {
        /// State [x; zeta] of length 2 (d + 1).
        inline Vec rhs(const Metric& m, const Vec& y)
        {
            const int n = m.dim + 1;
            const double t = y[0];
            const auto sp = m.speed.eval(t, y.segment(1, m.dim));
            const auto zs = y.segment(n + 1, m.dim);
            const double z2 = zs.squaredNorm();
            Vec f(2 * n);
            f[0] = -y[n];
            f.segment(1, m.dim) = sp.c * sp.c * zs;
            f[n] = -sp.c * sp.ct * z2;
            f.segment(n + 1, m.dim) = -sp.c * z2 * sp.grad;
            return f;
        }

        inline Vec rk4(const Metric& m, const Vec& y, double h)
        {
            const Vec k1 = rhs(m, y);
            const Vec k2 = rhs(m, y + 0.5 * h * k1);
            const Vec k3 = rhs(m, y + 0.5 * h * k2);
            const Vec k4 = rhs(m, y + h * k3);
            return y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
        }

        inline double phi_of(const Metric& m, const Vec& y) { return m.domain.phi(y.segment(1, m.dim)); }
    } // namespace detail

    inline BicharPath trace_bichar(const Metric& metric, const Vec& x0, const Vec& zeta0, const TraceOptions& opt)
    {
        metric.validate();
        const int d = metric.dim, n = d + 1;
        if (x0.size() != n || zeta0.size() != n)
            fail(ErrorKind::SchemaError, "point and covector must have d + 1 components");
        if (!(opt.ds > 0 && opt.max_s > 0))
            fail(ErrorKind::SchemaError, "ds and max_s must be positive");
        const double b0 = metric.hamiltonian(x0, zeta0);
        if (!(std::abs(b0) <= opt.lightlike_tol * zeta0.squaredNorm()) || zeta0[0] == 0.0)
            fail(ErrorKind::NotLightlike, "initial covector is not lightlike (b = " + std::to_string(b0) + ")");

        BicharPath path;
        path.dim = d;
        Vec y(2 * n);
        y << x0, zeta0;
        double s = 0;
        auto push = [&](double sv, const Vec& state, Mark mark) {
            BicharSample smp{sv, state.head(n), state.tail(n), {}, mark};
            smp.v = metric.velocity(smp.x, smp.zeta);
            const double b = std::abs(metric.hamiltonian(smp.x, smp.zeta));
            path.hamiltonian_drift = std::max(path.hamiltonian_drift, b);
            path.relative_drift = std::max(path.relative_drift, b / smp.zeta.squaredNorm());
            path.samples.push_back(std::move(smp));
        };
        push(0, y, Mark::None);
        bool inside = detail::phi_of(metric, y) <= 0;
        if (inside)
            path.entry_time = x0[0];

        // smallest h in (0, h_max] where the sign of phi flips, to event_tol
        auto locate = [&](const Vec& from, double h_max, bool was_inside) {
            double lo = 0, hi = h_max;
            while (hi - lo > opt.event_tol)
            {
                const double mid = 0.5 * (lo + hi);
                const bool in = detail::phi_of(metric, detail::rk4(metric, from, mid)) <= 0;
                (in == was_inside ? lo : hi) = mid;
            }
            return std::pair{lo, hi};
        };

        while (s < opt.max_s * (1 - 1e-14))
        {
            const double h = std::min(opt.ds, opt.max_s - s);
            Vec next = detail::rk4(metric, y, h);
            if (!next.allFinite())
                fail(ErrorKind::NonFiniteField, "bicharacteristic left the finite range");
            const bool next_inside = detail::phi_of(metric, next) <= 0;
            if (metric.domain.bounded() && next_inside != inside)
            {
                if (path.events.size() >= opt.max_events)
                    fail(ErrorKind::SchemaError, "too many boundary events");
                auto [lo, hi] = locate(y, h, inside);
                if (!inside)
                {
                    // entry: continue the free flight
                    const Vec e = detail::rk4(metric, y, hi);
                    path.events.push_back({Mark::Entry, s + hi, e.head(n), e.tail(n), e.tail(n)});
                    if (std::isnan(path.entry_time))
                        path.entry_time = e[0];
                    push(s + hi, e, Mark::Entry);
                    y = detail::rk4(metric, e, h - hi);
                    s += h;
                    inside = detail::phi_of(metric, y) <= 0;
                    push(s, y, Mark::None);
                    continue;
                }
                Vec e = detail::rk4(metric, y, lo);
                const Vec xs = e.segment(1, d);
                if (!path.exited)
                {
                    path.exited = true;
                    path.exit_time = e[0];
                }
                if (!opt.reflect)
                {
                    path.events.push_back({Mark::Exit, s + lo, e.head(n), e.tail(n), e.tail(n)});
                    push(s + lo, e, Mark::Exit);
                    if (opt.stop_at_exit)
                        return path;
                    y = detail::rk4(metric, e, h - lo);
                    s += h;
                    inside = detail::phi_of(metric, y) <= 0;
                    push(s, y, Mark::None);
                    continue;
                }
                const Vec nu = metric.domain.normal(xs);
                const Vec vs = metric.velocity(e.head(n), e.tail(n)).tail(d);
                if (std::abs(vs.dot(nu)) < opt.glancing_tol * vs.norm())
                    fail(ErrorKind::TangentialHit, "glancing boundary hit at t = " + std::to_string(e[0]));
                const Vec incident = e.tail(n);
                Vec zs = e.segment(n + 1, d);
                zs -= 2 * zs.dot(nu) * nu;
                push(s + lo, e, Mark::None);
                e.segment(n + 1, d) = zs;
                path.events.push_back({Mark::Reflection, s + lo, e.head(n), incident, e.tail(n)});
                push(s + lo, e, Mark::Reflection);
                y = e;
                s += lo;
                continue;
            }
            y = std::move(next);
            s += h;
            inside = next_inside;
            push(s, y, Mark::None);
        }
        return path;
    }

    inline BicharPath trace_bichar(const Metric& metric, const Vec& x0, const Vec& zeta0, double ds, double max_s,
                                   bool reflect)
    {
        TraceOptions o;
        o.ds = ds;
        o.max_s = max_s;
        o.reflect = reflect;
        return trace_bichar(metric, x0, zeta0, o);
    }

    /// Future-pointing null covector (-1, theta / c) over the unit spatial direction theta.
    inline Vec null_covector(const Metric& m, const Vec& x, const Vec& dir)
    {
        const double c = m.speed.value(x[0], x.tail(m.dim));
        Vec z(m.dim + 1);
        z[0] = -1;
        z.tail(m.dim) = dir.normalized() / c;
        return z;
    }

    /// One row per sample: s, t, x1..xd, z0..zd, event.
    inline void write_csv(const BicharPath& p, const std::string& path)
    {
        std::ofstream os(path);
        if (!os)
            fail(ErrorKind::IoError, "cannot open " + path);
        os << std::setprecision(17) << "s,t";
        for (int i = 1; i <= p.dim; ++i)
            os << ",x" << i;
        for (int i = 0; i <= p.dim; ++i)
            os << ",z" << i;
        os << ",event\n";
        for (const auto& smp : p.samples)
        {
            os << smp.s;
            for (Eigen::Index i = 0; i < smp.x.size(); ++i)
                os << ',' << smp.x[i];
            for (Eigen::Index i = 0; i < smp.zeta.size(); ++i)
                os << ',' << smp.zeta[i];
            os << ',' << to_string(smp.mark) << '\n';
        }
    }
} // namespace qlw::geo

#endif
