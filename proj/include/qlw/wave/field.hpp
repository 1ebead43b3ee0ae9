#ifndef QLW_WAVE_FIELD_HPP
#define QLW_WAVE_FIELD_HPP

// Space-time grids, fields and boundary traces for the 1-D forward solver.
// Fields are stored row-major with one row of nx + 1 nodes per time level.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "qlw/error.hpp"

namespace qlw::wave
{
    struct Grid
    {
        int spatial_dim = 1;
        double x0 = 0.0;
        double x1 = 1.0;
        int nx = 200;
        double dt = 0.0;
        double T = 1.0;
        double cfl_safety = 1.0;

        double dx() const { return (x1 - x0) / nx; }
        int nt() const { return static_cast<int>(std::lround(T / dt)); }
        std::size_t nodes() const { return static_cast<std::size_t>(nx) + 1; }
        std::size_t levels() const { return static_cast<std::size_t>(nt()) + 1; }
        std::size_t size() const { return nodes() * levels(); }
        double x(int j) const { return x0 + (x1 - x0) * j / nx; }
        double t(int n) const { return n * dt; }

        /// Grid on [x0, x1] x [0, T] whose time step is the largest with
        /// c_max dt / dx <= cfl and T / dt integral.
        static Grid uniform(int nx, double T, double cfl = 0.5, double c_max = 1.0, double x0 = 0.0, double x1 = 1.0)
        {
            Grid g;
            g.x0 = x0;
            g.x1 = x1;
            g.nx = nx;
            g.T = T;
            g.cfl_safety = std::min(1.0, cfl);
            const double dt_max = g.cfl_safety * g.dx() / c_max;
            const int nt = static_cast<int>(std::ceil(T / dt_max - 1e-9));
            g.dt = T / nt;
            return g;
        }

        void validate() const
        {
            if (spatial_dim != 1)
                fail(ErrorKind::UnsupportedDim, "the forward solver is one-dimensional");
            if (!(nx >= 4 && x1 > x0 && dt > 0 && T > 0))
                fail(ErrorKind::SchemaError, "grid needs nx >= 4, x1 > x0, dt > 0, T > 0");
            if (std::abs(nt() * dt - T) > 1e-9 * T || nt() < 4)
                fail(ErrorKind::SchemaError, "T must be an integer multiple (>= 4) of dt");
        }
    };

    using Array = std::vector<double>;

    struct WaveField
    {
        Grid grid;
        std::vector<double> speed; // c at the nx + 1 nodes
        Array values;

        WaveField() = default;
        WaveField(const Grid& g, std::vector<double> c) : grid(g), speed(std::move(c)), values(g.size(), 0.0) {}

        double& at(int n, int j) { return values[static_cast<std::size_t>(n) * grid.nodes() + j]; }
        double at(int n, int j) const { return values[static_cast<std::size_t>(n) * grid.nodes() + j]; }
    };

    inline std::vector<double> constant_speed(const Grid& g, double c = 1.0)
    {
        return std::vector<double>(g.nodes(), c);
    }

    enum class TraceKind
    {
        Dirichlet,
        Neumann,
    };

    /// Time series at the two endpoints of the interval.
    struct BoundaryTrace
    {
        TraceKind kind = TraceKind::Dirichlet;
        double dt = 0.0;
        std::vector<double> left;
        std::vector<double> right;

        static BoundaryTrace zero(const Grid& g, TraceKind kind = TraceKind::Dirichlet)
        {
            return {kind, g.dt, std::vector<double>(g.levels(), 0.0), std::vector<double>(g.levels(), 0.0)};
        }

        BoundaryTrace& operator+=(const BoundaryTrace& o)
        {
            for (std::size_t n = 0; n < left.size(); ++n)
            {
                left[n] += o.left[n];
                right[n] += o.right[n];
            }
            return *this;
        }

        BoundaryTrace scaled(double s) const
        {
            BoundaryTrace out = *this;
            for (auto& v : out.left)
                v *= s;
            for (auto& v : out.right)
                v *= s;
            return out;
        }
    };

    /// Discrete L2((0,T) x boundary) norm, trapezoidal in time.
    inline double trace_norm(const BoundaryTrace& b)
    {
        double s = 0;
        const std::size_t n = b.left.size();
        for (std::size_t i = 0; i < n; ++i)
        {
            const double w = (i == 0 || i + 1 == n) ? 0.5 : 1.0;
            s += w * (b.left[i] * b.left[i] + b.right[i] * b.right[i]);
        }
        return std::sqrt(s * b.dt);
    }

    inline BoundaryTrace trace_difference(const BoundaryTrace& a, const BoundaryTrace& b)
    {
        return BoundaryTrace(a) += b.scaled(-1.0);
    }

    /// C^3 bump a sin^4(pi (t - t0) / width) on [t0, t0 + width], zero elsewhere.
    inline double pulse(double t, double t0, double width, double a = 1.0)
    {
        const double u = (t - t0) / width;
        if (u <= 0 || u >= 1)
            return 0.0;
        const double s = std::sin(3.14159265358979323846 * u);
        return a * s * s * s * s;
    }

    enum class Side
    {
        Left,
        Right,
    };

    /// Dirichlet trace carrying pulse(t, t0, width, a) on one endpoint.
    inline BoundaryTrace pulse_trace(const Grid& g, Side side, double t0, double width, double a = 1.0)
    {
        BoundaryTrace b = BoundaryTrace::zero(g);
        auto& v = side == Side::Left ? b.left : b.right;
        for (int n = 0; n <= g.nt(); ++n)
            v[n] = pulse(g.t(n), t0, width, a);
        return b;
    }

    /// Time-difference operators shared by the nonlinearity, the lift and
    /// the cascade. First order: centred inside, one-sided second order at
    /// the ends. Second order: centred inside, even reflection at t = 0
    /// (all fields start at rest) and a one-sided four-point formula at T.
    inline Array time_difference(const Array& v, const Grid& g, int order)
    {
        const std::size_t m = g.nodes();
        const int nt = g.nt();
        Array out(v.size(), 0.0);
        auto row = [&](int n) { return v.data() + static_cast<std::size_t>(n) * m; };
        if (order == 0)
            return v;
        if (order == 1)
        {
            const double c = 1.0 / (2 * g.dt);
            for (int n = 0; n <= nt; ++n)
            {
                double* o = out.data() + static_cast<std::size_t>(n) * m;
                if (n == 0)
                    for (std::size_t j = 0; j < m; ++j)
                        o[j] = c * (-3 * row(0)[j] + 4 * row(1)[j] - row(2)[j]);
                else if (n == nt)
                    for (std::size_t j = 0; j < m; ++j)
                        o[j] = c * (3 * row(nt)[j] - 4 * row(nt - 1)[j] + row(nt - 2)[j]);
                else
                    for (std::size_t j = 0; j < m; ++j)
                        o[j] = c * (row(n + 1)[j] - row(n - 1)[j]);
            }
            return out;
        }
        if (order == 2)
        {
            const double c = 1.0 / (g.dt * g.dt);
            for (int n = 0; n <= nt; ++n)
            {
                double* o = out.data() + static_cast<std::size_t>(n) * m;
                if (n == 0)
                    for (std::size_t j = 0; j < m; ++j)
                        o[j] = 2 * c * (row(1)[j] - row(0)[j]);
                else if (n == nt)
                    for (std::size_t j = 0; j < m; ++j)
                        o[j] = c * (2 * row(nt)[j] - 5 * row(nt - 1)[j] + 4 * row(nt - 2)[j] - row(nt - 3)[j]);
                else
                    for (std::size_t j = 0; j < m; ++j)
                        o[j] = c * (row(n + 1)[j] - 2 * row(n)[j] + row(n - 1)[j]);
            }
            return out;
        }
        fail(ErrorKind::BadOrder, "time differences are implemented up to order 2");
    }

    inline Array d_tt(const Array& v, const Grid& g) { return time_difference(v, g, 2); }
} // namespace qlw::wave

#endif
