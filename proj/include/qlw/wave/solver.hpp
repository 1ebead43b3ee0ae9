#ifndef QLW_WAVE_SOLVER_HPP
#define QLW_WAVE_SOLVER_HPP

// Leapfrog solver for d_t^2 p = c^2 d_x^2 p + s with Dirichlet data, the
// discrete DN map, the Z^m monitor norm and the Picard iteration for the
// quasilinear problem d_t^2 p - c^2 d_x^2 p = F(p), F = sum_m beta_m d_t^2 (p^m).

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "qlw/error.hpp"
#include "qlw/interaction.hpp"
#include "qlw/wave/field.hpp"

namespace qlw::wave
{
    namespace detail
    {
        inline void check_finite_row(const double* r, std::size_t m, int n)
        {
            for (std::size_t j = 0; j < m; ++j)
                if (!std::isfinite(r[j]))
                    fail(ErrorKind::NonFiniteField, "non-finite value at time level " + std::to_string(n));
        }
    } // namespace detail

    inline void check_cfl(const Grid& g, const std::vector<double>& speed)
    {
        const double cmax = *std::max_element(speed.begin(), speed.end());
        const double courant = cmax * g.dt / g.dx();
        if (!(courant <= g.cfl_safety * (1 + 1e-12)))
            fail(ErrorKind::CflViolation, "Courant number " + std::to_string(courant) + " exceeds " +
                                              std::to_string(g.cfl_safety));
    }

    /// Zero initial data; s^n is the source at t_n (empty means zero).
    /// p^1 = dt^2 / 2 (c^2 p_xx^0 + s^0) is the Taylor start from rest.
    inline WaveField solve_linear(const Grid& g, const std::vector<double>& speed, const Array& source,
                                  const BoundaryTrace& bc)
    {
        g.validate();
        if (speed.size() != g.nodes())
            fail(ErrorKind::SchemaError, "speed must be sampled at nx + 1 nodes");
        if (!source.empty() && source.size() != g.size())
            fail(ErrorKind::SchemaError, "source has the wrong shape");
        if (bc.kind != TraceKind::Dirichlet || bc.left.size() != g.levels() || bc.right.size() != g.levels())
            fail(ErrorKind::SchemaError, "boundary data must be a Dirichlet trace on every time level");
        if (*std::min_element(speed.begin(), speed.end()) <= 0)
            fail(ErrorKind::SchemaError, "speed must be positive");
        check_cfl(g, speed);

        WaveField out(g, speed);
        const std::size_t m = g.nodes();
        const int nx = g.nx, nt = g.nt();
        const double dt2 = g.dt * g.dt, inv_dx2 = 1.0 / (g.dx() * g.dx());
        std::vector<double> k(m);
        for (std::size_t j = 0; j < m; ++j)
            k[j] = speed[j] * speed[j] * inv_dx2;
        auto src = [&](int n) { return source.empty() ? nullptr : source.data() + static_cast<std::size_t>(n) * m; };

        double* p0 = out.values.data();
        p0[0] = bc.left[0];
        p0[nx] = bc.right[0];
        double* p1 = p0 + m;
        const double* s0 = src(0);
        for (int j = 1; j < nx; ++j)
            p1[j] = 0.5 * dt2 * (k[j] * (p0[j + 1] - 2 * p0[j] + p0[j - 1]) + (s0 ? s0[j] : 0.0));
        p1[0] = bc.left[1];
        p1[nx] = bc.right[1];

        for (int n = 1; n < nt; ++n)
        {
            double* pm = out.values.data() + static_cast<std::size_t>(n - 1) * m;
            const double* pc = pm + m;
            double* pn = pm + 2 * m;
            const double* s = src(n);
            for (int j = 1; j < nx; ++j)
                pn[j] = 2 * pc[j] - pm[j] + dt2 * (k[j] * (pc[j + 1] - 2 * pc[j] + pc[j - 1]) + (s ? s[j] : 0.0));
            pn[0] = bc.left[n + 1];
            pn[nx] = bc.right[n + 1];
            if ((n & 15) == 0 || n + 1 == nt)
                detail::check_finite_row(pn, m, n + 1);
        }
        return out;
    }

    /// Outward normal derivative by one-sided second-order differences.
    inline BoundaryTrace dn_trace(const WaveField& f)
    {
        const Grid& g = f.grid;
        BoundaryTrace out = BoundaryTrace::zero(g, TraceKind::Neumann);
        const double c = 1.0 / (2 * g.dx());
        const int nx = g.nx;
        for (int n = 0; n <= g.nt(); ++n)
        {
            out.left[n] = -c * (-3 * f.at(n, 0) + 4 * f.at(n, 1) - f.at(n, 2));
            out.right[n] = c * (3 * f.at(n, nx) - 4 * f.at(n, nx - 1) + f.at(n, nx - 2));
        }
        return out;
    }

    /// sup_t ( sum_{k <= m} ||d_t^k v(t)||^2_{L2} )^{1/2}, trapezoidal in space.
    inline double zm_norm(const Array& v, const Grid& g, int m)
    {
        if (m < 0 || m > 2)
            fail(ErrorKind::BadOrder, "Z^m norm is implemented for m = 0, 1, 2");
        std::vector<Array> d;
        for (int k = 0; k <= m; ++k)
            d.push_back(time_difference(v, g, k));
        const std::size_t nodes = g.nodes();
        const double dx = g.dx();
        double best = 0;
        for (int n = 0; n <= g.nt(); ++n)
        {
            double s = 0;
            for (const auto& a : d)
            {
                const double* r = a.data() + static_cast<std::size_t>(n) * nodes;
                double q = 0.5 * (r[0] * r[0] + r[nodes - 1] * r[nodes - 1]);
                for (std::size_t j = 1; j + 1 < nodes; ++j)
                    q += r[j] * r[j];
                s += q * dx;
            }
            best = std::max(best, s);
        }
        return std::sqrt(best);
    }

    inline double zm_norm(const WaveField& f, int m) { return zm_norm(f.values, f.grid, m); }

    enum class NonlinearForm
    {
        Series,
        Factored,
    };

    /// Series: sum_m beta_m D_tt(p^m). Factored: q1 p_tt + q2 p_t^2 with
    /// q1 = sum_m m beta_m p^(m-1) and q2 = sum_m m (m-1) beta_m p^(m-2).
    inline Array eval_nonlinearity(const NonlinearityProfile& beta, const Array& p, const Grid& g,
                                   NonlinearForm form = NonlinearForm::Series)
    {
        Array out(p.size(), 0.0);
        if (beta.is_zero())
            return out;
        if (form == NonlinearForm::Series)
        {
            Array power = p;
            for (int m = 2; m <= beta.truncation(); ++m)
            {
                for (std::size_t i = 0; i < p.size(); ++i)
                    power[i] *= p[i];
                const double b = beta[m];
                if (b == 0.0)
                    continue;
                const Array d = d_tt(power, g);
                for (std::size_t i = 0; i < p.size(); ++i)
                    out[i] += b * d[i];
            }
        }
        else
        {
            const Array pt = time_difference(p, g, 1), ptt = d_tt(p, g);
            for (std::size_t i = 0; i < p.size(); ++i)
            {
                double q1 = 0, q2 = 0, pw = 1; // pw = p^(m-2)
                for (int m = 2; m <= beta.truncation(); ++m)
                {
                    const double b = beta[m];
                    q1 += m * b * pw * p[i];
                    q2 += m * (m - 1) * b * pw;
                    pw *= p[i];
                }
                out[i] = q1 * ptt[i] + q2 * pt[i] * pt[i];
            }
        }
        for (double v : out)
            if (!std::isfinite(v))
                fail(ErrorKind::NonFiniteField, "non-finite nonlinearity");
        return out;
    }

    inline Array eval_nonlinearity(const NonlinearityProfile& beta, const WaveField& f,
                                   NonlinearForm form = NonlinearForm::Series)
    {
        return eval_nonlinearity(beta, f.values, f.grid, form);
    }

    /// Lift of the boundary data: linear interpolation in x per time level.
    inline Array lift(const BoundaryTrace& f, const Grid& g)
    {
        Array out(g.size());
        const std::size_t m = g.nodes();
        for (int n = 0; n <= g.nt(); ++n)
            for (int j = 0; j <= g.nx; ++j)
            {
                const double xi = static_cast<double>(j) / g.nx;
                out[n * m + j] = (1 - xi) * f.left[n] + xi * f.right[n];
            }
        return out;
    }

    struct IterationReport
    {
        int iterations = 0;
        std::vector<double> residuals; // Z-norm of successive differences
        double contraction_estimate = 0.0;
        bool converged = false;
    };

    struct NonlinearOptions
    {
        double tol = 1e-10;     // absolute, on the Z-norm of successive differences
        double rel_tol = 0.0;   // relative to the Z-norm of the current iterate
        int max_iter = 50;
        int norm_order = 1;
        double stall_tol = 1e-12; // growth below this relative level counts as roundoff stagnation
    };

    /// Smallness threshold for the boundary amplitude: with beta2 = 0.5, c = 1,
    /// T = 2 and a width-0.4 pulse, amplitude 0.05 converges in about 20
    /// iterations and 0.1 diverges.
    inline constexpr double kDefaultSmallness = 0.05;

    struct NonlinearSolution
    {
        WaveField field;
        IterationReport report;
        Array unknown; // the iterated unknown: p - lift, or p - w in the remainder form
    };

    namespace detail
    {
        /// q_{k+1} = solve_linear(base + F(q_k + offset), 0), q_0 = 0; p = q + offset.
        inline NonlinearSolution picard(const Grid& g, const std::vector<double>& speed,
                                        const NonlinearityProfile& beta, const Array& base, const Array& offset,
                                        const NonlinearOptions& opt)
        {
            const BoundaryTrace zero = BoundaryTrace::zero(g);
            NonlinearSolution out;
            IterationReport& rep = out.report;
            Array q(g.size(), 0.0), p(g.size());

            auto finish = [&](Array& qq) {
                out.field = WaveField(g, speed);
                for (std::size_t i = 0; i < qq.size(); ++i)
                    out.field.values[i] = qq[i] + offset[i];
                for (std::size_t k = 1; k < rep.residuals.size(); ++k)
                    if (rep.residuals[k - 1] > 0)
                        rep.contraction_estimate =
                            std::max(rep.contraction_estimate, rep.residuals[k] / rep.residuals[k - 1]);
                rep.converged = true;
                out.unknown = std::move(qq);
                return out;
            };

            if (beta.is_zero())
            {
                if (!base.empty())
                    q = solve_linear(g, speed, base, zero).values;
                rep.iterations = 1;
                rep.residuals = {0.0};
                return finish(q);
            }

            for (int k = 1; k <= opt.max_iter; ++k)
            {
                for (std::size_t i = 0; i < p.size(); ++i)
                    p[i] = q[i] + offset[i];
                Array next;
                try
                {
                    Array src = eval_nonlinearity(beta, p, g);
                    if (!base.empty())
                        for (std::size_t i = 0; i < src.size(); ++i)
                            src[i] += base[i];
                    next = solve_linear(g, speed, src, zero).values;
                }
                catch (const Error& e)
                {
                    if (e.kind() != ErrorKind::NonFiniteField)
                        throw;
                    fail(ErrorKind::NoConvergence, "Picard iterate blew up at iteration " + std::to_string(k));
                }
                Array diff(next.size());
                for (std::size_t i = 0; i < diff.size(); ++i)
                    diff[i] = next[i] - q[i];
                const double r = zm_norm(diff, g, opt.norm_order);
                const double size = zm_norm(next, g, opt.norm_order);
                if (!std::isfinite(r))
                    fail(ErrorKind::NoConvergence, "non-finite residual at iteration " + std::to_string(k));
                if (!rep.residuals.empty() && r >= rep.residuals.back())
                {
                    if (rep.residuals.back() <= opt.stall_tol * size)
                        return finish(q);
                    fail(ErrorKind::NoConvergence, "Picard residual grew at iteration " + std::to_string(k) +
                                                       " (" + std::to_string(r) + ")");
                }
                rep.residuals.push_back(r);
                rep.iterations = k;
                q.swap(next);
                if (r <= opt.tol || r <= opt.rel_tol * size)
                    return finish(q);
            }
            fail(ErrorKind::NoConvergence, "Picard iteration hit max_iter = " + std::to_string(opt.max_iter));
        }
    } // namespace detail

    /// Picard iteration on the lifted unknown q = p - lift(f):
    /// q_{k+1} = solve_linear(F(q_k + lift) - D_tt lift, 0).
    inline NonlinearSolution solve_nonlinear(const Grid& g, const std::vector<double>& speed,
                                             const NonlinearityProfile& beta, const BoundaryTrace& f,
                                             const NonlinearOptions& opt = {})
    {
        g.validate();
        check_cfl(g, speed);
        const Array fl = lift(f, g);
        Array base = d_tt(fl, g);
        for (double& v : base)
            v = -v;
        return detail::picard(g, speed, beta, base, fl, opt);
    }

    /// The same iteration written for the remainder r = p - w, where w is the
    /// linear solution with the same Dirichlet data: r_{k+1} = solve_linear(F(w + r_k), 0).
    /// The iterates are those of solve_nonlinear shifted by one step; r stays
    /// O(|f|^2), so its rounding error does too.
    inline NonlinearSolution solve_nonlinear_remainder(const Grid& g, const std::vector<double>& speed,
                                                       const NonlinearityProfile& beta, const Array& w,
                                                       const NonlinearOptions& opt = {})
    {
        g.validate();
        check_cfl(g, speed);
        if (w.size() != g.size())
            fail(ErrorKind::SchemaError, "linear part has the wrong shape");
        return detail::picard(g, speed, beta, {}, w, opt);
    }

    /// sup_t L2 norm of the leapfrog residual (p^{n+1} - 2p^n + p^{n-1}) / dt^2 - c^2 D_xx p^n - F^n
    /// over interior levels and nodes.
    inline double equation_residual(const WaveField& f, const NonlinearityProfile& beta)
    {
        const Grid& g = f.grid;
        const Array F = eval_nonlinearity(beta, f.values, g);
        const double inv_dt2 = 1.0 / (g.dt * g.dt), inv_dx2 = 1.0 / (g.dx() * g.dx());
        const std::size_t m = g.nodes();
        double best = 0;
        for (int n = 1; n < g.nt(); ++n)
        {
            double s = 0;
            for (int j = 1; j < g.nx; ++j)
            {
                const double c2 = f.speed[j] * f.speed[j];
                const double r = (f.at(n + 1, j) - 2 * f.at(n, j) + f.at(n - 1, j)) * inv_dt2 -
                                 c2 * (f.at(n, j + 1) - 2 * f.at(n, j) + f.at(n, j - 1)) * inv_dx2 - F[n * m + j];
                s += r * r;
            }
            best = std::max(best, s * g.dx());
        }
        return std::sqrt(best);
    }

    /// Discrete energy (1/2) sum [ (D_t^+ p)^2 + c^2 (D_x^+ p)^2 ] dx between levels n and n+1.
    inline double discrete_energy(const WaveField& f, int n)
    {
        const Grid& g = f.grid;
        double e = 0;
        for (int j = 0; j <= g.nx; ++j)
        {
            const double v = (f.at(n + 1, j) - f.at(n, j)) / g.dt;
            e += v * v;
        }
        for (int j = 0; j < g.nx; ++j)
        {
            const double c2 = 0.5 * (f.speed[j] * f.speed[j] + f.speed[j + 1] * f.speed[j + 1]);
            const double a = (f.at(n, j + 1) - f.at(n, j)) / g.dx(), b = (f.at(n + 1, j + 1) - f.at(n + 1, j)) / g.dx();
            e += c2 * a * b;
        }
        return 0.5 * e * g.dx();
    }
} // namespace qlw::wave

#endif
