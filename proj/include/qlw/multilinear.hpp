#ifndef QLW_MULTILINEAR_HPP
#define QLW_MULTILINEAR_HPP

// Multilinearization of the nonlinear forward map: the cascade A2 -> A3 -> A4
// of linear solves, central tensor stencils in the probe amplitudes, and the
// leading beta_N block of the N-th linearization.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <tuple>
#include <vector>

#include "qlw/error.hpp"
#include "qlw/interaction.hpp"
#include "qlw/parallel.hpp"
#include "qlw/wave/solver.hpp"

namespace qlw::ml
{
    using wave::Array;
    using wave::BoundaryTrace;
    using wave::Grid;
    using wave::WaveField;
    using Index = std::vector<int>;

    struct ProbeFamily
    {
        Grid grid;
        std::vector<double> speed;
        std::vector<BoundaryTrace> f;
        std::vector<double> epsilons;
        std::vector<WaveField> v; // linear solutions with data f_j

        static ProbeFamily make(const Grid& g, std::vector<double> speed, std::vector<BoundaryTrace> f,
                                std::vector<double> epsilons = {})
        {
            ProbeFamily pf{g, std::move(speed), std::move(f), std::move(epsilons), {}};
            pf.v.resize(pf.f.size());
            parallel_for(pf.f.size(), [&](std::size_t j) { pf.v[j] = wave::solve_linear(g, pf.speed, {}, pf.f[j]); });
            return pf;
        }

        std::size_t size() const { return f.size(); }
    };

    /// Four pulses entering alternately from the two ends so that every pair
    /// of linear waves overlaps somewhere in (0, T) x (0, 1).
    inline ProbeFamily standard_family(const Grid& g, const std::vector<double>& speed, int count)
    {
        static const double t0[4] = {0.0, 0.05, 0.15, 0.2};
        std::vector<BoundaryTrace> f;
        for (int j = 0; j < count; ++j)
            f.push_back(wave::pulse_trace(g, j % 2 == 0 ? wave::Side::Left : wave::Side::Right, t0[j % 4], 0.3));
        return ProbeFamily::make(g, speed, std::move(f));
    }

    struct CascadeTerms
    {
        std::map<Index, WaveField> A2;
        std::map<Index, WaveField> A3;
        std::map<Index, WaveField> A4;

        const std::map<Index, WaveField>& level(int order) const
        {
            if (order == 2)
                return A2;
            if (order == 3)
                return A3;
            if (order == 4)
                return A4;
            fail(ErrorKind::BadOrder, "cascade levels are 2, 3, 4");
        }
    };

    namespace detail
    {
        inline Array product(std::initializer_list<const Array*> fs)
        {
            Array out(*(*fs.begin()));
            for (auto it = fs.begin() + 1; it != fs.end(); ++it)
                for (std::size_t i = 0; i < out.size(); ++i)
                    out[i] *= (**it)[i];
            return out;
        }

        inline void axpy(Array& y, double a, const Array& x)
        {
            for (std::size_t i = 0; i < y.size(); ++i)
                y[i] += a * x[i];
        }

        inline WaveField solve_zero(const ProbeFamily& pf, const Array& src)
        {
            return wave::solve_linear(pf.grid, pf.speed, src, BoundaryTrace::zero(pf.grid));
        }

        /// Ordered tuples over {0..J-1}; distinct entries unless `repeated`.
        inline std::vector<Index> tuples(int J, int k, bool repeated)
        {
            std::vector<Index> out;
            Index cur(k, 0);
            std::function<void(int)> rec = [&](int pos) {
                if (pos == k)
                {
                    out.push_back(cur);
                    return;
                }
                for (int i = 0; i < J; ++i)
                {
                    if (!repeated && std::find(cur.begin(), cur.begin() + pos, i) != cur.begin() + pos)
                        continue;
                    cur[pos] = i;
                    rec(pos + 1);
                }
            };
            rec(0);
            return out;
        }

        inline Index sorted(Index a)
        {
            std::sort(a.begin(), a.end());
            return a;
        }
    } // namespace detail

    /// A2^{ij} = Q(b2 D_tt(v_i v_j))
    /// A3^{ijk} = Q(2 b2 D_tt(v_i A2^{jk}) + b3 D_tt(v_i v_j v_k))
    /// A4^{ijkl} = Q(2 b2 D_tt(v_i A3^{jkl}) + b2 D_tt(A2^{ij} A2^{kl}) + 3 b3 D_tt(v_i v_j A2^{kl})
    ///              + b4 D_tt(v_i v_j v_k v_l))
    /// with Q the zero-Dirichlet leapfrog solve. Terms of one level are
    /// independent and solved in parallel.
    inline CascadeTerms cascade(const ProbeFamily& pf, const NonlinearityProfile& beta, int order,
                                bool repeated = false)
    {
        if (order < 2 || order > 4)
            fail(ErrorKind::BadOrder, "cascade order must be 2, 3 or 4");
        const int J = static_cast<int>(pf.size());
        const Grid& g = pf.grid;
        const double b2 = beta[2], b3 = beta[3], b4 = beta[4];
        const auto& v = pf.v;
        CascadeTerms out;
        const WaveField zero(g, pf.speed);

        auto run_level = [&](const std::vector<Index>& keys, auto&& source) {
            std::vector<WaveField> res(keys.size());
            parallel_for(keys.size(), [&](std::size_t n) {
                Array s = source(keys[n]);
                res[n] = std::all_of(s.begin(), s.end(), [](double x) { return x == 0.0; })
                             ? zero
                             : detail::solve_zero(pf, wave::d_tt(s, g));
            });
            return res;
        };

        // A2 is symmetric: solve once per unordered pair
        {
            std::vector<Index> keys;
            for (const auto& t : detail::tuples(J, 2, repeated))
                if (t[0] <= t[1])
                    keys.push_back(t);
            auto res = run_level(keys, [&](const Index& t) {
                Array s = detail::product({&v[t[0]].values, &v[t[1]].values});
                for (double& x : s)
                    x *= b2;
                return s;
            });
            for (std::size_t n = 0; n < keys.size(); ++n)
            {
                out.A2[keys[n]] = res[n];
                out.A2[{keys[n][1], keys[n][0]}] = res[n];
            }
        }
        if (order == 2)
            return out;

        // A3^{ijk} depends on i and the unordered pair {j, k}
        {
            std::vector<Index> all = detail::tuples(J, 3, repeated), keys;
            for (const auto& t : all)
                if (t[1] <= t[2])
                    keys.push_back(t);
            auto res = run_level(keys, [&](const Index& t) {
                Array s(g.size(), 0.0);
                if (b2 != 0.0)
                    detail::axpy(s, 2 * b2, detail::product({&v[t[0]].values, &out.A2.at({t[1], t[2]}).values}));
                if (b3 != 0.0)
                    detail::axpy(s, b3, detail::product({&v[t[0]].values, &v[t[1]].values, &v[t[2]].values}));
                return s;
            });
            std::map<Index, std::size_t> where;
            for (std::size_t n = 0; n < keys.size(); ++n)
                where[keys[n]] = n;
            for (const auto& t : all)
                out.A3[t] = res[where.at({t[0], std::min(t[1], t[2]), std::max(t[1], t[2])})];
        }
        if (order == 3)
            return out;

        {
            const std::vector<Index> keys = detail::tuples(J, 4, repeated);
            auto res = run_level(keys, [&](const Index& t) {
                const int i = t[0], j = t[1], k = t[2], l = t[3];
                Array s(g.size(), 0.0);
                if (b2 != 0.0)
                {
                    detail::axpy(s, 2 * b2, detail::product({&v[i].values, &out.A3.at({j, k, l}).values}));
                    detail::axpy(s, b2, detail::product({&out.A2.at({i, j}).values, &out.A2.at({k, l}).values}));
                }
                if (b3 != 0.0)
                    detail::axpy(s, 3 * b3,
                                 detail::product({&v[i].values, &v[j].values, &out.A2.at({k, l}).values}));
                if (b4 != 0.0)
                    detail::axpy(s, b4, detail::product({&v[i].values, &v[j].values, &v[k].values, &v[l].values}));
                return s;
            });
            for (std::size_t n = 0; n < keys.size(); ++n)
                out.A4[keys[n]] = std::move(res[n]);
        }
        return out;
    }

    /// Sum of a cascade level over all stored index tuples.
    inline WaveField level_sum(const CascadeTerms& terms, int order, const ProbeFamily& pf)
    {
        WaveField sum(pf.grid, pf.speed);
        for (const auto& [idx, f] : terms.level(order))
            detail::axpy(sum.values, 1.0, f.values);
        return sum;
    }

    /// Maps Dirichlet data and its linear response w to the nonlinear
    /// remainder u - w of the forward solution.
    using Solver = std::function<Array(const BoundaryTrace& data, const Array& linear)>;

    /// Options tuned for stencil corners: iterate to the roundoff floor.
    inline wave::NonlinearOptions stencil_options()
    {
        wave::NonlinearOptions o;
        o.tol = 0.0;
        o.rel_tol = 1e-14;
        o.stall_tol = 1e-12;
        o.max_iter = 200;
        return o;
    }

    inline Solver nonlinear_solver(const Grid& g, std::vector<double> speed, NonlinearityProfile beta,
                                   wave::NonlinearOptions opt = stencil_options())
    {
        return [=](const BoundaryTrace&, const Array& w) {
            return wave::solve_nonlinear_remainder(g, speed, beta, w, opt).unknown;
        };
    }

    /// Same map through the lifted iteration; loses accuracy to cancellation
    /// against w and is kept as a second code path.
    inline Solver lifted_solver(const Grid& g, std::vector<double> speed, NonlinearityProfile beta,
                                wave::NonlinearOptions opt = stencil_options())
    {
        return [=](const BoundaryTrace& f, const Array& w) {
            Array u = wave::solve_nonlinear(g, speed, beta, f, opt).field.values;
            for (std::size_t i = 0; i < u.size(); ++i)
                u[i] -= w[i];
            return u;
        };
    }

    /// Nodes and weights of the k-th central difference with half-width eps:
    /// h = 2 eps / k, nodes (k/2 - i) h, weights (-1)^i C(k, i) / h^k.
    inline std::pair<std::vector<double>, std::vector<double>> central_stencil(int k, double eps)
    {
        if (k == 0)
            return {{0.0}, {1.0}};
        const double h = 2 * eps / k;
        std::vector<double> x, w;
        double binom = 1;
        for (int i = 0; i <= k; ++i)
        {
            x.push_back((0.5 * k - i) * h);
            w.push_back(((i % 2) ? -binom : binom) / std::pow(h, k));
            binom = binom * (k - i) / (i + 1);
        }
        return {x, w};
    }

    struct StencilResult
    {
        WaveField field;
        BoundaryTrace trace;
        int corner_solves = 0;
        double roundoff_estimate = 0.0;
        bool roundoff_warning = false;
    };

    /// Mixed partial d^pattern u / d eps^pattern at eps = 0 by a tensor
    /// product of central stencils, one per probe; corners solve in parallel.
    /// The stencil acts on the nonlinear remainder of each corner; the linear
    /// part sum_j eps_j v_j is differentiated exactly (it survives only for a
    /// single first-order index).
    inline StencilResult divided_difference(const Solver& solve, const ProbeFamily& pf, const Index& pattern,
                                            const std::vector<double>& eps, double noise_level = 1e-13)
    {
        const std::size_t J = pattern.size();
        if (J != pf.size() || eps.size() != J)
            fail(ErrorKind::SchemaError, "pattern, step table and family must have the same length");
        std::vector<std::vector<double>> nodes(J), weights(J);
        std::size_t corners = 1;
        for (std::size_t j = 0; j < J; ++j)
        {
            if (pattern[j] < 0)
                fail(ErrorKind::BadOrder, "negative derivative order in pattern");
            if (pattern[j] > 0 && !(eps[j] > 1e3 * std::numeric_limits<double>::epsilon()))
                fail(ErrorKind::SchemaError, "stencil step below the roundoff floor");
            std::tie(nodes[j], weights[j]) = central_stencil(pattern[j], eps[j]);
            corners *= nodes[j].size();
        }

        std::vector<Array> r(corners);
        std::vector<double> w(corners, 1.0);
        std::vector<std::vector<double>> amp(corners, std::vector<double>(J));
        for (std::size_t c = 0; c < corners; ++c)
        {
            std::size_t rest = c;
            for (std::size_t j = 0; j < J; ++j)
            {
                const std::size_t i = rest % nodes[j].size();
                rest /= nodes[j].size();
                amp[c][j] = nodes[j][i];
                w[c] *= weights[j][i];
            }
        }
        std::vector<int> solved(corners, 0);
        try
        {
            parallel_for(corners, [&](std::size_t c) {
                BoundaryTrace data = BoundaryTrace::zero(pf.grid);
                Array lin(pf.grid.size(), 0.0);
                bool any = false;
                for (std::size_t j = 0; j < J; ++j)
                    if (amp[c][j] != 0.0)
                    {
                        data += pf.f[j].scaled(amp[c][j]);
                        detail::axpy(lin, amp[c][j], pf.v[j].values);
                        any = true;
                    }
                if (any)
                {
                    r[c] = solve(data, lin);
                    solved[c] = 1;
                }
                else
                    r[c].assign(pf.grid.size(), 0.0);
            });
        }
        catch (const Error& e)
        {
            fail(ErrorKind::StencilDiverged, std::string("stencil corner failed: ") + e.what());
        }

        StencilResult out;
        out.field = WaveField(pf.grid, pf.speed);
        double noise = 0;
        for (std::size_t c = 0; c < corners; ++c)
        {
            detail::axpy(out.field.values, w[c], r[c]);
            noise += std::abs(w[c]) * wave::zm_norm(r[c], pf.grid, 0);
        }
        int order = 0, first = -1;
        for (std::size_t j = 0; j < J; ++j)
        {
            order += pattern[j];
            if (pattern[j] == 1)
                first = static_cast<int>(j);
        }
        if (order == 1 && first >= 0)
            detail::axpy(out.field.values, 1.0, pf.v[first].values);
        out.corner_solves = std::accumulate(solved.begin(), solved.end(), 0);
        out.trace = wave::dn_trace(out.field);
        out.roundoff_estimate = noise_level * noise;
        out.roundoff_warning = out.roundoff_estimate > 0.1 * wave::zm_norm(out.field.values, pf.grid, 0);
        return out;
    }

    inline double higher_order_factor(int n) { return static_cast<double>(n) * (n - 1) * (n - 2); }

    /// N(N-1)(N-2) Q(beta_N D_tt(v_1^{N-3} v_2 v_3 v_4)) and its DN trace; for
    /// N = 3 the pattern is (0, 1, 1, 1).
    inline BoundaryTrace assemble_U(const ProbeFamily& pf, const NonlinearityProfile& beta, int N,
                                    const Index& pattern, WaveField* field_out = nullptr)
    {
        if (N < 3)
            fail(ErrorKind::BadOrder, "assemble_U needs N >= 3");
        if (pattern.size() != 4 || pf.size() != 4 || pattern[0] != N - 3 || pattern[1] != 1 || pattern[2] != 1 ||
            pattern[3] != 1)
            fail(ErrorKind::SchemaError, "assemble_U expects the pattern (N-3, 1, 1, 1) on four probes");
        const Grid& g = pf.grid;
        Array s(g.size(), 0.0);
        WaveField u(g, pf.speed);
        if (beta[N] != 0.0)
        {
            s = detail::product({&pf.v[1].values, &pf.v[2].values, &pf.v[3].values});
            for (int k = 0; k < N - 3; ++k)
                for (std::size_t i = 0; i < s.size(); ++i)
                    s[i] *= pf.v[0].values[i];
            for (double& x : s)
                x *= beta[N];
            u = detail::solve_zero(pf, wave::d_tt(s, g));
            for (double& x : u.values)
                x *= higher_order_factor(N);
        }
        if (field_out)
            *field_out = u;
        return wave::dn_trace(u);
    }

    struct CrossCheckRow
    {
        double eps = 0;
        double stencil_norm = 0;
        double rel_err = 0;
        bool roundoff_warning = false;
    };

    struct CrossCheckReport
    {
        Index pattern;
        double cascade_norm = 0;
        std::vector<CrossCheckRow> rows;
        double slope_estimate = 0;
        double best_rel_err = 0;
        double best_abs_err = 0;
    };

    /// Four halvings starting at 1% of the forward solver's smallness threshold.
    inline std::vector<double> default_sweep(double smallness = wave::kDefaultSmallness, int points = 4)
    {
        std::vector<double> out;
        double e = 1e-2 * smallness;
        for (int i = 0; i < points; ++i, e /= 2)
            out.push_back(e);
        return out;
    }

    /// Least-squares slope of log(err) against log(eps).
    inline double loglog_slope(const std::vector<double>& eps, const std::vector<double>& err)
    {
        const std::size_t n = eps.size();
        double mx = 0, my = 0;
        for (std::size_t i = 0; i < n; ++i)
        {
            mx += std::log(eps[i]) / n;
            my += std::log(err[i]) / n;
        }
        double sxy = 0, sxx = 0;
        for (std::size_t i = 0; i < n; ++i)
        {
            const double dx = std::log(eps[i]) - mx;
            sxy += dx * (std::log(err[i]) - my);
            sxx += dx * dx;
        }
        return sxy / sxx;
    }

    /// Compares the stencil estimate of the DN trace with a reference trace
    /// over a sweep of equal probe steps; errors are discrete L2 on the boundary.
    inline CrossCheckReport cross_check(const Solver& solve, const ProbeFamily& pf, const Index& pattern,
                                        const BoundaryTrace& reference, const std::vector<double>& sweep)
    {
        CrossCheckReport rep;
        rep.pattern = pattern;
        rep.cascade_norm = wave::trace_norm(reference);
        std::vector<double> errs;
        rep.best_rel_err = std::numeric_limits<double>::infinity();
        for (double e : sweep)
        {
            const auto dd = divided_difference(solve, pf, pattern, std::vector<double>(pattern.size(), e));
            CrossCheckRow row;
            row.eps = e;
            row.stencil_norm = wave::trace_norm(dd.trace);
            const double abs_err = wave::trace_norm(wave::trace_difference(dd.trace, reference));
            row.rel_err = abs_err / rep.cascade_norm;
            row.roundoff_warning = dd.roundoff_warning;
            if (row.rel_err < rep.best_rel_err)
            {
                rep.best_rel_err = row.rel_err;
                rep.best_abs_err = abs_err;
            }
            rep.rows.push_back(row);
            errs.push_back(row.rel_err);
        }
        rep.slope_estimate = sweep.size() >= 2 ? loglog_slope(sweep, errs) : 0.0;
        return rep;
    }

    /// Reference trace for an all-ones pattern of length J: the DN trace of
    /// the level-J cascade sum.
    inline BoundaryTrace cascade_reference(const ProbeFamily& pf, const NonlinearityProfile& beta)
    {
        const int J = static_cast<int>(pf.size());
        const auto terms = cascade(pf, beta, J);
        return wave::dn_trace(level_sum(terms, J, pf));
    }
} // namespace qlw::ml

#endif
