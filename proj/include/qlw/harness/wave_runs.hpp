#ifndef QLW_HARNESS_WAVE_RUNS_HPP
#define QLW_HARNESS_WAVE_RUNS_HPP

// forward and linearize-check experiments on the 1-D solver.

#include <cmath>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "qlw/harness/params.hpp"
#include "qlw/harness/report.hpp"
#include "qlw/multilinear.hpp"
#include "qlw/wave/solver.hpp"

namespace qlw::harness
{
    namespace detail
    {
        inline NonlinearityProfile profile_of(const std::map<int, double>& m)
        {
            NonlinearityProfile p;
            for (const auto& [k, b] : m)
                p.set(k, b);
            return p;
        }

        inline Json profile_json(const std::map<int, double>& m)
        {
            Json j = Json::object();
            for (const auto& [k, b] : m)
                j[std::to_string(k)] = b;
            return j;
        }

        struct ManufacturedErrors
        {
            double field = 0;
            double trace = 0;
        };

        /// Linear solve against p = sin(pi x) sin^2(t) on (0, 1) x (0, 1), c = 1:
        /// max nodal error of the field and of the Neumann trace (-pi sin^2 t at both ends).
        inline ManufacturedErrors manufactured_errors(int nx, double cfl)
        {
            using wave::Grid;
            constexpr double pi = std::numbers::pi;
            const auto g = Grid::uniform(nx, 1.0, cfl);
            wave::Array src(g.size());
            for (int n = 0; n <= g.nt(); ++n)
                for (int j = 0; j <= g.nx; ++j)
                {
                    const double t = g.t(n), x = g.x(j);
                    src[n * g.nodes() + j] =
                        std::sin(pi * x) * (2 * std::cos(2 * t) + pi * pi * std::sin(t) * std::sin(t));
                }
            const auto f = wave::solve_linear(g, wave::constant_speed(g), src, wave::BoundaryTrace::zero(g));
            const auto tr = wave::dn_trace(f);
            ManufacturedErrors e;
            for (int n = 0; n <= g.nt(); ++n)
            {
                const double s2 = std::sin(g.t(n)) * std::sin(g.t(n));
                for (int j = 0; j <= g.nx; ++j)
                    e.field = std::max(e.field, std::abs(f.at(n, j) - std::sin(pi * g.x(j)) * s2));
                e.trace = std::max({e.trace, std::abs(tr.left[n] + pi * s2), std::abs(tr.right[n] + pi * s2)});
            }
            return e;
        }
    } // namespace detail

    struct Forward
    {
        int nx = 200;
        double T = 1.0, cfl = 0.5, speed = 1.0;
        std::map<int, double> beta;
        std::string side = "left";
        double t0 = 0.0, width = 0.4, amplitude = 0.0;
        double picard_tol = 1e-10;
        int picard_max_iter = 50;
        bool threshold_check = false;
        bool convergence = false;
        std::vector<int> levels{200, 400, 800};
        double order = 2.0, order_tol = 0.2;

        static Forward parse(Params& p)
        {
            Forward c;
            c.nx = p.integer("nx", c.nx, 4, 1 << 16);
            c.T = p.positive("T", c.T);
            c.cfl = p.positive("cfl", c.cfl, 1.0);
            c.speed = p.positive("speed", c.speed);
            c.beta = p.coefficients("beta", c.beta);
            auto d = p.child("data");
            c.side = d.choice("side", c.side, {"left", "right", "both"});
            c.t0 = d.number("t0", c.t0, 0.0);
            c.width = d.positive("width", c.width);
            c.amplitude = d.number("amplitude", c.amplitude);
            p.put("data", d.done());
            auto pc = p.child("picard");
            c.picard_tol = pc.number("tol", c.picard_tol, 0.0);
            c.picard_max_iter = pc.integer("max_iter", c.picard_max_iter, 1, 100000);
            c.threshold_check = pc.boolean("threshold_check", c.threshold_check);
            p.put("picard", pc.done());
            auto cv = p.child("convergence");
            c.convergence = cv.boolean("enabled", c.convergence);
            c.levels = cv.integers("levels", c.levels, 4, 1 << 14, 2);
            c.order = cv.number("order", c.order);
            c.order_tol = cv.positive("tol", c.order_tol);
            p.put("convergence", cv.done());
            if (c.threshold_check && c.beta.empty())
                p.bad("picard", "threshold_check needs a nonzero nonlinearity");
            return c;
        }

        wave::BoundaryTrace data(const wave::Grid& g, double a) const
        {
            auto b = wave::BoundaryTrace::zero(g);
            if (side != "right")
                b += wave::pulse_trace(g, wave::Side::Left, t0, width, a);
            if (side != "left")
                b += wave::pulse_trace(g, wave::Side::Right, t0, width, a);
            return b;
        }

        void run(Report& rep) const
        {
            const auto g = wave::Grid::uniform(nx, T, cfl, speed);
            const auto c = wave::constant_speed(g, speed);
            const auto f = data(g, amplitude);
            const auto prof = detail::profile_of(beta);
            wave::NonlinearOptions opt;
            opt.tol = picard_tol;
            opt.max_iter = picard_max_iter;

            wave::WaveField field;
            Json res;
            res["grid"] = {{"nx", g.nx}, {"nt", g.nt()}, {"dt", g.dt}, {"dx", g.dx()}};
            if (prof.is_zero())
                field = wave::solve_linear(g, c, {}, f);
            else
            {
                const auto s = wave::solve_nonlinear(g, c, prof, f, opt);
                field = s.field;
                const auto& r = s.report;
                bool monotone = true;
                for (std::size_t k = 1; k < r.residuals.size(); ++k)
                    monotone = monotone && r.residuals[k] < r.residuals[k - 1];
                const double eq = wave::equation_residual(field, prof);
                res["picard"] = {{"iterations", r.iterations},
                                 {"contraction_estimate", r.contraction_estimate},
                                 {"converged", r.converged},
                                 {"equation_residual", eq}};
                auto& tab = rep.table("residuals", {"iteration", "residual"});
                for (std::size_t k = 0; k < r.residuals.size(); ++k)
                    tab.add({static_cast<long long>(k + 1), r.residuals[k]});
                rep.verdicts.push_back(flag("picard_converged", r.converged));
                rep.verdicts.push_back(judge("contraction_estimate", r.contraction_estimate, 0, 1.0, Compare::Lt));
                rep.verdicts.push_back(flag("residuals_monotone", monotone));
                rep.verdicts.push_back(judge("equation_residual", eq, 0, 10 * std::max(picard_tol, 1e-12),
                                             Compare::Le));
            }

            double peak = 0;
            for (double v : field.values)
                peak = std::max(peak, std::abs(v));
            const auto dn = wave::dn_trace(field);
            res["max_abs_field"] = peak;
            res["data_norm"] = wave::trace_norm(f);
            res["dn_norm"] = wave::trace_norm(dn);
            auto& tr = rep.table("trace", {"t", "f_left", "f_right", "dn_left", "dn_right"});
            for (int n = 0; n <= g.nt(); ++n)
                tr.add({g.t(n), f.left[n], f.right[n], dn.left[n], dn.right[n]});
            if (amplitude == 0.0)
                rep.verdicts.push_back(judge("zero_solution", peak, 0, 0, Compare::Le));

            if (threshold_check)
            {
                bool diverged = false;
                std::string kind = "none";
                try
                {
                    wave::solve_nonlinear(g, c, prof, data(g, 2 * amplitude), opt);
                }
                catch (const Error& e)
                {
                    diverged = e.kind() == ErrorKind::NoConvergence;
                    kind = std::string(to_string(e.kind()));
                }
                res["doubled_amplitude"] = {{"amplitude", 2 * amplitude}, {"error", kind}};
                rep.verdicts.push_back(flag("doubled_amplitude_no_convergence", diverged));
            }

            if (convergence)
                run_convergence(rep, res);
            rep.results = std::move(res);
        }

    private:
        void run_convergence(Report& rep, Json& res) const
        {
            std::vector<detail::ManufacturedErrors> errs(levels.size());
            parallel_for(levels.size(), [&](std::size_t i) { errs[i] = detail::manufactured_errors(levels[i], cfl); });
            auto& tab = rep.table("convergence", {"nx", "field_err", "trace_err", "field_order", "trace_order"});
            Json rows = Json::array();
            for (std::size_t i = 0; i < levels.size(); ++i)
            {
                double fo = std::nan(""), to = std::nan("");
                if (i > 0)
                {
                    const double ratio = static_cast<double>(levels[i]) / levels[i - 1];
                    fo = std::log(errs[i - 1].field / errs[i].field) / std::log(ratio);
                    to = std::log(errs[i - 1].trace / errs[i].trace) / std::log(ratio);
                    const std::string tag = std::to_string(levels[i - 1]) + "_" + std::to_string(levels[i]);
                    rep.verdicts.push_back(judge("field_order_" + tag, fo, order, order_tol, Compare::AbsLe));
                    rep.verdicts.push_back(judge("trace_order_" + tag, to, order, order_tol, Compare::AbsLe));
                }
                tab.add({static_cast<long long>(levels[i]), errs[i].field, errs[i].trace, fo, to});
                rows.push_back({{"nx", levels[i]},
                                {"field_err", errs[i].field},
                                {"trace_err", errs[i].trace},
                                {"field_order", detail::number(fo)},
                                {"trace_order", detail::number(to)}});
            }
            res["convergence"] = rows;
        }
    };

    struct LinearizeCheck
    {
        int nx = 400;
        double T = 1.2, cfl = 0.5;
        std::map<int, double> beta{{2, 0.5}, {3, 0.3}, {4, 0.2}};
        std::vector<int> orders{2, 3, 4};
        std::vector<double> sweep; // empty: the default sweep
        double smallness = wave::kDefaultSmallness;
        double slope_target = 2.0, slope_tol = 0.3, abs_tol = 1e-3;

        static LinearizeCheck parse(Params& p)
        {
            LinearizeCheck c;
            c.nx = p.integer("nx", c.nx, 4, 1 << 14);
            c.T = p.positive("T", c.T);
            c.cfl = p.positive("cfl", c.cfl, 1.0);
            c.beta = p.coefficients("beta", c.beta);
            c.orders = p.integers("orders", c.orders, 2, 4);
            c.smallness = p.positive("smallness", c.smallness);
            c.sweep = p.numbers("sweep", ml::default_sweep(c.smallness), 2);
            for (double e : c.sweep)
                if (!(e > 0))
                    p.bad("sweep", "steps must be positive");
            c.slope_target = p.number("slope_target", c.slope_target);
            c.slope_tol = p.positive("slope_tol", c.slope_tol);
            c.abs_tol = p.positive("abs_tol", c.abs_tol);
            return c;
        }

        void run(Report& rep) const
        {
            const auto g = wave::Grid::uniform(nx, T, cfl);
            const auto c = wave::constant_speed(g);
            const auto prof = detail::profile_of(beta);
            auto& tab = rep.table("linearize", {"J", "eps", "stencil_norm", "rel_err", "abs_err", "roundoff_warning"});
            Json rows = Json::array();
            for (int J : orders)
            {
                const auto pf = ml::standard_family(g, c, J);
                const auto ref = ml::cascade_reference(pf, prof);
                const auto cc = ml::cross_check(ml::nonlinear_solver(g, c, prof), pf, ml::Index(J, 1), ref, sweep);
                Json sweep_rows = Json::array();
                bool monotone = true;
                for (std::size_t i = 0; i < cc.rows.size(); ++i)
                {
                    const auto& r = cc.rows[i];
                    tab.add({static_cast<long long>(J), r.eps, r.stencil_norm, r.rel_err, r.rel_err * cc.cascade_norm,
                             static_cast<long long>(r.roundoff_warning)});
                    sweep_rows.push_back({{"eps", r.eps}, {"rel_err", r.rel_err}, {"roundoff_warning", r.roundoff_warning}});
                    if (i > 0)
                        monotone = monotone && r.rel_err < cc.rows[i - 1].rel_err;
                }
                rows.push_back({{"J", J},
                                {"cascade_norm", cc.cascade_norm},
                                {"slope", cc.slope_estimate},
                                {"best_rel_err", cc.best_rel_err},
                                {"best_abs_err", cc.best_abs_err},
                                {"monotone", monotone},
                                {"sweep", sweep_rows}});
                const std::string tag = "J" + std::to_string(J);
                rep.verdicts.push_back(judge("slope_" + tag, cc.slope_estimate, slope_target, slope_tol, Compare::AbsLe));
                rep.verdicts.push_back(judge("best_abs_err_" + tag, cc.best_abs_err, 0, abs_tol, Compare::Le));
            }
            rep.results["patterns"] = rows;
            rep.results["beta"] = detail::profile_json(beta);
        }
    };
} // namespace qlw::harness

#endif
