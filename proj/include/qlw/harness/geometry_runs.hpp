#ifndef QLW_HARNESS_GEOMETRY_RUNS_HPP
#define QLW_HARNESS_GEOMETRY_RUNS_HPP

// trace and flowout experiments on -dt^2 + c^{-2} |dx'|^2.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qlw/geometry/conjugate.hpp"
#include "qlw/geometry/flowout.hpp"
#include "qlw/geometry/intersection.hpp"
#include "qlw/geometry/observable.hpp"
#include "qlw/harness/params.hpp"
#include "qlw/harness/report.hpp"
#include "qlw/lightcone.hpp"
#include "qlw/parallel.hpp"

namespace qlw::harness
{
    namespace detail
    {
        inline geo::Vec to_vec(const std::vector<double>& v)
        {
            geo::Vec out(static_cast<Eigen::Index>(v.size()));
            for (std::size_t i = 0; i < v.size(); ++i)
                out[static_cast<Eigen::Index>(i)] = v[i];
            return out;
        }

        inline std::vector<double> to_std(const geo::Vec& v) { return {v.data(), v.data() + v.size()}; }

        /// metric: {dim, speed: {...}, domain: {...}}
        inline geo::Metric parse_metric(Params& p)
        {
            auto m = p.child("metric");
            geo::Metric out;
            out.dim = m.integer("dim", 2, 1, 3);
            const auto d = static_cast<std::size_t>(out.dim);

            auto s = m.child("speed");
            const auto kind = s.choice("kind", "constant", {"constant", "lens", "fisheye"});
            out.speed.kind = kind == "lens"      ? geo::SpeedKind::Lens
                             : kind == "fisheye" ? geo::SpeedKind::Fisheye
                                                 : geo::SpeedKind::Constant;
            out.speed.c0 = s.positive("c0", 1.0);
            out.speed.amplitude = s.number("amplitude", 0.0, -0.99);
            out.speed.center = to_vec(s.numbers("center", std::vector<double>(d, 0.0), d, d));
            out.speed.sigma = s.positive("sigma", 0.2);
            out.speed.time_amplitude = s.number("time_amplitude", 0.0, -0.99, 0.99);
            out.speed.time_omega = s.number("time_omega", 0.0);
            m.put("speed", s.done());

            auto dm = m.child("domain");
            const auto dk = dm.choice("kind", "unbounded", {"unbounded", "box", "ball"});
            if (dk == "box")
            {
                const auto lo = dm.numbers("lo", std::vector<double>(d, 0.0), d, d);
                const auto hi = dm.numbers("hi", std::vector<double>(d, 1.0), d, d);
                for (std::size_t i = 0; i < d; ++i)
                    if (!(lo[i] < hi[i]))
                        dm.bad("hi", "box bounds must be increasing");
                out.domain = geo::Domain::box(to_vec(lo), to_vec(hi));
            }
            else if (dk == "ball")
            {
                const auto c = dm.numbers("center", std::vector<double>(d, 0.0), d, d);
                out.domain = geo::Domain::ball(to_vec(c), dm.positive("radius", 1.0));
            }
            m.put("domain", dm.done());
            p.put("metric", m.done());
            return out;
        }

        inline Table& path_table(Report& rep, const std::string& name, int dim)
        {
            std::vector<std::string> cols{"s", "t"};
            for (int i = 1; i <= dim; ++i)
                cols.push_back("x" + std::to_string(i));
            for (int i = 0; i <= dim; ++i)
                cols.push_back("z" + std::to_string(i));
            cols.push_back("event");
            return rep.table(name, std::move(cols));
        }

        inline void add_samples(Table& t, const geo::BicharPath& p, std::vector<Cell> prefix = {})
        {
            for (const auto& smp : p.samples)
            {
                std::vector<Cell> row = prefix;
                row.push_back(smp.s);
                for (Eigen::Index i = 0; i < smp.x.size(); ++i)
                    row.push_back(smp.x[i]);
                for (Eigen::Index i = 0; i < smp.zeta.size(); ++i)
                    row.push_back(smp.zeta[i]);
                row.push_back(std::string(geo::to_string(smp.mark)));
                t.add(std::move(row));
            }
        }

        inline Json opt_number(const std::optional<double>& v) { return v ? Json(*v) : Json(); }
    } // namespace detail

    struct Trace
    {
        struct Launch
        {
            std::vector<double> x0, direction;
        };

        geo::Metric metric;
        std::vector<Launch> paths;
        double ds = 1e-3, max_s = 2.0;
        bool reflect = true;
        double drift_tol = 1e-8, reflection_tol = 1e-10;

        bool observable = false;
        std::vector<double> obs_x0;
        double obs_epsilon = 0.1, obs_T = 2.0;

        bool intersection = false;
        std::vector<double> int_q{1.0, 0.45, 0.35, 0.2};
        double int_phi = 0.4, int_theta = 0.3, int_back = 0.6, int_tol = 1e-8;

        bool conjugate = false;
        std::vector<double> conj_x0, conj_dir;
        double conj_max_length = 10.0;
        std::optional<double> conj_expected;
        double conj_tol = 0.05;

        static Trace parse(Params& p)
        {
            Trace c;
            c.metric = detail::parse_metric(p);
            const auto d = static_cast<std::size_t>(c.metric.dim);
            Json launches = Json::array();
            for (auto& lp : p.children("paths"))
            {
                Launch l;
                l.x0 = lp.numbers("x0", {}, d + 1, d + 1);
                l.direction = lp.numbers("direction", {}, d, d);
                if (detail::to_vec(l.direction).norm() == 0)
                    lp.bad("direction", "must be nonzero");
                launches.push_back(lp.done());
                c.paths.push_back(std::move(l));
            }
            p.put("paths", launches);
            c.ds = p.positive("ds", c.ds);
            c.max_s = p.positive("max_s", c.max_s);
            c.reflect = p.boolean("reflect", c.reflect);
            c.drift_tol = p.positive("drift_tol", c.drift_tol);
            c.reflection_tol = p.positive("reflection_tol", c.reflection_tol);

            auto ob = p.child("observable");
            c.observable = ob.boolean("enabled", false);
            c.obs_x0 = ob.numbers("x0", std::vector<double>(d, 0.5), d, d);
            c.obs_epsilon = ob.positive("epsilon", c.obs_epsilon);
            c.obs_T = ob.positive("T", c.obs_T);
            p.put("observable", ob.done());

            auto in = p.child("intersection");
            c.intersection = in.boolean("enabled", false);
            c.int_q = in.numbers("q", c.int_q, 4, 4);
            c.int_phi = in.number("phi", c.int_phi);
            c.int_theta = in.positive("theta", c.int_theta, 1.5);
            c.int_back = in.positive("back", c.int_back);
            c.int_tol = in.positive("tol", c.int_tol);
            p.put("intersection", in.done());
            if (c.intersection && c.metric.dim != 3)
                p.bad("intersection", "the quadruple round trip needs dim = 3");

            auto cj = p.child("conjugate");
            c.conjugate = cj.boolean("enabled", false);
            c.conj_x0 = cj.numbers("x0", std::vector<double>(d, 0.0), d, d);
            std::vector<double> e1(d, 0.0);
            e1[0] = 1;
            c.conj_dir = cj.numbers("direction", e1, d, d);
            c.conj_max_length = cj.positive("max_length", c.conj_max_length);
            if (cj.has("expected"))
                c.conj_expected = cj.positive("expected", 1.0);
            c.conj_tol = cj.positive("rel_tol", c.conj_tol);
            p.put("conjugate", cj.done());
            return c;
        }

        void run(Report& rep) const
        {
            const auto& m = metric;
            const int d = m.dim;
            geo::TraceOptions o;
            o.ds = ds;
            o.max_s = max_s;
            o.reflect = reflect;
            std::vector<geo::BicharPath> traced(paths.size());
            parallel_for(paths.size(), [&](std::size_t i) {
                const geo::Vec x0 = detail::to_vec(paths[i].x0);
                traced[i] = geo::trace_bichar(m, x0, geo::null_covector(m, x0, detail::to_vec(paths[i].direction)), o);
            });

            auto& ev = rep.table("events", {"path", "kind", "s", "t", "tangential_err", "normal_err", "null_err"});
            Json summary = Json::array();
            double drift = 0, refl = 0;
            bool oriented = true;
            for (std::size_t i = 0; i < traced.size(); ++i)
            {
                const auto& p = traced[i];
                auto& t = detail::path_table(rep, "path_" + std::to_string(i), d);
                detail::add_samples(t, p);
                for (const auto& s : p.samples)
                    oriented = oriented && s.zeta[0] < 0;
                int reflections = 0;
                for (const auto& e : p.events)
                {
                    double te = 0, ne = 0, be = 0;
                    if (e.kind == geo::Mark::Reflection)
                    {
                        ++reflections;
                        const geo::Vec nu = m.domain.normal(e.x.tail(d));
                        const geo::Vec zi = e.incident.tail(d), zr = e.reflected.tail(d);
                        te = (zi - zi.dot(nu) * nu - (zr - zr.dot(nu) * nu)).norm();
                        ne = std::abs(zr.dot(nu) + zi.dot(nu));
                        be = std::abs(m.hamiltonian(e.x, e.reflected)) / e.reflected.squaredNorm();
                        refl = std::max({refl, te, ne, be});
                    }
                    ev.add({static_cast<long long>(i), std::string(geo::to_string(e.kind)), e.s, e.x[0], te, ne, be});
                }
                drift = std::max(drift, p.relative_drift);
                summary.push_back({{"samples", p.samples.size()},
                                   {"s_end", p.s_end()},
                                   {"end", detail::to_std(p.back().x)},
                                   {"relative_drift", p.relative_drift},
                                   {"reflections", reflections},
                                   {"entry_time", detail::number(p.entry_time)},
                                   {"exit_time", detail::number(p.exit_time)}});
            }
            rep.results["paths"] = summary;
            rep.verdicts.push_back(judge("hamiltonian_drift", drift, 0, drift_tol, Compare::Lt));
            rep.verdicts.push_back(judge("reflection_invariants", refl, 0, reflection_tol, Compare::Le));
            rep.verdicts.push_back(flag("time_orientation", oriented));

            if (observable)
                run_observable(rep);
            if (intersection)
                run_intersection(rep);
            if (conjugate)
            {
                geo::ConjugateOptions co;
                co.ds = ds;
                co.max_length = conj_max_length;
                const auto t = geo::conjugate_time(m, detail::to_vec(conj_x0), detail::to_vec(conj_dir), co);
                rep.results["conjugate_time"] = detail::opt_number(t);
                if (conj_expected)
                    rep.verdicts.push_back(
                        judge("conjugate_time", t ? *t : std::nan(""), *conj_expected, conj_tol, Compare::RelLe));
            }
        }

    private:
        void run_observable(Report& rep) const
        {
            geo::ObservableOptions oo;
            oo.T = obs_T;
            oo.epsilon = obs_epsilon;
            oo.ds = ds;
            const auto r = geo::observable_point(metric, detail::to_vec(obs_x0), oo);
            rep.results["observable"] = {{"q", detail::to_std(r.q)},
                                         {"length", r.length},
                                         {"foot", detail::to_std(r.foot)},
                                         {"exit_point", detail::to_std(r.exit_point)},
                                         {"certified", r.certified},
                                         {"nontrapping", {{"samples", r.nontrapping.samples},
                                                          {"exited", r.nontrapping.exited},
                                                          {"max_length", r.nontrapping.max_length}}}};
            rep.verdicts.push_back(flag("observable_certified", r.certified));
            auto& t = detail::path_table(rep, "observable_gamma1", metric.dim);
            detail::add_samples(t, r.gamma1);
            auto& t2 = detail::path_table(rep, "observable_gamma2", metric.dim);
            detail::add_samples(t2, r.gamma2);
        }

        /// Launches the four quadruple directions backwards from q, traces them
        /// forward again and asks regular_intersection to find q.
        void run_intersection(Report& rep) const
        {
            const auto& m = metric;
            const auto quad = build_quadruple(int_phi, int_theta);
            const geo::Vec q = detail::to_vec(int_q);
            std::vector<geo::BicharPath> paths(4);
            parallel_for(4, [&](std::size_t j) {
                geo::Vec z(4);
                for (int i = 0; i < 4; ++i)
                    z[i] = quad.base[j][static_cast<std::size_t>(i)];
                z.tail(3) /= m.speed.value(q[0], q.tail(3));
                const auto back = geo::trace_bichar(m, q, -z, ds, int_back, false);
                paths[j] = geo::trace_bichar(m, back.back().x, -back.back().zeta, ds, 2 * int_back, false);
            });
            const auto r = geo::regular_intersection(paths);
            const double err = (r.q - q).norm();
            rep.results["intersection"] = {{"q", detail::to_std(r.q)},
                                           {"params", r.params},
                                           {"residual", r.residual},
                                           {"independent", r.independent},
                                           {"singular_values", detail::to_std(r.singular_values)},
                                           {"error", err}};
            rep.verdicts.push_back(judge("intersection_error", err, 0, int_tol, Compare::Le));
            rep.verdicts.push_back(flag("intersection_independent", r.independent));
        }
    };

    struct Flowout
    {
        struct FanSpec
        {
            std::vector<double> x0, direction;
            double s0 = 0.02;
            int fan_count = 9;
        };

        geo::Metric metric;
        std::vector<FanSpec> fans;
        double ds = 1e-3, max_s = 2.0, aperture_cap = 0.05;
        std::string expect = "none";
        bool spread = false;
        double spread_s = 1.0, spread_tol = 0.02;
        std::vector<double> spread_s0{0.04, 0.02, 0.01};
        bool cut = false;

        static Flowout parse(Params& p)
        {
            Flowout c;
            c.metric = detail::parse_metric(p);
            const auto d = static_cast<std::size_t>(c.metric.dim);
            c.aperture_cap = p.positive("aperture_cap", c.aperture_cap, 1.0);
            Json specs = Json::array();
            for (auto& fp : p.children("fans", 1))
            {
                FanSpec f;
                f.x0 = fp.numbers("x0", {}, d + 1, d + 1);
                f.direction = fp.numbers("direction", {}, d, d);
                if (detail::to_vec(f.direction).norm() == 0)
                    fp.bad("direction", "must be nonzero");
                f.s0 = fp.positive("s0", f.s0);
                f.fan_count = fp.integer("fan_count", f.fan_count, 1, 1000);
                specs.push_back(fp.done());
                c.fans.push_back(std::move(f));
            }
            p.put("fans", specs);
            c.ds = p.positive("ds", c.ds);
            c.max_s = p.positive("max_s", c.max_s);
            c.expect = p.choice("expect", c.expect, {"none", "interior", "exterior"});
            if (c.expect != "none" && (c.fans.size() < 2 || c.metric.dim != 2))
                p.bad("expect", "interiority needs at least two fans in dim = 2");
            auto sp = p.child("spread");
            c.spread = sp.boolean("enabled", c.spread);
            c.spread_s = sp.positive("s", c.spread_s);
            c.spread_s0 = sp.numbers("s0", c.spread_s0, 2);
            c.spread_tol = sp.positive("ratio_tol", c.spread_tol);
            p.put("spread", sp.done());
            c.cut = p.boolean("cut_report", c.cut);
            return c;
        }

        geo::FlowoutConfig config_of(const FanSpec& f, double s0) const
        {
            geo::FlowoutConfig cfg;
            cfg.x0 = detail::to_vec(f.x0);
            cfg.xi0 = geo::null_covector(metric, cfg.x0, detail::to_vec(f.direction));
            cfg.s0 = s0;
            cfg.fan_count = f.fan_count;
            cfg.ds = ds;
            cfg.max_s = max_s;
            cfg.aperture_cap = aperture_cap;
            return cfg;
        }

        void run(Report& rep) const
        {
            const int d = metric.dim;
            std::vector<geo::Fan> traced;
            for (const auto& f : fans)
                traced.push_back(geo::flowout_fan(config_of(f, f.s0), metric));

            std::vector<std::string> cols{"fan", "path", "s", "t"};
            for (int i = 1; i <= d; ++i)
                cols.push_back("x" + std::to_string(i));
            for (int i = 0; i <= d; ++i)
                cols.push_back("z" + std::to_string(i));
            cols.push_back("event");
            auto& tab = rep.table("fans", cols);
            Json summary = Json::array();
            double drift = 0;
            for (std::size_t f = 0; f < traced.size(); ++f)
            {
                for (std::size_t j = 0; j < traced[f].paths.size(); ++j)
                {
                    detail::add_samples(tab, traced[f].paths[j],
                                        {static_cast<long long>(f), static_cast<long long>(j)});
                    drift = std::max(drift, traced[f].paths[j].relative_drift);
                }
                summary.push_back({{"aperture", traced[f].aperture}, {"paths", traced[f].paths.size()}});
            }
            rep.results["fans"] = summary;
            rep.verdicts.push_back(judge("hamiltonian_drift", drift, 0, 1e-8, Compare::Lt));

            if (traced.size() >= 2 && d == 2)
            {
                const auto ir = geo::fan_interiority(traced, metric);
                auto& it = rep.table("intersections", {"fan_a", "fan_b", "path_a", "t", "x1", "x2", "interior"});
                std::size_t inside = 0;
                for (const auto& p : ir.points)
                {
                    it.add({static_cast<long long>(p.fan_a), static_cast<long long>(p.fan_b),
                            static_cast<long long>(p.path_a), p.point[0], p.point[1], p.point[2],
                            static_cast<long long>(p.interior)});
                    inside += p.interior ? 1 : 0;
                }
                rep.results["interiority"] = {
                    {"points", ir.points.size()}, {"interior", inside}, {"all_interior", ir.all_interior}};
                if (expect == "interior")
                    rep.verdicts.push_back(flag("all_intersections_interior", ir.all_interior));
                else if (expect == "exterior")
                    rep.verdicts.push_back(flag("intersections_flagged_exterior", !ir.points.empty() && inside == 0));
            }

            if (spread)
            {
                Json rows = Json::array();
                auto& st = rep.table("spread", {"s0", "spread", "ratio_to_previous"});
                double prev = 0, prev_s0 = 0, worst = 0;
                for (double s0 : spread_s0)
                {
                    const auto fan = geo::flowout_fan(config_of(fans.front(), s0), metric);
                    const double w = geo::fan_spread(fan, spread_s);
                    double ratio = std::nan("");
                    if (prev > 0)
                    {
                        ratio = prev / w;
                        // linear collapse: the spread ratio follows the s0 ratio
                        worst = std::max(worst, std::abs(ratio / (prev_s0 / s0) - 1));
                    }
                    st.add({s0, w, ratio});
                    rows.push_back({{"s0", s0}, {"spread", w}});
                    prev = w;
                    prev_s0 = s0;
                }
                rep.results["spread"] = rows;
                rep.verdicts.push_back(judge("spread_linear_in_s0", worst, 0, spread_tol, Compare::Le));
            }

            if (cut)
            {
                Json reps = Json::array();
                for (const auto& fan : traced)
                {
                    const auto cr = geo::cut_report(metric, fan);
                    Json entry = Json::array(), exit = Json::array();
                    for (std::size_t j = 0; j < cr.entry.size(); ++j)
                    {
                        entry.push_back(detail::number(cr.entry[j]));
                        exit.push_back(detail::number(cr.exit[j]));
                    }
                    reps.push_back({{"first_conjugate_time", detail::opt_number(cr.first_conjugate_time)}, {"entry", entry}, {"exit", exit}});
                }
                rep.results["cut_report"] = reps;
            }
        }
    };
} // namespace qlw::harness

#endif
