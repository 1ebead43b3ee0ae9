#ifndef QLW_HARNESS_ALGEBRA_RUNS_HPP
#define QLW_HARNESS_ALGEBRA_RUNS_HPP

// series-check, recover-lower and recover-higher experiments.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "qlw/harness/params.hpp"
#include "qlw/harness/report.hpp"
#include "qlw/interaction.hpp"
#include "qlw/laurent.hpp"
#include "qlw/parallel.hpp"
#include "qlw/recovery.hpp"

namespace qlw::harness
{
    namespace detail
    {
        template <typename T>
        double rel_err(const T& a, const T& b)
        {
            using std::abs;
            const T den = abs(b) > T(0) ? abs(b) : T(1);
            return to_double(abs(a - b) / den);
        }

        inline Json fit_json(const LaurentFit& f)
        {
            Json j;
            Json c = Json::object();
            for (std::size_t k = 0; k < f.orders.size(); ++k)
                c[std::to_string(f.orders[k])] = f.coefficients[k];
            j["coefficients"] = c;
            j["residual"] = f.residual;
            j["condition"] = f.condition;
            return j;
        }
    } // namespace detail

    struct SeriesCheck
    {
        double s_min = 1e-4, s_max = 1e-2;
        int points = 40;
        double phi = 0.4;
        double rel_tol = 1e-3;
        std::vector<int> fit_orders{-3, -2, -1, 0, 1}; // the O(s) term biases the -1 fit otherwise
        bool identities = true;
        double theta_min = 1e-3, theta_max = 0.5;
        int theta_points = 25;
        double identity_tol = 1e-11;
        bool determinant = true;
        double theta1 = 1e-2, r = 0.05, determinant_tol = 0.15;

        static SeriesCheck parse(Params& p)
        {
            SeriesCheck c;
            c.s_min = p.positive("s_min", c.s_min, 0.5);
            c.s_max = p.positive("s_max", c.s_max, 0.5);
            c.points = p.integer("points", c.points, 6, 10000);
            c.phi = p.number("phi", c.phi);
            c.rel_tol = p.positive("rel_tol", c.rel_tol);
            c.fit_orders = p.integers("fit_orders", c.fit_orders, -8, 8, 3);
            for (int k : {-3, -2, -1})
                if (std::find(c.fit_orders.begin(), c.fit_orders.end(), k) == c.fit_orders.end())
                    p.bad("fit_orders", "must contain -3, -2 and -1");
            if (!(c.s_min < c.s_max))
                p.bad("s_max", "must exceed s_min");
            auto id = p.child("identities");
            c.identities = id.boolean("enabled", c.identities);
            c.theta_min = id.positive("theta_min", c.theta_min, 1.5);
            c.theta_max = id.positive("theta_max", c.theta_max, 1.5);
            c.theta_points = id.integer("points", c.theta_points, 2, 10000);
            c.identity_tol = id.positive("rel_tol", c.identity_tol);
            if (!(c.theta_min < c.theta_max))
                id.bad("theta_max", "must exceed theta_min");
            p.put("identities", id.done());
            auto det = p.child("determinant");
            c.determinant = det.boolean("enabled", c.determinant);
            c.theta1 = det.positive("theta1", c.theta1, 1.5);
            c.r = det.positive("r", c.r, 1.0);
            c.determinant_tol = det.positive("rel_tol", c.determinant_tol);
            if (!(c.r < 1))
                det.bad("r", "must lie in (0, 1)");
            p.put("determinant", det.done());
            return c;
        }

        void run(Report& rep) const
        {
            using X = Extended;
            const auto grid = log_grid(s_min, s_max, points);
            std::vector<LaurentSample> cs(grid.size()), ds(grid.size()), gs(grid.size());
            parallel_for(grid.size(), [&](std::size_t i) {
                const X s(grid[i]);
                const auto q = build_quadruple<X>(X(phi), 2 * asin(s));
                const X c = coeff_C(q), d = coeff_D(q);
                cs[i] = {grid[i], to_double(c)};
                ds[i] = {grid[i], to_double(d)};
                gs[i] = {grid[i], to_double(c + X(4) / 3 * d)};
            });
            const auto fc = laurent_coeffs(cs, fit_orders);
            const auto fd = laurent_coeffs(ds, fit_orders);
            const auto fg = laurent_coeffs(gs, fit_orders);
            rep.results["series"] = {{"c", detail::fit_json(fc)},
                                     {"d", detail::fit_json(fd)},
                                     {"c_plus_four_thirds_d", detail::fit_json(fg)}};

            auto& tab = rep.table("series", {"quantity", "order", "fitted", "expected", "rel_err"});
            auto check = [&](const std::string& q, const LaurentFit& f, int order, double expected) {
                const double v = f.coefficient(order);
                const double err = std::abs(v - expected) / std::abs(expected);
                tab.add({q, static_cast<long long>(order), v, expected, err});
                rep.verdicts.push_back(
                    judge(q + "[" + std::to_string(order) + "]", v, expected, rel_tol, Compare::RelLe));
            };
            check("c", fc, -3, -2.0);
            check("c", fc, -2, 14.0);
            check("c", fc, -1, 10.0);
            check("d", fd, -3, 1.5);
            check("d", fd, -2, -10.5);
            check("d", fd, -1, -2.25);
            check("c+4/3d", fg, -1, 7.0);

            if (identities)
                run_identities(rep);
            if (determinant)
            {
                const auto d = recovery_determinant<X>(X(theta1), X(r));
                rep.results["determinant"] = {{"theta1", theta1}, {"r", r}, {"det", d.det}, {"leading", d.leading},
                                              {"ratio", d.det / d.leading}};
                rep.verdicts.push_back(flag("determinant_nonzero", d.det != 0.0 && std::isfinite(d.det)));
                rep.verdicts.push_back(
                    judge("determinant_vs_leading", d.det / d.leading, 1.0, determinant_tol, Compare::RelLe));
            }
        }

    private:
        void run_identities(Report& rep) const
        {
            using X = Extended;
            static const char* names[] = {"S23=-1/sin^2",  "R234=1/(2cos(cos-1))", "S12=S13",        "S24=S34",
                                          "R124=R134",      "C2 grouping",          "D1 grouping"};
            constexpr int kIds = 7;
            const auto thetas = log_grid(theta_min, theta_max, theta_points);
            std::vector<std::array<std::array<double, 3>, kIds>> rows(thetas.size());
            parallel_for(thetas.size(), [&](std::size_t i) {
                const X th(thetas[i]);
                const auto q = build_quadruple<X>(X(phi), th);
                const RatioTable<X> t(q.parts);
                const X S12 = t.S[0][1], S13 = t.S[0][2], S14 = t.S[0][3], S23 = t.S[1][2], S24 = t.S[1][3],
                        S34 = t.S[2][3];
                const X cm1 = -2 * sin(th / 2) * sin(th / 2);
                const std::array<std::pair<X, X>, kIds> pairs{{
                    {S23, -1 / (sin(th) * sin(th))},
                    {t.R[1][2][3], 1 / (2 * cos(th) * cm1)},
                    {S12, S13},
                    {S24, S34},
                    {t.R[0][1][3], t.R[0][2][3]},
                    {coeff_C_split(q).second, 8 * (2 * S12 * S34 + S14 * S23)},
                    {coeff_D_split(q).first, 12 * (2 * S12 + S14 + S23 + 2 * S24)},
                }};
                for (int k = 0; k < kIds; ++k)
                    rows[i][k] = {to_double(pairs[k].first), to_double(pairs[k].second),
                                  detail::rel_err(pairs[k].first, pairs[k].second)};
            });
            auto& tab = rep.table("identities", {"identity", "theta", "lhs", "rhs", "rel_err"});
            Json worst = Json::object();
            for (int k = 0; k < kIds; ++k)
            {
                double m = 0;
                for (std::size_t i = 0; i < thetas.size(); ++i)
                {
                    tab.add({std::string(names[k]), thetas[i], rows[i][k][0], rows[i][k][1], rows[i][k][2]});
                    m = std::max(m, rows[i][k][2]);
                }
                worst[names[k]] = m;
                rep.verdicts.push_back(judge(std::string("identity ") + names[k], m, 0, identity_tol, Compare::Le));
            }
            rep.results["identities"] = {{"theta_min", theta_min}, {"theta_max", theta_max}, {"max_rel_err", worst}};
        }
    };

    struct RecoverLower
    {
        std::array<double, 3> beta{0.3, -1.2, 2.5};
        double theta1 = 1e-2, r = 0.05, phi = 0.0;
        int random_profiles = 50;
        double beta2_min = 0.05, beta2_max = 2.0, beta_max = 3.0;
        double tol = 1e-8;
        bool three_wave = true;
        double tw_beta3 = 1.7, tw_beta4 = -0.8, tw_theta = 0.1, tw_phi = 0.5;

        static RecoverLower parse(Params& p)
        {
            RecoverLower c;
            const auto b = p.numbers("beta", {c.beta[0], c.beta[1], c.beta[2]}, 3, 3);
            c.beta = {b[0], b[1], b[2]};
            c.theta1 = p.positive("theta1", c.theta1, 1.5);
            c.r = p.positive("r", c.r, 1.0);
            if (!(c.r < 1))
                p.bad("r", "must lie in (0, 1)");
            c.phi = p.number("phi", c.phi);
            c.random_profiles = p.integer("random_profiles", c.random_profiles, 0, 100000);
            c.beta2_min = p.positive("beta2_min", c.beta2_min);
            c.beta2_max = p.positive("beta2_max", c.beta2_max);
            if (!(c.beta2_min <= c.beta2_max))
                p.bad("beta2_max", "must not be below beta2_min");
            c.beta_max = p.number("beta_max", c.beta_max, 0.0);
            c.tol = p.positive("tol", c.tol);
            auto tw = p.child("three_wave");
            c.three_wave = tw.boolean("enabled", c.three_wave);
            c.tw_beta3 = tw.number("beta3", c.tw_beta3);
            c.tw_beta4 = tw.number("beta4", c.tw_beta4);
            c.tw_theta = tw.positive("theta", c.tw_theta, 1.5);
            c.tw_phi = tw.number("phi", c.tw_phi);
            p.put("three_wave", tw.done());
            return c;
        }

        void run(Report& rep, std::uint64_t seed) const
        {
            using X = Extended;
            const auto qs = recovery_scheme<X>(X(theta1), X(r), X(phi));
            auto recover = [&](const std::array<double, 3>& b) {
                const auto prof = NonlinearityProfile::lower(b[0], b[1], b[2]);
                const std::array<Measurement<X>, 3> ms{measurement_oracle(prof, qs[0], "k0"),
                                                      measurement_oracle(prof, qs[1], "k1"),
                                                      measurement_oracle(prof, qs[2], "k2")};
                return recover_lower(ms);
            };
            auto err = [](const std::array<double, 3>& b, const LowerRecovery& rc) {
                return std::max({std::abs(rc.beta2 - b[0]), std::abs(rc.beta3 - b[1]), std::abs(rc.beta4 - b[2])});
            };
            auto& tab = rep.table("recover", {"case", "beta2", "beta3", "beta4", "rec_beta2", "rec_beta3",
                                              "rec_beta4", "max_abs_err", "three_wave"});
            auto row = [&](const std::string& name, const std::array<double, 3>& b, const LowerRecovery& rc) {
                tab.add({name, b[0], b[1], b[2], rc.beta2, rc.beta3, rc.beta4, err(b, rc),
                         static_cast<long long>(rc.used_three_wave)});
            };

            const auto fx = recover(beta);
            row("fixture", beta, fx);
            rep.results["fixture"] = {{"beta", beta},
                                      {"recovered", {fx.beta2, fx.beta3, fx.beta4}},
                                      {"max_abs_err", err(beta, fx)},
                                      {"condition", fx.condition}};
            rep.verdicts.push_back(judge("fixture_max_abs_err", err(beta, fx), 0, tol, Compare::Le));

            if (random_profiles > 0)
            {
                std::mt19937_64 rng(seed);
                std::uniform_real_distribution<double> mag(beta2_min, beta2_max), other(-beta_max, beta_max);
                std::bernoulli_distribution sign(0.5);
                std::vector<std::array<double, 3>> profiles(static_cast<std::size_t>(random_profiles));
                for (auto& b : profiles)
                {
                    const double m = mag(rng);
                    b[0] = sign(rng) ? m : -m;
                    b[1] = other(rng);
                    b[2] = other(rng);
                }
                std::vector<LowerRecovery> out(profiles.size());
                parallel_for(profiles.size(), [&](std::size_t i) { out[i] = recover(profiles[i]); });
                double worst = 0;
                for (std::size_t i = 0; i < profiles.size(); ++i)
                {
                    row("random_" + std::to_string(i), profiles[i], out[i]);
                    worst = std::max(worst, err(profiles[i], out[i]));
                }
                rep.results["random"] = {{"count", random_profiles}, {"max_abs_err", worst}};
                rep.verdicts.push_back(judge("random_max_abs_err", worst, 0, tol, Compare::Le));
            }

            if (three_wave)
            {
                const std::array<double, 3> b{0.0, tw_beta3, tw_beta4};
                const auto prof = NonlinearityProfile::lower(0.0, tw_beta3, tw_beta4);
                const auto q = build_quadruple<X>(X(tw_phi), X(tw_theta));
                const auto tw = three_wave_measurement(prof, std::array<Covector4<X>, 3>{q.parts[0], q.parts[1],
                                                                                        q.parts[3]});
                const std::array<Measurement<X>, 3> ms{measurement_oracle(prof, qs[0], "k0"),
                                                      measurement_oracle(prof, qs[1], "k1"),
                                                      measurement_oracle(prof, qs[2], "k2")};
                const auto rc = recover_lower(ms, tw);
                row("three_wave", b, rc);
                rep.results["three_wave"] = {{"beta", b},
                                             {"recovered", {rc.beta2, rc.beta3, rc.beta4}},
                                             {"measurement", to_double(tw.value)},
                                             {"max_abs_err", err(b, rc)}};
                rep.verdicts.push_back(flag("three_wave_branch_used", rc.used_three_wave));
                rep.verdicts.push_back(judge("three_wave_max_abs_err", err(b, rc), 0, tol, Compare::Le));
            }
        }
    };

    struct RecoverHigher
    {
        std::map<int, double> profile{{5, 2.0}, {6, -0.7}};
        double tol = 0.0;

        static RecoverHigher parse(Params& p)
        {
            RecoverHigher c;
            c.profile = p.coefficients("profile", c.profile);
            for (const auto& [n, b] : c.profile)
                if (n < 5)
                    p.bad("profile", "higher-order recovery starts at order 5");
            if (c.profile.empty())
                p.bad("profile", "needs at least one order");
            c.tol = p.number("tol", c.tol, 0.0);
            return c;
        }

        void run(Report& rep) const
        {
            auto& tab = rep.table("recover_higher", {"order", "beta", "factor", "measurement", "recovered", "abs_err"});
            Json res = Json::array();
            for (const auto& [n, b] : profile)
            {
                const double m = higher_measurement(n, b);
                const double rec = recover_higher(n, m);
                const double e = std::abs(rec - b);
                tab.add({static_cast<long long>(n), b, higher_order_factor(n), m, rec, e});
                res.push_back({{"order", n}, {"beta", b}, {"measurement", m}, {"recovered", rec}, {"abs_err", e}});
                rep.verdicts.push_back(judge("beta" + std::to_string(n) + "_abs_err", e, 0, tol, Compare::Le));
            }
            rep.results["orders"] = res;
        }
    };
} // namespace qlw::harness

#endif
