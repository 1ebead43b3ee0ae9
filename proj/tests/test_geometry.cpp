#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "qlw/geometry/causal.hpp"
#include "qlw/geometry/conjugate.hpp"
#include "qlw/geometry/flowout.hpp"
#include "qlw/geometry/intersection.hpp"
#include "qlw/geometry/observable.hpp"
#include "qlw/lightcone.hpp"

using namespace qlw;
using namespace qlw::geo;

namespace
{
    constexpr double kPi = std::numbers::pi;

    Metric lens(int d, double amplitude, Domain dom = {})
    {
        Metric m;
        m.dim = d;
        m.speed.kind = SpeedKind::Lens;
        m.speed.amplitude = amplitude;
        m.speed.sigma = 0.3;
        m.speed.center = Vec::Constant(d, 0.5);
        m.speed.center[d - 1] = 0.3;
        m.domain = std::move(dom);
        return m;
    }

    Metric fisheye(int d)
    {
        Metric m;
        m.dim = d;
        m.speed.kind = SpeedKind::Fisheye;
        return m;
    }

    ErrorKind kind_of(const std::function<void()>& f)
    {
        try
        {
            f();
        }
        catch (const Error& e)
        {
            return e.kind();
        }
        return ErrorKind::IoError;
    }

    BicharPath null_line(const Metric& m, const Vec& through, const Vec& dir, double before, double after)
    {
        const Vec start = through - before * point(1, dir.normalized());
        return trace_bichar(m, start, null_covector(m, start, dir), 1e-2, before + after, false);
    }

    // independent ray integrator for the shooting oracle: x' = c^2 z, z' = -c grad c |z|^2
    std::pair<Vec, Vec> ray_step(const SpeedModel& c, const Vec& x, const Vec& z, double h)
    {
        auto f = [&](const Vec& xx, const Vec& zz) {
            const auto s = c.eval(0, xx);
            return std::pair<Vec, Vec>{s.c * s.c * zz, -s.c * zz.squaredNorm() * s.grad};
        };
        auto [a1, b1] = f(x, z);
        auto [a2, b2] = f(x + 0.5 * h * a1, z + 0.5 * h * b1);
        auto [a3, b3] = f(x + 0.5 * h * a2, z + 0.5 * h * b2);
        auto [a4, b4] = f(x + h * a3, z + h * b3);
        return {x + h / 6 * (a1 + 2 * a2 + 2 * a3 + a4), z + h / 6 * (b1 + 2 * b2 + 2 * b3 + b4)};
    }

    // signed miss distance of b from the ray at angle a, and the travel time to the closest approach
    std::pair<double, double> miss(const SpeedModel& c, const Vec& a, const Vec& b, double ang, double len)
    {
        Vec x = a, z = vec({std::cos(ang), std::sin(ang)}) / c.value(0, a);
        const double h = 1e-3;
        double best = std::numeric_limits<double>::infinity(), side = 0, time = 0;
        for (double s = 0; s < len; s += h)
        {
            const auto [xn, zn] = ray_step(c, x, z, h);
            const Vec seg = xn - x;
            const double u = std::clamp((b - x).dot(seg) / seg.squaredNorm(), 0.0, 1.0);
            const Vec p = x + u * seg;
            const double dist = (b - p).norm();
            if (dist < best)
            {
                best = dist;
                side = seg[0] * (b - p)[1] - seg[1] * (b - p)[0];
                time = s + u * h;
            }
            x = xn;
            z = zn;
        }
        return {side >= 0 ? best : -best, time};
    }

    double shooting_oracle(const SpeedModel& c, const Vec& a, const Vec& b)
    {
        const double base = std::atan2(b[1] - a[1], b[0] - a[0]);
        const double len = 2.5 * (b - a).norm();
        double best = std::numeric_limits<double>::infinity();
        const int n = 90;
        double prev_ang = base - 1.2;
        auto prev = miss(c, a, b, prev_ang, len);
        for (int i = 1; i <= n; ++i)
        {
            const double ang = base - 1.2 + 2.4 * i / n;
            const auto cur = miss(c, a, b, ang, len);
            if ((prev.first > 0) != (cur.first > 0) && std::abs(prev.first) + std::abs(cur.first) < 0.2)
            {
                double lo = prev_ang, hi = ang;
                const bool lo_pos = prev.first > 0;
                for (int k = 0; k < 40; ++k)
                {
                    const double mid = 0.5 * (lo + hi);
                    ((miss(c, a, b, mid, len).first > 0) == lo_pos ? lo : hi) = mid;
                }
                const auto hit = miss(c, a, b, 0.5 * (lo + hi), len);
                if (std::abs(hit.first) < 1e-6)
                    best = std::min(best, hit.second);
            }
            prev = cur;
            prev_ang = ang;
        }
        return best;
    }
} // namespace

TEST(Bichar, FlatLineInOneDimension)
{
    const auto m = Metric::flat(1);
    const auto p = trace_bichar(m, vec({0, 0.2}), vec({-1, 1}), 1e-2, 1.0, true);
    for (const auto& s : p.samples)
    {
        EXPECT_NEAR(s.x[0], s.s, 1e-14);
        EXPECT_NEAR(s.x[1], 0.2 + s.s, 1e-14);
    }
    EXPECT_LT(p.hamiltonian_drift, 1e-10);
    EXPECT_NEAR(p.s_end(), 1.0, 1e-14);
}

TEST(Bichar, MirrorLawOnTheInterval)
{
    const auto m = Metric::flat(1, Domain::interval(0, 1));
    const auto p = trace_bichar(m, vec({0, 0.2}), vec({-1, 1}), 1e-2, 1.5, true);
    ASSERT_EQ(p.events.size(), 1u);
    const auto& e = p.events[0];
    EXPECT_EQ(e.kind, Mark::Reflection);
    EXPECT_NEAR(e.s, 0.8, 1e-11);
    EXPECT_NEAR(e.x[0], 0.8, 1e-11);
    EXPECT_DOUBLE_EQ(e.reflected[0], e.incident[0]);
    EXPECT_DOUBLE_EQ(e.reflected[1], -e.incident[1]);
    EXPECT_NEAR(p.back().x[1], 0.3, 1e-11);
    EXPECT_NEAR(p.exit_time, 0.8, 1e-11);
}

TEST(Bichar, RejectsNonNullCovectors)
{
    const auto m = Metric::flat(2);
    EXPECT_EQ(kind_of([&] { trace_bichar(m, vec({0, 0, 0}), vec({-1, 2, 0}), 1e-2, 1, true); }),
              ErrorKind::NotLightlike);
}

TEST(Bichar, FourthOrderSelfConvergenceInALens)
{
    const auto m = lens(2, 0.3);
    const Vec x0 = vec({0, 0, 0});
    const Vec z0 = null_covector(m, x0, vec({1, 0.5}));
    const Vec ref = trace_bichar(m, x0, z0, 1e-3, 1.0, false).back().x;
    double prev = 0;
    for (double ds : {0.08, 0.04, 0.02})
    {
        const double err = (trace_bichar(m, x0, z0, ds, 1.0, false).back().x - ref).norm();
        if (prev > 0)
        {
            EXPECT_NEAR(prev / err, 16.0, 3.0) << "ds=" << ds;
        }
        prev = err;
    }
}

TEST(Bichar, ReflectionsInADiskPreserveTheInvariants)
{
    const auto m = lens(2, 0.3, Domain::ball(vec({0.5, 0.3}), 0.8));
    const Vec x0 = vec({0, 0.4, 0.2});
    const auto p = trace_bichar(m, x0, null_covector(m, x0, vec({0.3, 1})), 1e-3, 8.0, true);
    ASSERT_GE(p.events.size(), 3u);
    EXPECT_LT(p.hamiltonian_drift, 1e-8);
    for (const auto& s : p.samples)
    {
        ASSERT_LT(s.zeta[0], 0.0);
    }
    for (const auto& e : p.events)
    {
        ASSERT_EQ(e.kind, Mark::Reflection);
        const Vec nu = m.domain.normal(e.x.tail(2));
        const Vec zi = e.incident.tail(2), zr = e.reflected.tail(2);
        EXPECT_LT((zi - zi.dot(nu) * nu - (zr - zr.dot(nu) * nu)).norm(), 1e-10);
        EXPECT_NEAR(zr.dot(nu), -zi.dot(nu), 1e-10);
        EXPECT_LT(std::abs(m.hamiltonian(e.x, e.reflected)), 1e-10);
        EXPECT_NEAR(std::abs(m.domain.phi(e.x.tail(2))), 0.0, 1e-9);
    }
}

TEST(Bichar, TimeDependentSpeedKeepsOrientationAndNullity)
{
    auto m = lens(2, 0.2, Domain::box(vec({0, 0}), vec({1, 1})));
    m.speed.time_amplitude = 0.2;
    m.speed.time_omega = 3;
    const Vec x0 = vec({0, 0.5, 0.5});
    const auto p = trace_bichar(m, x0, null_covector(m, x0, vec({1, 0.3})), 1e-3, 5.0, true);
    EXPECT_LT(p.hamiltonian_drift, 1e-8);
    for (const auto& s : p.samples)
    {
        ASSERT_LT(s.zeta[0], 0.0);
    }
    EXPECT_GT(std::abs(p.back().zeta[0] + 1), 1e-3); // zeta_0 is no longer conserved
}

TEST(Bichar, GlancingHitsAreRefused)
{
    const auto m = Metric::flat(2, Domain::box(vec({0, 0}), vec({1, 1})));
    const Vec x0 = vec({0, 0.2, 1 - 1e-9});
    EXPECT_EQ(kind_of([&] { trace_bichar(m, x0, null_covector(m, x0, vec({1, 1e-7})), 1e-2, 1, true); }),
              ErrorKind::TangentialHit);
}

TEST(Bichar, EntryAndExitWithoutReflection)
{
    const auto m = Metric::flat(2, Domain::box(vec({0, 0}), vec({1, 1})));
    const Vec x0 = vec({0, -0.5, 0.5});
    const auto p = trace_bichar(m, x0, null_covector(m, x0, vec({1, 0})), 1e-2, 2.0, false);
    ASSERT_EQ(p.events.size(), 2u);
    EXPECT_EQ(p.events[0].kind, Mark::Entry);
    EXPECT_EQ(p.events[1].kind, Mark::Exit);
    EXPECT_NEAR(p.entry_time, 0.5, 1e-11);
    EXPECT_NEAR(p.exit_time, 1.5, 1e-11);
}

TEST(Bichar, CsvHasOneRowPerSample)
{
    const auto m = Metric::flat(1, Domain::interval(0, 1));
    const auto p = trace_bichar(m, vec({0, 0.2}), vec({-1, 1}), 0.1, 1.5, true);
    const auto file = std::filesystem::temp_directory_path() / "qlw_path.csv";
    write_csv(p, file.string());
    std::ifstream is(file);
    std::string line;
    std::getline(is, line);
    EXPECT_EQ(line, "s,t,x1,z0,z1,event");
    std::size_t rows = 0;
    bool marked = false;
    while (std::getline(is, line))
    {
        ++rows;
        marked |= line.ends_with(",reflection");
    }
    EXPECT_EQ(rows, p.samples.size());
    EXPECT_TRUE(marked);
    std::filesystem::remove(file);
}

TEST(Causal, FlatExamples)
{
    const auto m1 = Metric::flat(1);
    EXPECT_EQ(causal_relation(m1, vec({0, 0}), vec({1, 0.5})), Relation::Timelike);
    const auto m2 = Metric::flat(2);
    EXPECT_EQ(causal_relation(m2, vec({0, 0, 0}), vec({1, 1, 0})), Relation::Causal);
    EXPECT_EQ(causal_relation(m2, vec({0, 0, 0}), vec({0.5, 1, 0})), Relation::None);
    EXPECT_EQ(causal_relation(m2, vec({1, 0, 0}), vec({0, 0, 0})), Relation::None);
}

TEST(Causal, TimeDependentSpeedIsUnsupported)
{
    auto m = Metric::flat(1);
    m.speed.time_amplitude = 0.1;
    m.speed.time_omega = 1;
    EXPECT_EQ(kind_of([&] { causal_relation(m, vec({0, 0}), vec({1, 0.5})); }), ErrorKind::UnsupportedMetric);
}

TEST(Causal, OneDimensionalQuadratureIsExact)
{
    // c = (1 + x^2) / 2 gives d(0, x) = 2 atan(x)
    const auto m = fisheye(1);
    for (double x : {0.1, 0.7, 2.0})
    {
        EXPECT_NEAR(spatial_distance(m, vec({0}), vec({x})), 2 * std::atan(x), 1e-13);
    }
}

TEST(Causal, GraphDistanceMatchesShootingOracle)
{
    auto m = lens(2, 0.3, Domain::box(vec({0, 0}), vec({1, 1})));
    m.speed.center = vec({0.5, 0.5});
    m.speed.sigma = 0.15;
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(0.1, 0.9);
    for (int i = 0; i < 10; ++i)
    {
        const Vec a = vec({u(rng), u(rng)}), b = vec({u(rng), u(rng)});
        const double oracle = shooting_oracle(m.speed, a, b);
        ASSERT_TRUE(std::isfinite(oracle));
        EXPECT_NEAR(spatial_distance(m, a, b), oracle, 0.02 * oracle) << "pair " << i;
        DistanceOptions raw;
        raw.refine = false;
        EXPECT_NEAR(spatial_distance(m, a, b, raw), oracle, 0.05 * oracle) << "pair " << i;
    }
}

TEST(Causal, IsAPartialOrderOnSampledPoints)
{
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(0, 1);
    for (const auto& m : {fisheye(1), Metric::flat(2)})
    {
        std::vector<Vec> pts;
        for (int i = 0; i < 14; ++i)
        {
            Vec x(m.dim + 1);
            for (Eigen::Index k = 0; k < x.size(); ++k)
                x[k] = u(rng);
            pts.push_back(x);
        }
        pts.push_back(pts[0]);
        const std::size_t n = pts.size();
        std::vector<std::vector<bool>> le(n, std::vector<bool>(n));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                le[i][j] = causally_precedes(causal_relation(m, pts[i], pts[j]));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
            {
                if (le[i][j] && le[j][i])
                {
                    EXPECT_LT((pts[i] - pts[j]).norm(), 1e-12);
                }
                for (std::size_t k = 0; k < n; ++k)
                    if (le[i][j] && le[j][k])
                    {
                        EXPECT_TRUE(le[i][k]);
                    }
            }
    }
}

TEST(Intersection, ThreeFlatNullLinesThroughTheOrigin)
{
    const auto m = Metric::flat(2);
    const Vec o = vec({0, 0, 0});
    std::vector<BicharPath> paths;
    for (double a : {0.0, 2.0, 4.0})
        paths.push_back(null_line(m, o, vec({std::cos(a), std::sin(a)}), 0.7 + a / 10, 0.5));
    const auto r = regular_intersection(paths);
    EXPECT_LT(r.q.norm(), 1e-12);
    EXPECT_TRUE(r.independent);
    EXPECT_NEAR(r.params[1], 0.9, 1e-12);
}

TEST(Intersection, ParallelLinesDoNotMeet)
{
    const auto m = Metric::flat(2);
    std::vector<BicharPath> paths{null_line(m, vec({0, 0, 0}), vec({1, 0}), 0.5, 0.5),
                                  null_line(m, vec({0, 0, 0.3}), vec({1, 0}), 0.5, 0.5)};
    EXPECT_EQ(kind_of([&] { regular_intersection(paths); }), ErrorKind::NoIntersection);
}

TEST(Intersection, RepeatedDirectionsAreDegenerate)
{
    const auto m = Metric::flat(2);
    const Vec o = vec({0, 0, 0});
    std::vector<BicharPath> paths{null_line(m, o, vec({1, 0}), 0.5, 0.5), null_line(m, o, vec({1, 0}), 0.8, 0.5),
                                  null_line(m, o, vec({0, 1}), 0.5, 0.5)};
    EXPECT_EQ(kind_of([&] { regular_intersection(paths); }), ErrorKind::DegenerateVelocities);
}

TEST(Intersection, QuadrupleDirectionsRoundTripInThreeDimensions)
{
    const auto quad = build_quadruple(0.4, 0.3);
    const Vec q = vec({1.0, 0.45, 0.35, 0.2});
    for (const auto& m : {Metric::flat(3), lens(3, 0.2)})
    {
        std::vector<BicharPath> paths;
        for (const auto& base : quad.base)
        {
            Vec z(4);
            for (int i = 0; i < 4; ++i)
                z[i] = base[i];
            ASSERT_LT(z[0], 0.0);
            // scale to a null covector of this metric at q, then run backwards
            const double c = m.speed.value(q[0], q.tail(3));
            z.tail(3) /= c;
            const auto back = trace_bichar(m, q, -z, 1e-3, 0.6, false);
            paths.push_back(trace_bichar(m, back.back().x, -back.back().zeta, 1e-3, 1.0, false));
        }
        const auto r = regular_intersection(paths);
        EXPECT_LT((r.q - q).norm(), 1e-8);
        EXPECT_TRUE(r.independent);
        for (double s : r.params)
        {
            EXPECT_NEAR(s, 0.6, 1e-6);
        }
    }
}

TEST(Observable, FlatIntervalArithmetic)
{
    const auto m = Metric::flat(1, Domain::interval(0, 1));
    ObservableOptions o;
    o.T = 2;
    o.epsilon = 0.1;
    const auto r = observable_point(m, vec({0.5}), o);
    EXPECT_EQ(r.length, 0.5);
    EXPECT_EQ(r.q[0], 0.6);
    EXPECT_EQ(r.q[1], 0.5);
    EXPECT_EQ(r.foot[0], 0.0);
    EXPECT_NEAR(r.exit_point[0], 1.1, 1e-10);
    EXPECT_NEAR(r.exit_point[1], 0.0, 1e-10);
    EXPECT_TRUE(r.certified);
    EXPECT_TRUE(r.nontrapping.nontrapping());
}

TEST(Observable, PointNextToTheBoundary)
{
    const auto m = Metric::flat(1, Domain::interval(0, 1));
    const auto r = observable_point(m, vec({1 - 1e-6}), {});
    EXPECT_NEAR(r.length, 1e-6, 1e-15);
    EXPECT_NEAR(r.q[0], 0.1, 2e-6);
    EXPECT_EQ(r.foot[0], 1.0);
}

TEST(Observable, SlowMediaAreTrappedOrOutOfTime)
{
    const auto slow = Metric::flat(1, Domain::interval(0, 1), 0.1);
    EXPECT_EQ(kind_of([&] { observable_point(slow, vec({0.5}), {}); }), ErrorKind::Trapped);
    const auto flat = Metric::flat(1, Domain::interval(0, 1));
    ObservableOptions o;
    o.T = 1.05;
    EXPECT_EQ(kind_of([&] { observable_point(flat, vec({0.5}), o); }), ErrorKind::TimeBudget);
}

TEST(Observable, LensInADiskIsCertified)
{
    const auto m = lens(2, 0.3, Domain::ball(vec({0.5, 0.3}), 0.8));
    ObservableOptions o;
    o.T = 4;
    const auto r = observable_point(m, vec({0.6, 0.4}), o);
    EXPECT_TRUE(r.certified);
    EXPECT_NEAR(r.q[0] - r.epsilon, r.length, 1e-14);
    EXPECT_NEAR(r.gamma2.exit_time, 2 * r.length + r.epsilon, 1e-6);
    EXPECT_LT(r.gamma1.hamiltonian_drift, 1e-8);
}

TEST(Conjugate, FlatSpaceHasNone)
{
    EXPECT_FALSE(conjugate_time(Metric::flat(2), vec({0, 0}), vec({1, 0.3})).has_value());
    EXPECT_FALSE(conjugate_time(Metric::flat(3), vec({0, 0, 0}), vec({1, 0.3, 0.2})).has_value());
}

TEST(Conjugate, OneDimensionIsUnsupported)
{
    EXPECT_EQ(kind_of([] { conjugate_time(Metric::flat(1), vec({0}), vec({1})); }), ErrorKind::UnsupportedDim);
}

TEST(Conjugate, FisheyeRefocusesAtPi)
{
    const auto m = fisheye(2);
    const Vec x0 = vec({0.3, 0.1}), dir = vec({0.2, 1});
    const auto t = conjugate_time(m, x0, dir);
    ASSERT_TRUE(t.has_value());
    EXPECT_NEAR(*t, kPi, 1e-4);

    // envelope oracle: neighbouring geodesics cross the central one again
    const double a0 = std::atan2(dir[1], dir[0]), da = 1e-4;
    auto ray = [&](double a) {
        std::vector<Vec> xs;
        Vec x = x0, z = vec({std::cos(a), std::sin(a)}) / m.speed.value(0, x0);
        const double h = 1e-3;
        for (int i = 0; i < 5000; ++i)
        {
            xs.push_back(x);
            std::tie(x, z) = ray_step(m.speed, x, z, h);
        }
        return xs;
    };
    const auto c = ray(a0), p = ray(a0 + da);
    double prev = 0, found = -1;
    for (std::size_t i = 1; i + 1 < c.size(); ++i)
    {
        const Vec tangent = c[i + 1] - c[i - 1];
        const Vec off = p[i] - c[i];
        const double sep = tangent[0] * off[1] - tangent[1] * off[0];
        if (i > 10 && (sep > 0) != (prev > 0))
        {
            found = (i - 1 + prev / (prev - sep)) * 1e-3;
            break;
        }
        prev = sep;
    }
    ASSERT_GT(found, 0);
    EXPECT_NEAR(*t, found, 0.05 * found);
}

TEST(Conjugate, InitialDerivativeScaleIsIrrelevant)
{
    auto m = lens(2, -0.5);
    const Vec x0 = vec({0.5, -0.2}), dir = vec({0.05, 1});
    ConjugateOptions o;
    o.max_length = 3;
    const auto t1 = conjugate_time(m, x0, dir, o);
    o.jacobi_scale = 2;
    const auto t2 = conjugate_time(m, x0, dir, o);
    ASSERT_TRUE(t1.has_value());
    ASSERT_TRUE(t2.has_value());
    EXPECT_NEAR(*t1, *t2, 1e-12);
}

TEST(Conjugate, ThreeDimensionalFisheyeHasADoubleRootAtPi)
{
    const auto t = conjugate_time(fisheye(3), vec({0.2, 0.1, -0.3}), vec({0.3, 1, 0.2}));
    ASSERT_TRUE(t.has_value());
    EXPECT_NEAR(*t, kPi, 1e-3);
}

namespace
{
    FlowoutConfig fan_config(const Vec& x0, const Vec& dir, double s0 = 0.02)
    {
        FlowoutConfig c;
        c.x0 = x0;
        c.xi0 = vec({-1, dir.normalized()[0], dir.normalized()[1]});
        c.s0 = s0;
        c.fan_count = 5;
        c.max_s = 1.8;
        return c;
    }

    // distance of p from the light cone of the apex a
    double cone_residual(const Vec& a, const Vec& p) { return (p.tail(2) - a.tail(2)).norm() - (p[0] - a[0]); }
} // namespace

TEST(Flowout, CrossingFansMeetInsideNearTheCentralCrossing)
{
    const auto m = Metric::flat(2, Domain::box(vec({-0.2, -0.5}), vec({1.5, 0.5})));
    const auto A = flowout_fan(fan_config(vec({0, 0, 0}), vec({1, 0})), m);
    const auto B = flowout_fan(fan_config(vec({0, 1, -1}), vec({0, 1})), m);
    EXPECT_NEAR(B.paths[2].entry_time, 0.5, 1e-10);
    const auto rep = fan_interiority({A, B}, m);
    ASSERT_GE(rep.points.size(), 4u);
    EXPECT_TRUE(rep.all_interior);
    double nearest = 1;
    for (const auto& p : rep.points)
    {
        EXPECT_LT(std::abs(cone_residual(A.config.x0, p.point)), 1e-4);
        EXPECT_LT(std::abs(cone_residual(B.config.x0, p.point)), 1e-4);
        nearest = std::min(nearest, (p.point - vec({1, 1, 0})).norm());
    }
    EXPECT_LT(nearest, 0.05);
}

TEST(Flowout, OutgoingFanMeetsOutsideTheDomain)
{
    const auto m = Metric::flat(2, Domain::box(vec({-0.5, -1.5}), vec({0.98, 1.5})));
    const double beta = 2 * std::atan(0.97);
    const auto A = flowout_fan(fan_config(vec({0, 0, 0}), vec({1, 0})), m);
    const auto B = flowout_fan(fan_config(vec({0, 0.97, -1}), vec({std::cos(beta), std::sin(beta)})), m);
    const auto rep = fan_interiority({A, B}, m);
    ASSERT_FALSE(rep.points.empty());
    for (const auto& p : rep.points)
    {
        EXPECT_FALSE(p.interior);
    }
    EXPECT_FALSE(rep.all_interior);
}

TEST(Flowout, FanCollapsesLinearlyWithTheAperture)
{
    const auto m = lens(2, 0.2);
    const Vec x0 = vec({0, 0, 0});
    double prev = 0;
    for (double s0 : {0.04, 0.02, 0.01})
    {
        auto cfg = fan_config(x0, vec({1, 0.2}), s0);
        cfg.xi0 = null_covector(m, x0, vec({1, 0.2}));
        const auto fan = flowout_fan(cfg, m);
        const double spread = fan_spread(fan, 1.0);
        if (prev > 0)
        {
            EXPECT_NEAR(prev / spread, 2.0, 0.02);
        }
        prev = spread;
    }
}

TEST(Flowout, DirectionsAreNullWithEqualNorm)
{
    const auto m = lens(3, 0.2);
    FlowoutConfig c;
    c.x0 = vec({0, 0.1, 0.2, 0.3});
    const double cx = m.speed.value(0, c.x0.tail(3));
    c.xi0 = vec({-1, 1 / cx, 0, 0});
    c.max_s = 0.2;
    const auto fan = flowout_fan(c, m);
    ASSERT_EQ(fan.zetas.size(), 9u);
    const Vec ref = c.xi0;
    for (const auto& z : fan.zetas)
    {
        EXPECT_LT(std::abs(m.hamiltonian(c.x0, z)), 1e-14);
        EXPECT_NEAR(z.tail(3).norm(), ref.tail(3).norm(), 1e-14);
        EXPECT_LE(cx * (z - ref).norm(), c.s0 * (1 + 1e-12));
    }
}

TEST(Flowout, ApertureCapAndNullityAreEnforced)
{
    const auto m = Metric::flat(2);
    EXPECT_EQ(kind_of([&] { flowout_fan(fan_config(vec({0, 0, 0}), vec({1, 0}), 0.2), m); }), ErrorKind::SchemaError);
    auto c = fan_config(vec({0, 0, 0}), vec({1, 0}));
    c.xi0[0] = -2;
    EXPECT_EQ(kind_of([&] { flowout_fan(c, m); }), ErrorKind::NotLightlike);
}

TEST(Flowout, CutReportRecordsEntryAndExit)
{
    const auto m = Metric::flat(2, Domain::box(vec({-0.2, -0.5}), vec({1.5, 0.5})));
    const auto B = flowout_fan(fan_config(vec({0, 1, -1}), vec({0, 1})), m);
    const auto rep = cut_report(m, B);
    ASSERT_EQ(rep.entry.size(), 5u);
    EXPECT_NEAR(rep.entry[2], 0.5, 1e-10);
    EXPECT_NEAR(rep.exit[2], 1.5, 1e-10);
    EXPECT_FALSE(rep.first_conjugate_time.has_value());
}
