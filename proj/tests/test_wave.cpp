#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "qlw/wave/io.hpp"
#include "qlw/wave/solver.hpp"

using namespace qlw;
using namespace qlw::wave;

namespace
{
    constexpr double kPi = std::numbers::pi;

    // p*(t, x) = sin(pi x) sin^2(t) on (0, 1), c = 1
    double exact(double t, double x) { return std::sin(kPi * x) * std::sin(t) * std::sin(t); }

    Array manufactured_source(const Grid& g)
    {
        Array s(g.size());
        for (int n = 0; n <= g.nt(); ++n)
            for (int j = 0; j <= g.nx; ++j)
            {
                const double t = g.t(n), x = g.x(j);
                s[n * g.nodes() + j] = std::sin(kPi * x) * (2 * std::cos(2 * t) + kPi * kPi * std::sin(t) * std::sin(t));
            }
        return s;
    }

    struct Errors
    {
        double field = 0;
        double trace = 0;
    };

    Errors manufactured_errors(int nx)
    {
        const auto g = Grid::uniform(nx, 1.0, 0.5);
        const auto f = solve_linear(g, constant_speed(g), manufactured_source(g), BoundaryTrace::zero(g));
        const auto tr = dn_trace(f);
        Errors e;
        for (int n = 0; n <= g.nt(); ++n)
        {
            for (int j = 0; j <= g.nx; ++j)
                e.field = std::max(e.field, std::abs(f.at(n, j) - exact(g.t(n), g.x(j))));
            const double dn = -kPi * std::sin(g.t(n)) * std::sin(g.t(n)); // both ends
            e.trace = std::max({e.trace, std::abs(tr.left[n] - dn), std::abs(tr.right[n] - dn)});
        }
        return e;
    }

    Array random_smooth_field(const Grid& g, unsigned seed)
    {
        std::mt19937 rng(seed);
        std::uniform_real_distribution<double> u(-1, 1);
        const double a = u(rng), b = u(rng), w = 2 + u(rng);
        Array v(g.size());
        for (int n = 0; n <= g.nt(); ++n)
            for (int j = 0; j <= g.nx; ++j)
            {
                const double t = g.t(n), x = g.x(j);
                v[n * g.nodes() + j] = 0.3 * t * t * std::sin(w * t + a) * std::cos(kPi * x + b);
            }
        return v;
    }

    BoundaryTrace picard_data(const Grid& g, double a) { return pulse_trace(g, Side::Left, 0.0, 0.4, a); }
} // namespace

TEST(SolveLinear, ZeroDataGivesZero)
{
    const auto g = Grid::uniform(50, 1.0);
    const auto f = solve_linear(g, constant_speed(g), {}, BoundaryTrace::zero(g));
    for (double v : f.values)
        EXPECT_EQ(v, 0.0);
}

TEST(SolveLinear, ManufacturedSolutionSecondOrder)
{
    const Errors e200 = manufactured_errors(200), e400 = manufactured_errors(400), e800 = manufactured_errors(800);
    EXPECT_NEAR(std::log2(e200.field / e400.field), 2.0, 0.2);
    EXPECT_NEAR(std::log2(e400.field / e800.field), 2.0, 0.2);
    EXPECT_NEAR(std::log2(e200.trace / e400.trace), 2.0, 0.2);
    EXPECT_NEAR(std::log2(e400.trace / e800.trace), 2.0, 0.2);
}

TEST(SolveLinear, PulseArrivesAtUnitSpeed)
{
    const auto g = Grid::uniform(400, 1.0, 0.5);
    const double width = 0.2;
    const auto f = solve_linear(g, constant_speed(g), {}, pulse_trace(g, Side::Left, 0.0, width));
    const int jm = g.nx / 2;
    int peak = 0;
    for (int n = 0; n <= g.nt(); ++n)
        if (f.at(n, jm) > f.at(peak, jm))
            peak = n;
    const double arrival = g.t(peak) - width / 2;
    EXPECT_NEAR(arrival, 0.5, g.dx());
}

TEST(SolveLinear, CausalityIsBitwise)
{
    const auto g = Grid::uniform(80, 1.0);
    const auto c = constant_speed(g, 0.8);
    Array s = manufactured_source(g);
    auto bc = pulse_trace(g, Side::Right, 0.05, 0.3);
    const auto ref = solve_linear(g, c, s, bc);
    const int n0 = g.nt() / 2;
    for (int n = n0; n <= g.nt(); ++n)
    {
        for (int j = 0; j <= g.nx; ++j)
            s[n * g.nodes() + j] += 0.37 * j;
        bc.left[n] += 1.5;
    }
    bc.left[n0] -= 1.5; // boundary values act on their own level
    const auto pert = solve_linear(g, c, s, bc);
    for (int n = 0; n <= n0; ++n)
        for (int j = 0; j <= g.nx; ++j)
            ASSERT_EQ(pert.at(n, j), ref.at(n, j)) << n << " " << j;
}

TEST(SolveLinear, EnergyConservedAfterDataSupport)
{
    const auto g = Grid::uniform(200, 2.0, 0.5);
    const auto f = solve_linear(g, constant_speed(g), {}, pulse_trace(g, Side::Left, 0.0, 0.2));
    const int start = static_cast<int>(0.25 / g.dt);
    const double e0 = discrete_energy(f, start);
    EXPECT_GT(e0, 0.0);
    for (int n = start; n < g.nt(); ++n)
        EXPECT_LE(discrete_energy(f, n), e0 * (1 + 1e-12) + g.dt * g.dt);
}

TEST(SolveLinear, Errors)
{
    auto g = Grid::uniform(50, 1.0, 0.5);
    g.dt *= 2.5;
    g.T = g.dt * 10;
    try
    {
        solve_linear(g, constant_speed(g), {}, BoundaryTrace::zero(g));
        FAIL();
    }
    catch (const Error& e)
    {
        EXPECT_EQ(e.kind(), ErrorKind::CflViolation);
    }
    const auto ok = Grid::uniform(50, 1.0, 0.5);
    Array huge(ok.size(), 1e308);
    try
    {
        solve_linear(ok, constant_speed(ok), huge, BoundaryTrace::zero(ok));
        FAIL();
    }
    catch (const Error& e)
    {
        EXPECT_EQ(e.kind(), ErrorKind::NonFiniteField);
    }
}

TEST(DnTrace, SignOfOutwardNormal)
{
    const auto g = Grid::uniform(20, 0.5);
    WaveField f(g, constant_speed(g));
    for (int n = 0; n <= g.nt(); ++n)
        for (int j = 0; j <= g.nx; ++j)
            f.at(n, j) = g.x(j);
    const auto tr = dn_trace(f);
    for (int n = 0; n <= g.nt(); ++n)
    {
        EXPECT_NEAR(tr.left[n], -1.0, 1e-12);
        EXPECT_NEAR(tr.right[n], 1.0, 1e-12);
    }
    const auto z = dn_trace(WaveField(g, constant_speed(g)));
    EXPECT_EQ(trace_norm(z), 0.0);
}

TEST(ZmNorm, BasicProperties)
{
    const auto g = Grid::uniform(100, 1.0, 0.5);
    WaveField f(g, constant_speed(g));
    EXPECT_EQ(zm_norm(f, 2), 0.0);
    for (int n = 0; n <= g.nt(); ++n)
        for (int j = 0; j <= g.nx; ++j)
            f.at(n, j) = g.t(n) * std::sin(kPi * g.x(j));
    const double z1 = zm_norm(f, 1);
    EXPECT_NEAR(z1, 1.0, 1e-3);
    WaveField h = f;
    for (auto& v : h.values)
        v *= -3.0;
    EXPECT_NEAR(zm_norm(h, 1), 3 * z1, 1e-12);
    EXPECT_THROW(zm_norm(f, 3), Error);
}

TEST(EvalNonlinearity, ZeroField)
{
    const auto g = Grid::uniform(10, 1.0);
    const Array z(g.size(), 0.0);
    const auto beta = NonlinearityProfile::lower(0.5, 0.2, 0.1);
    for (double v : eval_nonlinearity(beta, z, g, NonlinearForm::Series))
        EXPECT_EQ(v, 0.0);
    for (double v : eval_nonlinearity(beta, z, g, NonlinearForm::Factored))
        EXPECT_EQ(v, 0.0);
}

TEST(EvalNonlinearity, TimeSquared)
{
    const auto g = Grid::uniform(10, 1.0, 0.5);
    Array p(g.size());
    for (int n = 0; n <= g.nt(); ++n)
        for (int j = 0; j <= g.nx; ++j)
            p[n * g.nodes() + j] = g.t(n) * g.t(n);
    const double b2 = 0.7;
    const NonlinearityProfile beta{{2, b2}};
    const auto fs = eval_nonlinearity(beta, p, g, NonlinearForm::Series);
    const auto ff = eval_nonlinearity(beta, p, g, NonlinearForm::Factored);
    for (int n = 1; n < g.nt(); ++n)
    {
        const double t = g.t(n), expected = 12 * b2 * t * t;
        EXPECT_NEAR(ff[n * g.nodes() + 3], expected, 1e-10);
        // centred second difference of t^4 carries exactly 2 dt^2
        EXPECT_NEAR(fs[n * g.nodes() + 3], expected + 2 * b2 * g.dt * g.dt, 1e-9);
    }
}

TEST(EvalNonlinearity, FormsAgreeUnderRefinement)
{
    const auto beta = NonlinearityProfile::lower(0.5, -0.3, 0.2);
    double prev = 0;
    for (int nx : {50, 100, 200})
    {
        const auto g = Grid::uniform(nx, 1.0, 0.5);
        const Array p = random_smooth_field(g, 3);
        const auto fs = eval_nonlinearity(beta, p, g, NonlinearForm::Series);
        const auto ff = eval_nonlinearity(beta, p, g, NonlinearForm::Factored);
        double err = 0;
        for (int n = 1; n < g.nt(); ++n) // interior levels
            for (int j = 0; j <= g.nx; ++j)
                err = std::max(err, std::abs(fs[n * g.nodes() + j] - ff[n * g.nodes() + j]));
        if (prev > 0)
        {
            EXPECT_NEAR(std::log2(prev / err), 2.0, 0.2);
        }
        prev = err;
    }
}

TEST(SolveNonlinear, ZeroDataOneIteration)
{
    const auto g = Grid::uniform(50, 1.0);
    const auto s = solve_nonlinear(g, constant_speed(g), NonlinearityProfile::lower(0.5, 0, 0), BoundaryTrace::zero(g));
    EXPECT_EQ(s.report.iterations, 1);
    EXPECT_TRUE(s.report.converged);
    for (double v : s.field.values)
        EXPECT_EQ(v, 0.0);
}

TEST(SolveNonlinear, LinearCaseMatchesLiftedSolve)
{
    const auto g = Grid::uniform(100, 1.0, 0.5);
    const auto c = constant_speed(g);
    const auto f = picard_data(g, 0.3);
    const auto s = solve_nonlinear(g, c, NonlinearityProfile{}, f);
    EXPECT_EQ(s.report.iterations, 1);
    const Array fl = lift(f, g);
    Array src = d_tt(fl, g);
    for (auto& v : src)
        v = -v;
    const auto q = solve_linear(g, c, src, BoundaryTrace::zero(g));
    const auto direct = solve_linear(g, c, {}, f);
    for (std::size_t i = 0; i < fl.size(); ++i)
    {
        ASSERT_EQ(s.field.values[i], q.values[i] + fl[i]);
        ASSERT_NEAR(s.field.values[i], direct.values[i], 1e-13);
    }
}

TEST(SolveNonlinear, PicardContractionFixture)
{
    const auto g = Grid::uniform(200, 2.0, 0.5);
    const auto c = constant_speed(g);
    const NonlinearityProfile beta{{2, 0.5}};
    NonlinearOptions opt;
    const double a = kDefaultSmallness;
    const auto s = solve_nonlinear(g, c, beta, picard_data(g, a), opt);
    const auto& r = s.report;
    ASSERT_TRUE(r.converged);
    EXPECT_LE(r.iterations, 30);
    EXPECT_LT(r.contraction_estimate, 1.0);
    for (std::size_t k = 1; k < r.residuals.size(); ++k)
        EXPECT_LT(r.residuals[k], r.residuals[k - 1]);
    EXPECT_LE(equation_residual(s.field, beta), 10 * opt.tol);
    try
    {
        solve_nonlinear(g, c, beta, picard_data(g, 2 * a), opt);
        FAIL();
    }
    catch (const Error& e)
    {
        EXPECT_EQ(e.kind(), ErrorKind::NoConvergence);
    }
}

TEST(SolveNonlinear, ContractionPropertyOverAmplitudes)
{
    const auto g = Grid::uniform(100, 2.0, 0.5);
    const NonlinearityProfile beta{{2, 0.5}};
    std::mt19937 rng(41);
    std::uniform_real_distribution<double> ua(0.002, kDefaultSmallness);
    double prev_rho = 0, prev_a = 0;
    std::vector<std::pair<double, double>> runs;
    for (int i = 0; i < 6; ++i)
    {
        const double a = ua(rng);
        const auto s = solve_nonlinear(g, constant_speed(g), beta, picard_data(g, a));
        EXPECT_LT(s.report.contraction_estimate, 1.0);
        runs.emplace_back(a, s.report.contraction_estimate);
    }
    std::sort(runs.begin(), runs.end());
    for (auto [a, rho] : runs)
    {
        if (prev_a > 0)
        {
            EXPECT_GE(rho, prev_rho * 0.9) << a; // contraction worsens with amplitude
        }
        prev_a = a;
        prev_rho = rho;
    }
}

TEST(WaveIo, BinaryRoundTripAndCsv)
{
    const auto g = Grid::uniform(30, 0.5, 0.5);
    const auto f = solve_linear(g, constant_speed(g), {}, pulse_trace(g, Side::Left, 0, 0.2));
    const auto dir = std::filesystem::temp_directory_path();
    const auto bin = (dir / "qlw_field.bin").string(), csv = (dir / "qlw_field.csv").string();
    write_binary(f, bin);
    const auto back = read_binary(bin);
    EXPECT_EQ(back.grid.nx, g.nx);
    EXPECT_EQ(back.grid.nt(), g.nt());
    EXPECT_EQ(back.grid.dt, g.dt);
    EXPECT_EQ(back.values, f.values);
    EXPECT_EQ(std::filesystem::file_size(bin), 4 + 12 + 24 + 8 * f.values.size());
    write_csv(f, csv);
    std::ifstream is(csv);
    std::string line;
    int rows = 0;
    while (std::getline(is, line))
        ++rows;
    EXPECT_EQ(rows, g.nt() + 2);
    EXPECT_THROW(read_binary((dir / "qlw_missing.bin").string()), Error);
    std::remove(bin.c_str());
    std::remove(csv.c_str());
}
