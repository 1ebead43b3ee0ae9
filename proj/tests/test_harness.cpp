#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "qlw/harness/run.hpp"

using namespace qlw::harness;

namespace
{
    Report run_json(const std::string& text, std::vector<std::string> allowed)
    {
        return run(parse_config(Json::parse(text), allowed));
    }

    std::string slurp(const std::filesystem::path& p)
    {
        std::ifstream is(p);
        std::stringstream ss;
        ss << is.rdbuf();
        return ss.str();
    }

    const Verdict* find(const Report& r, const std::string& name)
    {
        for (const auto& v : r.verdicts)
            if (v.name == name)
                return &v;
        return nullptr;
    }

    template <class Fn>
    void expect_schema_error(Fn&& fn)
    {
        try
        {
            fn();
            ADD_FAILURE() << "no error raised";
        }
        catch (const qlw::Error& e)
        {
            EXPECT_EQ(e.kind(), qlw::ErrorKind::SchemaError) << e.what();
        }
    }

    const char* kSeries = R"({"kind": "series-check", "parameters": {"points": 30}})";
    const char* kForwardZero =
        R"({"kind": "forward", "parameters": {"nx": 100, "T": 0.5, "beta": {"2": 0.5}, "data": {"amplitude": 0}}})";
} // namespace

TEST(Schema, UnknownTopLevelKeyIsRejected)
{
    expect_schema_error([] { parse_config(Json::parse(R"({"kind": "trace", "paramters": {}})"), {"trace"}); });
}

TEST(Schema, UnknownParameterIsRejectedBeforeRunning)
{
    expect_schema_error([] { run_json(R"({"kind": "forward", "parameters": {"nx": 100, "bogus": 1}})", {"forward"}); });
}

TEST(Schema, UnknownNestedParameterIsRejected)
{
    expect_schema_error(
        [] { run_json(R"({"kind": "forward", "parameters": {"data": {"amplitud": 0.1}}})", {"forward"}); });
}

TEST(Schema, WrongTypesAreRejected)
{
    expect_schema_error([] { run_json(R"({"kind": "forward", "parameters": {"nx": "200"}})", {"forward"}); });
    expect_schema_error([] { run_json(R"({"kind": "forward", "parameters": {"nx": 200.5}})", {"forward"}); });
    expect_schema_error([] { parse_config(Json::parse(R"({"kind": "forward", "seed": -3})"), {"forward"}); });
    expect_schema_error([] { run_json(R"({"kind": "forward", "parameters": {"beta": {"1": 0.5}}})", {"forward"}); });
}

TEST(Schema, KindMustMatchTheSubcommand)
{
    expect_schema_error([] { parse_config(Json::parse(R"({"kind": "trace"})"), kinds_for("forward")); });
    EXPECT_EQ(parse_config(Json::parse("{}"), kinds_for("recover")).kind, "recover-lower");
    EXPECT_EQ(parse_config(Json::parse(R"({"kind": "recover-higher"})"), kinds_for("recover")).kind,
              "recover-higher");
}

TEST(Schema, CommandLineSeedOverridesTheConfig)
{
    const auto c = parse_config(Json::parse(R"({"kind": "recover-lower", "seed": 4})"), kinds_for("recover"), 11);
    EXPECT_EQ(c.seed, 11u);
}

TEST(Schema, EchoRecordsDefaults)
{
    const auto r = run_json(kSeries, {"series-check"});
    const auto& p = r.config["parameters"];
    EXPECT_EQ(p["points"].get<int>(), 30);
    EXPECT_TRUE(p.contains("s_min"));
    EXPECT_TRUE(p.contains("fit_orders"));
}

TEST(Report, JsonIsByteIdenticalAcrossRunsAndWorkers)
{
    const auto dir = std::filesystem::temp_directory_path() / "qlw_harness_det";
    std::filesystem::remove_all(dir);
    const auto cfg = parse_config(Json::parse(R"({"kind": "recover-lower", "seed": 5})"), kinds_for("recover"));
    emit(run(cfg), dir / "a", 1);
    emit(run(cfg), dir / "b", 8);
    const auto a = slurp(dir / "a" / "report.json");
    EXPECT_FALSE(a.empty());
    EXPECT_EQ(a, slurp(dir / "b" / "report.json"));
    EXPECT_EQ(a.find("wall_time"), std::string::npos);
    EXPECT_NE(slurp(dir / "a" / "timing.json").find("wall_time_s"), std::string::npos);
}

TEST(Report, FailedVerdictFailsTheReport)
{
    Report r;
    r.verdicts.push_back(judge("ok", 1.0, 1.0, 1e-12, Compare::AbsLe));
    EXPECT_TRUE(r.passed());
    r.verdicts.push_back(judge("bad", 2.0, 1.0, 0.5, Compare::AbsLe));
    EXPECT_FALSE(r.passed());
}

TEST(Report, ImpossibleToleranceFailsAVerdict)
{
    const auto r = run_json(R"({"kind": "series-check", "parameters": {"rel_tol": 1e-20}})", {"series-check"});
    EXPECT_FALSE(r.passed());
}

TEST(Report, CompareSemantics)
{
    EXPECT_TRUE(judge("a", 1.05, 1.0, 0.1, Compare::RelLe).pass);
    EXPECT_FALSE(judge("a", 1.2, 1.0, 0.1, Compare::RelLe).pass);
    EXPECT_TRUE(judge("a", 0.5, 0, 1.0, Compare::Lt).pass);
    EXPECT_FALSE(judge("a", 1.0, 0, 1.0, Compare::Lt).pass);
    EXPECT_TRUE(judge("a", 3.0, 0, 2.0, Compare::Ge).pass);
    EXPECT_FALSE(flag("a", false).pass);
}

TEST(Report, NonFiniteValuesStayValidJson)
{
    Report r;
    r.kind = "x";
    r.verdicts.push_back(judge("nan", std::nan(""), 0, 1, Compare::AbsLe));
    EXPECT_FALSE(r.passed());
    const auto text = to_json(r).dump();
    EXPECT_NO_THROW(Json::parse(text));
}

TEST(Report, CsvRoundTripsDoubles)
{
    Table t{"t", {"x", "n", "s"}, {}};
    t.add({0.1, 3LL, std::string("a")});
    EXPECT_EQ(to_csv(t), "x,n,s\n0.1,3,a\n");
    EXPECT_THROW(t.add({1.0}), qlw::Error);
}

TEST(SeriesCheck, PassesAndWritesTheSeriesTable)
{
    const auto r = run_json(kSeries, {"series-check"});
    EXPECT_TRUE(r.passed());
    const Table* series = nullptr;
    for (const auto& t : r.tables)
        if (t.name == "series")
            series = &t;
    ASSERT_NE(series, nullptr);
    EXPECT_EQ(series->columns, (std::vector<std::string>{"quantity", "order", "fitted", "expected", "rel_err"}));
    EXPECT_GE(series->rows.size(), 6u);
}

TEST(Forward, ZeroDataGivesTheZeroSolution)
{
    const auto r = run_json(kForwardZero, {"forward"});
    EXPECT_TRUE(r.passed());
    const auto* v = find(r, "zero_solution");
    ASSERT_NE(v, nullptr);
    EXPECT_EQ(v->value, 0.0);
}
