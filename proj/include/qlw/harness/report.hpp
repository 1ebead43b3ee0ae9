#ifndef QLW_HARNESS_REPORT_HPP
#define QLW_HARNESS_REPORT_HPP

// Experiment reports: config echo, results, verdicts and flat CSV tables.
// report.json is the canonical record and carries no wall-time, so equal
// (config, seed) pairs give byte-identical files; timing goes to timing.json.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <deque>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "qlw/error.hpp"

namespace qlw::harness
{
    using Json = nlohmann::ordered_json;

    enum class Compare
    {
        AbsLe,   // |value - expected| <= tolerance
        RelLe,   // |value - expected| <= tolerance |expected|
        Le,      // value <= tolerance
        Lt,      // value < tolerance
        Ge,      // value >= tolerance
        Flag,    // value != 0
    };

    inline const char* to_string(Compare c)
    {
        switch (c)
        {
        case Compare::AbsLe: return "abs_le";
        case Compare::RelLe: return "rel_le";
        case Compare::Le: return "le";
        case Compare::Lt: return "lt";
        case Compare::Ge: return "ge";
        case Compare::Flag: return "flag";
        }
        return "unknown";
    }

    struct Verdict
    {
        std::string name;
        double value = 0;
        double expected = 0;
        double tolerance = 0;
        Compare compare = Compare::Flag;
        bool pass = false;
    };

    inline Verdict judge(std::string name, double value, double expected, double tolerance, Compare c)
    {
        Verdict v{std::move(name), value, expected, tolerance, c, false};
        switch (c)
        {
        case Compare::AbsLe: v.pass = std::abs(value - expected) <= tolerance; break;
        case Compare::RelLe: v.pass = std::abs(value - expected) <= tolerance * std::abs(expected); break;
        case Compare::Le: v.pass = value <= tolerance; break;
        case Compare::Lt: v.pass = value < tolerance; break;
        case Compare::Ge: v.pass = value >= tolerance; break;
        case Compare::Flag: v.pass = value != 0; break;
        }
        return v;
    }

    inline Verdict flag(std::string name, bool ok) { return judge(std::move(name), ok ? 1 : 0, 1, 0, Compare::Flag); }

    using Cell = std::variant<double, long long, std::string>;

    struct Table
    {
        std::string name; // file stem
        std::vector<std::string> columns;
        std::vector<std::vector<Cell>> rows;

        void add(std::vector<Cell> row)
        {
            if (row.size() != columns.size())
                fail(ErrorKind::SchemaError, "table " + name + " row has the wrong width");
            rows.push_back(std::move(row));
        }
    };

    struct Report
    {
        std::string kind;
        Json config; // {kind, seed, parameters} with every default filled in
        Json results = Json::object();
        std::vector<Verdict> verdicts;
        std::deque<Table> tables; // deque: table() hands out stable references
        std::vector<std::string> artifacts; // extra files written by the runner
        Json error;                         // null or {kind, message}
        double wall_time = 0;

        bool passed() const
        {
            if (!error.is_null())
                return false;
            for (const auto& v : verdicts)
                if (!v.pass)
                    return false;
            return true;
        }

        Table& table(std::string name, std::vector<std::string> columns)
        {
            tables.push_back({std::move(name), std::move(columns), {}});
            return tables.back();
        }
    };

    namespace detail
    {
        /// Shortest text that reads back to the same double.
        inline std::string format_double(double v)
        {
            if (std::isnan(v))
                return "nan";
            if (std::isinf(v))
                return v > 0 ? "inf" : "-inf";
            char buf[32];
            for (int prec = 1; prec <= 17; ++prec)
            {
                std::snprintf(buf, sizeof buf, "%.*g", prec, v);
                if (std::strtod(buf, nullptr) == v)
                    break;
            }
            return buf;
        }

        inline std::string format_cell(const Cell& c)
        {
            if (const auto* d = std::get_if<double>(&c))
                return format_double(*d);
            if (const auto* i = std::get_if<long long>(&c))
                return std::to_string(*i);
            return std::get<std::string>(c);
        }

        inline Json number(double v)
        {
            // JSON has no NaN or infinity
            return std::isfinite(v) ? Json(v) : Json(format_double(v));
        }

        inline void write_text(const std::filesystem::path& p, const std::string& text)
        {
            std::ofstream os(p, std::ios::binary);
            if (!os)
                fail(ErrorKind::IoError, "cannot open " + p.string());
            os << text;
            if (!os)
                fail(ErrorKind::IoError, "cannot write " + p.string());
        }
    } // namespace detail

    inline Json to_json(const Verdict& v)
    {
        Json j;
        j["name"] = v.name;
        j["value"] = detail::number(v.value);
        j["expected"] = detail::number(v.expected);
        j["tolerance"] = detail::number(v.tolerance);
        j["compare"] = to_string(v.compare);
        j["pass"] = v.pass;
        return j;
    }

    inline Json to_json(const Report& r)
    {
        Json j;
        j["kind"] = r.kind;
        j["config"] = r.config;
        j["passed"] = r.passed();
        j["error"] = r.error;
        j["verdicts"] = Json::array();
        for (const auto& v : r.verdicts)
            j["verdicts"].push_back(to_json(v));
        j["results"] = r.results;
        Json files = Json::array();
        for (const auto& t : r.tables)
            files.push_back(t.name + ".csv");
        for (const auto& a : r.artifacts)
            files.push_back(a);
        j["artifacts"] = files;
        return j;
    }

    inline std::string to_csv(const Table& t)
    {
        std::string out;
        for (std::size_t i = 0; i < t.columns.size(); ++i)
            out += (i ? "," : "") + t.columns[i];
        out += '\n';
        for (const auto& row : t.rows)
        {
            for (std::size_t i = 0; i < row.size(); ++i)
                out += (i ? "," : "") + detail::format_cell(row[i]);
            out += '\n';
        }
        return out;
    }

    /// Writes report.json, one CSV per table and timing.json into dir.
    inline void emit(const Report& r, const std::filesystem::path& dir, int workers)
    {
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        if (ec)
            fail(ErrorKind::IoError, "cannot create " + dir.string() + ": " + ec.message());
        detail::write_text(dir / "report.json", to_json(r).dump(2) + "\n");
        for (const auto& t : r.tables)
            detail::write_text(dir / (t.name + ".csv"), to_csv(t));
        Json timing;
        timing["kind"] = r.kind;
        timing["wall_time_s"] = r.wall_time;
        timing["workers"] = workers;
        detail::write_text(dir / "timing.json", timing.dump(2) + "\n");
    }
} // namespace qlw::harness

#endif
