#ifndef QLW_HARNESS_RUN_HPP
#define QLW_HARNESS_RUN_HPP

// Experiment configs {kind, seed, parameters[, output_dir]} and dispatch.
// Parameters are validated in full before any computation; module errors
// raised while computing end up in the report as a failed verdict.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qlw/harness/algebra_runs.hpp"
#include "qlw/harness/geometry_runs.hpp"
#include "qlw/harness/params.hpp"
#include "qlw/harness/report.hpp"
#include "qlw/harness/wave_runs.hpp"

namespace qlw::harness
{
    inline const std::vector<std::string>& kinds()
    {
        static const std::vector<std::string> k{"series-check", "recover-lower", "recover-higher", "forward",
                                                "linearize-check", "trace", "flowout"};
        return k;
    }

    /// Kinds a CLI subcommand accepts; the first is the default.
    inline std::vector<std::string> kinds_for(const std::string& subcommand)
    {
        if (subcommand == "recover")
            return {"recover-lower", "recover-higher"};
        if (subcommand == "linearize")
            return {"linearize-check"};
        return {subcommand};
    }

    struct ExperimentConfig
    {
        std::string kind;
        std::uint64_t seed = 0;
        Json parameters = Json::object();
        std::string output_dir;
    };

    inline Json load_json(const std::filesystem::path& path)
    {
        std::ifstream is(path);
        if (!is)
            fail(ErrorKind::IoError, "cannot read " + path.string());
        try
        {
            return Json::parse(is);
        }
        catch (const nlohmann::json::exception& e)
        {
            fail(ErrorKind::SchemaError, path.string() + ": " + e.what());
        }
    }

    /// Top-level keys; the kind must be one the subcommand accepts (absent
    /// means its default) and --seed, when given, replaces the config seed.
    inline ExperimentConfig parse_config(const Json& j, const std::vector<std::string>& allowed,
                                         std::optional<std::uint64_t> seed = std::nullopt)
    {
        Params top(j, "config");
        ExperimentConfig c;
        c.kind = top.choice("kind", allowed.front(), allowed);
        if (const Json* ps = top.raw("parameters"))
        {
            if (!ps->is_object())
                top.bad("parameters", "expected an object");
            c.parameters = *ps;
        }
        if (const Json* s = top.raw("seed"))
        {
            if (!s->is_number_unsigned())
                top.bad("seed", "expected a non-negative integer");
            c.seed = s->get<std::uint64_t>();
        }
        if (const Json* o = top.raw("output_dir"))
        {
            if (!o->is_string())
                top.bad("output_dir", "expected a string");
            c.output_dir = o->get<std::string>();
        }
        top.done();
        if (seed)
            c.seed = *seed;
        return c;
    }

    /// Validates, runs and times one experiment. SchemaError escapes before
    /// any computation; every other library error is recorded in the report.
    inline Report run(const ExperimentConfig& cfg)
    {
        Report rep;
        rep.kind = cfg.kind;
        Params p(cfg.parameters, "parameters");
        std::function<void(Report&)> body;
        if (cfg.kind == "series-check")
            body = [c = SeriesCheck::parse(p)](Report& r) { c.run(r); };
        else if (cfg.kind == "recover-lower")
            body = [c = RecoverLower::parse(p), seed = cfg.seed](Report& r) { c.run(r, seed); };
        else if (cfg.kind == "recover-higher")
            body = [c = RecoverHigher::parse(p)](Report& r) { c.run(r); };
        else if (cfg.kind == "forward")
            body = [c = Forward::parse(p)](Report& r) { c.run(r); };
        else if (cfg.kind == "linearize-check")
            body = [c = LinearizeCheck::parse(p)](Report& r) { c.run(r); };
        else if (cfg.kind == "trace")
            body = [c = Trace::parse(p)](Report& r) { c.run(r); };
        else if (cfg.kind == "flowout")
            body = [c = Flowout::parse(p)](Report& r) { c.run(r); };
        else
            fail(ErrorKind::SchemaError, "unknown experiment kind '" + cfg.kind + "'");
        rep.config = {{"kind", cfg.kind}, {"seed", cfg.seed}, {"parameters", p.done()}};

        const auto start = std::chrono::steady_clock::now();
        try
        {
            body(rep);
        }
        catch (const Error& e)
        {
            rep.error = {{"kind", std::string(to_string(e.kind()))}, {"message", e.what()}};
            rep.verdicts.push_back(flag("completed", false));
        }
        rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return rep;
    }
} // namespace qlw::harness

#endif
