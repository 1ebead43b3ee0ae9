// qlw: batch verification runs.
//
//   qlw <series-check|recover|forward|linearize|trace|flowout> --config c.json --out dir [--seed n]
//
// Exit status: 0 when every verdict passes, 1 when one fails or the run
// raised a library error, 2 for usage, schema or I/O problems.

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qlw/harness/run.hpp"
#include "qlw/parallel.hpp"

namespace
{
    struct Options
    {
        std::string config;
        std::string out;
        std::optional<std::uint64_t> seed;
    };

    int execute(const std::string& sub, const Options& o)
    {
        using namespace qlw::harness;
        try
        {
            const auto cfg = parse_config(load_json(o.config), kinds_for(sub), o.seed);
            const auto rep = run(cfg);
            emit(rep, o.out, qlw::worker_count());
            int passed = 0;
            for (const auto& v : rep.verdicts)
            {
                passed += v.pass ? 1 : 0;
                if (!v.pass)
                    std::cout << "  FAIL " << v.name << ": " << detail::format_double(v.value) << " ("
                              << to_string(v.compare) << ", expected " << detail::format_double(v.expected)
                              << ", tol " << detail::format_double(v.tolerance) << ")\n";
            }
            if (!rep.error.is_null())
                std::cout << "  error: " << rep.error["message"].get<std::string>() << "\n";
            std::cout << cfg.kind << ": " << (rep.passed() ? "PASS" : "FAIL") << " (" << passed << "/"
                      << rep.verdicts.size() << " verdicts, " << rep.wall_time << " s) -> " << o.out
                      << "/report.json\n";
            return rep.passed() ? 0 : 1;
        }
        catch (const qlw::Error& e)
        {
            std::cerr << "qlw " << sub << ": " << e.what() << "\n";
            return 2;
        }
    }
} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Desk-scale verification runs for the quasilinear wave inverse problem"};
    app.require_subcommand(1);
    Options opt;
    std::uint64_t seed = 0;
    std::string chosen;
    for (const char* name : {"series-check", "recover", "forward", "linearize", "trace", "flowout"})
    {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", opt.config, "JSON experiment config")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", opt.out, "output directory")->required();
        sub->add_option("--seed", seed, "seed (overrides the config)");
        sub->callback([&, sub, name] {
            chosen = name;
            if (sub->count("--seed"))
                opt.seed = seed;
        });
    }
    app.footer("Environment: QLW_WORKERS overrides the worker count.");
    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    return execute(chosen, opt);
}
