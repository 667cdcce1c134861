#include "moma/errors.hpp"
#include "moma/runner.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Moment-matching aggregation runner"};
    std::string config_path, mode, out, problem;
    std::optional<int> threads;
    std::optional<std::uint64_t> seed;
    std::optional<double> spacing;
    std::vector<std::string> sets;
    app.add_option("--config", config_path, "INI configuration file")->check(CLI::ExistingFile);
    app.add_option("--mode", mode, "grid | evaluate | optimize | diagnose");
    app.add_option("--out", out, "output directory");
    app.add_option("--threads", threads, "worker threads (0 = all)");
    app.add_option("--seed", seed, "random seed");
    app.add_option("--spacing", spacing, "grid spacing exponent s in (0,1)");
    app.add_option("--problem", problem, "problem name");
    app.add_option("--set", sets, "override section.key=value")->take_all();
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    moma::RunConfig cfg;
    try {
        moma::ConfigMap kv;
        if (!config_path.empty())
            kv = moma::read_config_file(config_path);
        moma::apply_env_overrides(kv);
        for (const auto& s : sets) {
            const auto eq = s.find('=');
            if (eq == std::string::npos)
                throw moma::ConfigError("--set expects section.key=value, got '" + s + "'");
            kv[s.substr(0, eq)] = s.substr(eq + 1);
        }
        if (!mode.empty())
            kv["solver.mode"] = mode;
        if (!out.empty())
            kv["output.dir"] = out;
        if (!problem.empty())
            kv["problem.name"] = problem;
        if (threads)
            kv["solver.threads"] = std::to_string(*threads);
        if (seed)
            kv["solver.seed"] = std::to_string(*seed);
        if (spacing)
            kv["solver.spacing"] = moma::format_double(*spacing);
        cfg = moma::parse_config(kv);
    } catch (const moma::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    }

    const auto outcome = moma::run(cfg);
    if (outcome.exit_code != 0)
        std::cerr << "error: " << outcome.message << "\n";
    else
        std::cout << outcome.summary.dump(2) << "\n";
    return outcome.exit_code;
}
