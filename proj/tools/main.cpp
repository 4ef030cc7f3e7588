#include <iostream>
#include <string>

#include <CLI11.hpp>

#include <varorder/errors.hpp>
#include <varorder/parallel.hpp>

#include "commands.hpp"
#include "config.hpp"

int main(int argc, char** argv)
{
    using namespace varorder;
    CLI::App app{"Numerical lab for variable-order subdiffusion: forward maps, asymptotics and order recovery"};
    std::string command;
    std::string config_path;
    std::string out_dir = "out";
    int threads = 0;
    std::uint64_t seed = 0;
    bool seed_given = false;

    std::string names;
    for (const auto& n : cli::command_names()) {
        names += (names.empty() ? "" : ", ") + n;
    }
    app.add_option("command", command, "One of: " + names)->required()->check(CLI::IsMember(cli::command_names()));
    app.add_option("--config", config_path, "JSON configuration (the default disk scenario when omitted)");
    app.add_option("--out", out_dir, "Directory for CSV artifacts")->capture_default_str();
    app.add_option("--threads", threads, "Worker threads (0 = hardware concurrency)")->check(CLI::NonNegativeNumber);
    auto* seed_opt = app.add_option("--seed", seed, "Seed for randomized sweeps (overrides the config, default 42)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : cli::kValidation;
    }
    seed_given = seed_opt->count() > 0;

    try {
        set_thread_count(static_cast<unsigned>(threads));
        cli::ExperimentConfig config =
            config_path.empty() ? cli::parse_config(cli::default_config()) : cli::load_config(config_path);
        if (seed_given) {
            config.seed = seed;
        }
        return cli::run_command(command, config, out_dir, std::cout);
    } catch (const cli::ConfigError& e) {
        std::cerr << e.what() << '\n';
        return cli::kValidation;
    } catch (const InvalidInput& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return cli::kValidation;
    } catch (const AssumptionViolation& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return cli::kValidation;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return cli::kNumerical;
    }
}
