#include "commands.hpp"

#include "volpr/error.hpp"

#include <CLI11.hpp>

#include <cstdio>

namespace {

struct Subcommand {
    const char* name;
    const char* help;
};

constexpr Subcommand kSubcommands[] = {
    {"frf", "FRF grids of orders 1-2 and the order-3 diagonals"},
    {"kernels", "time-domain kernels by inverse transform"},
    {"project", "Laguerre coefficients of the kernels"},
    {"prony", "pole-residue decomposition of a sampled excitation"},
    {"simulate", "closed-form response and its natural, cross and forced parts"},
    {"identify", "least-squares coefficients from an input-output record"},
    {"predict", "response of an identified model to the excitation"},
    {"oracle", "RK4 reference trajectory and t,f,y record"},
    {"benchmark", "timing table, closed form against the integrators"},
    {"verify", "check a config against its references, one [PASS]/[FAIL] line per check"},
};

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Volterra responses in closed form via Laguerre kernels and pole-residue excitations", "volpr"};
    app.require_subcommand(1);

    std::string config, out = "out", profile = "paper";
    std::uint64_t seed = 0;
    for (const auto& s : kSubcommands) {
        CLI::App* sub = app.add_subcommand(s.name, s.help);
        sub->add_option("--config", config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out, "output directory")->capture_default_str();
        sub->add_option("--seed", seed, "seed for phases or noise; overrides excitation.seed");
        sub->add_option("--profile", profile, "paper, or desk for a reduced order-3 basis")
            ->check(CLI::IsMember({"paper", "desk"}))
            ->capture_default_str();
    }
    CLI11_PARSE(app, argc, argv);

    const std::string name = app.get_subcommands().front()->get_name();
    try {
        volpr::cli::RunContext ctx;
        ctx.config_path = config;
        ctx.config = volpr::cli::load_config(config);
        ctx.out = out;
        ctx.profile = profile == "desk" ? volpr::cli::Profile::Desk : volpr::cli::Profile::Paper;
        if (app.get_subcommands().front()->count("--seed")) ctx.seed = seed;
        const int status = volpr::cli::run_command(name, ctx);
        volpr::cli::write_manifest(name, ctx);
        return status;
    } catch (const volpr::ConfigError& e) {
        std::fprintf(stderr, "volpr %s: %s\n", name.c_str(), e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "volpr %s: %s\n", name.c_str(), e.what());
        return 3;
    }
}
