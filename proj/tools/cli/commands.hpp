#pragma once

#include "config.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>

namespace volpr::cli {

struct RunContext {
    ExperimentConfig config;
    std::filesystem::path config_path;
    std::filesystem::path out;
    Profile profile = Profile::Paper;
    std::optional<std::uint64_t> seed;  // overrides excitation.seed

    nlohmann::json timings = nlohmann::json::object();
    nlohmann::json results = nlohmann::json::object();
    nlohmann::json outputs = nlohmann::json::array();
};

/// Runs one subcommand; returns the process exit status (0, or 1 when
/// `verify` finds a failing check). Library errors propagate.
int run_command(const std::string& name, RunContext& ctx);

/// manifest.json in the output directory: subcommand, config hash,
/// versions, timings, outputs and headline results.
void write_manifest(const std::string& name, const RunContext& ctx);

} // namespace volpr::cli
