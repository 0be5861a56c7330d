#pragma once

// Experiment configuration: a JSON document with the blocks described in
// README.md. Parsing is strict: unknown keys, wrong types and out-of-range
// values raise ConfigError with the dotted path of the offending key.

#include "volpr/excitation.hpp"
#include "volpr/frf.hpp"
#include "volpr/identify.hpp"
#include "volpr/oracle.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace volpr::cli {

enum class Profile { Paper, Desk };

enum class ExcitationKind { Sinusoid, Multitone, WhiteNoise, Csv };

struct ExcitationConfig {
    ExcitationKind kind = ExcitationKind::Sinusoid;
    // sinusoid
    double amplitude = 1.0;
    double omega = 0.0;
    // multitone: equal amplitudes on an even frequency ladder unless lists are given
    std::vector<double> amplitudes;
    std::vector<double> omegas;
    std::vector<double> phases;
    std::uint64_t seed = 1;      // phases (multitone) or samples (white noise)
    double dt = 0.01;
    double horizon = 20.0;
    // white noise
    double s0 = 0.001;
    std::size_t samples = 0;
    // csv
    std::filesystem::path path;
    std::optional<int> rank;     // Prony model order; singular-value cut when unset
};

struct BasisConfig {
    double a = 2.0;
    std::array<int, 3> R{24, 24, 24};
    int desk_R3 = 12;
    int N = 3;
};

struct IdentificationConfig {
    std::filesystem::path record;
    int order = 2;
    double ridge = 0.0;
};

struct OutputConfig {
    double dt = 0.01;
    double horizon = 20.0;
};

struct VerifyConfig {
    double tolerance = 0.05;
    double fit_tolerance = 1e-6;
};

struct ExperimentConfig {
    std::optional<OscillatorParams> system;
    std::optional<IdentificationConfig> identification;
    BasisConfig basis;
    std::optional<ExcitationConfig> excitation;
    std::array<FrequencyGrid, 3> grids{FrequencyGrid{0.1, 1024}, FrequencyGrid{0.1, 1024}, FrequencyGrid{0.4, 128}};
    OutputConfig output;
    double oracle_dt = 1e-4;
    BenchmarkOptions benchmark;
    VerifyConfig verify;

    nlohmann::json source;       // the document as read
    std::filesystem::path base;  // directory relative paths resolve against

    /// Basis size for order n (1-based) under the profile.
    int rank_of(int n, Profile profile) const;
    const OscillatorParams& system_or_throw() const;
    const ExcitationConfig& excitation_or_throw() const;
    const IdentificationConfig& identification_or_throw() const;
};

ExperimentConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base);
ExperimentConfig load_config(const std::filesystem::path& path);

/// 64-bit FNV-1a of the bytes.
std::uint64_t fnv1a(std::string_view bytes);

} // namespace volpr::cli
