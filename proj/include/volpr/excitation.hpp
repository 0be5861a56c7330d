#pragma once

// Excitations in pole-residue form f(t) = sum_l alpha_l exp(lambda_l t) on
// [0, T), either exact (sinusoids, multitones) or fitted from samples by the
// SVD/state-space variant of Prony's method.

#include "volpr/polyexp.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace volpr {

struct ExpComponent {
    Complex alpha;
    Complex lambda;
};

struct ExponentialSignal {
    std::vector<ExpComponent> components;
    double horizon = kUnbounded;
    double dt = 0.0;            // sample interval of the fitted record, 0 if exact
    double relative_fit = 0.0;  // RMS(fit - samples) / RMS(samples), 0 if exact

    std::size_t size() const noexcept { return components.size(); }

    /// sum alpha e^{lambda t}, complex; t must lie in [0, horizon).
    std::vector<Complex> reconstruct(std::span<const double> t) const;
    std::vector<double> reconstruct_real(std::span<const double> t) const;

    /// Largest distance between a component and its nearest conjugate partner.
    double conjugate_mismatch() const;
};

struct SampledSignal {
    std::vector<double> samples;
    double dt = 0.0;

    std::size_t size() const noexcept { return samples.size(); }
    double horizon() const noexcept { return static_cast<double>(samples.size()) * dt; }
    std::vector<double> times() const;
};

/// Uniform grid 0, dt, ..., strictly below `horizon` (with the end point
/// excluded only when it would sit on the horizon itself).
std::vector<double> uniform_times(double dt, double horizon);

/// A sin(Omega t): poles +-i Omega, residues -+i A/2.
ExponentialSignal sinusoid_poles(double amplitude, double omega, double horizon = kUnbounded);

struct Multitone {
    SampledSignal sampled;
    ExponentialSignal exact;
};

/// sum_n A_n cos(Omega_n t + theta_n): sampled on [0, horizon) at dt, and
/// the exact 2 N_f component form (a zero frequency keeps both halves).
Multitone multitone(std::span<const double> amplitude, std::span<const double> omega,
                    std::span<const double> phase, double dt, double horizon);

/// n phases uniform on [0, 2 pi), reproducible from the seed.
std::vector<double> random_phases(std::size_t n, std::uint64_t seed);

/// Gaussian white noise with two-sided spectral height S0: variance S0 pi / dt.
SampledSignal white_noise(double s0, double dt, std::size_t n, std::uint64_t seed);

struct PronyOptions {
    std::optional<int> rank;                // explicit model order
    double singular_threshold = 1e-8;       // relative cut when rank is unset
};

struct PronyReport {
    ExponentialSignal signal;
    std::vector<double> singular_values;    // leading part of the Hankel spectrum
    int rank = 0;
    double max_frequency_fraction = 0.0;    // max |Im lambda| / (pi / dt)
};

/// Hankel/SVD/shift-invariance decomposition of a real sampled record.
PronyReport prony_ss(const SampledSignal& x, const PronyOptions& options = {});

} // namespace volpr
