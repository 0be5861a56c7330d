#pragma once

// Reference solutions: direct time integration of the oscillator and the
// discrete Volterra convolution, plus a timing harness.

#include "volpr/coefficients.hpp"
#include "volpr/excitation.hpp"
#include "volpr/frf.hpp"

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace volpr {

using Forcing = std::function<double(double)>;

struct Trajectory {
    std::vector<double> t;
    std::vector<double> y;
    std::vector<double> v;
};

struct Rk4Config {
    double dt = 1e-4;
    double horizon = 20.0;
    double output_dt = 0.01; // must be a multiple of dt
};

/// Classical RK4 on (y, y') from rest, sampled every output_dt on [0, horizon].
Trajectory integrate_rk4(const OscillatorParams& p, const Forcing& f, const Rk4Config& config);

struct Rk45Config {
    double rtol = 1e-8;
    double atol = 1e-10;
    double horizon = 20.0;
    double output_dt = 0.01;
    double initial_step = 1e-3;
    double min_step = 1e-12;
};

/// Dormand-Prince 5(4) with steps clipped to the output grid. Throws
/// InvariantError when the step size underflows.
Trajectory integrate_rk45(const OscillatorParams& p, const Forcing& f, const Rk45Config& config);

Forcing sinusoid_forcing(double amplitude, double omega);
Forcing multitone_forcing(std::vector<double> amplitude, std::vector<double> omega, std::vector<double> phase);
/// Linear interpolation between samples; zero beyond the record.
Forcing interpolated_forcing(SampledSignal s);

/// y = y1 + y2 by trapezoidal one- and two-fold convolution. Kernels and
/// signal share one sample interval; `h2` may be null.
std::vector<double> volterra_convolve(const SampledKernel& h1, const SampledKernel* h2, const SampledSignal& f);

struct BenchmarkRow {
    std::string method;
    double length = 0.0;
    std::size_t points = 0;
    double seconds = 0.0;
};

struct BenchmarkOptions {
    std::vector<double> lengths{10.0, 50.0, 100.0, 200.0, 400.0};
    double output_dt = 0.01;
    double rk4_dt = 1e-4;
    bool rk45 = true;
    double convolution_max_length = 10.0;
};

/// Wall-clock table for the closed form (assembly and evaluation), RK4,
/// RK45 and, for short records, the discrete convolution.
std::vector<BenchmarkRow> run_benchmark(const OscillatorParams& p,
                                        std::span<const KernelCoefficients> coefficients, int N,
                                        double amplitude, double omega, const BenchmarkOptions& options);

} // namespace volpr
