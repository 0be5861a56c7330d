#include "volpr/engine.hpp"
#include "volpr/error.hpp"
#include "volpr/oracle.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <limits>
#include <numbers>

using namespace volpr;
using std::numbers::pi;

namespace {

OscillatorParams linear_params()
{
    OscillatorParams p{};
    p.k2 = 0.0;
    p.k3 = 0.0;
    return p;
}

double max_abs_error(const std::vector<double>& a, const std::vector<double>& b)
{
    double e = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        e = std::max(e, std::abs(a[i] - b[i]));
    return e;
}

} // namespace

TEST(Oracle, LinearSteadyStateAmplitude)
{
    const auto p = linear_params();
    const auto tr = integrate_rk4(p, sinusoid_forcing(1.0, pi), {1e-3, 40.0, 0.001});
    double peak = 0.0;
    for (std::size_t i = 0; i < tr.t.size(); ++i)
        if (tr.t[i] >= 30.0) peak = std::max(peak, std::abs(tr.y[i]));
    EXPECT_NEAR(peak / std::abs(frf1(p, pi)), 1.0, 0.005);
}

TEST(Oracle, LinearMatchesImpulseConvolution)
{
    const auto p = linear_params();
    const double dt = 1e-3;
    const auto tr = integrate_rk4(p, sinusoid_forcing(1.0, 2.0), {1e-4, 10.0, dt});
    std::vector<double> g(tr.t.size()), f(tr.t.size());
    for (std::size_t i = 0; i < tr.t.size(); ++i) {
        g[i] = oracle::impulse_response(p.m, p.c, p.k1, tr.t[i]);
        f[i] = std::sin(2.0 * tr.t[i]);
    }
    std::vector<std::size_t> at;
    std::vector<double> y;
    for (std::size_t i = 0; i < tr.t.size(); i += 50) {
        at.push_back(i);
        y.push_back(tr.y[i]);
    }
    const auto ref = oracle::causal_convolution(g, f, dt, at);
    EXPECT_LE(oracle::rms_diff(y, ref), 1e-8 * oracle::rms(ref) + 1e-12);
}

TEST(Oracle, ZeroForcingStaysAtRest)
{
    const OscillatorParams p{};
    const Forcing zero = [](double) { return 0.0; };
    const auto a = integrate_rk4(p, zero, {1e-3, 5.0, 0.01});
    const auto b = integrate_rk45(p, zero, {.horizon = 5.0});
    for (double v : a.y)
        EXPECT_EQ(v, 0.0);
    for (double v : b.y)
        EXPECT_EQ(v, 0.0);
    EXPECT_EQ(a.t.size(), 501u);
    EXPECT_EQ(b.t.size(), 501u);
}

TEST(Oracle, Rk4FourthOrderConvergence)
{
    const OscillatorParams p{};
    const auto f = sinusoid_forcing(1.0, pi);
    const auto ref = integrate_rk4(p, f, {2.5e-4, 10.0, 0.02});
    const auto coarse = integrate_rk4(p, f, {0.01, 10.0, 0.02});
    const auto fine = integrate_rk4(p, f, {0.005, 10.0, 0.02});
    const double ratio = max_abs_error(coarse.y, ref.y) / max_abs_error(fine.y, ref.y);
    EXPECT_GT(ratio, 13.0);
    EXPECT_LT(ratio, 19.0);
}

TEST(Oracle, Rk45AgreesWithRk4)
{
    const OscillatorParams p{};
    const auto f = multitone_forcing({0.5, 0.3}, {1.3, 4.1}, {0.2, 1.0});
    const auto a = integrate_rk4(p, f, {1e-4, 20.0, 0.01});
    const auto b = integrate_rk45(p, f, {.rtol = 1e-10, .atol = 1e-12, .horizon = 20.0});
    ASSERT_EQ(a.y.size(), b.y.size());
    EXPECT_LE(oracle::rms_diff(a.y, b.y), 1e-7 * oracle::rms(a.y));
}

TEST(Oracle, Rk45StepUnderflowIsReported)
{
    const OscillatorParams p{};
    const Forcing broken = [](double t) { return t > 0.5 ? std::numeric_limits<double>::quiet_NaN() : 1.0; };
    EXPECT_THROW(integrate_rk45(p, broken, {.horizon = 1.0, .min_step = 1e-6}), InvariantError);
}

TEST(Oracle, OutputIntervalMustDivideStep)
{
    const OscillatorParams p{};
    EXPECT_THROW(integrate_rk4(p, sinusoid_forcing(1.0, 1.0), {1e-3, 1.0, 0.0015}), DomainError);
}

TEST(Oracle, InterpolatedForcing)
{
    const auto f = interpolated_forcing({{0.0, 1.0, 3.0}, 0.5});
    EXPECT_EQ(f(0.25), 0.5);
    EXPECT_EQ(f(0.75), 2.0);
    EXPECT_EQ(f(-1.0), 0.0);
    EXPECT_EQ(f(5.0), 0.0);
}

namespace {

SampledKernel first_order_kernel(const OscillatorParams& p)
{
    return kernel_time(frf_grid(p, 1, {0.1, 1024}));
}

} // namespace

TEST(Oracle, ConvolutionOfImpulseReproducesKernel)
{
    const auto h1 = first_order_kernel(OscillatorParams{});
    SampledSignal f{std::vector<double>(300, 0.0), h1.dt};
    f.samples[1] = 1.0 / h1.dt;
    const auto y = volterra_convolve(h1, nullptr, f);
    for (std::size_t i = 2; i < y.size(); ++i)
        EXPECT_NEAR(y[i], h1.at(i - 1), 1e-14);
}

TEST(Oracle, ZeroSecondKernelIsLinear)
{
    const OscillatorParams p{};
    const auto h1 = first_order_kernel(p);
    SampledKernel h2{2, h1.dt, 200, std::vector<double>(200 * 200, 0.0), 0.0};
    SampledSignal f{std::vector<double>(200), h1.dt};
    for (std::size_t i = 0; i < f.size(); ++i)
        f.samples[i] = std::sin(1.7 * h1.dt * static_cast<double>(i));
    EXPECT_EQ(volterra_convolve(h1, &h2, f), volterra_convolve(h1, nullptr, f));
}

// Both paths evaluate the same truncated second-order model: the kernels for
// the convolution are synthesised from the coefficients.
TEST(Oracle, ConvolutionMatchesClosedFormSecondOrder)
{
    const OscillatorParams p{};
    const FrequencyGrid grid{0.1, 1024};
    const LaguerreBasis basis(2.0, 24);
    const std::vector<KernelCoefficients> c{project_coefficients(frf_grid(p, 1, grid), basis),
                                            project_coefficients(frf_grid(p, 2, grid), basis)};
    const double dt = 0.01;
    const auto t = uniform_times(dt, 20.0 + dt / 2.0);
    const auto h1 = reconstruct_kernel(c[0], dt, t.size());
    const auto h2 = reconstruct_kernel(c[1], dt, t.size());
    SampledSignal f{std::vector<double>(t.size()), dt};
    for (std::size_t i = 0; i < t.size(); ++i)
        f.samples[i] = std::sin(pi * t[i]);
    const auto conv = volterra_convolve(h1, &h2, f);
    const auto closed = evaluate_real(assemble_response(c, sinusoid_poles(1.0, pi), 2).total, t);
    EXPECT_LE(oracle::rms_diff(conv, closed), 1e-3 * oracle::rms(closed));
}

TEST(Oracle, ConvolutionRejectsMismatchedGrids)
{
    const auto h1 = first_order_kernel(OscillatorParams{});
    SampledSignal f{std::vector<double>(10, 1.0), h1.dt * 2.0};
    EXPECT_THROW(volterra_convolve(h1, nullptr, f), DomainError);
}

TEST(Oracle, BenchmarkRows)
{
    const OscillatorParams p{};
    const LaguerreBasis basis(2.0, 6);
    const FrequencyGrid grid{0.1, 1024};
    const std::vector<KernelCoefficients> c{project_coefficients(frf_grid(p, 1, grid), basis),
                                            project_coefficients(frf_grid(p, 2, grid), basis)};
    BenchmarkOptions opt;
    opt.lengths = {5.0, 12.0};
    opt.rk4_dt = 1e-3;
    const auto rows = run_benchmark(p, c, 2, 1.0, pi, opt);
    int conv = 0;
    for (const auto& r : rows) {
        EXPECT_GE(r.seconds, 0.0);
        EXPECT_GT(r.points, 0u);
        if (r.method == "convolution") {
            ++conv;
            EXPECT_LE(r.length, 10.0);
        }
    }
    EXPECT_EQ(conv, 1);
    EXPECT_GE(rows.size(), 9u);
}
