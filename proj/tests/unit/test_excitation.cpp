#include "volpr/error.hpp"
#include "volpr/excitation.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numbers>

using namespace volpr;
using std::numbers::pi;

namespace {

std::vector<double> range(double dt, std::size_t n)
{
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i)
        t[i] = dt * static_cast<double>(i);
    return t;
}

// Matches each expected pole to its nearest recovered one.
double worst_pole_error(const ExponentialSignal& got, const std::vector<Complex>& expected)
{
    double worst = 0.0;
    for (const Complex& e : expected) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& c : got.components)
            best = std::min(best, std::abs(c.lambda - e) / std::abs(e));
        worst = std::max(worst, best);
    }
    return worst;
}

} // namespace

TEST(Excitation, SinusoidPoles)
{
    const auto s = sinusoid_poles(1.0, 3.0 * pi);
    ASSERT_EQ(s.size(), 2u);
    EXPECT_EQ(s.components[0].lambda, Complex(0.0, 3.0 * pi));
    EXPECT_EQ(s.components[1].lambda, Complex(0.0, -3.0 * pi));
    const auto r = sinusoid_poles(2.0, 1.0);
    EXPECT_EQ(r.components[0].alpha, Complex(0.0, -1.0));
    EXPECT_EQ(r.components[1].alpha, Complex(0.0, 1.0));
}

TEST(Excitation, SinusoidReconstructsExactly)
{
    const auto s = sinusoid_poles(1.0, pi);
    const auto t = range(0.013, 2000);
    const auto z = s.reconstruct(t);
    for (std::size_t i = 0; i < t.size(); ++i) {
        EXPECT_NEAR(z[i].real(), std::sin(pi * t[i]), 1e-14);
        EXPECT_EQ(z[i].imag(), 0.0);
    }
}

TEST(Excitation, MultitoneComponentCounts)
{
    std::vector<double> w21(21), w41(41);
    for (int n = 0; n < 21; ++n)
        w21[n] = n;
    for (int n = 0; n < 41; ++n)
        w41[n] = n;
    const auto c1 = multitone(std::vector<double>(21, 0.2), w21, random_phases(21, 1), 0.01, 20.0);
    EXPECT_EQ(c1.exact.size(), 42u);
    EXPECT_EQ(c1.sampled.size(), 2000u);
    const auto c3 = multitone(std::vector<double>(41, 0.5), w41, random_phases(41, 1), 0.01, 20.0);
    EXPECT_EQ(c3.exact.size(), 82u);

    const auto t = c1.sampled.times();
    const auto z = c1.exact.reconstruct_real(t);
    for (std::size_t i = 0; i < t.size(); i += 97)
        EXPECT_NEAR(z[i], c1.sampled.samples[i], 1e-12);
}

TEST(Excitation, SingleToneWithQuarterPhaseIsSinusoid)
{
    const std::vector<double> A{1.0}, W{pi}, th{-pi / 2.0};
    const auto m = multitone(A, W, th, 0.01, 5.0);
    const auto s = sinusoid_poles(1.0, pi);
    for (int j = 0; j < 2; ++j) {
        EXPECT_NEAR(std::abs(m.exact.components[j].alpha - s.components[j].alpha), 0.0, 1e-15);
        EXPECT_EQ(m.exact.components[j].lambda, s.components[j].lambda);
    }
}

TEST(Excitation, PhasesAreSeededAndUniform)
{
    const auto a = random_phases(1000, 42), b = random_phases(1000, 42), c = random_phases(1000, 43);
    EXPECT_EQ(a, b);
    EXPECT_NE(a, c);
    for (double v : a) {
        EXPECT_GE(v, 0.0);
        EXPECT_LT(v, 2.0 * pi);
    }
}

TEST(Excitation, WhiteNoiseVariance)
{
    const double s0 = 0.001, dt = 0.01;
    const auto w = white_noise(s0, dt, 200000, 9);
    const double var = std::pow(oracle::rms(w.samples), 2);
    EXPECT_NEAR(var / (s0 * pi / dt), 1.0, 0.01);
    EXPECT_EQ(white_noise(s0, dt, 100, 9).samples, white_noise(s0, dt, 100, 9).samples);
}

TEST(Excitation, PronyRecoversSinusoid)
{
    SampledSignal x;
    x.dt = 0.01;
    for (double t : uniform_times(0.01, 20.0))
        x.samples.push_back(std::sin(3.0 * pi * t));
    const auto r = prony_ss(x, {.rank = 2});
    ASSERT_EQ(r.signal.size(), 2u);
    for (const auto& c : r.signal.components) {
        const double sign = c.lambda.imag() > 0.0 ? 1.0 : -1.0;
        EXPECT_LE(std::abs(c.lambda - Complex(0.0, sign * 3.0 * pi)), 1e-6);
        EXPECT_LE(std::abs(c.alpha - Complex(0.0, -sign * 0.5)), 1e-6);
    }
}

TEST(Excitation, PronyConstantSignal)
{
    SampledSignal x{std::vector<double>(200, 1.7), 0.05};
    const auto r = prony_ss(x);
    ASSERT_EQ(r.rank, 1);
    EXPECT_NEAR(std::abs(r.signal.components[0].lambda), 0.0, 1e-12);
    EXPECT_NEAR(r.signal.components[0].alpha.real(), 1.7, 1e-12);
}

TEST(Excitation, PronyRecoversKnownPoles)
{
    const std::vector<Complex> poles{{-0.2, 3.0}, {-0.2, -3.0}, {-0.05, 7.5}, {-0.05, -7.5}, {-0.6, 0.0}, {-0.01, 0.0}};
    const std::vector<Complex> residues{{0.3, 0.4}, {0.3, -0.4}, {-0.2, 0.1}, {-0.2, -0.1}, {0.8, 0.0}, {-0.5, 0.0}};
    SampledSignal x;
    x.dt = 0.02;
    for (double t : uniform_times(0.02, 12.0)) {
        Complex v{};
        for (std::size_t j = 0; j < poles.size(); ++j)
            v += residues[j] * std::exp(poles[j] * t);
        x.samples.push_back(v.real());
    }
    const auto r = prony_ss(x, {.rank = 6});
    EXPECT_LE(worst_pole_error(r.signal, poles), 1e-8);
}

TEST(Excitation, PronyMultitoneAtListedRank)
{
    std::vector<double> w(21);
    for (int n = 0; n < 21; ++n)
        w[n] = n;
    const auto m = multitone(std::vector<double>(21, 0.2), w, random_phases(21, 2024), 0.01, 20.0);
    const auto r = prony_ss(m.sampled, {.rank = 42});
    EXPECT_EQ(r.rank, 42);
    EXPECT_LE(r.signal.relative_fit, 1e-6);
    const auto z = r.signal.reconstruct(m.sampled.times());
    double max_im = 0.0;
    for (const auto& v : z)
        max_im = std::max(max_im, std::abs(v.imag()));
    EXPECT_LE(max_im, 1e-10 * oracle::rms(m.sampled.samples));
    EXPECT_LE(r.signal.conjugate_mismatch(), 1e-12);
}

TEST(Excitation, PronyFitImprovesWithRank)
{
    std::vector<double> w(8);
    for (int n = 0; n < 8; ++n)
        w[n] = 1.0 + 0.9 * n;
    const auto m = multitone(std::vector<double>(8, 0.5), w, random_phases(8, 5), 0.02, 15.0);
    double last = std::numeric_limits<double>::infinity();
    for (int rank : {4, 10, 16}) {
        const double fit = prony_ss(m.sampled, {.rank = rank}).signal.relative_fit;
        EXPECT_LE(fit, last * (1.0 + 1e-12)) << "rank " << rank;
        last = fit;
    }
}

TEST(Excitation, PronyRejectsOversizedRank)
{
    SampledSignal x{std::vector<double>(20, 1.0), 0.1};
    EXPECT_THROW(prony_ss(x, {.rank = 15}), DomainError);
}

TEST(Excitation, ReconstructionRespectsWindow)
{
    SampledSignal x{std::vector<double>(50, 1.0), 0.1};
    const auto r = prony_ss(x);
    const std::vector<double> inside{4.9}, outside{5.0};
    EXPECT_NO_THROW(r.signal.reconstruct(inside));
    EXPECT_THROW(r.signal.reconstruct(outside), DomainError);
}
