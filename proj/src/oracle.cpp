#include "volpr/oracle.hpp"

#include "volpr/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace volpr {

namespace {

using State = std::array<double, 2>;

struct Oscillator {
    const OscillatorParams& p;
    const Forcing& f;

    State operator()(double t, const State& s) const
    {
        const double y = s[0];
        const double v = s[1];
        return {v, (f(t) - p.c * v - p.k1 * y - p.k2 * y * y - p.k3 * y * y * y) / p.m};
    }
};

State axpy(const State& s, double h, const State& k) { return {s[0] + h * k[0], s[1] + h * k[1]}; }

std::size_t checked_stride(double output_dt, double dt)
{
    const double ratio = output_dt / dt;
    const auto stride = static_cast<std::size_t>(std::llround(ratio));
    if (stride == 0 || std::abs(ratio - static_cast<double>(stride)) > 1e-9 * ratio)
        throw DomainError("output interval must be a whole multiple of the integration step");
    return stride;
}

} // namespace

Trajectory integrate_rk4(const OscillatorParams& p, const Forcing& f, const Rk4Config& config)
{
    if (!(config.dt > 0.0)) throw DomainError("integration step must be positive");
    const std::size_t stride = checked_stride(config.output_dt, config.dt);
    const auto steps = static_cast<std::size_t>(std::llround(config.horizon / config.dt));
    const Oscillator rhs{p, f};

    Trajectory out;
    const std::size_t samples = steps / stride + 1;
    out.t.reserve(samples);
    out.y.reserve(samples);
    out.v.reserve(samples);
    State s{0.0, 0.0};
    const double h = config.dt;
    out.t.push_back(0.0);
    out.y.push_back(0.0);
    out.v.push_back(0.0);
    for (std::size_t i = 0; i < steps; ++i) {
        const double t = static_cast<double>(i) * h;
        const State k1 = rhs(t, s);
        const State k2 = rhs(t + 0.5 * h, axpy(s, 0.5 * h, k1));
        const State k3 = rhs(t + 0.5 * h, axpy(s, 0.5 * h, k2));
        const State k4 = rhs(t + h, axpy(s, h, k3));
        s[0] += h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
        s[1] += h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
        if ((i + 1) % stride == 0) {
            out.t.push_back(static_cast<double>(i + 1) * h);
            out.y.push_back(s[0]);
            out.v.push_back(s[1]);
        }
    }
    return out;
}

Trajectory integrate_rk45(const OscillatorParams& p, const Forcing& f, const Rk45Config& config)
{
    // Dormand-Prince tableau
    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                     a65 = -5103.0 / 18656;
    constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                     e6 = 22.0 / 525, e7 = -1.0 / 40;

    const Oscillator rhs{p, f};
    Trajectory out;
    const auto n_out = static_cast<std::size_t>(std::llround(config.horizon / config.output_dt));
    State s{0.0, 0.0};
    double t = 0.0;
    double h = config.initial_step;
    out.t.push_back(0.0);
    out.y.push_back(0.0);
    out.v.push_back(0.0);
    State k1 = rhs(t, s);

    for (std::size_t j = 1; j <= n_out; ++j) {
        const double target = static_cast<double>(j) * config.output_dt;
        while (t < target) {
            bool last = false;
            double step = h;
            if (t + step >= target) {
                step = target - t;
                last = true;
            }
            const State k2 = rhs(t + c2 * step, axpy(s, step * a21, k1));
            const State k3 = rhs(t + c3 * step, {s[0] + step * (a31 * k1[0] + a32 * k2[0]),
                                                 s[1] + step * (a31 * k1[1] + a32 * k2[1])});
            const State k4 = rhs(t + c4 * step, {s[0] + step * (a41 * k1[0] + a42 * k2[0] + a43 * k3[0]),
                                                 s[1] + step * (a41 * k1[1] + a42 * k2[1] + a43 * k3[1])});
            const State k5 =
                rhs(t + c5 * step, {s[0] + step * (a51 * k1[0] + a52 * k2[0] + a53 * k3[0] + a54 * k4[0]),
                                    s[1] + step * (a51 * k1[1] + a52 * k2[1] + a53 * k3[1] + a54 * k4[1])});
            const State k6 = rhs(
                t + step,
                {s[0] + step * (a61 * k1[0] + a62 * k2[0] + a63 * k3[0] + a64 * k4[0] + a65 * k5[0]),
                 s[1] + step * (a61 * k1[1] + a62 * k2[1] + a63 * k3[1] + a64 * k4[1] + a65 * k5[1])});
            const State next{s[0] + step * (b1 * k1[0] + b3 * k3[0] + b4 * k4[0] + b5 * k5[0] + b6 * k6[0]),
                             s[1] + step * (b1 * k1[1] + b3 * k3[1] + b4 * k4[1] + b5 * k5[1] + b6 * k6[1])};
            const State k7 = rhs(t + step, next);
            double err = 0.0;
            for (int i = 0; i < 2; ++i) {
                const double e = step * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i]
                                         + e7 * k7[i]);
                const double scale = config.atol + config.rtol * std::max(std::abs(s[i]), std::abs(next[i]));
                err = std::max(err, std::abs(e) / scale);
            }
            if (err <= 1.0) {
                t = last ? target : t + step;
                s = next;
                k1 = k7;
            }
            if (!std::isfinite(err) || !std::isfinite(next[0]) || !std::isfinite(next[1]))
                err = std::numeric_limits<double>::infinity();
            const double factor = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
            // keep the proposal from the unclipped step when a clipped one was accepted
            if (!(last && err <= 1.0)) h = step * factor;
            if (h < config.min_step) throw InvariantError("adaptive step size underflow at t = " + std::to_string(t));
        }
        out.t.push_back(target);
        out.y.push_back(s[0]);
        out.v.push_back(s[1]);
    }
    return out;
}

Forcing sinusoid_forcing(double amplitude, double omega)
{
    return [amplitude, omega](double t) { return amplitude * std::sin(omega * t); };
}

Forcing multitone_forcing(std::vector<double> amplitude, std::vector<double> omega, std::vector<double> phase)
{
    if (amplitude.size() != omega.size() || omega.size() != phase.size())
        throw DomainError("multitone lists differ in length");
    return [a = std::move(amplitude), w = std::move(omega), th = std::move(phase)](double t) {
        double v = 0.0;
        for (std::size_t n = 0; n < a.size(); ++n)
            v += a[n] * std::cos(w[n] * t + th[n]);
        return v;
    };
}

Forcing interpolated_forcing(SampledSignal s)
{
    return [s = std::move(s)](double t) {
        if (t < 0.0 || s.samples.empty()) return 0.0;
        const double x = t / s.dt;
        const auto i = static_cast<std::size_t>(x);
        if (i + 1 >= s.samples.size()) return i < s.samples.size() ? s.samples[i] : 0.0;
        const double frac = x - static_cast<double>(i);
        return (1.0 - frac) * s.samples[i] + frac * s.samples[i + 1];
    };
}

std::vector<double> volterra_convolve(const SampledKernel& h1, const SampledKernel* h2, const SampledSignal& f)
{
    const std::size_t n = f.size();
    if (h1.order != 1) throw DomainError("first kernel must be of order 1");
    if (std::abs(h1.dt - f.dt) > 1e-12 * f.dt) throw DomainError("kernel and signal sample intervals differ");
    if (h1.length < n) throw DomainError("first-order kernel grid does not cover the response horizon");
    if (h2) {
        if (h2->order != 2) throw DomainError("second kernel must be of order 2");
        if (std::abs(h2->dt - f.dt) > 1e-12 * f.dt) throw DomainError("kernel and signal sample intervals differ");
        if (h2->length < n) throw DomainError("second-order kernel grid does not cover the response horizon");
    }
    const double dt = f.dt;
    const auto& x = f.samples;
    std::vector<double> y(n, 0.0);
    std::vector<double> g(n);
    for (std::size_t i = 1; i < n; ++i) {
        // trapezoid weights over tau_j = j dt, j = 0..i
        auto w = [i](std::size_t j) { return (j == 0 || j == i) ? 0.5 : 1.0; };
        double lin = 0.0;
        for (std::size_t j = 0; j <= i; ++j)
            lin += w(j) * h1.at(j) * x[i - j];
        y[i] = dt * lin;
        if (!h2) continue;
        for (std::size_t j = 0; j <= i; ++j) {
            const double* row = &h2->values[j * h2->length];
            double acc = 0.0;
            for (std::size_t k = 0; k <= i; ++k)
                acc += w(k) * row[k] * x[i - k];
            g[j] = acc;
        }
        double quad = 0.0;
        for (std::size_t j = 0; j <= i; ++j)
            quad += w(j) * g[j] * x[i - j];
        y[i] += dt * dt * quad;
    }
    return y;
}

} // namespace volpr
