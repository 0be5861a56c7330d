#include "volpr/engine.hpp"
#include "volpr/oracle.hpp"

#include <chrono>

namespace volpr {

namespace {

template <class F>
double seconds(F&& fn)
{
    const auto start = std::chrono::steady_clock::now();
    fn();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

} // namespace

std::vector<BenchmarkRow> run_benchmark(const OscillatorParams& p,
                                        std::span<const KernelCoefficients> coefficients, int N,
                                        double amplitude, double omega, const BenchmarkOptions& options)
{
    std::vector<BenchmarkRow> rows;
    const Forcing forcing = sinusoid_forcing(amplitude, omega);
    SampledKernel h1, h2;

    for (double L : options.lengths) {
        const auto t = uniform_times(options.output_dt, L + 0.5 * options.output_dt);
        const std::size_t points = t.size();

        ResponseOrders response;
        const double assembly = seconds([&] {
            response = assemble_response(coefficients, sinusoid_poles(amplitude, omega), N);
        });
        std::vector<double> y;
        const double eval = seconds([&] { y = evaluate_real(response.total, t); });
        rows.push_back({"closed_form_assembly", L, points, assembly});
        rows.push_back({"closed_form_evaluation", L, points, eval});
        rows.push_back({"closed_form", L, points, assembly + eval});

        Trajectory ref;
        const double rk4 = seconds([&] {
            ref = integrate_rk4(p, forcing, {options.rk4_dt, L, options.output_dt});
        });
        rows.push_back({"rk4", L, points, rk4});

        if (options.rk45) {
            Rk45Config cfg;
            cfg.horizon = L;
            cfg.output_dt = options.output_dt;
            const double rk45 = seconds([&] { ref = integrate_rk45(p, forcing, cfg); });
            rows.push_back({"rk45", L, points, rk45});
        }

        if (L <= options.convolution_max_length) {
            SampledSignal f;
            f.dt = options.output_dt;
            f.samples.resize(points);
            for (std::size_t i = 0; i < points; ++i)
                f.samples[i] = forcing(t[i]);
            const double conv = seconds([&] {
                h1 = reconstruct_kernel(coefficients[0], options.output_dt, points);
                if (coefficients.size() >= 2 && N >= 2)
                    h2 = reconstruct_kernel(coefficients[1], options.output_dt, points);
                y = volterra_convolve(h1, (coefficients.size() >= 2 && N >= 2) ? &h2 : nullptr, f);
            });
            rows.push_back({"convolution", L, points, conv});
        }
    }
    return rows;
}

} // namespace volpr
