#include "commands.hpp"

#include "volpr/coefficients.hpp"
#include "volpr/engine.hpp"
#include "volpr/error.hpp"
#include "volpr/io.hpp"

#include <Eigen/Core>
#include <boost/version.hpp>
#include <fftw3.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>

namespace volpr::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kVersion = "0.1.0";

template <class F>
auto timed(RunContext& ctx, const std::string& stage, F&& fn)
{
    const auto start = std::chrono::steady_clock::now();
    auto finish = [&] {
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        ctx.timings[stage] = ctx.timings.value(stage, 0.0) + s;
    };
    if constexpr (std::is_void_v<decltype(fn())>) {
        fn();
        finish();
    } else {
        auto result = fn();
        finish();
        return result;
    }
}

fs::path output(RunContext& ctx, const std::string& name)
{
    ctx.outputs.push_back(name);
    return ctx.out / name;
}

LaguerreBasis basis_for(const RunContext& ctx, int n)
{
    return LaguerreBasis(ctx.config.basis.a, ctx.config.rank_of(n, ctx.profile));
}

std::vector<KernelCoefficients> project_all(RunContext& ctx)
{
    const auto& p = ctx.config.system_or_throw();
    const auto& g = ctx.config.grids;
    std::vector<KernelCoefficients> c;
    for (int n = 1; n <= ctx.config.basis.N; ++n) {
        const std::string stage = "project_order" + std::to_string(n);
        c.push_back(timed(ctx, stage, [&] {
            if (n == 3) return project_coefficients3(p, g[2], basis_for(ctx, 3));
            return project_coefficients(frf_grid(p, n, g[n - 1]), basis_for(ctx, n));
        }));
    }
    return c;
}

// The excitation in pole-residue form, its forcing function for the
// integrators, and the sampled record when there is one.
struct Excitation {
    ExponentialSignal poles;
    Forcing forcing;
    std::optional<SampledSignal> sampled;
};

SampledSignal sample(const ExcitationConfig& e, std::uint64_t seed, std::vector<double>& phases)
{
    switch (e.kind) {
    case ExcitationKind::Multitone: {
        phases = e.phases.empty() ? random_phases(e.omegas.size(), seed) : e.phases;
        return multitone(e.amplitudes, e.omegas, phases, e.dt, e.horizon).sampled;
    }
    case ExcitationKind::WhiteNoise:
        return white_noise(e.s0, e.dt, e.samples, seed);
    case ExcitationKind::Csv:
        return io::read_sampled_signal(e.path);
    case ExcitationKind::Sinusoid:
        break;
    }
    throw ConfigError("excitation.kind", "a sinusoid has no sampled record");
}

Excitation excitation(RunContext& ctx, bool need_poles = true)
{
    const auto& e = ctx.config.excitation_or_throw();
    const std::uint64_t seed = ctx.seed.value_or(e.seed);
    Excitation x;
    if (e.kind == ExcitationKind::Sinusoid && e.amplitude == 0.0) {
        // no poles at all: every response order is identically zero
        x.forcing = [](double) { return 0.0; };
        return x;
    }
    if (e.kind == ExcitationKind::Sinusoid) {
        x.poles = sinusoid_poles(e.amplitude, e.omega);
        x.forcing = sinusoid_forcing(e.amplitude, e.omega);
        return x;
    }
    std::vector<double> phases;
    x.sampled = sample(e, seed, phases);
    if (e.kind == ExcitationKind::Multitone) {
        x.forcing = multitone_forcing(e.amplitudes, e.omegas, phases);
        ctx.results["phases"] = phases;
    } else {
        x.forcing = interpolated_forcing(*x.sampled);
    }
    if (!need_poles) return x;
    // an explicit rank mirrors the decompositions of sampled records; a
    // multitone without one keeps its exact components
    if (e.kind == ExcitationKind::Multitone && !e.rank) {
        x.poles = multitone(e.amplitudes, e.omegas, phases, e.dt, e.horizon).exact;
        return x;
    }
    PronyOptions options;
    options.rank = e.rank;
    const PronyReport report = timed(ctx, "prony", [&] { return prony_ss(*x.sampled, options); });
    ctx.results["prony_rank"] = report.rank;
    ctx.results["prony_relative_fit"] = report.signal.relative_fit;
    ctx.results["prony_components"] = report.signal.components.size();
    x.poles = report.signal;
    return x;
}

std::vector<double> output_times(const RunContext& ctx)
{
    return uniform_times(ctx.config.output.dt, ctx.config.output.horizon);
}

Trajectory reference(RunContext& ctx, const Forcing& forcing)
{
    const Rk4Config cfg{ctx.config.oracle_dt, ctx.config.output.horizon, ctx.config.output.dt};
    return timed(ctx, "rk4", [&] { return integrate_rk4(ctx.config.system_or_throw(), forcing, cfg); });
}

double relative_rms(std::span<const double> a, std::span<const double> b)
{
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (a[i] - b[i]) * (a[i] - b[i]);
        den += b[i] * b[i];
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

void write_coefficient_files(RunContext& ctx, const std::vector<KernelCoefficients>& c)
{
    for (std::size_t n = 0; n < c.size(); ++n) {
        const std::string stem = "c" + std::to_string(n + 1);
        output(ctx, stem + ".json");
        ctx.outputs.push_back(stem + ".bin");
        io::write_coefficients(ctx.out / stem, c[n]);
    }
}

ResponseTable write_response_files(RunContext& ctx, const ResponseOrders& response)
{
    const auto t = output_times(ctx);
    const ResponseTable table = timed(ctx, "evaluate", [&] { return tabulate(response, t); });
    io::write_response(output(ctx, "response.csv"), table);
    std::ofstream terms(output(ctx, "response_terms.json"));
    terms << io::to_json(response.total).dump(1) << '\n';
    ctx.results["terms"] = response.total.size();
    return table;
}

// ---- subcommands -----------------------------------------------------------

int cmd_frf(RunContext& ctx)
{
    const auto& p = ctx.config.system_or_throw();
    const auto& g = ctx.config.grids;
    const int N = ctx.config.basis.N;
    for (int n = 1; n <= std::min(N, 2); ++n) {
        const FrfGrid frf = timed(ctx, "frf_order" + std::to_string(n), [&] { return frf_grid(p, n, g[n - 1]); });
        const std::string stem = "frf" + std::to_string(n);
        output(ctx, stem + ".json");
        ctx.outputs.push_back(stem + ".bin");
        io::write_frf(ctx.out / stem, frf);
        if (n == 1) {
            double best = -1.0, at = 0.0;
            for (std::size_t i = 0; i < frf.values.size(); ++i) {
                const double w = g[0].omega(static_cast<int>(i));
                if (w >= 0.0 && std::abs(frf.values[i]) > best) best = std::abs(frf.values[i]), at = w;
            }
            ctx.results["h1_peak_omega"] = at;
        }
    }
    if (N >= 3) {
        // the full cube is too large to be useful on disk; the two diagonals
        // carry the harmonic structure
        std::vector<double> w(g[2].half_width + 1);
        for (std::size_t i = 0; i < w.size(); ++i)
            w[i] = static_cast<double>(i) * g[2].dw;
        const auto sum = timed(ctx, "frf_order3", [&] { return frf3_diagonal(p, w, false); });
        const auto diff = frf3_diagonal(p, w, true);
        std::vector<double> c[5];
        c[0] = w;
        for (std::size_t i = 0; i < w.size(); ++i) {
            c[1].push_back(sum[i].real());
            c[2].push_back(sum[i].imag());
            c[3].push_back(diff[i].real());
            c[4].push_back(diff[i].imag());
        }
        io::write_table(output(ctx, "frf3_diagonal.csv"), {"w", "re_www", "im_www", "re_wwmw", "im_wwmw"},
                        {c[0], c[1], c[2], c[3], c[4]});
    }
    return 0;
}

int cmd_kernels(RunContext& ctx)
{
    const auto& p = ctx.config.system_or_throw();
    const auto& g = ctx.config.grids;
    const int N = ctx.config.basis.N;
    for (int n = 1; n <= std::min(N, 2); ++n) {
        const auto h = timed(ctx, "kernel_order" + std::to_string(n), [&] { return kernel_time(frf_grid(p, n, g[n - 1])); });
        const std::string stem = "h" + std::to_string(n);
        output(ctx, stem + ".json");
        ctx.outputs.push_back(stem + ".bin");
        io::write_kernel(ctx.out / stem, h);
        ctx.results[stem + "_imag_residue"] = h.imag_residue;
    }
    if (N >= 3) {
        const auto t = output_times(ctx);
        const auto h3 = timed(ctx, "kernel_order3", [&] { return kernel3_diagonal_time(p, g[2], t); });
        io::write_table(output(ctx, "h3_diagonal.csv"), {"t", "h3"}, {t, h3});
    }
    return 0;
}

int cmd_project(RunContext& ctx)
{
    const auto c = project_all(ctx);
    write_coefficient_files(ctx, c);
    if (c.size() >= 3) {
        const auto check = timed(ctx, "projection_check",
                                 [&] { return check_projection(ctx.config.system_or_throw(), ctx.config.grids[2], c[2]); });
        ctx.results["order3_refinement_change"] = check.max_change;
        ctx.results["order3_converged"] = check.converged;
        std::printf("order-3 projection, dw halved: max change %.3e of max |c| (%s)\n", check.max_change,
                    check.converged ? "converged" : "not converged");
    }
    return 0;
}

int cmd_prony(RunContext& ctx)
{
    if (ctx.config.excitation_or_throw().kind == ExcitationKind::Sinusoid)
        throw ConfigError("excitation.kind", "prony needs a sampled excitation (multitone, whitenoise or csv)");
    const Excitation x = excitation(ctx);
    io::write_exponential_signal(output(ctx, "poles.csv"), x.poles);
    io::write_sampled_signal(output(ctx, "excitation.csv"), *x.sampled);
    std::printf("rank %d, %zu components, fit RMS %.3e of signal RMS\n", ctx.results.value("prony_rank", 0),
                x.poles.components.size(), x.poles.relative_fit);
    return 0;
}

int cmd_simulate(RunContext& ctx)
{
    const auto c = project_all(ctx);
    const Excitation x = excitation(ctx);
    const auto response = timed(ctx, "assemble", [&] { return assemble_response(c, x.poles, ctx.config.basis.N); });
    write_response_files(ctx, response);
    return 0;
}

int cmd_oracle(RunContext& ctx)
{
    const Excitation x = excitation(ctx, false);
    const Trajectory tr = reference(ctx, x.forcing);
    io::write_trajectory(output(ctx, "trajectory.csv"), tr);
    // the record uses the output grid [0, horizon), matching `simulate`
    const auto t = output_times(ctx);
    IoRecord record;
    record.dt = ctx.config.output.dt;
    for (std::size_t i = 0; i < t.size(); ++i) {
        record.input.push_back(x.sampled && x.sampled->dt == record.dt && i < x.sampled->samples.size()
                                   ? x.sampled->samples[i]
                                   : x.forcing(t[i]));
        record.output.push_back(tr.y[i]);
    }
    io::write_io_record(output(ctx, "record.csv"), record);
    return 0;
}

IdentifiedKernels identified(RunContext& ctx)
{
    const auto& id = ctx.config.identification_or_throw();
    const IoRecord record = io::read_io_record(id.record);
    FitOptions options;
    options.order = id.order;
    options.ridge = id.ridge;
    const auto model = timed(ctx, "fit", [&] { return fit(record, basis_for(ctx, 1), options); });
    ctx.results["relative_residual"] = model.relative_residual;
    ctx.results["rank"] = model.rank;
    ctx.results["unknowns"] = model.unknowns;
    return model;
}

int cmd_identify(RunContext& ctx)
{
    const auto model = identified(ctx);
    write_coefficient_files(ctx, model.coefficients);
    std::printf("%d unknowns, rank %d, relative residual %.3e\n", model.unknowns, model.rank, model.relative_residual);
    return 0;
}

int cmd_predict(RunContext& ctx)
{
    const auto model = identified(ctx);
    const Excitation x = excitation(ctx);
    const auto response = timed(ctx, "assemble", [&] { return predict(model, x.poles); });
    write_response_files(ctx, response);
    return 0;
}

int cmd_benchmark(RunContext& ctx)
{
    const auto& e = ctx.config.excitation_or_throw();
    if (e.kind != ExcitationKind::Sinusoid) throw ConfigError("excitation.kind", "benchmark runs on a sinusoid");
    const auto c = project_all(ctx);
    const auto rows = timed(ctx, "benchmark", [&] {
        return run_benchmark(ctx.config.system_or_throw(), c, ctx.config.basis.N, e.amplitude, e.omega,
                             ctx.config.benchmark);
    });
    std::ofstream out(output(ctx, "benchmark.csv"));
    out << "method,length,points,seconds\n";
    for (const auto& r : rows) {
        out << r.method << ',' << io::format_number(r.length) << ',' << r.points << ',' << io::format_number(r.seconds)
            << '\n';
        std::printf("%-24s L=%6.0f s %7zu points %10.4f s\n", r.method.c_str(), r.length, r.points, r.seconds);
    }
    return 0;
}

int cmd_verify(RunContext& ctx)
{
    const auto& v = ctx.config.verify;
    bool pass = true;
    auto report = [&](bool ok, const std::string& line) {
        std::printf("[%s] %s\n", ok ? "PASS" : "FAIL", line.c_str());
        pass &= ok;
    };
    char buf[256];

    if (ctx.config.identification) {
        const auto model = identified(ctx);
        std::snprintf(buf, sizeof buf, "fit residual %.3e (limit %.3g)", model.relative_residual, v.tolerance);
        report(model.relative_residual <= v.tolerance, buf);
    } else {
        const auto c = project_all(ctx);
        const Excitation x = excitation(ctx);
        if (x.sampled && x.poles.relative_fit > 0.0) {
            std::snprintf(buf, sizeof buf, "Prony fit %.3e of signal RMS (limit %.3g)", x.poles.relative_fit,
                          v.fit_tolerance);
            report(x.poles.relative_fit <= v.fit_tolerance, buf);
        }
        const auto response = timed(ctx, "assemble", [&] { return assemble_response(c, x.poles, ctx.config.basis.N); });
        const auto t = output_times(ctx);
        const auto table = timed(ctx, "evaluate", [&] { return tabulate(response, t); });
        const Trajectory tr = reference(ctx, x.forcing);
        const std::span<const double> y(tr.y.data(), t.size());
        const double err = relative_rms(table.total, y);
        ctx.results["relative_rms_vs_rk4"] = err;
        std::snprintf(buf, sizeof buf, "closed form (N=%d) vs RK4 relative RMS %.3e (limit %.3g)", ctx.config.basis.N,
                      err, v.tolerance);
        report(err <= v.tolerance, buf);
    }
    ctx.results["verified"] = pass;
    return pass ? 0 : 1;
}

const std::map<std::string, std::function<int(RunContext&)>>& commands()
{
    static const std::map<std::string, std::function<int(RunContext&)>> table{
        {"frf", cmd_frf},         {"kernels", cmd_kernels},     {"project", cmd_project},
        {"prony", cmd_prony},     {"simulate", cmd_simulate},   {"identify", cmd_identify},
        {"predict", cmd_predict}, {"oracle", cmd_oracle},       {"benchmark", cmd_benchmark},
        {"verify", cmd_verify},
    };
    return table;
}

} // namespace

int run_command(const std::string& name, RunContext& ctx)
{
    const auto it = commands().find(name);
    if (it == commands().end()) throw ConfigError("<subcommand>", "unknown subcommand " + name);
    fs::create_directories(ctx.out);
    return timed(ctx, "total", [&] { return it->second(ctx); });
}

void write_manifest(const std::string& name, const RunContext& ctx)
{
    const std::string profile = ctx.profile == Profile::Desk ? "desk" : "paper";
    // the hash covers everything that determines the outputs
    json identity = {{"config", ctx.config.source}, {"subcommand", name}, {"profile", profile}};
    if (ctx.seed) identity["seed"] = *ctx.seed;
    char hash[17];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a(identity.dump())));

    json m;
    m["subcommand"] = name;
    m["config_path"] = ctx.config_path.string();
    m["config_hash"] = std::string("fnv1a64:") + hash;
    m["profile"] = profile;
    m["seed"] = ctx.seed ? json(*ctx.seed) : json(nullptr);
    json& versions = m["versions"];
    versions["volpr"] = kVersion;
    versions["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "."
                        + std::to_string(EIGEN_MINOR_VERSION);
    versions["boost"] = BOOST_LIB_VERSION;
    versions["fftw"] = std::string(fftw_version);
    versions["compiler"] = __VERSION__;
    m["timings_seconds"] = ctx.timings;
    m["outputs"] = ctx.outputs;
    m["results"] = ctx.results;
    std::ofstream out(ctx.out / "manifest.json");
    if (!out) throw Error("cannot write " + (ctx.out / "manifest.json").string());
    out << m.dump(2) << '\n';
}

} // namespace volpr::cli
