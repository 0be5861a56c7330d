#include "config.hpp"

#include "volpr/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>

namespace volpr::cli {

namespace {

using nlohmann::json;

// A JSON object plus its dotted path. Every key read is remembered so that
// leftovers can be reported as unknown.
class Block {
public:
    Block(const json& j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
    }

    std::string key(const std::string& name) const { return path_.empty() ? name : path_ + "." + name; }

    bool has(const std::string& name) const { return j_.contains(name); }

    const json& raw(const std::string& name)
    {
        seen_.insert(name);
        return j_.at(name);
    }

    Block block(const std::string& name) { return Block(raw(name), key(name)); }

    // Rejects keys outside `names` before any value is interpreted, so a
    // typo is reported as such rather than as a missing entry.
    void allow(std::initializer_list<const char*> names) const
    {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (std::find_if(names.begin(), names.end(), [&](const char* n) { return it.key() == n; }) == names.end())
                throw ConfigError(key(it.key()), "unknown key");
    }

    double number(const std::string& name, double fallback)
    {
        if (!has(name)) return fallback;
        const json& v = raw(name);
        if (!v.is_number()) throw ConfigError(key(name), "expected a number");
        const double x = v.get<double>();
        if (!std::isfinite(x)) throw ConfigError(key(name), "must be finite");
        return x;
    }

    double positive(const std::string& name, double fallback)
    {
        const double x = number(name, fallback);
        if (!(x > 0.0)) throw ConfigError(key(name), "must be positive");
        return x;
    }

    long long integer(const std::string& name, long long fallback)
    {
        if (!has(name)) return fallback;
        const json& v = raw(name);
        if (!v.is_number_integer()) throw ConfigError(key(name), "expected an integer");
        return v.get<long long>();
    }

    std::string text(const std::string& name, const std::string& fallback)
    {
        if (!has(name)) return fallback;
        const json& v = raw(name);
        if (!v.is_string()) throw ConfigError(key(name), "expected a string");
        return v.get<std::string>();
    }

    bool flag(const std::string& name, bool fallback)
    {
        if (!has(name)) return fallback;
        const json& v = raw(name);
        if (!v.is_boolean()) throw ConfigError(key(name), "expected true or false");
        return v.get<bool>();
    }

    std::vector<double> numbers(const std::string& name)
    {
        if (!has(name)) return {};
        const json& v = raw(name);
        if (!v.is_array()) throw ConfigError(key(name), "expected a list of numbers");
        std::vector<double> out;
        for (const auto& x : v) {
            if (!x.is_number()) throw ConfigError(key(name), "expected a list of numbers");
            out.push_back(x.get<double>());
        }
        return out;
    }

    // A scalar applies to every order; a list gives one value per order.
    template <class T, class Get>
    std::array<T, 3> per_order(const std::string& name, std::array<T, 3> fallback, Get get)
    {
        if (!has(name)) return fallback;
        const json& v = raw(name);
        if (!v.is_array()) {
            const T x = get(v, key(name));
            return {x, x, x};
        }
        if (v.empty() || v.size() > 3) throw ConfigError(key(name), "expected 1 to 3 entries, one per order");
        std::array<T, 3> out = fallback;
        for (std::size_t i = 0; i < v.size(); ++i)
            out[i] = get(v[i], key(name) + "[" + std::to_string(i) + "]");
        return out;
    }

    void finish() const
    {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) throw ConfigError(key(it.key()), "unknown key");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

int get_rank(const json& v, const std::string& key)
{
    if (!v.is_number_integer() || v.get<long long>() < 0 || v.get<long long>() > 200)
        throw ConfigError(key, "expected an integer basis size in [0, 200]");
    return v.get<int>();
}

double get_positive(const json& v, const std::string& key)
{
    if (!v.is_number() || !(v.get<double>() > 0.0)) throw ConfigError(key, "expected a positive number");
    return v.get<double>();
}

int get_half_width(const json& v, const std::string& key)
{
    if (!v.is_number_integer() || v.get<long long>() < 1 || v.get<long long>() > (1 << 20))
        throw ConfigError(key, "expected a positive integer");
    return v.get<int>();
}

OscillatorParams parse_system(Block b)
{
    b.allow({"m", "c", "k1", "k2", "k3"});
    OscillatorParams p;
    p.m = b.positive("m", p.m);
    p.c = b.number("c", p.c);
    p.k1 = b.positive("k1", p.k1);
    p.k2 = b.number("k2", p.k2);
    p.k3 = b.number("k3", p.k3);
    b.finish();
    try {
        p.validate();
    } catch (const DomainError& e) {
        throw ConfigError("system", e.what());
    }
    return p;
}

IdentificationConfig parse_identification(Block b)
{
    b.allow({"record", "order", "ridge"});
    IdentificationConfig id;
    const std::string record = b.text("record", "");
    if (record.empty()) throw ConfigError(b.key("record"), "path to a t,f,y CSV record is required");
    id.record = record;
    id.order = static_cast<int>(b.integer("order", id.order));
    if (id.order != 1 && id.order != 2) throw ConfigError(b.key("order"), "must be 1 or 2");
    id.ridge = b.number("ridge", id.ridge);
    if (id.ridge < 0.0) throw ConfigError(b.key("ridge"), "must be non-negative");
    b.finish();
    return id;
}

BasisConfig parse_basis(Block b)
{
    b.allow({"a", "R", "desk_R3", "N"});
    BasisConfig basis;
    basis.a = b.positive("a", basis.a);
    basis.R = b.per_order<int>("R", basis.R, get_rank);
    if (b.has("desk_R3")) basis.desk_R3 = get_rank(b.raw("desk_R3"), b.key("desk_R3"));
    basis.N = static_cast<int>(b.integer("N", basis.N));
    if (basis.N < 1 || basis.N > 3) throw ConfigError(b.key("N"), "series order must be 1, 2 or 3");
    b.finish();
    return basis;
}

ExcitationKind parse_kind(const std::string& s, const std::string& key)
{
    if (s == "sinusoid") return ExcitationKind::Sinusoid;
    if (s == "multitone") return ExcitationKind::Multitone;
    if (s == "whitenoise") return ExcitationKind::WhiteNoise;
    if (s == "csv") return ExcitationKind::Csv;
    throw ConfigError(key, "unknown kind '" + s + "' (sinusoid, multitone, whitenoise, csv)");
}

ExcitationConfig parse_excitation(Block b)
{
    b.allow({"kind", "rank", "seed", "amplitude", "omega", "omega_over_pi", "amplitudes", "omegas", "phases", "tones",
             "omega_min", "omega_max", "dt", "horizon", "s0", "samples", "path"});
    ExcitationConfig e;
    if (!b.has("kind")) throw ConfigError(b.key("kind"), "required");
    e.kind = parse_kind(b.text("kind", ""), b.key("kind"));
    if (b.has("rank")) {
        const long long r = b.integer("rank", 0);
        if (r < 1) throw ConfigError(b.key("rank"), "must be a positive integer");
        e.rank = static_cast<int>(r);
    }
    const long long seed = b.integer("seed", 1);
    if (seed < 0) throw ConfigError(b.key("seed"), "must be non-negative");
    e.seed = static_cast<std::uint64_t>(seed);

    switch (e.kind) {
    case ExcitationKind::Sinusoid:
        e.amplitude = b.number("amplitude", e.amplitude);
        if (e.amplitude < 0.0) throw ConfigError(b.key("amplitude"), "must be non-negative");
        if (b.has("omega") == b.has("omega_over_pi"))
            throw ConfigError(b.key("omega"), "give exactly one of omega and omega_over_pi");
        e.omega = b.has("omega") ? b.number("omega", 0.0) : std::numbers::pi * b.number("omega_over_pi", 0.0);
        if (!(e.omega > 0.0) && e.amplitude > 0.0) throw ConfigError(b.key("omega"), "must be positive");
        break;
    case ExcitationKind::Multitone: {
        e.dt = b.positive("dt", e.dt);
        e.horizon = b.positive("horizon", e.horizon);
        e.omegas = b.numbers("omegas");
        if (e.omegas.empty()) {
            const long long tones = b.integer("tones", 0);
            if (tones < 1) throw ConfigError(b.key("tones"), "give tones (with omega_max) or an omegas list");
            const double lo = b.number("omega_min", 0.0);
            const double hi = b.number("omega_max", lo);
            if (hi < lo) throw ConfigError(b.key("omega_max"), "must not be below omega_min");
            for (long long n = 0; n < tones; ++n)
                e.omegas.push_back(tones == 1 ? lo : lo + (hi - lo) * static_cast<double>(n) / static_cast<double>(tones - 1));
        }
        e.amplitudes = b.numbers("amplitudes");
        if (e.amplitudes.empty()) e.amplitudes.assign(e.omegas.size(), b.number("amplitude", e.amplitude));
        if (e.amplitudes.size() != e.omegas.size()) throw ConfigError(b.key("amplitudes"), "one amplitude per tone");
        e.phases = b.numbers("phases");
        if (!e.phases.empty() && e.phases.size() != e.omegas.size()) throw ConfigError(b.key("phases"), "one phase per tone");
        break;
    }
    case ExcitationKind::WhiteNoise: {
        e.s0 = b.positive("s0", e.s0);
        e.dt = b.positive("dt", e.dt);
        const long long n = b.integer("samples", 0);
        if (n < 2) throw ConfigError(b.key("samples"), "at least 2 samples are required");
        e.samples = static_cast<std::size_t>(n);
        e.horizon = e.dt * static_cast<double>(n);
        break;
    }
    case ExcitationKind::Csv: {
        const std::string path = b.text("path", "");
        if (path.empty()) throw ConfigError(b.key("path"), "path to a t,f CSV is required");
        e.path = path;
        break;
    }
    }
    b.finish();
    return e;
}

std::array<FrequencyGrid, 3> parse_grids(Block b, std::array<FrequencyGrid, 3> grids)
{
    b.allow({"dw", "half_width"});
    const auto dw = b.per_order<double>("dw", {grids[0].dw, grids[1].dw, grids[2].dw}, get_positive);
    const auto hw = b.per_order<int>("half_width", {grids[0].half_width, grids[1].half_width, grids[2].half_width},
                                     get_half_width);
    b.finish();
    for (int n = 0; n < 3; ++n)
        grids[n] = {dw[n], hw[n]};
    return grids;
}

BenchmarkOptions parse_benchmark(Block b)
{
    b.allow({"lengths", "rk45", "convolution_max_length"});
    BenchmarkOptions o;
    const auto lengths = b.numbers("lengths");
    if (!lengths.empty()) o.lengths = lengths;
    for (double L : o.lengths)
        if (!(L > 0.0)) throw ConfigError(b.key("lengths"), "lengths must be positive");
    o.rk45 = b.flag("rk45", o.rk45);
    o.convolution_max_length = b.number("convolution_max_length", o.convolution_max_length);
    b.finish();
    return o;
}

} // namespace

int ExperimentConfig::rank_of(int n, Profile profile) const
{
    if (n == 3 && profile == Profile::Desk) return std::min(basis.R[2], basis.desk_R3);
    return basis.R[n - 1];
}

const OscillatorParams& ExperimentConfig::system_or_throw() const
{
    if (!system) throw ConfigError("system", "this subcommand needs a system block");
    return *system;
}

const ExcitationConfig& ExperimentConfig::excitation_or_throw() const
{
    if (!excitation) throw ConfigError("excitation", "this subcommand needs an excitation block");
    return *excitation;
}

const IdentificationConfig& ExperimentConfig::identification_or_throw() const
{
    if (!identification) throw ConfigError("identification", "this subcommand needs an identification block");
    return *identification;
}

ExperimentConfig parse_config(const json& doc, const std::filesystem::path& base)
{
    ExperimentConfig c;
    c.source = doc;
    c.base = base;
    Block root(doc, "");
    root.allow({"description", "system", "identification", "basis", "excitation", "grids", "output", "oracle",
                "benchmark", "verify"});
    if (root.has("system") == root.has("identification"))
        throw ConfigError("system", "exactly one of the system and identification blocks is required");
    if (root.has("system")) c.system = parse_system(root.block("system"));
    if (root.has("identification")) {
        c.identification = parse_identification(root.block("identification"));
        if (c.identification->record.is_relative()) c.identification->record = base / c.identification->record;
    }
    if (root.has("basis")) c.basis = parse_basis(root.block("basis"));
    if (root.has("excitation")) {
        c.excitation = parse_excitation(root.block("excitation"));
        if (c.excitation->kind == ExcitationKind::Csv && c.excitation->path.is_relative())
            c.excitation->path = base / c.excitation->path;
    }
    if (root.has("grids")) c.grids = parse_grids(root.block("grids"), c.grids);
    if (root.has("output")) {
        Block b = root.block("output");
        c.output.dt = b.positive("dt", c.output.dt);
        c.output.horizon = b.positive("horizon", c.output.horizon);
        b.finish();
    }
    if (root.has("oracle")) {
        Block b = root.block("oracle");
        c.oracle_dt = b.positive("dt", c.oracle_dt);
        b.finish();
    }
    if (root.has("benchmark")) c.benchmark = parse_benchmark(root.block("benchmark"));
    if (root.has("verify")) {
        Block b = root.block("verify");
        c.verify.tolerance = b.positive("tolerance", c.verify.tolerance);
        c.verify.fit_tolerance = b.positive("fit_tolerance", c.verify.fit_tolerance);
        b.finish();
    }
    root.text("description", "");
    root.finish();

    const double ratio = c.output.dt / c.oracle_dt;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio)
        throw ConfigError("oracle.dt", "output.dt must be a whole multiple of the integration step");
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("--config", "cannot open " + path.string());
    json doc;
    try {
        doc = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError("--config", std::string("not valid JSON: ") + e.what());
    }
    return parse_config(doc, path.parent_path());
}

std::uint64_t fnv1a(std::string_view bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace volpr::cli
