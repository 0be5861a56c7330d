#include "volpr/excitation.hpp"

#include "volpr/error.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace volpr {

std::vector<Complex> ExponentialSignal::reconstruct(std::span<const double> t) const
{
    std::vector<Complex> out(t.size(), Complex{});
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!(t[i] >= 0.0) || !(t[i] < horizon))
            throw DomainError("excitation evaluated outside its validity window");
        Complex sum{};
        for (const auto& c : components)
            sum += c.alpha * std::exp(c.lambda * t[i]);
        out[i] = sum;
    }
    return out;
}

std::vector<double> ExponentialSignal::reconstruct_real(std::span<const double> t) const
{
    const auto z = reconstruct(t);
    std::vector<double> out(z.size());
    std::transform(z.begin(), z.end(), out.begin(), [](Complex v) { return v.real(); });
    return out;
}

double ExponentialSignal::conjugate_mismatch() const
{
    double worst = 0.0;
    for (const auto& c : components) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& d : components) {
            const double dist = std::abs(c.lambda - std::conj(d.lambda)) + std::abs(c.alpha - std::conj(d.alpha));
            best = std::min(best, dist);
        }
        worst = std::max(worst, best);
    }
    return worst;
}

std::vector<double> SampledSignal::times() const
{
    std::vector<double> t(samples.size());
    for (std::size_t i = 0; i < t.size(); ++i)
        t[i] = static_cast<double>(i) * dt;
    return t;
}

std::vector<double> uniform_times(double dt, double horizon)
{
    if (!(dt > 0.0)) throw DomainError("time step must be positive");
    const auto n = static_cast<std::size_t>(std::ceil(horizon / dt - 1e-9));
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i)
        t[i] = static_cast<double>(i) * dt;
    return t;
}

ExponentialSignal sinusoid_poles(double amplitude, double omega, double horizon)
{
    if (!(amplitude > 0.0) || !(omega > 0.0))
        throw DomainError("sinusoid needs positive amplitude and frequency");
    ExponentialSignal s;
    s.horizon = horizon;
    s.components.push_back({Complex(0.0, -amplitude / 2.0), Complex(0.0, omega)});
    s.components.push_back({Complex(0.0, amplitude / 2.0), Complex(0.0, -omega)});
    return s;
}

Multitone multitone(std::span<const double> amplitude, std::span<const double> omega,
                    std::span<const double> phase, double dt, double horizon)
{
    if (amplitude.size() != omega.size() || omega.size() != phase.size())
        throw DomainError("multitone amplitude, frequency and phase lists differ in length");
    Multitone m;
    m.exact.horizon = kUnbounded;
    for (std::size_t n = 0; n < omega.size(); ++n) {
        const Complex half = 0.5 * amplitude[n] * std::exp(Complex(0.0, phase[n]));
        m.exact.components.push_back({half, Complex(0.0, omega[n])});
        m.exact.components.push_back({std::conj(half), Complex(0.0, -omega[n])});
    }
    m.sampled.dt = dt;
    const auto t = uniform_times(dt, horizon);
    m.sampled.samples.resize(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        double v = 0.0;
        for (std::size_t n = 0; n < omega.size(); ++n)
            v += amplitude[n] * std::cos(omega[n] * t[i] + phase[n]);
        m.sampled.samples[i] = v;
    }
    return m;
}

std::vector<double> random_phases(std::size_t n, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(0.0, 2.0 * std::numbers::pi);
    std::vector<double> out(n);
    for (auto& v : out)
        v = dist(rng);
    return out;
}

SampledSignal white_noise(double s0, double dt, std::size_t n, std::uint64_t seed)
{
    if (!(s0 >= 0.0)) throw DomainError("spectral height must be non-negative");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, std::sqrt(s0 * std::numbers::pi / dt));
    SampledSignal s;
    s.dt = dt;
    s.samples.resize(n);
    for (auto& v : s.samples)
        v = dist(rng);
    return s;
}

namespace {

// Pair every pole with its nearest conjugate and average the pair so that the
// fitted form is exactly conjugate-closed. Distances are measured between the
// discrete eigenvalues mu = exp(lambda dt), where conjugation is unambiguous.
// A negative real mu sits on the Nyquist line (Im lambda = pi/dt) and is its
// own conjugate; it is split into the pair log|mu|/dt +- i pi/dt with half
// the residue each, which leaves every sample unchanged.
void symmetrize(std::vector<ExpComponent>& comps, double dt)
{
    const std::size_t n = comps.size();
    std::vector<Complex> mu(n);
    for (std::size_t i = 0; i < n; ++i)
        mu[i] = std::exp(comps[i].lambda * dt);
    std::vector<bool> done(n, false);
    std::vector<ExpComponent> extra;
    for (std::size_t i = 0; i < n; ++i) {
        if (done[i]) continue;
        std::size_t best = i;
        double best_dist = 2.0 * std::abs(mu[i].imag());
        for (std::size_t j = i + 1; j < n; ++j) {
            if (done[j]) continue;
            const double d = std::abs(mu[i] - std::conj(mu[j]));
            if (d < best_dist) {
                best = j;
                best_dist = d;
            }
        }
        done[i] = true;
        if (best == i) {
            if (mu[i].real() >= 0.0) {
                comps[i].lambda.imag(0.0);
                comps[i].alpha.imag(0.0);
            } else {
                const double decay = std::log(std::abs(mu[i].real())) / dt;
                const double nyquist = std::numbers::pi / dt;
                const double half = 0.5 * comps[i].alpha.real();
                comps[i] = {Complex(half, 0.0), Complex(decay, nyquist)};
                extra.push_back({Complex(half, 0.0), Complex(decay, -nyquist)});
            }
            continue;
        }
        done[best] = true;
        const Complex lam = 0.5 * (comps[i].lambda + std::conj(comps[best].lambda));
        const Complex alpha = 0.5 * (comps[i].alpha + std::conj(comps[best].alpha));
        comps[i] = {alpha, lam};
        comps[best] = {std::conj(alpha), std::conj(lam)};
    }
    comps.insert(comps.end(), extra.begin(), extra.end());
}

} // namespace

PronyReport prony_ss(const SampledSignal& x, const PronyOptions& options)
{
    const auto N = static_cast<Eigen::Index>(x.size());
    if (!(x.dt > 0.0)) throw DomainError("sample interval must be positive");
    if (N < 2) throw DomainError("Prony decomposition needs at least two samples");
    for (double v : x.samples)
        if (!std::isfinite(v)) throw DomainError("non-finite sample in Prony input");

    const Eigen::Index L = N / 2 + 1;
    const Eigen::Index K = N - L + 1;
    Eigen::MatrixXd hankel(L, K);
    for (Eigen::Index j = 0; j < K; ++j)
        for (Eigen::Index i = 0; i < L; ++i)
            hankel(i, j) = x.samples[static_cast<std::size_t>(i + j)];

    Eigen::BDCSVD<Eigen::MatrixXd> svd(hankel, Eigen::ComputeThinU);
    const Eigen::VectorXd& sigma = svd.singularValues();

    PronyReport report;
    report.signal.dt = x.dt;
    report.signal.horizon = x.horizon();
    const Eigen::Index keep = std::min<Eigen::Index>(sigma.size(), 200);
    report.singular_values.assign(sigma.data(), sigma.data() + keep);

    int rank = 0;
    if (options.rank) {
        rank = *options.rank;
        if (rank < 0) throw DomainError("Prony rank must be non-negative");
        if (rank > std::min(L - 1, K))
            throw DomainError("Prony rank " + std::to_string(rank) + " exceeds the Hankel dimension");
        if (N < 2 * rank) throw DomainError("Prony rank needs at least twice as many samples");
    } else if (sigma.size() > 0 && sigma(0) > 0.0) {
        while (rank < std::min<Eigen::Index>(sigma.size(), L - 1)
               && sigma(rank) > options.singular_threshold * sigma(0))
            ++rank;
    }
    report.rank = rank;
    if (rank == 0) return report;

    const Eigen::MatrixXd U = svd.matrixU().leftCols(rank);
    const Eigen::MatrixXd up = U.topRows(L - 1);
    const Eigen::MatrixXd down = U.bottomRows(L - 1);
    const Eigen::MatrixXd A = up.colPivHouseholderQr().solve(down);

    Eigen::EigenSolver<Eigen::MatrixXd> eig(A, false);
    if (eig.info() != Eigen::Success) throw DecompositionError("state matrix eigen-decomposition failed");
    const Eigen::VectorXcd mu = eig.eigenvalues();

    std::vector<Complex> lambda(rank);
    for (int j = 0; j < rank; ++j) {
        if (std::abs(mu(j)) == 0.0)
            throw DecompositionError("zero state-matrix eigenvalue; the decomposition is ill-posed");
        lambda[j] = std::log(Complex(mu(j))) / x.dt;
    }

    // residues over the whole record
    Eigen::MatrixXcd V(N, rank);
    for (int j = 0; j < rank; ++j)
        for (Eigen::Index n = 0; n < N; ++n)
            V(n, j) = std::exp(lambda[j] * (static_cast<double>(n) * x.dt));
    Eigen::VectorXcd rhs(N);
    for (Eigen::Index n = 0; n < N; ++n)
        rhs(n) = x.samples[static_cast<std::size_t>(n)];
    const Eigen::VectorXcd alpha = V.colPivHouseholderQr().solve(rhs);

    auto& comps = report.signal.components;
    comps.resize(rank);
    for (int j = 0; j < rank; ++j)
        comps[j] = {alpha(j), lambda[j]};
    symmetrize(comps, x.dt);

    double err2 = 0.0, sig2 = 0.0, max_im = 0.0;
    for (Eigen::Index n = 0; n < N; ++n) {
        Complex v{};
        for (const auto& c : comps)
            v += c.alpha * std::exp(c.lambda * (static_cast<double>(n) * x.dt));
        const double s = x.samples[static_cast<std::size_t>(n)];
        err2 += (v.real() - s) * (v.real() - s);
        sig2 += s * s;
    }
    for (const auto& c : comps)
        max_im = std::max(max_im, std::abs(c.lambda.imag()));
    report.signal.relative_fit = sig2 > 0.0 ? std::sqrt(err2 / sig2) : std::sqrt(err2);
    report.max_frequency_fraction = max_im * x.dt / std::numbers::pi;
    return report;
}

} // namespace volpr
